use std::collections::BTreeMap;

use rand::Rng;

use super::{EnvError, LabeledEnv};
use crate::label::{Alphabet, Letter};
use crate::SimRng;

pub const GRID_ACTIONS: [&str; 5] = ["left", "right", "up", "down", "stay"];
const STAY: usize = 4;
const LABEL_CHARS: &str = "isuptABCn";

/// Parsed grid fixture. Coordinates are `(x, y)` with `x` the column and `y`
/// the row counted from the top; `up` decreases `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// One label character per cell, row-major; `#` marks a blocked cell.
    pub cells: Vec<char>,
    /// Probability that the intended move is executed.
    pub slip: f64,
    /// Labels whose `stay` action is a deterministic self-loop.
    pub absorbing: Vec<char>,
    pub start: (usize, usize),
    /// Per-label action restrictions.
    pub restricted: Vec<(char, Vec<usize>)>,
}

impl GridSpec {
    pub fn cell(&self, x: usize, y: usize) -> char {
        self.cells[y * self.width + x]
    }

    /// Nearest-neighbour resampling onto a `size × size` grid.
    pub fn resized(&self, size: usize) -> GridSpec {
        let mut cells = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                cells.push(self.cell(x * self.width / size, y * self.height / size));
            }
        }
        GridSpec {
            width: size,
            height: size,
            cells,
            start: (self.start.0 * size / self.width, self.start.1 * size / self.height),
            ..self.clone()
        }
    }
}

fn ferr(line: usize, message: impl Into<String>) -> EnvError {
    EnvError::Format {
        line,
        message: message.into(),
    }
}

/// Parses the grid fixture format: `key: value` headers followed by one row
/// of label characters per line.
pub fn load_grid(text: &str) -> Result<GridSpec, EnvError> {
    let mut slip = 0.85;
    let mut absorbing = Vec::new();
    let mut start = None;
    let mut restricted = Vec::new();
    let mut rows: Vec<Vec<char>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            let value = value.trim();
            match key.trim() {
                "slip" => {
                    slip = value
                        .parse::<f64>()
                        .map_err(|e| ferr(line_no, format!("bad slip: {e}")))?;
                    if !(0.0..=1.0).contains(&slip) {
                        return Err(ferr(line_no, "slip must lie in [0, 1]"));
                    }
                }
                "absorbing" => {
                    for tok in value.split_whitespace() {
                        let c = single_label(tok, line_no)?;
                        absorbing.push(c);
                    }
                }
                "start" => {
                    let (x, y) = value
                        .split_once(',')
                        .ok_or_else(|| ferr(line_no, "expected `start: x,y`"))?;
                    let x = x.trim().parse().map_err(|_| ferr(line_no, "bad x coordinate"))?;
                    let y = y.trim().parse().map_err(|_| ferr(line_no, "bad y coordinate"))?;
                    start = Some((x, y));
                }
                "actions" => {
                    let (label, acts) = value
                        .split_once('=')
                        .ok_or_else(|| ferr(line_no, "expected `actions: <label> = <action>...`"))?;
                    let c = single_label(label.trim(), line_no)?;
                    let mut list = Vec::new();
                    for a in acts.split_whitespace() {
                        let k = GRID_ACTIONS
                            .iter()
                            .position(|n| *n == a)
                            .ok_or_else(|| ferr(line_no, format!("unknown action `{a}`")))?;
                        list.push(k);
                    }
                    if list.is_empty() {
                        return Err(ferr(line_no, "a label needs at least one action"));
                    }
                    // listed order is kept: it decides ties between equal Q values
                    if (1..list.len()).any(|i| list[..i].contains(&list[i])) {
                        return Err(ferr(line_no, "duplicate action"));
                    }
                    restricted.push((c, list));
                }
                other => return Err(ferr(line_no, format!("unknown key `{other}`"))),
            }
            continue;
        }
        let row: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(bad) = row.iter().find(|c| **c != '#' && !LABEL_CHARS.contains(**c)) {
            return Err(ferr(line_no, format!("unknown cell character `{bad}`")));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(ferr(line_no, "rows have different widths"));
            }
        }
        rows.push(row);
    }
    let end = text.lines().count().max(1);
    if rows.is_empty() {
        return Err(ferr(end, "grid has no rows"));
    }
    let width = rows[0].len();
    let height = rows.len();
    let cells: Vec<char> = rows.into_iter().flatten().collect();
    let start = match start {
        Some(s) => s,
        None => {
            let k = cells
                .iter()
                .position(|&c| c == 'i')
                .ok_or_else(|| ferr(end, "no `start:` line and no cell labelled i"))?;
            (k % width, k / width)
        }
    };
    let spec = GridSpec {
        width,
        height,
        cells,
        slip,
        absorbing,
        start,
        restricted,
    };
    if start.0 >= width || start.1 >= height || spec.cell(start.0, start.1) == '#' {
        return Err(ferr(end, "start cell is outside the grid or blocked"));
    }
    Ok(spec)
}

fn single_label(tok: &str, line: usize) -> Result<char, EnvError> {
    let mut chars = tok.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if LABEL_CHARS.contains(c) => Ok(c),
        _ => Err(ferr(line, format!("`{tok}` is not a label"))),
    }
}

pub fn grid_alphabet() -> Alphabet {
    Alphabet::new(LABEL_CHARS.chars().map(String::from)).expect("static alphabet")
}

/// Slippery grid world.
#[derive(Debug, Clone)]
pub struct GridEnv {
    spec: GridSpec,
    alphabet: Alphabet,
    labels: Vec<Letter>,
    actions: Vec<Vec<usize>>,
    // resolved target of each action, per cell
    intended: Vec<[usize; 5]>,
    // resolved slip targets (the cell itself plus on-grid neighbours), per cell
    neighbourhood: Vec<Vec<usize>>,
    absorbing: Vec<bool>,
}

impl GridEnv {
    pub fn new(spec: GridSpec) -> Result<Self, EnvError> {
        let alphabet = grid_alphabet();
        let (w, h) = (spec.width, spec.height);
        let n = w * h;
        let mut labels = Vec::with_capacity(n);
        let mut actions = Vec::with_capacity(n);
        let mut intended = Vec::with_capacity(n);
        let mut neighbourhood = Vec::with_capacity(n);
        let mut absorbing = Vec::with_capacity(n);
        for c in 0..n {
            let (x, y) = (c % w, c / w);
            let ch = spec.cells[c];
            labels.push(if ch == '#' {
                Letter::EMPTY
            } else {
                alphabet.letter(&[ch.to_string()]).expect("grid label")
            });
            absorbing.push(spec.absorbing.contains(&ch));
            let acts = spec
                .restricted
                .iter()
                .find(|(l, _)| *l == ch)
                .map(|(_, a)| a.clone())
                .unwrap_or_else(|| (0..GRID_ACTIONS.len()).collect());
            actions.push(acts);
            let resolve = |dx: isize, dy: isize| -> Option<usize> {
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    return None;
                }
                let t = ny as usize * w + nx as usize;
                Some(if spec.cells[t] == '#' { c } else { t })
            };
            let moves = [(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)];
            let mut row = [c; 5];
            let mut hood = Vec::with_capacity(5);
            for (k, &(dx, dy)) in moves.iter().enumerate() {
                if let Some(t) = resolve(dx, dy) {
                    row[k] = t;
                    hood.push(t);
                }
            }
            intended.push(row);
            neighbourhood.push(hood);
        }
        Ok(GridEnv {
            spec,
            alphabet,
            labels,
            actions,
            intended,
            neighbourhood,
            absorbing,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cell_id(&self, x: usize, y: usize) -> usize {
        y * self.spec.width + x
    }

    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s % self.spec.width, s / self.spec.width)
    }

    fn check(&self, s: usize, a: usize) -> Result<(), EnvError> {
        if s < self.labels.len() && self.actions[s].contains(&a) {
            Ok(())
        } else {
            Err(EnvError::InvalidAction { state: s, action: a })
        }
    }
}

impl LabeledEnv for GridEnv {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn initial(&self) -> usize {
        self.cell_id(self.spec.start.0, self.spec.start.1)
    }

    fn actions(&self, s: usize) -> &[usize] {
        &self.actions[s]
    }

    fn action_name(&self, a: usize) -> String {
        GRID_ACTIONS.get(a).map_or_else(|| format!("a{a}"), |n| n.to_string())
    }

    fn step(&self, s: usize, a: usize, rng: &mut SimRng) -> Result<usize, EnvError> {
        self.check(s, a)?;
        if a == STAY && self.absorbing[s] {
            return Ok(s);
        }
        if rng.gen::<f64>() < self.spec.slip {
            return Ok(self.intended[s][a]);
        }
        let hood = &self.neighbourhood[s];
        Ok(hood[rng.gen_range(0..hood.len())])
    }

    fn label(&self, s: usize) -> Letter {
        self.labels[s]
    }

    fn state_space(&self) -> Option<usize> {
        Some(self.labels.len())
    }

    fn law(&self, s: usize, a: usize) -> Result<Vec<(usize, f64)>, EnvError> {
        self.check(s, a)?;
        if a == STAY && self.absorbing[s] {
            return Ok(vec![(s, 1.0)]);
        }
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        *out.entry(self.intended[s][a]).or_default() += self.spec.slip;
        let hood = &self.neighbourhood[s];
        let share = (1.0 - self.spec.slip) / hood.len() as f64;
        for &t in hood {
            *out.entry(t).or_default() += share;
        }
        Ok(out.into_iter().filter(|&(_, p)| p > 0.0).collect())
    }

    fn describe(&self, s: usize) -> String {
        let (x, y) = self.coords(s);
        format!("({x},{y})")
    }
}

fn builtin_grid(name: &str) -> Option<&'static str> {
    Some(match name {
        "region1" => include_str!("../../fixtures/grids/region1.grid"),
        "region2" => include_str!("../../fixtures/grids/region2.grid"),
        "region3" => include_str!("../../fixtures/grids/region3.grid"),
        "five_by_five" => include_str!("../../fixtures/grids/five_by_five.grid"),
        _ => return None,
    })
}

/// The 3×3 region with a trapping top row and an absorbing target.
pub fn region3_fixture() -> GridEnv {
    GridEnv::new(load_grid(builtin_grid("region3").unwrap()).expect("region3 fixture"))
        .expect("region3 fixture")
}

/// The 5×5 grid with regions A, B and C, starting from (0,3).
pub fn five_by_five_fixture() -> GridEnv {
    GridEnv::new(load_grid(builtin_grid("five_by_five").unwrap()).expect("5x5 fixture"))
        .expect("5x5 fixture")
}

/// One of the 40×40 regions, resampled to `size × size` (10 ≤ size ≤ 40).
pub fn region_fixture(name: &str, size: usize) -> Result<GridEnv, EnvError> {
    let text = match name {
        "region1" | "region2" => builtin_grid(name).unwrap(),
        other => return Err(EnvError::UnknownName(other.to_string())),
    };
    if !(10..=40).contains(&size) {
        return Err(EnvError::Invalid(format!("region size {size} outside 10..=40")));
    }
    let spec = load_grid(text)?;
    GridEnv::new(if size == spec.width { spec } else { spec.resized(size) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn open_grid(slip: f64) -> GridEnv {
        let text = format!("slip: {slip}\nnnn\nnin\nnnn\n");
        GridEnv::new(load_grid(&text).unwrap()).unwrap()
    }

    #[test]
    fn deterministic_limit() {
        let g = open_grid(1.0);
        let mut rng = SimRng::seed_from_u64(0);
        let s = g.cell_id(0, 0);
        for _ in 0..100 {
            assert_eq!(g.step(s, 1, &mut rng).unwrap(), g.cell_id(1, 0));
        }
        for s in 0..9 {
            for &a in g.actions(s) {
                let law = g.law(s, a).unwrap();
                assert_eq!(law.len(), 1);
            }
        }
    }

    #[test]
    fn interior_slip_frequency() {
        let g = open_grid(0.85);
        let mut rng = SimRng::seed_from_u64(11);
        let c = g.cell_id(1, 1);
        let up = g.cell_id(1, 0);
        let n = 100_000;
        let hits = (0..n).filter(|_| g.step(c, 2, &mut rng).unwrap() == up).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - (0.85 + 0.15 / 5.0)).abs() < 0.01, "{freq}");
    }

    #[test]
    fn region3_layout() {
        let g = region3_fixture();
        assert_eq!(g.state_space(), Some(9));
        let top_middle = g.cell_id(1, 0);
        assert_eq!(g.alphabet().format(g.label(top_middle)), "{u}");
        let target = (0..9).find(|&s| g.alphabet().format(g.label(s)) == "{t}").unwrap();
        assert_eq!(g.law(target, STAY).unwrap(), vec![(target, 1.0)]);
        let centre = g.cell_id(1, 1);
        let law = g.law(centre, 2).unwrap();
        let p = law.iter().find(|x| x.0 == top_middle).unwrap().1;
        assert!((p - (0.85 + 0.15 / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn region_sizes() {
        let g = region_fixture("region1", 40).unwrap();
        assert_eq!(g.state_space(), Some(1600));
        let g = region_fixture("region1", 10).unwrap();
        assert_eq!(g.state_space(), Some(100));
        assert_eq!(g.spec().cell(g.spec().start.0, g.spec().start.1), 'i');
        for s in 0..100 {
            assert_eq!(g.label(s).0.count_ones(), 1);
        }
        let g = region_fixture("region2", 10).unwrap();
        assert_eq!(g.spec().cell(g.spec().start.0, g.spec().start.1), 'i');
        assert!(matches!(region_fixture("region9", 10), Err(EnvError::UnknownName(_))));
    }

    #[test]
    fn five_by_five_start() {
        let g = five_by_five_fixture();
        assert_eq!(g.state_space(), Some(25));
        assert_eq!(g.coords(g.initial()), (0, 3));
    }

    #[test]
    fn invalid_action_is_reported() {
        let g = region3_fixture();
        let mut rng = SimRng::seed_from_u64(0);
        let trap = g.cell_id(0, 0);
        assert!(matches!(
            g.step(trap, 0, &mut rng),
            Err(EnvError::InvalidAction { .. })
        ));
    }

    #[test]
    fn bad_files() {
        assert!(load_grid("slip: 2\nnn\n").is_err());
        assert!(load_grid("nn\nn\n").is_err());
        assert!(load_grid("nz\n").is_err());
        assert!(load_grid("nn\n").is_err());
    }
}
