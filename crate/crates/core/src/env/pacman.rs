use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use super::{EnvError, LabeledEnv};
use crate::label::{Alphabet, Letter};
use crate::SimRng;

const MOVES: [(isize, isize); 5] = [(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)];
const STAY: usize = 4;
// ghost move preference when several moves are equally good
const GHOST_ORDER: [usize; 4] = [2, 3, 0, 1];

// pacman cell, ghost cells, food mask
type PartialMove = (usize, Vec<usize>, usize);

/// Maze description. Cells are row-major indices into a `width × height` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PacmanSpec {
    pub width: usize,
    pub height: usize,
    pub walls: Vec<bool>,
    pub pacman: usize,
    pub ghosts: Vec<usize>,
    pub foods: [usize; 2],
    /// Probability that a ghost chases Pacman in a given step.
    pub pg: f64,
}

fn ferr(line: usize, message: impl Into<String>) -> EnvError {
    EnvError::Format {
        line,
        message: message.into(),
    }
}

/// Parses a maze: a `pg:` header and whitespace-separated tokens
/// `#`, `.`, `F1`, `F2`, `P`, `G`, one maze row per line.
pub fn load_pacman(text: &str) -> Result<PacmanSpec, EnvError> {
    let mut pg = 0.9;
    let mut rows: Vec<Vec<&str>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(v) = line.strip_prefix("pg:") {
            pg = v
                .trim()
                .parse()
                .map_err(|e| ferr(line_no, format!("bad pg: {e}")))?;
            if !(0.0..=1.0).contains(&pg) {
                return Err(ferr(line_no, "pg must lie in [0, 1]"));
            }
            continue;
        }
        let row: Vec<&str> = line.split_whitespace().collect();
        if let Some(bad) = row.iter().find(|t| !matches!(**t, "#" | "." | "F1" | "F2" | "P" | "G")) {
            return Err(ferr(line_no, format!("unknown maze token `{bad}`")));
        }
        if rows.first().is_some_and(|r| r.len() != row.len()) {
            return Err(ferr(line_no, "rows have different widths"));
        }
        rows.push(row);
    }
    let end = text.lines().count().max(1);
    if rows.is_empty() {
        return Err(ferr(end, "maze has no rows"));
    }
    let width = rows[0].len();
    let height = rows.len();
    let tokens: Vec<&str> = rows.into_iter().flatten().collect();
    let find_all = |tok: &str| -> Vec<usize> {
        tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == tok)
            .map(|(i, _)| i)
            .collect()
    };
    let one = |tok: &str| -> Result<usize, EnvError> {
        match find_all(tok).as_slice() {
            [c] => Ok(*c),
            _ => Err(ferr(end, format!("maze needs exactly one `{tok}`"))),
        }
    };
    Ok(PacmanSpec {
        width,
        height,
        walls: tokens.iter().map(|t| *t == "#").collect(),
        pacman: one("P")?,
        ghosts: find_all("G"),
        foods: [one("F1")?, one("F2")?],
        pg,
    })
}

/// Mini-Pacman with chasing ghosts. A state packs Pacman's cell, every ghost's
/// cell and the eaten-food flags; two extra absorbing states stand for a won
/// and a lost game.
#[derive(Debug, Clone)]
pub struct PacmanEnv {
    spec: PacmanSpec,
    alphabet: Alphabet,
    // corridor index -> grid cell, and back
    corridor: Vec<usize>,
    index: Vec<Option<usize>>,
    // per corridor cell: target of each of the five moves
    moves: Vec<[Option<usize>; 5]>,
    actions: Vec<Vec<usize>>,
    ghost_options: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
    food: [usize; 2],
    letters: [Letter; 4],
    stay_only: Vec<usize>,
}

impl PacmanEnv {
    pub fn new(spec: PacmanSpec) -> Result<Self, EnvError> {
        let alphabet = Alphabet::new(["f1", "f2", "g", "n"]).expect("static alphabet");
        let letters = [
            alphabet.letter(&["f1"]).unwrap(),
            alphabet.letter(&["f2"]).unwrap(),
            alphabet.letter(&["g"]).unwrap(),
            alphabet.letter(&["n"]).unwrap(),
        ];
        let (w, h) = (spec.width, spec.height);
        let corridor: Vec<usize> = (0..w * h).filter(|&c| !spec.walls[c]).collect();
        let mut index = vec![None; w * h];
        for (i, &c) in corridor.iter().enumerate() {
            index[c] = Some(i);
        }
        let mut moves = Vec::with_capacity(corridor.len());
        for &c in &corridor {
            let (x, y) = ((c % w) as isize, (c / w) as isize);
            let mut row = [None; 5];
            for (k, (dx, dy)) in MOVES.iter().enumerate() {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    row[k] = index[ny as usize * w + nx as usize];
                }
            }
            moves.push(row);
        }
        let actions = moves
            .iter()
            .map(|m| (0..5).filter(|&k| m[k].is_some()).collect())
            .collect();
        let ghost_options = moves
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let opts: Vec<usize> = GHOST_ORDER.iter().filter_map(|&k| m[k]).collect();
                if opts.is_empty() {
                    vec![i]
                } else {
                    opts
                }
            })
            .collect::<Vec<_>>();
        let n = corridor.len();
        let mut dist = vec![vec![u32::MAX; n]; n];
        for (src, row) in dist.iter_mut().enumerate() {
            row[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(v) = queue.pop_front() {
                for t in moves[v][..4].iter().flatten() {
                    if row[*t] == u32::MAX {
                        row[*t] = row[v] + 1;
                        queue.push_back(*t);
                    }
                }
            }
        }
        let cell = |c: usize, what: &str| {
            index
                .get(c)
                .copied()
                .flatten()
                .ok_or_else(|| EnvError::Invalid(format!("{what} is placed on a wall")))
        };
        let food = [cell(spec.foods[0], "food 1")?, cell(spec.foods[1], "food 2")?];
        cell(spec.pacman, "pacman")?;
        for &g in &spec.ghosts {
            cell(g, "a ghost")?;
        }
        if !(0.0..=1.0).contains(&spec.pg) {
            return Err(EnvError::Invalid("pg must lie in [0, 1]".into()));
        }
        Ok(PacmanEnv {
            spec,
            alphabet,
            corridor,
            index,
            moves,
            actions,
            ghost_options,
            dist,
            food,
            letters,
            stay_only: vec![STAY],
        })
    }

    pub fn spec(&self) -> &PacmanSpec {
        &self.spec
    }

    fn cells(&self) -> usize {
        self.corridor.len()
    }

    // number of (pacman, ghosts) configurations
    fn positions(&self) -> usize {
        self.cells().pow(1 + self.spec.ghosts.len() as u32)
    }

    pub fn won_state(&self) -> usize {
        self.positions() * 4
    }

    pub fn caught_state(&self) -> usize {
        self.positions() * 4 + 1
    }

    pub fn is_won(&self, s: usize) -> bool {
        s == self.won_state()
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        s >= self.won_state()
    }

    fn encode(&self, pac: usize, ghosts: &[usize], mask: usize) -> usize {
        let c = self.cells();
        let mut id = pac;
        for &g in ghosts {
            id = id * c + g;
        }
        id * 4 + mask
    }

    fn decode(&self, s: usize) -> (usize, Vec<usize>, usize) {
        let c = self.cells();
        let mask = s % 4;
        let mut rest = s / 4;
        let mut ghosts = vec![0; self.spec.ghosts.len()];
        for g in ghosts.iter_mut().rev() {
            *g = rest % c;
            rest /= c;
        }
        (rest, ghosts, mask)
    }

    fn chase(&self, ghost: usize, pac: usize) -> usize {
        let mut best = ghost;
        let mut best_d = u32::MAX;
        for &t in &self.ghost_options[ghost] {
            let d = self.dist[t][pac];
            if d < best_d {
                best = t;
                best_d = d;
            }
        }
        best
    }

    /// Pacman's part of a move: `Err` for an illegal action, `Ok(Err(t))` when
    /// it ends in the terminal state `t`, otherwise the new Pacman cell, the
    /// ghosts and the food mask.
    fn pacman_move(&self, s: usize, a: usize) -> Result<Result<PartialMove, usize>, EnvError> {
        if self.is_terminal(s) {
            return if a == STAY {
                Ok(Err(s))
            } else {
                Err(EnvError::InvalidAction { state: s, action: a })
            };
        }
        let (pac, ghosts, mut mask) = self.decode(s);
        let new_pac = self
            .moves
            .get(pac)
            .and_then(|m| m.get(a).copied().flatten())
            .ok_or(EnvError::InvalidAction { state: s, action: a })?;
        for k in 0..2 {
            if pac == self.food[k] {
                mask |= 1 << k;
            }
        }
        if mask == 3 {
            return Ok(Err(self.won_state()));
        }
        if ghosts.contains(&new_pac) {
            return Ok(Err(self.caught_state()));
        }
        Ok(Ok((new_pac, ghosts, mask)))
    }

    fn finish(&self, pac: usize, ghosts: &[usize], mask: usize) -> usize {
        if ghosts.contains(&pac) {
            self.caught_state()
        } else {
            self.encode(pac, ghosts, mask)
        }
    }

    pub fn pacman_cell(&self, s: usize) -> Option<(usize, usize)> {
        if self.is_terminal(s) {
            return None;
        }
        let c = self.corridor[self.decode(s).0];
        Some((c % self.spec.width, c / self.spec.width))
    }

    pub fn ghost_cells(&self, s: usize) -> Vec<(usize, usize)> {
        if self.is_terminal(s) {
            return Vec::new();
        }
        self.decode(s)
            .1
            .iter()
            .map(|&g| {
                let c = self.corridor[g];
                (c % self.spec.width, c / self.spec.width)
            })
            .collect()
    }

    /// Shortest-path distance between two states' Pacman and first ghost.
    pub fn ghost_distance(&self, s: usize) -> Option<u32> {
        if self.is_terminal(s) {
            return None;
        }
        let (pac, ghosts, _) = self.decode(s);
        ghosts.iter().map(|&g| self.dist[g][pac]).min()
    }
}

impl LabeledEnv for PacmanEnv {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn initial(&self) -> usize {
        let ghosts: Vec<usize> = self
            .spec
            .ghosts
            .iter()
            .map(|&g| self.index[g].unwrap())
            .collect();
        self.encode(self.index[self.spec.pacman].unwrap(), &ghosts, 0)
    }

    fn actions(&self, s: usize) -> &[usize] {
        if self.is_terminal(s) {
            return &self.stay_only;
        }
        &self.actions[self.decode(s).0]
    }

    fn action_name(&self, a: usize) -> String {
        super::GRID_ACTIONS
            .get(a)
            .map_or_else(|| format!("a{a}"), |n| n.to_string())
    }

    fn step(&self, s: usize, a: usize, rng: &mut SimRng) -> Result<usize, EnvError> {
        let (pac, mut ghosts, mask) = match self.pacman_move(s, a)? {
            Err(terminal) => return Ok(terminal),
            Ok(x) => x,
        };
        for g in ghosts.iter_mut() {
            *g = if rng.gen::<f64>() < self.spec.pg {
                self.chase(*g, pac)
            } else {
                let opts = &self.ghost_options[*g];
                opts[rng.gen_range(0..opts.len())]
            };
        }
        Ok(self.finish(pac, &ghosts, mask))
    }

    fn label(&self, s: usize) -> Letter {
        if s == self.caught_state() {
            return self.letters[2];
        }
        if self.is_terminal(s) {
            return self.letters[3];
        }
        let (pac, _, mask) = self.decode(s);
        for k in 0..2 {
            if pac == self.food[k] && mask & (1 << k) == 0 {
                return self.letters[k];
            }
        }
        self.letters[3]
    }

    fn state_space(&self) -> Option<usize> {
        Some(self.won_state() + 2)
    }

    fn law(&self, s: usize, a: usize) -> Result<Vec<(usize, f64)>, EnvError> {
        let (pac, ghosts, mask) = match self.pacman_move(s, a)? {
            Err(terminal) => return Ok(vec![(terminal, 1.0)]),
            Ok(x) => x,
        };
        // joint distribution over ghost positions, one ghost at a time
        let mut joint: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
        for &g in &ghosts {
            let opts = &self.ghost_options[g];
            let mut single: BTreeMap<usize, f64> = BTreeMap::new();
            *single.entry(self.chase(g, pac)).or_default() += self.spec.pg;
            for &o in opts {
                *single.entry(o).or_default() += (1.0 - self.spec.pg) / opts.len() as f64;
            }
            joint = joint
                .into_iter()
                .flat_map(|(prefix, p)| {
                    single.iter().map(move |(&t, &q)| {
                        let mut v = prefix.clone();
                        v.push(t);
                        (v, p * q)
                    })
                })
                .collect();
        }
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (gs, p) in joint {
            if p > 0.0 {
                *out.entry(self.finish(pac, &gs, mask)).or_default() += p;
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Pacman and ghost positions; the eaten-food flags are left to the
    /// automaton state.
    fn observe(&self, s: usize) -> usize {
        if self.is_terminal(s) {
            self.positions() + (s - self.won_state())
        } else {
            s / 4
        }
    }

    fn describe(&self, s: usize) -> String {
        if s == self.won_state() {
            return "won".into();
        }
        if s == self.caught_state() {
            return "caught".into();
        }
        let (px, py) = self.pacman_cell(s).unwrap();
        let ghosts: Vec<String> = self
            .ghost_cells(s)
            .iter()
            .map(|(x, y)| format!("({x},{y})"))
            .collect();
        format!("pacman=({px},{py}) ghosts=[{}] eaten={}", ghosts.join(","), s % 4)
    }
}

/// Built-in mazes: `small` (the normative evaluation maze) and `large` (a
/// 40×40 maze too big for explicit enumeration).
pub fn pacman_fixture(name: &str) -> Result<PacmanEnv, EnvError> {
    let text = match name {
        "small" => include_str!("../../fixtures/pacman/small.maze"),
        "large" => include_str!("../../fixtures/pacman/large.maze"),
        other => return Err(EnvError::UnknownName(other.to_string())),
    };
    PacmanEnv::new(load_pacman(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    const CORRIDOR: &str = "pg: 1.0\n# # # # # # # #\n# F1 . P . . G #\n# # # # # # F2 #\n# # # # # # # #\n";

    #[test]
    fn chasing_ghost_closes_in() {
        let env = PacmanEnv::new(load_pacman(CORRIDOR).unwrap()).unwrap();
        let mut rng = SimRng::seed_from_u64(3);
        let mut s = env.initial();
        let mut last = env.ghost_distance(s).unwrap();
        loop {
            s = env.step(s, STAY, &mut rng).unwrap();
            match env.ghost_distance(s) {
                Some(d) => {
                    assert!(d < last);
                    last = d;
                }
                None => break,
            }
        }
        assert_eq!(s, env.caught_state());
        assert_eq!(env.alphabet().format(env.label(s)), "{g}");
    }

    #[test]
    fn scatter_is_uniform() {
        let mut spec = load_pacman(CORRIDOR).unwrap();
        spec.pg = 0.0;
        let env = PacmanEnv::new(spec).unwrap();
        let s = env.initial();
        let law = env.law(s, STAY).unwrap();
        // ghost at the corridor end has two legal moves
        assert_eq!(law.len(), 2);
        for (_, p) in law {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn food_labels_and_win() {
        let text = "pg: 0.0\n# # # # # #\n# F1 P F2 . #\n# # # # G #\n# # # # # #\n";
        let env = PacmanEnv::new(load_pacman(text).unwrap()).unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        let s0 = env.initial();
        assert_eq!(env.alphabet().format(env.label(s0)), "{n}");
        let s1 = env.step(s0, 0, &mut rng).unwrap();
        assert_eq!(env.alphabet().format(env.label(s1)), "{f1}");
        let s2 = env.step(s1, 1, &mut rng).unwrap();
        assert_eq!(env.alphabet().format(env.label(s2)), "{n}");
        let s3 = env.step(s2, 1, &mut rng);
        let s3 = s3.unwrap();
        if !env.is_terminal(s3) {
            assert_eq!(env.alphabet().format(env.label(s3)), "{f2}");
            let s4 = env.step(s3, STAY, &mut rng).unwrap();
            assert!(env.is_won(s4));
        }
    }

    #[test]
    fn law_rows_sum_to_one() {
        let env = pacman_fixture("small").unwrap();
        let s = env.initial();
        for &a in env.actions(s) {
            let total: f64 = env.law(s, a).unwrap().iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn large_maze_is_too_large() {
        let env = pacman_fixture("large").unwrap();
        assert!(matches!(
            crate::env::explicit_mdp(&env),
            Err(EnvError::TooLarge { .. })
        ));
    }
}
