//! Strongly connected components over adjacency lists.

/// Result of an SCC decomposition: `comp[v]` is the component index of `v`.
/// Components are numbered in reverse topological order (sinks first).
#[derive(Debug, Clone)]
pub struct Sccs {
    pub comp: Vec<usize>,
    pub count: usize,
}

impl Sccs {
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.comp.iter().enumerate() {
            if c != usize::MAX {
                out[c].push(v);
            }
        }
        out
    }
}

/// Iterative Tarjan. Vertices outside `active` (when given) are ignored and
/// receive component `usize::MAX`.
pub fn tarjan<F, I>(n: usize, active: Option<&[bool]>, mut succ: F) -> Sccs
where
    F: FnMut(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    const UNSEEN: usize = usize::MAX;
    let is_active = |v: usize| active.is_none_or(|a| a[v]);
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0;
    let mut count = 0;
    let mut adj: Vec<Option<Vec<usize>>> = vec![None; n];

    for root in 0..n {
        if !is_active(root) || index[root] != UNSEEN {
            continue;
        }
        // call stack of (vertex, position in its successor list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        adj[root] = Some(succ(root).into_iter().filter(|&w| is_active(w)).collect());

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succs = adj[v].as_ref().unwrap();
            if *pos < succs.len() {
                let w = succs[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    adj[w] = Some(succ(w).into_iter().filter(|&x| is_active(x)).collect());
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
                adj[v] = None;
            }
        }
    }
    Sccs { comp, count }
}

/// Vertices from which some vertex in `target` is reachable (including `target`).
pub fn backward_reachable(n: usize, preds: &[Vec<usize>], target: &[bool]) -> Vec<bool> {
    let mut seen = target.to_vec();
    let mut queue: Vec<usize> = (0..n).filter(|&v| target[v]).collect();
    while let Some(v) = queue.pop() {
        for &u in &preds[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push(u);
            }
        }
    }
    seen
}

/// Vertices reachable from `start`.
pub fn forward_reachable<F, I>(n: usize, start: &[usize], mut succ: F) -> Vec<bool>
where
    F: FnMut(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    let mut seen = vec![false; n];
    let mut queue = Vec::new();
    for &s in start {
        if !seen[s] {
            seen[s] = true;
            queue.push(s);
        }
    }
    while let Some(v) = queue.pop() {
        for w in succ(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycles_and_a_bridge() {
        let g: Vec<Vec<usize>> = vec![vec![1], vec![0, 2], vec![3], vec![2], vec![]];
        let s = tarjan(5, None, |v| g[v].clone());
        assert_eq!(s.count, 3);
        assert_eq!(s.comp[0], s.comp[1]);
        assert_eq!(s.comp[2], s.comp[3]);
        assert_ne!(s.comp[0], s.comp[2]);
        // sinks first
        assert!(s.comp[2] < s.comp[0]);
    }

    #[test]
    fn inactive_vertices_are_skipped() {
        let g: Vec<Vec<usize>> = vec![vec![1], vec![2], vec![0]];
        let s = tarjan(3, Some(&[true, false, true]), |v| g[v].clone());
        assert_eq!(s.comp[1], usize::MAX);
        assert_ne!(s.comp[0], s.comp[2]);
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 200_000;
        let s = tarjan(n, None, |v| if v + 1 < n { vec![v + 1] } else { vec![0] });
        assert_eq!(s.count, 1);
    }
}
