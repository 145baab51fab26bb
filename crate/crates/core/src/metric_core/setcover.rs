//! Set-cover and clique machinery over bitsets.

use fixedbitset::FixedBitSet;

/// Greedy set cover: repeatedly take the set covering the most uncovered
/// elements (ties to the lowest index). Returns `None` if the sets do not
/// cover the universe.
pub fn greedy_set_cover(universe: usize, sets: &[FixedBitSet]) -> Option<Vec<usize>> {
    let mut uncovered = FixedBitSet::with_capacity(universe);
    uncovered.insert_range(..);
    let mut chosen = Vec::new();
    while !uncovered.is_clear() {
        let (best, gain) = sets
            .iter()
            .enumerate()
            .map(|(k, s)| (k, s.intersection_count(&uncovered)))
            .fold((usize::MAX, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if gain == 0 {
            return None;
        }
        uncovered.difference_with(&sets[best]);
        chosen.push(best);
    }
    Some(chosen)
}

/// Exact minimum set cover by branch and bound.
///
/// Branches on the uncovered element contained in the fewest sets. Returns
/// `None` when the sets do not cover the universe or the search exceeds
/// `node_limit` nodes.
pub fn exact_set_cover(universe: usize, sets: &[FixedBitSet], node_limit: u64) -> Option<Vec<usize>> {
    let mut best = greedy_set_cover(universe, sets)?;
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (k, s) in sets.iter().enumerate() {
        for e in s.ones() {
            containing[e].push(k);
        }
    }
    // larger sets first inside each branch
    for list in containing.iter_mut() {
        list.sort_by_key(|&k| std::cmp::Reverse(sets[k].count_ones(..)));
    }
    let max_size = sets.iter().map(|s| s.count_ones(..)).max().unwrap_or(1).max(1);

    struct Search<'a> {
        sets: &'a [FixedBitSet],
        containing: &'a [Vec<usize>],
        max_size: usize,
        nodes: u64,
        node_limit: u64,
        best: Vec<usize>,
        aborted: bool,
    }

    impl Search<'_> {
        fn run(&mut self, covered: &FixedBitSet, current: &mut Vec<usize>) {
            if self.aborted {
                return;
            }
            self.nodes += 1;
            if self.nodes > self.node_limit {
                self.aborted = true;
                return;
            }
            let uncovered = covered.len() - covered.count_ones(..);
            if uncovered == 0 {
                if current.len() < self.best.len() {
                    self.best = current.clone();
                }
                return;
            }
            let lower = current.len() + uncovered.div_ceil(self.max_size);
            if lower >= self.best.len() {
                return;
            }
            let pivot = covered
                .zeroes()
                .min_by_key(|&e| self.containing[e].len())
                .expect("uncovered element exists");
            for &k in &self.containing[pivot] {
                let mut next = covered.clone();
                next.union_with(&self.sets[k]);
                current.push(k);
                self.run(&next, current);
                current.pop();
                if self.aborted {
                    return;
                }
            }
        }
    }

    let mut search = Search {
        sets,
        containing: &containing,
        max_size,
        nodes: 0,
        node_limit,
        best: std::mem::take(&mut best),
        aborted: false,
    };
    search.run(&FixedBitSet::with_capacity(universe), &mut Vec::new());
    if search.aborted {
        None
    } else {
        Some(search.best)
    }
}

/// All maximal cliques of a graph given by adjacency bitsets (no self loops),
/// by Bron–Kerbosch with pivoting. Returns `None` once more than `limit`
/// cliques have been found.
pub fn maximal_cliques(adj: &[FixedBitSet], limit: usize) -> Option<Vec<FixedBitSet>> {
    let n = adj.len();
    let mut out = Vec::new();
    let mut p = FixedBitSet::with_capacity(n);
    p.insert_range(..);
    let r = FixedBitSet::with_capacity(n);
    let x = FixedBitSet::with_capacity(n);
    if bron_kerbosch(adj, r, p, x, &mut out, limit) {
        Some(out)
    } else {
        None
    }
}

fn bron_kerbosch(
    adj: &[FixedBitSet],
    r: FixedBitSet,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    out: &mut Vec<FixedBitSet>,
    limit: usize,
) -> bool {
    if p.is_clear() && x.is_clear() {
        if out.len() >= limit {
            return false;
        }
        out.push(r);
        return true;
    }
    let pivot = p
        .ones()
        .chain(x.ones())
        .max_by_key(|&u| adj[u].intersection_count(&p))
        .expect("p or x nonempty");
    let mut candidates = p.clone();
    candidates.difference_with(&adj[pivot]);
    for v in candidates.ones().collect::<Vec<_>>() {
        let mut r2 = r.clone();
        r2.insert(v);
        let mut p2 = p.clone();
        p2.intersect_with(&adj[v]);
        let mut x2 = x.clone();
        x2.intersect_with(&adj[v]);
        if !bron_kerbosch(adj, r2, p2, x2, out, limit) {
            return false;
        }
        p.set(v, false);
        x.insert(v);
    }
    true
}

/// Drop duplicate sets and sets strictly contained in another set.
pub fn remove_dominated(sets: Vec<FixedBitSet>) -> Vec<FixedBitSet> {
    let mut sets = sets;
    sets.sort_by_key(|s| std::cmp::Reverse(s.count_ones(..)));
    let mut kept: Vec<FixedBitSet> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| s.is_subset(k)) {
            kept.push(s);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(n: usize, ones: &[usize]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        for &o in ones {
            b.insert(o);
        }
        b
    }

    #[test]
    fn greedy_is_not_always_optimal_but_exact_is() {
        // classic instance: greedy takes the big middle set first
        let sets = vec![
            bs(6, &[0, 1, 2]),
            bs(6, &[3, 4, 5]),
            bs(6, &[1, 2, 3, 4]),
            bs(6, &[0]),
            bs(6, &[5]),
        ];
        let g = greedy_set_cover(6, &sets).unwrap();
        let e = exact_set_cover(6, &sets, 1_000_000).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn uncoverable() {
        let sets = vec![bs(3, &[0, 1])];
        assert!(greedy_set_cover(3, &sets).is_none());
        assert!(exact_set_cover(3, &sets, 100).is_none());
    }

    #[test]
    fn cliques_of_path() {
        // 0-1-2 path: maximal cliques {0,1}, {1,2}
        let adj = vec![bs(3, &[1]), bs(3, &[0, 2]), bs(3, &[1])];
        let mut c: Vec<Vec<usize>> = maximal_cliques(&adj, 10)
            .unwrap()
            .iter()
            .map(|s| s.ones().collect())
            .collect();
        c.sort();
        assert_eq!(c, vec![vec![0, 1], vec![1, 2]]);
        assert!(maximal_cliques(&adj, 1).is_none());
    }

    #[test]
    fn dominated_sets_removed() {
        let kept = remove_dominated(vec![bs(3, &[0]), bs(3, &[0, 1]), bs(3, &[0, 1]), bs(3, &[2])]);
        assert_eq!(kept.len(), 2);
    }
}
