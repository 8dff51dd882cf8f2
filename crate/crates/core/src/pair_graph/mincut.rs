//! Stoer–Wagner global minimum cut on a sparse weighted undirected graph.
//!
//! Vertex indices double as the tie-break order: every phase starts from the
//! lowest active index, the most tightly connected vertex is chosen with ties
//! going to the lower index, and a later phase replaces the incumbent cut only
//! when strictly lighter.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub weight: f64,
    /// Vertices on one side of the cut, ascending.
    pub side: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    key: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum cut of the graph on `n` vertices with the given `(u, v, weight)`
/// edges. Parallel edges are summed; self-loops are ignored. Returns `None`
/// for fewer than two vertices.
pub fn stoer_wagner(n: usize, edges: &[(usize, usize, f64)]) -> Option<MinCut> {
    if n < 2 {
        return None;
    }
    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for &(u, v, w) in edges {
        if u == v {
            continue;
        }
        *adj[u].entry(v).or_insert(0.0) += w;
        *adj[v].entry(u).or_insert(0.0) += w;
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut active: Vec<bool> = vec![true; n];
    let mut best: Option<MinCut> = None;

    let mut key = vec![0.0f64; n];
    let mut added = vec![false; n];
    for remaining in (2..=n).rev() {
        key.iter_mut().for_each(|k| *k = 0.0);
        added.iter_mut().for_each(|a| *a = false);
        let mut heap: BinaryHeap<Entry> = (0..n)
            .filter(|&v| active[v])
            .map(|vertex| Entry { key: 0.0, vertex })
            .collect();
        let (mut s, mut t) = (usize::MAX, usize::MAX);
        let mut cut_of_phase = 0.0;
        let mut taken = 0;
        while taken < remaining {
            let Entry { key: k, vertex } = heap.pop().expect("active vertices remain");
            if added[vertex] || k != key[vertex] {
                continue;
            }
            added[vertex] = true;
            taken += 1;
            s = t;
            t = vertex;
            cut_of_phase = k;
            for (&x, &w) in &adj[vertex] {
                if !added[x] {
                    key[x] += w;
                    heap.push(Entry { key: key[x], vertex: x });
                }
            }
        }
        if best.as_ref().is_none_or(|b| cut_of_phase < b.weight) {
            let mut side = members[t].clone();
            side.sort_unstable();
            best = Some(MinCut {
                weight: cut_of_phase,
                side,
            });
        }
        // merge t into s
        let moved = std::mem::take(&mut members[t]);
        members[s].extend(moved);
        active[t] = false;
        let t_adj = std::mem::take(&mut adj[t]);
        for (x, w) in t_adj {
            adj[x].remove(&t);
            if x != s {
                *adj[s].entry(x).or_insert(0.0) += w;
                *adj[x].entry(s).or_insert(0.0) += w;
            }
        }
    }
    best
}
