//! Maximum matchings, Hall witnesses and connected components of the
//! simple bipartite graph underlying a [`BipartiteDigraph`].

use std::collections::VecDeque;

use crate::model::BipartiteDigraph;
use crate::rng::Side;

const FREE: u32 = u32::MAX;
const INF: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingResult {
    pub size: usize,
    /// Column matched to each row, `None` when unmatched.
    pub row_match: Vec<Option<u32>>,
    pub col_match: Vec<Option<u32>>,
}

impl MatchingResult {
    pub fn is_perfect(&self) -> bool {
        self.size == self.row_match.len()
    }

    /// Checks that the two match arrays agree, that every pair is an edge
    /// and that `size` counts the matched rows.
    pub fn is_valid_for(&self, graph: &BipartiteDigraph) -> bool {
        let n = graph.n();
        if self.row_match.len() != n || self.col_match.len() != n {
            return false;
        }
        let mut count = 0;
        for (i, m) in self.row_match.iter().enumerate() {
            if let Some(j) = *m {
                count += 1;
                if self.col_match[j as usize] != Some(i as u32) || graph.row_neighbors(i).binary_search(&j).is_err() {
                    return false;
                }
            }
        }
        let col_count = self.col_match.iter().filter(|m| m.is_some()).count();
        count == self.size && col_count == self.size
    }
}

/// Hopcroft-Karp maximum matching. Rows are scanned in index order and
/// neighbours in sorted order, so the result is a function of the graph.
pub fn max_matching(graph: &BipartiteDigraph) -> MatchingResult {
    let n = graph.n();
    let rows = graph.adjacency(Side::Row);
    let mut row_match = vec![FREE; n];
    let mut col_match = vec![FREE; n];
    let mut dist = vec![INF; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut size = 0usize;

    // Greedy warm start.
    for i in 0..n {
        if let Some(&j) = rows.neighbors(i).iter().find(|&&j| col_match[j as usize] == FREE) {
            row_match[i] = j;
            col_match[j as usize] = i as u32;
            size += 1;
        }
    }

    // Iterative DFS over the layered graph; `cursor` remembers the next
    // neighbour to try for each row within a phase.
    let mut stack: Vec<u32> = Vec::new();
    let mut cursor = vec![0usize; n];

    loop {
        // BFS layers from free rows.
        queue.clear();
        for i in 0..n {
            if row_match[i] == FREE {
                dist[i] = 0;
                queue.push_back(i as u32);
            } else {
                dist[i] = INF;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            let d = dist[i as usize];
            for &j in rows.neighbors(i as usize) {
                let next = col_match[j as usize];
                if next == FREE {
                    found = true;
                } else if dist[next as usize] == INF {
                    dist[next as usize] = d + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }

        cursor.iter_mut().for_each(|c| *c = 0);
        for root in 0..n {
            if row_match[root] != FREE {
                continue;
            }
            stack.clear();
            stack.push(root as u32);
            let mut free_col = None;
            while let Some(&i) = stack.last() {
                let iu = i as usize;
                let nbrs = rows.neighbors(iu);
                let mut advanced = false;
                while cursor[iu] < nbrs.len() {
                    let j = nbrs[cursor[iu]];
                    cursor[iu] += 1;
                    let next = col_match[j as usize];
                    if next == FREE {
                        free_col = Some(j);
                        break;
                    }
                    if dist[next as usize] == dist[iu] + 1 {
                        stack.push(next);
                        advanced = true;
                        break;
                    }
                }
                if free_col.is_some() {
                    break;
                }
                if !advanced {
                    dist[iu] = INF;
                    stack.pop();
                }
            }
            if let Some(mut j) = free_col {
                // Flip the path on the stack, deepest row first.
                while let Some(i) = stack.pop() {
                    let prev = row_match[i as usize];
                    row_match[i as usize] = j;
                    col_match[j as usize] = i;
                    j = prev;
                }
                size += 1;
            }
        }
    }

    let wrap = |v: Vec<u32>| v.into_iter().map(|x| (x != FREE).then_some(x)).collect();
    MatchingResult {
        size,
        row_match: wrap(row_match),
        col_match: wrap(col_match),
    }
}

/// One extra alternating BFS from every free row: `true` when no
/// augmenting path exists, i.e. the matching is maximum.
pub fn has_no_augmenting_path(graph: &BipartiteDigraph, matching: &MatchingResult) -> bool {
    let n = graph.n();
    let mut seen_row = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| matching.row_match[i].is_none()).collect();
    for &i in &queue {
        seen_row[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for &j in graph.row_neighbors(i) {
            match matching.col_match[j as usize] {
                None => return false,
                Some(next) if !seen_row[next as usize] => {
                    seen_row[next as usize] = true;
                    queue.push_back(next as usize);
                }
                Some(_) => {}
            }
        }
    }
    true
}

/// A deficient set `K` with `L = Γ(K)` and `|L| < |K|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallWitness {
    /// Side that `k` lives on; `l` is on the other side.
    pub side: Side,
    pub k: Vec<u32>,
    pub l: Vec<u32>,
    /// `|L| = |K| - 1` and every vertex of `L` has at least two
    /// neighbours in `K`.
    pub minimal: bool,
}

impl HallWitness {
    pub fn deficiency(&self) -> usize {
        self.k.len() - self.l.len()
    }
}

/// Extracts a Hall witness when the graph has no perfect matching.
///
/// Starting from the lowest-index unmatched vertex, `K` collects the
/// same-side vertices reachable by alternating paths and `L` the opposite
/// vertices reached on the way. Maximality of the matching forces every
/// vertex of `L` to be matched back into `K`, so `L = Γ(K)` and
/// `|L| = |K| - 1`. Rows are tried first, then columns.
pub fn hall_witness(graph: &BipartiteDigraph) -> Option<HallWitness> {
    let matching = max_matching(graph);
    hall_witness_from(graph, &matching)
}

pub fn hall_witness_from(graph: &BipartiteDigraph, matching: &MatchingResult) -> Option<HallWitness> {
    if matching.is_perfect() {
        return None;
    }
    [Side::Row, Side::Col].into_iter().find_map(|side| witness_on_side(graph, matching, side))
}

fn witness_on_side(graph: &BipartiteDigraph, matching: &MatchingResult, side: Side) -> Option<HallWitness> {
    let n = graph.n();
    let (own, own_match, other_match) = match side {
        Side::Row => (graph.adjacency(Side::Row), &matching.row_match, &matching.col_match),
        Side::Col => (graph.adjacency(Side::Col), &matching.col_match, &matching.row_match),
    };
    let root = own_match.iter().position(|m| m.is_none())?;

    let mut in_k = vec![false; n];
    let mut in_l = vec![false; n];
    in_k[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in own.neighbors(v) {
            let w = w as usize;
            if in_l[w] {
                continue;
            }
            in_l[w] = true;
            // Unmatched `w` would be an augmenting path; impossible for a
            // maximum matching.
            let back = other_match[w].expect("matching is maximum") as usize;
            if !in_k[back] {
                in_k[back] = true;
                queue.push_back(back);
            }
        }
    }

    let k: Vec<u32> = (0..n as u32).filter(|&v| in_k[v as usize]).collect();
    let l: Vec<u32> = (0..n as u32).filter(|&v| in_l[v as usize]).collect();
    let opposite = graph.adjacency(side.other());
    let minimal = l.len() + 1 == k.len()
        && l
            .iter()
            .all(|&w| opposite.neighbors(w as usize).iter().filter(|&&v| in_k[v as usize]).count() >= 2);
    Some(HallWitness { side, k, l, minimal })
}

/// Neighbourhood of a vertex set, recomputed from scratch.
pub fn neighborhood(graph: &BipartiteDigraph, side: Side, set: &[u32]) -> Vec<u32> {
    let adj = graph.adjacency(side);
    let mut out: Vec<u32> = set.iter().flat_map(|&v| adj.neighbors(v as usize).iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Component {
    pub rows: usize,
    pub cols: usize,
}

impl Component {
    pub fn size(&self) -> usize {
        self.rows + self.cols
    }
}

/// Connected components with per-side counts, largest first. Ties are
/// broken by row count, then by discovery order.
pub fn components(graph: &BipartiteDigraph) -> Vec<Component> {
    let n = graph.n();
    // Vertex ids: rows 0..n, columns n..2n.
    let mut seen = vec![false; 2 * n];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..2 * n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Component { rows: 0, cols: 0 };
        while let Some(v) = stack.pop() {
            let (nbrs, offset) = if v < n {
                comp.rows += 1;
                (graph.row_neighbors(v), n)
            } else {
                comp.cols += 1;
                (graph.col_neighbors(v - n), 0)
            };
            for &w in nbrs {
                let w = w as usize + offset;
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.push(comp);
    }
    out.sort_by(|a, b| b.size().cmp(&a.size()).then(b.rows.cmp(&a.rows)));
    out
}
