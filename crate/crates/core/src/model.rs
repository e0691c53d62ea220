//! The two-round random bipartite digraph `B(n, m)`.
//!
//! Rows and columns each hold `n` vertices. In round one every vertex picks
//! a uniformly random vertex on the other side. A vertex picked by at most
//! `m` vertices in round one is *unpopular* and makes one more independent
//! uniform pick in round two. The undirected simple graph keeps an edge
//! `{row i, col j}` whenever either endpoint picked the other.

use std::fmt;
use std::str::FromStr;

use crate::rng::{SelectionRng, Side};
use crate::{Error, Result};

/// Unpopularity threshold `m`: a vertex with round-one in-degree `<= m`
/// makes a second selection. `Infinite` makes every vertex select twice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Threshold {
    Finite(u32),
    Infinite,
}

impl Threshold {
    pub fn admits(self, in_degree: u32) -> bool {
        match self {
            Threshold::Finite(m) => in_degree <= m,
            Threshold::Infinite => true,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Threshold::Finite(m) => Some(m),
            Threshold::Infinite => None,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(m) => write!(f, "{m}"),
            Threshold::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Threshold::Infinite),
            other => other
                .parse::<u32>()
                .map(Threshold::Finite)
                .map_err(|_| Error::InvalidArgument(format!("threshold must be an integer or `inf`, got `{s}`"))),
        }
    }
}

impl From<u32> for Threshold {
    fn from(m: u32) -> Self {
        Threshold::Finite(m)
    }
}

/// One draw of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelParams {
    n: usize,
    pub m: Threshold,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, m: impl Into<Threshold>, seed: u64) -> Result<Self> {
        if n == 0 || n > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("side size n must be in [1, 2^32), got {n}")));
        }
        Ok(Self { n, m: m.into(), seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Compressed adjacency of one side: neighbours of vertex `v` are
/// `targets[offsets[v]..offsets[v + 1]]`, sorted and without duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Adjacency {
    fn from_pairs(n: usize, pairs: &mut Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in pairs.iter() {
            offsets[a as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let targets = pairs.iter().map(|&(_, b)| b).collect();
        Self { offsets, targets }
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }
}

/// Selection records of one draw plus the derived simple bipartite graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteDigraph {
    n: usize,
    /// `round1_row[i]` is the column picked by row `i` in round one.
    pub round1_row: Vec<u32>,
    /// `round1_col[j]` is the row picked by column `j` in round one.
    pub round1_col: Vec<u32>,
    /// Round-two pick of each row, `None` for popular rows.
    pub round2_row: Vec<Option<u32>>,
    pub round2_col: Vec<Option<u32>>,
    rows: Adjacency,
    cols: Adjacency,
}

impl BipartiteDigraph {
    /// Builds the graph from explicit selection records. Useful for
    /// hand-made fixtures; no consistency with any threshold is checked.
    pub fn from_selections(
        round1_row: Vec<u32>,
        round1_col: Vec<u32>,
        round2_row: Vec<Option<u32>>,
        round2_col: Vec<Option<u32>>,
    ) -> Result<Self> {
        let n = round1_row.len();
        if n == 0 || round1_col.len() != n || round2_row.len() != n || round2_col.len() != n {
            return Err(Error::InvalidArgument("selection records must all have the same non-zero length".into()));
        }
        let in_range = |v: &u32| (*v as usize) < n;
        if !round1_row.iter().all(in_range)
            || !round1_col.iter().all(in_range)
            || !round2_row.iter().flatten().all(in_range)
            || !round2_col.iter().flatten().all(in_range)
        {
            return Err(Error::InvalidArgument("selection target out of range".into()));
        }

        let mut row_pairs = Vec::with_capacity(4 * n);
        for (i, &j) in round1_row.iter().enumerate() {
            row_pairs.push((i as u32, j));
        }
        for (j, &i) in round1_col.iter().enumerate() {
            row_pairs.push((i, j as u32));
        }
        for (i, j) in round2_row.iter().enumerate() {
            if let Some(j) = j {
                row_pairs.push((i as u32, *j));
            }
        }
        for (j, i) in round2_col.iter().enumerate() {
            if let Some(i) = i {
                row_pairs.push((*i, j as u32));
            }
        }
        let mut col_pairs: Vec<(u32, u32)> = row_pairs.iter().map(|&(i, j)| (j, i)).collect();
        let rows = Adjacency::from_pairs(n, &mut row_pairs);
        let cols = Adjacency::from_pairs(n, &mut col_pairs);
        Ok(Self {
            n,
            round1_row,
            round1_col,
            round2_row,
            round2_col,
            rows,
            cols,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Simple-graph neighbourhoods of the rows (columns for `Side::Col`).
    pub fn adjacency(&self, side: Side) -> &Adjacency {
        match side {
            Side::Row => &self.rows,
            Side::Col => &self.cols,
        }
    }

    pub fn row_neighbors(&self, i: usize) -> &[u32] {
        self.rows.neighbors(i)
    }

    pub fn col_neighbors(&self, j: usize) -> &[u32] {
        self.cols.neighbors(j)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.edge_count()
    }

    /// Number of round-one selections received by each vertex of `side`.
    pub fn round1_in_degrees(&self, side: Side) -> Vec<u32> {
        let pickers = match side {
            Side::Row => &self.round1_col,
            Side::Col => &self.round1_row,
        };
        in_degrees(self.n, pickers)
    }

    /// Selections made by vertex `v` of `side`: 1 or 2.
    pub fn out_degree(&self, side: Side, v: usize) -> usize {
        let second = match side {
            Side::Row => self.round2_row[v],
            Side::Col => self.round2_col[v],
        };
        1 + usize::from(second.is_some())
    }

    pub fn unpopular_count(&self, side: Side) -> usize {
        let second = match side {
            Side::Row => &self.round2_row,
            Side::Col => &self.round2_col,
        };
        second.iter().filter(|s| s.is_some()).count()
    }
}

fn in_degrees(n: usize, pickers: &[u32]) -> Vec<u32> {
    let mut deg = vec![0u32; n];
    for &t in pickers {
        deg[t as usize] += 1;
    }
    deg
}

fn draw_round(rng: &mut SelectionRng, side: Side, round: u8, n: usize) -> Vec<u32> {
    (0..n).map(|v| rng.select(side, round, v, n)).collect()
}

fn draw_second(rng: &mut SelectionRng, side: Side, n: usize, in_degree: &[u32], m: Threshold) -> Vec<Option<u32>> {
    in_degree
        .iter()
        .enumerate()
        .map(|(v, &d)| m.admits(d).then(|| rng.select(side, 2, v, n)))
        .collect()
}

/// Draws `B(n, m)`. A pure function of `(n, m, seed)`.
pub fn generate(params: &ModelParams) -> BipartiteDigraph {
    let n = params.n;
    let mut rng = SelectionRng::new(params.seed);
    let round1_row = draw_round(&mut rng, Side::Row, 1, n);
    let round1_col = draw_round(&mut rng, Side::Col, 1, n);
    let row_in = in_degrees(n, &round1_col);
    let col_in = in_degrees(n, &round1_row);
    let round2_row = draw_second(&mut rng, Side::Row, n, &row_in, params.m);
    let round2_col = draw_second(&mut rng, Side::Col, n, &col_in, params.m);
    BipartiteDigraph::from_selections(round1_row, round1_col, round2_row, round2_col)
        .expect("generated selections are in range")
}

/// The one-round model `B_n(1)`: every vertex selects exactly once. Shares
/// the round-one draws of [`generate`] for the same seed.
pub fn one_round_graph(n: usize, seed: u64) -> Result<BipartiteDigraph> {
    let params = ModelParams::new(n, 0, seed)?;
    let mut rng = SelectionRng::new(params.seed);
    let round1_row = draw_round(&mut rng, Side::Row, 1, n);
    let round1_col = draw_round(&mut rng, Side::Col, 1, n);
    BipartiteDigraph::from_selections(round1_row, round1_col, vec![None; n], vec![None; n])
}

/// Limiting expected number of selections per vertex,
/// `1 + P(Poisson(1) <= m) = 1 + e^-1 sum_{j<=m} 1/j!`; exactly 2 for `m = inf`.
pub fn expected_out_degree(m: Threshold) -> f64 {
    match m {
        Threshold::Infinite => 2.0,
        Threshold::Finite(m) => 1.0 + (-1.0f64).exp() * crate::certificate::q(1.0, m as i64),
    }
}
