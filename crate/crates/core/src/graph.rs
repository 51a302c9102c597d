//! Bipartite measurement graphs.
//!
//! Left vertices are items, right vertices are pools. Both adjacency
//! directions are stored as strictly sorted lists and kept consistent at
//! construction; a graph is immutable afterwards.
//!
//! A *function graph* additionally carries a group structure: the right side
//! is split into `t` contiguous blocks of equal size and every item has
//! exactly one neighbor in each block.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Which side of the bipartition a vertex index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurementGraph {
    n_left: usize,
    /// right vertex -> sorted left neighbors
    pools: Vec<Vec<usize>>,
    /// left vertex -> sorted right neighbors
    items: Vec<Vec<usize>>,
    left_degree: Option<usize>,
    groups: Option<usize>,
}

impl MeasurementGraph {
    /// Builds a graph from the item lists of each pool. Lists are sorted and
    /// deduplicated.
    pub fn from_pools(n_left: usize, mut pools: Vec<Vec<usize>>) -> Result<Self> {
        for pool in &mut pools {
            pool.sort_unstable();
            pool.dedup();
            if let Some(&last) = pool.last() {
                if last >= n_left {
                    return Err(Error::Range {
                        side: Side::Left.name(),
                        index: last,
                        len: n_left,
                    });
                }
            }
        }
        let items = transpose(n_left, &pools);
        Ok(Self::assemble(n_left, pools, items))
    }

    /// Builds a graph from the pool lists of each item. Lists are sorted and
    /// deduplicated.
    pub fn from_items(n_right: usize, mut items: Vec<Vec<usize>>) -> Result<Self> {
        for item in &mut items {
            item.sort_unstable();
            item.dedup();
            if let Some(&last) = item.last() {
                if last >= n_right {
                    return Err(Error::Range {
                        side: Side::Right.name(),
                        index: last,
                        len: n_right,
                    });
                }
            }
        }
        let n_left = items.len();
        let pools = transpose(n_right, &items);
        Ok(Self::assemble(n_left, pools, items))
    }

    fn assemble(n_left: usize, pools: Vec<Vec<usize>>, items: Vec<Vec<usize>>) -> Self {
        let left_degree = match items.first() {
            Some(first) if items.iter().all(|it| it.len() == first.len()) => Some(first.len()),
            _ => None,
        };
        Self {
            n_left,
            pools,
            items,
            left_degree,
            groups: None,
        }
    }

    /// Attaches a function-graph structure of `t` contiguous, equal-sized
    /// groups of right vertices.
    pub fn with_groups(mut self, t: usize) -> Result<Self> {
        if t == 0 || self.n_right() % t != 0 {
            return Err(Error::Shape(format!(
                "{} right vertices cannot be split into {t} equal groups",
                self.n_right()
            )));
        }
        let size = self.n_right() / t;
        for (i, nbrs) in self.items.iter().enumerate() {
            let ok = nbrs.len() == t && nbrs.iter().enumerate().all(|(j, &r)| r / size == j);
            if !ok {
                return Err(Error::Shape(format!(
                    "item {i} does not have exactly one neighbor in each of {t} groups"
                )));
            }
        }
        self.groups = Some(t);
        Ok(self)
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.pools.len()
    }

    /// Uniform left degree, if every item has the same number of pools.
    pub fn left_degree(&self) -> Option<usize> {
        self.left_degree
    }

    /// Number of function-graph groups, if the structure is present.
    pub fn groups(&self) -> Option<usize> {
        self.groups
    }

    pub fn group_size(&self) -> Option<usize> {
        self.groups.map(|t| self.n_right() / t)
    }

    /// Items of pool `r`.
    pub fn pool(&self, r: usize) -> &[usize] {
        &self.pools[r]
    }

    /// Pools of item `i`.
    pub fn item(&self, i: usize) -> &[usize] {
        &self.items[i]
    }

    pub fn pools(&self) -> &[Vec<usize>] {
        &self.pools
    }

    pub fn items(&self) -> &[Vec<usize>] {
        &self.items
    }

    pub fn edge_count(&self) -> usize {
        self.items.iter().map(Vec::len).sum()
    }

    pub fn neighbors(&self, side: Side, v: usize) -> Result<&[usize]> {
        let rows = match side {
            Side::Left => &self.items,
            Side::Right => &self.pools,
        };
        rows.get(v).map(Vec::as_slice).ok_or(Error::Range {
            side: side.name(),
            index: v,
            len: rows.len(),
        })
    }

    /// Union of the pools of every item in `s`.
    pub fn neighborhood(&self, s: &[usize]) -> Result<Vec<usize>> {
        let mut mark = vec![false; self.n_right()];
        for &v in s {
            for &r in self.neighbors(Side::Left, v)? {
                mark[r] = true;
            }
        }
        Ok(mark
            .iter()
            .enumerate()
            .filter_map(|(r, &m)| m.then_some(r))
            .collect())
    }

    /// Disjoint union of the right sides; pools of `other` are shifted by
    /// `self.n_right()`.
    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_left(other)?;
        let offset = self.n_right();
        let items = self
            .items
            .iter()
            .zip(&other.items)
            .map(|(a, b)| {
                a.iter()
                    .copied()
                    .chain(b.iter().map(|r| r + offset))
                    .collect()
            })
            .collect();
        let g = Self::from_items(offset + other.n_right(), items)?;
        match (self.groups, other.groups) {
            (Some(t1), Some(t2)) if self.group_size() == other.group_size() => {
                g.with_groups(t1 + t2)
            }
            _ => Ok(g),
        }
    }

    /// Product graph: pool `(i, j)`, stored at `i * other.n_right() + j`,
    /// contains the items of pool `i` of `self` together with those of pool
    /// `j` of `other`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.same_left(other)?;
        let mut pools = Vec::with_capacity(self.n_right() * other.n_right());
        for a in &self.pools {
            for b in &other.pools {
                pools.push(merge_sorted(a, b));
            }
        }
        Ok(Self {
            n_left: self.n_left,
            items: transpose(self.n_left, &pools),
            pools,
            left_degree: None,
            groups: None,
        }
        .rederive())
    }

    /// Composition with `inner`: each group of `self` is replaced by a copy of
    /// `inner` and paths of length two are short-cut. Right vertex `(j, k)` is
    /// stored at `j * inner.n_right() + k`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let (Some(t), Some(size)) = (self.groups, self.group_size()) else {
            return Err(Error::Shape(
                "outer graph of a composition needs groups".into(),
            ));
        };
        if inner.n_left != size {
            return Err(Error::Shape(format!(
                "inner graph has {} left vertices but groups have size {size}",
                inner.n_left
            )));
        }
        let width = inner.n_right();
        let items = self
            .items
            .iter()
            .map(|nbrs| {
                nbrs.iter()
                    .flat_map(|&r| {
                        let (j, v) = (r / size, r % size);
                        inner.items[v].iter().map(move |&k| j * width + k)
                    })
                    .collect()
            })
            .collect();
        let g = Self::from_items(t * width, items)?;
        match (inner.groups, inner.left_degree) {
            (Some(t2), _) => g.with_groups(t * t2),
            (None, Some(1)) => g.with_groups(t),
            _ => Ok(g),
        }
    }

    /// Distribution on pools obtained by picking a uniform item of `s` and
    /// then a uniform pool of that item. Requires a left-regular graph.
    pub fn induced_distribution(&self, s: &[usize]) -> Result<NeighborDistribution> {
        let t = self.regular_degree()?;
        let s = self.left_set(s)?;
        if s.is_empty() {
            return Err(Error::Domain("induced distribution of an empty set".into()));
        }
        let mut tallies = BTreeMap::new();
        for &v in &s {
            for &r in &self.items[v] {
                *tallies.entry(r).or_insert(0u64) += 1;
            }
        }
        Ok(NeighborDistribution {
            tallies,
            total: (s.len() * t) as u64,
            source_set_size: s.len(),
        })
    }

    /// The uniform left degree, or an error for irregular graphs.
    pub fn regular_degree(&self) -> Result<usize> {
        match self.left_degree {
            Some(t) if t > 0 => Ok(t),
            _ => Err(Error::Unsupported(
                "graph is not left-regular with positive degree".into(),
            )),
        }
    }

    /// Sorts, deduplicates and range-checks a set of items.
    pub fn left_set(&self, s: &[usize]) -> Result<Vec<usize>> {
        let mut s = s.to_vec();
        s.sort_unstable();
        s.dedup();
        match s.last() {
            Some(&v) if v >= self.n_left => Err(Error::Range {
                side: Side::Left.name(),
                index: v,
                len: self.n_left,
            }),
            _ => Ok(s),
        }
    }

    fn same_left(&self, other: &Self) -> Result<()> {
        if self.n_left != other.n_left {
            return Err(Error::Shape(format!(
                "left sides differ: {} vs {}",
                self.n_left, other.n_left
            )));
        }
        Ok(())
    }

    fn rederive(self) -> Self {
        Self::assemble(self.n_left, self.pools, self.items)
    }
}

fn transpose(n: usize, rows: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut cols = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for &c in row {
            cols[c].push(r);
        }
    }
    cols
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Neighbor distribution of a left set, kept as exact edge tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborDistribution {
    tallies: BTreeMap<usize, u64>,
    total: u64,
    source_set_size: usize,
}

impl NeighborDistribution {
    pub fn source_set_size(&self) -> usize {
        self.source_set_size
    }

    /// Number of edges leaving the source set; every probability has this
    /// denominator.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn tally(&self, r: usize) -> u64 {
        self.tallies.get(&r).copied().unwrap_or(0)
    }

    pub fn probability(&self, r: usize) -> Ratio<u64> {
        Ratio::new(self.tally(r), self.total)
    }

    pub fn probability_f64(&self, r: usize) -> f64 {
        self.tally(r) as f64 / self.total as f64
    }

    /// `(pool, tally)` pairs over the support, in pool order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.tallies.iter().map(|(&r, &c)| (r, c))
    }

    pub fn support_len(&self) -> usize {
        self.tallies.len()
    }

    pub fn total_mass(&self) -> Ratio<u64> {
        Ratio::new(self.tallies.values().sum(), self.total)
    }
}

const MAGIC: &str = "GT1";

/// Line-oriented text form: a `GT1 <n_left> <n_right> <t|-> <groups|->`
/// header, one line of sorted items per pool, then a blank line.
impl fmt::Display for MeasurementGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        writeln!(
            f,
            "{MAGIC} {} {} {} {}",
            self.n_left,
            self.n_right(),
            opt(self.left_degree),
            opt(self.groups)
        )?;
        for pool in &self.pools {
            let mut first = true;
            for v in pool {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{v}")?;
                first = false;
            }
            f.write_str("\n")?;
        }
        f.write_str("\n")
    }
}

impl FromStr for MeasurementGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = s.split('\n');
        let header = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 5 || fields[0] != MAGIC {
            return Err(err(1, "expected `GT1 <n_left> <n_right> <t|-> <groups|->`"));
        }
        let num = |tok: &str| tok.parse::<usize>().map_err(|_| err(1, "bad number"));
        let opt = |tok: &str| {
            if tok == "-" {
                Ok(None)
            } else {
                num(tok).map(Some)
            }
        };
        let n_left = num(fields[1])?;
        let n_right = num(fields[2])?;
        let degree = opt(fields[3])?;
        let groups = opt(fields[4])?;

        let mut pools = Vec::with_capacity(n_right);
        for r in 0..n_right {
            let lineno = r + 2;
            let line = lines
                .next()
                .ok_or_else(|| err(lineno, "missing pool line"))?;
            let pool = if line.is_empty() {
                Vec::new()
            } else {
                line.split(' ')
                    .map(|tok| {
                        tok.parse::<usize>()
                            .map_err(|_| err(lineno, "bad item index"))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            if pool.windows(2).any(|w| w[0] >= w[1]) {
                return Err(err(lineno, "items must be strictly increasing"));
            }
            pools.push(pool);
        }
        if lines.next() != Some("") || lines.next() != Some("") || lines.next().is_some() {
            return Err(err(n_right + 2, "expected a single blank terminator line"));
        }
        let mut g = Self::from_pools(n_left, pools)?;
        if g.left_degree != degree {
            return Err(err(1, "declared left degree does not match adjacency"));
        }
        if let Some(t) = groups {
            g = g.with_groups(t)?;
        }
        Ok(g)
    }
}
