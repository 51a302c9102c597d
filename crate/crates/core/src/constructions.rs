//! Measurement-graph constructions.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::graph::MeasurementGraph;
use crate::subsets::{binomial, ceil_log2, Combinations};
use crate::verify::{check_expansion, Limits, PropertyReport};

/// One pool per item.
pub fn identity_design(n: usize) -> Result<MeasurementGraph> {
    if n == 0 {
        return Err(Error::Domain(
            "identity design needs at least one item".into(),
        ));
    }
    MeasurementGraph::from_pools(n, (0..n).map(|i| vec![i]).collect())
}

/// Every item gets `t` private pools; pool `j * n + i` is the `j`-th pool of
/// item `i`, so group `j` holds the `j`-th pool of every item.
pub fn trivial_expander(n: usize, t: usize) -> Result<MeasurementGraph> {
    if n == 0 || t == 0 {
        return Err(Error::Domain("trivial expander needs n, t >= 1".into()));
    }
    let items = (0..n)
        .map(|i| (0..t).map(|j| j * n + i).collect())
        .collect();
    MeasurementGraph::from_items(n * t, items)?.with_groups(t)
}

/// Each (pool, item) incidence present independently with probability
/// `1/(d+1)`.
pub fn random_bernoulli_design(
    n: usize,
    m: usize,
    d: usize,
    seed: u64,
) -> Result<MeasurementGraph> {
    if d == 0 || d >= n {
        return Err(Error::Domain(format!(
            "sparsity {d} must satisfy 1 <= d < n = {n}"
        )));
    }
    bernoulli_design(n, m, 1.0 / (d as f64 + 1.0), seed)
}

/// Each (pool, item) incidence present independently with probability
/// `prob`. Incidences are drawn pool by pool, items in order.
pub fn bernoulli_design(n: usize, m: usize, prob: f64, seed: u64) -> Result<MeasurementGraph> {
    if n == 0 || m == 0 {
        return Err(Error::Domain("Bernoulli design needs n, m >= 1".into()));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Domain(format!(
            "edge probability {prob} not in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pools = (0..m)
        .map(|_| (0..n).filter(|_| rng.gen_bool(prob)).collect())
        .collect();
    MeasurementGraph::from_pools(n, pools)
}

/// Kautz–Singleton design from Reed–Solomon codewords over a prime field.
///
/// Item `f` is the polynomial whose coefficients are the base-`q` digits of
/// `f` (constant term first). Pool `i * q + s` contains the items with
/// `f(i) = s`, and position `i` forms group `i`.
pub fn kautz_singleton(q: usize, msg_len: usize) -> Result<MeasurementGraph> {
    let field = PrimeField::new(q as u64)?;
    if msg_len < 2 || msg_len > q {
        return Err(Error::Domain(format!(
            "message length {msg_len} must lie in 2..={q}"
        )));
    }
    let n = (q as u128).pow(msg_len as u32);
    if n > 1 << 24 {
        return Err(Error::Domain(format!(
            "{n} codewords is too many to materialize"
        )));
    }
    let n = n as usize;
    let mut coeffs = vec![0u64; msg_len];
    let items = (0..n)
        .map(|f| {
            let mut rest = f;
            for c in coeffs.iter_mut() {
                *c = (rest % q) as u64;
                rest /= q;
            }
            (0..q)
                .map(|i| i * q + field.eval(&coeffs, i as u64) as usize)
                .collect()
        })
        .collect();
    MeasurementGraph::from_items(q * q, items)?.with_groups(q)
}

/// Target of a lossless-expander search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpanderSpec {
    /// Largest set size that must expand.
    pub k: usize,
    pub epsilon: f64,
    /// Left degree.
    pub t: usize,
    pub n_left: usize,
    pub n_right: usize,
}

impl ExpanderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Domain(format!(
                "epsilon {} not in [0, 1)",
                self.epsilon
            )));
        }
        if self.k == 0 || self.t == 0 || self.n_left == 0 {
            return Err(Error::Domain("k, t and n_left must be positive".into()));
        }
        if self.t > self.n_right {
            return Err(Error::Domain(format!(
                "degree {} exceeds the {} right vertices",
                self.t, self.n_right
            )));
        }
        Ok(())
    }

    /// Expansion factor `t (1 - ε)`.
    pub fn expansion(&self) -> f64 {
        self.t as f64 * (1.0 - self.epsilon)
    }
}

/// A graph with the report that certified it.
#[derive(Debug, Clone, PartialEq)]
pub struct Certified {
    pub graph: MeasurementGraph,
    pub report: PropertyReport,
    /// Zero-based index of the sample that certified.
    pub attempt: usize,
}

fn sample_regular(
    n_left: usize,
    n_right: usize,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MeasurementGraph> {
    if n_right % t == 0 {
        let size = n_right / t;
        let items = (0..n_left)
            .map(|_| (0..t).map(|j| j * size + rng.gen_range(0..size)).collect())
            .collect();
        MeasurementGraph::from_items(n_right, items)?.with_groups(t)
    } else {
        let items = (0..n_left)
            .map(|_| index::sample(rng, n_right, t).into_vec())
            .collect();
        MeasurementGraph::from_items(n_right, items)
    }
}

fn attempt_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

/// Random `t`-regular graph: one uniform neighbor per group when `t` divides
/// `n_right` (a function graph), otherwise `t` distinct uniform neighbors.
pub fn random_regular_graph(
    n_left: usize,
    n_right: usize,
    t: usize,
    seed: u64,
) -> Result<MeasurementGraph> {
    if t == 0 || t > n_right {
        return Err(Error::Domain(format!("degree {t} not in 1..={n_right}")));
    }
    sample_regular(n_left, n_right, t, &mut attempt_rng(seed, 0))
}

/// Samples random regular graphs (attempt `a` uses stream `a` of the seeded
/// generator) until one is certified as a `(k, ε)`-lossless expander.
pub fn random_lossless_expander(
    spec: &ExpanderSpec,
    seed: u64,
    max_attempts: usize,
    limits: &Limits,
) -> Result<Certified> {
    spec.validate()?;
    let kk = spec.k.min(spec.n_left);
    let full = (spec.t * kk) as f64;
    if (spec.n_right as f64) < (1.0 - spec.epsilon) * full {
        return Err(Error::Exhausted {
            attempts: 0,
            best_epsilon: 1.0 - spec.n_right as f64 / full,
        });
    }
    let mut best = f64::INFINITY;
    for attempt in 0..max_attempts {
        let g = sample_regular(
            spec.n_left,
            spec.n_right,
            spec.t,
            &mut attempt_rng(seed, attempt),
        )?;
        let report = check_expansion(&g, spec.k, spec.epsilon, limits)?;
        if report.holds {
            return Ok(Certified {
                graph: g,
                report,
                attempt,
            });
        }
        if let Some(r) = report.extremal_ratio() {
            best = best.min(*r.numer() as f64 / *r.denom() as f64);
        }
    }
    Err(Error::Exhausted {
        attempts: max_attempts,
        best_epsilon: best,
    })
}

/// Parameters of the regular-graph construction built on a lossless
/// expander.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularConstructionParams {
    /// Threshold.
    pub u: usize,
    /// Noise fraction.
    pub p: f64,
    /// Scale; the output targets critical sets of size `k/4..=k/2`.
    pub k: usize,
    pub expander: ExpanderSpec,
}

impl RegularConstructionParams {
    /// Left degree `8u` of the bi-regular middle graph.
    pub fn left_degree(&self) -> usize {
        8 * self.u
    }

    /// Right degree `8u |R| / k` of the middle graph, with `|R|` the group
    /// size of the ingredient.
    pub fn right_degree(&self) -> Result<usize> {
        let group = self.group_size()?;
        let slots = 8 * self.u * group;
        if slots % self.k != 0 {
            return Err(Error::Domain(format!(
                "right degree 8u|R|/k = {slots}/{} is not an integer",
                self.k
            )));
        }
        Ok(slots / self.k)
    }

    pub fn group_size(&self) -> Result<usize> {
        let e = &self.expander;
        if e.t == 0 || e.n_right % e.t != 0 {
            return Err(Error::Domain(
                "ingredient right side does not split into t groups".into(),
            ));
        }
        Ok(e.n_right / e.t)
    }

    /// Exact output size `t k C(d_r, u)`.
    pub fn output_size(&self) -> Result<u128> {
        let dr = self.right_degree()?;
        Ok((self.expander.t as u128 * self.k as u128).saturating_mul(binomial(dr, self.u)))
    }

    pub fn validate(&self) -> Result<()> {
        self.expander.validate()?;
        if self.u == 0 {
            return Err(Error::Domain("threshold u must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::Domain(format!(
                "noise fraction {} not in [0, 1)",
                self.p
            )));
        }
        if self.expander.epsilon >= (1.0 - self.p) / 16.0 {
            return Err(Error::Domain(format!(
                "epsilon {} must be below (1 - p)/16 = {}",
                self.expander.epsilon,
                (1.0 - self.p) / 16.0
            )));
        }
        for (name, v) in [
            ("k", self.k),
            ("n_left", self.expander.n_left),
            ("n_right", self.expander.n_right),
        ] {
            if !v.is_power_of_two() {
                return Err(Error::Domain(format!("{name} = {v} is not a power of two")));
            }
        }
        self.right_degree().map(|_| ())
    }
}

/// Middle layer of the regular construction.
///
/// The bi-regular graph between the `group_size` ingredient right vertices
/// and `k` hubs is the cyclic assignment: edge `j` of vertex `v` goes to hub
/// `(v * 8u + j) mod k`. Each hub therefore owns `d_r` edge slots (a vertex
/// may occupy several). Every `u`-subset of a hub's slots becomes one output
/// vertex adjacent to the vertices in those slots; output vertex
/// `w * C(d_r, u) + rank` is the `rank`-th subset of hub `w` in lexicographic
/// order.
pub fn regular_inner_graph(group_size: usize, k: usize, u: usize) -> Result<MeasurementGraph> {
    if k == 0 || u == 0 {
        return Err(Error::Domain("k and u must be positive".into()));
    }
    let dl = 8 * u;
    if (group_size * dl) % k != 0 {
        return Err(Error::Domain(format!(
            "{group_size} vertices of degree {dl} cannot be spread evenly over {k} hubs"
        )));
    }
    let dr = group_size * dl / k;
    Limits::default().admit((k as u128).saturating_mul(binomial(dr, u)))?;

    let mut slots = vec![Vec::with_capacity(dr); k];
    for v in 0..group_size {
        for j in 0..dl {
            slots[(v * dl + j) % k].push(v);
        }
    }
    let mut pools = Vec::new();
    for hub in &slots {
        let mut comb = Combinations::new(dr, u);
        while let Some(c) = comb.next() {
            pools.push(c.iter().map(|&p| hub[p]).collect());
        }
    }
    MeasurementGraph::from_pools(group_size, pools)
}

/// Regular graph from a lossless function-graph expander: the ingredient
/// composed with [`regular_inner_graph`]. The ingredient's certification is
/// the caller's responsibility; its structure and the parameter constraints
/// are checked here.
pub fn expander_regular_graph(
    params: &RegularConstructionParams,
    ingredient: &MeasurementGraph,
) -> Result<MeasurementGraph> {
    params.validate()?;
    let e = &params.expander;
    if ingredient.groups() != Some(e.t)
        || ingredient.n_left() != e.n_left
        || ingredient.n_right() != e.n_right
    {
        return Err(Error::Shape(format!(
            "ingredient must be a function graph with {} items, {} right vertices and {} groups",
            e.n_left, e.n_right, e.t
        )));
    }
    let inner = regular_inner_graph(params.group_size()?, params.k, params.u)?;
    ingredient.compose(&inner)
}

/// Scales `2^(⌈log d⌉+1), 2^⌈log d⌉, ..., 2^(⌈log u⌉+2)`, largest first. A
/// single scale `2^(⌈log u⌉+2)` when the sequence would be empty.
pub fn dyadic_ladder(u: usize, d: usize) -> Vec<usize> {
    let top = ceil_log2(d) + 1;
    let bottom = ceil_log2(u) + 2;
    if top < bottom {
        return vec![1 << bottom];
    }
    (bottom..=top).rev().map(|e| 1usize << e).collect()
}

/// Union of regular graphs over a ladder of scales.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularUnion {
    pub graph: MeasurementGraph,
    pub ladder: Vec<usize>,
    /// Right size of each component, in ladder order.
    pub component_sizes: Vec<usize>,
    /// Critical-set sizes covered by some component (`k/4..=k/2`).
    pub covered: (usize, usize),
    /// Sizes in `u..=d` that no component covers.
    pub uncovered: Option<(usize, usize)>,
}

/// Builds the regular construction at every scale of [`dyadic_ladder`] and
/// takes the union. `ingredient(k)` supplies a lossless expander for scale
/// `k` together with its spec; all ingredients must share the item set.
pub fn regular_union(
    u: usize,
    d: usize,
    p: f64,
    mut ingredient: impl FnMut(usize) -> Result<(MeasurementGraph, ExpanderSpec)>,
) -> Result<RegularUnion> {
    if u == 0 || d < u {
        return Err(Error::Domain(format!(
            "need 1 <= u <= d, got u = {u}, d = {d}"
        )));
    }
    let ladder = dyadic_ladder(u, d);
    let mut graph: Option<MeasurementGraph> = None;
    let mut component_sizes = Vec::with_capacity(ladder.len());
    for &k in &ladder {
        let (g, expander) = ingredient(k)?;
        let params = RegularConstructionParams { u, p, k, expander };
        let part = expander_regular_graph(&params, &g)?;
        component_sizes.push(part.n_right());
        graph = Some(match graph {
            Some(acc) => acc.union(&part)?,
            None => part,
        });
    }
    let k0 = *ladder.last().unwrap_or(&4);
    let covered = ((k0 / 4).max(1), ladder[0] / 2);
    let uncovered = (covered.0 > u).then(|| (u, (covered.0 - 1).min(d)));
    Ok(RegularUnion {
        graph: graph.ok_or_else(|| Error::Domain("empty ladder".into()))?,
        ladder,
        component_sizes,
        covered,
        uncovered,
    })
}

/// Product of a regular graph and a classical graph, with the threshold
/// disjunctness it is expected to reach.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdProduct {
    pub graph: MeasurementGraph,
    pub d: usize,
    pub u: usize,
    /// Target noise tolerance `(e1 + 1) e2 - 1`.
    pub e: i64,
}

/// `regular ⊙ disjunct`, where `regular` is `(d-1, e1; u-1)`-regular and
/// `disjunct` separates `d`-sparse vectors by at least `e2` pools.
pub fn threshold_disjunct_product(
    regular: &MeasurementGraph,
    disjunct: &MeasurementGraph,
    d: usize,
    u: usize,
    e1: usize,
    e2: usize,
) -> Result<ThresholdProduct> {
    let graph = regular.product(disjunct)?;
    Ok(ThresholdProduct {
        graph,
        d,
        u,
        e: ((e1 + 1) * e2) as i64 - 1,
    })
}

/// Ordered key-value record describing how a graph was built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(construction: &str) -> Self {
        let mut m = Self::default();
        m.push("construction", construction);
        m
    }

    pub fn push(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

impl fmt::Display for Metadata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_shapes() {
        let g = identity_design(1).unwrap();
        assert_eq!(g.pools(), &[vec![0]]);
        assert_eq!(identity_design(4).unwrap().left_degree(), Some(1));
        assert!(identity_design(0).is_err());
    }

    #[test]
    fn trivial_expander_shapes() {
        let g = trivial_expander(2, 2).unwrap();
        assert_eq!(g.pools(), &[vec![0], vec![1], vec![0], vec![1]]);
        assert_eq!(g.groups(), Some(2));
        assert_eq!(g.left_degree(), Some(2));
        assert!(trivial_expander(0, 2).is_err());
        assert!(trivial_expander(2, 0).is_err());
    }

    #[test]
    fn bernoulli_is_reproducible() {
        let a = random_bernoulli_design(20, 60, 2, 7).unwrap();
        let b = random_bernoulli_design(20, 60, 2, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), b.to_string());
        assert_ne!(a, random_bernoulli_design(20, 60, 2, 8).unwrap());
        assert!(random_bernoulli_design(4, 3, 4, 0).is_err());
        assert!(random_bernoulli_design(4, 3, 0, 0).is_err());
    }

    #[test]
    fn kautz_singleton_shapes() {
        let g = kautz_singleton(3, 2).unwrap();
        assert_eq!(
            (g.n_left(), g.n_right(), g.left_degree(), g.groups()),
            (9, 9, Some(3), Some(3))
        );
        // item 0 is the zero polynomial: symbol 0 at every position
        assert_eq!(g.item(0), &[0, 3, 6]);
        assert!(matches!(kautz_singleton(4, 2), Err(Error::Unsupported(_))));
        assert!(kautz_singleton(3, 1).is_err());
        assert!(kautz_singleton(3, 4).is_err());
    }

    #[test]
    fn expander_pigeonhole_exhausts_immediately() {
        let spec = ExpanderSpec {
            k: 4,
            epsilon: 0.0,
            t: 3,
            n_left: 8,
            n_right: 9,
        };
        match random_lossless_expander(&spec, 1, 100, &Limits::default()) {
            Err(Error::Exhausted { attempts: 0, .. }) => {}
            other => panic!("expected immediate exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn singletons_always_expand() {
        let spec = ExpanderSpec {
            k: 1,
            epsilon: 0.0,
            t: 3,
            n_left: 10,
            n_right: 12,
        };
        let c = random_lossless_expander(&spec, 5, 1, &Limits::default()).unwrap();
        assert_eq!(c.attempt, 0);
        assert_eq!(c.graph.groups(), Some(3));
        let spec = ExpanderSpec {
            n_right: 11,
            ..spec
        };
        let c = random_lossless_expander(&spec, 5, 1, &Limits::default()).unwrap();
        assert_eq!(c.graph.groups(), None);
        assert_eq!(c.graph.left_degree(), Some(3));
    }

    #[test]
    fn ladder_endpoints() {
        assert_eq!(dyadic_ladder(2, 8), vec![16, 8]);
        assert_eq!(dyadic_ladder(2, 4), vec![8]);
        assert_eq!(dyadic_ladder(2, 2), vec![8]);
        assert_eq!(dyadic_ladder(1, 8), vec![16, 8, 4]);
        assert_eq!(dyadic_ladder(3, 16), vec![32, 16]);
    }

    #[test]
    fn inner_graph_counts() {
        let g = regular_inner_graph(8, 4, 2).unwrap();
        assert_eq!(g.n_right(), 4 * 496);
        let g = regular_inner_graph(8, 4, 1).unwrap();
        assert_eq!(g.n_right(), 4 * 16);
        assert!(regular_inner_graph(3, 5, 1).is_err());
    }

    #[test]
    fn regular_construction_parameter_checks() {
        let ing = trivial_expander(8, 2).unwrap();
        let spec = ExpanderSpec {
            k: 4,
            epsilon: 0.0,
            t: 2,
            n_left: 8,
            n_right: 16,
        };
        let ok = RegularConstructionParams {
            u: 2,
            p: 0.5,
            k: 4,
            expander: spec,
        };
        assert_eq!(
            expander_regular_graph(&ok, &ing).unwrap().n_right(),
            2 * 4 * 496
        );

        let bad_eps = RegularConstructionParams {
            expander: ExpanderSpec {
                epsilon: 0.04,
                ..spec
            },
            ..ok
        };
        assert!(expander_regular_graph(&bad_eps, &ing).is_err());
        let bad_k = RegularConstructionParams { k: 3, ..ok };
        assert!(expander_regular_graph(&bad_k, &ing).is_err());
        let wrong_shape = RegularConstructionParams {
            expander: ExpanderSpec {
                t: 4,
                n_right: 32,
                ..spec
            },
            ..ok
        };
        assert!(expander_regular_graph(&wrong_shape, &ing).is_err());
    }

    #[test]
    fn metadata_text() {
        let mut m = Metadata::new("identity");
        m.push("n", 4).push("seed", 7);
        assert_eq!(m.to_string(), "construction = identity\nn = 4\nseed = 7\n");
        assert_eq!(m.get("n"), Some("4"));
    }
}
