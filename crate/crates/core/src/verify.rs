//! Exhaustive certifiers for the combinatorial properties of measurement
//! graphs.
//!
//! Every certifier enumerates its whole quantifier space (subject to a
//! [`Limits`] cap checked *before* any work) and returns a
//! [`PropertyReport`]. A report never claims `holds` from a partial search.
//! Subsets are visited by size and then lexicographically, so the first
//! witness found is deterministic.

use std::fmt;
use std::ops::RangeInclusive;

use num_rational::Ratio;

use crate::decode::Decoder;
use crate::error::{Error, Result};
use crate::graph::MeasurementGraph;
use crate::simulate::{flip, measure_model, Model, OutcomeVector, SparseVector};
use crate::subsets::{
    binomial, count_difference, count_ones, count_xor, left_mask, mask_members, or_into,
    right_bits, subsets_by_size, Combinations,
};

/// Hard cap on the number of enumeration steps a certifier may plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_steps: 200_000_000,
        }
    }
}

impl Limits {
    pub fn new(max_steps: u128) -> Self {
        Self { max_steps }
    }

    /// Fails with [`Error::Infeasible`] if `needed` steps exceed the cap.
    pub fn admit(&self, needed: u128) -> Result<()> {
        if needed > self.max_steps {
            return Err(Error::Infeasible {
                needed,
                cap: self.max_steps,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Disjunct,
    Expansion,
    Regular,
    ThresholdDisjunct,
    Extractor,
    Condenser,
    Distance,
    Separation,
    NoiseTolerance,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Disjunct => "disjunct",
            Property::Expansion => "expansion",
            Property::Regular => "regular",
            Property::ThresholdDisjunct => "threshold_disjunct",
            Property::Extractor => "extractor",
            Property::Condenser => "condenser",
            Property::Distance => "distance",
            Property::Separation => "separation",
            Property::NoiseTolerance => "noise_tolerance",
        }
    }
}

/// Parameters a property was checked at. Unused fields stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Claim {
    pub d: Option<usize>,
    pub e: Option<usize>,
    pub u: Option<usize>,
    pub k: Option<usize>,
    pub k_prime: Option<usize>,
    pub epsilon: Option<f64>,
    pub min_critical: Option<usize>,
    pub e0: Option<usize>,
    pub e1: Option<usize>,
}

/// Tightest parameter reached by the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremal {
    /// Largest tolerance that holds (`-1` if none does), or for
    /// [`Property::Separation`] the smallest separation seen.
    Count(i64),
    /// Smallest error parameter that holds (max over enumerated sets).
    Ratio(Ratio<u64>),
}

impl Extremal {
    pub fn count(&self) -> Option<i64> {
        match self {
            Extremal::Count(c) => Some(*c),
            Extremal::Ratio(_) => None,
        }
    }

    pub fn ratio(&self) -> Option<Ratio<u64>> {
        match self {
            Extremal::Ratio(r) => Some(*r),
            Extremal::Count(_) => None,
        }
    }
}

impl fmt::Display for Extremal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extremal::Count(c) => write!(f, "{c}"),
            Extremal::Ratio(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

/// A concrete violation of a property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Disjunct {
        item: usize,
        set: Vec<usize>,
    },
    Expansion {
        set: Vec<usize>,
    },
    Regular {
        critical: Vec<usize>,
        zero: Vec<usize>,
    },
    ThresholdDisjunct {
        item: usize,
        critical: Vec<usize>,
        zero: Vec<usize>,
    },
    Distribution {
        set: Vec<usize>,
    },
    Pair {
        x: Vec<usize>,
        x_prime: Vec<usize>,
    },
    Flips {
        flips: Vec<usize>,
        decoded: Vec<usize>,
    },
}

fn list(v: &[usize]) -> String {
    if v.is_empty() {
        return "{}".into();
    }
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Disjunct { item, set } => write!(f, "i={item} S={}", list(set)),
            Witness::Expansion { set } | Witness::Distribution { set } => {
                write!(f, "S={}", list(set))
            }
            Witness::Regular { critical, zero } => {
                write!(f, "S={} Z={}", list(critical), list(zero))
            }
            Witness::ThresholdDisjunct {
                item,
                critical,
                zero,
            } => write!(f, "i={item} S={} Z={}", list(critical), list(zero)),
            Witness::Pair { x, x_prime } => write!(f, "x={} x'={}", list(x), list(x_prime)),
            Witness::Flips { flips, decoded } => {
                write!(f, "flips={} decoded={}", list(flips), list(decoded))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: Property,
    pub claim: Claim,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub extremal: Option<Extremal>,
    /// Number of enumerated cases.
    pub work: u128,
}

impl PropertyReport {
    /// Largest certified tolerance, if the extremal is a count.
    pub fn extremal_count(&self) -> Option<i64> {
        self.extremal.and_then(|e| e.count())
    }

    pub fn extremal_ratio(&self) -> Option<Ratio<u64>> {
        self.extremal.and_then(|e| e.ratio())
    }
}

/// Key-value text with a fixed field order.
impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "-".into(), |v| v.to_string())
        }
        let c = &self.claim;
        writeln!(f, "property = {}", self.property.name())?;
        writeln!(f, "d = {}", opt(c.d))?;
        writeln!(f, "e = {}", opt(c.e))?;
        writeln!(f, "u = {}", opt(c.u))?;
        writeln!(f, "k = {}", opt(c.k))?;
        writeln!(f, "k_prime = {}", opt(c.k_prime))?;
        writeln!(f, "epsilon = {}", opt(c.epsilon))?;
        writeln!(f, "min_critical = {}", opt(c.min_critical))?;
        writeln!(f, "e0 = {}", opt(c.e0))?;
        writeln!(f, "e1 = {}", opt(c.e1))?;
        writeln!(f, "holds = {}", self.holds)?;
        writeln!(f, "extremal = {}", opt(self.extremal))?;
        writeln!(f, "witness = {}", opt(self.witness.as_ref()))?;
        writeln!(f, "work = {}", self.work)
    }
}

fn ratio_le(r: Ratio<u64>, eps: f64) -> bool {
    (*r.numer() as f64) / (*r.denom() as f64) <= eps
}

fn pool_masks(g: &MeasurementGraph) -> Result<Vec<u128>> {
    if g.n_left() > 128 {
        return Err(Error::Unsupported(format!(
            "{} items exceed the 128-item limit of the set-system certifiers",
            g.n_left()
        )));
    }
    Ok(g.pools().iter().map(|p| left_mask(p)).collect())
}

fn item_bits(g: &MeasurementGraph) -> Vec<Vec<u64>> {
    g.items()
        .iter()
        .map(|it| right_bits(g.n_right(), it))
        .collect()
}

/// Complement of `s` in `0..n`.
fn complement(n: usize, s: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - s.len());
    let mut it = s.iter().peekable();
    for v in 0..n {
        if it.peek() == Some(&&v) {
            it.next();
        } else {
            out.push(v);
        }
    }
    out
}

/// `(d, e)`-disjunctness: every item outside any set of at most `d` items
/// keeps more than `e` pools not covered by that set.
///
/// Only maximal sets (`|S| = min(d, n - 1)`) are enumerated; shrinking `S`
/// can only enlarge `Γ(i) \ Γ(S)`.
pub fn check_disjunct(
    g: &MeasurementGraph,
    d: usize,
    e: usize,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        d: Some(d),
        e: Some(e),
        ..Claim::default()
    };
    let n = g.n_left();
    let s = d.min(n.saturating_sub(1));
    let needed = binomial(n, s).saturating_mul(n.saturating_sub(s) as u128);
    limits.admit(needed)?;

    let bits = item_bits(g);
    let mut union = vec![0u64; g.n_right().div_ceil(64)];
    let mut min = usize::MAX;
    let mut witness = None;
    let mut work = 0u128;
    let mut comb = Combinations::new(n, s);
    while n > 0 {
        let Some(set) = comb.next() else { break };
        union.fill(0);
        for &v in set {
            or_into(&mut union, &bits[v]);
        }
        for i in complement(n, set) {
            work += 1;
            let private = count_difference(&bits[i], &union);
            min = min.min(private);
            if private <= e && witness.is_none() {
                witness = Some(Witness::Disjunct {
                    item: i,
                    set: set.to_vec(),
                });
            }
        }
    }
    Ok(PropertyReport {
        property: Property::Disjunct,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: (min != usize::MAX).then(|| Extremal::Count(min as i64 - 1)),
        work,
    })
}

/// `(k, ε)`-lossless expansion of a left-regular graph: every set of at most
/// `k` items has at least `(1 - ε) t |S|` neighbors. The extremal value is the
/// smallest `ε` that holds.
pub fn check_expansion(
    g: &MeasurementGraph,
    k: usize,
    epsilon: f64,
    limits: &Limits,
) -> Result<PropertyReport> {
    let t = g.regular_degree()?;
    let claim = Claim {
        k: Some(k),
        epsilon: Some(epsilon),
        ..Claim::default()
    };
    let n = g.n_left();
    let top = k.min(n);
    let needed = (1..=top)
        .map(|s| binomial(n, s))
        .fold(0u128, u128::saturating_add);
    limits.admit(needed)?;

    let bits = item_bits(g);
    let mut union = vec![0u64; g.n_right().div_ceil(64)];
    let mut worst = Ratio::from_integer(0u64);
    let mut witness = None;
    let mut work = 0u128;
    for size in 1..=top {
        let mut comb = Combinations::new(n, size);
        while let Some(set) = comb.next() {
            work += 1;
            union.fill(0);
            for &v in set {
                or_into(&mut union, &bits[v]);
            }
            let edges = (t * size) as u64;
            let loss = Ratio::new(edges - count_ones(&union) as u64, edges);
            if loss > worst {
                worst = loss;
            }
            if witness.is_none() && !ratio_le(loss, epsilon) {
                witness = Some(Witness::Expansion { set: set.to_vec() });
            }
        }
    }
    Ok(PropertyReport {
        property: Property::Expansion,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: (top > 0).then_some(Extremal::Ratio(worst)),
        work,
    })
}

/// Pools of `s` that contain at least two of its items.
pub fn collisions(g: &MeasurementGraph, s: &[usize]) -> Result<usize> {
    let s = g.left_set(s)?;
    let mut hits = vec![0u32; g.n_right()];
    for &v in &s {
        for &r in g.item(v) {
            hits[r] += 1;
        }
    }
    Ok(hits.iter().filter(|&&h| h >= 2).count())
}

fn zero_size(n: usize, s: usize) -> usize {
    s.min(n - s)
}

/// `(d, e; u)`-regularity: for every critical set `S` with
/// `max(u, min_critical) <= |S| <= d` and every zero set `Z` disjoint from `S`
/// with `|Z| <= |S|`, more than `e` pools hold exactly `u` items of `S` and
/// none of `Z`.
///
/// That count can only drop as `Z` grows, so only maximal zero sets are
/// enumerated.
pub fn check_regular(
    g: &MeasurementGraph,
    d: usize,
    e: usize,
    u: usize,
    min_critical: usize,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        d: Some(d),
        e: Some(e),
        u: Some(u),
        min_critical: Some(min_critical),
        ..Claim::default()
    };
    let n = g.n_left();
    let lo = u.max(min_critical);
    let hi = d.min(n);
    let needed = (lo..=hi)
        .map(|s| binomial(n, s).saturating_mul(binomial(n - s, zero_size(n, s))))
        .fold(0u128, u128::saturating_add);
    limits.admit(needed)?;
    let masks = pool_masks(g)?;

    let mut min = usize::MAX;
    let mut witness = None;
    let mut work = 0u128;
    for size in lo..=hi {
        let mut comb = Combinations::new(n, size);
        while let Some(set) = comb.next() {
            let s_mask = left_mask(set);
            let candidates: Vec<u128> = masks
                .iter()
                .copied()
                .filter(|m| (m & s_mask).count_ones() as usize == u)
                .collect();
            let rest = complement(n, set);
            let mut zc = Combinations::new(rest.len(), zero_size(n, size));
            while let Some(zi) = zc.next() {
                work += 1;
                let z_mask = zi.iter().fold(0u128, |m, &j| m | 1u128 << rest[j]);
                let count = candidates.iter().filter(|&&m| m & z_mask == 0).count();
                min = min.min(count);
                if count <= e && witness.is_none() {
                    witness = Some(Witness::Regular {
                        critical: set.to_vec(),
                        zero: mask_members(z_mask),
                    });
                }
            }
        }
    }
    Ok(PropertyReport {
        property: Property::Regular,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: (min != usize::MAX).then(|| Extremal::Count(min as i64 - 1)),
        work,
    })
}

/// `(d, e; u)`-disjunctness: as [`check_regular`], but the counted pools must
/// also contain a special item `i ∈ S`, for every choice of `i`.
pub fn check_threshold_disjunct(
    g: &MeasurementGraph,
    d: usize,
    e: usize,
    u: usize,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        d: Some(d),
        e: Some(e),
        u: Some(u),
        ..Claim::default()
    };
    let n = g.n_left();
    let lo = u.max(1);
    let hi = d.min(n);
    let needed = (lo..=hi)
        .map(|s| {
            binomial(n, s)
                .saturating_mul(s as u128)
                .saturating_mul(binomial(n - s, zero_size(n, s)))
        })
        .fold(0u128, u128::saturating_add);
    limits.admit(needed)?;
    let masks = pool_masks(g)?;

    let mut min = usize::MAX;
    let mut witness = None;
    let mut work = 0u128;
    for size in lo..=hi {
        let mut comb = Combinations::new(n, size);
        while let Some(set) = comb.next() {
            let s_mask = left_mask(set);
            let rest = complement(n, set);
            for &i in set {
                let candidates: Vec<u128> = g
                    .item(i)
                    .iter()
                    .map(|&r| masks[r])
                    .filter(|m| (m & s_mask).count_ones() as usize == u)
                    .collect();
                let mut zc = Combinations::new(rest.len(), zero_size(n, size));
                while let Some(zi) = zc.next() {
                    work += 1;
                    let z_mask = zi.iter().fold(0u128, |m, &j| m | 1u128 << rest[j]);
                    let count = candidates.iter().filter(|&&m| m & z_mask == 0).count();
                    min = min.min(count);
                    if count <= e && witness.is_none() {
                        witness = Some(Witness::ThresholdDisjunct {
                            item: i,
                            critical: set.to_vec(),
                            zero: mask_members(z_mask),
                        });
                    }
                }
            }
        }
    }
    Ok(PropertyReport {
        property: Property::ThresholdDisjunct,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: (min != usize::MAX).then(|| Extremal::Count(min as i64 - 1)),
        work,
    })
}

/// Exact statistical distance between the neighbor distribution of `s` and
/// the uniform distribution on all pools.
pub fn extractor_distance(g: &MeasurementGraph, s: &[usize]) -> Result<Ratio<u64>> {
    let dist = g.induced_distribution(s)?;
    let total = dist.total();
    let m = g.n_right() as u64;
    // |c/total - 1/m| = |c*m - total| / (total*m); empty pools contribute total each
    let mut sum = (m - dist.support_len() as u64) * total;
    for (_, c) in dist.iter() {
        sum += (c * m).abs_diff(total);
    }
    Ok(Ratio::new(sum, 2 * total * m))
}

/// Mass of the neighbor distribution of `s` above the cap `1/(t k')`: the
/// distance to the nearest distribution of min-entropy `log(t k')`.
pub fn condenser_excess(g: &MeasurementGraph, s: &[usize], k_prime: usize) -> Result<Ratio<u64>> {
    let t = g.regular_degree()?;
    let cap_inv = (t * k_prime) as u64;
    if k_prime == 0 || cap_inv > g.n_right() as u64 {
        return Err(Error::Domain(format!(
            "t*k' = {cap_inv} must be positive and at most the {} pools",
            g.n_right()
        )));
    }
    let dist = g.induced_distribution(s)?;
    let total = dist.total();
    // c/total - 1/cap_inv = (c*cap_inv - total) / (total*cap_inv)
    let over: u64 = dist
        .iter()
        .map(|(_, c)| (c * cap_inv).saturating_sub(total))
        .sum();
    Ok(Ratio::new(over, total * cap_inv))
}

fn check_distribution(
    g: &MeasurementGraph,
    k: usize,
    epsilon: f64,
    property: Property,
    claim: Claim,
    limits: &Limits,
    measure: impl Fn(&[usize]) -> Result<Ratio<u64>>,
) -> Result<PropertyReport> {
    g.regular_degree()?;
    let n = g.n_left();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("set size {k} not in 1..={n}")));
    }
    limits.admit(binomial(n, k))?;
    let mut worst = Ratio::from_integer(0u64);
    let mut witness = None;
    let mut work = 0u128;
    let mut comb = Combinations::new(n, k);
    while let Some(set) = comb.next() {
        work += 1;
        let dist = measure(set)?;
        if dist > worst {
            worst = dist;
        }
        if witness.is_none() && !ratio_le(dist, epsilon) {
            witness = Some(Witness::Distribution { set: set.to_vec() });
        }
    }
    Ok(PropertyReport {
        property,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: Some(Extremal::Ratio(worst)),
        work,
    })
}

/// `(k, ε)`-extractor: every set of exactly `k` items induces a distribution
/// `ε`-close to uniform on the pools.
pub fn check_extractor(
    g: &MeasurementGraph,
    k: usize,
    epsilon: f64,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        k: Some(k),
        epsilon: Some(epsilon),
        ..Claim::default()
    };
    check_distribution(g, k, epsilon, Property::Extractor, claim, limits, |s| {
        extractor_distance(g, s)
    })
}

/// `k ->_ε k'` condenser: every set of exactly `k` items induces a
/// distribution `ε`-close to one of min-entropy `log(t k')`.
pub fn check_condenser(
    g: &MeasurementGraph,
    k: usize,
    k_prime: usize,
    epsilon: f64,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        k: Some(k),
        k_prime: Some(k_prime),
        epsilon: Some(epsilon),
        ..Claim::default()
    };
    check_distribution(g, k, epsilon, Property::Condenser, claim, limits, |s| {
        condenser_excess(g, s, k_prime)
    })
}

/// Supports of the vectors compared by the pairwise checks, and their
/// outcomes as pool bitsets.
fn outcome_table(
    g: &MeasurementGraph,
    weights: RangeInclusive<usize>,
    model: Model,
) -> Result<(Vec<Vec<usize>>, Vec<Vec<u64>>)> {
    let supports = subsets_by_size(g.n_left(), *weights.start(), *weights.end());
    let outcomes = supports
        .iter()
        .map(|s| {
            let x = SparseVector::new(g.n_left(), s.clone())?;
            let y = measure_model(g, &x, model)?;
            Ok(right_bits(g.n_right(), y.positives()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((supports, outcomes))
}

fn pair_count(n: usize, weights: &RangeInclusive<usize>) -> u128 {
    let v = weights
        .clone()
        .map(|w| binomial(n, w))
        .fold(0u128, u128::saturating_add);
    v.saturating_mul(v.saturating_sub(1)) / 2
}

/// Outcome Hamming distance: all distinct vectors of weight at most `d`
/// (at least `u` in the threshold model) have outcomes more than `e` apart.
pub fn distance_check(
    g: &MeasurementGraph,
    d: usize,
    e: usize,
    model: Model,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        d: Some(d),
        e: Some(e),
        u: Some(model.u()),
        ..Claim::default()
    };
    let lo = match model {
        Model::Classical => 0,
        Model::Threshold(u) => u,
    };
    let weights = lo..=d.min(g.n_left());
    limits.admit(pair_count(g.n_left(), &weights))?;
    let (supports, outcomes) = outcome_table(g, weights, model)?;

    let mut min = usize::MAX;
    let mut witness = None;
    let mut work = 0u128;
    for a in 0..supports.len() {
        for b in a + 1..supports.len() {
            work += 1;
            let dist = count_xor(&outcomes[a], &outcomes[b]);
            min = min.min(dist);
            if dist <= e && witness.is_none() {
                witness = Some(Witness::Pair {
                    x: supports[a].clone(),
                    x_prime: supports[b].clone(),
                });
            }
        }
    }
    Ok(PropertyReport {
        property: Property::Distance,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: (min != usize::MAX).then(|| Extremal::Count(min as i64 - 1)),
        work,
    })
}

/// One-sided outcome separation: for every ordered pair of distinct vectors
/// with weights in `weights` and `wgt(x) >= wgt(x')`, at least `bound` pools
/// are positive for `x` and negative for `x'`. The extremal value is the
/// smallest separation seen.
pub fn check_separation(
    g: &MeasurementGraph,
    weights: RangeInclusive<usize>,
    bound: usize,
    model: Model,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        d: Some(*weights.end()),
        e: Some(bound),
        u: Some(model.u()),
        min_critical: Some(*weights.start()),
        ..Claim::default()
    };
    limits.admit(pair_count(g.n_left(), &weights).saturating_mul(2))?;
    let (supports, outcomes) = outcome_table(g, weights, model)?;

    let mut min = usize::MAX;
    let mut witness = None;
    let mut work = 0u128;
    for a in 0..supports.len() {
        for b in 0..supports.len() {
            if a == b || supports[a].len() < supports[b].len() {
                continue;
            }
            work += 1;
            let sep = count_difference(&outcomes[a], &outcomes[b]);
            min = min.min(sep);
            if sep < bound && witness.is_none() {
                witness = Some(Witness::Pair {
                    x: supports[a].clone(),
                    x_prime: supports[b].clone(),
                });
            }
        }
    }
    Ok(PropertyReport {
        property: Property::Separation,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: (min != usize::MAX).then(|| Extremal::Count(min as i64)),
        work,
    })
}

/// Flip budget of an adversary: at most `e0` negatives turned positive, at
/// most `e1` positives turned negative, and at most `total` flips overall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipBudget {
    pub e0: usize,
    pub e1: usize,
    pub total: usize,
}

impl FlipBudget {
    /// Any mix of flips, `total` in all.
    pub fn total(total: usize) -> Self {
        Self {
            e0: total,
            e1: total,
            total,
        }
    }

    pub fn split(e0: usize, e1: usize) -> Self {
        Self {
            e0,
            e1,
            total: e0 + e1,
        }
    }
}

/// What a decoder must deliver for a noise search to pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryContract {
    Exact,
    /// Output contains the true support plus at most this many extra items.
    Superset {
        max_false_positives: usize,
    },
}

impl RecoveryContract {
    pub fn accepts(&self, truth: &[usize], decoded: &[usize]) -> bool {
        match *self {
            RecoveryContract::Exact => truth == decoded,
            RecoveryContract::Superset {
                max_false_positives,
            } => {
                truth.iter().all(|i| decoded.binary_search(i).is_ok())
                    && decoded.len() - truth.len() <= max_false_positives
            }
        }
    }
}

/// Runs `decoder` against every flip set within `budget` applied to the clean
/// outcome of `x`; holds iff the contract survives all of them.
pub fn worst_case_noise_search(
    g: &MeasurementGraph,
    x: &SparseVector,
    decoder: &dyn Decoder,
    budget: FlipBudget,
    contract: RecoveryContract,
    limits: &Limits,
) -> Result<PropertyReport> {
    let claim = Claim {
        e0: Some(budget.e0),
        e1: Some(budget.e1),
        e: Some(budget.total),
        u: Some(decoder.model().u()),
        ..Claim::default()
    };
    let clean = measure_model(g, x, decoder.model())?;
    let ones = clean.positives().to_vec();
    let zeros: Vec<usize> = (0..clean.len())
        .filter(|&r| !clean.is_positive(r))
        .collect();

    let splits: Vec<(usize, usize)> = (0..=budget.e0.min(zeros.len()))
        .flat_map(|a| {
            (0..=budget.e1.min(ones.len()))
                .filter(move |&b| a + b <= budget.total)
                .map(move |b| (a, b))
        })
        .collect();
    let needed = splits
        .iter()
        .map(|&(a, b)| binomial(zeros.len(), a).saturating_mul(binomial(ones.len(), b)))
        .fold(0u128, u128::saturating_add);
    limits.admit(needed)?;

    let mut witness = None;
    let mut work = 0u128;
    let mut flips = Vec::with_capacity(budget.total);
    'search: for &(a, b) in &splits {
        let mut up = Combinations::new(zeros.len(), a);
        while let Some(ui) = up.next() {
            let mut down = Combinations::new(ones.len(), b);
            while let Some(di) = down.next() {
                work += 1;
                flips.clear();
                flips.extend(ui.iter().map(|&j| zeros[j]));
                flips.extend(di.iter().map(|&j| ones[j]));
                let y: OutcomeVector = flip(&clean, &flips);
                let decoded = decoder.decode(g, &y)?;
                if !contract.accepts(x.support(), decoded.support()) {
                    flips.sort_unstable();
                    witness = Some(Witness::Flips {
                        flips: flips.clone(),
                        decoded: decoded.support().to_vec(),
                    });
                    break 'search;
                }
            }
        }
    }
    Ok(PropertyReport {
        property: Property::NoiseTolerance,
        claim,
        holds: witness.is_none(),
        witness,
        extremal: None,
        work,
    })
}
