//! Measurement outcomes and noise channels.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::MeasurementGraph;

/// Binary vector of length `len`, stored by its support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVector {
    len: usize,
    support: Vec<usize>,
    bound: Option<usize>,
}

impl SparseVector {
    pub fn new(len: usize, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if let Some(&last) = support.last() {
            if last >= len {
                return Err(Error::Range {
                    side: "left",
                    index: last,
                    len,
                });
            }
        }
        Ok(Self {
            len,
            support,
            bound: None,
        })
    }

    pub fn zero(len: usize) -> Self {
        Self {
            len,
            support: Vec::new(),
            bound: None,
        }
    }

    /// Attaches a sparsity bound, failing if the support is already larger.
    pub fn with_bound(mut self, d: usize) -> Result<Self> {
        if self.support.len() > d {
            return Err(Error::Domain(format!(
                "support of size {} exceeds sparsity bound {d}",
                self.support.len()
            )));
        }
        self.bound = Some(d);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn bound(&self) -> Option<usize> {
        self.bound
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }
}

/// Outcome semantics of a pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Positive iff the pool holds at least one positive.
    Classical,
    /// Positive iff the pool holds at least `u >= 2` positives.
    Threshold(usize),
}

impl Model {
    /// Normalizes `u = 1` to [`Model::Classical`].
    pub fn threshold(u: usize) -> Result<Self> {
        match u {
            0 => Err(Error::Domain("threshold must be at least 1".into())),
            1 => Ok(Model::Classical),
            u => Ok(Model::Threshold(u)),
        }
    }

    pub fn u(self) -> usize {
        match self {
            Model::Classical => 1,
            Model::Threshold(u) => u,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Classical => f.write_str("classical"),
            Model::Threshold(u) => write!(f, "threshold:{u}"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 1,
            msg: format!("unknown model `{s}`"),
        };
        if s == "classical" {
            return Ok(Model::Classical);
        }
        let u = s
            .strip_prefix("threshold:")
            .and_then(|u| u.parse::<usize>().ok())
            .ok_or_else(bad)?;
        match Model::threshold(u)? {
            Model::Threshold(u) => Ok(Model::Threshold(u)),
            Model::Classical => Err(bad()),
        }
    }
}

/// Outcome of every pool of a measurement graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeVector {
    len: usize,
    positives: Vec<usize>,
    model: Model,
}

impl OutcomeVector {
    pub fn new(len: usize, mut positives: Vec<usize>, model: Model) -> Result<Self> {
        positives.sort_unstable();
        positives.dedup();
        if let Some(&last) = positives.last() {
            if last >= len {
                return Err(Error::Range {
                    side: "right",
                    index: last,
                    len,
                });
            }
        }
        Ok(Self {
            len,
            positives,
            model,
        })
    }

    pub fn from_bits(bits: &[bool], model: Model) -> Self {
        Self {
            len: bits.len(),
            positives: bits
                .iter()
                .enumerate()
                .filter_map(|(r, &b)| b.then_some(r))
                .collect(),
            model,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn positives(&self) -> &[usize] {
        &self.positives
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn is_positive(&self, r: usize) -> bool {
        self.positives.binary_search(&r).is_ok()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.len];
        for &r in &self.positives {
            bits[r] = true;
        }
        bits
    }

    /// Number of positions where the two outcomes differ.
    pub fn hamming(&self, other: &Self) -> usize {
        let (a, b) = (&self.positives, &other.positives);
        let common = count_common(a, b);
        a.len() + b.len() - 2 * common
    }

    /// `|supp(self) \ supp(other)|`
    pub fn difference_count(&self, other: &Self) -> usize {
        self.positives.len() - count_common(&self.positives, &other.positives)
    }
}

fn count_common(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// `<m> <model>` header line, then the outcome as a `0`/`1` string.
impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.len, self.model)?;
        let bits: String = self
            .to_bits()
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        writeln!(f, "{bits}")
    }
}

impl FromStr for OutcomeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |line, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = s.split('\n');
        let header = lines.next().unwrap_or_default();
        let (len, model) = header
            .split_once(' ')
            .ok_or_else(|| err(1, "expected `<m> <model>`"))?;
        let len: usize = len.parse().map_err(|_| err(1, "bad length"))?;
        let model: Model = model.parse()?;
        let body = lines.next().ok_or_else(|| err(2, "missing outcome bits"))?;
        if lines.next() != Some("") || lines.next().is_some() {
            return Err(err(3, "trailing content"));
        }
        if body.len() != len {
            return Err(err(2, "outcome length does not match header"));
        }
        let bits = body
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(err(2, "outcome bits must be 0 or 1")),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits, model))
    }
}

/// Number of positives of `x` in each pool.
fn pool_hits(g: &MeasurementGraph, x: &SparseVector) -> Result<Vec<usize>> {
    if x.len() != g.n_left() {
        return Err(Error::Shape(format!(
            "vector of length {} measured by a graph with {} items",
            x.len(),
            g.n_left()
        )));
    }
    let mut hits = vec![0usize; g.n_right()];
    for &i in x.support() {
        for &r in g.item(i) {
            hits[r] += 1;
        }
    }
    Ok(hits)
}

/// Classical outcome `G[x]`: a pool is positive iff it holds a positive.
pub fn measure(g: &MeasurementGraph, x: &SparseVector) -> Result<OutcomeVector> {
    threshold_measure(g, x, 1)
}

/// Threshold outcome `G_u[x]`: a pool is positive iff it holds at least `u`
/// positives.
pub fn threshold_measure(
    g: &MeasurementGraph,
    x: &SparseVector,
    u: usize,
) -> Result<OutcomeVector> {
    let model = Model::threshold(u)?;
    let hits = pool_hits(g, x)?;
    Ok(OutcomeVector {
        len: g.n_right(),
        positives: (0..g.n_right()).filter(|&r| hits[r] >= u).collect(),
        model,
    })
}

/// Outcome under a given model.
pub fn measure_model(
    g: &MeasurementGraph,
    x: &SparseVector,
    model: Model,
) -> Result<OutcomeVector> {
    threshold_measure(g, x, model.u())
}

/// Noise applied to an outcome vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    /// Flips exactly `min(e0, #negatives)` negatives and `min(e1, #positives)`
    /// positives, chosen uniformly with the seeded generator.
    Adversarial { e0: usize, e1: usize, seed: u64 },
    /// Flips each negative with probability `p0` and each positive with
    /// probability `p1`.
    Stochastic { p0: f64, p1: f64, seed: u64 },
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec::Adversarial {
            e0: 0,
            e1: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let NoiseSpec::Stochastic { p0, p1, .. } = *self {
            for p in [p0, p1] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(format!("flip probability {p} not in [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// A noisy outcome together with the flips actually applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Noisy {
    pub outcome: OutcomeVector,
    /// Negatives turned positive.
    pub false_positives: usize,
    /// Positives turned negative.
    pub false_negatives: usize,
}

pub fn apply_noise(y: &OutcomeVector, spec: &NoiseSpec) -> Result<Noisy> {
    spec.validate()?;
    let mut bits = y.to_bits();
    let negatives: Vec<usize> = (0..y.len).filter(|&r| !bits[r]).collect();
    let (fp, fneg) = match *spec {
        NoiseSpec::Adversarial { e0, e1, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e0 = e0.min(negatives.len());
            let e1 = e1.min(y.positives.len());
            for k in index::sample(&mut rng, negatives.len(), e0) {
                bits[negatives[k]] = true;
            }
            for k in index::sample(&mut rng, y.positives.len(), e1) {
                bits[y.positives[k]] = false;
            }
            (e0, e1)
        }
        NoiseSpec::Stochastic { p0, p1, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut fp, mut fneg) = (0, 0);
            for bit in bits.iter_mut() {
                if *bit {
                    if rng.gen_bool(p1) {
                        *bit = false;
                        fneg += 1;
                    }
                } else if rng.gen_bool(p0) {
                    *bit = true;
                    fp += 1;
                }
            }
            (fp, fneg)
        }
    };
    Ok(Noisy {
        outcome: OutcomeVector::from_bits(&bits, y.model),
        false_positives: fp,
        false_negatives: fneg,
    })
}

/// Flips the listed positions of `y`.
pub fn flip(y: &OutcomeVector, positions: &[usize]) -> OutcomeVector {
    let mut bits = y.to_bits();
    for &r in positions {
        bits[r] = !bits[r];
    }
    OutcomeVector::from_bits(&bits, y.model)
}
