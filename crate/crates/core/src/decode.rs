//! Decoders: the containment ("trivial") decoder, its mismatch-tolerant
//! variant, the threshold-model analog, an exhaustive minimum-distance
//! reference decoder and the two-stage scheme.

use crate::error::{Error, Result};
use crate::graph::MeasurementGraph;
use crate::simulate::{
    apply_noise, measure, measure_model, Model, NoiseSpec, OutcomeVector, SparseVector,
};
use crate::subsets::{binomial, Combinations};
use crate::verify::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeParams {
    /// Pools of an item allowed to read negative before the item is dropped.
    pub noise_threshold: usize,
    pub model: Model,
}

impl DecodeParams {
    pub fn classical(noise_threshold: usize) -> Self {
        Self {
            noise_threshold,
            model: Model::Classical,
        }
    }

    /// Threshold for a `(d, e)`-disjunct graph: `⌊e/2⌋`.
    pub fn for_tolerance(e: usize) -> Self {
        Self::classical(e / 2)
    }
}

/// Common interface used by the noise-search harness.
pub trait Decoder {
    fn name(&self) -> &str;
    /// Outcome model the decoder expects.
    fn model(&self) -> Model;
    fn decode(&self, g: &MeasurementGraph, y: &OutcomeVector) -> Result<SparseVector>;
}

fn check_shape(g: &MeasurementGraph, y: &OutcomeVector) -> Result<()> {
    if y.len() != g.n_right() {
        return Err(Error::Shape(format!(
            "outcome of length {} for a graph with {} pools",
            y.len(),
            g.n_right()
        )));
    }
    Ok(())
}

fn check_model(y: &OutcomeVector, model: Model) -> Result<()> {
    if y.model() != model {
        return Err(Error::Shape(format!(
            "decoder expects {model} outcomes, got {}",
            y.model()
        )));
    }
    Ok(())
}

/// Number of pools of each item that read negative.
pub fn mismatches(g: &MeasurementGraph, y: &OutcomeVector) -> Result<Vec<usize>> {
    check_shape(g, y)?;
    let bits = y.to_bits();
    Ok(g.items()
        .iter()
        .map(|pools| pools.iter().filter(|&&r| !bits[r]).count())
        .collect())
}

fn containment(g: &MeasurementGraph, y: &OutcomeVector, allowance: usize) -> Result<SparseVector> {
    let support = mismatches(g, y)?
        .into_iter()
        .enumerate()
        .filter_map(|(i, miss)| (miss <= allowance).then_some(i))
        .collect();
    SparseVector::new(g.n_left(), support)
}

/// Declares item `i` positive iff all of its pools are positive.
pub fn trivial_decode(g: &MeasurementGraph, y: &OutcomeVector) -> Result<SparseVector> {
    check_model(y, Model::Classical)?;
    containment(g, y, 0)
}

/// Declares item `i` positive iff at most `noise_threshold` of its pools are
/// negative.
pub fn noisy_trivial_decode(
    g: &MeasurementGraph,
    y: &OutcomeVector,
    params: &DecodeParams,
) -> Result<SparseVector> {
    check_model(y, Model::Classical)?;
    containment(g, y, params.noise_threshold)
}

/// Containment rule applied to threshold outcomes. This is a heuristic; the
/// reference is [`exhaustive_decode`].
pub fn threshold_decode(
    g: &MeasurementGraph,
    y: &OutcomeVector,
    u: usize,
    params: &DecodeParams,
) -> Result<SparseVector> {
    check_model(y, Model::threshold(u)?)?;
    containment(g, y, params.noise_threshold)
}

/// Minimum-distance decoding by enumerating every candidate support of size
/// `u..=d` (`0..=d` in the classical model). Ties are reported as
/// [`Error::Tie`] with all minimizers in lexicographic order.
pub fn exhaustive_decode(
    g: &MeasurementGraph,
    y: &OutcomeVector,
    d: usize,
    limits: &Limits,
) -> Result<SparseVector> {
    check_shape(g, y)?;
    let model = y.model();
    let lo = match model {
        Model::Classical => 0,
        Model::Threshold(u) => u,
    };
    let n = g.n_left();
    let needed = (lo..=d.min(n))
        .map(|w| binomial(n, w))
        .fold(0u128, u128::saturating_add);
    limits.admit(needed)?;

    let mut best = usize::MAX;
    let mut minimizers: Vec<Vec<usize>> = Vec::new();
    for w in lo..=d.min(n) {
        let mut comb = Combinations::new(n, w);
        while let Some(s) = comb.next() {
            let x = SparseVector::new(n, s.to_vec())?;
            let dist = measure_model(g, &x, model)?.hamming(y);
            if dist < best {
                best = dist;
                minimizers.clear();
            }
            if dist == best {
                minimizers.push(s.to_vec());
            }
        }
    }
    match minimizers.len() {
        0 => Err(Error::Domain("no candidate supports in range".into())),
        1 => SparseVector::new(n, minimizers.pop().unwrap_or_default()),
        _ => {
            minimizers.sort();
            Err(Error::Tie {
                distance: best,
                candidates: minimizers,
            })
        }
    }
}

/// Result of a two-stage scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStage {
    pub recovered: SparseVector,
    /// Candidates from the non-adaptive stage.
    pub candidates: SparseVector,
    /// Individual tests spent in the second stage.
    pub stage2_tests: usize,
}

/// Non-adaptive stage with [`noisy_trivial_decode`] (optionally on a noisy
/// outcome), then one noiseless individual test per candidate.
pub fn two_stage(
    g: &MeasurementGraph,
    x_true: &SparseVector,
    params: &DecodeParams,
    noise: Option<&NoiseSpec>,
) -> Result<TwoStage> {
    let mut y = measure(g, x_true)?;
    if let Some(spec) = noise {
        y = apply_noise(&y, spec)?.outcome;
    }
    let candidates = noisy_trivial_decode(g, &y, params)?;
    let confirmed = candidates
        .support()
        .iter()
        .copied()
        .filter(|&i| x_true.contains(i))
        .collect();
    Ok(TwoStage {
        recovered: SparseVector::new(g.n_left(), confirmed)?,
        stage2_tests: candidates.weight(),
        candidates,
    })
}

pub struct TrivialDecoder;

impl Decoder for TrivialDecoder {
    fn name(&self) -> &str {
        "trivial"
    }

    fn model(&self) -> Model {
        Model::Classical
    }

    fn decode(&self, g: &MeasurementGraph, y: &OutcomeVector) -> Result<SparseVector> {
        trivial_decode(g, y)
    }
}

pub struct NoisyTrivialDecoder(pub DecodeParams);

impl Decoder for NoisyTrivialDecoder {
    fn name(&self) -> &str {
        "noisy_trivial"
    }

    fn model(&self) -> Model {
        Model::Classical
    }

    fn decode(&self, g: &MeasurementGraph, y: &OutcomeVector) -> Result<SparseVector> {
        noisy_trivial_decode(g, y, &self.0)
    }
}

pub struct ThresholdDecoder {
    pub u: usize,
    pub params: DecodeParams,
}

impl Decoder for ThresholdDecoder {
    fn name(&self) -> &str {
        "threshold"
    }

    fn model(&self) -> Model {
        Model::threshold(self.u).unwrap_or(Model::Classical)
    }

    fn decode(&self, g: &MeasurementGraph, y: &OutcomeVector) -> Result<SparseVector> {
        threshold_decode(g, y, self.u, &self.params)
    }
}

pub struct ExhaustiveDecoder {
    pub d: usize,
    pub model: Model,
    pub limits: Limits,
}

impl Decoder for ExhaustiveDecoder {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn model(&self) -> Model {
        self.model
    }

    fn decode(&self, g: &MeasurementGraph, y: &OutcomeVector) -> Result<SparseVector> {
        exhaustive_decode(g, y, self.d, &self.limits)
    }
}
