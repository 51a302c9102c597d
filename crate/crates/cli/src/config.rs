//! Experiment configuration, stored as TOML with one section per concern.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use grouptest::constructions::{ExpanderSpec, RegularConstructionParams};
use grouptest::field::is_prime;
use grouptest::{Limits, Model};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    /// Sparsity of the simulated vectors and default `d` of the claims.
    pub d: usize,
    /// Threshold; 1 is the classical model.
    #[serde(default = "one")]
    pub u: usize,
    pub construction: Construction,
    #[serde(default, rename = "claim", skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<ClaimConfig>,
    #[serde(default)]
    pub simulation: Simulation,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
}

fn default_name() -> String {
    "run".into()
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construction {
    Identity {
        n: usize,
    },
    TrivialExpander {
        n: usize,
        t: usize,
    },
    /// Edge probability `prob`, or `1/(d+1)` when absent.
    Bernoulli {
        n: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prob: Option<f64>,
    },
    KautzSingleton {
        q: usize,
        msg_len: usize,
    },
    /// Uniform `t`-regular graph, one neighbor per group when `t | n_right`.
    RandomRegular {
        n_left: usize,
        n_right: usize,
        t: usize,
    },
    /// Random regular graph resampled until it is a `(k, ε)`-lossless
    /// expander.
    RandomExpander {
        n_left: usize,
        n_right: usize,
        t: usize,
        k: usize,
        epsilon: f64,
        #[serde(default = "default_attempts")]
        max_attempts: usize,
    },
    /// Regular graph for the threshold model built on a lossless expander.
    RegularGraph {
        u: usize,
        p: f64,
        k: usize,
        ingredient: Ingredient,
    },
}

fn default_attempts() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Ingredient {
    /// Private pools per item; lossless with `ε = 0`.
    Trivial { n: usize, t: usize },
    Random {
        n_left: usize,
        n_right: usize,
        t: usize,
        epsilon: f64,
        #[serde(default = "default_attempts")]
        max_attempts: usize,
    },
}

impl Construction {
    pub fn label(&self) -> &'static str {
        match self {
            Construction::Identity { .. } => "identity",
            Construction::TrivialExpander { .. } => "trivial_expander",
            Construction::Bernoulli { .. } => "bernoulli",
            Construction::KautzSingleton { .. } => "kautz_singleton",
            Construction::RandomRegular { .. } => "random_regular",
            Construction::RandomExpander { .. } => "random_expander",
            Construction::RegularGraph { .. } => "regular_graph",
        }
    }

    pub fn n_left(&self) -> usize {
        match *self {
            Construction::Identity { n } | Construction::TrivialExpander { n, .. } => n,
            Construction::Bernoulli { n, .. } => n,
            Construction::KautzSingleton { q, msg_len } => q.saturating_pow(msg_len as u32),
            Construction::RandomRegular { n_left, .. }
            | Construction::RandomExpander { n_left, .. } => n_left,
            Construction::RegularGraph { ref ingredient, .. } => match *ingredient {
                Ingredient::Trivial { n, .. } => n,
                Ingredient::Random { n_left, .. } => n_left,
            },
        }
    }
}

/// A property the experiment claims for its graph. Unset `d` and `u` fall
/// back to the experiment's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimConfig {
    pub property: PropertyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_critical: Option<usize>,
    /// Smallest vector weight compared by `separation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_weight: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKind {
    Disjunct,
    Expansion,
    Regular,
    ThresholdDisjunct,
    Extractor,
    Condenser,
    Distance,
    Separation,
}

impl ClaimConfig {
    pub fn new(property: PropertyKind) -> Self {
        Self {
            property,
            d: None,
            e: None,
            u: None,
            k: None,
            k_prime: None,
            epsilon: None,
            min_critical: None,
            min_weight: None,
        }
    }

    fn require<T: Copy>(&self, v: Option<T>, field: &str) -> Result<T> {
        v.with_context(|| format!("claim {:?} needs `{field}`", self.property))
    }

    pub fn e(&self) -> Result<usize> {
        self.require(self.e, "e")
    }

    pub fn k(&self) -> Result<usize> {
        self.require(self.k, "k")
    }

    pub fn k_prime(&self) -> Result<usize> {
        self.require(self.k_prime, "k_prime")
    }

    pub fn epsilon(&self) -> Result<f64> {
        let eps = self.require(self.epsilon, "epsilon")?;
        ensure!((0.0..=1.0).contains(&eps), "epsilon {eps} not in [0, 1]");
        Ok(eps)
    }

    fn validate(&self) -> Result<()> {
        use PropertyKind::*;
        match self.property {
            Disjunct | Distance | Separation | ThresholdDisjunct => {
                self.e()?;
            }
            Regular => {
                self.e()?;
            }
            Expansion | Extractor => {
                self.k()?;
                self.epsilon()?;
            }
            Condenser => {
                self.k()?;
                self.k_prime()?;
                self.epsilon()?;
            }
        }
        if let Some(0) = self.u {
            bail!("claim threshold u must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VectorSource {
    /// Every support of size `lo..=d` (`lo` = 0, or `u` for thresholds).
    #[default]
    Exhaustive,
    /// `count` seeded supports of size exactly `d`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    #[serde(default)]
    pub vectors: VectorSource,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    100
}

impl Default for Simulation {
    fn default() -> Self {
        Self {
            vectors: VectorSource::Exhaustive,
            count: default_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    #[default]
    None,
    /// `repeats` random patterns with exactly `e0` false positives and `e1`
    /// false negatives (fewer when the outcome has too few zeros or ones).
    Adversarial {
        e0: usize,
        e1: usize,
        #[serde(default = "one")]
        repeats: usize,
    },
    Stochastic {
        p0: f64,
        p1: f64,
        #[serde(default = "one")]
        repeats: usize,
    },
    /// Every flip set with at most `e0` up-flips, `e1` down-flips and
    /// `budget` flips in total.
    Exhaustive {
        budget: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        e0: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        e1: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    #[default]
    Trivial,
    NoisyTrivial,
    Threshold,
    Exhaustive,
    TwoStage,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Trivial => "trivial",
            DecoderKind::NoisyTrivial => "noisy_trivial",
            DecoderKind::Threshold => "threshold",
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::TwoStage => "two_stage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(default)]
    pub name: DecoderKind,
    /// Negative pools an item may have and still be declared positive.
    #[serde(default)]
    pub noise_threshold: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    /// Cap on enumerated cases per certifier, decoder or flip search.
    pub max_subsets: u64,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self {
            max_subsets: Limits::default().max_steps as u64,
        }
    }
}

impl LimitsConfig {
    pub fn limits(&self) -> Limits {
        Limits::new(self.max_subsets as u128)
    }
}

fn check_expander(spec: &ExpanderSpec) -> Result<()> {
    spec.validate().map_err(anyhow::Error::from)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).context("invalid experiment config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn model(&self) -> Result<Model> {
        Ok(Model::threshold(self.u)?)
    }

    /// Checks every parameter without building or simulating anything.
    pub fn validate(&self) -> Result<()> {
        let n = self.construction.n_left();
        ensure!(n >= 1, "construction has no items");
        ensure!(self.d <= n, "sparsity d = {} exceeds n = {n}", self.d);
        self.model()?;
        match self.construction {
            Construction::Identity { .. } => {}
            Construction::TrivialExpander { t, .. } => ensure!(t >= 1, "t must be positive"),
            Construction::Bernoulli { m, prob, .. } => {
                ensure!(m >= 1, "m must be positive");
                match prob {
                    Some(p) => ensure!((0.0..=1.0).contains(&p), "prob {p} not in [0, 1]"),
                    None => ensure!(
                        self.d >= 1 && self.d < n,
                        "default edge probability 1/(d+1) needs 1 <= d < n"
                    ),
                }
            }
            Construction::KautzSingleton { q, msg_len } => {
                ensure!(is_prime(q as u64), "field size {q} must be prime");
                ensure!(
                    (2..=q).contains(&msg_len),
                    "msg_len {msg_len} not in 2..={q}"
                );
            }
            Construction::RandomRegular { n_right, t, .. } => {
                ensure!(t >= 1 && t <= n_right, "degree {t} not in 1..={n_right}")
            }
            Construction::RandomExpander {
                n_left,
                n_right,
                t,
                k,
                epsilon,
                ..
            } => check_expander(&ExpanderSpec {
                k,
                epsilon,
                t,
                n_left,
                n_right,
            })?,
            Construction::RegularGraph {
                u,
                p,
                k,
                ref ingredient,
            } => {
                let expander = ingredient_spec(ingredient, k);
                RegularConstructionParams { u, p, k, expander }.validate()?;
            }
        }
        for c in &self.claims {
            c.validate()?;
        }
        if let NoiseConfig::Stochastic { p0, p1, .. } = self.noise {
            for p in [p0, p1] {
                ensure!(
                    (0.0..=1.0).contains(&p),
                    "flip probability {p} not in [0, 1]"
                );
            }
        }
        match self.decoder.name {
            DecoderKind::Trivial | DecoderKind::NoisyTrivial | DecoderKind::TwoStage => ensure!(
                self.u == 1,
                "decoder {:?} works in the classical model only",
                self.decoder.name
            ),
            DecoderKind::Threshold | DecoderKind::Exhaustive => {}
        }
        ensure!(self.limits.max_subsets > 0, "max_subsets must be positive");
        Ok(())
    }
}

/// Expander spec of a regular-graph ingredient at scale `k`.
pub fn ingredient_spec(ingredient: &Ingredient, k: usize) -> ExpanderSpec {
    match *ingredient {
        Ingredient::Trivial { n, t } => ExpanderSpec {
            k,
            epsilon: 0.0,
            t,
            n_left: n,
            n_right: n * t,
        },
        Ingredient::Random {
            n_left,
            n_right,
            t,
            epsilon,
            ..
        } => ExpanderSpec {
            k,
            epsilon,
            t,
            n_left,
            n_right,
        },
    }
}
