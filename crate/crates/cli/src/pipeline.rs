//! build → certify → simulate → decode → report.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use grouptest::constructions::{
    bernoulli_design, expander_regular_graph, identity_design, kautz_singleton,
    random_bernoulli_design, random_lossless_expander, random_regular_graph, trivial_expander,
    Metadata, RegularConstructionParams,
};
use grouptest::decode::{
    exhaustive_decode, noisy_trivial_decode, threshold_decode, trivial_decode, DecodeParams,
};
use grouptest::simulate::{apply_noise, flip, measure_model};
use grouptest::subsets::{binomial, subsets_by_size, Combinations};
use grouptest::verify::{
    check_condenser, check_disjunct, check_expansion, check_extractor, check_regular,
    check_separation, check_threshold_disjunct, distance_check, Limits,
};
use grouptest::{
    Error, MeasurementGraph, Model, NoiseSpec, OutcomeVector, PropertyReport, SparseVector,
};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{
    ingredient_spec, ClaimConfig, Construction, DecoderKind, ExperimentConfig, Ingredient,
    NoiseConfig, PropertyKind, VectorSource,
};

/// Version tag in the first column of every results row.
pub const RESULTS_SCHEMA: &str = "gt-results-v1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Checked(PropertyReport),
    /// The certifier refused the enumeration size or graph shape.
    Skipped {
        property: PropertyKind,
        reason: String,
    },
}

impl CheckOutcome {
    pub fn failed(&self) -> bool {
        matches!(self, CheckOutcome::Checked(r) if !r.holds)
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckOutcome::Checked(r) => write!(f, "{r}"),
            CheckOutcome::Skipped { property, reason } => {
                writeln!(f, "property = {}", property_name(*property))?;
                writeln!(f, "status = skipped-infeasible")?;
                writeln!(f, "reason = {reason}")
            }
        }
    }
}

pub fn property_name(p: PropertyKind) -> &'static str {
    match p {
        PropertyKind::Disjunct => "disjunct",
        PropertyKind::Expansion => "expansion",
        PropertyKind::Regular => "regular",
        PropertyKind::ThresholdDisjunct => "threshold_disjunct",
        PropertyKind::Extractor => "extractor",
        PropertyKind::Condenser => "condenser",
        PropertyKind::Distance => "distance",
        PropertyKind::Separation => "separation",
    }
}

/// A built graph with its provenance and any certification done while
/// building it.
#[derive(Debug, Clone)]
pub struct Built {
    pub graph: MeasurementGraph,
    pub metadata: Metadata,
    pub reports: Vec<CheckOutcome>,
}

pub fn build(config: &ExperimentConfig) -> Result<Built> {
    let limits = config.limits.limits();
    let c = &config.construction;
    let mut meta = Metadata::new(c.label());
    meta.push("seed", config.seed);
    let mut reports = Vec::new();
    let graph = match *c {
        Construction::Identity { n } => {
            meta.push("n", n);
            identity_design(n)?
        }
        Construction::TrivialExpander { n, t } => {
            meta.push("n", n).push("t", t);
            trivial_expander(n, t)?
        }
        Construction::Bernoulli { n, m, prob } => {
            meta.push("n", n).push("m", m);
            match prob {
                Some(p) => {
                    meta.push("prob", p);
                    bernoulli_design(n, m, p, config.seed)?
                }
                None => {
                    meta.push("prob", format!("1/{}", config.d + 1));
                    random_bernoulli_design(n, m, config.d, config.seed)?
                }
            }
        }
        Construction::KautzSingleton { q, msg_len } => {
            meta.push("q", q).push("msg_len", msg_len);
            kautz_singleton(q, msg_len)?
        }
        Construction::RandomRegular { n_left, n_right, t } => {
            meta.push("n_left", n_left)
                .push("n_right", n_right)
                .push("t", t);
            random_regular_graph(n_left, n_right, t, config.seed)?
        }
        Construction::RandomExpander {
            n_left,
            n_right,
            t,
            k,
            epsilon,
            max_attempts,
        } => {
            let spec = grouptest::constructions::ExpanderSpec {
                k,
                epsilon,
                t,
                n_left,
                n_right,
            };
            let cert = random_lossless_expander(&spec, config.seed, max_attempts, &limits)?;
            meta.push("n_left", n_left)
                .push("n_right", n_right)
                .push("t", t)
                .push("k", k)
                .push("epsilon", epsilon)
                .push("attempt", cert.attempt);
            reports.push(CheckOutcome::Checked(cert.report));
            cert.graph
        }
        Construction::RegularGraph {
            u,
            p,
            k,
            ref ingredient,
        } => {
            let expander = ingredient_spec(ingredient, k);
            let base = match *ingredient {
                Ingredient::Trivial { n, t } => {
                    let g = trivial_expander(n, t)?;
                    reports.push(CheckOutcome::Checked(check_expansion(&g, k, 0.0, &limits)?));
                    g
                }
                Ingredient::Random { max_attempts, .. } => {
                    let cert =
                        random_lossless_expander(&expander, config.seed, max_attempts, &limits)?;
                    meta.push("ingredient_attempt", cert.attempt);
                    reports.push(CheckOutcome::Checked(cert.report));
                    cert.graph
                }
            };
            let params = RegularConstructionParams { u, p, k, expander };
            meta.push("u", u)
                .push("p", p)
                .push("k", k)
                .push("ingredient_t", expander.t)
                .push("ingredient_n_right", expander.n_right)
                .push("ingredient_epsilon", expander.epsilon)
                .push("right_degree", params.right_degree()?);
            expander_regular_graph(&params, &base)?
        }
    };
    meta.push("n_left", graph.n_left())
        .push("n_right", graph.n_right())
        .push(
            "left_degree",
            graph.left_degree().map_or("-".into(), |t| t.to_string()),
        )
        .push(
            "groups",
            graph.groups().map_or("-".into(), |t| t.to_string()),
        )
        .push("graph_sha256", sha256_hex(graph.to_string().as_bytes()));
    Ok(Built {
        graph,
        metadata: meta,
        reports,
    })
}

fn certify_one(
    g: &MeasurementGraph,
    claim: &ClaimConfig,
    config: &ExperimentConfig,
    limits: &Limits,
) -> Result<PropertyReport> {
    let d = claim.d.unwrap_or(config.d);
    let u = claim.u.unwrap_or(config.u);
    let model = Model::threshold(u)?;
    Ok(match claim.property {
        PropertyKind::Disjunct => check_disjunct(g, d, claim.e()?, limits)?,
        PropertyKind::Expansion => check_expansion(g, claim.k()?, claim.epsilon()?, limits)?,
        PropertyKind::Regular => {
            check_regular(g, d, claim.e()?, u, claim.min_critical.unwrap_or(1), limits)?
        }
        PropertyKind::ThresholdDisjunct => check_threshold_disjunct(g, d, claim.e()?, u, limits)?,
        PropertyKind::Extractor => check_extractor(g, claim.k()?, claim.epsilon()?, limits)?,
        PropertyKind::Condenser => {
            check_condenser(g, claim.k()?, claim.k_prime()?, claim.epsilon()?, limits)?
        }
        PropertyKind::Distance => distance_check(g, d, claim.e()?, model, limits)?,
        PropertyKind::Separation => check_separation(
            g,
            claim.min_weight.unwrap_or(0)..=d,
            claim.e()?,
            model,
            limits,
        )?,
    })
}

/// Runs every claim; oversized or unsupported enumerations are skipped.
pub fn certify(g: &MeasurementGraph, config: &ExperimentConfig) -> Result<Vec<CheckOutcome>> {
    let limits = config.limits.limits();
    config
        .claims
        .iter()
        .map(|claim| match certify_one(g, claim, config, &limits) {
            Ok(r) => Ok(CheckOutcome::Checked(r)),
            Err(e) => match e.downcast_ref::<Error>() {
                Some(err @ (Error::Infeasible { .. } | Error::Unsupported(_))) => {
                    Ok(CheckOutcome::Skipped {
                        property: claim.property,
                        reason: err.to_string(),
                    })
                }
                _ => Err(e),
            },
        })
        .collect()
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRow {
    pub schema: &'static str,
    pub run: String,
    pub seed: u64,
    pub trial: usize,
    pub m: usize,
    pub x_weight: usize,
    pub x_support: String,
    /// Negatives turned positive.
    pub e0: usize,
    /// Positives turned negative.
    pub e1: usize,
    pub flips: String,
    pub decoded: String,
    pub success: bool,
    /// Items wrongly declared positive.
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Individual tests in the confirmation stage (two-stage decoder only).
    pub stage2_tests: usize,
}

fn join(v: &[usize]) -> String {
    v.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn vectors(
    g: &MeasurementGraph,
    config: &ExperimentConfig,
    limits: &Limits,
) -> Result<Vec<Vec<usize>>> {
    let n = g.n_left();
    let d = config.d.min(n);
    match config.simulation.vectors {
        VectorSource::Exhaustive => {
            let lo = if config.u > 1 { config.u.min(d) } else { 0 };
            let count = (lo..=d)
                .map(|w| binomial(n, w))
                .fold(0u128, u128::saturating_add);
            limits.admit(count)?;
            Ok(subsets_by_size(n, lo, d))
        }
        VectorSource::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(1);
            Ok((0..config.simulation.count)
                .map(|_| {
                    let mut s = index::sample(&mut rng, n, d).into_vec();
                    s.sort_unstable();
                    s
                })
                .collect())
        }
    }
}

/// Noisy variants of `y`, as flip position lists.
fn noise_patterns(
    y: &OutcomeVector,
    noise: &NoiseConfig,
    rng: &mut ChaCha8Rng,
    limits: &Limits,
) -> Result<Vec<Vec<usize>>> {
    Ok(match *noise {
        NoiseConfig::None => vec![Vec::new()],
        NoiseConfig::Adversarial { e0, e1, repeats } => (0..repeats)
            .map(|_| {
                let spec = NoiseSpec::Adversarial {
                    e0,
                    e1,
                    seed: rng.gen(),
                };
                apply_noise(y, &spec).map(|n| diff(y, &n.outcome))
            })
            .collect::<grouptest::Result<_>>()?,
        NoiseConfig::Stochastic { p0, p1, repeats } => (0..repeats)
            .map(|_| {
                let spec = NoiseSpec::Stochastic {
                    p0,
                    p1,
                    seed: rng.gen(),
                };
                apply_noise(y, &spec).map(|n| diff(y, &n.outcome))
            })
            .collect::<grouptest::Result<_>>()?,
        NoiseConfig::Exhaustive { budget, e0, e1 } => {
            let ones = y.positives().to_vec();
            let zeros: Vec<usize> = (0..y.len()).filter(|&r| !y.is_positive(r)).collect();
            let (e0, e1) = (e0.unwrap_or(budget), e1.unwrap_or(budget));
            let splits: Vec<(usize, usize)> = (0..=e0.min(zeros.len()))
                .flat_map(|a| {
                    (0..=e1.min(ones.len()))
                        .filter(move |&b| a + b <= budget)
                        .map(move |b| (a, b))
                })
                .collect();
            let count = splits
                .iter()
                .map(|&(a, b)| binomial(zeros.len(), a).saturating_mul(binomial(ones.len(), b)))
                .fold(0u128, u128::saturating_add);
            limits.admit(count)?;
            let mut out = Vec::new();
            for (a, b) in splits {
                let mut up = Combinations::new(zeros.len(), a);
                while let Some(ui) = up.next() {
                    let mut down = Combinations::new(ones.len(), b);
                    while let Some(di) = down.next() {
                        let mut f: Vec<usize> = ui
                            .iter()
                            .map(|&j| zeros[j])
                            .chain(di.iter().map(|&j| ones[j]))
                            .collect();
                        f.sort_unstable();
                        out.push(f);
                    }
                }
            }
            out
        }
    })
}

fn diff(a: &OutcomeVector, b: &OutcomeVector) -> Vec<usize> {
    (0..a.len())
        .filter(|&r| a.is_positive(r) != b.is_positive(r))
        .collect()
}

/// Decoded support and confirmation-stage test count.
fn run_decoder(
    g: &MeasurementGraph,
    y: &OutcomeVector,
    config: &ExperimentConfig,
    limits: &Limits,
) -> Result<Option<(Vec<usize>, usize)>> {
    let params = DecodeParams {
        noise_threshold: config.decoder.noise_threshold,
        model: y.model(),
    };
    let out = match config.decoder.name {
        DecoderKind::Trivial => trivial_decode(g, y),
        DecoderKind::NoisyTrivial => noisy_trivial_decode(g, y, &params),
        DecoderKind::Threshold => threshold_decode(g, y, config.u, &params),
        DecoderKind::Exhaustive => exhaustive_decode(g, y, config.d, limits),
        DecoderKind::TwoStage => {
            // confirmation tests are noiseless, so only the candidates matter
            let candidates = noisy_trivial_decode(g, y, &params)?;
            return Ok(Some((candidates.support().to_vec(), candidates.weight())));
        }
    };
    match out {
        Ok(v) => Ok(Some((v.support().to_vec(), 0))),
        Err(Error::Tie { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Every (vector, noise pattern) trial of the experiment.
pub fn simulate(g: &MeasurementGraph, config: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    let limits = config.limits.limits();
    let model = config.model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);
    let mut rows = Vec::new();
    for support in vectors(g, config, &limits)? {
        let x = SparseVector::new(g.n_left(), support)?;
        let clean = measure_model(g, &x, model)?;
        for flips in noise_patterns(&clean, &config.noise, &mut rng, &limits)? {
            let y = flip(&clean, &flips);
            let e0 = flips.iter().filter(|&&r| !clean.is_positive(r)).count();
            let decoded = run_decoder(g, &y, config, &limits)?;
            let row = match decoded {
                Some((support, stage2)) => {
                    let fp = support.iter().filter(|&&i| !x.contains(i)).count();
                    let fneg = x
                        .support()
                        .iter()
                        .filter(|i| support.binary_search(i).is_err())
                        .count();
                    let success = if config.decoder.name == DecoderKind::TwoStage {
                        fneg == 0
                    } else {
                        fp == 0 && fneg == 0
                    };
                    (join(&support), success, fp, fneg, stage2)
                }
                None => ("tie".to_string(), false, 0, 0, 0),
            };
            rows.push(TrialRow {
                schema: RESULTS_SCHEMA,
                run: config.name.clone(),
                seed: config.seed,
                trial: rows.len(),
                m: g.n_right(),
                x_weight: x.weight(),
                x_support: join(x.support()),
                e0,
                e1: flips.len() - e0,
                flips: join(&flips),
                decoded: row.0,
                success: row.1,
                false_positives: row.2,
                false_negatives: row.3,
                stage2_tests: row.4,
            });
        }
    }
    Ok(rows)
}

pub fn rows_to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().context("flushing csv")?)?)
}

pub const RESULTS_HEADER: [&str; 15] = [
    "schema",
    "run",
    "seed",
    "trial",
    "m",
    "x_weight",
    "x_support",
    "e0",
    "e1",
    "flips",
    "decoded",
    "success",
    "false_positives",
    "false_negatives",
    "stage2_tests",
];

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub built: Built,
    pub reports: Vec<CheckOutcome>,
    pub rows: Vec<TrialRow>,
}

impl ExperimentResult {
    pub fn failed_claims(&self) -> usize {
        self.reports.iter().filter(|r| r.failed()).count()
    }

    pub fn successes(&self) -> usize {
        self.rows.iter().filter(|r| r.success).count()
    }

    pub fn graph_text(&self) -> String {
        self.built.graph.to_string()
    }

    pub fn reports_text(&self) -> String {
        self.reports
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn results_csv(&self) -> Result<String> {
        rows_to_csv(&self.rows, &RESULTS_HEADER)
    }

    /// Writes `graph.gt1`, `graph.meta`, `reports.kv` and `results.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("graph.gt1"), self.graph_text())?;
        fs::write(dir.join("graph.meta"), self.built.metadata.to_string())?;
        fs::write(dir.join("reports.kv"), self.reports_text())?;
        fs::write(dir.join("results.csv"), self.results_csv()?)?;
        Ok(())
    }
}

/// Full pipeline. Construction-time certificates come first in the report
/// list, followed by the configured claims.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let built = build(config)?;
    let mut reports = built.reports.clone();
    reports.extend(certify(&built.graph, config)?);
    let rows = simulate(&built.graph, config)?;
    Ok(ExperimentResult {
        config: config.clone(),
        built,
        reports,
        rows,
    })
}

/// One row per check, for `--format csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub schema: &'static str,
    pub property: String,
    pub status: &'static str,
    pub d: String,
    pub e: String,
    pub u: String,
    pub k: String,
    pub k_prime: String,
    pub epsilon: String,
    pub min_critical: String,
    pub holds: String,
    pub extremal: String,
    pub witness: String,
    pub work: String,
}

pub const REPORTS_SCHEMA: &str = "gt-reports-v1";

pub const REPORTS_HEADER: [&str; 14] = [
    "schema",
    "property",
    "status",
    "d",
    "e",
    "u",
    "k",
    "k_prime",
    "epsilon",
    "min_critical",
    "holds",
    "extremal",
    "witness",
    "work",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn reports_csv(reports: &[CheckOutcome]) -> Result<String> {
    let rows: Vec<ReportRow> = reports
        .iter()
        .map(|c| match c {
            CheckOutcome::Checked(r) => ReportRow {
                schema: REPORTS_SCHEMA,
                property: r.property.name().to_string(),
                status: "checked",
                d: cell(r.claim.d),
                e: cell(r.claim.e),
                u: cell(r.claim.u),
                k: cell(r.claim.k),
                k_prime: cell(r.claim.k_prime),
                epsilon: cell(r.claim.epsilon),
                min_critical: cell(r.claim.min_critical),
                holds: r.holds.to_string(),
                extremal: cell(r.extremal),
                witness: cell(r.witness.as_ref()),
                work: r.work.to_string(),
            },
            CheckOutcome::Skipped { property, .. } => ReportRow {
                schema: REPORTS_SCHEMA,
                property: property_name(*property).to_string(),
                status: "skipped-infeasible",
                d: String::new(),
                e: String::new(),
                u: String::new(),
                k: String::new(),
                k_prime: String::new(),
                epsilon: String::new(),
                min_critical: String::new(),
                holds: String::new(),
                extremal: String::new(),
                witness: String::new(),
                work: String::new(),
            },
        })
        .collect();
    rows_to_csv(&rows, &REPORTS_HEADER)
}

/// Machine-readable record of a single decode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeRecord {
    pub decoder: String,
    pub model: String,
    pub graph_sha256: String,
    pub outcome_sha256: String,
    pub support: Vec<usize>,
    /// Tied minimizers, when the exhaustive decoder cannot choose.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<Vec<usize>>,
}

pub fn decode_record(
    g: &MeasurementGraph,
    y: &OutcomeVector,
    decoder: DecoderKind,
    noise_threshold: usize,
    d: usize,
    limits: &Limits,
) -> Result<DecodeRecord> {
    let params = DecodeParams {
        noise_threshold,
        model: y.model(),
    };
    let result = match decoder {
        DecoderKind::Trivial => trivial_decode(g, y),
        DecoderKind::NoisyTrivial | DecoderKind::TwoStage => noisy_trivial_decode(g, y, &params),
        DecoderKind::Threshold => threshold_decode(g, y, y.model().u(), &params),
        DecoderKind::Exhaustive => exhaustive_decode(g, y, d, limits),
    };
    let (support, ties) = match result {
        Ok(x) => (x.support().to_vec(), Vec::new()),
        Err(Error::Tie { candidates, .. }) => (Vec::new(), candidates),
        Err(e) => bail!(e),
    };
    Ok(DecodeRecord {
        decoder: decoder.name().to_string(),
        model: y.model().to_string(),
        graph_sha256: sha256_hex(g.to_string().as_bytes()),
        outcome_sha256: sha256_hex(y.to_string().as_bytes()),
        support,
        ties,
    })
}
