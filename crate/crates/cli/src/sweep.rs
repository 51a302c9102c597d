//! Many experiments, one summary table.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Construction, ExperimentConfig};
use crate::pipeline::{property_name, rows_to_csv, run_experiment, CheckOutcome, ExperimentResult};

pub const SWEEP_SCHEMA: &str = "gt-sweep-v1";

/// Sweep file: explicit config paths, and/or a base config expanded over
/// seeds and (for Bernoulli designs) pool counts. Paths are relative to the
/// sweep file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub configs: Vec<PathBuf>,
    #[serde(default)]
    pub base: Option<PathBuf>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub m_values: Vec<usize>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid sweep file {}", path.display()))
    }

    /// Expands into runnable configs, in file order. A config that fails to
    /// load becomes an error entry instead of aborting the sweep.
    pub fn expand(&self, root: &Path) -> Vec<(String, Result<ExperimentConfig>)> {
        let mut out: Vec<(String, Result<ExperimentConfig>)> = self
            .configs
            .iter()
            .map(|p| {
                (
                    p.display().to_string(),
                    ExperimentConfig::load(&root.join(p)),
                )
            })
            .collect();
        if let Some(base) = &self.base {
            match ExperimentConfig::load(&root.join(base)) {
                Ok(b) => out.extend(expand_base(&b, &self.seeds, &self.m_values)),
                Err(e) => out.push((base.display().to_string(), Err(e))),
            }
        }
        out
    }
}

/// Base config crossed with seeds and pool counts; an empty list keeps the
/// base value.
pub fn expand_base(
    base: &ExperimentConfig,
    seeds: &[u64],
    m_values: &[usize],
) -> Vec<(String, Result<ExperimentConfig>)> {
    let seeds = if seeds.is_empty() {
        vec![base.seed]
    } else {
        seeds.to_vec()
    };
    let ms: Vec<Option<usize>> = if m_values.is_empty() {
        vec![None]
    } else {
        m_values.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for &m in &ms {
        for &seed in &seeds {
            let mut c = base.clone();
            c.seed = seed;
            let mut label = format!("{}-s{seed}", base.name);
            let res = match (m, &mut c.construction) {
                (None, _) => Ok(()),
                (Some(v), Construction::Bernoulli { m, .. }) => {
                    *m = v;
                    label.push_str(&format!("-m{v}"));
                    Ok(())
                }
                (Some(_), other) => Err(anyhow::anyhow!(
                    "m_values needs a bernoulli construction, not {}",
                    other.label()
                )),
            };
            c.name = label.clone();
            out.push((label, res.map(|_| c)));
        }
    }
    out
}

/// One summary row per (run, claim); runs without claims or with errors
/// get a single row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryRow {
    pub schema: &'static str,
    pub run: String,
    pub seed: String,
    pub construction: String,
    pub n: String,
    pub m: String,
    pub property: String,
    pub d: String,
    pub e: String,
    pub holds: String,
    pub extremal: String,
    pub trials: String,
    pub successes: String,
    pub false_positives: String,
    pub error: String,
}

pub const SUMMARY_HEADER: [&str; 15] = [
    "schema",
    "run",
    "seed",
    "construction",
    "n",
    "m",
    "property",
    "d",
    "e",
    "holds",
    "extremal",
    "trials",
    "successes",
    "false_positives",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn summarize(label: &str, result: &Result<ExperimentResult>) -> Vec<SummaryRow> {
    let blank = SummaryRow {
        schema: SWEEP_SCHEMA,
        run: label.to_string(),
        seed: String::new(),
        construction: String::new(),
        n: String::new(),
        m: String::new(),
        property: String::new(),
        d: String::new(),
        e: String::new(),
        holds: String::new(),
        extremal: String::new(),
        trials: String::new(),
        successes: String::new(),
        false_positives: String::new(),
        error: String::new(),
    };
    let r = match result {
        Ok(r) => r,
        Err(e) => {
            return vec![SummaryRow {
                error: format!("{e:#}")
                    .split_whitespace()
                    .collect::<Vec<_>>()
                    .join(" "),
                ..blank
            }]
        }
    };
    let base = SummaryRow {
        seed: r.config.seed.to_string(),
        construction: r.config.construction.label().to_string(),
        n: r.built.graph.n_left().to_string(),
        m: r.built.graph.n_right().to_string(),
        trials: r.rows.len().to_string(),
        successes: r.successes().to_string(),
        false_positives: r
            .rows
            .iter()
            .map(|t| t.false_positives)
            .sum::<usize>()
            .to_string(),
        ..blank
    };
    if r.reports.is_empty() {
        return vec![base];
    }
    r.reports
        .iter()
        .map(|c| match c {
            CheckOutcome::Checked(rep) => SummaryRow {
                property: rep.property.name().to_string(),
                d: opt(rep.claim.d),
                e: opt(rep.claim.e),
                holds: rep.holds.to_string(),
                extremal: opt(rep.extremal),
                ..base.clone()
            },
            CheckOutcome::Skipped { property, reason } => SummaryRow {
                property: property_name(*property).to_string(),
                holds: "skipped-infeasible".into(),
                error: reason.split_whitespace().collect::<Vec<_>>().join(" "),
                ..base.clone()
            },
        })
        .collect()
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SummaryRow>,
    pub failed_claims: usize,
    pub errors: usize,
}

impl SweepOutcome {
    pub fn csv(&self) -> Result<String> {
        rows_to_csv(&self.rows, &SUMMARY_HEADER)
    }
}

/// Runs the configs in parallel; row order follows the input order.
pub fn sweep(configs: Vec<(String, Result<ExperimentConfig>)>) -> SweepOutcome {
    let results: Vec<(String, Result<ExperimentResult>)> = configs
        .into_par_iter()
        .map(|(label, c)| {
            let r = c.and_then(|c| run_experiment(&c));
            (label, r)
        })
        .collect();
    let failed_claims = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .map(ExperimentResult::failed_claims)
        .sum();
    let errors = results.iter().filter(|(_, r)| r.is_err()).count();
    SweepOutcome {
        rows: results.iter().flat_map(|(l, r)| summarize(l, r)).collect(),
        failed_claims,
        errors,
    }
}

pub fn sweep_file(path: &Path) -> Result<SweepOutcome> {
    let spec = SweepSpec::load(path)?;
    if spec.configs.is_empty() && spec.base.is_none() && !spec.m_values.is_empty() {
        bail!("m_values given without a base config");
    }
    let root = path.parent().unwrap_or(Path::new("."));
    Ok(sweep(spec.expand(root)))
}
