//! Cross-method comparison of summary files.
//!
//! Takes two or more `*_summary.json` files produced by the run subcommands,
//! checks they describe the same physical parameters, and reports pairwise
//! relative deviations of the current and of the enhancement. Each method is
//! also flagged against its validity domain: the effective master equation
//! needs the overdamped cavity, the rate expansion additionally needs small
//! cooperativity, and the frequency solver is known to lose the enhancement
//! trend at very large cooperativity.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use fermicav_core::params::Regime;
use fermicav_core::{CoreError, SystemParams};

use crate::output::{ensure_dir, write_json};

/// The slice of a summary file the comparison needs; extra fields (spectra
/// metadata, populations) are ignored on read.
#[derive(Debug, Clone, Deserialize)]
pub struct SummaryInput {
    pub method: String,
    pub params: SystemParams,
    pub j: f64,
    pub delta_j: f64,
}

#[derive(Debug, Serialize)]
pub struct MethodEntry {
    pub method: String,
    pub j: f64,
    pub delta_j: f64,
    pub in_domain: bool,
    pub domain_note: String,
}

#[derive(Debug, Serialize)]
pub struct PairDeviation {
    pub a: String,
    pub b: String,
    /// |j_a - j_b| / max(|j_a|, |j_b|).
    pub dev_j: f64,
    /// Same for the enhancement delta_j.
    pub dev_delta_j: f64,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub params: SystemParams,
    pub methods: Vec<MethodEntry>,
    pub pairwise: Vec<PairDeviation>,
    pub max_dev_j: f64,
    pub max_dev_delta_j: f64,
}

pub fn load(paths: &[impl AsRef<Path>]) -> Result<Vec<SummaryInput>> {
    paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn compare(inputs: &[SummaryInput]) -> Result<Comparison> {
    let mut distinct: Vec<&str> = inputs.iter().map(|s| s.method.as_str()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(CoreError::ParameterMismatch(format!(
            "comparison needs at least two distinct methods, got {distinct:?}"
        ))
        .into());
    }
    let params = inputs[0].params;
    for s in &inputs[1..] {
        if s.params != params {
            return Err(CoreError::ParameterMismatch(format!(
                "method {} ran at different parameters than {}",
                s.method, inputs[0].method
            ))
            .into());
        }
    }

    let methods: Vec<MethodEntry> = inputs
        .iter()
        .map(|s| {
            let (in_domain, domain_note) = domain(&s.method, &params);
            MethodEntry {
                method: s.method.clone(),
                j: s.j,
                delta_j: s.delta_j,
                in_domain,
                domain_note,
            }
        })
        .collect();

    let mut pairwise = Vec::new();
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            pairwise.push(PairDeviation {
                a: inputs[i].method.clone(),
                b: inputs[j].method.clone(),
                dev_j: relative_deviation(inputs[i].j, inputs[j].j),
                dev_delta_j: relative_deviation(inputs[i].delta_j, inputs[j].delta_j),
            });
        }
    }
    let max_dev_j = pairwise.iter().map(|p| p.dev_j).fold(0.0, f64::max);
    let max_dev_delta_j = pairwise.iter().map(|p| p.dev_delta_j).fold(0.0, f64::max);

    Ok(Comparison {
        params,
        methods,
        pairwise,
        max_dev_j,
        max_dev_delta_j,
    })
}

/// Validity domain per method at the given parameters.
fn domain(method: &str, params: &SystemParams) -> (bool, String) {
    let d = params.derived();
    match method {
        "qme-eff" => {
            if d.regime == Regime::Dissipative {
                (true, "overdamped cavity: adiabatic elimination valid".into())
            } else {
                (
                    false,
                    format!(
                        "coherent regime (kappa = {:.3e} below the band width {:.3e}): \
                         the eliminated photon retains dynamics",
                        params.kappa, d.w2
                    ),
                )
            }
        }
        "rates" => {
            if d.regime != Regime::Dissipative {
                (false, "coherent regime: factorized rates inapplicable".into())
            } else if d.cooperativity > 0.3 {
                (
                    false,
                    format!(
                        "cooperativity {:.3} too large for the first-order expansion",
                        d.cooperativity
                    ),
                )
            } else {
                (true, "dissipative and perturbative".into())
            }
        }
        "ngf" => {
            if d.cooperativity > 100.0 {
                (
                    false,
                    "cooperativity above ~100: the bubble truncation loses the trend".into(),
                )
            } else {
                (true, "within the self-consistent truncation's range".into())
            }
        }
        _ => (true, "no domain restriction".into()),
    }
}

pub fn run(paths: &[impl AsRef<Path>], dir: &Path) -> Result<Comparison> {
    let inputs = load(paths)?;
    let report = compare(&inputs)?;
    ensure_dir(dir)?;
    write_json(&dir.join("comparison.json"), &json!(&report))?;
    Ok(report)
}
