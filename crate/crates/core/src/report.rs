//! Serializable run artifacts: a schema-versioned JSON report for single
//! realizations and CSV emission for Monte Carlo trial records.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::BaselineResult;
use crate::datagen::TrialRecord;
use crate::mepsolve::{CriticalPoint, RealizationResult};
use crate::optimality::FoncResidual;
use num_complex::Complex64;

/// Current JSON schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Complex number in the report serialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n_samples: usize,
    pub order: usize,
    pub n_fixed: usize,
    pub fixed_poles: Vec<Cplx>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoncReport {
    pub r_b: f64,
    pub r_yhat: f64,
    pub r_lambda: f64,
    pub r_mu: f64,
}

impl From<&FoncResidual> for FoncReport {
    fn from(f: &FoncResidual) -> Self {
        Self { r_b: f.r_b, r_yhat: f.r_yhat, r_lambda: f.r_lambda, r_mu: f.r_mu }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateReport {
    pub poles: Vec<Cplx>,
    /// Combined model coefficients, constant term first.
    pub model_coeffs: Vec<f64>,
    pub misfit_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fonc: Option<FoncReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hankel_rank: Option<usize>,
}

impl From<&CriticalPoint> for CandidateReport {
    fn from(cp: &CriticalPoint) -> Self {
        Self {
            poles: cp.poles.iter().map(|p| (*p).into()).collect(),
            model_coeffs: cp.a.coeffs().to_vec(),
            misfit_sq: cp.misfit_sq,
            fonc: Some((&cp.fonc).into()),
            hankel_rank: Some(cp.hankel_rank),
        }
    }
}

/// Top-level artifact of a single `realize` invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool_version: String,
    /// SHA-256 of the input data bytes.
    pub input_digest: String,
    pub problem: ProblemSpec,
    pub method: String,
    pub global: CandidateReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_affine: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_real: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Wall-clock solve time; omitted unless timings are requested so that
    /// repeated runs are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_time_s: Option<f64>,
}

impl RunReport {
    pub fn from_realization(
        input: &[u8],
        problem: ProblemSpec,
        res: &RealizationResult,
        all_candidates: bool,
    ) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: sha256_hex(input),
            problem,
            method: "gor".to_string(),
            global: res.global_candidate().into(),
            candidates: if all_candidates {
                res.candidates.iter().map(Into::into).collect()
            } else {
                Vec::new()
            },
            n_affine: Some(res.n_affine),
            n_real: Some(res.n_real),
            warnings: res.warnings.clone(),
            solve_time_s: None,
        }
    }

    pub fn from_baseline(input: &[u8], problem: ProblemSpec, res: &BaselineResult) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: sha256_hex(input),
            problem,
            method: res.method.name().to_string(),
            global: CandidateReport {
                poles: res.estimated_poles.iter().map(|p| (*p).into()).collect(),
                model_coeffs: res.combined_model.coeffs().to_vec(),
                misfit_sq: res.misfit_sq,
                fonc: None,
                hankel_rank: None,
            },
            candidates: Vec::new(),
            n_affine: None,
            n_real: None,
            warnings: Vec::new(),
            solve_time_s: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Candidate table as CSV (global first).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate,misfit_sq,poles,model_coeffs\n");
        let rows: Vec<&CandidateReport> = if self.candidates.is_empty() {
            vec![&self.global]
        } else {
            self.candidates.iter().collect()
        };
        for (i, c) in rows.iter().enumerate() {
            out.push_str(&format!(
                "{i},{},{},{}\n",
                c.misfit_sq,
                format_poles(&c.poles),
                c.model_coeffs
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ));
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn format_poles(poles: &[Cplx]) -> String {
    poles
        .iter()
        .map(|p| {
            if p.im == 0.0 {
                p.re.to_string()
            } else if p.im > 0.0 {
                format!("{}+{}i", p.re, p.im)
            } else {
                format!("{}-{}i", p.re, -p.im)
            }
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Monte Carlo CSV header.
pub const TRIAL_CSV_HEADER: &str = "sigma,trial,method,misfit_sq,true_err_sq,poles,wall_time_s";

/// One CSV row per trial record. Wall time is reported as 0 unless timings
/// are requested, keeping reruns byte-identical.
pub fn trials_to_csv(records: &[TrialRecord], with_timings: bool) -> String {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for r in records {
        let poles: Vec<Cplx> = r.poles.iter().map(|p| (*p).into()).collect();
        let wall = if with_timings { r.wall_time } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.sigma,
            r.trial,
            r.method.name(),
            r.misfit_sq,
            r.true_err_sq,
            if let Some(e) = &r.error {
                format!("error:{}", e.replace([',', '\n'], ";"))
            } else {
                format_poles(&poles)
            },
            wall,
        ));
    }
    out
}

/// Per-noise-level five-number summaries of both metrics for both methods.
pub fn summary_csv(records: &[TrialRecord]) -> String {
    use crate::datagen::McMethod;
    let mut out =
        String::from("sigma,method,metric,min,q1,median,q3,max,n_ok,n_failed\n");
    let mut sigmas: Vec<(usize, f64)> =
        records.iter().map(|r| (r.sigma_index, r.sigma)).collect();
    sigmas.sort_by(|a, b| a.0.cmp(&b.0));
    sigmas.dedup();
    for (si, sigma) in sigmas {
        for method in [McMethod::Sgor, McMethod::Fpgor] {
            for (metric, pick) in [
                ("misfit_sq", 0usize),
                ("true_err_sq", 1usize),
            ] {
                let mut vals: Vec<f64> = Vec::new();
                let mut failed = 0usize;
                for r in records.iter().filter(|r| r.sigma_index == si && r.method == method) {
                    if r.error.is_some() {
                        failed += 1;
                        continue;
                    }
                    vals.push(if pick == 0 { r.misfit_sq } else { r.true_err_sq });
                }
                vals.sort_by(f64::total_cmp);
                let q = |p: f64| -> f64 {
                    if vals.is_empty() {
                        return f64::NAN;
                    }
                    let idx = p * (vals.len() - 1) as f64;
                    let lo = idx.floor() as usize;
                    let hi = idx.ceil() as usize;
                    let frac = idx - lo as f64;
                    vals[lo] + frac * (vals[hi] - vals[lo])
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    sigma,
                    method.name(),
                    metric,
                    q(0.0),
                    q(0.25),
                    q(0.5),
                    q(0.75),
                    q(1.0),
                    vals.len(),
                    failed,
                ));
            }
        }
    }
    out
}
