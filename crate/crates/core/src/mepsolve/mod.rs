//! Construction and solution of the rectangular multiparameter eigenvalue
//! problem whose affine eigenvalues are the critical points of the fixed-pole
//! least-squares realization problem.
//!
//! The matrix polynomial is `A(b) = [T(a) y , T(a) T(a)^T T(b)^T]` with
//! `a = c * b` and `b_0 = 1` eliminated, a cubic polynomial in the unknown
//! coefficients `b_1 ... b_q`. For `q = 1` it is square and solved by
//! companion linearization; for `q >= 2` a block Macaulay iteration recovers
//! the affine eigenvalue tuples from the null space.

pub mod macaulay;
pub mod matpoly;
pub mod univariate;

use ndarray::{Array1, Array2};
use ndarray_linalg::LeastSquaresSvd;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::optimality::{
    estimate_multiplier, filtered_hankel_rank, fonc_residuals, project_misfit, FoncResidual,
};
use crate::signalmodel::{poly_from_roots, poly_mul, toeplitz, FixedPoleSet, ModelPoly, Signal};

pub use matpoly::MatrixPolynomial;

/// Realness tolerance for eigenvalue components: `|Im| <= 1e-8 (1 + |Re|)`.
const REALNESS_TOL: f64 = 1e-8;
/// Candidates closer than this in infinity norm are merged.
const DEDUP_TOL: f64 = 1e-6;
/// Default block Macaulay degree cap.
const DEFAULT_MAX_MACAULAY_DEGREE: usize = 36;

/// One candidate solution of the realization problem.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    /// Unknown factor `b(z)` with `b_0 = 1`.
    pub b: ModelPoly,
    /// Combined model `a = b * c`.
    pub a: ModelPoly,
    /// Roots of the combined model.
    pub poles: Vec<Complex64>,
    /// Model-compliant data for this candidate.
    pub yhat: Signal,
    pub misfit_sq: f64,
    pub fonc: FoncResidual,
    pub is_real_affine: bool,
    /// Numerical rank of the filtered Hankel matrix (q at a minimizer).
    pub hankel_rank: usize,
    pub hankel_borderline: bool,
}

/// Ranked list of real affine critical points.
#[derive(Debug, Clone)]
pub struct RealizationResult {
    /// Sorted by misfit, smallest first.
    pub candidates: Vec<CriticalPoint>,
    /// Number of affine eigenvalues (real and complex).
    pub n_affine: usize,
    /// Number of real affine eigenvalues before deduplication.
    pub n_real: usize,
    /// Index of the global minimizer in `candidates` (0 after sorting).
    pub global: usize,
    pub warnings: Vec<String>,
}

impl RealizationResult {
    pub fn global_candidate(&self) -> &CriticalPoint {
        &self.candidates[self.global]
    }
}

/// Coefficient vector of `b(z)` for variables `[b_1, ..., b_q]` with
/// `b_0 = 1`, in the library's constant-term-first storage.
pub fn b_poly_from_vars(vars: &[f64]) -> ModelPoly {
    let q = vars.len();
    let mut coeffs = vec![0.0; q + 1];
    coeffs[q] = 1.0;
    for (i, v) in vars.iter().enumerate() {
        coeffs[q - 1 - i] = *v;
    }
    ModelPoly::new(coeffs).expect("finite coefficients")
}

/// Linear-in-b matrix polynomial for the banded Toeplitz operator
/// `T_rows(b)` with `b_0 = 1` substituted.
fn toeplitz_in_b(q: usize, rows: usize) -> Result<MatrixPolynomial> {
    let mut p = MatrixPolynomial::zero(q, rows, rows + q);
    p.add_block(vec![0; q], toeplitz(&ModelPoly::basis(q, q), rows)?.dense());
    for i in 1..=q {
        let mut mono = vec![0; q];
        mono[i - 1] = 1;
        p.add_block(mono, toeplitz(&ModelPoly::basis(q, q - i), rows)?.dense());
    }
    Ok(p)
}

/// Build the cubic matrix polynomial `A(b)` of shape
/// `(N - n) x (N - 2n + m + 1)` for data `y`, fixed factor `c` and `q`
/// unknown coefficients.
pub fn build_matrix_polynomial(
    y: &Signal,
    c: &ModelPoly,
    q: usize,
) -> Result<MatrixPolynomial> {
    if q < 1 {
        return Err(Error::InvalidInput("need at least one unknown coefficient".into()));
    }
    let m = c.degree();
    let n = m + q;
    let nsamp = y.len();
    if nsamp <= 2 * n {
        return Err(Error::InvalidInput(format!(
            "need N > 2n data points, got N = {nsamp}, n = {n}"
        )));
    }
    let tc = MatrixPolynomial::constant(q, toeplitz(c, nsamp - n)?.dense());
    let tb = toeplitz_in_b(q, nsamp - q)?;
    let ta = tc.mul(&tb)?;
    let col = ta.mul_vector(y.values())?;
    let tb_small = toeplitz_in_b(q, nsamp - 2 * n + m)?;
    let right = ta.mul(&ta.transpose())?.mul(&tb_small.transpose())?;
    col.hstack(&right)
}

/// Direct assembly of `A(b)` at a real point, used as an evaluation oracle
/// and by the Newton polish.
pub fn assemble_at(
    y: &Signal,
    c: &ModelPoly,
    b_vars: &[f64],
) -> Result<Array2<f64>> {
    let q = b_vars.len();
    let m = c.degree();
    let n = m + q;
    let nsamp = y.len();
    let b = b_poly_from_vars(b_vars);
    let a = poly_mul(&b, c);
    let ta = toeplitz(&a, nsamp - n)?.dense();
    let tb_small = toeplitz(&b, nsamp - 2 * n + m)?.dense();
    let first = ta.dot(y.values());
    let right = ta.dot(&ta.t()).dot(&tb_small.t());
    let mut out = Array2::zeros((nsamp - n, nsamp - 2 * n + m + 1));
    out.column_mut(0).assign(&first);
    out.slice_mut(ndarray::s![.., 1..]).assign(&right);
    Ok(out)
}

/// Globally optimal realization: enumerate all real affine critical points
/// of the (fixed pole) least-squares realization problem and rank them by
/// misfit.
pub fn realize(y: &Signal, n: usize, fixed: &FixedPoleSet) -> Result<RealizationResult> {
    realize_with_degree_cap(y, n, fixed, DEFAULT_MAX_MACAULAY_DEGREE)
}

/// As [`realize`], with an explicit cap on the block Macaulay shift degree.
pub fn realize_with_degree_cap(
    y: &Signal,
    n: usize,
    fixed: &FixedPoleSet,
    max_degree: usize,
) -> Result<RealizationResult> {
    let m = fixed.len();
    if n == 0 || m >= n {
        return Err(Error::InvalidInput(format!(
            "need 0 <= m < n, got n = {n}, m = {m}"
        )));
    }
    let nsamp = y.len();
    if nsamp <= 2 * n {
        return Err(Error::InvalidInput(format!(
            "need N > 2n data points, got N = {nsamp}, n = {n}"
        )));
    }
    let q = n - m;
    let c = poly_from_roots(fixed);
    let mp = build_matrix_polynomial(y, &c, q)?;

    let mut warnings = Vec::new();
    let eigenpairs: Vec<(Vec<Complex64>, Array1<Complex64>)> = if q == 1 {
        univariate::solve_univariate(&mp)?
            .into_iter()
            .map(|(v, z)| (vec![v], z))
            .collect()
    } else {
        let outcome = macaulay::solve_block_macaulay(&mp, max_degree)?;
        warnings.extend(outcome.warnings);
        outcome.eigenpairs
    };

    let n_affine = eigenpairs.len();
    let mut real_vars: Vec<Vec<f64>> = eigenpairs
        .iter()
        .filter(|(v, _)| v.iter().all(|x| x.im.abs() <= REALNESS_TOL * (1.0 + x.re.abs())))
        .map(|(v, _)| v.iter().map(|x| x.re).collect())
        .collect();
    let n_real = real_vars.len();
    if real_vars.is_empty() {
        return Err(Error::NoRealSolution {
            eigenvalues: eigenpairs.into_iter().map(|(v, _)| v).collect(),
        });
    }

    for vars in real_vars.iter_mut() {
        if let Some(refined) = polish(y, &c, vars) {
            *vars = refined;
        }
    }
    real_vars.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    real_vars.dedup_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .all(|(x, y)| (*x - *y).abs() <= DEDUP_TOL)
    });

    let mut candidates = Vec::new();
    for vars in &real_vars {
        let b = b_poly_from_vars(vars);
        let a = poly_mul(&b, &c);
        let proj = match project_misfit(&a, y) {
            Ok(p) => p,
            Err(e) => {
                warnings.push(format!("candidate b = {vars:?} dropped: {e}"));
                continue;
            }
        };
        let g = estimate_multiplier(&b, &c, y, &proj)?;
        let fonc = fonc_residuals(&b, &c, y, &proj, &g)?;
        let rank = filtered_hankel_rank(&proj.yhat, &c, q)?;
        candidates.push(CriticalPoint {
            poles: crate::signalmodel::poly_roots(&a)?,
            misfit_sq: proj.misfit_sq,
            yhat: proj.yhat,
            fonc,
            is_real_affine: true,
            hankel_rank: rank.rank,
            hankel_borderline: rank.borderline,
            b,
            a,
        });
    }
    if candidates.is_empty() {
        return Err(Error::NoRealSolution {
            eigenvalues: eigenpairs.into_iter().map(|(v, _)| v).collect(),
        });
    }
    candidates.sort_by(|x, y| {
        x.misfit_sq
            .total_cmp(&y.misfit_sq)
            .then_with(|| cmp_coeffs(x.b.coeffs(), y.b.coeffs()))
    });
    Ok(RealizationResult {
        candidates,
        n_affine,
        n_real,
        global: 0,
        warnings,
    })
}

fn cmp_coeffs(a: &Array1<f64>, b: &Array1<f64>) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Newton refinement of a real candidate on the square polynomial system
/// `A(b) [1; g] = 0`, with the multiplier part solved by least squares
/// first. Returns the refined `b` when the iteration improves the residual
/// without leaving the candidate's basin.
fn polish(y: &Signal, c: &ModelPoly, b_vars: &[f64]) -> Option<Vec<f64>> {
    let q = b_vars.len();
    let m = c.degree();
    let nsamp = y.len();
    let g_len = nsamp - 2 * (q + m) + m;
    let rows = nsamp - q - m;

    let residual = |v: &Array1<f64>| -> Option<Array1<f64>> {
        let a = assemble_at(y, c, &v.as_slice()?[..q]).ok()?;
        let mut z = Array1::zeros(g_len + 1);
        z[0] = 1.0;
        for i in 0..g_len {
            z[i + 1] = v[q + i];
        }
        Some(a.dot(&z))
    };

    // initial multiplier: linear least squares at fixed b
    let a0 = assemble_at(y, c, b_vars).ok()?;
    let rhs = -&a0.column(0);
    let g0 = a0
        .slice(ndarray::s![.., 1..])
        .to_owned()
        .least_squares(&rhs.to_owned())
        .ok()?
        .solution;
    let mut v = Array1::zeros(q + g_len);
    for (i, b) in b_vars.iter().enumerate() {
        v[i] = *b;
    }
    for i in 0..g_len {
        v[q + i] = g0[i];
    }

    let scale = y.norm().max(1.0);
    let mut fv = residual(&v)?;
    let mut best = norm2(&fv);
    for _ in 0..12 {
        if best <= 1e-13 * scale {
            break;
        }
        // central-difference Jacobian
        let dim = v.len();
        let mut jac = Array2::zeros((rows, dim));
        for j in 0..dim {
            let h = 1e-6 * (1.0 + v[j].abs());
            let mut vp = v.clone();
            vp[j] += h;
            let mut vm = v.clone();
            vm[j] -= h;
            let fp = residual(&vp)?;
            let fm = residual(&vm)?;
            for i in 0..rows {
                jac[[i, j]] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let step = jac.least_squares(&fv).ok()?.solution;
        let mut damping = 1.0;
        let mut improved = false;
        for _ in 0..6 {
            let trial = &v - &(damping * &step);
            if let Some(ft) = residual(&trial) {
                let nt = norm2(&ft);
                if nt < best {
                    v = trial;
                    fv = ft;
                    best = nt;
                    improved = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !improved {
            break;
        }
    }
    // reject refinements that wander out of the candidate's neighborhood
    let moved = b_vars
        .iter()
        .enumerate()
        .map(|(i, b)| (v[i] - b).abs())
        .fold(0.0, f64::max);
    if moved > 1e-3 {
        return None;
    }
    Some(v.as_slice()?[..q].to_vec())
}

fn norm2(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
