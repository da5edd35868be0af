//! Cubic polynomial eigenvalue problem for the single-unknown case, solved
//! by companion-form linearization and a shift-and-invert standard
//! eigendecomposition.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, Inverse, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::matpoly::MatrixPolynomial;

/// Eigenvalues with `|theta| <= 1e-10` in shift-inverted coordinates are
/// reported at infinity (this is `|beta| <~ 1e-10 |alpha|` in pencil
/// coordinates for eigenvalues of moderate size).
const AFFINE_THETA_TOL: f64 = 1e-10;

/// Deterministic shift candidates for the shift-and-invert transform.
const SHIFTS: [f64; 5] = [0.317_830_1, -0.273_182_8, 1.111_317, -1.618_034, 2.414_214];

/// All affine eigenvalues of the cubic square matrix polynomial, with the
/// corresponding eigenvectors `z` (top block of the companion eigenvector).
pub fn solve_univariate(
    mp: &MatrixPolynomial,
) -> Result<Vec<(Complex64, Array1<Complex64>)>> {
    if mp.vars() != 1 {
        return Err(Error::InvalidInput("univariate solver needs exactly one unknown".into()));
    }
    if mp.rows() != mp.cols() {
        return Err(Error::InvalidInput(format!(
            "univariate solver needs square blocks, got {}x{}",
            mp.rows(),
            mp.cols()
        )));
    }
    let s = mp.rows();
    let deg = mp.degree().max(1) as usize;
    let coeff = |k: usize| -> Array2<f64> {
        mp.block(&[k as u32])
            .cloned()
            .unwrap_or_else(|| Array2::zeros((s, s)))
    };

    // first companion form: C1 v = b C2 v with v = [z; b z; ...; b^{d-1} z]
    let dim = deg * s;
    let mut c1 = Array2::<f64>::zeros((dim, dim));
    let mut c2 = Array2::<f64>::zeros((dim, dim));
    for blk in 0..deg - 1 {
        for i in 0..s {
            c1[[blk * s + i, (blk + 1) * s + i]] = 1.0;
            c2[[blk * s + i, blk * s + i]] = 1.0;
        }
    }
    for k in 0..deg {
        let a = coeff(k);
        c1.slice_mut(s![(deg - 1) * s.., k * s..(k + 1) * s])
            .assign(&(-&a));
    }
    c2.slice_mut(s![(deg - 1) * s.., (deg - 1) * s..])
        .assign(&coeff(deg));

    // shift-and-invert: eigenpairs of (C1 - sigma C2)^{-1} C2 are the pencil
    // eigenpairs with theta = 1 / (b - sigma); theta ~ 0 marks infinity
    let mut solved = None;
    for sigma in SHIFTS {
        let f = &c1 - &(sigma * &c2);
        let (_, sv, _) = f.svd(false, false)?;
        let smin = sv[sv.len() - 1];
        if smin <= sv[0] * 1e-12 {
            continue;
        }
        let m = f.inv()?.dot(&c2);
        solved = Some((sigma, m.eig()?));
        break;
    }
    let Some((sigma, (thetas, vecs))) = solved else {
        return Err(Error::Degenerate(
            "companion pencil singular at every trial shift".into(),
        ));
    };

    let mut out = Vec::new();
    for (k, theta) in thetas.iter().enumerate() {
        if theta.norm() <= AFFINE_THETA_TOL {
            continue; // eigenvalue at infinity
        }
        let b = Complex64::new(sigma, 0.0) + 1.0 / theta;
        let mut z: Array1<Complex64> = vecs.slice(s![..s, k]).to_owned();
        // Theorem-backed normalization: the first eigenvector entry is
        // nonzero for real affine eigenvalues
        if z[0].norm() > 1e-10 {
            let z0 = z[0];
            z.mapv_inplace(|v| v / z0);
        }
        out.push((b, z));
    }
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(out)
}
