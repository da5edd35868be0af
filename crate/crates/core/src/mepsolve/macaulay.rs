//! Block Macaulay solution of the rectangular multiparameter eigenvalue
//! problem: stack monomial-shifted copies of the matrix polynomial, watch the
//! null space stabilize degree by degree, and read the affine eigenvalue
//! tuples out of the shift structure of the stabilized null space.

use std::collections::HashMap;

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, LeastSquaresSvd, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::matpoly::{monomial_count, monomials_up_to, MatrixPolynomial, Monomial};

/// Relative rank threshold used for the Macaulay null space and the
/// degree-block rank scans.
const RANK_REL_TOL: f64 = 1e-12;
/// Singular-value gap ratios below this at a rank cut are reported as
/// ambiguous.
const GAP_WARN_RATIO: f64 = 1e3;

/// Block Macaulay matrix of a matrix polynomial at a given total degree.
#[derive(Debug, Clone)]
pub struct BlockMacaulay {
    pub degree: usize,
    pub matrix: Array2<f64>,
    /// Shift monomial per block row.
    pub row_monomials: Vec<Monomial>,
    /// Monomial per block column.
    pub col_monomials: Vec<Monomial>,
}

/// Assemble the block Macaulay matrix of degree `degree >= deg(mp)`: one
/// block row per shift monomial of degree `<= degree - deg(mp)`, one block
/// column per monomial of degree `<= degree`.
pub fn block_macaulay(mp: &MatrixPolynomial, degree: usize) -> Result<BlockMacaulay> {
    let d0 = mp.degree() as usize;
    if degree < d0 {
        return Err(Error::InvalidInput(format!(
            "Macaulay degree {degree} below polynomial degree {d0}"
        )));
    }
    let q = mp.vars();
    let (r, w) = (mp.rows(), mp.cols());
    let row_monomials = monomials_up_to(q, (degree - d0) as u32);
    let col_monomials = monomials_up_to(q, degree as u32);
    let col_index: HashMap<&Monomial, usize> = col_monomials
        .iter()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let mut matrix = Array2::zeros((r * row_monomials.len(), w * col_monomials.len()));
    for (ri, shift) in row_monomials.iter().enumerate() {
        for (alpha, block) in mp.blocks() {
            let target: Monomial = shift.iter().zip(alpha).map(|(a, b)| a + b).collect();
            let ci = col_index[&target];
            matrix
                .slice_mut(s![ri * r..(ri + 1) * r, ci * w..(ci + 1) * w])
                .assign(block);
        }
    }
    Ok(BlockMacaulay { degree, matrix, row_monomials, col_monomials })
}

/// Result of the block Macaulay iteration.
#[derive(Debug)]
pub struct MacaulayOutcome {
    /// Affine eigenvalue tuples with the eigenvector `z` (block of the
    /// degree-zero monomial).
    pub eigenpairs: Vec<(Vec<Complex64>, Array1<Complex64>)>,
    pub warnings: Vec<String>,
    /// Nullity per visited degree, for diagnostics.
    pub nullities: Vec<usize>,
}

/// Solve the MEP by iterating the block Macaulay degree until the nullity
/// increment is constant and a degree block adds no new affine directions
/// (the gap), then extract the affine eigenvalues from the shift relations
/// of the compressed null space.
pub fn solve_block_macaulay(
    mp: &MatrixPolynomial,
    max_degree: usize,
) -> Result<MacaulayOutcome> {
    let q = mp.vars();
    let w = mp.cols();
    let d0 = (mp.degree() as usize).max(1);
    let mut nullities = Vec::new();

    for degree in d0..=max_degree {
        let mac = block_macaulay(mp, degree)?;
        let (nullspace, warn_cut) = null_space(&mac.matrix)?;
        let nullity = nullspace.ncols();
        nullities.push(nullity);
        if nullity == 0 {
            continue;
        }

        let stable_increment = nullities.len() >= 3 && {
            let k = nullities.len();
            nullities[k - 1] - nullities[k - 2] == nullities[k - 2] - nullities[k - 3]
        };
        if !stable_increment {
            continue;
        }
        // rank of the top rows per column-monomial degree
        let mut ranks = Vec::with_capacity(degree + 1);
        for e in 0..=degree {
            let rows = w * monomial_count(q, e as u32);
            ranks.push(rank_of(&nullspace.slice(s![..rows, ..]).to_owned())?);
        }
        // gap: first degree whose block adds no new affine directions
        let Some(estar) = (0..degree).find(|e| ranks[*e] == ranks[*e + 1]) else {
            continue;
        };
        let ma = ranks[estar];
        if ma == 0 {
            return Ok(MacaulayOutcome {
                eigenpairs: Vec::new(),
                warnings: vec!["null space carries no affine directions".into()],
                nullities,
            });
        }

        let mut warnings = Vec::new();
        if let Some(wmsg) = warn_cut {
            warnings.push(wmsg);
        }
        let pairs = extract_affine(mp, &mac, &nullspace, estar, ma, &mut warnings)?;
        return Ok(MacaulayOutcome { eigenpairs: pairs, warnings, nullities });
    }

    Err(Error::MacaulayNoConvergence { max_degree, nullities })
}

/// Orthonormal basis of the right null space, with an optional warning when
/// the singular-value cut is ambiguous.
fn null_space(m: &Array2<f64>) -> Result<(Array2<f64>, Option<String>)> {
    let (_, sv, vt) = m.svd(false, true)?;
    let vt = vt.expect("requested V^T");
    let cols = m.ncols();
    let tol = sv[0] * m.nrows().max(cols) as f64 * RANK_REL_TOL;
    let rank = sv.iter().filter(|s| **s > tol).count();
    let warning = if rank > 0 && rank < sv.len() && sv[rank] > 0.0 {
        let ratio = sv[rank - 1] / sv[rank];
        (ratio < GAP_WARN_RATIO).then(|| {
            format!(
                "ambiguous Macaulay rank cut: singular value gap ratio {ratio:.2e} at rank {rank}"
            )
        })
    } else {
        None
    };
    // rows rank.. of V^T span the null space
    let z = vt.slice(s![rank.., ..]).t().to_owned();
    Ok((z, warning))
}

fn rank_of(m: &Array2<f64>) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let (_, sv, _) = m.svd(false, false)?;
    let tol = sv[0] * m.nrows().max(m.ncols()) as f64 * RANK_REL_TOL;
    Ok(sv.iter().filter(|s| **s > tol).count())
}

/// Read the affine eigenvalue tuples out of the stabilized null space via
/// the multiplication (shift) maps of the monomial basis.
fn extract_affine(
    mp: &MatrixPolynomial,
    mac: &BlockMacaulay,
    nullspace: &Array2<f64>,
    estar: usize,
    ma: usize,
    warnings: &mut Vec<String>,
) -> Result<Vec<(Vec<Complex64>, Array1<Complex64>)>> {
    let q = mp.vars();
    let w = mp.cols();
    let low_rows = w * monomial_count(q, estar as u32);

    // column compression: keep the ma directions visible in the affine rows
    let z_low = nullspace.slice(s![..low_rows, ..]).to_owned();
    let (_, _, vt) = z_low.svd(false, true)?;
    let vt = vt.expect("requested V^T");
    let v1 = vt.slice(s![..ma, ..]).t().to_owned();
    let compressed = nullspace.dot(&v1);
    let w_low = compressed.slice(s![..low_rows, ..]).to_owned();

    let col_index: HashMap<&Monomial, usize> = mac
        .col_monomials
        .iter()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let low_monomials = monomials_up_to(q, estar as u32);

    // shift maps X_i: multiplication by b_i on the compressed basis
    let mut shift_maps = Vec::with_capacity(q);
    for i in 0..q {
        let mut shifted = Array2::zeros((low_rows, ma));
        for (mi, mono) in low_monomials.iter().enumerate() {
            let mut target = mono.clone();
            target[i] += 1;
            let ti = col_index[&target];
            shifted
                .slice_mut(s![mi * w..(mi + 1) * w, ..])
                .assign(&compressed.slice(s![ti * w..(ti + 1) * w, ..]));
        }
        let x = w_low.least_squares(&shifted)?.solution;
        shift_maps.push(x);
    }

    // random (but fixed-seed) combination of the commuting shift maps gives
    // well-separated eigenvectors for the joint problem
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d45_5053);
    let mut combo = Array2::<f64>::zeros((ma, ma));
    for x in &shift_maps {
        let wgt: f64 = rng.random_range(0.25..1.0);
        combo.scaled_add(wgt, x);
    }
    let (_, vecs) = combo.eig()?;

    let mut pairs = Vec::with_capacity(ma);
    for k in 0..ma {
        let t = vecs.column(k);
        let denom: Complex64 = t.iter().map(|v| v.conj() * v).sum();
        if denom.norm() < 1e-300 {
            warnings.push(format!("dropped degenerate joint eigenvector {k}"));
            continue;
        }
        let mut value = Vec::with_capacity(q);
        for x in &shift_maps {
            // Rayleigh quotient of the shared eigenvector under each map
            let xt = complex_matvec(x, &t.to_owned());
            let num: Complex64 = t.iter().zip(xt.iter()).map(|(a, b)| a.conj() * b).sum();
            value.push(num / denom);
        }
        // eigenvector z: degree-zero block of the structured null vector
        let mut z = Array1::from_elem(w, Complex64::new(0.0, 0.0));
        for j in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, tv) in w_low.row(j).iter().zip(t.iter()) {
                acc += c * tv;
            }
            z[j] = acc;
        }
        if z[0].norm() > 1e-10 {
            let z0 = z[0];
            z.mapv_inplace(|v| v / z0);
        }
        pairs.push((value, z));
    }
    pairs.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(pairs)
}

fn complex_matvec(m: &Array2<f64>, v: &Array1<Complex64>) -> Array1<Complex64> {
    let mut out = Array1::from_elem(m.nrows(), Complex64::new(0.0, 0.0));
    for i in 0..m.nrows() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, x) in m.row(i).iter().zip(v.iter()) {
            acc += c * x;
        }
        out[i] = acc;
    }
    out
}
