//! Derivative-free minimization of the projection misfit over the unknown
//! coefficients: a dense grid scan followed by Nelder-Mead refinement of the
//! best cells. Serves as an independent cross-check of the eigenvalue-based
//! solver and as a cheap fallback minimizer.

use crate::error::Result;
use crate::mepsolve::b_poly_from_vars;
use crate::optimality::project_misfit;
use crate::signalmodel::{poly_from_roots, poly_mul, FixedPoleSet, ModelPoly, Signal};

/// Default search box for the unknown coefficients, per dimension. Covers
/// every model whose free poles all have magnitude below sqrt(2).
pub const SEARCH_BOX: (f64, f64) = (-2.0, 2.0);

/// Squared projection misfit as a function of the unknown coefficients;
/// infeasible (ill-conditioned) models map to infinity.
pub fn misfit_objective(y: &Signal, c: &ModelPoly, b_vars: &[f64]) -> f64 {
    if b_vars.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let a = poly_mul(&b_poly_from_vars(b_vars), c);
    match project_misfit(&a, y) {
        Ok(p) => p.misfit_sq,
        Err(_) => f64::INFINITY,
    }
}

/// Outcome of the grid + refinement search.
#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub b_vars: Vec<f64>,
    pub misfit_sq: f64,
}

/// Minimize the misfit over `q = n - m` unknown coefficients by scanning a
/// uniform grid on the search box and polishing the best cells with
/// Nelder-Mead. `points_per_dim` controls the grid density; extra start
/// points may be supplied (e.g. an eigenvalue-solver solution) and are
/// refined alongside the grid minima.
pub fn grid_refine(
    y: &Signal,
    n: usize,
    fixed: &FixedPoleSet,
    points_per_dim: usize,
    extra_starts: &[Vec<f64>],
) -> Result<GridSearchResult> {
    grid_refine_in_box(y, n, fixed, SEARCH_BOX, points_per_dim, extra_starts)
}

/// As [`grid_refine`], with an explicit per-dimension search box (the global
/// minimizer's coefficients can fall outside the default box when the data
/// favors fast-growing models).
pub fn grid_refine_in_box(
    y: &Signal,
    n: usize,
    fixed: &FixedPoleSet,
    box_: (f64, f64),
    points_per_dim: usize,
    extra_starts: &[Vec<f64>],
) -> Result<GridSearchResult> {
    let c = poly_from_roots(fixed);
    let q = n - fixed.len();
    let (lo, hi) = box_;
    let step = (hi - lo) / (points_per_dim.max(2) - 1) as f64;

    // grid scan, keeping the best cells as refinement seeds
    let mut cells: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; q];
    loop {
        let point: Vec<f64> = idx.iter().map(|i| lo + step * *i as f64).collect();
        let f = misfit_objective(y, &c, &point);
        if f.is_finite() {
            cells.push((f, point));
        }
        // odometer increment over the q-dimensional grid
        let mut d = 0;
        loop {
            if d == q {
                break;
            }
            idx[d] += 1;
            if idx[d] < points_per_dim {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == q {
            break;
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_seeds = (3 * q).clamp(4, 12).min(cells.len());

    let mut best: Option<GridSearchResult> = None;
    let starts = cells[..n_seeds]
        .iter()
        .map(|(_, p)| p.clone())
        .chain(extra_starts.iter().cloned());
    for start in starts {
        if start.len() != q {
            continue;
        }
        let (point, value) = nelder_mead(|v| misfit_objective(y, &c, v), &start, step.max(0.05));
        if best.as_ref().is_none_or(|b| value < b.misfit_sq) {
            best = Some(GridSearchResult { b_vars: point, misfit_sq: value });
        }
    }
    Ok(best.expect("at least one refinement start"))
}

/// Standard Nelder-Mead with adaptive-free fixed coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2), run to a tight simplex.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    initial_step: f64,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    simplex.push((f(start), start.to_vec()));
    for d in 0..dim {
        let mut p = start.to_vec();
        p[d] += initial_step;
        simplex.push((f(&p), p));
    }

    for _ in 0..600 {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spread = simplex[dim].0 - simplex[0].0;
        let size: f64 = (0..dim)
            .map(|d| {
                simplex
                    .iter()
                    .map(|(_, p)| (p[d] - simplex[0].1[d]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= 1e-14 * (1.0 + simplex[0].0.abs()) && size <= 1e-10 {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..dim].iter().map(|(_, p)| p[d]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let at = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|d| centroid[d] + t * (centroid[d] - worst.1[d]))
                .collect()
        };

        let refl = at(1.0);
        let f_refl = f(&refl);
        if f_refl < simplex[0].0 {
            let exp = at(2.0);
            let f_exp = f(&exp);
            simplex[dim] = if f_exp < f_refl { (f_exp, exp) } else { (f_refl, refl) };
            continue;
        }
        if f_refl < simplex[dim - 1].0 {
            simplex[dim] = (f_refl, refl);
            continue;
        }
        let contr = if f_refl < worst.0 { at(0.5) } else { at(-0.5) };
        let f_contr = f(&contr);
        if f_contr < worst.0.min(f_refl) {
            simplex[dim] = (f_contr, contr);
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].1.clone();
        for v in simplex.iter_mut().skip(1) {
            for d in 0..dim {
                v.1[d] = best[d] + 0.5 * (v.1[d] - best[d]);
            }
            v.0 = f(&v.1);
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (value, point) = simplex.swap_remove(0);
    (point, value)
}
