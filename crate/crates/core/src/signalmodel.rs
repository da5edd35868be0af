//! Structured-matrix and polynomial primitives: banded Toeplitz operators,
//! Hankel matrices, polynomial arithmetic and root/coefficient conversions.
//!
//! A `ModelPoly` stores the coefficients of a shift-operator polynomial
//! `p(z) = p_0 z^d + p_1 z^{d-1} + ... + p_d` as the vector
//! `[p_d, ..., p_1, p_0]`, i.e. `coeffs[j]` multiplies `z^j`. This is the
//! ordering in which the coefficients appear along each row of the banded
//! Toeplitz operator `T_k(p)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::Eig;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A length-N real sequence of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Array1<f64>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("signal must have at least one sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("signal contains non-finite samples".into()));
        }
        Ok(Self { values: Array1::from(values) })
    }

    pub fn from_array(values: Array1<f64>) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Real coefficient vector of a shift-operator polynomial, constant term
/// first and leading coefficient last.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoly {
    coeffs: Array1<f64>,
}

impl ModelPoly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("polynomial needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial has non-finite coefficients".into()));
        }
        Ok(Self { coeffs: Array1::from(coeffs) })
    }

    /// The unit polynomial `p(z) = 1`.
    pub fn unit() -> Self {
        Self { coeffs: Array1::from(vec![1.0]) }
    }

    /// Degree-`degree` polynomial with a single unit coefficient on `z^power`.
    pub fn basis(degree: usize, power: usize) -> Self {
        assert!(power <= degree);
        let mut c = vec![0.0; degree + 1];
        c[power] = 1.0;
        Self { coeffs: Array1::from(c) }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients ordered constant term first, `coeffs()[j]` on `z^j`.
    pub fn coeffs(&self) -> &Array1<f64> {
        &self.coeffs
    }

    /// Leading coefficient (the paper's `a_0`).
    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }
}

/// A set of a-priori fixed poles, closed under complex conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoleSet {
    poles: Vec<Complex64>,
}

impl FixedPoleSet {
    /// Accepts the set when expanding the product of `(z - rho_i)` leaves
    /// coefficient imaginary parts below `1e-10 * (1 + max|rho|)^m`.
    pub fn new(poles: Vec<Complex64>) -> Result<Self> {
        if poles.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidInput("pole set contains non-finite entries".into()));
        }
        let coeffs = expand_roots(&poles);
        let max_im = coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        let tol = conjugate_tol(&poles);
        if max_im > tol {
            return Err(Error::InvalidInput(format!(
                "pole set is not closed under conjugation (imaginary residue {max_im:.3e} > {tol:.3e})"
            )));
        }
        Ok(Self { poles })
    }

    /// A set of real poles.
    pub fn real(poles: Vec<f64>) -> Result<Self> {
        Self::new(poles.into_iter().map(|p| Complex64::new(p, 0.0)).collect())
    }

    /// The empty pole set (`c(z) = 1`), i.e. the standard problem.
    pub fn empty() -> Self {
        Self { poles: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }
}

fn conjugate_tol(poles: &[Complex64]) -> f64 {
    let max_abs = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
    1e-10 * (1.0 + max_abs).powi(poles.len() as i32)
}

/// Expand the monic product over the roots; complex coefficients, constant
/// term first.
fn expand_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        // multiply by (z - r)
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

/// Banded Toeplitz operator `T_rows(p)` of shape `rows x (rows + degree)`;
/// row `r` carries the generator coefficients in columns `r ..= r + degree`.
#[derive(Debug, Clone)]
pub struct BandedToeplitz {
    generator: ModelPoly,
    rows: usize,
}

impl BandedToeplitz {
    pub fn generator(&self) -> &ModelPoly {
        &self.generator
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.rows + self.generator.degree()
    }

    pub fn dense(&self) -> Array2<f64> {
        let d = self.generator.degree();
        let mut m = Array2::zeros((self.rows, self.cols()));
        for r in 0..self.rows {
            for j in 0..=d {
                m[[r, r + j]] = self.generator.coeffs()[j];
            }
        }
        m
    }

    /// `T_rows(p) * x` as banded convolution, without forming the matrix.
    pub fn apply(&self, x: &Signal) -> Result<Array1<f64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "Toeplitz apply: expected signal of length {}, got {}",
                self.cols(),
                x.len()
            )));
        }
        let c = self.generator.coeffs();
        let v = x.values();
        let mut out = Array1::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..c.len() {
                acc += c[j] * v[r + j];
            }
            out[r] = acc;
        }
        Ok(out)
    }
}

/// Hankel matrix of a signal with `cols` columns; entry `(i, j) = s[i + j]`.
#[derive(Debug, Clone)]
pub struct HankelMatrix {
    source: Signal,
    cols: usize,
}

impl HankelMatrix {
    pub fn rows(&self) -> usize {
        self.source.len() - self.cols + 1
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dense(&self) -> Array2<f64> {
        let v = self.source.values();
        let mut m = Array2::zeros((self.rows(), self.cols));
        for i in 0..self.rows() {
            for j in 0..self.cols {
                m[[i, j]] = v[i + j];
            }
        }
        m
    }
}

/// Banded Toeplitz operator for `p` with the requested number of rows.
pub fn toeplitz(p: &ModelPoly, rows: usize) -> Result<BandedToeplitz> {
    if rows < 1 {
        return Err(Error::InvalidInput("Toeplitz operator needs at least one row".into()));
    }
    Ok(BandedToeplitz { generator: p.clone(), rows })
}

/// Hankel matrix of `s` with `cols` columns.
pub fn hankel(s: &Signal, cols: usize) -> Result<HankelMatrix> {
    if cols < 1 || cols > s.len() {
        return Err(Error::InvalidInput(format!(
            "Hankel columns must lie in 1..={}, got {}",
            s.len(),
            cols
        )));
    }
    Ok(HankelMatrix { source: s.clone(), cols })
}

/// Coefficient convolution; realizes `a = b * c` so that
/// `T_k(a) = T_k(c) T_{k + deg c}(b)`.
pub fn poly_mul(p: &ModelPoly, r: &ModelPoly) -> ModelPoly {
    let pc = p.coeffs();
    let rc = r.coeffs();
    let mut out = vec![0.0; pc.len() + rc.len() - 1];
    for (i, a) in pc.iter().enumerate() {
        for (j, b) in rc.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    ModelPoly { coeffs: Array1::from(out) }
}

/// Real monic polynomial with the given conjugate-closed roots.
pub fn poly_from_roots(roots: &FixedPoleSet) -> ModelPoly {
    let coeffs = expand_roots(roots.poles());
    ModelPoly {
        coeffs: Array1::from(coeffs.iter().map(|c| c.re).collect::<Vec<_>>()),
    }
}

/// All complex roots via companion-matrix eigenvalues.
pub fn poly_roots(p: &ModelPoly) -> Result<Vec<Complex64>> {
    let lead = p.leading();
    if lead == 0.0 {
        return Err(Error::InvalidInput("zero leading coefficient".into()));
    }
    let d = p.degree();
    if d == 0 {
        return Ok(Vec::new());
    }
    // companion matrix of the monic normalization
    let mut comp = Array2::<f64>::zeros((d, d));
    for i in 1..d {
        comp[[i, i - 1]] = 1.0;
    }
    for i in 0..d {
        comp[[i, d - 1]] = -p.coeffs()[i] / lead;
    }
    let (vals, _) = comp.eig()?;
    let mut roots = vals.to_vec();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sig(v: &[f64]) -> Signal {
        Signal::new(v.to_vec()).unwrap()
    }

    fn poly(c: &[f64]) -> ModelPoly {
        ModelPoly::new(c.to_vec()).unwrap()
    }

    #[test]
    fn toeplitz_degree_one_pattern() {
        let rho = 0.7;
        let p = poly(&[-rho, 1.0]);
        let t = toeplitz(&p, 2).unwrap().dense();
        let expected = ndarray::array![[-rho, 1.0, 0.0], [0.0, -rho, 1.0]];
        assert_eq!(t, expected);
    }

    #[test]
    fn toeplitz_degree_zero_is_identity() {
        let t = toeplitz(&ModelPoly::unit(), 3).unwrap().dense();
        assert_eq!(t, Array2::<f64>::eye(3));
    }

    #[test]
    fn toeplitz_rejects_zero_rows() {
        assert!(toeplitz(&ModelPoly::unit(), 0).is_err());
    }

    #[test]
    fn toeplitz_apply_matches_convolution() {
        let fixed = FixedPoleSet::new(vec![Complex64::new(-0.9557, 0.0)]).unwrap();
        let c = poly_from_roots(&fixed);
        let y = sig(&[3.0, 5.0, 2.0, 3.0, 4.0, 2.0]);
        let t = toeplitz(&c, 5).unwrap();
        let by_matrix = t.dense().dot(y.values());
        let by_apply = t.apply(&y).unwrap();
        for i in 0..5 {
            assert_abs_diff_eq!(by_matrix[i], by_apply[i], epsilon = 1e-14);
            // direct convolution: c0*y[i] + c1*y[i+1]
            assert_abs_diff_eq!(
                by_apply[i],
                0.9557 * y.values()[i] + y.values()[i + 1],
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn hankel_example() {
        let h = hankel(&sig(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap().dense();
        let expected = ndarray::array![[1.0, 2.0], [2.0, 3.0], [3.0, 4.0]];
        assert_eq!(h, expected);
    }

    #[test]
    fn hankel_rejects_too_many_cols() {
        assert!(hankel(&sig(&[1.0, 2.0]), 3).is_err());
    }

    #[test]
    fn hankel_of_geometric_signal_has_rank_one() {
        let rho: f64 = 0.8;
        let v: Vec<f64> = (0..8).map(|k| rho.powi(k)).collect();
        let h = hankel(&sig(&v), 2).unwrap().dense();
        // every 2x2 minor vanishes
        for i in 0..h.nrows() - 1 {
            let det = h[[i, 0]] * h[[i + 1, 1]] - h[[i, 1]] * h[[i + 1, 0]];
            assert_abs_diff_eq!(det, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn poly_mul_example_one_model() {
        let b = poly(&[-0.9538, 1.0]); // z - 0.9538
        let c = poly(&[0.9557, 1.0]); // z + 0.9557
        let a = poly_mul(&b, &c);
        let expected = [-0.9116, 0.0019, 1.0];
        for (got, want) in a.coeffs().iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn poly_mul_unit_is_identity() {
        let p = poly(&[2.0, -1.5, 3.0]);
        assert_eq!(poly_mul(&p, &ModelPoly::unit()), p);
    }

    #[test]
    fn poly_from_roots_single_real() {
        let fixed = FixedPoleSet::new(vec![Complex64::new(0.5, 0.0)]).unwrap();
        let c = poly_from_roots(&fixed);
        assert_eq!(c.coeffs().to_vec(), vec![-0.5, 1.0]);
    }

    #[test]
    fn poly_from_roots_fixed_pole_of_example_one() {
        let fixed = FixedPoleSet::new(vec![Complex64::new(-0.9557, 0.0)]).unwrap();
        let c = poly_from_roots(&fixed);
        assert_eq!(c.coeffs().to_vec(), vec![0.9557, 1.0]);
    }

    #[test]
    fn poly_from_roots_conjugate_pair() {
        let r = Complex64::from_polar(1.0, 0.8);
        let fixed = FixedPoleSet::new(vec![r, r.conj()]).unwrap();
        let c = poly_from_roots(&fixed);
        assert_abs_diff_eq!(c.coeffs()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.coeffs()[1], -2.0 * 0.8f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.coeffs()[2], 1.0, epsilon = 1e-12);
        // roots round-trip
        let roots = poly_roots(&c).unwrap();
        assert_abs_diff_eq!(roots[0].re, r.re, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[0].im.abs(), r.im.abs(), epsilon = 1e-10);
    }

    #[test]
    fn fixed_pole_set_rejects_unpaired_complex() {
        assert!(FixedPoleSet::new(vec![Complex64::new(0.3, 0.4)]).is_err());
    }

    #[test]
    fn poly_roots_of_example_one_model() {
        let a = poly(&[-0.9116, 0.0019, 1.0]);
        let roots = poly_roots(&a).unwrap();
        assert_abs_diff_eq!(roots[0].re, -0.9557, epsilon = 1e-3);
        assert_abs_diff_eq!(roots[1].re, 0.9538, epsilon = 1e-3);
    }

    #[test]
    fn poly_roots_of_z() {
        let roots = poly_roots(&poly(&[0.0, 1.0])).unwrap();
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn poly_roots_rejects_zero_leading() {
        assert!(poly_roots(&poly(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn poly_roots_round_trip_degree_four() {
        let roots = [
            Complex64::new(0.9, 0.0),
            Complex64::new(-0.6, 0.0),
            Complex64::new(0.2, 0.7),
            Complex64::new(0.2, -0.7),
        ];
        let set = FixedPoleSet::new(roots.to_vec()).unwrap();
        let p = poly_from_roots(&set);
        let mut got = poly_roots(&p).unwrap();
        let mut want = roots.to_vec();
        let key = |c: &Complex64| (c.re, c.im);
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-8, "{g} vs {w}");
        }
    }

    proptest! {
        // T_{N-n}(c) T_{N-q}(b) = T_{N-n}(b) T_{N-m}(c), both equal T_{N-n}(b*c)
        #[test]
        fn toeplitz_commutation(
            b in proptest::collection::vec(-2.0..2.0f64, 2..5),
            c in proptest::collection::vec(-2.0..2.0f64, 1..4),
            extra in 1usize..6,
        ) {
            let b = ModelPoly::new(b).unwrap();
            let c = ModelPoly::new(c).unwrap();
            let q = b.degree();
            let m = c.degree();
            let n = q + m;
            let nn = n + extra; // N - n >= 1
            let left = toeplitz(&c, nn).unwrap().dense()
                .dot(&toeplitz(&b, nn + m).unwrap().dense());
            let right = toeplitz(&b, nn).unwrap().dense()
                .dot(&toeplitz(&c, nn + q).unwrap().dense());
            let prod = toeplitz(&poly_mul(&b, &c), nn).unwrap().dense();
            for ((l, r), p) in left.iter().zip(right.iter()).zip(prod.iter()) {
                prop_assert!((l - r).abs() <= 1e-13 * (1.0 + l.abs()));
                prop_assert!((l - p).abs() <= 1e-13 * (1.0 + l.abs()));
            }
        }

        // hankel(y, d+1) * a = toeplitz(a, N-d) * y
        #[test]
        fn hankel_toeplitz_identity(
            y in proptest::collection::vec(-5.0..5.0f64, 5..12),
            a in proptest::collection::vec(-2.0..2.0f64, 2..4),
        ) {
            let s = Signal::new(y).unwrap();
            let a = ModelPoly::new(a).unwrap();
            let d = a.degree();
            prop_assume!(s.len() > d);
            let lhs = hankel(&s, d + 1).unwrap().dense().dot(a.coeffs());
            let rhs = toeplitz(&a, s.len() - d).unwrap().apply(&s).unwrap();
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + l.abs()));
            }
        }

        // a signal built from distinct poles is annihilated by its model
        #[test]
        fn vandermonde_signal_is_annihilated(
            seedpoles in proptest::collection::vec(-0.95..0.95f64, 1..4),
            weights in proptest::collection::vec(-3.0..3.0f64, 4),
        ) {
            let mut poles: Vec<f64> = seedpoles;
            poles.sort_by(f64::total_cmp);
            poles.dedup_by(|a, b| (*a - *b).abs() < 0.05);
            let n = poles.len();
            let nsamp = 2 * n + 4;
            let mut v = vec![0.0; nsamp];
            for (i, p) in poles.iter().enumerate() {
                for (k, item) in v.iter_mut().enumerate() {
                    *item += weights[i] * p.powi(k as i32);
                }
            }
            let s = Signal::new(v).unwrap();
            let set = FixedPoleSet::new(
                poles.iter().map(|p| Complex64::new(*p, 0.0)).collect(),
            ).unwrap();
            let a = poly_from_roots(&set);
            let res = toeplitz(&a, nsamp - n).unwrap().apply(&s).unwrap();
            let rnorm = res.iter().map(|r| r * r).sum::<f64>().sqrt();
            prop_assert!(rnorm <= 1e-10 * (1.0 + s.norm()));
        }
    }
}
