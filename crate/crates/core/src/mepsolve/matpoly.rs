//! Multivariate matrix polynomials with real coefficient blocks, indexed by
//! monomial exponent vectors.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exponent vector of a monomial in the unknowns `b_1 ... b_q`.
pub type Monomial = Vec<u32>;

/// A matrix polynomial `sum_alpha b^alpha A_alpha` with real blocks that all
/// share one shape. Blocks are kept in a BTreeMap so iteration order (and
/// everything derived from it) is deterministic.
#[derive(Debug, Clone)]
pub struct MatrixPolynomial {
    vars: usize,
    rows: usize,
    cols: usize,
    blocks: BTreeMap<Monomial, Array2<f64>>,
}

impl MatrixPolynomial {
    pub fn zero(vars: usize, rows: usize, cols: usize) -> Self {
        Self { vars, rows, cols, blocks: BTreeMap::new() }
    }

    /// A degree-zero polynomial holding a single constant block.
    pub fn constant(vars: usize, block: Array2<f64>) -> Self {
        let (rows, cols) = (block.nrows(), block.ncols());
        let mut p = Self::zero(vars, rows, cols);
        p.add_block(vec![0; vars], block);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.blocks
            .keys()
            .map(|m| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&Monomial, &Array2<f64>)> {
        self.blocks.iter()
    }

    pub fn block(&self, monomial: &[u32]) -> Option<&Array2<f64>> {
        self.blocks.get(monomial)
    }

    /// Accumulate `block` onto the coefficient of `monomial`.
    pub fn add_block(&mut self, monomial: Monomial, block: Array2<f64>) {
        assert_eq!(monomial.len(), self.vars);
        assert_eq!((block.nrows(), block.ncols()), (self.rows, self.cols));
        match self.blocks.get_mut(&monomial) {
            Some(existing) => *existing += &block,
            None => {
                self.blocks.insert(monomial, block);
            }
        }
    }

    /// Matrix product, convolving monomial exponents.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.vars != other.vars || self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matrix polynomial product: ({}x{}) * ({}x{})",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.vars, self.rows, other.cols);
        for (ma, a) in &self.blocks {
            for (mb, b) in &other.blocks {
                let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                out.add_block(m, a.dot(b));
            }
        }
        Ok(out)
    }

    /// Right-multiply every block by a constant vector, giving a one-column
    /// matrix polynomial.
    pub fn mul_vector(&self, v: &Array1<f64>) -> Result<Self> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch("matrix polynomial * vector".into()));
        }
        let mut out = Self::zero(self.vars, self.rows, 1);
        for (m, a) in &self.blocks {
            let col = a.dot(v);
            out.add_block(m.clone(), col.insert_axis(ndarray::Axis(1)));
        }
        Ok(out)
    }

    /// Blockwise transpose.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.vars, self.cols, self.rows);
        for (m, a) in &self.blocks {
            out.add_block(m.clone(), a.t().to_owned());
        }
        out
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.vars != other.vars || self.rows != other.rows {
            return Err(Error::DimensionMismatch("matrix polynomial hstack".into()));
        }
        let cols = self.cols + other.cols;
        let mut out = Self::zero(self.vars, self.rows, cols);
        for (m, a) in &self.blocks {
            let mut wide = Array2::zeros((self.rows, cols));
            wide.slice_mut(ndarray::s![.., ..self.cols]).assign(a);
            out.add_block(m.clone(), wide);
        }
        for (m, a) in &other.blocks {
            let mut wide = Array2::zeros((self.rows, cols));
            wide.slice_mut(ndarray::s![.., self.cols..]).assign(a);
            out.add_block(m.clone(), wide);
        }
        Ok(out)
    }

    /// Evaluate at a real point.
    pub fn eval_real(&self, b: &[f64]) -> Array2<f64> {
        assert_eq!(b.len(), self.vars);
        let mut out = Array2::zeros((self.rows, self.cols));
        for (m, a) in &self.blocks {
            let w: f64 = m.iter().zip(b).map(|(e, x)| x.powi(*e as i32)).product();
            out.scaled_add(w, a);
        }
        out
    }

    /// Evaluate at a complex point.
    pub fn eval_complex(&self, b: &[Complex64]) -> Array2<Complex64> {
        assert_eq!(b.len(), self.vars);
        let mut out = Array2::from_elem((self.rows, self.cols), Complex64::new(0.0, 0.0));
        for (m, a) in &self.blocks {
            let w: Complex64 = m
                .iter()
                .zip(b)
                .map(|(e, x)| x.powu(*e))
                .product();
            out.zip_mut_with(a, |o, v| *o += w * v);
        }
        out
    }
}

/// All monomials in `vars` variables with total degree <= `max_degree`, in
/// graded lexicographic order. This ordering fixes the row/column layout of
/// the block Macaulay matrix.
pub fn monomials_up_to(vars: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        push_degree(vars, d, &mut Vec::new(), &mut out);
    }
    out
}

fn push_degree(vars: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if prefix.len() == vars - 1 {
        let mut m = prefix.clone();
        m.push(remaining);
        out.push(m);
        return;
    }
    // lexicographic within a degree: larger exponent on earlier variables first
    for e in (0..=remaining).rev() {
        prefix.push(e);
        push_degree(vars, remaining - e, prefix, out);
        prefix.pop();
    }
}

/// Number of monomials in `vars` variables with total degree <= `max_degree`.
pub fn monomial_count(vars: usize, max_degree: u32) -> usize {
    // C(max_degree + vars, vars)
    let mut num: usize = 1;
    let mut den: usize = 1;
    for i in 1..=vars {
        num *= max_degree as usize + i;
        den *= i;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn monomial_order_is_graded_lex() {
        let ms = monomials_up_to(2, 2);
        assert_eq!(
            ms,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(ms.len(), monomial_count(2, 2));
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomial_count(1, 3), 4);
        assert_eq!(monomial_count(3, 3), 20);
        assert_eq!(monomials_up_to(3, 4).len(), monomial_count(3, 4));
    }

    #[test]
    fn product_matches_pointwise_evaluation() {
        // (A0 + b1 A1) * (B0 + b2 B2)
        let mut p = MatrixPolynomial::zero(2, 2, 2);
        p.add_block(vec![0, 0], array![[1.0, 2.0], [0.0, 1.0]]);
        p.add_block(vec![1, 0], array![[0.0, 1.0], [1.0, 0.0]]);
        let mut r = MatrixPolynomial::zero(2, 2, 2);
        r.add_block(vec![0, 0], array![[2.0, 0.0], [1.0, 1.0]]);
        r.add_block(vec![0, 1], array![[1.0, 1.0], [0.0, 3.0]]);
        let prod = p.mul(&r).unwrap();
        let at = [0.7, -1.3];
        let direct = p.eval_real(&at).dot(&r.eval_real(&at));
        let via = prod.eval_real(&at);
        for (d, v) in direct.iter().zip(via.iter()) {
            assert!((d - v).abs() < 1e-14);
        }
        assert_eq!(prod.degree(), 2);
    }
}
