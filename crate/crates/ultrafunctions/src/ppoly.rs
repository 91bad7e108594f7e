//! Exact symbolic calculus for piecewise polynomials on a symmetric interval.
//!
//! Every function handled by this crate is a piecewise polynomial over a list of
//! strictly increasing breakpoints spanning `[-beta, beta]`. Each piece stores its
//! coefficients in the monomial basis *shifted to the piece's left breakpoint*,
//! `p_i(x) = sum_k c[i][k] (x - b_i)^k`, which keeps coefficients well scaled on
//! narrow pieces. Differentiation, antidifferentiation, products and integrals are
//! all closed-form coefficient operations; no quadrature is involved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking value/derivative agreement at breakpoints.
pub const SMOOTHNESS_TOL: f64 = 1e-9;

/// A piecewise polynomial on `[-beta, beta]` in shifted monomial form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewisePolynomialData", into = "PiecewisePolynomialData")]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    degree_bound: usize,
}

/// Wire form: `{"breakpoints": [...], "pieces": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewisePolynomialData {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

impl TryFrom<PiecewisePolynomialData> for PiecewisePolynomial {
    type Error = Error;

    fn try_from(data: PiecewisePolynomialData) -> Result<Self> {
        PiecewisePolynomial::new(data.breakpoints, data.pieces)
    }
}

impl From<PiecewisePolynomial> for PiecewisePolynomialData {
    fn from(p: PiecewisePolynomial) -> Self {
        PiecewisePolynomialData {
            breakpoints: p.breakpoints,
            pieces: p.pieces,
        }
    }
}

impl PiecewisePolynomial {
    /// Builds a piecewise polynomial from breakpoints and per-piece coefficient rows.
    pub fn new(breakpoints: Vec<f64>, mut pieces: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Config(
                "a piecewise polynomial needs at least two breakpoints".into(),
            ));
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(Error::Config(format!(
                "{} breakpoints require {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config(format!(
                    "breakpoints must be strictly increasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("breakpoints must be finite".into()));
        }
        for row in &mut pieces {
            if row.is_empty() {
                row.push(0.0);
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::Config("piece coefficients must be finite".into()));
            }
        }
        let degree_bound = pieces.iter().map(|r| r.len() - 1).max().unwrap_or(0);
        Ok(Self {
            breakpoints,
            pieces,
            degree_bound,
        })
    }

    /// The constant function `c` on `[-beta, beta]`.
    pub fn constant(c: f64, beta: f64) -> Self {
        Self {
            breakpoints: vec![-beta, beta],
            pieces: vec![vec![c]],
            degree_bound: 0,
        }
    }

    /// The zero function on `[-beta, beta]`.
    pub fn zero(beta: f64) -> Self {
        Self::constant(0.0, beta)
    }

    /// The global monomial `x^degree` on `[-beta, beta]`.
    pub fn monomial(degree: usize, beta: f64) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self::from_monomial_coeffs(&coeffs, beta)
    }

    /// A global polynomial `sum_k coeffs[k] x^k` on `[-beta, beta]`.
    pub fn from_monomial_coeffs(coeffs: &[f64], beta: f64) -> Self {
        // shift from the basis in x to the basis in t = x + beta
        let shifted = taylor_shift(coeffs, -beta);
        let degree_bound = shifted.len().saturating_sub(1);
        Self {
            breakpoints: vec![-beta, beta],
            pieces: vec![shifted],
            degree_bound,
        }
    }

    /// The truncated power `(x - knot)_+^degree` on `[-beta, beta]`.
    ///
    /// The piece left of the knot is exactly zero, which keeps compactly
    /// supported functions free of cancellation residue.
    pub fn truncated_power(knot: f64, degree: usize, beta: f64) -> Result<Self> {
        if !(-beta < knot && knot < beta) {
            return Err(Error::Domain {
                point: knot,
                lo: -beta,
                hi: beta,
            });
        }
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Ok(Self {
            breakpoints: vec![-beta, knot, beta],
            pieces: vec![vec![0.0], coeffs],
            degree_bound: degree,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Domain endpoints `(-beta, beta)` of this function.
    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    fn piece_index(&self, x: f64) -> usize {
        // rightmost breakpoint <= x; interior breakpoints resolve to the right piece
        let idx = self.breakpoints.partition_point(|b| *b <= x);
        idx.saturating_sub(1).min(self.pieces.len() - 1)
    }

    /// Evaluates the function at `x` in `[-beta, beta]`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain { point: x, lo, hi });
        }
        let i = self.piece_index(x);
        Ok(poly_eval(&self.pieces[i], x - self.breakpoints[i]))
    }

    /// Evaluates the `order`-th derivative at `x` (no smoothness requirement;
    /// at breakpoints the right piece is used).
    pub fn evaluate_derivative(&self, order: usize, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain { point: x, lo, hi });
        }
        let i = self.piece_index(x);
        Ok(poly_eval_derivative(
            &self.pieces[i],
            order,
            x - self.breakpoints[i],
        ))
    }

    /// True when value and derivatives up to `order` agree at every interior
    /// breakpoint within `tol` (scale-aware).
    pub fn is_smooth(&self, order: usize, tol: f64) -> bool {
        for i in 0..self.pieces.len() - 1 {
            let width = self.breakpoints[i + 1] - self.breakpoints[i];
            for d in 0..=order {
                let left = poly_eval_derivative(&self.pieces[i], d, width);
                let right = poly_eval_derivative(&self.pieces[i + 1], d, 0.0);
                if (left - right).abs() > tol * (1.0 + left.abs().max(right.abs())) {
                    return false;
                }
            }
        }
        true
    }

    /// The reported smoothness class: `None` if the function is discontinuous,
    /// otherwise the largest `k <= degree_bound + 1` such that derivatives up to
    /// `k` match at interior breakpoints. A single-piece polynomial reports
    /// `degree_bound + 1` (it is smooth to all orders).
    pub fn smoothness_class(&self, tol: f64) -> Option<usize> {
        if !self.is_smooth(0, tol) {
            return None;
        }
        let cap = self.degree_bound + 1;
        let mut class = 0;
        while class < cap && self.is_smooth(class + 1, tol) {
            class += 1;
        }
        Some(class)
    }

    /// Exact symbolic derivative. Requires smoothness class >= 1 so the result
    /// is a function rather than a distribution; callers holding a merely
    /// continuous function must use the distributional path instead.
    pub fn derivative(&self) -> Result<Self> {
        if !self.is_smooth(1, SMOOTHNESS_TOL) {
            return Err(Error::NotDifferentiable(
                "smoothness class is below 1; the derivative would have jumps".into(),
            ));
        }
        let pieces: Vec<Vec<f64>> = self.pieces.iter().map(|c| poly_derivative(c)).collect();
        let degree_bound = pieces.iter().map(|r| r.len() - 1).max().unwrap_or(0);
        Ok(Self {
            breakpoints: self.breakpoints.clone(),
            pieces,
            degree_bound,
        })
    }

    /// Exact antiderivative `q` with `q' = self` and `q(-beta) = 0`.
    pub fn antiderivative(&self) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut offset = 0.0;
        for (i, coeffs) in self.pieces.iter().enumerate() {
            let row = poly_antiderivative(coeffs, offset);
            let width = self.breakpoints[i + 1] - self.breakpoints[i];
            offset = poly_eval(&row, width);
            pieces.push(row);
        }
        let degree_bound = pieces.iter().map(|r| r.len() - 1).max().unwrap_or(0);
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces,
            degree_bound,
        }
    }

    /// Exact integral over the whole domain.
    pub fn integrate(&self) -> f64 {
        let mut total = 0.0;
        for (i, coeffs) in self.pieces.iter().enumerate() {
            let width = self.breakpoints[i + 1] - self.breakpoints[i];
            total += poly_integral(coeffs, width);
        }
        total
    }

    /// Exact `\int p q` over the shared domain, evaluated piecewise on the union
    /// of both breakpoint lists.
    pub fn integrate_product(&self, other: &Self) -> f64 {
        assert_eq!(
            self.domain(),
            other.domain(),
            "integrate_product requires matching domains"
        );
        let bps = union_breakpoints(&self.breakpoints, &other.breakpoints);
        let mut total = 0.0;
        for w in bps.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let a = self.piece_shifted_to(lo);
            let b = other.piece_shifted_to(lo);
            total += product_integral(a, b, hi - lo);
        }
        total
    }

    /// Coefficients of the piece covering `[x, ...)`, re-centered at `x`.
    fn piece_shifted_to(&self, x: f64) -> Vec<f64> {
        let i = self.piece_index(x);
        taylor_shift(&self.pieces[i], x - self.breakpoints[i])
    }

    /// Re-expresses the function over a superset of its breakpoints.
    fn refine(&self, bps: &[f64]) -> Self {
        let pieces: Vec<Vec<f64>> = bps
            .windows(2)
            .map(|w| self.piece_shifted_to(w[0]))
            .collect();
        Self {
            breakpoints: bps.to_vec(),
            pieces,
            degree_bound: self.degree_bound,
        }
    }

    /// `self + c * other`, exact.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Self {
        assert_eq!(
            self.domain(),
            other.domain(),
            "add_scaled requires matching domains"
        );
        let bps = union_breakpoints(&self.breakpoints, &other.breakpoints);
        let a = self.refine(&bps);
        let b = other.refine(&bps);
        let pieces: Vec<Vec<f64>> = a
            .pieces
            .iter()
            .zip(&b.pieces)
            .map(|(p, q)| {
                let n = p.len().max(q.len());
                (0..n)
                    .map(|k| p.get(k).copied().unwrap_or(0.0) + c * q.get(k).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        let degree_bound = pieces.iter().map(|r| r.len() - 1).max().unwrap_or(0);
        Self {
            breakpoints: bps,
            pieces,
            degree_bound,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(1.0, other)
    }

    pub fn scale(&self, c: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|row| row.iter().map(|v| c * v).collect())
            .collect();
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces,
            degree_bound: self.degree_bound,
        }
    }

    /// Exact pointwise product; the degree bound is the sum of the factors'.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.domain(), other.domain(), "mul requires matching domains");
        let bps = union_breakpoints(&self.breakpoints, &other.breakpoints);
        let a = self.refine(&bps);
        let b = other.refine(&bps);
        let pieces: Vec<Vec<f64>> = a
            .pieces
            .iter()
            .zip(&b.pieces)
            .map(|(p, q)| poly_mul(p, q))
            .collect();
        let degree_bound = pieces.iter().map(|r| r.len() - 1).max().unwrap_or(0);
        Self {
            breakpoints: bps,
            pieces,
            degree_bound,
        }
    }

    /// L2 distance to another function on the same domain, computed exactly.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        let diff = self.add_scaled(-1.0, other);
        diff.integrate_product(&diff).max(0.0).sqrt()
    }

    /// L2 norm over the domain.
    pub fn l2_norm(&self) -> f64 {
        self.integrate_product(self).max(0.0).sqrt()
    }
}

/// Coefficients of `p(t + a)` given the coefficients of `p(t)`.
pub(crate) fn taylor_shift(coeffs: &[f64], a: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    if c.is_empty() {
        return vec![0.0];
    }
    let n = c.len();
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let next = c[j + 1];
            c[j] += a * next;
        }
    }
    c
}

pub(crate) fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn poly_eval_derivative(coeffs: &[f64], order: usize, t: f64) -> f64 {
    if order >= coeffs.len() {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in (order..coeffs.len()).rev() {
        let mut factor = 1.0;
        for d in 0..order {
            factor *= (k - d) as f64;
        }
        acc = acc * t + coeffs[k] * factor;
    }
    acc
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

fn poly_antiderivative(coeffs: &[f64], constant: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(coeffs.len() + 1);
    row.push(constant);
    for (k, c) in coeffs.iter().enumerate() {
        row.push(c / (k + 1) as f64);
    }
    row
}

/// `\int_0^width p(t) dt` in closed form.
fn poly_integral(coeffs: &[f64], width: f64) -> f64 {
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate().rev() {
        acc = acc * width + c / (k + 1) as f64;
    }
    acc * width
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `\int_0^width p(t) q(t) dt` without materialising the product.
fn product_integral(a: Vec<f64>, b: Vec<f64>, width: f64) -> f64 {
    poly_integral(&poly_mul(&a, &b), width)
}

fn union_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x < y => {
                i += 1;
                *x
            }
            (Some(x), Some(y)) if y < x => {
                j += 1;
                *y
            }
            (Some(x), Some(_)) => {
                i += 1;
                j += 1;
                *x
            }
            (Some(x), None) => {
                i += 1;
                *x
            }
            (None, Some(y)) => {
                j += 1;
                *y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}
