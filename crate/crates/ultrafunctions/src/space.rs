//! The finite-dimensional function space on `[-beta, beta]`.
//!
//! The generating family is fixed by configuration: global monomials
//! `1, x, ..., x^p` plus truncated powers `(x - k)_+^m` for every interior knot
//! `k` and every degree `m` in the configured set. The space stores the exact
//! Gram matrix of that family together with an orthonormalized basis of the
//! same span, produced by modified Gram-Schmidt with reorthogonalization over
//! exact piecewise-polynomial inner products. The triangular factor `R` of the
//! orthonormalization (`b_j = sum_i R[i,j] e_i`, so `G = R^T R`) doubles as the
//! Cholesky factor of the Gram matrix; all solves against the space go through
//! `R` and the (numerically trivial) Gram matrix of the orthonormal basis,
//! never through the raw Gram inverse.

use nalgebra::{DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ppoly::PiecewisePolynomial;

/// Generators whose residual drops below this fraction of their norm during
/// orthonormalization are treated as exactly dependent.
const DEPENDENCE_FLOOR: f64 = 1e-13;

fn default_truncated_power_degrees() -> Vec<usize> {
    vec![2, 3, 4, 5]
}

fn default_condition_cap() -> f64 {
    1e12
}

/// JSON space configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub beta: f64,
    pub polynomial_degree: usize,
    #[serde(default)]
    pub knots: Vec<f64>,
    #[serde(default = "default_truncated_power_degrees")]
    pub truncated_power_degrees: Vec<usize>,
    #[serde(default = "default_condition_cap")]
    pub condition_cap: f64,
}

impl SpaceConfig {
    /// The configuration used throughout the reports and check suites:
    /// `beta = 4`, quintic polynomials, knots at the interior integers.
    pub fn default_config() -> Self {
        Self {
            beta: 4.0,
            polynomial_degree: 5,
            knots: (-3..=3).map(f64::from).collect(),
            truncated_power_degrees: default_truncated_power_degrees(),
            condition_cap: default_condition_cap(),
        }
    }
}

/// The generating family of the space: monomial degrees plus truncated powers
/// at interior knots.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFamily {
    polynomial_degree: usize,
    knots: Vec<f64>,
    truncated_power_degrees: Vec<usize>,
}

impl GeneratingFamily {
    pub fn new(
        polynomial_degree: usize,
        mut knots: Vec<f64>,
        mut truncated_power_degrees: Vec<usize>,
    ) -> Result<Self> {
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        truncated_power_degrees.sort_unstable();
        truncated_power_degrees.dedup();
        if knots.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate knots".into()));
        }
        if !knots.is_empty() {
            if truncated_power_degrees.is_empty() {
                return Err(Error::Config(
                    "knots were given but the truncated power degree set is empty".into(),
                ));
            }
            let min = *truncated_power_degrees.first().unwrap();
            let max = *truncated_power_degrees.last().unwrap();
            if min < 2 {
                return Err(Error::Config(format!(
                    "truncated power degree {min} is below 2; every generator must be C^1"
                )));
            }
            if polynomial_degree < max {
                return Err(Error::Config(format!(
                    "polynomial degree {polynomial_degree} is below the largest truncated power degree {max}"
                )));
            }
        }
        Ok(Self {
            polynomial_degree,
            knots,
            truncated_power_degrees,
        })
    }

    pub fn polynomial_degree(&self) -> usize {
        self.polynomial_degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn truncated_power_degrees(&self) -> &[usize] {
        &self.truncated_power_degrees
    }

    /// Number of generators: `p + 1` monomials plus one truncated power per
    /// knot and degree.
    pub fn dimension(&self) -> usize {
        self.polynomial_degree + 1 + self.knots.len() * self.truncated_power_degrees.len()
    }

    fn generators(&self, beta: f64) -> Result<(Vec<String>, Vec<PiecewisePolynomial>)> {
        let mut labels = Vec::with_capacity(self.dimension());
        let mut gens = Vec::with_capacity(self.dimension());
        for j in 0..=self.polynomial_degree {
            labels.push(match j {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{j}"),
            });
            gens.push(PiecewisePolynomial::monomial(j, beta));
        }
        for &k in &self.knots {
            if !(-beta < k && k < beta) {
                return Err(Error::Config(format!(
                    "knot {k} must lie strictly inside (-{beta}, {beta})"
                )));
            }
            for &m in &self.truncated_power_degrees {
                labels.push(truncated_power_label(k, m));
                gens.push(PiecewisePolynomial::truncated_power(k, m, beta)?);
            }
        }
        Ok((labels, gens))
    }
}

pub(crate) fn truncated_power_label(k: f64, m: usize) -> String {
    if k < 0.0 {
        format!("(x+{})_+^{}", -k, m)
    } else if k > 0.0 {
        format!("(x-{k})_+^{m}")
    } else {
        format!("(x)_+^{m}")
    }
}

/// The function space `V` standing in for the hyperfinite span: generators,
/// exact Gram matrix, orthonormalizing factor and projection machinery.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    beta: f64,
    family: GeneratingFamily,
    labels: Vec<String>,
    generators: Vec<PiecewisePolynomial>,
    gram: DMatrix<f64>,
    chol: DMatrix<f64>,
    ortho: Vec<PiecewisePolynomial>,
    ortho_factor: DMatrix<f64>,
    ortho_gram: DMatrix<f64>,
    ortho_chol: nalgebra::linalg::Cholesky<f64, Dyn>,
    condition_estimate: f64,
}

impl FunctionSpace {
    /// Builds the space from a configuration: generators, exact Gram assembly,
    /// orthonormalization and the conditioning check.
    pub fn build(config: &SpaceConfig) -> Result<Self> {
        if !(config.beta.is_finite() && config.beta > 0.0) {
            return Err(Error::Config(format!(
                "beta must be positive and finite, got {}",
                config.beta
            )));
        }
        let family = GeneratingFamily::new(
            config.polynomial_degree,
            config.knots.clone(),
            config.truncated_power_degrees.clone(),
        )?;
        let (labels, generators) = family.generators(config.beta)?;
        let n = generators.len();

        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = generators[i].integrate_product(&generators[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }

        // modified Gram-Schmidt with reorthogonalization; exact inner products
        let mut ortho: Vec<PiecewisePolynomial> = Vec::with_capacity(n);
        let mut factor = DMatrix::zeros(n, n);
        let mut pivot_ratios = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = generators[j].clone();
            let norm_b = v.l2_norm();
            for _pass in 0..2 {
                for (i, e) in ortho.iter().enumerate() {
                    let c = v.integrate_product(e);
                    factor[(i, j)] += c;
                    v = v.add_scaled(-c, e);
                }
            }
            let pivot = v.l2_norm();
            if pivot < DEPENDENCE_FLOOR * norm_b {
                return Err(Error::DependentGenerator {
                    label: labels[j].clone(),
                    ratio: pivot / norm_b,
                });
            }
            factor[(j, j)] = pivot;
            pivot_ratios.push(pivot / norm_b);
            ortho.push(v.scale(1.0 / pivot));
        }

        let mut ortho_gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = ortho[i].integrate_product(&ortho[j]);
                ortho_gram[(i, j)] = v;
                ortho_gram[(j, i)] = v;
            }
        }
        let ortho_chol = nalgebra::linalg::Cholesky::new(ortho_gram.clone()).ok_or_else(|| {
            Error::Config("orthonormalized Gram failed to factor; the family is degenerate".into())
        })?;

        // condition estimate of the triangular orthonormalizing factor, the
        // matrix every raw-coefficient solve goes through
        let svd = factor.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition_estimate = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if condition_estimate > config.condition_cap {
            let min_ratio = pivot_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let offenders: Vec<String> = pivot_ratios
                .iter()
                .enumerate()
                .filter(|(_, r)| **r <= 10.0 * min_ratio)
                .map(|(i, _)| labels[i].clone())
                .collect();
            return Err(Error::IllConditioned {
                estimate: condition_estimate,
                cap: config.condition_cap,
                generators: offenders,
            });
        }

        let chol = factor.transpose();
        Ok(Self {
            beta: config.beta,
            family,
            labels,
            generators,
            gram,
            chol,
            ortho,
            ortho_factor: factor,
            ortho_gram,
            ortho_chol,
            condition_estimate,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    pub fn family(&self) -> &GeneratingFamily {
        &self.family
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn generators(&self) -> &[PiecewisePolynomial] {
        &self.generators
    }

    /// Exact Gram matrix `G[i][j] = \int b_i b_j`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Lower-triangular factor `L` with `G = L L^T` (the transpose of the
    /// orthonormalizing factor).
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Condition estimate of the orthonormalizing factor (the square root of
    /// the Gram condition number); capped by the configuration.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// The orthonormalized basis functions.
    pub fn ortho_basis(&self) -> &[PiecewisePolynomial] {
        &self.ortho
    }

    /// Exact Gram matrix of the orthonormalized basis (numerically the
    /// identity).
    pub fn ortho_gram(&self) -> &DMatrix<f64> {
        &self.ortho_gram
    }

    /// Solve against the orthonormal-basis Gram matrix.
    pub(crate) fn ortho_chol_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.ortho_chol.solve(b)
    }

    /// Matrix right-hand-side variant of [`Self::ortho_chol_solve`].
    pub(crate) fn ortho_chol_solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.ortho_chol.solve(b)
    }

    /// Row vector of generator values at `x`.
    pub fn eval_generators(&self, x: f64) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.dimension());
        for (j, g) in self.generators.iter().enumerate() {
            v[j] = g.evaluate(x)?;
        }
        Ok(v)
    }

    /// Row vector of orthonormal basis values at `x`.
    pub fn eval_ortho(&self, x: f64) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.dimension());
        for (j, e) in self.ortho.iter().enumerate() {
            v[j] = e.evaluate(x)?;
        }
        Ok(v)
    }

    fn check_domain(&self, p: &PiecewisePolynomial) -> Result<()> {
        let (lo, hi) = p.domain();
        if lo != -self.beta || hi != self.beta {
            return Err(Error::Config(format!(
                "function domain [{lo}, {hi}] does not match the space domain [{}, {}]",
                -self.beta, self.beta
            )));
        }
        Ok(())
    }

    /// Orthogonal projection onto the space, returned as coefficients over the
    /// generating family (the solution of `G c = b`, `b_i = \int b_i p`).
    pub fn project(&self, p: &PiecewisePolynomial) -> Result<DVector<f64>> {
        let gamma = self.project_ortho(p)?;
        self.ortho_to_raw(&gamma)
    }

    /// Orthogonal projection in orthonormal coordinates.
    pub fn project_ortho(&self, p: &PiecewisePolynomial) -> Result<DVector<f64>> {
        self.check_domain(p)?;
        let moments = DVector::from_iterator(
            self.dimension(),
            self.ortho.iter().map(|e| e.integrate_product(p)),
        );
        Ok(self.ortho_chol.solve(&moments))
    }

    /// `raw -> orthonormal` coordinate change (`gamma = R c`).
    pub fn raw_to_ortho(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.ortho_factor * coeffs
    }

    /// `orthonormal -> raw` coordinate change (back-substitution with `R`).
    pub fn ortho_to_raw(&self, gamma: &DVector<f64>) -> Result<DVector<f64>> {
        self.ortho_factor
            .solve_upper_triangular(gamma)
            .ok_or_else(|| Error::Config("orthonormalizing factor is singular".into()))
    }

    /// The space element with the given generator coefficients, as a function.
    pub fn combine_raw(&self, coeffs: &DVector<f64>) -> PiecewisePolynomial {
        combine(&self.generators, coeffs.as_slice(), self.beta)
    }

    /// The space element with the given orthonormal coordinates, as a function.
    pub fn combine_ortho(&self, gamma: &DVector<f64>) -> PiecewisePolynomial {
        combine(&self.ortho, gamma.as_slice(), self.beta)
    }

    /// Evaluates the element with orthonormal coordinates `gamma` at `x`.
    pub fn evaluate_ortho(&self, gamma: &DVector<f64>, x: f64) -> Result<f64> {
        Ok(self.eval_ortho(x)?.dot(gamma))
    }

    /// Evaluates the element with generator coefficients `coeffs` at `x`.
    pub fn evaluate_raw(&self, coeffs: &DVector<f64>, x: f64) -> Result<f64> {
        Ok(self.eval_generators(x)?.dot(coeffs))
    }
}

fn combine(basis: &[PiecewisePolynomial], coeffs: &[f64], beta: f64) -> PiecewisePolynomial {
    let mut acc = PiecewisePolynomial::zero(beta);
    for (c, b) in coeffs.iter().zip(basis) {
        if *c != 0.0 {
            acc = acc.add_scaled(*c, b);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tiny_config() -> SpaceConfig {
        SpaceConfig {
            beta: 1.0,
            polynomial_degree: 1,
            knots: vec![],
            truncated_power_degrees: vec![2, 3, 4, 5],
            condition_cap: 1e12,
        }
    }

    #[test]
    fn tiny_space_gram_is_closed_form() {
        let space = FunctionSpace::build(&tiny_config()).unwrap();
        assert_eq!(space.dimension(), 2);
        let g = space.gram();
        assert_relative_eq!(g[(0, 0)], 2.0, epsilon = 1e-13);
        assert_relative_eq!(g[(0, 1)], 0.0, epsilon = 1e-13);
        assert_relative_eq!(g[(1, 0)], 0.0, epsilon = 1e-13);
        assert_relative_eq!(g[(1, 1)], 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn constant_space_has_dimension_one() {
        let cfg = SpaceConfig {
            polynomial_degree: 0,
            ..tiny_config()
        };
        let space = FunctionSpace::build(&cfg).unwrap();
        assert_eq!(space.dimension(), 1);
        assert_relative_eq!(space.gram()[(0, 0)], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn default_space_has_dimension_34() {
        let space = FunctionSpace::build(&SpaceConfig::default_config()).unwrap();
        assert_eq!(space.dimension(), 34);
        assert!(space.condition_estimate() <= 1e12);
        // orthonormalized Gram is numerically the identity
        let n = space.dimension();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((space.ortho_gram[(i, j)] - target).abs());
            }
        }
        assert!(defect < 1e-12, "orthonormality defect {defect}");
    }

    #[test]
    fn duplicate_knots_are_rejected() {
        let cfg = SpaceConfig {
            beta: 4.0,
            polynomial_degree: 5,
            knots: vec![1.0, 1.0],
            truncated_power_degrees: vec![2, 3, 4, 5],
            condition_cap: 1e12,
        };
        assert!(matches!(FunctionSpace::build(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn knot_on_the_boundary_is_rejected() {
        let cfg = SpaceConfig {
            beta: 4.0,
            polynomial_degree: 5,
            knots: vec![4.0],
            truncated_power_degrees: vec![2, 3, 4, 5],
            condition_cap: 1e12,
        };
        assert!(FunctionSpace::build(&cfg).is_err());
    }

    #[test]
    fn invalid_degree_sets_are_rejected() {
        let low = SpaceConfig {
            beta: 4.0,
            polynomial_degree: 5,
            knots: vec![0.0],
            truncated_power_degrees: vec![1, 2],
            condition_cap: 1e12,
        };
        assert!(FunctionSpace::build(&low).is_err());
        let high = SpaceConfig {
            beta: 4.0,
            polynomial_degree: 3,
            knots: vec![0.0],
            truncated_power_degrees: vec![4],
            condition_cap: 1e12,
        };
        assert!(FunctionSpace::build(&high).is_err());
    }

    #[test]
    fn condition_cap_error_names_generators() {
        let cfg = SpaceConfig {
            condition_cap: 1.0,
            ..SpaceConfig::default_config()
        };
        match FunctionSpace::build(&cfg) {
            Err(Error::IllConditioned { generators, .. }) => {
                assert!(!generators.is_empty());
            }
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn projection_of_x_squared_onto_linear_span() {
        let space = FunctionSpace::build(&tiny_config()).unwrap();
        let p = PiecewisePolynomial::monomial(2, 1.0);
        let c = space.project(&p).unwrap();
        assert_relative_eq!(c[0], 1.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(c[1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn projection_of_truncated_power_onto_linear_span() {
        // b = (1/2, 1/3) against gram diag(2, 2/3) -> (1/4, 1/2)
        let space = FunctionSpace::build(&tiny_config()).unwrap();
        let p = PiecewisePolynomial::truncated_power(0.0, 1, 1.0).unwrap();
        let c = space.project(&p).unwrap();
        assert_relative_eq!(c[0], 0.25, epsilon = 1e-13);
        assert_relative_eq!(c[1], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint() {
        let space = FunctionSpace::build(&SpaceConfig::default_config()).unwrap();
        let p = PiecewisePolynomial::truncated_power(0.5, 2, 4.0).unwrap();
        let gamma = space.project_ortho(&p).unwrap();
        let back = space.combine_ortho(&gamma);
        let gamma2 = space.project_ortho(&back).unwrap();
        let diff = (&gamma2 - &gamma).norm();
        assert!(
            diff <= 1e-10 * gamma.norm(),
            "projection roundtrip defect {diff}"
        );
        // <P p, v> = <p, v> for every generator v
        let proj = space.combine_ortho(&gamma);
        for (v, label) in space.generators().iter().zip(space.labels()) {
            let lhs = proj.integrate_product(v);
            let rhs = p.integrate_product(v);
            let scale = 1.0 + rhs.abs();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * scale,
                "self-adjointness defect at {label}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn projection_of_space_element_returns_its_coefficients() {
        let space = FunctionSpace::build(&tiny_config()).unwrap();
        // u = 3 - 2x
        let u = PiecewisePolynomial::from_monomial_coeffs(&[3.0, -2.0], 1.0);
        let c = space.project(&u).unwrap();
        assert_relative_eq!(c[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(c[1], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn space_config_json_rejects_unknown_keys() {
        let ok = r#"{"beta": 1.0, "polynomial_degree": 1}"#;
        let cfg: SpaceConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.truncated_power_degrees, vec![2, 3, 4, 5]);
        assert_eq!(cfg.condition_cap, 1e12);
        let bad = r#"{"beta": 1.0, "polynomial_degree": 1, "nope": 3}"#;
        assert!(serde_json::from_str::<SpaceConfig>(bad).is_err());
    }
}
