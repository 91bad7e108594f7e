//! Delta ultrafunctions, independent point sets and the dual Sigma basis.
//!
//! The Delta ultrafunction centered at `q` is the reproducing kernel of the
//! space: the unique element with `\int delta_q v = v(q)` for every space
//! element `v`; in the orthonormal basis it is `sum_j e_j(q) e_j(x)`. A set of
//! independent points `Sigma` (containing both endpoints) makes the Delta
//! functions a basis; the Sigma basis is its dual, the cardinal interpolation
//! family with `sigma_a(b) = delta_ab`. The eta tensors
//! `eta_a = \int sigma_a` and `eta_ab = \int sigma_a sigma_b` turn integrals
//! and scalar products of value vectors into finite sums.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ppoly::PiecewisePolynomial;
use crate::space::FunctionSpace;

/// Relative pivot threshold below which a forced point counts as dependent.
const DEPENDENCY_TOL: f64 = 1e-10;

/// Candidate grid density relative to the space dimension.
const CANDIDATE_FACTOR: usize = 4;

/// An ordered set of independent points in `[-beta, beta]`, with the endpoints
/// always present.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentPointSet {
    points: Vec<f64>,
}

impl IndependentPointSet {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of a point equal to `q`, if present.
    pub fn index_of(&self, q: f64) -> Option<usize> {
        self.points.iter().position(|p| *p == q)
    }
}

/// Coefficients of the Delta ultrafunction at `q` over the generating family.
pub fn delta_at(space: &FunctionSpace, q: f64) -> Result<DVector<f64>> {
    let gamma = delta_at_ortho(space, q)?;
    space.ortho_to_raw(&gamma)
}

/// Delta ultrafunction in orthonormal coordinates: solves
/// `\int delta_q e_i = e_i(q)` against the orthonormal Gram.
pub(crate) fn delta_at_ortho(space: &FunctionSpace, q: f64) -> Result<DVector<f64>> {
    let row = space.eval_ortho(q)?;
    Ok(space.ortho_chol_solve(&row))
}

/// Default candidate grid for point selection: Chebyshev points of the
/// interval, the knots, and the required points.
pub fn default_candidates(space: &FunctionSpace, required: &[f64]) -> Vec<f64> {
    let beta = space.beta();
    let m = CANDIDATE_FACTOR * space.dimension();
    let mut points: Vec<f64> = (0..m)
        .map(|j| -beta * (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos())
        .collect();
    points.extend_from_slice(space.family().knots());
    points.extend_from_slice(required);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    points
}

/// Selects `N = dim` independent points: the required points are forced first
/// (erroring if one of them is dependent on its predecessors), the rest are
/// chosen greedily by maximal residual pivot of the candidate evaluation
/// matrix, ties broken by the lowest candidate index. The result is sorted.
pub fn select_independent_points(
    space: &FunctionSpace,
    required: &[f64],
    candidates: &[f64],
) -> Result<IndependentPointSet> {
    let n = space.dimension();
    if candidates.len() < n {
        return Err(Error::SelectionFailure {
            needed: n,
            selected: 0,
            candidates: candidates.len(),
        });
    }
    for r in required {
        if !candidates.contains(r) {
            return Err(Error::Config(format!(
                "required point {r} is not among the candidates"
            )));
        }
    }

    let rows: Vec<DVector<f64>> = candidates
        .iter()
        .map(|&a| space.eval_ortho(a))
        .collect::<Result<_>>()?;
    let scale = rows.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let threshold = DEPENDENCY_TOL * scale;

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let residual = |row: &DVector<f64>, basis: &[DVector<f64>]| {
        let mut v = row.clone();
        for _ in 0..2 {
            for q in basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        v
    };

    let mut chosen: Vec<f64> = Vec::with_capacity(n);
    for &point in required {
        if chosen.len() == n {
            return Err(Error::Config(format!(
                "more required points than the space dimension {n}"
            )));
        }
        let idx = candidates.iter().position(|c| *c == point).unwrap();
        let v = residual(&rows[idx], &basis);
        let pivot = v.norm();
        if pivot < threshold {
            return Err(Error::DependentPoint {
                point,
                pivot,
                threshold,
            });
        }
        basis.push(v / pivot);
        chosen.push(point);
    }

    let mut available: Vec<usize> = (0..candidates.len())
        .filter(|i| !chosen.contains(&candidates[*i]))
        .collect();
    while chosen.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for &i in &available {
            let pivot = residual(&rows[i], &basis).norm();
            if best.map_or(true, |(_, b)| pivot > b) {
                best = Some((i, pivot));
            }
        }
        match best {
            Some((i, pivot)) if pivot >= threshold => {
                basis.push(residual(&rows[i], &basis).normalize());
                chosen.push(candidates[i]);
                available.retain(|j| *j != i);
            }
            _ => {
                return Err(Error::SelectionFailure {
                    needed: n,
                    selected: chosen.len(),
                    candidates: candidates.len(),
                });
            }
        }
    }

    chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let beta = space.beta();
    if chosen[0] != -beta || *chosen.last().unwrap() != beta {
        return Err(Error::Config(format!(
            "independent point set must contain both endpoints -{beta} and {beta}"
        )));
    }
    Ok(IndependentPointSet { points: chosen })
}

/// The Sigma (cardinal) basis dual to the Delta basis over `Sigma`:
/// `sigma_a(b) = delta_ab`. Coefficients are stored in orthonormal
/// coordinates, one column per point.
#[derive(Debug, Clone)]
pub struct SigmaBasis {
    coeffs: DMatrix<f64>,
}

impl SigmaBasis {
    /// Orthonormal coordinates of all cardinal functions (column `b` is
    /// `sigma_b`).
    pub fn ortho_coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// Generator-family coefficients of all cardinal functions.
    pub fn raw_coeffs(&self, space: &FunctionSpace) -> Result<DMatrix<f64>> {
        let n = self.coeffs.nrows();
        let mut out = DMatrix::zeros(n, self.coeffs.ncols());
        for b in 0..self.coeffs.ncols() {
            let raw = space.ortho_to_raw(&DVector::from(self.coeffs.column(b).clone_owned()))?;
            out.set_column(b, &raw);
        }
        Ok(out)
    }

    /// The cardinal function `sigma_b` as a piecewise polynomial.
    pub fn cardinal(&self, space: &FunctionSpace, b: usize) -> PiecewisePolynomial {
        space.combine_ortho(&DVector::from(self.coeffs.column(b).clone_owned()))
    }

    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.ncols() == 0
    }
}

/// Builds the Sigma basis: solves the evaluation system `sigma_b(a_i) =
/// delta_ib` over the independent points.
pub fn sigma_basis(space: &FunctionSpace, sigma: &IndependentPointSet) -> Result<SigmaBasis> {
    let n = space.dimension();
    if sigma.len() != n {
        return Err(Error::Config(format!(
            "point set size {} does not match the space dimension {n}",
            sigma.len()
        )));
    }
    let eval = evaluation_matrix(space, sigma)?;
    let lu = eval.lu();
    let coeffs = lu
        .solve(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Config("evaluation matrix over Sigma is singular".into()))?;
    Ok(SigmaBasis { coeffs })
}

/// `E[i][j] = e_j(a_i)` over the independent points (orthonormal basis).
pub(crate) fn evaluation_matrix(
    space: &FunctionSpace,
    sigma: &IndependentPointSet,
) -> Result<DMatrix<f64>> {
    let n = space.dimension();
    let mut eval = DMatrix::zeros(n, n);
    for (i, &a) in sigma.points().iter().enumerate() {
        let row = space.eval_ortho(a)?;
        eval.row_mut(i).copy_from(&row.transpose());
    }
    Ok(eval)
}

/// Integration tensors of the Sigma basis.
#[derive(Debug, Clone)]
pub struct EtaTensors {
    eta_a: DVector<f64>,
    eta_ab: DMatrix<f64>,
}

impl EtaTensors {
    /// Quadrature weights `eta_a = \int sigma_a`.
    pub fn eta_a(&self) -> &DVector<f64> {
        &self.eta_a
    }

    /// Sigma-basis Gram matrix `eta_ab = \int sigma_a sigma_b`.
    pub fn eta_ab(&self) -> &DMatrix<f64> {
        &self.eta_ab
    }
}

/// Exact eta tensors via the orthonormal moments of the cardinal functions.
pub fn eta_tensors(space: &FunctionSpace, basis: &SigmaBasis) -> EtaTensors {
    let n = basis.len();
    let moments = DVector::from_iterator(
        n,
        space.ortho_basis().iter().map(|e| e.integrate()),
    );
    let eta_a = basis.ortho_coeffs().transpose() * &moments;
    let eta_ab = basis.ortho_coeffs().transpose() * space.ortho_gram() * basis.ortho_coeffs();
    let eta_ab = 0.5 * (&eta_ab + eta_ab.transpose());
    EtaTensors { eta_a, eta_ab }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceConfig;
    use approx::assert_relative_eq;

    fn tiny_space() -> FunctionSpace {
        FunctionSpace::build(&SpaceConfig {
            beta: 1.0,
            polynomial_degree: 1,
            knots: vec![],
            truncated_power_degrees: vec![2, 3, 4, 5],
            condition_cap: 1e12,
        })
        .unwrap()
    }

    fn quadratic_space() -> FunctionSpace {
        FunctionSpace::build(&SpaceConfig {
            beta: 1.0,
            polynomial_degree: 2,
            knots: vec![],
            truncated_power_degrees: vec![2],
            condition_cap: 1e12,
        })
        .unwrap()
    }

    fn tiny_sigma(space: &FunctionSpace) -> IndependentPointSet {
        select_independent_points(space, &[-1.0, 1.0], &[-1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn delta_at_center_of_linear_span_is_half() {
        let space = tiny_space();
        let d = delta_at(&space, 0.0).unwrap();
        assert_relative_eq!(d[0], 0.5, epsilon = 1e-13);
        assert_relative_eq!(d[1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn delta_at_right_end_is_affine_kernel() {
        // 1/2 + (3/2) x
        let space = tiny_space();
        let d = delta_at(&space, 1.0).unwrap();
        assert_relative_eq!(d[0], 0.5, epsilon = 1e-13);
        assert_relative_eq!(d[1], 1.5, epsilon = 1e-13);
    }

    #[test]
    fn delta_reproduces_affine_values() {
        // \int delta_1 (a + b x) = a + b
        let space = tiny_space();
        let d = delta_at(&space, 1.0).unwrap();
        let delta = space.combine_raw(&d);
        let (a, b) = (0.7, -0.4);
        let f = PiecewisePolynomial::from_monomial_coeffs(&[a, b], 1.0);
        assert_relative_eq!(delta.integrate_product(&f), a + b, epsilon = 1e-13);
    }

    #[test]
    fn delta_outside_domain_errors() {
        let space = tiny_space();
        assert!(matches!(
            delta_at(&space, 2.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn selection_of_two_points_on_linear_span() {
        let space = tiny_space();
        let sigma = tiny_sigma(&space);
        assert_eq!(sigma.points(), &[-1.0, 1.0]);
    }

    #[test]
    fn dependent_required_point_errors() {
        // a repeated required point has a zero residual row, the same failure
        // as forcing a point where all space elements vanish
        let space = tiny_space();
        let err = select_independent_points(&space, &[-1.0, -1.0], &[-1.0, 0.0, 1.0]);
        assert!(matches!(err, Err(Error::DependentPoint { .. })));
    }

    #[test]
    fn degenerate_one_dimensional_space_cannot_cover_both_endpoints() {
        let space = FunctionSpace::build(&SpaceConfig {
            beta: 1.0,
            polynomial_degree: 0,
            knots: vec![],
            truncated_power_degrees: vec![],
            condition_cap: 1e12,
        })
        .unwrap();
        let err = select_independent_points(&space, &[-1.0], &[-1.0, 0.0, 1.0]);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn greedy_selection_picks_the_center_for_quadratics() {
        let space = quadratic_space();
        let grid: Vec<f64> = (0..21).map(|i| -1.0 + i as f64 * 0.1).collect();
        let mut candidates = grid;
        candidates.push(-1.0);
        candidates.push(1.0);
        candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        candidates.dedup();
        let sigma = select_independent_points(&space, &[-1.0, 1.0], &candidates).unwrap();
        assert_eq!(sigma.points().len(), 3);
        assert_relative_eq!(sigma.points()[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn too_few_candidates_fail() {
        let space = quadratic_space();
        let err = select_independent_points(&space, &[-1.0, 1.0], &[-1.0, 1.0]);
        assert!(matches!(err, Err(Error::SelectionFailure { .. })));
    }

    #[test]
    fn sigma_basis_of_linear_span_is_hat_functions() {
        let space = tiny_space();
        let sigma = tiny_sigma(&space);
        let basis = sigma_basis(&space, &sigma).unwrap();
        let left = basis.cardinal(&space, 0);
        let right = basis.cardinal(&space, 1);
        for &x in &[-1.0, -0.5, 0.0, 0.25, 1.0] {
            assert_relative_eq!(left.evaluate(x).unwrap(), (1.0 - x) / 2.0, epsilon = 1e-13);
            assert_relative_eq!(right.evaluate(x).unwrap(), (1.0 + x) / 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn sigma_basis_of_quadratic_span_is_lagrange() {
        let space = quadratic_space();
        let sigma =
            select_independent_points(&space, &[-1.0, 1.0], &[-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
        assert_eq!(sigma.points(), &[-1.0, 0.0, 1.0]);
        let basis = sigma_basis(&space, &sigma).unwrap();
        // Lagrange polynomials x(x-1)/2, 1-x^2, x(x+1)/2
        let oracle: [fn(f64) -> f64; 3] = [
            |x| x * (x - 1.0) / 2.0,
            |x| 1.0 - x * x,
            |x| x * (x + 1.0) / 2.0,
        ];
        for (b, f) in oracle.iter().enumerate() {
            let card = basis.cardinal(&space, b);
            for &x in &[-1.0, -0.3, 0.0, 0.6, 1.0] {
                assert_relative_eq!(card.evaluate(x).unwrap(), f(x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cardinal_property_on_the_default_space() {
        let space = FunctionSpace::build(&SpaceConfig::default_config()).unwrap();
        let required = [-4.0, 0.0, 4.0];
        let candidates = default_candidates(&space, &required);
        let sigma = select_independent_points(&space, &required, &candidates).unwrap();
        let basis = sigma_basis(&space, &sigma).unwrap();
        for (a, &pa) in sigma.points().iter().enumerate() {
            let card = basis.cardinal(&space, a);
            assert_relative_eq!(card.evaluate(pa).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn eta_tensors_of_linear_span_are_hat_integrals() {
        let space = tiny_space();
        let sigma = tiny_sigma(&space);
        let basis = sigma_basis(&space, &sigma).unwrap();
        let eta = eta_tensors(&space, &basis);
        assert_relative_eq!(eta.eta_a()[0], 1.0, epsilon = 1e-13);
        assert_relative_eq!(eta.eta_a()[1], 1.0, epsilon = 1e-13);
        let ab = eta.eta_ab();
        assert_relative_eq!(ab[(0, 0)], 2.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(ab[(0, 1)], 1.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(ab[(1, 0)], 1.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(ab[(1, 1)], 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn eta_weights_of_quadratic_span_are_simpson() {
        let space = quadratic_space();
        let sigma =
            select_independent_points(&space, &[-1.0, 1.0], &[-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
        let basis = sigma_basis(&space, &sigma).unwrap();
        let eta = eta_tensors(&space, &basis);
        assert_relative_eq!(eta.eta_a()[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(eta.eta_a()[1], 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(eta.eta_a()[2], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eta_weights_sum_to_interval_length() {
        let space = FunctionSpace::build(&SpaceConfig::default_config()).unwrap();
        let required = [-4.0, 0.0, 4.0];
        let candidates = default_candidates(&space, &required);
        let sigma = select_independent_points(&space, &required, &candidates).unwrap();
        let basis = sigma_basis(&space, &sigma).unwrap();
        let eta = eta_tensors(&space, &basis);
        assert_relative_eq!(eta.eta_a().sum(), 8.0, epsilon = 1e-9);
    }
}
