//! The algebra of restricted ultrafunctions: value vectors over the
//! independent point set `Sigma`.
//!
//! A restricted ultrafunction is the restriction of a space element to
//! `Sigma`; conversely every value vector extends uniquely through the Sigma
//! basis, `u~ = sum_a u(a) sigma_a`. The pointwise product lives on the value
//! vectors (the extension of a product generally leaves the space). The
//! scalar product integrates extensions, `<u,v> = sum u(a) v(b) eta_ab`, and
//! the derivative is the projection derivative conjugated by restriction,
//! `D = Psi o P_V o d/dx o Psi^{-1}`, assembled once per context as an N x N
//! matrix on value vectors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bases::{
    eta_tensors, evaluation_matrix, sigma_basis, EtaTensors, IndependentPointSet, SigmaBasis,
};
use crate::error::{Error, Result};
use crate::ppoly::PiecewisePolynomial;
use crate::space::FunctionSpace;

/// Default bound on distribution orders handled by a context.
pub const DEFAULT_D_MAX: usize = 6;

/// The matrix of the restricted derivative acting on value vectors.
#[derive(Debug, Clone)]
pub struct DerivativeOperator {
    matrix: DMatrix<f64>,
}

impl DerivativeOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, values: &DVector<f64>) -> DVector<f64> {
        &self.matrix * values
    }
}

/// Immutable bundle of everything the algebra needs: the function space, the
/// independent points, the Sigma basis, the eta tensors and the derivative
/// matrix. Contexts are shared behind `Arc` and never mutated.
#[derive(Debug)]
pub struct AlgebraContext {
    space: FunctionSpace,
    sigma: IndependentPointSet,
    basis: SigmaBasis,
    eta: EtaTensors,
    deriv: DerivativeOperator,
    /// Orthonormal-basis evaluations over `Sigma`.
    eval_ortho: DMatrix<f64>,
    d_max: usize,
}

impl AlgebraContext {
    /// Assembles a context from a space and a selected point set.
    pub fn new(
        space: FunctionSpace,
        sigma: IndependentPointSet,
        d_max: usize,
    ) -> Result<Arc<Self>> {
        let n = space.dimension();
        if sigma.len() != n {
            return Err(Error::Config(format!(
                "point set size {} does not match space dimension {n}",
                sigma.len()
            )));
        }
        let basis = sigma_basis(&space, &sigma)?;
        let eta = eta_tensors(&space, &basis);
        let eval_ortho = evaluation_matrix(&space, &sigma)?;

        // A[i][j] = \int e_i e_j'; derivative in orthonormal coordinates is
        // Gram^{-1} A, conjugated to value space by the evaluation matrix.
        let mut moments = DMatrix::zeros(n, n);
        for (j, e) in space.ortho_basis().iter().enumerate() {
            let de = e.derivative()?;
            for (i, f) in space.ortho_basis().iter().enumerate() {
                moments[(i, j)] = f.integrate_product(&de);
            }
        }
        let d_ortho = space.ortho_chol_solve_matrix(&moments);
        let matrix = &eval_ortho * d_ortho * basis.ortho_coeffs();

        Ok(Arc::new(Self {
            space,
            sigma,
            basis,
            eta,
            deriv: DerivativeOperator { matrix },
            eval_ortho,
            d_max,
        }))
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    pub fn sigma(&self) -> &IndependentPointSet {
        &self.sigma
    }

    pub fn points(&self) -> &[f64] {
        self.sigma.points()
    }

    pub fn basis(&self) -> &SigmaBasis {
        &self.basis
    }

    pub fn eta(&self) -> &EtaTensors {
        &self.eta
    }

    pub fn derivative_operator(&self) -> &DerivativeOperator {
        &self.deriv
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Kernel matrix `K[a][b] = delta_a(b)` over `Sigma`.
    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        let solved = self
            .space
            .ortho_chol_solve_matrix(&self.eval_ortho.transpose());
        let k = &self.eval_ortho * solved;
        0.5 * (&k + k.transpose())
    }

    /// Condition estimate of the kernel matrix (for reports).
    pub fn kernel_condition(&self) -> f64 {
        let svd = self.kernel_matrix().svd(false, false);
        svd.singular_values.max() / svd.singular_values.min()
    }

    /// Restriction of a space element given by generator coefficients:
    /// `values[i] = u(a_i)`.
    pub fn restrict(self: &Arc<Self>, coeffs: &DVector<f64>) -> Result<RestrictedUltrafunction> {
        if coeffs.len() != self.dimension() {
            return Err(Error::Config(format!(
                "coefficient vector length {} does not match dimension {}",
                coeffs.len(),
                self.dimension()
            )));
        }
        self.restrict_ortho(&self.space.raw_to_ortho(coeffs))
    }

    /// Restriction of a space element in orthonormal coordinates.
    pub fn restrict_ortho(
        self: &Arc<Self>,
        gamma: &DVector<f64>,
    ) -> Result<RestrictedUltrafunction> {
        if gamma.len() != self.dimension() {
            return Err(Error::Config(format!(
                "coordinate vector length {} does not match dimension {}",
                gamma.len(),
                self.dimension()
            )));
        }
        Ok(RestrictedUltrafunction {
            ctx: Arc::clone(self),
            values: &self.eval_ortho * gamma,
        })
    }

    /// Restriction of an arbitrary piecewise polynomial on the same domain
    /// (pointwise sampling; equals `restrict` for space elements).
    pub fn restrict_function(
        self: &Arc<Self>,
        p: &PiecewisePolynomial,
    ) -> Result<RestrictedUltrafunction> {
        let values = DVector::from_iterator(
            self.dimension(),
            self.points()
                .iter()
                .map(|&a| p.evaluate(a))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(RestrictedUltrafunction {
            ctx: Arc::clone(self),
            values,
        })
    }

    /// The lift `f°`: samples an arbitrary real function at the points of
    /// `Sigma`. Non-finite samples are reported as lift failures.
    pub fn lift(
        self: &Arc<Self>,
        f: impl Fn(f64) -> f64,
    ) -> Result<RestrictedUltrafunction> {
        let mut values = DVector::zeros(self.dimension());
        for (i, &a) in self.points().iter().enumerate() {
            let v = f(a);
            if !v.is_finite() {
                return Err(Error::Lift(a));
            }
            values[i] = v;
        }
        Ok(RestrictedUltrafunction {
            ctx: Arc::clone(self),
            values,
        })
    }

    /// Wraps an explicit value vector as a restricted ultrafunction.
    pub fn from_values(self: &Arc<Self>, values: DVector<f64>) -> Result<RestrictedUltrafunction> {
        if values.len() != self.dimension() {
            return Err(Error::Config(format!(
                "value vector length {} does not match dimension {}",
                values.len(),
                self.dimension()
            )));
        }
        Ok(RestrictedUltrafunction {
            ctx: Arc::clone(self),
            values,
        })
    }
}

/// A value vector over `Sigma`, tied to its context.
#[derive(Debug, Clone)]
pub struct RestrictedUltrafunction {
    ctx: Arc<AlgebraContext>,
    values: DVector<f64>,
}

impl RestrictedUltrafunction {
    pub fn context(&self) -> &Arc<AlgebraContext> {
        &self.ctx
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    fn same_context(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// Extension coefficients over the generating family:
    /// `u~ = sum_a u(a) sigma_a`.
    pub fn extend(&self) -> Result<DVector<f64>> {
        self.ctx.space().ortho_to_raw(&self.extend_ortho())
    }

    /// Extension in orthonormal coordinates.
    pub fn extend_ortho(&self) -> DVector<f64> {
        self.ctx.basis().ortho_coeffs() * &self.values
    }

    /// The extension as a piecewise polynomial.
    pub fn extension(&self) -> PiecewisePolynomial {
        self.ctx.space().combine_ortho(&self.extend_ortho())
    }

    /// Value of the extension at an arbitrary point of the interval.
    pub fn evaluate_extension(&self, x: f64) -> Result<f64> {
        self.ctx.space().evaluate_ortho(&self.extend_ortho(), x)
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_context(other)?;
        Ok(Self {
            ctx: Arc::clone(&self.ctx),
            values: &self.values + &other.values,
        })
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_context(other)?;
        Ok(Self {
            ctx: Arc::clone(&self.ctx),
            values: &self.values - &other.values,
        })
    }

    /// Pointwise product (the algebra multiplication).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_context(other)?;
        Ok(Self {
            ctx: Arc::clone(&self.ctx),
            values: self.values.component_mul(&other.values),
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            ctx: Arc::clone(&self.ctx),
            values: c * &self.values,
        }
    }

    /// The scalar product `<u,v> = \int u~ v~ = sum u(a) v(b) eta_ab`.
    pub fn scalar_product(&self, other: &Self) -> Result<f64> {
        self.same_context(other)?;
        Ok((self.ctx.eta().eta_ab() * &other.values).dot(&self.values))
    }

    /// `sqrt(<u,u>)`.
    pub fn norm(&self) -> f64 {
        let q = (self.ctx.eta().eta_ab() * &self.values).dot(&self.values);
        q.max(0.0).sqrt()
    }

    /// The integral of the extension, `\int u~ = sum_a u(a) eta_a`.
    pub fn integral(&self) -> f64 {
        self.ctx.eta().eta_a().dot(&self.values)
    }

    /// The restricted derivative `D u`.
    pub fn derivative(&self) -> Self {
        Self {
            ctx: Arc::clone(&self.ctx),
            values: self.ctx.derivative_operator().apply(&self.values),
        }
    }

    /// Applies the derivative `order` times.
    pub fn derivative_n(&self, order: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..order {
            out = out.derivative();
        }
        out
    }

    /// The boundary bracket `[uv] = u(beta) v(beta) - u(-beta) v(-beta)`,
    /// read off the stored values at the extreme points of `Sigma`.
    pub fn boundary_bracket(&self, other: &Self) -> Result<f64> {
        self.same_context(other)?;
        let last = self.values.len() - 1;
        Ok(self.values[last] * other.values[last] - self.values[0] * other.values[0])
    }
}
