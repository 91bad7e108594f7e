//! A finite-dimensional algebra of restricted ultrafunctions.
//!
//! The crate builds, on a symmetric interval `[-beta, beta]`:
//!
//! * an exact piecewise-polynomial calculus and a function space spanned by
//!   global monomials plus truncated powers ([`ppoly`], [`space`]);
//! * Delta ultrafunctions (reproducing kernels), an independent point set
//!   `Sigma` and the dual Sigma (cardinal) basis with its eta integration
//!   tensors ([`bases`]);
//! * the algebra of value vectors over `Sigma` with pointwise product, the
//!   projection derivative satisfying the weak Leibniz rule
//!   `<Du,v> + <u,Dv> = [uv]` and the lift of arbitrary real functions
//!   ([`algebra`]);
//! * an embedding of distributions `Phi(T) = D^{d_T}(Psi(phi_T))` together
//!   with the duality pairing `T[phi] = <Phi(T), phi°>` ([`embedding`]);
//! * named check suites that measure every identity against its tolerance
//!   ([`suites`]).

pub mod algebra;
pub mod bases;
pub mod bump;
pub mod config;
pub mod embedding;
pub mod error;
pub mod export;
pub mod ppoly;
pub mod space;
pub mod suites;

pub use algebra::{AlgebraContext, DerivativeOperator, RestrictedUltrafunction};
pub use bases::{
    delta_at, eta_tensors, select_independent_points, sigma_basis, EtaTensors,
    IndependentPointSet, SigmaBasis,
};
pub use config::RunConfig;
pub use embedding::{
    embed, linearity_check, pair, DescriptorSpec, DistributionDescriptor, EmbeddingResult,
    LinearityReport, PairResult, Representative,
};
pub use error::{Error, Result};
pub use ppoly::PiecewisePolynomial;
pub use space::{FunctionSpace, GeneratingFamily, SpaceConfig};
pub use suites::{CheckRecord, Suite, SuiteReport};
