//! Kernel families, the structured kernel matrix and its spectral data, the
//! scaling sequences `(a_T, mu_T)` and the resolvent.

mod function;
mod matrix;
pub mod resolvent;
mod sequence;
mod soe;

pub use function::{l1_norm, l1_norm_quadrature, CombinedKernel, ExpComponent, KernelFunction, KernelShape};
pub use matrix::{
    build_kernel_matrix, eigen_structure, validate_assumptions, AssumptionReport, KernelMatrixSpec,
    SpectralData, TailConstants, CRITICALITY_TOLERANCE,
};
pub use resolvent::{resolvent_psi, Mat2};
pub use sequence::{AsymptoticSequence, Scaling};
pub use soe::{nnls, sup_difference, SoeFit};
