//! Exact distributional objects and Monte Carlo validation for linear tempered
//! fractional multistable motion (LTFmSM) and linear tempered multifractional
//! stable motion (LTmFSM).
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameter functions, process descriptions and kernels.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration with graded meshes
//!   toward declared singular points and certified left-tail truncation.
//! * [`charfn`]: finite-dimensional characteristic functions and the
//!   time/tempering scaling identity.
//! * [`quasinorm`]: the variable-exponent quasi-norm and its Hölder slopes.
//! * [`dependence`]: the codifference-type dependence measure of the noises
//!   and its asymptotic rate fits.
//! * [`simulate`]: symmetric stable sampling and grid discretisation of the
//!   stochastic integrals.
//! * [`analyze`]: estimators tying simulated ensembles to exact quantities.
//! * [`verify`]: the acceptance experiments, shared by the CLI and tests.

pub mod analyze;
pub mod charfn;
pub mod dependence;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod quasinorm;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Kind, ParamFunction, ProcessSpec};

/// Order-preserving map, parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
