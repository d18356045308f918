//! Periodic heat kernel, heat semigroup and the stationary stochastic heat
//! driver with its spatial rough-path lift.

pub mod driver;
pub mod kernel;
pub mod spectral;

pub use driver::{
    mode_variance, sample_stationary_heat, spatial_grid, stationary_field, HeatDriverSample,
    SliceNorm,
};
pub use kernel::{
    derivative_profile, derivative_profile_function, dx_heat_kernel, dx_heat_kernel_scaled,
    heat_kernel, heat_kernel_spectral,
};
pub use spectral::{apply_semigroup, SemigroupKind, SpectralField};
