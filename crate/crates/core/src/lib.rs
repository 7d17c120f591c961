//! # simplexgeo
//!
//! Information geometry of the probability simplex at finite truncation.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`sequence`] | simplex/sphere points, tangent vectors, ℓq norms, sequence generators |
//! | [`transforms`] | the q-root transform, its inverse and differential |
//! | [`metrics`] | Fisher–Rao inner product, ℓq Finsler norm, distances and geodesics |
//! | [`connections`] | α-connection, exponential connection, closed-form e-geodesics |
//! | [`flows`] | linear objective, gradient flow, RK4 oracle, LP solver |
//! | [`hamiltonian`] | momentum maps, Poisson brackets, quadratic Hamiltonians on CP^N |
//! | [`checks`] | seeded property suites with pinned tolerances |
//!
//! All kernels are generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.
//!
//! ```
//! use simplexgeo::{fr_distance, SimplexPoint64};
//!
//! let p = SimplexPoint64::new(vec![0.5, 0.5]).unwrap();
//! let r = SimplexPoint64::new(vec![0.9, 0.1]).unwrap();
//! let d = fr_distance(&p, &r).unwrap();
//! assert!((d - 0.4636476090008061).abs() < 1e-14);
//! ```

// `!(x > 0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod connections;
pub mod error;
pub mod flows;
pub mod hamiltonian;
pub mod metrics;
pub mod random;
pub mod scalar;
pub mod sequence;
pub mod transforms;

pub use connections::{
    alpha_connection, directional_derivative, e_connection_residual, e_geodesic_eval, make_e_geodesic, EGeodesic,
    FnField, VectorField,
};
pub use error::{Error, Result};
pub use flows::{
    flow_closed_form, flow_geodesic_correspondence, gradient_field, integrate_rk4, objective_value, solve_lp,
    LinearObjective, LpReport, Trajectory,
};
pub use hamiltonian::{
    hamiltonian_flow, hamiltonian_value, integrability_suite, kahler_gradient_check, momentum_s1, momentum_torus,
    poisson_bracket, wirtinger, ComplexPoint, IntegrabilityReport, ProjectivePoint, QuadraticHamiltonian, ScalarField,
};
pub use metrics::{finsler_norm, fr_distance, fr_geodesic, fr_inner, sphere_project};
pub use num_complex::Complex;
pub use scalar::Scalar;
pub use sequence::{
    lq_norm, make_simplex_point, make_sphere_point, make_tangent, refine, Normalization, SequenceKind, SequenceSpec,
    SimplexPoint, SpherePoint, SphereTangent, TangentVector,
};
pub use transforms::RootTransform;

pub type SimplexPoint64 = SimplexPoint<f64>;
pub type TangentVector64 = TangentVector<f64>;
pub type SpherePoint64 = SpherePoint<f64>;
pub type SphereTangent64 = SphereTangent<f64>;
pub type RootTransform64 = RootTransform<f64>;
pub type EGeodesic64 = EGeodesic<f64>;
pub type LinearObjective64 = LinearObjective<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type ComplexPoint64 = ComplexPoint<f64>;
pub type ProjectivePoint64 = ProjectivePoint<f64>;
pub type QuadraticHamiltonian64 = QuadraticHamiltonian<f64>;

pub type SimplexPoint32 = SimplexPoint<f32>;
pub type TangentVector32 = TangentVector<f32>;
pub type SpherePoint32 = SpherePoint<f32>;
pub type RootTransform32 = RootTransform<f32>;
pub type LinearObjective32 = LinearObjective<f32>;
pub type ComplexPoint32 = ComplexPoint<f32>;
