//! Fractional polynomial optimization.
//!
//! Maximizes `f(x)/g(x)` over `{x : h_i(x) ≥ 0}` with Dinkelbach's parametric
//! iteration, solving every inner polynomial problem through a Lasserre
//! moment relaxation and an in-crate interior-point SDP solver.
//!
//! The algebra is generic over the scalar type: polynomials and moment
//! specs accept any exact [`Coeff`] ring (so tests can use rationals), the
//! numeric solvers any [`Real`] (`f32` or `f64`). The aliases below name the
//! common instantiations.

pub mod dinkelbach;
pub mod eeapp;
pub mod lasserre;
pub mod momentidx;
pub mod polycore;
pub mod scalar;
pub mod sdpsolve;
pub mod sosdual;

pub use scalar::{Coeff, Real};

pub type Polynomial64 = polycore::Polynomial<f64>;
pub type Polynomial32 = polycore::Polynomial<f32>;
pub type SdpProblem64 = sdpsolve::SdpProblem<f64>;
pub type SdpSolution64 = sdpsolve::SdpSolution<f64>;
