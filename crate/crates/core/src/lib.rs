//! Simulation of the T³-invariant hypersymplectic flow `d/dt alpha = (V^{-1}(alpha/V)')'`
//! on T⁴, with numerical audits of its qualitative properties.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// NaN must fail range checks, hence `!(x <= tol)`; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod audit;
pub mod circle;
pub mod error;
pub mod flow;
pub mod gauge;
pub mod geometry;
pub mod io;
pub mod mat3;
pub mod scalar;

pub use error::{FlowError, Result};

pub type Mat3d = mat3::Mat3<f64>;
pub type Mat3f = mat3::Mat3<f32>;
pub type SymMat3d = mat3::SymMat3<f64>;
pub type SymMat3f = mat3::SymMat3<f32>;
pub type Vec3d = mat3::Vec3<f64>;
pub type CircleGridD = circle::CircleGrid<f64>;
pub type ScalarFieldD = circle::ScalarField<f64>;
pub type Mat3FieldD = circle::Mat3Field<f64>;
pub type SymFieldD = circle::SymField<f64>;
pub type FlowStateD = flow::FlowState<f64>;
pub type FlowStateF = flow::FlowState<f32>;
