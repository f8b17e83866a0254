//! Periodic internal waves between two layers of constant vorticity under a
//! rigid lid: linear dispersion, second-order expansions, a spectral
//! verifier for the nonlinear interface equation, Newton continuation of
//! bifurcation branches and streamline topology of the resulting flows.

pub mod asymptotics;
pub mod continuation;
pub mod dispersion;
pub mod elliptic;
pub mod error;
pub mod flowfield;
pub mod model;
pub mod numerics;
pub mod verify;

pub use error::{Error, Result};
pub use model::{BranchId, BranchPoint, FieldGrid, FluidParams, Layer, VerticalProfile, WaveProfile};
