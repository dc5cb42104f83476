//! Density matrices and time-independent Lindblad generators.
//!
//! A purely dissipative master equation
//! `d/dt rho = sum_j ( L_j rho L_j^+ - 1/2 {L_j^+ L_j, rho} )`
//! is represented by a [`Liouvillian`] holding local [`LindbladOperator`]s
//! over a shared [`QubitRegister`]. Evolution is matrix-free: each operator
//! is compiled once into a sparse global form and applied directly to the
//! dense density matrix inside an adaptive embedded Runge-Kutta integrator.

mod density;
mod evolve;
mod json;
mod liouvillian;
mod operator;
mod register;
mod sparse;
mod steady;

pub use density::{fidelity_with_pure, trace_distance, DensityMatrix};
pub use evolve::{evolve, evolve_default};
pub use liouvillian::{apply_generator, Liouvillian};
pub use operator::{mats, LindbladOperator};
pub use register::QubitRegister;
pub use steady::{steady_state, steady_state_capped, DEFAULT_KERNEL_CAP};

pub(crate) use sparse::SparseOp;
