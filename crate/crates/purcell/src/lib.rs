//! Purcell-enhanced photon extraction from emitter-cavity systems with
//! intra-cavity polarisation coupling.
//!
//! The crate models four level schemes in the single-excitation subspace
//! (two-level, two-level in a birefringent cavity, three-level with
//! Zeeman-split ground states, and an N-level chain of coupled ground
//! states), evolves their non-Hermitian effective Hamiltonians, computes
//! photon extraction budgets by independent time-domain and steady-state
//! routes, optimizes splittings and decay rates, and applies the
//! cavity-length scaling laws to design trade-off studies.
//!
//! Entry points:
//! * [`model`] — rate sets and Hamiltonian builders;
//! * [`dynamics`] — trajectories, emission budgets, purity, time averages;
//! * [`optimize`] — derivative-free maximizers and enhancement curves;
//! * [`design`] — length/birefringence sweeps and the `takahashi` preset.

pub mod design;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod optimize;

pub use error::{Error, Result};
pub use model::{
    build_n_level_chain, build_three_level, build_two_level, build_two_level_birefringent,
    transform_basis, EffectiveHamiltonian, ModelSpec, PhotonBasis, Rates, Scheme,
};
