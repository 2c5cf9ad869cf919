//! Desk-scale simulator and analysis toolkit for photon-number-selective
//! phase gates on a dispersively coupled qubit-cavity system.
//!
//! The cavity lives in a truncated Fock space; the qubit contributes a
//! two-level index. Free evolution is diagonal with per-level energies
//!
//! ```text
//! E_g(n) = delta n + kerr/2 n(n-1) + kerr2/6 n(n-1)(n-2)
//! E_e(n) = E_g(n) + chi n + chi2/2 n(n-1) + chi3/6 n(n-1)(n-2)
//! ```
//!
//! so every protocol here is about reading, cancelling, or exploiting the
//! relative phases that structure generates:
//!
//! * [`experiments::interference`] / [`experiments::hamiltonian_fit`] —
//!   extract all six energy coefficients from phase-interference scans.
//! * [`experiments::kerr`] — cancel self-Kerr dephasing with diagonal phase
//!   gates, ideally or with gate pulses that run concurrently with the
//!   evolution they cancel.
//! * [`experiments::fock_prep`] — build Fock states from
//!   displacement / phase-gate / displacement sandwiches and chain them up
//!   the number ladder.
//!
//! Supporting layers: exact diagonal gates ([`snap`]), a pulse-level
//! simulator of number-selective drives ([`pulse`]), open-system evolution
//! ([`dispersive::lindblad_evolve`]), Wigner maps and density-matrix
//! reconstruction ([`analysis`]), deterministic derivative-free optimizers
//! ([`optimize`]), file formats ([`io`]), and TOML device configuration
//! ([`config`]).
//!
//! Everything is deterministic: seeded noise, fixed iteration orders, and
//! parallel loops that collect by index (see [`par`]), so parallel and
//! sequential builds produce identical artifacts.

// Validation guards are written `!(x > 0.0)` on purpose: the negation is
// true for NaN, which `x <= 0.0` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod dispersive;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod io;
pub mod optimize;
pub mod par;
pub mod pulse;
pub mod snap;

pub use config::{load_config, SimConfig};
pub use dispersive::{
    cavity_populations, free_evolve, joint_density, level_energy, lindblad_evolve,
    phase_difference_rate, qubit_excited_population, reference_frame_shift, DecoherenceParams,
    HamiltonianParams,
};
pub use error::{ErrorClass, Result, SimError};
pub use fock::{fidelity, CavityState, DensityMatrix, Operator, C64};
pub use pulse::{
    simulate_drive, snap_pulse_pair, snap_pulse_pair_multi, JointState, PulseEnvelope, PulseSpec,
    PulseWidth, SnapPulseProgram, Tone,
};
pub use snap::{apply_snap, snap, wrap_phase, PhaseVector};
