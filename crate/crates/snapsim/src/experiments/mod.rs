//! The three measurement/control protocols built on the core simulator:
//!
//! * phase-interference scans and the Hamiltonian-parameter fits on top of
//!   them ([`interference`], [`hamiltonian_fit`]),
//! * self-Kerr cancellation with phase gates concurrent with free evolution
//!   ([`kerr`]),
//! * Fock-state preparation from displacement/phase-gate sandwiches and the
//!   ladder extension ([`fock_prep`]).

pub mod fock_prep;
pub mod hamiltonian_fit;
pub mod interference;
pub mod kerr;

pub use fock_prep::{
    apply_dsd, chain_fock_ladder, fock_creation_pulsed_fidelity, ladder_step,
    optimize_fock_creation, FockCreationResult, LadderReport, LadderStep,
};
pub use hamiltonian_fit::{
    fit_excited, fit_ground, fit_hamiltonian, fit_rate_polynomial, run_reference_extraction,
    standard_scan_grids, ExcitedFit, ExtractionOutcome, Fitted, GroundFit, HamiltonianFitReport,
};
pub use interference::{
    default_theta_grid, fit_sinusoid, interference_scan, phase_evolution_experiment,
    subtract_probe_bias, GateMode, InterferenceCurve, NoiseSpec, PhaseEvolutionData, PhaseTrace,
    ScanSetup, SinusoidFit,
};
pub use kerr::{
    kerr_correction_step, kerr_echo_sequence, CorrectionMode, KerrEchoReport, KerrStepResult,
};
