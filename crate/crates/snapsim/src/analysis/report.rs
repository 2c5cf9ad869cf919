//! Fidelity reporting against coherent references.

use crate::error::Result;
use crate::fock::{CavityState, C64};
use crate::optimize::golden_section_min;

/// How well a state matches a reference coherent amplitude, plus the best
/// coherent match along the same phase ray (distinguishes "dephased in
/// place" from "drifted to another amplitude").
#[derive(Debug, Clone, Copy)]
pub struct CoherentFidelityReport {
    /// Reference amplitude the report was requested against.
    pub beta: C64,
    /// |<beta|psi>|^2.
    pub fidelity_at_reference: f64,
    /// Amplitude on the ray through `beta` maximizing the overlap.
    pub best_beta: C64,
    /// Overlap at `best_beta`.
    pub best_fidelity: f64,
}

/// Compare `state` against the coherent state |beta> and search the ray
/// {r * beta/|beta|, r >= 0} for the best coherent match.
pub fn coherent_fidelity_report(state: &CavityState, beta: C64) -> Result<CoherentFidelityReport> {
    let dim = state.dim();
    let reference = CavityState::coherent(beta, dim)?;
    let fidelity_at_reference = state.fidelity(&reference)?;

    let phase = if beta.norm() > 0.0 { beta.arg() } else { 0.0 };
    let r_max = (1.5 * beta.norm() + 0.5).min(2.0 * (dim as f64 / 4.0).sqrt());
    let objective = |r: f64| -> f64 {
        let trial = C64::from_polar(r.max(0.0), phase);
        match CavityState::coherent(trial, dim).and_then(|c| state.fidelity(&c)) {
            Ok(f) => -f,
            Err(_) => 0.0,
        }
    };
    let (best_r, neg_f) = golden_section_min(objective, 0.0, r_max, 1e-6);
    Ok(CoherentFidelityReport {
        beta,
        fidelity_at_reference,
        best_beta: C64::from_polar(best_r.max(0.0), phase),
        best_fidelity: -neg_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersive::{free_evolve, HamiltonianParams};
    use approx::assert_abs_diff_eq;

    #[test]
    fn coherent_state_matches_itself() {
        let beta = C64::new(2.0, 0.0);
        let state = CavityState::coherent(beta, 40).unwrap();
        let report = coherent_fidelity_report(&state, beta).unwrap();
        assert_abs_diff_eq!(report.fidelity_at_reference, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.best_fidelity, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.best_beta.re, 2.0, epsilon = 1e-4);
    }

    #[test]
    fn kerr_distortion_is_visible() {
        // One microsecond of free self-Kerr evolution scrambles the phase
        // relations of |beta = 2>; no coherent state on the ray recovers it.
        let params = HamiltonianParams::reference();
        let state = CavityState::coherent(C64::new(2.0, 0.0), 40).unwrap();
        let evolved = free_evolve(&state, &params, 1.0e-6, false).unwrap();
        let report = coherent_fidelity_report(&evolved, C64::new(2.0, 0.0)).unwrap();
        assert!(
            report.fidelity_at_reference < 0.9,
            "fidelity {}",
            report.fidelity_at_reference
        );
        assert!(report.best_fidelity < 0.95);
    }

    #[test]
    fn amplitude_drift_is_located() {
        let state = CavityState::coherent(C64::new(1.3, 0.0), 40).unwrap();
        let report = coherent_fidelity_report(&state, C64::new(1.0, 0.0)).unwrap();
        assert!(report.fidelity_at_reference < 0.95);
        assert_abs_diff_eq!(report.best_beta.re, 1.3, epsilon = 1e-3);
        assert_abs_diff_eq!(report.best_fidelity, 1.0, epsilon = 1e-8);
    }
}
