//! TOML device configuration.
//!
//! Config files carry frequencies as value / 2 pi in kHz (the convention of
//! device characterization reports); this module converts them to angular
//! rad/s at the boundary so everything downstream is uniform.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dispersive::{reference_frame_shift, DecoherenceParams, HamiltonianParams};
use crate::error::{Result, SimError};

const KHZ_TO_RAD_PER_SEC: f64 = 2.0 * std::f64::consts::PI * 1.0e3;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawHamiltonian {
    delta: f64,
    kerr: f64,
    kerr2: f64,
    chi: f64,
    chi2: f64,
    chi3: f64,
    frame_shift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
struct RawDecoherence {
    qubit_t1: f64,
    qubit_tphi: f64,
    cavity_kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPulse {
    sigma: f64,
    omega_ratio: f64,
}

impl Default for RawPulse {
    fn default() -> Self {
        Self {
            sigma: 125.0e-9,
            omega_ratio: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawConfig {
    dim: usize,
    hamiltonian: RawHamiltonian,
    #[serde(default)]
    decoherence: RawDecoherence,
    #[serde(default)]
    pulse: RawPulse,
}

/// Fully resolved simulator configuration (angular units).
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub dim: usize,
    pub params: HamiltonianParams,
    /// Frame rotation rate for excited-branch measurements, rad/s.
    pub frame_shift: f64,
    pub decoherence: DecoherenceParams,
    /// Default selective-pulse width in seconds.
    pub pulse_sigma: f64,
    /// Default peak Rabi rate as a fraction of |chi|.
    pub omega_ratio: f64,
}

impl SimConfig {
    /// The reference device parameters shipped in configs/default.toml.
    pub fn reference() -> Self {
        Self {
            dim: 40,
            params: HamiltonianParams::reference(),
            frame_shift: reference_frame_shift(),
            decoherence: DecoherenceParams::none(),
            pulse_sigma: 125.0e-9,
            omega_ratio: 0.02,
        }
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        if raw.dim < 2 {
            return Err(SimError::Config(format!(
                "dim must be at least 2, got {}",
                raw.dim
            )));
        }
        if !(raw.pulse.sigma > 0.0) || !(raw.pulse.omega_ratio > 0.0) {
            return Err(SimError::Config(
                "pulse sigma and omega_ratio must be positive".into(),
            ));
        }
        let d = &raw.decoherence;
        if d.qubit_t1 < 0.0 || d.qubit_tphi < 0.0 || d.cavity_kappa < 0.0 {
            return Err(SimError::Config("negative decoherence time".into()));
        }
        let h = &raw.hamiltonian;
        Ok(Self {
            dim: raw.dim,
            params: HamiltonianParams::from_khz(h.delta, h.chi, h.chi2, h.chi3, h.kerr, h.kerr2),
            frame_shift: h.frame_shift * KHZ_TO_RAD_PER_SEC,
            decoherence: DecoherenceParams {
                qubit_t1: d.qubit_t1,
                qubit_tphi: d.qubit_tphi,
                cavity_kappa: d.cavity_kappa,
            },
            pulse_sigma: raw.pulse.sigma,
            omega_ratio: raw.pulse.omega_ratio,
        })
    }
}

/// Load a configuration file.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
    SimConfig::from_raw(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn write_temp(content: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!(
            "snapsim-config-{}-{:?}.toml",
            std::process::id(),
            std::thread::current().id()
        ));
        std::fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn shipped_reference_file_matches_builtin() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
        let cfg = load_config(&path).unwrap();
        let reference = SimConfig::reference();
        assert_eq!(cfg.dim, reference.dim);
        assert_abs_diff_eq!(cfg.params.delta, reference.params.delta, epsilon = 1e-9);
        assert_abs_diff_eq!(cfg.params.chi, reference.params.chi, epsilon = 1e-6);
        assert_abs_diff_eq!(cfg.params.kerr, reference.params.kerr, epsilon = 1e-6);
        assert_abs_diff_eq!(cfg.frame_shift, reference.frame_shift, epsilon = 1e-6);
        assert_eq!(cfg.pulse_sigma, reference.pulse_sigma);
        assert!(!cfg.decoherence.any_active());
    }

    #[test]
    fn khz_values_become_angular_rates() {
        let path = write_temp(
            r#"
dim = 8
[hamiltonian]
delta = 1.0
kerr = 0.0
kerr2 = 0.0
chi = -100.0
chi2 = 0.0
chi3 = 0.0
frame_shift = -100.0
"#,
        );
        let cfg = load_config(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_abs_diff_eq!(
            cfg.params.delta,
            2.0 * std::f64::consts::PI * 1.0e3,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            cfg.params.chi,
            -2.0 * std::f64::consts::PI * 1.0e5,
            epsilon = 1e-6
        );
        assert_eq!(cfg.pulse_sigma, 125.0e-9);
    }

    #[test]
    fn bad_configs_are_rejected_as_config_errors() {
        let path = write_temp("dim = 1\n[hamiltonian]\ndelta = 0.0\nkerr = 0.0\nkerr2 = 0.0\nchi = 0.0\nchi2 = 0.0\nchi3 = 0.0\nframe_shift = 0.0\n");
        let err = load_config(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, SimError::Config(_)));

        let missing = load_config(Path::new("/nonexistent/snapsim.toml")).unwrap_err();
        assert!(matches!(missing, SimError::Io(_)));
    }
}
