//! Free evolution under the nonlinear dispersive Hamiltonian, plus Lindblad
//! evolution for decoherence studies.
//!
//! In the rotating frame the Hamiltonian is diagonal in |qubit> x |n>, so
//! free evolution is exact: each joint level accumulates phase at its level
//! energy. All rates here are angular (rad/s).

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};
use crate::fock::{CavityState, DensityMatrix, C64};

const TAU: f64 = std::f64::consts::TAU;

/// Frame detunings and nonlinear coefficients, all angular (rad/s).
/// `delta` is the cavity drive-frame detuning; `chi` the dispersive shift;
/// `chi2`/`chi3` its first and second photon-number corrections; `kerr` the
/// cavity self-Kerr and `kerr2` its correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    pub delta: f64,
    pub chi: f64,
    pub chi2: f64,
    pub chi3: f64,
    pub kerr: f64,
    pub kerr2: f64,
}

impl HamiltonianParams {
    pub fn zero() -> Self {
        Self {
            delta: 0.0,
            chi: 0.0,
            chi2: 0.0,
            chi3: 0.0,
            kerr: 0.0,
            kerr2: 0.0,
        }
    }

    /// Build from cyclic frequencies (value/2pi) in kHz, the unit used in
    /// config files and device characterization reports.
    pub fn from_khz(delta: f64, chi: f64, chi2: f64, chi3: f64, kerr: f64, kerr2: f64) -> Self {
        let k = |v: f64| TAU * v * 1e3;
        Self {
            delta: k(delta),
            chi: k(chi),
            chi2: k(chi2),
            chi3: k(chi3),
            kerr: k(kerr),
            kerr2: k(kerr2),
        }
    }

    /// Characterized parameters of the reference device, as shipped in the
    /// default config: delta/2pi = -1.1 kHz, K/2pi = -107.9 kHz,
    /// K'/2pi = 3.4 kHz, chi/2pi = -8281.3 kHz, chi'/2pi = 48.8 kHz,
    /// chi''/2pi = 0.5 kHz.
    pub fn reference() -> Self {
        Self::from_khz(-1.1, -8281.3, 48.8, 0.5, -107.9, 3.4)
    }

    /// Same parameters with the linear detuning removed.
    pub fn without_delta(&self) -> Self {
        Self {
            delta: 0.0,
            ..*self
        }
    }
}

/// Generator frame adjustment used during qubit-excited phase measurements,
/// for the reference device: -8300 kHz (angular rad/s after conversion).
pub fn reference_frame_shift() -> f64 {
    TAU * -8300.0e3
}

/// Decoherence channel parameters; a zero disables the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceParams {
    /// Qubit relaxation time T1 (s).
    pub qubit_t1: f64,
    /// Qubit pure dephasing time Tphi (s).
    pub qubit_tphi: f64,
    /// Cavity energy decay rate kappa (1/s).
    pub cavity_kappa: f64,
}

impl DecoherenceParams {
    pub fn none() -> Self {
        Self {
            qubit_t1: 0.0,
            qubit_tphi: 0.0,
            cavity_kappa: 0.0,
        }
    }

    pub fn any_active(&self) -> bool {
        self.qubit_t1 > 0.0 || self.qubit_tphi > 0.0 || self.cavity_kappa > 0.0
    }
}

/// Level energy E(q, n)/hbar of joint level |q> x |n> in the rotating frame:
/// E_g(n) = Delta n + (K/2) n(n-1) + (K'/6) n(n-1)(n-2), and the excited
/// branch adds chi n + (chi'/2) n(n-1) + (chi''/6) n(n-1)(n-2).
pub fn level_energy(n: usize, qubit_excited: bool, params: &HamiltonianParams) -> f64 {
    let n = n as f64;
    let poly2 = n * (n - 1.0);
    let poly3 = n * (n - 1.0) * (n - 2.0);
    let mut e = params.delta * n + params.kerr / 2.0 * poly2 + params.kerr2 / 6.0 * poly3;
    if qubit_excited {
        e += params.chi * n + params.chi2 / 2.0 * poly2 + params.chi3 / 6.0 * poly3;
    }
    e
}

/// E(n+1) - E(n) in closed form: Delta + K n + (K'/2) n(n-1), plus
/// chi + chi' n + (chi''/2) n(n-1) on the excited branch. This is the model
/// the Hamiltonian fit regresses slopes against.
pub fn phase_difference_rate(n: usize, qubit_excited: bool, params: &HamiltonianParams) -> f64 {
    let n = n as f64;
    let poly2 = n * (n - 1.0);
    let mut r = params.delta + params.kerr * n + params.kerr2 / 2.0 * poly2;
    if qubit_excited {
        r += params.chi + params.chi2 * n + params.chi3 / 2.0 * poly2;
    }
    r
}

/// Exact free evolution for time `t`: c_n picks up e^{-i E(n) t}.
pub fn free_evolve(
    state: &CavityState,
    params: &HamiltonianParams,
    t: f64,
    qubit_excited: bool,
) -> Result<CavityState> {
    if t < 0.0 {
        return Err(SimError::Domain(format!("negative evolution time {t}")));
    }
    Ok(state.map_amplitudes(|n, c| {
        c * C64::from_polar(1.0, -level_energy(n, qubit_excited, params) * t)
    }))
}

/// Index of joint level |q> x |n> with the qubit index slow: q*dim + n.
pub fn joint_index(qubit_excited: bool, n: usize, dim: usize) -> usize {
    (qubit_excited as usize) * dim + n
}

/// Product state |q> x |psi_c> as a joint density matrix.
pub fn joint_density(qubit_excited: bool, cavity: &CavityState) -> DensityMatrix {
    let dim = cavity.dim();
    let mut amp = DVector::<C64>::zeros(2 * dim);
    for n in 0..dim {
        amp[joint_index(qubit_excited, n, dim)] = cavity.amplitude(n);
    }
    DensityMatrix::new_unchecked(&amp * amp.adjoint())
}

/// Total excited-qubit population of a joint density matrix.
pub fn qubit_excited_population(rho: &DensityMatrix) -> Result<f64> {
    let dim = joint_cavity_dim(rho)?;
    Ok((0..dim)
        .map(|n| rho.population(joint_index(true, n, dim)))
        .sum())
}

/// Cavity photon-number populations of a joint density matrix (qubit traced
/// out).
pub fn cavity_populations(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let dim = joint_cavity_dim(rho)?;
    Ok((0..dim)
        .map(|n| {
            rho.population(joint_index(false, n, dim)) + rho.population(joint_index(true, n, dim))
        })
        .collect())
}

fn joint_cavity_dim(rho: &DensityMatrix) -> Result<usize> {
    if !rho.dim().is_multiple_of(2) {
        return Err(SimError::Domain(format!(
            "joint density matrix dimension {} is not 2 x cavity dim",
            rho.dim()
        )));
    }
    Ok(rho.dim() / 2)
}

/// Collapse operators for the enabled channels, on the joint space.
fn collapse_operators(dec: &DecoherenceParams, dim: usize) -> Vec<DMatrix<C64>> {
    let mut ops = Vec::new();
    let d2 = 2 * dim;
    if dec.qubit_t1 > 0.0 {
        // sigma_minus x I: |e,n> -> |g,n>
        let mut l = DMatrix::zeros(d2, d2);
        let r = (1.0 / dec.qubit_t1).sqrt();
        for n in 0..dim {
            l[(joint_index(false, n, dim), joint_index(true, n, dim))] = C64::new(r, 0.0);
        }
        ops.push(l);
    }
    if dec.qubit_tphi > 0.0 {
        // sqrt(1/2Tphi) sigma_z x I dephases qubit coherence at rate 1/Tphi
        let mut l = DMatrix::zeros(d2, d2);
        let r = (0.5 / dec.qubit_tphi).sqrt();
        for n in 0..dim {
            l[(joint_index(false, n, dim), joint_index(false, n, dim))] = C64::new(r, 0.0);
            l[(joint_index(true, n, dim), joint_index(true, n, dim))] = C64::new(-r, 0.0);
        }
        ops.push(l);
    }
    if dec.cavity_kappa > 0.0 {
        // I x a: photon loss in both qubit sectors
        let mut l = DMatrix::zeros(d2, d2);
        let r = dec.cavity_kappa.sqrt();
        for q in [false, true] {
            for n in 1..dim {
                l[(joint_index(q, n - 1, dim), joint_index(q, n, dim))] =
                    C64::new(r * (n as f64).sqrt(), 0.0);
            }
        }
        ops.push(l);
    }
    ops
}

/// Master-equation evolution of a joint density matrix for time `t` with a
/// fixed step `dt` (classic 4th-order Runge-Kutta).
///
/// The diagonal Hamiltonian is absorbed into an interaction picture: the
/// unitary part becomes exact phase bookkeeping and the integrator only
/// resolves the slow dissipator. With all rates zero the result therefore
/// matches `free_evolve` to roundoff at any step size. Trace drift is
/// monitored every step; drift beyond 1e-6 aborts with a step-size error.
pub fn lindblad_evolve(
    rho: &DensityMatrix,
    params: &HamiltonianParams,
    dec: &DecoherenceParams,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(SimError::Domain(format!("negative evolution time {t}")));
    }
    if dt <= 0.0 {
        return Err(SimError::Domain(format!("non-positive step {dt}")));
    }
    let dim = joint_cavity_dim(rho)?;
    let d2 = 2 * dim;
    let energies: Vec<f64> = (0..d2)
        .map(|i| level_energy(i % dim, i >= dim, params))
        .collect();

    // interaction picture: rho~(0) = rho(0), collapse ops pick up phases
    let bare = collapse_operators(dec, dim);
    let mut state = rho.matrix().clone();

    if !bare.is_empty() && t > 0.0 {
        let steps = (t / dt).ceil() as usize;
        let h = t / steps as f64;
        for step in 0..steps {
            let t0 = step as f64 * h;
            let k1 = dissipator(&bare, &energies, t0, &state);
            let k2 = dissipator(
                &bare,
                &energies,
                t0 + h / 2.0,
                &(&state + &k1 * cr(h / 2.0)),
            );
            let k3 = dissipator(
                &bare,
                &energies,
                t0 + h / 2.0,
                &(&state + &k2 * cr(h / 2.0)),
            );
            let k4 = dissipator(&bare, &energies, t0 + h, &(&state + &k3 * cr(h)));
            state += (k1 + k2 * cr(2.0) + k3 * cr(2.0) + k4) * cr(h / 6.0);

            let tr = state.diagonal().sum();
            let drift = (tr.re - 1.0).abs() + tr.im.abs();
            if drift > 1e-6 {
                return Err(SimError::TraceDrift { drift, limit: 1e-6 });
            }
        }
    }

    // back to the Schrodinger picture: rho_ij *= e^{-i (E_i - E_j) t}
    for i in 0..d2 {
        for j in 0..d2 {
            state[(i, j)] *= C64::from_polar(1.0, -(energies[i] - energies[j]) * t);
        }
    }

    // re-Hermitize and rescale away sub-tolerance integrator drift
    let herm = (&state + state.adjoint()).scale(0.5);
    let tr = herm.diagonal().sum().re;
    Ok(DensityMatrix::new_unchecked(herm / cr(tr)))
}

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Sum of Lindblad dissipators at interaction-picture time `t`:
/// D[L~] rho = L~ rho L~† - (1/2){L~†L~, rho}, where L~ = Phi(t) o L picks up
/// the phase e^{i(E_i - E_j)t} on element (i, j).
fn dissipator(bare: &[DMatrix<C64>], energies: &[f64], t: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let d2 = rho.nrows();
    let mut out = DMatrix::zeros(d2, d2);
    for l in bare {
        let mut lt = l.clone();
        for i in 0..d2 {
            for j in 0..d2 {
                if lt[(i, j)] != cr(0.0) {
                    lt[(i, j)] *= C64::from_polar(1.0, (energies[i] - energies[j]) * t);
                }
            }
        }
        let ldag = lt.adjoint();
        let ldl = &ldag * &lt;
        out += &lt * rho * ldag - (&ldl * rho + rho * ldl) * cr(0.5);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snap::{apply_snap, PhaseVector};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn level_energy_base_cases() {
        let p = HamiltonianParams::reference();
        assert_eq!(level_energy(0, false, &p), 0.0);
        assert_eq!(level_energy(0, true, &p), 0.0);
        assert_abs_diff_eq!(level_energy(1, false, &p), p.delta, epsilon = 1e-9);
        // n=2 excited: 2 Delta + K + 2 chi + chi'
        assert_abs_diff_eq!(
            level_energy(2, true, &p),
            2.0 * p.delta + p.kerr + 2.0 * p.chi + p.chi2,
            epsilon = 1e-6
        );
    }

    #[test]
    fn rate_matches_energy_differences() {
        let p = HamiltonianParams::reference();
        for excited in [false, true] {
            for n in 0..10 {
                let fd = level_energy(n + 1, excited, &p) - level_energy(n, excited, &p);
                let closed = phase_difference_rate(n, excited, &p);
                assert_abs_diff_eq!(fd, closed, epsilon = 1e-4 * closed.abs().max(1.0));
            }
        }
        // ground n=0 rate is the bare detuning
        assert_abs_diff_eq!(phase_difference_rate(0, false, &p), p.delta);
        // excited minus ground at n=0 is chi
        assert_abs_diff_eq!(
            phase_difference_rate(0, true, &p) - phase_difference_rate(0, false, &p),
            p.chi
        );
    }

    #[test]
    fn free_evolution_composition_and_populations() {
        let p = HamiltonianParams::reference();
        let psi = CavityState::coherent(c(2.0, 0.0), 40).unwrap();
        let zero = free_evolve(&psi, &p, 0.0, false).unwrap();
        assert!(zero.fidelity(&psi).unwrap() > 1.0 - 1e-15);

        let a = free_evolve(&psi, &p, 3.7e-6, false).unwrap();
        let b = free_evolve(&a, &p, 1.3e-6, false).unwrap();
        let direct = free_evolve(&psi, &p, 5.0e-6, false).unwrap();
        for n in 0..40 {
            assert!((b.amplitude(n) - direct.amplitude(n)).norm() < 1e-12);
            assert_abs_diff_eq!(b.population(n), psi.population(n), epsilon = 1e-15);
        }
        assert!(free_evolve(&psi, &p, -1.0, false).is_err());
    }

    #[test]
    fn kerr_revival() {
        let p = HamiltonianParams {
            kerr: -TAU * 107.9e3,
            ..HamiltonianParams::zero()
        };
        let t = TAU / p.kerr.abs();
        let psi = CavityState::coherent(c(2.0, 0.0), 40).unwrap();
        let revived = free_evolve(&psi, &p, t, false).unwrap();
        assert!(revived.fidelity(&psi).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn kerr_phases_cancel_free_evolution() {
        let p = HamiltonianParams::reference().without_delta();
        let dim = 40;
        let t = 1e-6;
        let psi = CavityState::coherent(c(2.0, 0.0), dim).unwrap();
        let evolved = free_evolve(&psi, &p, t, false).unwrap();
        let corrected = apply_snap(&PhaseVector::kerr(&p, t, dim).unwrap(), &evolved);
        assert!(corrected.fidelity(&psi).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn lindblad_zero_rates_matches_unitary() {
        let p = HamiltonianParams::reference();
        let psi = CavityState::coherent(c(1.5, 0.0), 12).unwrap();
        let rho = joint_density(false, &psi);
        let evolved = lindblad_evolve(&rho, &p, &DecoherenceParams::none(), 2e-6, 1e-7).unwrap();
        let free = free_evolve(&psi, &p, 2e-6, false).unwrap();
        let target = joint_density(false, &free);
        assert!(evolved.trace_distance(&target).unwrap() < 1e-8);
    }

    #[test]
    fn lindblad_qubit_relaxation() {
        let p = HamiltonianParams::reference();
        let dec = DecoherenceParams {
            qubit_t1: 10e-6,
            ..DecoherenceParams::none()
        };
        let rho = joint_density(true, &CavityState::fock(0, 2).unwrap());
        let out = lindblad_evolve(&rho, &p, &dec, 10e-6, 5e-8).unwrap();
        let pe = qubit_excited_population(&out).unwrap();
        assert_abs_diff_eq!(pe, (-1.0f64).exp(), epsilon = 1e-4);
        out.validate().unwrap();
    }

    #[test]
    fn lindblad_qubit_dephasing_decays_coherence() {
        let p = HamiltonianParams::zero();
        let tphi = 5e-6;
        let dec = DecoherenceParams {
            qubit_tphi: tphi,
            ..DecoherenceParams::none()
        };
        // (|g> + |e>)/sqrt(2) x |0>
        let dim = 2;
        let mut amp = DVector::<C64>::zeros(2 * dim);
        amp[joint_index(false, 0, dim)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amp[joint_index(true, 0, dim)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = DensityMatrix::new_unchecked(&amp * amp.adjoint());
        let out = lindblad_evolve(&rho, &p, &dec, tphi, 2.5e-8).unwrap();
        let coh = out.matrix()[(joint_index(false, 0, dim), joint_index(true, 0, dim))].norm();
        assert_abs_diff_eq!(coh, 0.5 * (-1.0f64).exp(), epsilon = 1e-4);
    }

    #[test]
    fn lindblad_cavity_decay() {
        let p = HamiltonianParams::reference();
        let kappa = 1.0 / 20e-6;
        let dec = DecoherenceParams {
            cavity_kappa: kappa,
            ..DecoherenceParams::none()
        };
        let rho = joint_density(false, &CavityState::fock(1, 4).unwrap());
        let out = lindblad_evolve(&rho, &p, &dec, 20e-6, 1e-7).unwrap();
        let pops = cavity_populations(&out).unwrap();
        assert_abs_diff_eq!(pops[1], (-1.0f64).exp(), epsilon = 1e-4);
        assert_abs_diff_eq!(pops.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        // positivity and hermiticity survive the integration
        out.validate().unwrap();
    }

    #[test]
    fn lindblad_rejects_bad_steps() {
        let rho = joint_density(false, &CavityState::fock(0, 2).unwrap());
        let p = HamiltonianParams::zero();
        let dec = DecoherenceParams {
            qubit_t1: 1e-6,
            ..DecoherenceParams::none()
        };
        assert!(lindblad_evolve(&rho, &p, &dec, 1e-6, 0.0).is_err());
        assert!(lindblad_evolve(&rho, &p, &dec, -1.0, 1e-8).is_err());
    }
}
