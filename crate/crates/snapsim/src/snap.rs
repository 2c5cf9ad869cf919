//! Ideal (instantaneous) SNAP gates and the standard phase patterns.
//!
//! A SNAP gate S(theta) multiplies each Fock component |n> by e^{i theta_n}.
//! It is diagonal by construction, so populations are untouched and gates
//! compose by adding their phase vectors.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dispersive::HamiltonianParams;
use crate::error::Result;
use crate::fock::{CavityState, Operator, C64};

/// Wrap a phase to the canonical interval (-pi, pi].
pub fn wrap_phase(x: f64) -> f64 {
    let w = x - 2.0 * PI * ((x - PI) / (2.0 * PI)).ceil();
    // guard against -pi sneaking in through rounding
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Ordered SNAP phases theta_n in canonical form. A vector shorter than the
/// space it acts on is implicitly zero-padded.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Self {
        Self {
            phases: phases.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            phases: vec![0.0; len],
        }
    }

    /// theta_n = n * phi: a rotation of the cavity frame by phi.
    pub fn rotation(phi: f64, len: usize) -> Self {
        Self::new((0..len).map(|n| n as f64 * phi).collect())
    }

    /// theta_n = phi on odd n only: rotates |beta> toward |-beta>.
    pub fn parity(phi: f64, len: usize) -> Self {
        Self::new(
            (0..len)
                .map(|n| if n % 2 == 1 { phi } else { 0.0 })
                .collect(),
        )
    }

    /// Phases cancelling the Kerr part of free evolution over time `t`:
    /// theta_n = [ (K/2) n(n-1) + (K'/6) n(n-1)(n-2) ] * t, so that applying
    /// the gate after evolving for `t` (zero detuning, qubit in the ground
    /// state) is the identity.
    pub fn kerr(params: &HamiltonianParams, t: f64, len: usize) -> Result<Self> {
        if t < 0.0 {
            return Err(crate::error::SimError::Domain(format!(
                "negative evolution time {t}"
            )));
        }
        Ok(Self::new(
            (0..len)
                .map(|n| {
                    let n = n as f64;
                    (params.kerr / 2.0 * n * (n - 1.0)
                        + params.kerr2 / 6.0 * n * (n - 1.0) * (n - 2.0))
                        * t
                })
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// theta_n, with the implicit zero padding beyond the stored length.
    pub fn get(&self, n: usize) -> f64 {
        self.phases.get(n).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    /// Element-wise sum in canonical form; lengths may differ.
    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().max(other.len());
        Self::new((0..len).map(|n| self.get(n) + other.get(n)).collect())
    }

    /// Keep only the first `count` phases (zero beyond), modelling a gate
    /// that addresses a limited set of components.
    pub fn truncated(&self, count: usize) -> Self {
        Self {
            phases: self.phases.iter().copied().take(count).collect(),
        }
    }
}

/// The SNAP gate as a dense diagonal operator on a `dim`-dimensional space.
pub fn snap(theta: &PhaseVector, dim: usize) -> Result<Operator> {
    if theta.len() > dim {
        return Err(crate::error::SimError::Domain(format!(
            "phase vector length {} exceeds dim {dim}",
            theta.len()
        )));
    }
    let mat = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::from_polar(1.0, theta.get(i))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Operator::new(mat, true)
}

/// Apply S(theta) to a state without materializing the matrix. Exact and
/// norm-preserving: each amplitude picks up a unit phase factor.
pub fn apply_snap(theta: &PhaseVector, state: &CavityState) -> CavityState {
    state.map_amplitudes(|n, c| c * C64::from_polar(1.0, theta.get(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fidelity;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn wrap_phase_canonical_interval() {
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_phase(PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_phase(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_phase(0.0), 0.0);
        assert_abs_diff_eq!(wrap_phase(7.0 * PI), PI, epsilon = 1e-9);
    }

    #[test]
    fn empty_snap_is_identity() {
        let s = snap(&PhaseVector::new(vec![]), 8).unwrap();
        assert!(s.unitarity_defect(8) < 1e-15);
        let psi = CavityState::coherent(c(1.0, 0.2), 8).unwrap();
        assert!(s.apply(&psi).unwrap().fidelity(&psi).unwrap() > 1.0 - 1e-14);
    }

    #[test]
    fn single_component_flip() {
        let amp = vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2];
        let psi = CavityState::from_amplitudes(amp).unwrap();
        let flipped = apply_snap(&PhaseVector::new(vec![PI]), &psi);
        assert_abs_diff_eq!(
            flipped.amplitude(0).re,
            -psi.amplitude(0).re,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            flipped.amplitude(1).re,
            psi.amplitude(1).re,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rotation_phases_rotate_coherent_states() {
        let dim = 40;
        let beta = c(2.0, 0.0);
        let phi = 0.7;
        let rotated = apply_snap(
            &PhaseVector::rotation(phi, dim),
            &CavityState::coherent(beta, dim).unwrap(),
        );
        let target = CavityState::coherent(beta * C64::from_polar(1.0, phi), dim).unwrap();
        assert!(fidelity(&rotated, &target).unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn rotation_phase_values() {
        let v = PhaseVector::rotation(PI / 2.0, 4);
        assert_abs_diff_eq!(v.get(0), 0.0);
        assert_abs_diff_eq!(v.get(1), PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.get(2), PI, epsilon = 1e-12);
        // 3 pi / 2 wraps to -pi/2
        assert_abs_diff_eq!(v.get(3), -PI / 2.0, epsilon = 1e-12);
        assert_eq!(PhaseVector::rotation(0.0, 10).as_slice(), &[0.0; 10]);
    }

    #[test]
    fn diagonal_gates_commute() {
        let dim = 20;
        let rot = snap(&PhaseVector::rotation(0.3, dim), dim).unwrap();
        let kerr = snap(
            &PhaseVector::kerr(&HamiltonianParams::reference(), 1e-6, dim).unwrap(),
            dim,
        )
        .unwrap();
        let ab = rot.compose(&kerr).unwrap();
        let ba = kerr.compose(&rot).unwrap();
        let diff = ab.matrix() - ba.matrix();
        assert!(diff.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn parity_pattern_values() {
        let v = PhaseVector::parity(0.9, 6);
        assert_eq!(v.get(0), 0.0);
        assert_abs_diff_eq!(v.get(1), 0.9);
        assert_eq!(v.get(2), 0.0);
        assert_abs_diff_eq!(v.get(5), 0.9);
        assert_eq!(PhaseVector::parity(0.0, 6).as_slice(), &[0.0; 6]);
    }

    /// S(parity(phi))|beta> = e^{i phi/2} ( cos(phi/2)|beta> - i sin(phi/2)|-beta> ).
    /// The identity is algebraically exact; the gauge factor e^{i phi/2} is
    /// pinned here on the amplitude level, not just through fidelity.
    #[test]
    fn parity_phases_rotate_cats() {
        let dim = 40;
        for &beta in &[1.0, 2.0] {
            let plus = CavityState::coherent(c(beta, 0.0), dim).unwrap();
            let minus = CavityState::coherent(c(-beta, 0.0), dim).unwrap();
            for &phi in &[0.0, PI / 4.0, PI / 2.0, PI] {
                let result = apply_snap(&PhaseVector::parity(phi, dim), &plus);
                let gauge = C64::from_polar(1.0, phi / 2.0);
                let half = phi / 2.0;
                let target = plus.amplitudes() * (gauge * half.cos())
                    + minus.amplitudes() * (gauge * c(0.0, -1.0) * half.sin());
                let err = (result.amplitudes() - target).norm();
                assert!(err < 1e-9, "beta={beta} phi={phi}: residual {err:.2e}");
            }
        }
        // phi = pi sends |beta> to |-beta> outright
        let plus = CavityState::coherent(c(2.0, 0.0), dim).unwrap();
        let minus = CavityState::coherent(c(-2.0, 0.0), dim).unwrap();
        let flipped = apply_snap(&PhaseVector::parity(PI, dim), &plus);
        assert!(flipped.fidelity(&minus).unwrap() > 1.0 - 1e-7);
    }

    #[test]
    fn kerr_phase_values() {
        let params = HamiltonianParams::reference();
        let v = PhaseVector::kerr(&params, 1e-6, 12).unwrap();
        assert_eq!(v.get(0), 0.0);
        assert_eq!(v.get(1), 0.0);
        // theta_2 = K t; K/2pi = -107.9 kHz gives -0.678 rad at 1 us
        let expect = 2.0 * PI * (-107.9e3) * 1e-6;
        assert_abs_diff_eq!(v.get(2), expect, epsilon = 1e-12);
        // theta_3 = 3 K t + K' t
        let expect3 = wrap_phase(2.0 * PI * (3.0 * (-107.9e3) + 3.4e3) * 1e-6);
        assert_abs_diff_eq!(v.get(3), expect3, epsilon = 1e-12);
        assert_eq!(
            PhaseVector::kerr(&params, 0.0, 12).unwrap().as_slice(),
            &[0.0; 12]
        );
        assert!(PhaseVector::kerr(&params, -1.0, 12).is_err());
    }

    #[test]
    fn kerr_only_revival_time_gives_identity() {
        // with K alone, t = 2pi/|K| makes every theta_n a multiple of 2pi
        let params = HamiltonianParams {
            kerr: -2.0 * PI * 107.9e3,
            ..HamiltonianParams::zero()
        };
        let t = 2.0 * PI / params.kerr.abs();
        let v = PhaseVector::kerr(&params, t, 16).unwrap();
        for n in 0..16 {
            assert_abs_diff_eq!(v.get(n), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn snap_additivity_and_population_preservation() {
        let dim = 16;
        let a = PhaseVector::new(vec![0.1, -2.0, 3.0, 4.4, -0.3]);
        let b = PhaseVector::rotation(1.1, dim);
        let sa = snap(&a, dim).unwrap();
        let sb = snap(&b, dim).unwrap();
        let product = sa.compose(&sb).unwrap();
        let sum = snap(&a.add(&b), dim).unwrap();
        let diff = product.matrix() - sum.matrix();
        assert!(diff.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);

        let psi = CavityState::coherent(c(1.5, 0.3), dim).unwrap();
        let after = apply_snap(&a, &psi);
        for n in 0..dim {
            assert_abs_diff_eq!(after.population(n), psi.population(n), epsilon = 1e-15);
        }
    }

    #[test]
    fn phase_vector_padding_and_truncation() {
        let v = PhaseVector::new(vec![0.5, 1.0]);
        assert_eq!(v.get(7), 0.0);
        let w = PhaseVector::rotation(0.2, 8).truncated(3);
        assert_eq!(w.len(), 3);
        assert_eq!(w.get(5), 0.0);
        let s = snap(&v, 1);
        assert!(s.is_err());
    }
}
