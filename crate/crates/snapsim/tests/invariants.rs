//! Property-based checks of the algebraic contracts the simulator relies
//! on: displacement group structure, phase-gate additivity, free-evolution
//! composition, Poisson statistics of coherent states, and the selectivity
//! of number-resolved driving.

use std::f64::consts::PI;

use proptest::prelude::*;
use snapsim::dispersive::{free_evolve, HamiltonianParams};
use snapsim::pulse::{simulate_drive, JointState, PulseEnvelope, PulseWidth, Tone};
use snapsim::snap::{apply_snap, wrap_phase, PhaseVector};
use snapsim::{CavityState, Operator, C64};

fn polar(max_r: f64) -> impl Strategy<Value = C64> {
    (0.0..max_r, 0.0..(2.0 * PI)).prop_map(|(r, phi)| C64::from_polar(r, phi))
}

fn phases(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-PI..PI, len)
}

fn params() -> impl Strategy<Value = HamiltonianParams> {
    (
        -200.0..200.0f64,
        -10_000.0..10_000.0f64,
        -100.0..100.0f64,
        -10.0..10.0f64,
        -200.0..200.0f64,
        -10.0..10.0f64,
    )
        .prop_map(|(delta, chi, chi2, chi3, kerr, kerr2)| {
            HamiltonianParams::from_khz(delta, chi, chi2, chi3, kerr, kerr2)
        })
}

fn norm_diff(a: &CavityState, b: &CavityState) -> f64 {
    (0..a.dim())
        .map(|n| (a.amplitude(n) - b.amplitude(n)).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

proptest! {
    /// D(a) D(b) = e^{i Im(a conj(b))} D(a + b) on the vacuum.
    #[test]
    fn displacement_composition(a in polar(1.2), b in polar(1.2)) {
        let dim = 48;
        let vacuum = CavityState::fock(0, dim).unwrap();
        let sequential = Operator::displacement(a, dim).unwrap()
            .apply(&Operator::displacement(b, dim).unwrap().apply(&vacuum).unwrap())
            .unwrap();
        let direct = Operator::displacement(a + b, dim).unwrap().apply(&vacuum).unwrap();
        let phase = C64::from_polar(1.0, (a * b.conj()).im);
        let diff: f64 = (0..dim)
            .map(|n| (sequential.amplitude(n) - phase * direct.amplitude(n)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(diff < 1e-9, "composition defect {diff:.2e}");
    }

    /// D(-a) D(a) is the identity (the composition phase vanishes).
    #[test]
    fn displacement_inverse(a in polar(1.2), g in polar(1.0)) {
        let dim = 48;
        let state = CavityState::coherent(g, dim).unwrap();
        let forward = Operator::displacement(a, dim).unwrap().apply(&state).unwrap();
        let back = Operator::displacement(-a, dim).unwrap().apply(&forward).unwrap();
        let diff = norm_diff(&back, &state);
        prop_assert!(diff < 1e-9, "inverse defect {diff:.2e}");
    }

    /// The truncated displacement generator is skew-Hermitian, so its
    /// exponential stays unitary to rounding at every truncation.
    #[test]
    fn displacement_unitary(a in polar(1.2)) {
        let dim = 36;
        let d = Operator::displacement(a, dim).unwrap();
        let m = d.matrix();
        let gram = m.adjoint() * m;
        let mut defect: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - C64::new(expect, 0.0)).norm());
            }
        }
        prop_assert!(defect < 1e-10, "unitarity defect {defect:.2e}");
    }

    /// Coherent-state number statistics are Poisson.
    #[test]
    fn coherent_populations_poisson(a in polar(1.5)) {
        let dim = 40;
        let state = CavityState::coherent(a, dim).unwrap();
        let lambda = a.norm_sqr();
        let mut weight = (-lambda).exp();
        for n in 0..20 {
            prop_assert!(
                (state.population(n) - weight).abs() < 1e-9,
                "n = {n}: population {:.3e}, Poisson {:.3e}",
                state.population(n),
                weight
            );
            weight *= lambda / (n + 1) as f64;
        }
    }

    /// Phase gates commute and add: S(t1) S(t2) = S(t1 + t2); populations
    /// are untouched.
    #[test]
    fn snap_additivity(t1 in phases(8), t2 in phases(8), a in polar(1.0)) {
        let state = CavityState::coherent(a, 24).unwrap();
        let v1 = PhaseVector::new(t1);
        let v2 = PhaseVector::new(t2);
        let two_step = apply_snap(&v2, &apply_snap(&v1, &state));
        let one_step = apply_snap(&v1.add(&v2), &state);
        let diff = norm_diff(&two_step, &one_step);
        prop_assert!(diff < 1e-12, "additivity defect {diff:.2e}");
        for n in 0..state.dim() {
            prop_assert!((two_step.population(n) - state.population(n)).abs() < 1e-15);
        }
    }

    /// Free evolution composes in time and preserves populations.
    #[test]
    fn free_evolution_composition(
        p in params(),
        t1 in 0.0..5.0e-6f64,
        t2 in 0.0..5.0e-6f64,
        excited in any::<bool>(),
        a in polar(1.3),
    ) {
        let state = CavityState::coherent(a, 40).unwrap();
        let split = free_evolve(&free_evolve(&state, &p, t1, excited).unwrap(), &p, t2, excited)
            .unwrap();
        let joint = free_evolve(&state, &p, t1 + t2, excited).unwrap();
        let diff = norm_diff(&split, &joint);
        prop_assert!(diff < 1e-10, "composition defect {diff:.2e}");
        for n in 0..state.dim() {
            prop_assert!((split.population(n) - state.population(n)).abs() < 1e-14);
        }
    }

    /// Self-Kerr evolution revives the state at t = 2 pi / |K|.
    #[test]
    fn kerr_revival(beta in polar(1.8), kerr_khz in 20.0..500.0f64) {
        let p = HamiltonianParams::from_khz(0.0, 0.0, 0.0, 0.0, -kerr_khz, 0.0);
        let state = CavityState::coherent(beta, 40).unwrap();
        let revived = free_evolve(&state, &p, 2.0 * PI / p.kerr.abs(), false).unwrap();
        let f = snapsim::fidelity(&revived, &state).unwrap();
        prop_assert!(f > 1.0 - 1e-9, "revival fidelity 1 - {:.2e}", 1.0 - f);
    }

    /// wrap_phase lands in (-pi, pi], is idempotent, and is invariant under
    /// whole turns.
    #[test]
    fn wrap_phase_contract(x in -12.0..12.0f64, k in -2i32..=2) {
        let w = wrap_phase(x);
        prop_assert!(w > -PI - 1e-12 && w <= PI + 1e-12, "wrapped to {w}");
        prop_assert!((wrap_phase(w) - w).abs() < 1e-15);
        let shifted = wrap_phase(x + 2.0 * PI * k as f64);
        prop_assert!(
            wrap_phase(shifted - w).abs() < 1e-11,
            "shift by {k} turns moved the wrap from {w} to {shifted}"
        );
    }
}

/// Weaker drives are more selective: halving the peak Rabi rate must reduce
/// the worst spectator excitation of a number-selective pi pulse while the
/// target transfer stays near unity.
#[test]
fn selectivity_improves_with_weaker_drive() {
    let params = HamiltonianParams::reference();
    let cavity = CavityState::coherent(C64::new(1.0, 0.0), 16).unwrap();
    let initial = JointState::from_cavity(false, &cavity);
    let target = 1;

    let run = |ratio: f64| {
        let pulse = PulseEnvelope::pi_pulse(
            vec![Tone {
                n_target: target,
                axis: 0.0,
                weight: 1.0,
            }],
            PulseWidth::PeakRabi(ratio * params.chi.abs()),
            0.0,
        )
        .unwrap();
        let out = simulate_drive(&initial, &[pulse], &params, None).unwrap();
        let transfer = out.population(true, target) / cavity.population(target);
        let worst_leak = (0..cavity.dim())
            .filter(|&n| n != target)
            .map(|n| out.population(true, n))
            .fold(0.0, f64::max);
        (transfer, worst_leak)
    };

    let (transfer_strong, leak_strong) = run(0.05);
    let (transfer_weak, leak_weak) = run(0.02);
    assert!(transfer_strong > 0.99, "strong transfer {transfer_strong}");
    assert!(transfer_weak > 0.999, "weak transfer {transfer_weak}");
    assert!(
        leak_weak < leak_strong,
        "leak did not shrink: {leak_weak:.2e} vs {leak_strong:.2e}"
    );
    assert!(leak_weak < 1e-3, "weak-drive leak {leak_weak:.2e}");
}
