//! Phase-interference scans: the measurement primitive behind Hamiltonian
//! parameter extraction.
//!
//! Protocol for one curve: prepare a coherent state, optionally with the
//! qubit excited during a wait of length `delta_t`; apply a phase gate with
//! angle `theta` on component n+1; probe with a small displacement
//! D(epsilon); record p(n) as a function of `theta`.
//!
//! To first order in epsilon the probe mixes neighbours:
//! p(n) ~ B - 2 eps sqrt(n+1) |c_n||c_{n+1}| cos(theta - phi) with
//! phi = arg(c*_{n+1} c_n), so the curve MINIMUM sits at theta = phi and a
//! sinusoid fit reads the relative phase of neighbouring components off the
//! minimum position.
//!
//! The curve is a pure single harmonic in theta to all orders in epsilon
//! (only the n+1 component carries theta), but the minimum position is
//! biased by the other components the probe leaks into <n|: the lower
//! neighbour at first order (amplitude ~ eps n / |alpha| for a coherent
//! preparation, vanishing at n = 0 and at delta_t = 0) and two-photon terms
//! at second order (~ eps^2 |alpha|^2 / 2). Both are deterministic functions
//! of the setup, so [`subtract_probe_bias`] can remove them with the full
//! measurement model evaluated at a Hamiltonian estimate.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dispersive::{free_evolve, HamiltonianParams};
use crate::error::{Result, SimError};
use crate::fock::{CavityState, Operator, C64};
use crate::par;
use crate::pulse::{measure_number, simulate_drive, snap_pulse_pair, JointState, PulseWidth};
use crate::snap::{apply_snap, wrap_phase, PhaseVector};

use super::hamiltonian_fit::Fitted;

/// Unwrap steps larger than this (in magnitude) are treated as aliased.
pub const PHASE_ALIAS_LIMIT: f64 = 0.95 * PI;

/// How the phase gate and the number readout are realized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMode {
    /// Exact diagonal gates and projective number readout.
    Ideal,
    /// Number-selective pulse pairs and pulsed readout.
    Pulse { width: PulseWidth },
}

/// Shared configuration of a family of interference scans.
#[derive(Debug, Clone, Copy)]
pub struct ScanSetup<'a> {
    pub params: &'a HamiltonianParams,
    pub dim: usize,
    /// Preparation displacement from vacuum.
    pub alpha: C64,
    /// Probe the excited-qubit branch during the wait (the qubit is flipped
    /// around the wait by fast unconditional pulses, modelled as exact).
    pub qubit_excited: bool,
    /// Rotation rate of the drive reference frame subtracted from the
    /// excited-branch phase accumulation (rad/s).
    pub frame_shift: f64,
    /// Probe displacement amplitude.
    pub epsilon: f64,
    pub mode: GateMode,
}

/// One measured interference curve.
#[derive(Debug, Clone)]
pub struct InterferenceCurve {
    pub n: usize,
    pub delta_t: f64,
    pub thetas: Vec<f64>,
    pub probabilities: Vec<f64>,
}

/// `m` phase-gate angles covering [0, 2pi), endpoint excluded.
pub fn default_theta_grid(m: usize) -> Vec<f64> {
    (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect()
}

/// State right before the phase gate: prepared, waited, frame-corrected.
fn prepared_state(setup: &ScanSetup, delta_t: f64) -> Result<CavityState> {
    let prep = CavityState::coherent(setup.alpha, setup.dim)?;
    let waited = free_evolve(&prep, setup.params, delta_t, setup.qubit_excited)?;
    if setup.qubit_excited {
        Ok(apply_snap(
            &PhaseVector::rotation(setup.frame_shift * delta_t, setup.dim),
            &waited,
        ))
    } else {
        Ok(waited)
    }
}

/// Scan the phase-gate angle on component `n + 1` and record p(n).
pub fn interference_scan(
    setup: &ScanSetup,
    n: usize,
    delta_t: f64,
    thetas: &[f64],
) -> Result<InterferenceCurve> {
    let probe = Operator::displacement(C64::new(setup.epsilon, 0.0), setup.dim)?;
    scan_with_probe(setup, n, delta_t, thetas, &probe)
}

/// Scan implementation with a caller-supplied probe operator, so sweeps over
/// many curves build the (constant) probe displacement only once.
fn scan_with_probe(
    setup: &ScanSetup,
    n: usize,
    delta_t: f64,
    thetas: &[f64],
    probe: &Operator,
) -> Result<InterferenceCurve> {
    if n + 1 >= setup.dim {
        return Err(SimError::Domain(format!(
            "component {} out of range for dim {}",
            n + 1,
            setup.dim
        )));
    }
    if !(setup.epsilon > 0.0) {
        return Err(SimError::Domain(
            "probe displacement must be positive".into(),
        ));
    }
    // Small-displacement condition: the probe must stay perturbative on the
    // highest component it couples, eps <= 1/sqrt(n_max) with n_max = n + 1.
    let guard = 1.0 / ((n + 1) as f64).sqrt();
    if setup.epsilon > guard {
        return Err(SimError::Domain(format!(
            "probe displacement {} exceeds the small-displacement bound {guard:.4} \
             for component {}",
            setup.epsilon,
            n + 1
        )));
    }
    let base = prepared_state(setup, delta_t)?;

    let mut probabilities = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let mut phases = vec![0.0; n + 2];
        phases[n + 1] = theta;
        let gate = PhaseVector::new(phases);
        let p = match setup.mode {
            GateMode::Ideal => {
                let gated = apply_snap(&gate, &base);
                let probed = probe.apply(&gated)?;
                probed.population(n)
            }
            GateMode::Pulse { width } => {
                let program = snap_pulse_pair(n + 1, theta, width, setup.params)?;
                let joint = JointState::from_cavity(false, &base);
                let out = simulate_drive(&joint, &program.pulses, setup.params, None)?;
                let (cavity, _residual) = out.project_ground()?;
                let probed = probe.apply(&cavity)?;
                measure_number(&probed, n, width, setup.params)?
            }
        };
        probabilities.push(p);
    }
    Ok(InterferenceCurve {
        n,
        delta_t,
        thetas: thetas.to_vec(),
        probabilities,
    })
}

/// Least-squares sinusoid fit of an interference curve.
#[derive(Debug, Clone, Copy)]
pub struct SinusoidFit {
    /// Mean level B in p = B + A cos(theta - phase_of_max).
    pub offset: f64,
    /// Non-negative modulation amplitude A.
    pub amplitude: f64,
    /// Location of the curve maximum.
    pub phase_of_max: f64,
    /// Location of the curve minimum = the relative phase arg(c*_{n+1} c_n).
    pub extracted_phase: f64,
    pub residual_rms: f64,
    /// 1-sigma statistical uncertainty of the extracted phase.
    pub phase_sigma: f64,
}

/// Fit p = B + A cos(theta - theta0) by linear least squares on the basis
/// {1, cos theta, sin theta}. Needs at least 8 samples spanning most of the
/// circle; an amplitude within three standard errors of zero is reported as
/// a low-contrast error because the minimum position is then meaningless.
pub fn fit_sinusoid(thetas: &[f64], values: &[f64]) -> Result<SinusoidFit> {
    let m = thetas.len();
    if m != values.len() {
        return Err(SimError::DimensionMismatch {
            left: m,
            right: values.len(),
        });
    }
    if m < 8 {
        return Err(SimError::Domain(format!(
            "sinusoid fit needs at least 8 samples, got {m}"
        )));
    }
    let span = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - thetas.iter().copied().fold(f64::INFINITY, f64::min);
    if span < 2.0 * PI * (1.0 - 2.0 / m as f64) {
        return Err(SimError::Domain(format!(
            "samples span {span:.3} rad; need most of the full circle"
        )));
    }

    // Normal equations for the 3-parameter linear model.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (&t, &y) in thetas.iter().zip(values) {
        let row = [1.0, t.cos(), t.sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let mat = nalgebra::Matrix3::from_fn(|i, j| ata[i][j]);
    let rhs = nalgebra::Vector3::from_row_slice(&atb);
    let sol = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| SimError::Underdetermined("singular sinusoid design".into()))?;
    let (offset, c, s) = (sol[0], sol[1], sol[2]);
    let amplitude = c.hypot(s);
    let phase_of_max = s.atan2(c);

    let residual_rms = {
        let ss: f64 = thetas
            .iter()
            .zip(values)
            .map(|(&t, &y)| {
                let r = y - (offset + c * t.cos() + s * t.sin());
                r * r
            })
            .sum();
        (ss / m as f64).sqrt()
    };
    // Standard error of the fitted amplitude with white residuals; averaging
    // over the circle beats the per-point noise down by sqrt(m / 2).
    let dof_rms = {
        let ss = residual_rms * residual_rms * m as f64;
        (ss / (m - 3) as f64).sqrt()
    };
    let amp_sigma = dof_rms * (2.0 / m as f64).sqrt();
    let floor = 3.0 * amp_sigma + 1e-12;
    if amplitude < floor {
        return Err(SimError::LowContrast {
            contrast: amplitude,
            floor,
        });
    }
    let phase_sigma = amp_sigma / amplitude;

    Ok(SinusoidFit {
        offset,
        amplitude,
        phase_of_max,
        extracted_phase: wrap_phase(phase_of_max + PI),
        residual_rms,
        phase_sigma,
    })
}

/// Additive Gaussian read-out noise on each probability sample.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Extracted phases of one photon-number component across waiting times.
#[derive(Debug, Clone)]
pub struct PhaseTrace {
    pub n: usize,
    pub dts: Vec<f64>,
    /// Wrapped per-point extractions.
    pub raw_phases: Vec<f64>,
    /// Continuously unwrapped phases, anchored at the first waiting time.
    pub phases: Vec<f64>,
    pub phase_sigmas: Vec<f64>,
    /// Phase accumulation rate d(phi)/d(delta_t) in rad/s.
    pub slope: Fitted,
    pub intercept: Fitted,
}

/// Full phase-evolution data set for one qubit branch. Carries the scan
/// conditions (preparation, probe, truncation) so later fit stages can
/// evaluate the measurement model without re-supplying the setup.
#[derive(Debug, Clone)]
pub struct PhaseEvolutionData {
    pub qubit_excited: bool,
    pub frame_shift: f64,
    pub alpha: C64,
    pub epsilon: f64,
    pub dim: usize,
    pub traces: Vec<PhaseTrace>,
}

/// Run interference scans over photon numbers `ns` and waiting times `dts`,
/// extract the relative phase of each curve, unwrap along the waiting time,
/// and fit the per-component accumulation rates.
///
/// Probabilities are computed in parallel over curves; noise is then drawn
/// sequentially in a fixed order from a seeded generator, so results are
/// identical in parallel and sequential builds.
pub fn phase_evolution_experiment(
    setup: &ScanSetup,
    ns: &[usize],
    dts: &[f64],
    thetas: &[f64],
    noise: Option<&NoiseSpec>,
) -> Result<PhaseEvolutionData> {
    if ns.is_empty() || dts.is_empty() {
        return Err(SimError::Domain("empty scan grids".into()));
    }
    if dts.windows(2).any(|w| w[1] <= w[0]) || dts[0] < 0.0 {
        return Err(SimError::Domain(
            "waiting times must be non-negative and strictly increasing".into(),
        ));
    }

    let probe = Operator::displacement(C64::new(setup.epsilon, 0.0), setup.dim)?;
    let n_curves = ns.len() * dts.len();
    let mut curves: Vec<InterferenceCurve> = par::try_map_indexed(n_curves, |flat| {
        let n = ns[flat / dts.len()];
        let dt = dts[flat % dts.len()];
        scan_with_probe(setup, n, dt, thetas, &probe)
    })?;

    if let Some(spec) = noise {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let dist = Normal::new(0.0, spec.sigma)
            .map_err(|e| SimError::Domain(format!("bad noise sigma: {e}")))?;
        for curve in &mut curves {
            for p in &mut curve.probabilities {
                *p += dist.sample(&mut rng);
            }
        }
    }

    let mut traces = Vec::with_capacity(ns.len());
    for (i_n, &n) in ns.iter().enumerate() {
        let mut raw = Vec::with_capacity(dts.len());
        let mut sigmas = Vec::with_capacity(dts.len());
        for i_t in 0..dts.len() {
            let fit = fit_sinusoid(thetas, &curves[i_n * dts.len() + i_t].probabilities)?;
            raw.push(fit.extracted_phase);
            sigmas.push(fit.phase_sigma);
        }
        let mut phases = Vec::with_capacity(dts.len());
        phases.push(raw[0]);
        for k in 1..dts.len() {
            let step = wrap_phase(raw[k] - raw[k - 1]);
            if step.abs() > PHASE_ALIAS_LIMIT {
                return Err(SimError::PhaseAliasing { step });
            }
            phases.push(phases[k - 1] + step);
        }
        let (slope, intercept) = weighted_line_fit(dts, &phases, &sigmas)?;
        traces.push(PhaseTrace {
            n,
            dts: dts.to_vec(),
            raw_phases: raw,
            phases,
            phase_sigmas: sigmas,
            slope,
            intercept,
        });
    }

    Ok(PhaseEvolutionData {
        qubit_excited: setup.qubit_excited,
        frame_shift: if setup.qubit_excited {
            setup.frame_shift
        } else {
            0.0
        },
        alpha: setup.alpha,
        epsilon: setup.epsilon,
        dim: setup.dim,
        traces,
    })
}

/// Exact model of what an ideal-mode scan extracts for one (n, delta_t).
///
/// The curve is a single harmonic in theta, so the fitted minimum is set by
/// the e^{i theta} Fourier coefficient A1 * conj(a0), where A1 is the probe
/// matrix element carrying the gate phase and a0 collects all other leakage
/// into <n|. Returns (modeled minimum, ideal relative phase); their wrapped
/// difference is the probe-induced bias of the extraction.
fn modeled_minimum(
    setup: &ScanSetup,
    probe: &Operator,
    n: usize,
    delta_t: f64,
) -> Result<(f64, f64)> {
    let base = prepared_state(setup, delta_t)?;
    let probed = probe.apply(&base)?;
    let a1 = probe.matrix()[(n, n + 1)] * base.amplitude(n + 1);
    let a0 = probed.amplitude(n) - a1;
    let modeled = wrap_phase(PI - (a1 * a0.conj()).arg());
    let ideal = (base.amplitude(n + 1).conj() * base.amplitude(n)).arg();
    Ok((modeled, ideal))
}

/// Remove the probe-induced shift of every curve minimum using the full
/// measurement model evaluated at a parameter estimate, then refit the
/// accumulation rates.
///
/// The probe displacement does not only couple |n+1> into |n>: it also leaks
/// the lower neighbour |n-1> in at first order in epsilon, shifting the
/// fitted minimum by ~ (eps n / alpha) sin((E(n) - E(n-1)) delta_t) for a
/// coherent preparation, plus two-photon terms of order eps^2. The shift is
/// a deterministic function of quantities the experiment controls (probe
/// amplitude, preparation, protocol) and of the Hamiltonian estimate, so
/// iterating fit -> subtract -> refit converges to unbiased rates. The model
/// assumes ideal gates; applied to pulsed scans it removes the probe part of
/// the shift only.
pub fn subtract_probe_bias(
    data: &PhaseEvolutionData,
    params: &HamiltonianParams,
) -> Result<PhaseEvolutionData> {
    let setup = ScanSetup {
        params,
        dim: data.dim,
        alpha: data.alpha,
        qubit_excited: data.qubit_excited,
        frame_shift: data.frame_shift,
        epsilon: data.epsilon,
        mode: GateMode::Ideal,
    };
    let probe = Operator::displacement(C64::new(setup.epsilon, 0.0), setup.dim)?;
    let mut traces = Vec::with_capacity(data.traces.len());
    for trace in &data.traces {
        if trace.n + 1 >= setup.dim {
            return Err(SimError::Domain(format!(
                "component {} out of range for dim {}",
                trace.n + 1,
                setup.dim
            )));
        }
        let mut phases = Vec::with_capacity(trace.phases.len());
        for (k, &dt) in trace.dts.iter().enumerate() {
            let (modeled, ideal) = modeled_minimum(&setup, &probe, trace.n, dt)?;
            phases.push(trace.phases[k] - wrap_phase(modeled - ideal));
        }
        let (slope, intercept) = weighted_line_fit(&trace.dts, &phases, &trace.phase_sigmas)?;
        traces.push(PhaseTrace {
            n: trace.n,
            dts: trace.dts.clone(),
            raw_phases: trace.raw_phases.clone(),
            phases,
            phase_sigmas: trace.phase_sigmas.clone(),
            slope,
            intercept,
        });
    }
    Ok(PhaseEvolutionData {
        traces,
        ..data.clone()
    })
}

/// Weighted straight-line fit y = a + b x with per-point sigmas; returns
/// (slope, intercept) with uncertainties inflated by sqrt(reduced chi^2)
/// when the scatter exceeds the stated noise.
pub(crate) fn weighted_line_fit(
    xs: &[f64],
    ys: &[f64],
    sigmas: &[f64],
) -> Result<(Fitted, Fitted)> {
    let m = xs.len();
    if m < 2 {
        return Err(SimError::Underdetermined(format!(
            "line fit needs at least 2 points, got {m}"
        )));
    }
    let ws: Vec<f64> = sigmas.iter().map(|s| s.max(1e-9).powi(-2)).collect();
    let sw: f64 = ws.iter().sum();
    let x_bar = xs.iter().zip(&ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let y_bar = ys.iter().zip(&ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(x, w)| w * (x - x_bar).powi(2))
        .sum();
    if sxx <= 0.0 {
        return Err(SimError::Underdetermined("degenerate abscissa".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - x_bar) * (y - y_bar))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;

    let chi2: f64 = xs
        .iter()
        .zip(ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let scale = if m > 2 {
        (chi2 / (m - 2) as f64).max(1.0)
    } else {
        1.0
    };
    let slope_sigma = (scale / sxx).sqrt();
    let intercept_sigma = (scale * (1.0 / sw + x_bar * x_bar / sxx)).sqrt();
    Ok((
        Fitted {
            value: slope,
            sigma: slope_sigma,
        },
        Fitted {
            value: intercept,
            sigma: intercept_sigma,
        },
    ))
}
