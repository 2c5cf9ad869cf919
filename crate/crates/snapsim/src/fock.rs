//! Truncated Fock-space states, operators and fidelity primitives.
//!
//! Everything downstream (gates, free evolution, pulse simulation, Wigner
//! analysis) works on the types defined here. States live in a truncated
//! basis |0..dim-1> and every public operation keeps them normalized to
//! within 1e-9. Truncation quality is a measurable diagnostic, not an
//! assumption: see [`CavityState::truncation_leakage`].

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Result, SimError};

pub type C64 = Complex<f64>;

/// Population below which a component's phase is reported as undefined.
pub const PHASE_UNDEFINED_POP: f64 = 1e-12;
/// Default bound on the top-two-component population for an operation to be
/// considered truncation-safe.
pub const TRUNCATION_GUARD: f64 = 1e-6;
/// Norm drift tolerated before `apply` refuses to renormalize.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Pure cavity state: amplitudes c_n over the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityState {
    amp: DVector<C64>,
}

impl CavityState {
    /// Basis state |n> in a `dim`-dimensional truncation.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(SimError::Domain(format!(
                "fock level {n} outside truncation 0..{dim}"
            )));
        }
        let mut amp = DVector::zeros(dim);
        amp[n] = C64::new(1.0, 0.0);
        Ok(Self { amp })
    }

    /// Coherent state |alpha>: c_n = e^{-|a|^2/2} a^n / sqrt(n!), renormalized
    /// after truncation. Photon statistics are Poisson with mean |alpha|^2.
    pub fn coherent(alpha: C64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let nbar = alpha.norm_sqr();
        if nbar > dim as f64 / 4.0 {
            return Err(SimError::Truncation(format!(
                "|alpha|^2 = {nbar:.3} exceeds dim/4 = {:.3}",
                dim as f64 / 4.0
            )));
        }
        let mut amp = DVector::zeros(dim);
        // recurrence c_{n+1} = c_n * alpha / sqrt(n+1) avoids factorial overflow
        let mut c = C64::new((-nbar / 2.0).exp(), 0.0);
        for n in 0..dim {
            amp[n] = c;
            c *= alpha / ((n + 1) as f64).sqrt();
        }
        let norm = amp.norm();
        amp /= C64::new(norm, 0.0);
        Ok(Self { amp })
    }

    /// Build from raw amplitudes; rejects inputs whose norm deviates from one
    /// by more than the drift limit, otherwise renormalizes exactly.
    pub fn from_amplitudes(amp: Vec<C64>) -> Result<Self> {
        check_dim(amp.len())?;
        let amp = DVector::from_vec(amp);
        let norm = amp.norm();
        if (norm - 1.0).abs() > NORM_DRIFT_LIMIT {
            return Err(SimError::Domain(format!(
                "amplitude vector norm {norm:.6} is not 1"
            )));
        }
        Ok(Self {
            amp: amp / C64::new(norm, 0.0),
        })
    }

    /// Build from arbitrary nonzero amplitudes, normalizing whatever comes in.
    pub fn from_unnormalized(amp: DVector<C64>) -> Result<Self> {
        check_dim(amp.len())?;
        let norm = amp.norm();
        if norm < 1e-300 {
            return Err(SimError::Domain("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amp: amp / C64::new(norm, 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amp
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amp[n]
    }

    /// p(n) = |c_n|^2.
    pub fn population(&self, n: usize) -> f64 {
        self.amp[n].norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amp.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Population in the top two truncation levels. Small values certify that
    /// the cutoff did not bite.
    pub fn truncation_leakage(&self) -> f64 {
        let d = self.dim();
        self.population(d - 1) + self.population(d - 2)
    }

    pub fn is_truncation_safe(&self, guard: f64) -> bool {
        self.truncation_leakage() < guard
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        check_same(self.dim(), other.dim())?;
        Ok(self.amp.dotc(&other.amp))
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// <self|rho|self>.
    pub fn fidelity_mixed(&self, rho: &DensityMatrix) -> Result<f64> {
        check_same(self.dim(), rho.dim())?;
        let v = rho.matrix() * &self.amp;
        Ok(self.amp.dotc(&v).re)
    }

    /// Rotate the global phase so the lowest-occupied component is real and
    /// non-negative. Interference and phasor code fix gauge this way.
    pub fn gauge_fixed(&self) -> Self {
        let pivot = self
            .amp
            .iter()
            .find(|c| c.norm_sqr() >= PHASE_UNDEFINED_POP);
        match pivot {
            Some(c) => {
                let phase = C64::from_polar(1.0, -c.arg());
                Self {
                    amp: self.amp.map(|a| a * phase),
                }
            }
            None => self.clone(),
        }
    }

    /// Per-component magnitude and phase, with phases of unpopulated
    /// components flagged rather than left as numerical noise.
    pub fn phasor_view(&self) -> PhasorView {
        let entries = self
            .amp
            .iter()
            .map(|c| {
                let p = c.norm_sqr();
                if p < PHASE_UNDEFINED_POP {
                    PhasorEntry {
                        magnitude: p.sqrt(),
                        phase: 0.0,
                        phase_defined: false,
                    }
                } else {
                    PhasorEntry {
                        magnitude: p.sqrt(),
                        phase: c.arg(),
                        phase_defined: true,
                    }
                }
            })
            .collect();
        PhasorView { entries }
    }

    pub(crate) fn map_amplitudes(&self, f: impl Fn(usize, C64) -> C64) -> Self {
        let amp = DVector::from_iterator(
            self.dim(),
            self.amp.iter().enumerate().map(|(n, &c)| f(n, c)),
        );
        Self { amp }
    }
}

/// Magnitude sqrt(p(n)) and phase arg(c_n) of one Fock component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasorEntry {
    pub magnitude: f64,
    pub phase: f64,
    /// False when the component is unpopulated and the phase is meaningless.
    pub phase_defined: bool,
}

/// Phasor representation of a cavity state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorView {
    pub entries: Vec<PhasorEntry>,
}

impl PhasorView {
    pub fn total_population(&self) -> f64 {
        self.entries.iter().map(|e| e.magnitude * e.magnitude).sum()
    }
}

/// Dense operator on the truncated space. `unitary_intent` marks operators
/// that are unitary in the untruncated theory, enabling drift checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
    unitary_intent: bool,
}

impl Operator {
    pub fn new(mat: DMatrix<C64>, unitary_intent: bool) -> Result<Self> {
        if !mat.is_square() {
            return Err(SimError::Domain("operator matrix must be square".into()));
        }
        check_dim(mat.nrows())?;
        Ok(Self {
            mat,
            unitary_intent,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
            unitary_intent: true,
        }
    }

    /// Annihilation operator: a|n> = sqrt(n)|n-1>.
    pub fn annihilation(dim: usize) -> Self {
        let mut mat = DMatrix::zeros(dim, dim);
        for n in 1..dim {
            mat[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self {
            mat,
            unitary_intent: false,
        }
    }

    pub fn creation(dim: usize) -> Self {
        Self {
            mat: Self::annihilation(dim).mat.adjoint(),
            unitary_intent: false,
        }
    }

    /// Number operator n = a†a, diagonal.
    pub fn number(dim: usize) -> Self {
        let mat = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            mat,
            unitary_intent: false,
        }
    }

    /// Photon-number parity (-1)^n, diagonal.
    pub fn parity(dim: usize) -> Self {
        let mat = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            mat,
            unitary_intent: true,
        }
    }

    /// Displacement D(alpha) = exp(alpha a† - alpha* a), built by dense
    /// matrix exponential so truncation error stays on one code path.
    pub fn displacement(alpha: C64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let a = Self::annihilation(dim).mat;
        let adag = a.adjoint();
        let gen = adag * alpha - a * alpha.conj();
        Ok(Self {
            mat: gen.exp(),
            unitary_intent: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn unitary_intent(&self) -> bool {
        self.unitary_intent
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            unitary_intent: self.unitary_intent,
        }
    }

    /// Operator product self * other (other acts first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same(self.dim(), other.dim())?;
        Ok(Self {
            mat: &self.mat * &other.mat,
            unitary_intent: self.unitary_intent && other.unitary_intent,
        })
    }

    /// Raw matrix-vector product without normalization or checks.
    pub fn mul_vec(&self, state: &CavityState) -> Result<DVector<C64>> {
        check_same(self.dim(), state.dim())?;
        Ok(&self.mat * state.amplitudes())
    }

    /// Apply to a state. The result is renormalized when the norm drift is
    /// below [`NORM_DRIFT_LIMIT`]; larger drift signals a numerically broken
    /// (or genuinely non-unitary) application and is an error.
    pub fn apply(&self, state: &CavityState) -> Result<CavityState> {
        let out = self.mul_vec(state)?;
        let norm = out.norm();
        let drift = (norm - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(SimError::NormDrift {
                context: "operator application",
                drift,
                limit: NORM_DRIFT_LIMIT,
            });
        }
        Ok(CavityState {
            amp: out / C64::new(norm, 0.0),
        })
    }

    /// max |(U†U - I)_ij| over the leading `block` x `block` sub-block.
    /// Truncation makes the top rows of a displacement non-unitary; the
    /// physically used lower block must still pass.
    pub fn unitarity_defect(&self, block: usize) -> f64 {
        let block = block.min(self.dim());
        let prod = self.mat.adjoint() * &self.mat;
        let mut worst: f64 = 0.0;
        for i in 0..block {
            for j in 0..block {
                let expect = if i == j { 1.0 } else { 0.0 };
                let d = (prod[(i, j)] - C64::new(expect, 0.0)).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Expectation <psi|A|psi>.
    pub fn expectation(&self, state: &CavityState) -> Result<C64> {
        let v = self.mul_vec(state)?;
        Ok(state.amplitudes().dotc(&v))
    }
}

/// Trace-one Hermitian density matrix over the cavity or joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(SimError::Domain("density matrix must be square".into()));
        }
        check_dim(mat.nrows())?;
        let dm = Self { mat };
        dm.validate()?;
        Ok(dm)
    }

    /// Wrap without validity checks; used by integrators that monitor drift
    /// themselves.
    pub(crate) fn new_unchecked(mat: DMatrix<C64>) -> Self {
        Self { mat }
    }

    pub fn from_pure(state: &CavityState) -> Self {
        let amp = state.amplitudes();
        Self {
            mat: amp * amp.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    /// Tr(rho^2); 1 for pure states.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).diagonal().sum().re
    }

    pub fn population(&self, n: usize) -> f64 {
        self.mat[(n, n)].re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let diff = &self.mat - self.mat.adjoint();
        diff.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.mat + self.mat.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Hermitian 1e-9, trace one 1e-9, eigenvalues >= -1e-9.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > 1e-9 {
            return Err(SimError::Domain(format!(
                "density matrix not Hermitian: defect {h:.3e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(SimError::Domain(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        let min_ev = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min_ev < -1e-9 {
            return Err(SimError::Domain(format!(
                "density matrix has negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(())
    }

    /// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        check_same(self.dim(), other.dim())?;
        let sqrt_rho = hermitian_sqrt(&self.mat);
        let inner = &sqrt_rho * other.matrix() * &sqrt_rho;
        let herm = (&inner + inner.adjoint()).scale(0.5);
        let ev = herm.symmetric_eigen().eigenvalues;
        let tr: f64 = ev.iter().map(|&l| l.max(0.0).sqrt()).sum();
        Ok(tr * tr)
    }

    /// Trace distance (1/2)||rho - sigma||_1.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        check_same(self.dim(), other.dim())?;
        let diff = &self.mat - &other.mat;
        let herm = (&diff + diff.adjoint()).scale(0.5);
        let ev = herm.symmetric_eigen().eigenvalues;
        Ok(0.5 * ev.iter().map(|l| l.abs()).sum::<f64>())
    }
}

/// Principal square root of a Hermitian PSD matrix, clipping small negative
/// eigenvalues to zero.
fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let d = m.nrows();
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        let lk = eig.eigenvalues[k].max(0.0).sqrt();
        if lk == 0.0 {
            continue;
        }
        let vk = eig.eigenvectors.column(k);
        out += (vk * vk.adjoint()).scale(lk);
    }
    out
}

/// Fidelity between pure states (convenience free function).
pub fn fidelity(a: &CavityState, b: &CavityState) -> Result<f64> {
    a.fidelity(b)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(SimError::Domain(format!("dim {dim} < 2")));
    }
    Ok(())
}

pub(crate) fn check_same(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(SimError::DimensionMismatch { left, right });
    }
    Ok(())
}
