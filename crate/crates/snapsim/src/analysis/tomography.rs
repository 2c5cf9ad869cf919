//! Density-matrix reconstruction from Wigner samples, and pure-state
//! assembly from measured populations and relative phases.
//!
//! Each Wigner value is linear in the density matrix:
//! W(alpha) = Tr[A(alpha) rho] with A = (2/pi) D(alpha) P D(alpha)^dag.
//! Reconstruction solves the real least-squares system over a Hermitian
//! parameterization (diagonal entries, then real/imaginary parts of each
//! upper-triangle entry), clips negative eigenvalues, and renormalizes.
//!
//! The observable must be computed in a space larger than the reconstruction
//! cutoff: restricted to the cutoff space itself, the displaced-parity
//! family spans only dim (dim + 1) / 2 of the dim^2 Hermitian directions
//! (the imaginary parts drop out), so every sample configuration looks
//! rank-deficient no matter how it is chosen. Embedding the displacement in
//! enough levels to hold the displaced number states restores the full span.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};
use crate::fock::{CavityState, DensityMatrix, Operator, C64};
use crate::par;

use super::wigner::WignerGrid;

/// One phase-space sample of the Wigner function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSample {
    pub alpha: C64,
    pub value: f64,
}

impl WignerGrid {
    /// Flatten the grid into (alpha, value) samples in deterministic
    /// row-major order.
    pub fn samples(&self) -> Vec<WignerSample> {
        let xs = self.spec.xs();
        let ps = self.spec.ps();
        let mut out = Vec::with_capacity(xs.len() * ps.len());
        for (ip, p) in ps.iter().enumerate() {
            for (ix, x) in xs.iter().enumerate() {
                out.push(WignerSample {
                    alpha: C64::new(*x, *p),
                    value: self.value(ix, ip),
                });
            }
        }
        out
    }
}

/// Levels needed to compute the displaced-parity observable accurately for
/// a `dim`-level reconstruction with samples out to radius `amax`: the
/// displaced number states D(alpha)|n<dim> must fit, which takes about
/// (|alpha| + sqrt(dim) + 2)^2 levels including tail room.
fn parity_embedding_dim(dim: usize, amax: f64) -> usize {
    let spread = (amax + (dim as f64).sqrt() + 2.0).powi(2);
    (spread.ceil() as usize + 4).max(2 * dim)
}

/// Displaced-parity observable A(alpha) = (2/pi) D(alpha) P D(alpha)^dag,
/// computed on `embed` levels and restricted to the leading `dim` block.
/// Direct single-displacement form, kept as the oracle for the factored
/// [`parity_blocks`] used in production.
#[cfg(test)]
fn displaced_parity_block(alpha: C64, dim: usize, embed: usize) -> Result<DMatrix<C64>> {
    let d = Operator::displacement(alpha, embed)?;
    let dm = d.matrix();
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..embed {
                let term = dm[(i, m)] * dm[(j, m)].conj();
                acc += if m % 2 == 0 { term } else { -term };
            }
            a[(i, j)] = acc * C64::new(2.0 / std::f64::consts::PI, 0.0);
        }
    }
    Ok(a)
}

/// The same observable block for every sample, factoring each displacement
/// as D(x + ip) = phase * D(x) D(ip) so that the expensive exponentials are
/// built once per distinct coordinate value (the unit phase cancels inside
/// D P D^dag). Returns one dim x dim block per sample.
fn parity_blocks(samples: &[WignerSample], dim: usize, embed: usize) -> Result<Vec<DMatrix<C64>>> {
    let mut xs: Vec<f64> = samples.iter().map(|s| s.alpha.re).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut ps: Vec<f64> = samples.iter().map(|s| s.alpha.im).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let x_index: HashMap<u64, usize> = xs
        .iter()
        .enumerate()
        .map(|(k, &v)| (v.to_bits(), k))
        .collect();
    let p_index: HashMap<u64, usize> = ps
        .iter()
        .enumerate()
        .map(|(k, &v)| (v.to_bits(), k))
        .collect();

    // Real-axis displacements, kept as their leading `dim` rows.
    let x_rows: Vec<DMatrix<C64>> = par::try_map_indexed(xs.len(), |k| -> Result<DMatrix<C64>> {
        let d = Operator::displacement(C64::new(xs[k], 0.0), embed)?;
        Ok(d.matrix().rows(0, dim).into_owned())
    })?;
    // Imaginary-axis displacements conjugating the parity:
    // C(p) = D(ip) P D(ip)^dag.
    let p_cores: Vec<DMatrix<C64>> = par::try_map_indexed(ps.len(), |l| -> Result<DMatrix<C64>> {
        let d = Operator::displacement(C64::new(0.0, ps[l]), embed)?;
        let m = d.matrix();
        let mut signed = m.clone();
        for col in 0..embed {
            if col % 2 == 1 {
                signed.column_mut(col).neg_mut();
            }
        }
        Ok(signed * m.adjoint())
    })?;

    let scale = C64::new(2.0 / std::f64::consts::PI, 0.0);
    par::try_map_indexed(samples.len(), |s| -> Result<DMatrix<C64>> {
        let k = x_index[&samples[s].alpha.re.to_bits()];
        let l = p_index[&samples[s].alpha.im.to_bits()];
        let xr = &x_rows[k];
        let tmp = &p_cores[l] * xr.adjoint();
        Ok(xr * tmp * scale)
    })
}

/// Least-squares reconstruction of a density matrix on a `dim`-level space
/// from Wigner samples. Needs at least dim^2 samples in a configuration
/// that determines every matrix element (any regular grid wider than the
/// state does); rank deficiency reports an underdetermined-fit error.
pub fn reconstruct_density_matrix(samples: &[WignerSample], dim: usize) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(SimError::Domain("reconstruction dimension is zero".into()));
    }
    let n_params = dim * dim;
    if samples.len() < n_params {
        return Err(SimError::Underdetermined(format!(
            "{} samples for {} real parameters",
            samples.len(),
            n_params
        )));
    }

    // Upper-triangle index pairs in deterministic order.
    let mut pairs = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            pairs.push((i, j));
        }
    }

    let amax = samples
        .iter()
        .map(|s| s.alpha.norm())
        .fold(0.0f64, f64::max);
    let embed = parity_embedding_dim(dim, amax);
    let blocks = parity_blocks(samples, dim, embed)?;
    let rows: Vec<Vec<f64>> = blocks
        .iter()
        .map(|a| {
            let mut row = Vec::with_capacity(n_params);
            for i in 0..dim {
                row.push(a[(i, i)].re);
            }
            for &(i, j) in &pairs {
                row.push(2.0 * a[(i, j)].re);
                row.push(2.0 * a[(i, j)].im);
            }
            row
        })
        .collect();

    let design = DMatrix::<f64>::from_fn(samples.len(), n_params, |r, c| rows[r][c]);
    let rhs = DVector::<f64>::from_iterator(samples.len(), samples.iter().map(|s| s.value));

    let svd = design.svd(true, true);
    let s_max = svd
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s));
    let rank_tol = s_max * 1e-10;
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > rank_tol)
        .count();
    if rank < n_params {
        return Err(SimError::Underdetermined(format!(
            "sample configuration has rank {rank} < {n_params}; widen or refine the grid"
        )));
    }
    let solution = svd
        .solve(&rhs, rank_tol)
        .map_err(|e| SimError::Underdetermined(e.to_string()))?;

    // Assemble the Hermitian estimate.
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..dim {
        rho[(i, i)] = C64::new(solution[i], 0.0);
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let u = solution[dim + 2 * k];
        let v = solution[dim + 2 * k + 1];
        rho[(i, j)] = C64::new(u, v);
        rho[(j, i)] = C64::new(u, -v);
    }

    // Project onto the physical set: clip negative eigenvalues, renormalize.
    let eig = rho.symmetric_eigen();
    let mut rebuilt = DMatrix::<C64>::zeros(dim, dim);
    let mut trace = 0.0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        trace += lambda;
        let v = eig.eigenvectors.column(k);
        let vc = DVector::<C64>::from_iterator(dim, v.iter().copied());
        rebuilt += &vc * vc.adjoint() * C64::new(lambda, 0.0);
    }
    if trace <= 0.0 {
        return Err(SimError::OptimizationFailure(
            "reconstruction produced no positive eigenvalues".into(),
        ));
    }
    rebuilt /= C64::new(trace, 0.0);
    DensityMatrix::new(rebuilt)
}

/// Assemble a pure state from measured populations p(n) and the relative
/// phases phi_n = arg(c*_{n+1} c_n) extracted by interference scans. The
/// lowest component is taken real non-negative (the same gauge the rest of
/// the toolkit uses).
pub fn pure_state_from_populations_and_phases(
    populations: &[f64],
    rel_phases: &[f64],
) -> Result<CavityState> {
    if populations.is_empty() {
        return Err(SimError::Domain("no populations given".into()));
    }
    if rel_phases.len() + 1 != populations.len() {
        return Err(SimError::DimensionMismatch {
            left: populations.len(),
            right: rel_phases.len() + 1,
        });
    }
    if populations.iter().any(|&p| p < -1e-12) {
        return Err(SimError::Domain("negative population".into()));
    }
    let mut arg = 0.0;
    let mut amp = Vec::with_capacity(populations.len());
    for (n, &p) in populations.iter().enumerate() {
        amp.push(C64::from_polar(p.max(0.0).sqrt(), arg));
        if n < rel_phases.len() {
            // phi_n = arg c_n - arg c_{n+1}  =>  next = current - phi_n
            arg -= rel_phases[n];
        }
    }
    CavityState::from_unnormalized(DVector::from_vec(amp))
}
