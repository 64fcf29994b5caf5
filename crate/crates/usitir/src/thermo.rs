//! Entropies, relative entropies, Gibbs states, free energies, decoherence
//! and averaged reduced states.
//!
//! Unit convention: every entropy is reported in bits and every work or
//! energy in units of k_B T (beta defaults to 1), so expressions of the form
//! k_B T (ln 2)(... bits ...) become (ln 2)(... bits ...).

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::operator::{
    self, eig_hermitian, partial_trace, tol, CMatrix, DensityMatrix,
    HermitianOperator, HilbertSpace, Statistics,
};

/// Inverse temperature in units of 1/(k_B T); 1 by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalContext {
    beta: f64,
}

impl Default for ThermalContext {
    fn default() -> Self {
        Self { beta: 1.0 }
    }
}

impl ThermalContext {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidScenario(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// -sum lambda log2 lambda, in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    (-rho.spectrum().iter().map(|&l| xlog2x(l)).sum::<f64>()).max(0.0)
}

/// S(sigma || tau) = Tr{sigma ln sigma - sigma ln tau} scaled to bits.
/// Returns +infinity when the support of sigma leaks outside that of tau.
pub fn relative_entropy(sigma: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    if sigma.dim() != tau.dim() {
        return Err(Error::DimensionMismatch(sigma.dim(), tau.dim()));
    }
    let tau_h = HermitianOperator::new(tau.matrix().clone())?;
    let (tvals, tvecs) = eig_hermitian(&tau_h);
    // support test: tau eigenvalue < 1e-12 carrying sigma weight > 1e-10
    let mut log_tau_diag = Vec::with_capacity(tvals.len());
    for (i, &t) in tvals.iter().enumerate() {
        let v = tvecs.column(i);
        let weight = (v.adjoint() * sigma.matrix() * v)[(0, 0)].re;
        if t < 1e-12 {
            if weight > 1e-10 {
                return Ok(f64::INFINITY);
            }
            log_tau_diag.push(0.0); // no sigma weight here; value is irrelevant
        } else {
            log_tau_diag.push(t.log2());
        }
    }
    let mut cross = 0.0;
    for (i, &lt) in log_tau_diag.iter().enumerate() {
        let v = tvecs.column(i);
        let weight = (v.adjoint() * sigma.matrix() * v)[(0, 0)].re;
        cross += weight.max(0.0) * lt;
    }
    let s_sigma: f64 = sigma.spectrum().iter().map(|&l| xlog2x(l)).sum();
    Ok((s_sigma - cross).max(0.0))
}

/// e^{-beta H} / Tr e^{-beta H}; the spectrum is shifted by its minimum
/// before exponentiating to guard against overflow.
pub fn gibbs_state(h: &HermitianOperator, ctx: &ThermalContext) -> DensityMatrix {
    let (vals, vecs) = eig_hermitian(h);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = vals.iter().map(|&v| (-ctx.beta() * (v - min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let diag: Vec<num_complex::Complex64> =
        weights.iter().map(|&w| num_complex::Complex64::new(w / z, 0.0)).collect();
    let m = &vecs * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)) * vecs.adjoint();
    let m = (&m + m.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
    let space = space_for_dim(h.dim());
    DensityMatrix::new(space, m).expect("Gibbs construction yields a valid state")
}

// Gibbs states and free energies are spectrum-level objects; the Hilbert
// space label only records the dimension here.
fn space_for_dim(dim: usize) -> HilbertSpace {
    HilbertSpace::new(1, dim, Statistics::Distinguishable).expect("positive dimension")
}

/// Helmholtz free energy -(1/beta) ln Tr e^{-beta H}, in units of k_B T.
pub fn free_energy(h: &HermitianOperator, ctx: &ThermalContext) -> f64 {
    let (vals, _) = eig_hermitian(h);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let z_shifted: f64 = vals.iter().map(|&v| (-ctx.beta() * (v - min)).exp()).sum();
    min - z_shifted.ln() / ctx.beta()
}

/// Diagonal part of rho in the computational basis.
pub fn decohere(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = num_complex::Complex64::new(rho.matrix()[(i, i)].re.max(0.0), 0.0);
    }
    DensityMatrix::new(rho.space(), m).expect("diagonal of a valid state is valid")
}

/// (1/N) sum_k decohere(rho^(k)) over the single-qubit reduced states.
pub fn averaged_decohered_reduced(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let space = rho.space();
    if space.statistics() != Statistics::Distinguishable {
        return Err(Error::UnsupportedStatistics {
            required: "distinguishable".into(),
            got: space.statistics().to_string(),
        });
    }
    let n = space.n_particles();
    let d = space.local_dim();
    let mut acc = CMatrix::zeros(d, d);
    for k in 1..=n {
        let reduced = decohere(&partial_trace(rho, &[k])?);
        acc += reduced.matrix();
    }
    acc /= num_complex::Complex64::new(n as f64, 0.0);
    DensityMatrix::new(HilbertSpace::new(1, d, Statistics::Distinguishable)?, acc)
}

/// True iff the state's smallest eigenvalue clears the pure-limit floor.
pub fn is_strictly_positive(rho: &DensityMatrix) -> bool {
    rho.spectrum().iter().all(|&l| l >= tol::EIGEN_FLOOR)
}

/// Opt-in clamp for near-pure inputs: eigenvalues below `floor` are raised
/// to it and the state renormalized. Returns the clamped state plus the
/// induced work error bound (ln 2) * |Delta S| in k_B T units.
pub fn clamp_to_floor(rho: &DensityMatrix, floor: f64) -> Result<(DensityMatrix, f64)> {
    let h = HermitianOperator::new(rho.matrix().clone())?;
    let (vals, vecs) = eig_hermitian(&h);
    let clamped: Vec<f64> = vals.iter().map(|&v| v.max(floor)).collect();
    let z: f64 = clamped.iter().sum();
    let diag: Vec<num_complex::Complex64> =
        clamped.iter().map(|&v| num_complex::Complex64::new(v / z, 0.0)).collect();
    let m = &vecs * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)) * vecs.adjoint();
    let m = (&m + m.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
    let out = DensityMatrix::new(rho.space(), m)?;
    let bound = LN_2 * (von_neumann_entropy(&out) - von_neumann_entropy(rho)).abs();
    Ok((out, bound))
}

pub use operator::max_abs_diff;
