//! Dense complex-matrix foundation: Hermitian operators, density matrices,
//! tensor products, partial traces, eigendecomposition and matrix functions,
//! plus builders for the multi-qubit and bosonic operators used elsewhere.
//!
//! Basis conventions: computational basis |q1 q2 .. qN> with qubit 1 slowest;
//! bosonic occupation basis |0>, |1>, ..., |N> counting particles in the
//! sigma_z = +1 level.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Global numeric tolerances (double precision headroom at dim <= 16).
pub mod tol {
    pub const HERMITICITY: f64 = 1e-12;
    pub const PSD_SLACK: f64 = 1e-10;
    pub const TRACE: f64 = 1e-10;
    /// Below this eigenvalue a state is treated as effectively pure.
    pub const EIGEN_FLOOR: f64 = 1e-12;
}

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Distinguishable,
    Boson,
    Fermion,
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Statistics::Distinguishable => write!(f, "distinguishable"),
            Statistics::Boson => write!(f, "boson"),
            Statistics::Fermion => write!(f, "fermion"),
        }
    }
}

/// Labeled Hilbert space: particle count, local dimension, statistics and
/// the resulting total dimension.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HilbertSpace {
    n_particles: usize,
    local_dim: usize,
    statistics: Statistics,
    dim: usize,
}

impl HilbertSpace {
    pub fn new(n_particles: usize, local_dim: usize, statistics: Statistics) -> Result<Self> {
        if local_dim == 0 {
            return Err(Error::InvalidSpace("local dimension must be positive".into()));
        }
        let dim = match statistics {
            Statistics::Distinguishable => local_dim.pow(n_particles as u32),
            Statistics::Boson => {
                if local_dim != 2 {
                    return Err(Error::InvalidSpace(
                        "bosonic spaces are only supported for qubits (local_dim = 2)".into(),
                    ));
                }
                n_particles + 1
            }
            Statistics::Fermion => {
                if local_dim != 2 || n_particles != 2 {
                    return Err(Error::InvalidSpace(
                        "fermionic spaces are only supported for two qubits".into(),
                    ));
                }
                1
            }
        };
        Ok(Self { n_particles, local_dim, statistics, dim })
    }

    /// N distinguishable qubits, dimension 2^N.
    pub fn qubits(n: usize) -> Self {
        Self::new(n, 2, Statistics::Distinguishable).expect("valid qubit space")
    }

    /// N bosonic qubits, dimension N + 1.
    pub fn bosonic_qubits(n: usize) -> Self {
        Self::new(n, 2, Statistics::Boson).expect("valid bosonic space")
    }

    /// Two fermionic qubits: a trivial one-dimensional space.
    pub fn fermionic_pair() -> Self {
        Self::new(2, 2, Statistics::Fermion).expect("valid fermionic space")
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Hermitian complex matrix used as a Hamiltonian or control generator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates squareness and hermiticity within [`tol::HERMITICITY`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > tol::HERMITICITY {
            return Err(Error::NonHermitian { residual, tol: tol::HERMITICITY });
        }
        Ok(Self { matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: &self.matrix * Complex64::new(s, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    /// Kronecker product; `self` carries the slowest index.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kronecker(&other.matrix) }
    }

    /// Real linear combination `sum_j c_j H_j` of equally sized operators.
    pub fn linear_combination(ops: &[Self], coeffs: &[f64]) -> Result<Self> {
        if ops.is_empty() || ops.len() != coeffs.len() {
            return Err(Error::DimensionMismatch(ops.len(), coeffs.len()));
        }
        let dim = ops[0].dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (op, &c) in ops.iter().zip(coeffs) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch(op.dim(), dim));
            }
            m += op.matrix() * Complex64::new(c, 0.0);
        }
        Ok(Self { matrix: m })
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positive semidefiniteness.
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::InvalidDensityMatrix(format!(
                "matrix is {}x{} but the space dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                space.dim()
            )));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > tol::HERMITICITY {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity residual {residual:e} exceeds {:e}",
                tol::HERMITICITY
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {} deviates from 1 beyond {:e}",
                tr.re,
                tol::TRACE
            )));
        }
        let herm = HermitianOperator { matrix: matrix.clone() };
        let (vals, _) = eig_hermitian(&herm);
        if let Some(&min) = vals.first() {
            if min < -tol::PSD_SLACK {
                return Err(Error::InvalidDensityMatrix(format!(
                    "smallest eigenvalue {min:e} is below -{:e}",
                    tol::PSD_SLACK
                )));
            }
        }
        Ok(Self { space, matrix })
    }

    /// |psi><psi| for a (normalized on load) state vector.
    pub fn from_pure(space: HilbertSpace, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::DimensionMismatch(psi.len(), space.dim()));
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let d = space.dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = psi[i] * psi[j].conj() / norm;
            }
        }
        Self::new(space, m)
    }

    /// |k><k| in the computational (or occupation) basis.
    pub fn basis_state(space: HilbertSpace, k: usize) -> Result<Self> {
        if k >= space.dim() {
            return Err(Error::InvalidDensityMatrix(format!(
                "basis index {k} out of range for dimension {}",
                space.dim()
            )));
        }
        let mut psi = vec![C_ZERO; space.dim()];
        psi[k] = C_ONE;
        Self::from_pure(space, &psi)
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.dim();
        let m = CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0);
        Self { space, matrix: m }
    }

    pub fn from_diagonal(space: HilbertSpace, probs: &[f64]) -> Result<Self> {
        if probs.len() != space.dim() {
            return Err(Error::DimensionMismatch(probs.len(), space.dim()));
        }
        let d = space.dim();
        let mut m = CMatrix::zeros(d, d);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = Complex64::new(p, 0.0);
        }
        Self::new(space, m)
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues ascending, clipped to [0, inf) after PSD validation.
    pub fn spectrum(&self) -> Vec<f64> {
        let herm = HermitianOperator { matrix: self.matrix.clone() };
        let (vals, _) = eig_hermitian(&herm);
        vals.into_iter().map(|x| x.max(0.0)).collect()
    }

    /// U rho U^dagger; preserves validity by construction.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(u.nrows(), self.dim()));
        }
        let m = u * &self.matrix * u.adjoint();
        // round off tiny hermiticity drift from the double product
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { space: self.space, matrix: m })
    }

    /// Kronecker product of two distinguishable states; `self` slowest.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (a, b) = (self.space, other.space);
        if a.statistics() != Statistics::Distinguishable
            || b.statistics() != Statistics::Distinguishable
            || a.local_dim() != b.local_dim()
        {
            return Err(Error::UnsupportedStatistics {
                required: "distinguishable particles with equal local dimension".into(),
                got: format!("{} x {}", a.statistics(), b.statistics()),
            });
        }
        let space = HilbertSpace::new(
            a.n_particles() + b.n_particles(),
            a.local_dim(),
            Statistics::Distinguishable,
        )?;
        Ok(Self { space, matrix: self.matrix.kronecker(&other.matrix) })
    }
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let diff = m - m.adjoint();
    diff.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian operator: ascending real eigenvalues
/// and the matching unitary of column eigenvectors.
pub fn eig_hermitian(h: &HermitianOperator) -> (Vec<f64>, CMatrix) {
    let eig = h.matrix.clone().symmetric_eigen();
    let dim = h.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// V f(Lambda) V^dagger for a real scalar function defined on the spectrum.
pub fn matrix_function<F: Fn(f64) -> f64>(h: &HermitianOperator, f: F) -> Result<HermitianOperator> {
    let (vals, vecs) = eig_hermitian(h);
    let mut fvals = Vec::with_capacity(vals.len());
    for &v in &vals {
        let fv = f(v);
        if !fv.is_finite() {
            return Err(Error::FunctionDomain(v));
        }
        fvals.push(Complex64::new(fv, 0.0));
    }
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(fvals));
    let m = &vecs * diag * vecs.adjoint();
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(HermitianOperator { matrix: m })
}

/// exp(-i H): the unitary generated by a Hermitian operator.
pub fn unitary_from_generator(h: &HermitianOperator) -> CMatrix {
    let (vals, vecs) = eig_hermitian(h);
    let phases: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(0.0, -v).exp()).collect();
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases));
    &vecs * diag * vecs.adjoint()
}

/// AB - BA; anti-Hermitian for Hermitian inputs.
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<CMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.matrix() * b.matrix() - b.matrix() * a.matrix())
}

/// Reduced density matrix on the kept qubits (1-based, order-preserving).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    if space.statistics() != Statistics::Distinguishable {
        return Err(Error::UnsupportedStatistics {
            required: "distinguishable".into(),
            got: space.statistics().to_string(),
        });
    }
    let n = space.n_particles();
    let d = space.local_dim();
    let mut seen = vec![false; n + 1];
    for &k in keep {
        if k == 0 || k > n || seen[k] {
            return Err(Error::InvalidSubsystems(format!(
                "keep indices must be distinct and in 1..={n}, got {keep:?}"
            )));
        }
        seen[k] = true;
    }
    let traced: Vec<usize> = (1..=n).filter(|k| !seen[*k]).collect();
    let kd = d.pow(keep.len() as u32);
    let td = d.pow(traced.len() as u32);

    // qubit 1 slowest: site s contributes digit index/d^(n-s) mod d
    let compose = |kept_digits: &[usize], traced_digits: &[usize]| -> usize {
        let mut idx = 0;
        for site in 1..=n {
            let dig = if let Some(pos) = keep.iter().position(|&k| k == site) {
                kept_digits[pos]
            } else {
                let pos = traced.iter().position(|&k| k == site).unwrap();
                traced_digits[pos]
            };
            idx = idx * d + dig;
        }
        idx
    };
    let digits_of = |mut index: usize, len: usize| -> Vec<usize> {
        let mut out = vec![0; len];
        for slot in (0..len).rev() {
            out[slot] = index % d;
            index /= d;
        }
        out
    };

    let mut out = CMatrix::zeros(kd, kd);
    for i in 0..kd {
        let di = digits_of(i, keep.len());
        for j in 0..kd {
            let dj = digits_of(j, keep.len());
            let mut sum = C_ZERO;
            for t in 0..td {
                let dt = digits_of(t, traced.len());
                sum += rho.matrix()[(compose(&di, &dt), compose(&dj, &dt))];
            }
            out[(i, j)] = sum;
        }
    }
    let space = HilbertSpace::new(keep.len(), d, Statistics::Distinguishable)?;
    DensityMatrix::new(space, out)
}

pub fn sigma_x() -> HermitianOperator {
    HermitianOperator {
        matrix: CMatrix::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO]),
    }
}

pub fn sigma_y() -> HermitianOperator {
    HermitianOperator {
        matrix: CMatrix::from_row_slice(
            2,
            2,
            &[C_ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), C_ZERO],
        ),
    }
}

pub fn sigma_z() -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&[1.0, -1.0])
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

fn pauli(axis: PauliAxis) -> HermitianOperator {
    match axis {
        PauliAxis::X => sigma_x(),
        PauliAxis::Y => sigma_y(),
        PauliAxis::Z => sigma_z(),
    }
}

/// sigma_axis acting on `site` (1-based) of an N-qubit register.
pub fn pauli_on_site(axis: PauliAxis, site: usize, n_qubits: usize) -> Result<HermitianOperator> {
    if site == 0 || site > n_qubits {
        return Err(Error::SiteOutOfRange { site, n_qubits });
    }
    let mut result = if site == 1 { pauli(axis) } else { HermitianOperator::identity(2) };
    for s in 2..=n_qubits {
        let factor = if s == site { pauli(axis) } else { HermitianOperator::identity(2) };
        result = result.tensor(&factor);
    }
    Ok(result)
}

/// Heisenberg coupling sum_{a in {x,y,z}} sigma_a^(j) sigma_a^(k).
pub fn heisenberg(pair: (usize, usize), n_qubits: usize) -> Result<HermitianOperator> {
    let (j, k) = pair;
    if j == k {
        return Err(Error::InvalidSubsystems(format!("pair sites must differ, got ({j},{k})")));
    }
    let mut sum = HermitianOperator::zero(1 << n_qubits);
    for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
        let a = pauli_on_site(axis, j, n_qubits)?;
        let b = pauli_on_site(axis, k, n_qubits)?;
        sum = sum.add(&HermitianOperator { matrix: a.matrix() * b.matrix() })?;
    }
    Ok(sum)
}

/// Collective sigma_z on N distinguishable qubits (the F_N singleton).
pub fn collective_sigma_z(n_qubits: usize) -> Result<HermitianOperator> {
    let mut sum = HermitianOperator::zero(1 << n_qubits);
    for site in 1..=n_qubits {
        sum = sum.add(&pauli_on_site(PauliAxis::Z, site, n_qubits)?)?;
    }
    Ok(sum)
}

/// Bosonic F_N: diag(-N, -N+2, ..., N) in the occupation basis.
pub fn boson_fn_operator(n_particles: usize) -> HermitianOperator {
    let diag: Vec<f64> =
        (0..=n_particles).map(|n| 2.0 * n as f64 - n_particles as f64).collect();
    HermitianOperator::from_real_diagonal(&diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_phi_plus() -> DensityMatrix {
        let space = HilbertSpace::qubits(2);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(
            space,
            &[Complex64::new(a, 0.0), C_ZERO, C_ZERO, Complex64::new(a, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn tensor_identity_and_paulis() {
        let i2 = HermitianOperator::identity(2);
        assert_eq!(i2.tensor(&i2).matrix(), HermitianOperator::identity(4).matrix());

        let zi = sigma_z().tensor(&i2);
        let expected = HermitianOperator::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]);
        assert!(max_abs_diff(zi.matrix(), expected.matrix()) < 1e-15);

        let xx = sigma_x().tensor(&sigma_x());
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { 1.0 } else { 0.0 };
                assert!((xx.matrix()[(i, j)].re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let space = HilbertSpace::qubits(2);
        let rho00 = DensityMatrix::basis_state(space, 0).unwrap();
        let reduced = partial_trace(&rho00, &[1]).unwrap();
        assert!((reduced.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);

        let bell = bell_phi_plus();
        let reduced = partial_trace(&bell, &[1]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), DensityMatrix::maximally_mixed(HilbertSpace::qubits(1)).matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_recovers_random_factor() {
        // direct index-contraction oracle: keep {2} of rho_a (x) rho_b gives rho_b
        let mut rng = crate::oracle::seeded_rng(7);
        let a = crate::oracle::random_density_matrix_with(HilbertSpace::qubits(1), 2, &mut rng).unwrap();
        let b = crate::oracle::random_density_matrix_with(HilbertSpace::qubits(1), 2, &mut rng).unwrap();
        let joint = a.tensor(&b).unwrap();
        let rb = partial_trace(&joint, &[2]).unwrap();
        assert!(max_abs_diff(rb.matrix(), b.matrix()) < 1e-12);
        let ra = partial_trace(&joint, &[1]).unwrap();
        assert!(max_abs_diff(ra.matrix(), a.matrix()) < 1e-12);
    }

    #[test]
    fn eig_sigma_z_and_identity() {
        let (vals, _) = eig_hermitian(&sigma_z());
        assert_eq!(vals.len(), 2);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);

        let (vals, _) = eig_hermitian(&HermitianOperator::identity(3));
        assert!(vals.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn heisenberg_spectrum_and_symmetry() {
        let h7 = heisenberg((1, 2), 2).unwrap();
        let (vals, _) = eig_hermitian(&h7);
        let expected = [-3.0, 1.0, 1.0, 1.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-10, "got {vals:?}");
        }
        assert!(h7.trace().abs() < 1e-12);

        // commutes with the qubit swap
        let mut swap = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = C_ONE;
        }
        let hs = h7.matrix() * &swap;
        let sh = &swap * h7.matrix();
        assert!(max_abs_diff(&hs, &sh) < 1e-12);
    }

    #[test]
    fn matrix_function_exp_log() {
        let zero = HermitianOperator::zero(3);
        let exp0 = matrix_function(&zero, f64::exp).unwrap();
        assert!(max_abs_diff(exp0.matrix(), HermitianOperator::identity(3).matrix()) < 1e-12);

        let expz = matrix_function(&sigma_z(), f64::exp).unwrap();
        let back = matrix_function(&expz, f64::ln).unwrap();
        assert!(max_abs_diff(back.matrix(), sigma_z().matrix()) < 1e-10);

        // exp(h F_2) on distinguishable qubits, h = 0.5
        let f2 = collective_sigma_z(2).unwrap();
        let exph = matrix_function(&f2.scale(0.5), f64::exp).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[
            (1.0f64).exp(),
            1.0,
            1.0,
            (-1.0f64).exp(),
        ]);
        assert!(max_abs_diff(exph.matrix(), expected.matrix()) < 1e-12);
    }

    #[test]
    fn matrix_function_log_rejects_nonpositive_spectrum() {
        let err = matrix_function(&sigma_z(), f64::ln).unwrap_err();
        assert!(matches!(err, Error::FunctionDomain(_)));
    }

    #[test]
    fn pauli_commutators() {
        let c = commutator(&sigma_x(), &sigma_y()).unwrap();
        let expected = sigma_z().matrix() * Complex64::new(0.0, 2.0);
        assert!(max_abs_diff(&c, &expected) < 1e-12);

        let zero = commutator(&sigma_x(), &sigma_x()).unwrap();
        assert!(zero.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-15);

        // collective Paulis: [sum sigma_x, sum sigma_y] = 2i sum sigma_z for N=2
        let sx = pauli_on_site(PauliAxis::X, 1, 2).unwrap().add(&pauli_on_site(PauliAxis::X, 2, 2).unwrap()).unwrap();
        let sy = pauli_on_site(PauliAxis::Y, 1, 2).unwrap().add(&pauli_on_site(PauliAxis::Y, 2, 2).unwrap()).unwrap();
        let sz = collective_sigma_z(2).unwrap();
        let c = commutator(&sx, &sy).unwrap();
        let expected = sz.matrix() * Complex64::new(0.0, 2.0);
        assert!(max_abs_diff(&c, &expected) < 1e-12);
    }

    #[test]
    fn pauli_on_site_layout() {
        let z1 = pauli_on_site(PauliAxis::Z, 1, 1).unwrap();
        assert!(max_abs_diff(z1.matrix(), sigma_z().matrix()) < 1e-15);

        let z1of2 = pauli_on_site(PauliAxis::Z, 1, 2).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]);
        assert!(max_abs_diff(z1of2.matrix(), expected.matrix()) < 1e-15);

        let x2of2 = pauli_on_site(PauliAxis::X, 2, 2).unwrap();
        let expected = HermitianOperator::identity(2).tensor(&sigma_x());
        assert!(max_abs_diff(x2of2.matrix(), expected.matrix()) < 1e-15);

        assert!(pauli_on_site(PauliAxis::X, 3, 2).is_err());
    }

    #[test]
    fn boson_fn_diagonals() {
        let f1 = boson_fn_operator(1);
        assert!(max_abs_diff(f1.matrix(), HermitianOperator::from_real_diagonal(&[-1.0, 1.0]).matrix()) < 1e-15);
        let f2 = boson_fn_operator(2);
        assert!(max_abs_diff(f2.matrix(), HermitianOperator::from_real_diagonal(&[-2.0, 0.0, 2.0]).matrix()) < 1e-15);
        for n in 1..=6 {
            assert!(boson_fn_operator(n).trace().abs() < 1e-12);
        }
    }

    #[test]
    fn space_dimensions() {
        assert_eq!(HilbertSpace::qubits(3).dim(), 8);
        assert_eq!(HilbertSpace::bosonic_qubits(2).dim(), 3);
        assert_eq!(HilbertSpace::fermionic_pair().dim(), 1);
        assert!(HilbertSpace::new(3, 2, Statistics::Fermion).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let space = HilbertSpace::qubits(1);
        // not unit trace
        let m = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(space, m).is_err());
        // negative eigenvalue
        let m = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.5, 0.0), C_ZERO,
            C_ZERO, Complex64::new(-0.5, 0.0),
        ]);
        assert!(DensityMatrix::new(space, m).is_err());
        // non-Hermitian
        let m = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.0),
            C_ZERO, Complex64::new(0.5, 0.0),
        ]);
        assert!(DensityMatrix::new(space, m).is_err());
    }
}
