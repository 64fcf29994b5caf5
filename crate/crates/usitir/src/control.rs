//! Control-set representation, density-matrix controllability via
//! Lie-algebra closure, and controllable thermalizability via
//! spectrum-shift matching: constructive for the two-qubit
//! locals-plus-Heisenberg set, search-based for arbitrary sets.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{
    boson_fn_operator, collective_sigma_z, eig_hermitian, heisenberg, pauli_on_site, tol, CMatrix,
    DensityMatrix, HermitianOperator, HilbertSpace, PauliAxis, Statistics,
};
use crate::optim::{multistart_minimize, MultiStartConfig};
use crate::thermo::{gibbs_state, is_strictly_positive, ThermalContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ControlSetName {
    /// L_N: independent single-particle generators on each factor.
    LocalIndependent,
    /// G_N: single-particle generators applied in common to all factors.
    LocalCommon,
    /// F_N: the collective sigma_z singleton.
    CollectiveZ,
    /// C_2: two-qubit locals plus the Heisenberg coupling.
    TwoQubitHeisenberg,
    Custom(String),
}

impl std::fmt::Display for ControlSetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ControlSetName::LocalIndependent => write!(f, "L_N"),
            ControlSetName::LocalCommon => write!(f, "G_N"),
            ControlSetName::CollectiveZ => write!(f, "F_N"),
            ControlSetName::TwoQubitHeisenberg => write!(f, "C_2"),
            ControlSetName::Custom(name) => write!(f, "custom:{name}"),
        }
    }
}

/// Named or custom collection of Hermitian control generators.
#[derive(Clone, Debug)]
pub struct ControlSet {
    name: ControlSetName,
    generators: Vec<HermitianOperator>,
    space: HilbertSpace,
}

impl ControlSet {
    /// L_N on N distinguishable qubits: sigma_{x,y,z} on every site.
    pub fn local_independent(n_qubits: usize) -> Result<Self> {
        let mut generators = Vec::with_capacity(3 * n_qubits);
        for site in 1..=n_qubits {
            for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
                generators.push(pauli_on_site(axis, site, n_qubits)?);
            }
        }
        Ok(Self {
            name: ControlSetName::LocalIndependent,
            generators,
            space: HilbertSpace::qubits(n_qubits),
        })
    }

    /// G_N on N distinguishable qubits: collective sigma_{x,y,z}.
    pub fn local_common(n_qubits: usize) -> Result<Self> {
        let mut generators = Vec::with_capacity(3);
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let mut sum = HermitianOperator::zero(1 << n_qubits);
            for site in 1..=n_qubits {
                sum = sum.add(&pauli_on_site(axis, site, n_qubits)?)?;
            }
            generators.push(sum);
        }
        Ok(Self {
            name: ControlSetName::LocalCommon,
            generators,
            space: HilbertSpace::qubits(n_qubits),
        })
    }

    /// F_N: the collective sigma_z singleton, distinguishable or bosonic.
    pub fn collective_z(n_particles: usize, statistics: Statistics) -> Result<Self> {
        let (space, generator) = match statistics {
            Statistics::Distinguishable => {
                (HilbertSpace::qubits(n_particles), collective_sigma_z(n_particles)?)
            }
            Statistics::Boson => {
                (HilbertSpace::bosonic_qubits(n_particles), boson_fn_operator(n_particles))
            }
            Statistics::Fermion => {
                return Err(Error::IncompatibleControlSet(
                    "the fermionic two-qubit space is one-dimensional and admits no nontrivial controls"
                        .into(),
                ))
            }
        };
        Ok(Self { name: ControlSetName::CollectiveZ, generators: vec![generator], space })
    }

    /// C_2: the six two-qubit locals plus the Heisenberg coupling.
    pub fn c2() -> Self {
        let mut generators = Vec::with_capacity(7);
        for site in 1..=2 {
            for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
                generators.push(pauli_on_site(axis, site, 2).expect("valid site"));
            }
        }
        generators.push(heisenberg((1, 2), 2).expect("valid pair"));
        Self {
            name: ControlSetName::TwoQubitHeisenberg,
            generators,
            space: HilbertSpace::qubits(2),
        }
    }

    pub fn custom(
        name: impl Into<String>,
        generators: Vec<HermitianOperator>,
        space: HilbertSpace,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::IncompatibleControlSet("empty control set".into()));
        }
        for g in &generators {
            if g.dim() != space.dim() {
                return Err(Error::DimensionMismatch(g.dim(), space.dim()));
            }
        }
        Ok(Self { name: ControlSetName::Custom(name.into()), generators, space })
    }

    pub fn name(&self) -> &ControlSetName {
        &self.name
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

// real vectorization of a complex matrix; Re tr(A^dagger B) becomes the dot product
fn vectorize(m: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for c in m.iter() {
        out.push(c.re);
        out.push(c.im);
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct OrthoBasis {
    dim: usize,
    matrices: Vec<CMatrix>,
    vectors: Vec<Vec<f64>>,
}

impl OrthoBasis {
    fn new(dim: usize) -> Self {
        Self { dim, matrices: Vec::new(), vectors: Vec::new() }
    }

    /// Projects out the current span; adds the remainder if its norm
    /// exceeds 1e-9. Returns whether the basis grew.
    fn try_add(&mut self, candidate: &CMatrix) -> bool {
        let mut v = vectorize(candidate);
        for basis_vec in &self.vectors {
            let coeff = dot(&v, basis_vec);
            for (x, b) in v.iter_mut().zip(basis_vec) {
                *x -= coeff * b;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-9 {
            return false;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (i, c) in m.iter_mut().enumerate() {
            *c = Complex64::new(v[2 * i], v[2 * i + 1]);
        }
        self.matrices.push(m);
        self.vectors.push(v);
        true
    }
}

/// Orthonormal basis (under Re tr(A^dagger B)) of the real Lie algebra
/// generated by the traceless anti-Hermitian images of the generators,
/// by breadth-first commutator expansion.
pub fn lie_closure_basis(generators: &[HermitianOperator], dim: usize) -> Vec<CMatrix> {
    let mut basis = OrthoBasis::new(dim);
    for g in generators {
        // i (H - tr(H)/D I): traceless anti-Hermitian seed
        let shift = g.trace() / dim as f64;
        let seed = (g.matrix() - CMatrix::identity(dim, dim) * Complex64::new(shift, 0.0))
            * Complex64::new(0.0, 1.0);
        basis.try_add(&seed);
    }

    let cap = dim.pow(4);
    let mut iterations = 0usize;
    loop {
        let len = basis.matrices.len();
        let mut grew = false;
        'pass: for i in 0..len {
            for j in (i + 1)..len {
                iterations += 1;
                if iterations > cap {
                    break 'pass;
                }
                let comm = &basis.matrices[i] * &basis.matrices[j]
                    - &basis.matrices[j] * &basis.matrices[i];
                if basis.try_add(&comm) {
                    grew = true;
                }
            }
        }
        if !grew || iterations > cap {
            break;
        }
    }
    basis.matrices
}

/// Dimension of the real Lie algebra generated by the control set.
pub fn lie_closure_dim(cs: &ControlSet) -> usize {
    lie_closure_basis(cs.generators(), cs.dim()).len()
}

/// True iff the control Lie algebra spans su(D).
pub fn is_dmc(cs: &ControlSet) -> bool {
    let d = cs.dim();
    lie_closure_dim(cs) == d * d - 1
}

/// True iff the sorted spectra agree elementwise within `tolerance`.
pub fn unitarily_equivalent(rho1: &DensityMatrix, rho2: &DensityMatrix, tolerance: f64) -> bool {
    if rho1.dim() != rho2.dim() {
        return false;
    }
    rho1.spectrum()
        .iter()
        .zip(rho2.spectrum())
        .all(|(&a, b)| (a - b).abs() <= tolerance)
}

/// Finds the real shift s with sorted spec(H) = sorted spec(-ln(rho)/beta) + s,
/// if one exists within `tolerance`. The shift is forced: it is the
/// difference of the spectral means.
pub fn spectrum_shift_match(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    ctx: &ThermalContext,
    tolerance: f64,
) -> Result<Option<f64>> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), h.dim()));
    }
    if !is_strictly_positive(rho) {
        return Err(Error::PureLimit { floor: tol::EIGEN_FLOOR });
    }
    let mut target: Vec<f64> = rho.spectrum().iter().map(|&l| -l.ln() / ctx.beta()).collect();
    target.sort_by(f64::total_cmp);
    let (spec_h, _) = eig_hermitian(h);
    let n = target.len() as f64;
    let shift = (spec_h.iter().sum::<f64>() - target.iter().sum::<f64>()) / n;
    let ok = spec_h
        .iter()
        .zip(&target)
        .all(|(&a, &t)| (a - t - shift).abs() <= tolerance);
    Ok(ok.then_some(shift))
}

/// Coefficient solution for a CT problem: one coefficient per generator
/// plus a trailing identity coefficient.
#[derive(Clone, Debug)]
pub struct CtSolution {
    pub coefficients: Vec<f64>,
    pub achieved_hamiltonian: HermitianOperator,
    pub spectral_residual: f64,
}

/// Constructive C_2 solution: the four parameters of the
/// locals-plus-Heisenberg parameterization plus the assembled solution.
#[derive(Clone, Debug)]
pub struct C2Solution {
    /// (c1, c2, c3, c4) multiplying (1-H3)/2, (1-H6)/2, (1-H7)/2, 1.
    pub params: [f64; 4],
    pub ct: CtSolution,
}

/// Closed-form parameters matching the ascending target spectrum
/// t1 <= t2 <= t3 <= t4 via the assignment (c4, c4+c1+c2, block-) -> (t2, t3, t1)
/// and block+ -> t4. The radicand is non-negative under the ordering.
pub fn c2_params_for_targets(targets: [f64; 4]) -> [f64; 4] {
    let [t1, t2, t3, t4] = targets;
    let c4 = t2;
    let c3 = (t1 + t4 - t2 - t3) / 2.0;
    let sum = t3 - t2;
    let radicand = (t4 - t1) * (t4 - t1) - (t1 + t4 - t2 - t3) * (t1 + t4 - t2 - t3);
    let diff = radicand.max(0.0).sqrt();
    [(sum + diff) / 2.0, (sum - diff) / 2.0, c3, c4]
}

fn c2_hamiltonian(params: [f64; 4]) -> HermitianOperator {
    let [c1, c2, c3, c4] = params;
    let i4 = HermitianOperator::identity(4);
    let h3 = pauli_on_site(PauliAxis::Z, 1, 2).expect("valid");
    let h6 = pauli_on_site(PauliAxis::Z, 2, 2).expect("valid");
    let h7 = heisenberg((1, 2), 2).expect("valid");
    HermitianOperator::linear_combination(
        &[i4.add(&h3.scale(-1.0)).unwrap(), i4.add(&h6.scale(-1.0)).unwrap(), i4.add(&h7.scale(-1.0)).unwrap(), i4],
        &[c1 / 2.0, c2 / 2.0, c3 / 2.0, c4],
    )
    .expect("equal dimensions")
}

/// Per-generator coefficients (C_2 order: sx1,sy1,sz1,sx2,sy2,sz2,H7)
/// plus identity, equivalent to the intrinsic parameterization.
fn c2_generator_coefficients(params: [f64; 4]) -> Vec<f64> {
    let [c1, c2, c3, c4] = params;
    vec![
        0.0,
        0.0,
        -c1 / 2.0,
        0.0,
        0.0,
        -c2 / 2.0,
        -c3 / 2.0,
        c4 + (c1 + c2 + c3) / 2.0,
    ]
}

fn spectral_residual(rho: &DensityMatrix, h: &HermitianOperator, ctx: &ThermalContext) -> f64 {
    let gibbs = gibbs_state(h, ctx);
    gibbs
        .spectrum()
        .iter()
        .zip(rho.spectrum())
        .map(|(&a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Constructive controllable-thermalizability solution for a full-rank
/// two-qubit state under the C_2 control set.
pub fn ct_solve_c2(rho: &DensityMatrix, ctx: &ThermalContext) -> Result<C2Solution> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(rho.dim(), 4));
    }
    if !is_strictly_positive(rho) {
        return Err(Error::PureLimit { floor: tol::EIGEN_FLOOR });
    }
    let mut targets: Vec<f64> = rho.spectrum().iter().map(|&l| -l.ln() / ctx.beta()).collect();
    targets.sort_by(f64::total_cmp);
    let params = c2_params_for_targets([targets[0], targets[1], targets[2], targets[3]]);
    let h = c2_hamiltonian(params);
    let residual = spectral_residual(rho, &h, ctx);
    Ok(C2Solution {
        params,
        ct: CtSolution {
            coefficients: c2_generator_coefficients(params),
            achieved_hamiltonian: h,
            spectral_residual: residual,
        },
    })
}

/// Budget for the generic derivative-free CT search.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { restarts: 16, max_evals_per_restart: 2000, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub enum CtSearchOutcome {
    Found(CtSolution),
    Absent { best_residual: f64 },
}

/// Derivative-free search for generator coefficients whose Gibbs state is
/// unitarily equivalent to `rho`. Succeeds when the spectral residual drops
/// to 1e-6 or below.
pub fn ct_search_generic(
    cs: &ControlSet,
    rho: &DensityMatrix,
    ctx: &ThermalContext,
    budget: &SearchBudget,
) -> Result<CtSearchOutcome> {
    if cs.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(cs.dim(), rho.dim()));
    }
    if !is_strictly_positive(rho) {
        return Err(Error::PureLimit { floor: tol::EIGEN_FLOOR });
    }
    let generators = cs.generators();
    let n_params = generators.len() + 1; // identity coefficient appended
    let target = rho.spectrum();

    let build = |coeffs: &[f64]| -> HermitianOperator {
        let mut ops: Vec<HermitianOperator> = generators.to_vec();
        ops.push(HermitianOperator::identity(cs.dim()));
        HermitianOperator::linear_combination(&ops, coeffs).expect("matching lengths")
    };
    let objective = |coeffs: &[f64]| -> f64 {
        let h = build(coeffs);
        let gibbs = gibbs_state(&h, ctx);
        gibbs
            .spectrum()
            .iter()
            .zip(&target)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max)
    };

    let cfg = MultiStartConfig {
        restarts: budget.restarts,
        max_evals_per_restart: budget.max_evals_per_restart,
        ..Default::default()
    };
    let best = multistart_minimize(&objective, n_params, budget.seed, &cfg);
    if best.value <= 1e-6 {
        let h = build(&best.x);
        let residual = spectral_residual(rho, &h, ctx);
        Ok(CtSearchOutcome::Found(CtSolution {
            coefficients: best.x,
            achieved_hamiltonian: h,
            spectral_residual: residual,
        }))
    } else {
        Ok(CtSearchOutcome::Absent { best_residual: best.value })
    }
}
