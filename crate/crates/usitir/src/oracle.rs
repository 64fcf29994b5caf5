//! Independent brute-force verification: numeric minimization of the
//! relative entropy over reachable states and Gibbs families, random state
//! generation, and the scalar root/limit oracles used to pin regression
//! values. Kept deliberately independent of the closed forms it checks.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::control::{lie_closure_basis, ControlSet, ControlSetName};
use crate::error::{Error, Result};
use crate::operator::{
    pauli_on_site, sigma_z, unitary_from_generator, CMatrix, DensityMatrix, HermitianOperator,
    HilbertSpace, PauliAxis, Statistics,
};
use crate::optim::nelder_mead;
use crate::thermo::{gibbs_state, relative_entropy, ThermalContext};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Ginibre-style random state: G G^dagger / tr with `rank` complex-normal
/// columns. Deterministic per seed.
pub fn random_density_matrix(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let space = if dim.is_power_of_two() && dim > 1 {
        HilbertSpace::qubits(dim.trailing_zeros() as usize)
    } else {
        HilbertSpace::new(1, dim, Statistics::Distinguishable)?
    };
    let mut rng = seeded_rng(seed);
    random_density_matrix_with(space, rank, &mut rng)
}

pub fn random_density_matrix_with(
    space: HilbertSpace,
    rank: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DensityMatrix> {
    let dim = space.dim();
    if rank == 0 || rank > dim {
        return Err(Error::InvalidScenario(format!("rank must be in 1..={dim}, got {rank}")));
    }
    let mut g = CMatrix::zeros(dim, rank);
    for c in g.iter_mut() {
        *c = Complex64::new(standard_normal(rng), standard_normal(rng));
    }
    let gram = &g * g.adjoint();
    let trace = gram.trace().re;
    DensityMatrix::new(space, gram / Complex64::new(trace, 0.0))
}

pub fn random_hermitian_with(dim: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let mut m = CMatrix::zeros(dim, dim);
    for c in m.iter_mut() {
        *c = Complex64::new(standard_normal(rng), standard_normal(rng));
    }
    let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::new(herm).expect("symmetrized matrix is Hermitian")
}

/// Bracketed bisection on a strictly increasing scalar function. Returns the
/// root, or a signed-infinity sentinel when the target sits at an asymptote.
pub fn bisect_monotone<F: Fn(f64) -> f64>(f: &F, target: f64, expansion_limit: usize) -> Result<f64> {
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    let mut expansions = 0usize;
    loop {
        let v = f(lo);
        if v <= target {
            // asymptote detection: value pinned at the target over a doubling
            if (v - target).abs() <= 1e-12 && (f(lo * 2.0) - target).abs() <= 1e-12 {
                return Ok(f64::NEG_INFINITY);
            }
            break;
        }
        lo *= 2.0;
        expansions += 1;
        if expansions > expansion_limit {
            return if (f(lo) - target).abs() <= 1e-12 {
                Ok(f64::NEG_INFINITY)
            } else {
                Err(Error::BracketExpansion(expansion_limit))
            };
        }
    }
    loop {
        let v = f(hi);
        if v >= target {
            if (v - target).abs() <= 1e-12 && (f(hi * 2.0) - target).abs() <= 1e-12 {
                return Ok(f64::INFINITY);
            }
            break;
        }
        hi *= 2.0;
        expansions += 1;
        if expansions > expansion_limit {
            return if (f(hi) - target).abs() <= 1e-12 {
                Ok(f64::INFINITY)
            } else {
                Err(Error::BracketExpansion(expansion_limit))
            };
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Budget for the brute-force minimization.
#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { restarts: 32, max_evals_per_restart: 2000 }
    }
}

#[derive(Clone, Debug)]
pub struct OracleEstimate {
    /// Best relative entropy found, in bits.
    pub value_bits: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Parameterization {
    n_unitary: usize,
    n_field: usize,
    /// seed half-widths per parameter (angles vs field magnitudes)
    seed_bounds: Vec<f64>,
}

fn parameterization_for(cs: &ControlSet) -> Result<Parameterization> {
    let n = cs.space().n_particles();
    match cs.name() {
        ControlSetName::LocalIndependent => Ok(Parameterization {
            n_unitary: 3 * n,
            n_field: n,
            seed_bounds: [vec![std::f64::consts::PI; 3 * n], vec![5.0; n]].concat(),
        }),
        ControlSetName::LocalCommon => Ok(Parameterization {
            n_unitary: 3,
            n_field: 1,
            seed_bounds: [vec![std::f64::consts::PI; 3], vec![5.0]].concat(),
        }),
        ControlSetName::CollectiveZ => Ok(Parameterization {
            n_unitary: 1,
            n_field: 1,
            seed_bounds: vec![std::f64::consts::PI, 5.0],
        }),
        ControlSetName::TwoQubitHeisenberg | ControlSetName::Custom(_) => {
            let m = lie_basis_dim_for(cs);
            Ok(Parameterization {
                n_unitary: m,
                n_field: cs.generators().len() + 1,
                seed_bounds: [vec![std::f64::consts::PI; m], vec![5.0; cs.generators().len() + 1]]
                    .concat(),
            })
        }
    }
}

fn lie_basis_dim_for(cs: &ControlSet) -> usize {
    lie_basis_cache(cs).len()
}

fn lie_basis_cache(cs: &ControlSet) -> Vec<CMatrix> {
    lie_closure_basis(cs.generators(), cs.dim())
}

fn reachable_pair(
    cs: &ControlSet,
    rho: &DensityMatrix,
    ctx: &ThermalContext,
    lie_basis: &[CMatrix],
    params: &[f64],
) -> Result<(DensityMatrix, DensityMatrix)> {
    let n = cs.space().n_particles();
    match cs.name() {
        ControlSetName::LocalIndependent => {
            let mut u = CMatrix::identity(1, 1);
            for k in 0..n {
                let gen = single_qubit_generator(&params[3 * k..3 * k + 3]);
                u = u.kronecker(&unitary_from_generator(&gen));
            }
            let rho1 = rho.conjugate(&u)?;
            let fields = &params[3 * n..3 * n + n];
            let mut ops = Vec::with_capacity(n);
            for site in 1..=n {
                ops.push(pauli_on_site(PauliAxis::Z, site, n)?);
            }
            let h = HermitianOperator::linear_combination(&ops, fields)?;
            Ok((rho1, gibbs_state(&h, ctx)))
        }
        ControlSetName::LocalCommon => {
            let gen = single_qubit_generator(&params[..3]);
            let u1 = unitary_from_generator(&gen);
            let mut u = CMatrix::identity(1, 1);
            for _ in 0..n {
                u = u.kronecker(&u1);
            }
            let rho1 = rho.conjugate(&u)?;
            // generator order is collective X, Y, Z
            let collective_z = &cs.generators()[2];
            Ok((rho1, gibbs_state(&collective_z.scale(params[3]), ctx)))
        }
        ControlSetName::CollectiveZ => {
            let f = &cs.generators()[0];
            let u = unitary_from_generator(&f.scale(params[0]));
            let rho1 = rho.conjugate(&u)?;
            Ok((rho1, gibbs_state(&f.scale(params[1]), ctx)))
        }
        ControlSetName::TwoQubitHeisenberg | ControlSetName::Custom(_) => {
            let m = lie_basis.len();
            let dim = cs.dim();
            let mut a = CMatrix::zeros(dim, dim);
            for (j, basis) in lie_basis.iter().enumerate() {
                a += basis * Complex64::new(params[j], 0.0);
            }
            // A anti-Hermitian: exp(A) = exp(-i (iA)) with iA Hermitian
            let ia = HermitianOperator::new(&a * Complex64::new(0.0, 1.0))?;
            let u = unitary_from_generator(&ia);
            let rho1 = rho.conjugate(&u)?;

            let coeffs = &params[m..];
            let mut ops: Vec<HermitianOperator> = cs.generators().to_vec();
            ops.push(HermitianOperator::identity(dim));
            let h = HermitianOperator::linear_combination(&ops, coeffs)?;
            Ok((rho1, gibbs_state(&h, ctx)))
        }
    }
}

fn single_qubit_generator(angles: &[f64]) -> HermitianOperator {
    HermitianOperator::linear_combination(
        &[crate::operator::sigma_x(), crate::operator::sigma_y(), sigma_z()],
        angles,
    )
    .expect("three angles")
}

/// Multi-start minimization of S(rho1 || rho2) in bits over the reachable
/// parameterization of the control set. The result upper-bounds the true
/// uncontrollable entropy up to optimizer noise.
pub fn brute_force_su(
    rho: &DensityMatrix,
    cs: &ControlSet,
    ctx: &ThermalContext,
    budget: &OracleBudget,
    seed: u64,
) -> Result<OracleEstimate> {
    if cs.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(cs.dim(), rho.dim()));
    }
    let par = parameterization_for(cs)?;
    let n_params = par.n_unitary + par.n_field;
    let lie_basis = match cs.name() {
        ControlSetName::TwoQubitHeisenberg | ControlSetName::Custom(_) => lie_basis_cache(cs),
        _ => Vec::new(),
    };

    let objective = |params: &[f64]| -> f64 {
        match reachable_pair(cs, rho, ctx, &lie_basis, params) {
            Ok((rho1, rho2)) => relative_entropy(&rho1, &rho2).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };

    let results: Vec<(usize, crate::optim::SimplexResult)> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(seed.wrapping_add(1000 * r as u64));
            let start: Vec<f64> = if r == 0 {
                vec![0.0; n_params]
            } else {
                par.seed_bounds.iter().map(|&b| rng.gen_range(-b..b)).collect()
            };
            (r, nelder_mead(&objective, &start, 0.3, budget.max_evals_per_restart, 1e-10))
        })
        .collect();

    let best = results
        .into_iter()
        .min_by(|(ra, a), (rb, b)| a.value.total_cmp(&b.value).then(ra.cmp(rb)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    Ok(OracleEstimate {
        value_bits: best.value,
        converged: best.converged && best.value.is_finite(),
        evaluations: best.evaluations,
    })
}
