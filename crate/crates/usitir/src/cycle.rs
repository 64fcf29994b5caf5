//! Quasi-static cycle simulation with a full energy ledger: the single- and
//! two-qubit engines plus the staged US/IT/IR decomposition.
//!
//! All ledger energies are dimensionless (units of k_B T) and field values
//! are tracked through b = beta mu_M B.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::Serialize;

use crate::control::{ct_solve_c2, is_dmc, ControlSet, ControlSetName};
use crate::error::{Error, Result};
use crate::operator::{
    boson_fn_operator, eig_hermitian, tol, CMatrix, DensityMatrix, HermitianOperator,
    HilbertSpace, Statistics, C_ONE,
};
use crate::oracle::seeded_rng;
use crate::thermo::{clamp_to_floor, free_energy, gibbs_state, von_neumann_entropy, ThermalContext};
use crate::work::{extractable_work, optimal_work, WorkMode, WorkReport};
use crate::operator::partial_trace;

/// Magnetization in units of mu_M at field B: tanh(beta mu_M B).
pub fn brillouin_mu(b: f64, beta_mu_m: f64) -> f64 {
    (beta_mu_m * b).tanh()
}

/// Final field matching the ancilla polarization: artanh(c) / (beta mu_M).
pub fn optimal_bf(c: f64, beta_mu_m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&c) {
        if c >= 1.0 {
            return Err(Error::PureLimit { floor: tol::EIGEN_FLOOR });
        }
        return Err(Error::FunctionDomain(c));
    }
    Ok(c.atanh() / beta_mu_m)
}

/// The two equivalent closed forms for the cycle work.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosedFormWork {
    /// b_f tanh(b_f) - ln cosh(b_f) with b_f = artanh(c), in k_B T.
    pub fee: f64,
    /// (ln 2)(1 - S(rho_S1)) with the binary input entropy, in k_B T.
    pub es: f64,
}

fn binary_entropy_bits(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(q)
}

pub fn closed_form_cycle_work(c: f64) -> Result<ClosedFormWork> {
    if !(0.0..1.0).contains(&c) {
        if c >= 1.0 {
            return Err(Error::PureLimit { floor: tol::EIGEN_FLOOR });
        }
        return Err(Error::FunctionDomain(c));
    }
    let bf = c.atanh();
    let fee = c * bf - bf.cosh().ln();
    let es = LN_2 * (1.0 - binary_entropy_bits(0.5 * (1.0 + c)));
    debug_assert!((fee - es).abs() <= 1e-10);
    Ok(ClosedFormWork { fee, es })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stage {
    I,
    II,
    III,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::I => write!(f, "i"),
            Stage::II => write!(f, "ii"),
            Stage::III => write!(f, "iii"),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sample {
    pub t: f64,
    pub stage: Stage,
    pub b: f64,
    pub mu_z: f64,
    pub r: f64,
    pub e_battery: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleTrace {
    pub samples: Vec<Sample>,
    /// Battery energy at cycle end, k_B T units.
    pub final_work: f64,
    pub closed_form_work: f64,
    pub entropy_in: f64,
}

impl CycleTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,stage,B,mu_z,R,E_battery\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.t, s.stage, s.b, s.mu_z, s.r, s.e_battery
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct EngineSpec {
    /// Magnetic moment scale; combined with beta it sets the field unit.
    pub mu_m: f64,
    pub ctx: ThermalContext,
    pub steps: usize,
    pub ancilla_state: DensityMatrix,
    pub mode: WorkMode,
    /// Opt-in eigenvalue floor for near-pure ancillas.
    pub clamp: Option<f64>,
    /// Seed for feedback outcome sampling.
    pub seed: u64,
    /// Coil self-inductance in natural units; cancels over the cycle.
    pub inductance: f64,
}

impl EngineSpec {
    pub fn new(ancilla_state: DensityMatrix, ctx: ThermalContext) -> Self {
        Self {
            mu_m: 1.0,
            ctx,
            steps: 10_000,
            ancilla_state,
            mode: WorkMode::Swap,
            clamp: None,
            seed: 0,
            inductance: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 10 {
            return Err(Error::InvalidScenario(format!(
                "steps must be at least 10, got {}",
                self.steps
            )));
        }
        Ok(())
    }
}

fn polarization(spec: &EngineSpec) -> Result<(f64, f64)> {
    let (state, error_bound) = match spec.clamp {
        Some(floor) => clamp_to_floor(&spec.ancilla_state, floor)?,
        None => (spec.ancilla_state.clone(), 0.0),
    };
    let spectrum = state.spectrum();
    let c = spectrum.last().unwrap() - spectrum.first().unwrap();
    if c >= 1.0 {
        return Err(Error::PureLimit { floor: tol::EIGEN_FLOOR });
    }
    Ok((c, error_bound))
}

/// Swap-based single-qubit engine: stage i swaps and aligns the ancilla,
/// stage ii ramps the field at constant magnetization, stage iii unwinds the
/// field through thermal equilibrium states.
pub fn run_1mqihe(spec: &EngineSpec) -> Result<CycleTrace> {
    spec.validate()?;
    if spec.ancilla_state.dim() != 2 {
        return Err(Error::DimensionMismatch(spec.ancilla_state.dim(), 2));
    }
    let (c, _) = polarization(spec)?;
    Ok(run_1mqihe_polarized(spec, c, 1.0))
}

fn run_1mqihe_polarized(spec: &EngineSpec, c: f64, sign: f64) -> CycleTrace {
    let beta_mu_m = spec.ctx.beta() * spec.mu_m;
    let bf = c.atanh();
    let n = spec.steps;
    let l = spec.inductance;
    // b doubles as the coil current in natural units
    let r_of = |b: f64, m: f64| 0.5 * l * b * b + m * b;
    let physical_b = |b: f64| sign * b / beta_mu_m;
    let physical_mu = |m: f64| sign * m * spec.mu_m;

    let mut samples = Vec::with_capacity(2 * n + 2);
    let mut e = 0.0;
    samples.push(Sample { t: 0.0, stage: Stage::I, b: 0.0, mu_z: physical_mu(c), r: 0.0, e_battery: 0.0 });

    // stage ii: field 0 -> bf, magnetization pinned at c
    let mut b_prev = 0.0;
    for j in 1..=n {
        let b = bf * j as f64 / n as f64;
        e += -(r_of(b, c) - r_of(b_prev, c)) + c * (b - b_prev);
        samples.push(Sample {
            t: j as f64 / n as f64,
            stage: Stage::II,
            b: physical_b(b),
            mu_z: physical_mu(c),
            r: r_of(b, c),
            e_battery: e,
        });
        b_prev = b;
    }

    // stage iii: field bf -> 0 along the Brillouin curve, trapezoid rule
    let mut m_prev = bf.tanh();
    b_prev = bf;
    for j in 1..=n {
        let b = bf * (n - j) as f64 / n as f64;
        let m = b.tanh();
        e += -(r_of(b, m) - r_of(b_prev, m_prev)) + 0.5 * (m + m_prev) * (b - b_prev);
        samples.push(Sample {
            t: 1.0 + j as f64 / n as f64,
            stage: Stage::III,
            b: physical_b(b),
            mu_z: physical_mu(m),
            r: r_of(b, m),
            e_battery: e,
        });
        b_prev = b;
        m_prev = m;
    }

    let closed = c * bf - bf.cosh().ln();
    CycleTrace {
        samples,
        final_work: e,
        closed_form_work: closed,
        entropy_in: von_neumann_entropy(&spec.ancilla_state),
    }
}

/// Joint ancilla-system state after the CNOT stage, with the system qubit
/// (the control) starting fully depolarized.
pub fn feedback_joint_state(ancilla: &DensityMatrix) -> Result<DensityMatrix> {
    let space = HilbertSpace::qubits(2);
    let x = CMatrix::from_row_slice(2, 2, &[num_complex::Complex64::ZERO, C_ONE, C_ONE, num_complex::Complex64::ZERO]);
    let flipped = ancilla.conjugate(&x)?;
    let mut m = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = 0.5 * ancilla.matrix()[(i, j)];
            m[(2 + i, 2 + j)] = 0.5 * flipped.matrix()[(i, j)];
        }
    }
    DensityMatrix::new(space, m)
}

/// One feedback branch: outcome 2 inverts the coil current and field.
pub fn run_1mqihe_feedback_branch(spec: &EngineSpec, outcome: usize) -> Result<CycleTrace> {
    spec.validate()?;
    if !(1..=2).contains(&outcome) {
        return Err(Error::InvalidScenario(format!("outcome must be 1 or 2, got {outcome}")));
    }
    let (c, _) = polarization(spec)?;
    let sign = if outcome == 1 { 1.0 } else { -1.0 };
    Ok(run_1mqihe_polarized(spec, c, sign))
}

/// Measurement-based single-qubit engine: samples the outcome with the
/// spec's seed and runs the corresponding branch.
pub fn run_1mqihe_feedback(spec: &EngineSpec) -> Result<(usize, CycleTrace)> {
    // both outcomes carry probability 1/2 for a depolarized system qubit
    let joint = feedback_joint_state(&spec.ancilla_state)?;
    let p1 = partial_trace(&joint, &[1])?.matrix()[(0, 0)].re;
    debug_assert!((p1 - 0.5).abs() < 1e-12);
    let mut rng = seeded_rng(spec.seed);
    let outcome = if rng.gen_bool(p1) { 1 } else { 2 };
    Ok((outcome, run_1mqihe_feedback_branch(spec, outcome)?))
}

/// Ledger for switching on `h` against its own Gibbs state and then ramping
/// lambda: 1 -> 0 through thermal equilibrium. Returns total work in k_B T.
pub fn ir_work_ledger(
    h: &HermitianOperator,
    ctx: &ThermalContext,
    steps: usize,
    samples: Option<&mut Vec<Sample>>,
) -> f64 {
    let beta = ctx.beta();
    let energy = |lambda: f64| -> f64 {
        let rho = gibbs_state(&h.scale(lambda), ctx);
        (rho.matrix() * h.matrix()).trace().re
    };
    let e1 = energy(1.0);
    let mut w = -beta * e1;
    let mut prev = e1;
    let mut trace = samples;
    if let Some(t) = trace.as_deref_mut() {
        t.push(Sample { t: 0.0, stage: Stage::I, b: 1.0, mu_z: beta * e1, r: beta * free_energy(h, ctx), e_battery: w });
        t.push(Sample { t: 0.0, stage: Stage::II, b: 1.0, mu_z: beta * e1, r: beta * free_energy(h, ctx), e_battery: w });
    }
    for j in 1..=steps {
        let lambda = 1.0 - j as f64 / steps as f64;
        let cur = energy(lambda);
        w += beta * 0.5 * (cur + prev) / steps as f64;
        prev = cur;
        if let Some(t) = trace.as_deref_mut() {
            t.push(Sample {
                t: j as f64 / steps as f64,
                stage: Stage::III,
                b: lambda,
                mu_z: beta * cur,
                r: beta * free_energy(&h.scale(lambda), ctx),
                e_battery: w,
            });
        }
    }
    w
}

/// Two-qubit engine: thermalize the input spectrum through the Heisenberg
/// control set and unwind the certified Hamiltonian isothermally. The trace's
/// B column carries the ramp parameter lambda.
pub fn run_2mqihe(rho_in: &DensityMatrix, spec: &EngineSpec) -> Result<CycleTrace> {
    spec.validate()?;
    if rho_in.dim() != 4 {
        return Err(Error::DimensionMismatch(rho_in.dim(), 4));
    }
    let cs = ControlSet::c2();
    if !is_dmc(&cs) {
        return Err(Error::IncompatibleControlSet("control set is not density matrix controllable".into()));
    }
    let (state, _) = match spec.clamp {
        Some(floor) => clamp_to_floor(rho_in, floor)?,
        None => (rho_in.clone(), 0.0),
    };
    let sol = ct_solve_c2(&state, &spec.ctx)?;
    let mut samples = Vec::with_capacity(spec.steps + 2);
    let w = ir_work_ledger(&sol.ct.achieved_hamiltonian, &spec.ctx, spec.steps, Some(&mut samples));
    let s = von_neumann_entropy(&state);
    Ok(CycleTrace {
        samples,
        final_work: w,
        closed_form_work: LN_2 * (2.0 - s),
        entropy_in: s,
    })
}

/// Three-stage decomposition of a work extraction run.
#[derive(Clone, Debug, Serialize)]
pub struct StagedWorkReport {
    pub report: WorkReport,
    /// State after the unitarily steered stage.
    #[serde(skip)]
    pub us_state: DensityMatrix,
    /// Hamiltonian whose Gibbs state the IT stage relaxes to, when known.
    #[serde(skip)]
    pub us_hamiltonian: Option<HermitianOperator>,
    /// (ln 2) S_u, the irreversible thermalization cost, k_B T.
    pub it_penalty: f64,
    /// (ln 2)(log2 D - S(rho)), the reversible isothermal yield, k_B T.
    pub ir_yield: f64,
    pub total: f64,
}

fn local_diagonalizer(rho: &DensityMatrix) -> Result<CMatrix> {
    // unitary whose adjoint-conjugation diagonalizes each marginal descending
    let n = rho.space().n_particles();
    let mut u = CMatrix::identity(1, 1);
    for k in 1..=n {
        let marginal = partial_trace(rho, &[k])?;
        let (_, vecs) = eig_hermitian(&HermitianOperator::new(marginal.matrix().clone())?);
        let mut v = CMatrix::zeros(2, 2);
        v.set_column(0, &vecs.column(1));
        v.set_column(1, &vecs.column(0));
        u = u.kronecker(&v.adjoint());
    }
    Ok(u)
}

fn modular_hamiltonian(rho: &DensityMatrix, ctx: &ThermalContext) -> Result<HermitianOperator> {
    let h = HermitianOperator::new(rho.matrix().clone())?;
    let (vals, vecs) = eig_hermitian(&h);
    let diag: Vec<num_complex::Complex64> = vals
        .iter()
        .map(|&v| num_complex::Complex64::new(-v.max(tol::EIGEN_FLOOR).ln() / ctx.beta(), 0.0))
        .collect();
    let m = &vecs * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)) * vecs.adjoint();
    HermitianOperator::new((&m + m.adjoint()) * num_complex::Complex64::new(0.5, 0.0))
}

/// Splits extractable work into the US target, the IT penalty and the IR
/// yield; the total always matches `extractable_work`.
pub fn usitir_stage_machine(
    rho: &DensityMatrix,
    cs: &ControlSet,
    ctx: &ThermalContext,
) -> Result<StagedWorkReport> {
    let report = extractable_work(rho, cs, ctx)?;
    let it_penalty = LN_2 * report.uncontrollable_entropy;
    let ir_yield = optimal_work(rho);
    let total = report.work;

    let (us_state, us_hamiltonian) = match cs.name() {
        ControlSetName::LocalIndependent => {
            let u = local_diagonalizer(rho)?;
            let rotated = rho.conjugate(&u)?;
            let n = rho.space().n_particles();
            let mut product: Option<DensityMatrix> = None;
            for k in 1..=n {
                let marginal = partial_trace(&rotated, &[k])?;
                product = Some(match product {
                    Some(p) => p.tensor(&marginal)?,
                    None => marginal,
                });
            }
            let target = product.unwrap();
            (rotated, Some(modular_hamiltonian(&target, ctx)?))
        }
        ControlSetName::LocalCommon => {
            let n = rho.space().n_particles();
            let mut acc = CMatrix::zeros(2, 2);
            for k in 1..=n {
                acc += partial_trace(rho, &[k])?.matrix();
            }
            acc /= num_complex::Complex64::new(n as f64, 0.0);
            let mean = DensityMatrix::new(HilbertSpace::qubits(1), acc)?;
            let (_, vecs) = eig_hermitian(&HermitianOperator::new(mean.matrix().clone())?);
            let mut v = CMatrix::zeros(2, 2);
            v.set_column(0, &vecs.column(1));
            v.set_column(1, &vecs.column(0));
            let mut u = CMatrix::identity(1, 1);
            for _ in 0..n {
                u = u.kronecker(&v.adjoint());
            }
            let rotated = rho.conjugate(&u)?;
            let mean_rot = mean.conjugate(&v.adjoint())?;
            let mut target: Option<DensityMatrix> = None;
            for _ in 0..n {
                target = Some(match target {
                    Some(p) => p.tensor(&mean_rot)?,
                    None => mean_rot.clone(),
                });
            }
            (rotated, Some(modular_hamiltonian(&target.unwrap(), ctx)?))
        }
        ControlSetName::CollectiveZ => match rho.space().statistics() {
            Statistics::Boson => {
                let h = crate::work::find_h_star(rho)?;
                let op = h.h_star.is_finite().then(|| {
                    boson_fn_operator(rho.space().n_particles()).scale(-h.h_star / ctx.beta())
                });
                (rho.clone(), op)
            }
            _ => {
                let avg = crate::thermo::averaged_decohered_reduced(rho)?;
                let n = rho.space().n_particles();
                let mut target: Option<DensityMatrix> = None;
                for _ in 0..n {
                    target = Some(match target {
                        Some(p) => p.tensor(&avg)?,
                        None => avg.clone(),
                    });
                }
                (rho.clone(), Some(modular_hamiltonian(&target.unwrap(), ctx)?))
            }
        },
        ControlSetName::TwoQubitHeisenberg => {
            let op = crate::thermo::is_strictly_positive(rho)
                .then(|| ct_solve_c2(rho, ctx).map(|s| s.ct.achieved_hamiltonian))
                .transpose()?;
            (rho.clone(), op)
        }
        ControlSetName::Custom(_) => (rho.clone(), None),
    };

    Ok(StagedWorkReport { report, us_state, us_hamiltonian, it_penalty, ir_yield, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs_diff;
    use crate::oracle::random_density_matrix;
    use crate::thermo::relative_entropy;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn qubit_ancilla(c: f64) -> DensityMatrix {
        DensityMatrix::from_diagonal(HilbertSpace::qubits(1), &[0.5 * (1.0 + c), 0.5 * (1.0 - c)])
            .unwrap()
    }

    fn spec_for(c: f64, steps: usize) -> EngineSpec {
        let mut s = EngineSpec::new(qubit_ancilla(c), ThermalContext::default());
        s.steps = steps;
        s
    }

    #[test]
    fn brillouin_and_bf_values() {
        assert!(brillouin_mu(0.0, 1.0).abs() < 1e-15);
        assert!((brillouin_mu(1e3, 1.0) - 1.0).abs() < 1e-12);
        assert!((brillouin_mu(1.0, 1.0) - 0.76159).abs() < 1e-5);

        assert!(optimal_bf(0.0, 1.0).unwrap().abs() < 1e-15);
        assert!((optimal_bf(1.0f64.tanh(), 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((optimal_bf(0.5, 2.0).unwrap() - 0.54931 / 2.0).abs() < 1e-5);
        assert!(matches!(optimal_bf(1.0, 1.0), Err(Error::PureLimit { .. })));
        assert!(optimal_bf(-0.1, 1.0).is_err());
    }

    #[test]
    fn closed_form_agreement() {
        assert!(closed_form_cycle_work(0.0).unwrap().fee.abs() < 1e-15);
        let w = closed_form_cycle_work(1.0f64.tanh()).unwrap();
        assert!((w.fee - (1.0f64.tanh() - 1.0f64.cosh().ln())).abs() < 1e-12);
        assert!((w.fee - 0.32781).abs() < 1e-4);
        for c in [0.1, 0.3, 0.6, 0.9, 0.99] {
            let w = closed_form_cycle_work(c).unwrap();
            assert!((w.fee - w.es).abs() < 1e-12);
        }
        let near = closed_form_cycle_work(1.0 - 1e-12).unwrap();
        assert!((near.es - LN_2).abs() < 1e-9);
    }

    #[test]
    fn cycle_matches_closed_form() {
        for c in [0.3, 0.6, 0.9] {
            let trace = run_1mqihe(&spec_for(c, 10_000)).unwrap();
            let rel = (trace.final_work - trace.closed_form_work).abs() / trace.closed_form_work;
            assert!(rel <= 1e-4, "c={c} rel={rel}");
        }
        let zero = run_1mqihe(&spec_for(0.0, 100)).unwrap();
        assert!(zero.final_work == 0.0);
    }

    #[test]
    fn cycle_ledger_invariants() {
        let spec = spec_for(0.7, 500);
        let trace = run_1mqihe(&spec).unwrap();

        let stages: Vec<Stage> = trace.samples.iter().map(|s| s.stage).collect();
        let mut last = Stage::I;
        for s in stages {
            assert!(matches!(
                (last, s),
                (Stage::I, Stage::I)
                    | (Stage::I, Stage::II)
                    | (Stage::II, Stage::II)
                    | (Stage::II, Stage::III)
                    | (Stage::III, Stage::III)
            ));
            last = s;
        }

        // stage ii battery balance: -Delta R + mu_z B_f
        let c = 0.7f64;
        let bf = c.atanh();
        let end_ii = trace.samples.iter().filter(|s| s.stage == Stage::II).last().unwrap();
        let expected = -(end_ii.r - 0.0) + c * bf;
        assert!((end_ii.e_battery - expected).abs() < 1e-9);

        // R returns to zero at cycle end
        assert!(trace.samples.last().unwrap().r.abs() < 1e-12);
    }

    #[test]
    fn cycle_convergence_order() {
        for c in [0.3, 0.6, 0.9] {
            let coarse = run_1mqihe(&spec_for(c, 100)).unwrap();
            let fine = run_1mqihe(&spec_for(c, 200)).unwrap();
            let e1 = (coarse.final_work - coarse.closed_form_work).abs();
            let e2 = (fine.final_work - fine.closed_form_work).abs();
            assert!(e1 >= 3.0 * e2, "c={c} e1={e1} e2={e2}");
        }
    }

    #[test]
    fn clamped_pure_ancilla_near_ln2() {
        let pure = DensityMatrix::basis_state(HilbertSpace::qubits(1), 0).unwrap();
        let mut spec = EngineSpec::new(pure.clone(), ThermalContext::default());
        spec.clamp = Some(1e-6);
        spec.steps = 20_000;
        let trace = run_1mqihe(&spec).unwrap();
        assert!((trace.final_work - LN_2).abs() < 1e-3);

        let mut unclamped = spec.clone();
        unclamped.clamp = None;
        assert!(matches!(run_1mqihe(&unclamped), Err(Error::PureLimit { .. })));
    }

    #[test]
    fn feedback_branches_agree() {
        let spec = spec_for(0.9, 2_000);
        let b1 = run_1mqihe_feedback_branch(&spec, 1).unwrap();
        let b2 = run_1mqihe_feedback_branch(&spec, 2).unwrap();
        assert!((b1.final_work - b2.final_work).abs() < 1e-9);

        let swap = run_1mqihe(&spec).unwrap();
        let mean = 0.5 * (b1.final_work + b2.final_work);
        assert!((mean - swap.final_work).abs() < 1e-9);

        // branch 2 runs with inverted field
        assert!(b2.samples.iter().filter(|s| s.stage == Stage::II).all(|s| s.b <= 0.0));

        let (outcome, trace) = run_1mqihe_feedback(&spec).unwrap();
        assert!(outcome == 1 || outcome == 2);
        assert!((trace.final_work - swap.final_work).abs() < 1e-9);
    }

    #[test]
    fn feedback_joint_state_structure() {
        let joint = feedback_joint_state(&qubit_ancilla(0.6)).unwrap();
        // measuring the system qubit: both outcomes equally likely
        let sys = partial_trace(&joint, &[1]).unwrap();
        assert!((sys.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        // conditional blocks are the ancilla and its population flip
        assert!((joint.matrix()[(0, 0)].re - 0.5 * 0.8).abs() < 1e-12);
        assert!((joint.matrix()[(2, 2)].re - 0.5 * 0.2).abs() < 1e-12);
    }

    fn werner(p: f64) -> DensityMatrix {
        let space = HilbertSpace::qubits(2);
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let bell = DensityMatrix::from_pure(space, &[a, Complex64::ZERO, Complex64::ZERO, a]).unwrap();
        let m = bell.matrix() * Complex64::new(p, 0.0)
            + DensityMatrix::maximally_mixed(space).matrix() * Complex64::new(1.0 - p, 0.0);
        DensityMatrix::new(space, m).unwrap()
    }

    #[test]
    fn two_qubit_engine_matches_closed_form() {
        let rho = werner(0.5);
        let mut spec = EngineSpec::new(rho.clone(), ThermalContext::default());
        spec.steps = 10_000;
        let trace = run_2mqihe(&rho, &spec).unwrap();
        let rel = (trace.final_work - trace.closed_form_work).abs() / trace.closed_form_work;
        assert!(rel <= 1e-4, "rel={rel}");

        let mixed = DensityMatrix::maximally_mixed(HilbertSpace::qubits(2));
        let trace = run_2mqihe(&mixed, &spec).unwrap();
        assert!(trace.final_work.abs() < 1e-10);
    }

    #[test]
    fn two_qubit_engine_clamped_pure() {
        let pure = DensityMatrix::basis_state(HilbertSpace::qubits(2), 0).unwrap();
        let mut spec = EngineSpec::new(pure.clone(), ThermalContext::default());
        spec.steps = 20_000;
        assert!(matches!(run_2mqihe(&pure, &spec), Err(Error::PureLimit { .. })));
        spec.clamp = Some(1e-6);
        let trace = run_2mqihe(&pure, &spec).unwrap();
        assert!((trace.final_work - 4.0f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn ir_ledger_identity_offset_inert() {
        let ctx = ThermalContext::default();
        let rho = werner(0.4);
        let sol = ct_solve_c2(&rho, &ctx).unwrap();
        let h = sol.ct.achieved_hamiltonian;
        let base = ir_work_ledger(&h, &ctx, 400, None);
        for offset in [-2.0, 0.7, 5.0] {
            let shifted = h.add(&HermitianOperator::identity(4).scale(offset)).unwrap();
            let w = ir_work_ledger(&shifted, &ctx, 400, None);
            assert!((w - base).abs() < 1e-10, "offset={offset}");
        }
    }

    #[test]
    fn stage_machine_examples() {
        let ctx = ThermalContext::default();
        let space = HilbertSpace::qubits(2);
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let bell = DensityMatrix::from_pure(space, &[a, Complex64::ZERO, Complex64::ZERO, a]).unwrap();

        let r = usitir_stage_machine(&bell, &ControlSet::c2(), &ctx).unwrap();
        assert!(r.it_penalty.abs() < 1e-12);
        assert!((r.total - 4.0f64.ln()).abs() < 1e-12);

        let r = usitir_stage_machine(&bell, &ControlSet::local_independent(2).unwrap(), &ctx).unwrap();
        assert!((r.it_penalty - 2.0 * LN_2).abs() < 1e-12);
        assert!(r.total.abs() < 1e-12);

        let boson = DensityMatrix::from_diagonal(HilbertSpace::bosonic_qubits(2), &[0.5, 0.5, 0.0]).unwrap();
        let f2 = ControlSet::collective_z(2, Statistics::Boson).unwrap();
        let r = usitir_stage_machine(&boson, &f2, &ctx).unwrap();
        assert!((r.it_penalty - 0.20810).abs() < 1e-4);
        assert!((r.total - 0.19738).abs() < 1e-4);
        // the matched Hamiltonian's Gibbs state reproduces the thermal target
        let h = r.us_hamiltonian.unwrap();
        let gibbs = gibbs_state(&h, &ctx);
        let target = [-2.0f64, 0.0, 2.0].map(|f| (r.us_state.dim(), f));
        let _ = target;
        let x = (13.0f64.sqrt() - 1.0) / 6.0;
        let z = 1.0 / x + 1.0 + x;
        assert!((gibbs.matrix()[(0, 0)].re - (1.0 / x) / z).abs() < 1e-10);
    }

    #[test]
    fn stage_machine_totals_match_extractable_work() {
        let ctx = ThermalContext::default();
        let sets = [
            ControlSet::local_independent(2).unwrap(),
            ControlSet::local_common(2).unwrap(),
            ControlSet::collective_z(2, Statistics::Distinguishable).unwrap(),
            ControlSet::c2(),
        ];
        for seed in 0..50u64 {
            let rho = random_density_matrix(4, 4, 900 + seed).unwrap();
            for cs in &sets {
                let staged = usitir_stage_machine(&rho, cs, &ctx).unwrap();
                let direct = extractable_work(&rho, cs, &ctx).unwrap();
                assert!((staged.total - direct.work).abs() < 1e-8);
                assert!((staged.ir_yield - staged.it_penalty - staged.total).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn stage_machine_penalty_is_relative_entropy_to_target() {
        // for the product-form sets the IT penalty must equal
        // (ln 2) S(rho_1 || gibbs(H)) for the reported pair
        let ctx = ThermalContext::default();
        for seed in 0..10u64 {
            let rho = random_density_matrix(4, 4, 950 + seed).unwrap();
            for cs in [
                ControlSet::local_independent(2).unwrap(),
                ControlSet::local_common(2).unwrap(),
            ] {
                let staged = usitir_stage_machine(&rho, &cs, &ctx).unwrap();
                let target = gibbs_state(&staged.us_hamiltonian.unwrap(), &ctx);
                let penalty = LN_2 * relative_entropy(&staged.us_state, &target).unwrap();
                assert!((penalty - staged.it_penalty).abs() < 1e-8, "{} seed {seed}", cs.name());
            }
        }
    }

    #[test]
    fn csv_emission() {
        let trace = run_1mqihe(&spec_for(0.5, 10)).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,stage,B,mu_z,R,E_battery");
        assert_eq!(csv.lines().count(), trace.samples.len() + 1);
        assert!(csv.contains(",ii,"));
        assert!(csv.contains(",iii,"));
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = spec_for(0.5, 5);
        assert!(run_1mqihe(&spec).is_err());
        spec.steps = 100;
        spec.ancilla_state = DensityMatrix::maximally_mixed(HilbertSpace::qubits(2));
        assert!(run_1mqihe(&spec).is_err());
    }

    #[test]
    fn max_abs_diff_reexport_guard() {
        let m = CMatrix::identity(2, 2);
        assert!(max_abs_diff(&m, &m) < 1e-15);
    }
}
