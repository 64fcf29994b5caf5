use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use usitir::control::{ct_search_generic, ct_solve_c2, is_dmc, lie_closure_dim, CtSearchOutcome, SearchBudget};
use usitir::cycle::{
    run_1mqihe, run_1mqihe_feedback, run_2mqihe, usitir_stage_machine, CycleTrace, EngineSpec,
};
use usitir::error::{Error, Result};
use usitir::operator::{DensityMatrix, HilbertSpace, Statistics};
use usitir::oracle::{brute_force_su, OracleBudget};
use usitir::scenario::{
    load_state, parse_control_set, parse_named_state, EngineKind, Scenario,
};
use usitir::thermo::{von_neumann_entropy, ThermalContext};
use usitir::work::{extractable_work, feedback_work, s_u_fn_boson, s_u_fn_distinguishable, WorkMode};

#[derive(Parser)]
#[command(name = "usitir", about = "Quantum information heat engine calculator", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extractable work and uncontrollable entropy for a state and control set
    Work(WorkArgs),
    /// Reference work tables for the collective-z control set
    Tables(TablesArgs),
    /// Simulate an engine cycle and compare the ledger to the closed form
    Cycle(CycleArgs),
    /// Controllability diagnostics: Lie closure, DMC verdict, CT solution
    Control(ControlArgs),
    /// Brute-force verification of the uncontrollable entropy
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatArg {
    Distinguishable,
    Boson,
    Fermion,
}

impl From<StatArg> for Statistics {
    fn from(s: StatArg) -> Self {
        match s {
            StatArg::Distinguishable => Statistics::Distinguishable,
            StatArg::Boson => Statistics::Boson,
            StatArg::Fermion => Statistics::Fermion,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Swap,
    Feedback,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    #[value(name = "1mqihe")]
    OneMqihe,
    #[value(name = "2mqihe")]
    TwoMqihe,
    Usitir,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON, schema 1); flags override its fields
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Inverse temperature
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Eigenvalue floor for near-pure inputs
    #[arg(long)]
    clamp: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct WorkArgs {
    #[command(flatten)]
    common: Common,
    /// Control set shorthand: L2, G2, F2, C2
    #[arg(long)]
    set: Option<String>,
    /// Named state or scenario-provided input
    #[arg(long)]
    state: Option<String>,
    #[arg(long, value_enum)]
    statistics: Option<StatArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct CycleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    /// Ancilla polarization for the single-qubit engine
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    state: Option<String>,
    #[arg(long, value_enum)]
    statistics: Option<StatArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Control set for the staged usitir engine
    #[arg(long)]
    set: Option<String>,
    /// Write the cycle trace CSV to this path
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ControlArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    state: Option<String>,
    #[arg(long, value_enum)]
    statistics: Option<StatArg>,
    /// Spectral residual below which a CT search counts as found
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    state: Option<String>,
    #[arg(long, value_enum)]
    statistics: Option<StatArg>,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
}

fn load_scenario(common: &Common) -> Result<Option<Scenario>> {
    match &common.scenario {
        None => Ok(None),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidScenario(format!("cannot read scenario {}: {e}", path.display()))
            })?;
            Scenario::from_json(&text).map(Some)
        }
    }
}

struct Resolved {
    scenario: Option<Scenario>,
    beta: f64,
    steps: usize,
    seed: u64,
    clamp: Option<f64>,
}

fn resolve(common: &Common) -> Result<Resolved> {
    let scenario = load_scenario(common)?;
    let s = scenario.as_ref();
    Ok(Resolved {
        beta: common.beta.or(s.and_then(|s| s.beta)).unwrap_or(1.0),
        steps: common.steps.or(s.and_then(|s| s.steps)).unwrap_or(10_000),
        seed: common.seed.or(s.and_then(|s| s.seed)).unwrap_or(0),
        clamp: common.clamp.or(s.and_then(|s| s.clamp)),
        scenario,
    })
}

fn resolve_statistics(flag: Option<StatArg>, scenario: Option<&Scenario>) -> Statistics {
    flag.map(Into::into)
        .or(scenario.and_then(|s| s.statistics))
        .unwrap_or(Statistics::Distinguishable)
}

fn resolve_state(
    flag: &Option<String>,
    scenario: Option<&Scenario>,
    statistics: Statistics,
) -> Result<DensityMatrix> {
    if let Some(name) = flag {
        return parse_named_state(name, statistics);
    }
    if let Some(spec) = scenario.and_then(|s| s.input_state.clone()) {
        let loaded = load_state(&spec, statistics)?;
        if let Some(w) = loaded.warning {
            eprintln!("warning: {w}");
        }
        return Ok(loaded.state);
    }
    Err(Error::InvalidScenario("no input state: pass --state or a scenario with input_state".into()))
}

fn resolve_set_name(flag: &Option<String>, scenario: Option<&Scenario>) -> Result<String> {
    flag.clone()
        .or_else(|| scenario.and_then(|s| s.control_set.clone()))
        .ok_or_else(|| {
            Error::InvalidScenario("no control set: pass --set or a scenario with control_set".into())
        })
}

fn emit<T: Serialize>(value: &T, format: Format) -> Result<()> {
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable report"));
            Ok(())
        }
        Format::Csv | Format::Table => Err(Error::InvalidScenario(
            "this command renders json only; use --format json".into(),
        )),
    }
}

/// Renders a work value in k_B T units as a recognizable log expression.
fn ln_form(w: f64) -> String {
    let candidates: [(f64, &str); 6] = [
        (0.0, "0"),
        (std::f64::consts::LN_2, "ln 2"),
        (3.0f64.ln(), "ln 3"),
        (4.0f64.ln(), "ln 4"),
        (2.0 / 3.0 * 3.0f64.ln(), "(2/3) ln 3"),
        (3.0f64.log2() * std::f64::consts::LN_2, "ln 3"),
    ];
    for (v, s) in candidates {
        if (w - v).abs() < 1e-9 {
            return s.to_string();
        }
    }
    format!("{w:.5}")
}

fn cmd_work(args: &WorkArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let statistics = resolve_statistics(args.statistics, r.scenario.as_ref());
    let rho = resolve_state(&args.state, r.scenario.as_ref(), statistics)?;
    let cs = parse_control_set(&resolve_set_name(&args.set, r.scenario.as_ref())?, statistics)?;
    let ctx = ThermalContext::new(r.beta)?;
    let mode = args
        .mode
        .map(|m| match m {
            ModeArg::Swap => WorkMode::Swap,
            ModeArg::Feedback => WorkMode::Feedback,
        })
        .or(r.scenario.as_ref().and_then(|s| s.mode.map(Into::into)))
        .unwrap_or(WorkMode::Swap);
    let report = match mode {
        WorkMode::Swap => extractable_work(&rho, &cs, &ctx)?,
        WorkMode::Feedback => feedback_work(&rho, &cs, &ctx)?,
    };
    match args.common.format {
        Format::Json => emit(&report, Format::Json),
        _ => {
            println!("control set      {}", report.control_set);
            println!("mode             {:?}", report.mode);
            println!("S(rho)           {:.6} bits", report.input_entropy);
            println!("S_u              {:.6} bits", report.uncontrollable_entropy);
            println!("W                {:.6} k_B T  ({})", report.work, ln_form(report.work));
            println!("W_opt            {:.6} k_B T  ({})", report.optimal_work, ln_form(report.optimal_work));
            println!("optimal          {}", report.is_optimal);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TableRow {
    input: String,
    s_u_bits: f64,
    work: f64,
    work_ln_form: String,
}

fn cmd_tables(args: &TablesArgs) -> Result<()> {
    let mut dist_rows = Vec::new();
    for name in ["|00>", "|01>", "|10>", "|11>"] {
        let rho = parse_named_state(name, Statistics::Distinguishable)?;
        let su = s_u_fn_distinguishable(&rho)?;
        let w = std::f64::consts::LN_2 * (2.0 - von_neumann_entropy(&rho) - su);
        dist_rows.push(TableRow {
            input: name.into(),
            s_u_bits: su,
            work: w,
            work_ln_form: ln_form(w),
        });
    }
    let mut boson_rows = Vec::new();
    for n in 0..=2usize {
        let rho = DensityMatrix::basis_state(HilbertSpace::bosonic_qubits(2), n)?;
        let su = s_u_fn_boson(&rho)?;
        let w = std::f64::consts::LN_2 * (3.0f64.log2() - von_neumann_entropy(&rho) - su);
        boson_rows.push(TableRow {
            input: format!("|{n}>"),
            s_u_bits: su,
            work: w,
            work_ln_form: ln_form(w),
        });
    }
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Tables {
                distinguishable: Vec<TableRow>,
                boson: Vec<TableRow>,
            }
            emit(&Tables { distinguishable: dist_rows, boson: boson_rows }, Format::Json)
        }
        _ => {
            println!("distinguishable two-qubit inputs under F2");
            println!("{:<8}{:>12}{:>14}  {}", "input", "S_u [bits]", "W [k_B T]", "ln form");
            for row in &dist_rows {
                println!("{:<8}{:>12.5}{:>14.5}  {}", row.input, row.s_u_bits, row.work, row.work_ln_form);
            }
            println!();
            println!("bosonic two-qubit inputs under F2");
            println!("{:<8}{:>12}{:>14}  {}", "input", "S_u [bits]", "W [k_B T]", "ln form");
            for row in &boson_rows {
                println!("{:<8}{:>12.5}{:>14.5}  {}", row.input, row.s_u_bits, row.work, row.work_ln_form);
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CycleSummary {
    engine: String,
    final_work: f64,
    closed_form_work: f64,
    relative_deviation: f64,
    entropy_in_bits: f64,
    steps: usize,
    samples: usize,
}

fn summarize(engine: &str, trace: &CycleTrace, steps: usize) -> CycleSummary {
    let denom = trace.closed_form_work.abs().max(1e-300);
    CycleSummary {
        engine: engine.into(),
        final_work: trace.final_work,
        closed_form_work: trace.closed_form_work,
        relative_deviation: (trace.final_work - trace.closed_form_work).abs() / denom,
        entropy_in_bits: trace.entropy_in,
        steps,
        samples: trace.samples.len(),
    }
}

fn cmd_cycle(args: &CycleArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let statistics = resolve_statistics(args.statistics, r.scenario.as_ref());
    let ctx = ThermalContext::new(r.beta)?;
    let engine = args
        .engine
        .or_else(|| {
            r.scenario.as_ref().and_then(|s| s.engine).map(|e| match e {
                EngineKind::OneMqihe => EngineArg::OneMqihe,
                EngineKind::TwoMqihe => EngineArg::TwoMqihe,
                EngineKind::Usitir => EngineArg::Usitir,
            })
        })
        .unwrap_or(EngineArg::OneMqihe);
    let mode = args
        .mode
        .map(|m| match m {
            ModeArg::Swap => WorkMode::Swap,
            ModeArg::Feedback => WorkMode::Feedback,
        })
        .or(r.scenario.as_ref().and_then(|s| s.mode.map(Into::into)))
        .unwrap_or(WorkMode::Swap);

    let (label, trace) = match engine {
        EngineArg::OneMqihe => {
            let ancilla = match args.c.or(r.scenario.as_ref().and_then(|s| s.c)) {
                Some(c) => {
                    if !(0.0..=1.0).contains(&c) {
                        return Err(Error::FunctionDomain(c));
                    }
                    DensityMatrix::from_diagonal(
                        HilbertSpace::qubits(1),
                        &[0.5 * (1.0 + c), 0.5 * (1.0 - c)],
                    )?
                }
                None => resolve_state(&args.state, r.scenario.as_ref(), statistics)?,
            };
            let mut spec = EngineSpec::new(ancilla, ctx);
            spec.steps = r.steps;
            spec.seed = r.seed;
            spec.clamp = r.clamp;
            spec.mode = mode;
            let trace = match mode {
                WorkMode::Swap => run_1mqihe(&spec)?,
                WorkMode::Feedback => run_1mqihe_feedback(&spec)?.1,
            };
            ("1mqihe", trace)
        }
        EngineArg::TwoMqihe => {
            let rho = resolve_state(&args.state, r.scenario.as_ref(), statistics)?;
            let mut spec = EngineSpec::new(rho.clone(), ctx);
            spec.steps = r.steps;
            spec.seed = r.seed;
            spec.clamp = r.clamp;
            ("2mqihe", run_2mqihe(&rho, &spec)?)
        }
        EngineArg::Usitir => {
            let rho = resolve_state(&args.state, r.scenario.as_ref(), statistics)?;
            let cs = parse_control_set(&resolve_set_name(&args.set, r.scenario.as_ref())?, statistics)?;
            let staged = usitir_stage_machine(&rho, &cs, &ctx)?;
            return emit(&staged, Format::Json);
        }
    };

    if let Some(path) = &args.csv {
        fs::write(path, trace.to_csv()).map_err(|e| {
            Error::InvalidScenario(format!("cannot write {}: {e}", path.display()))
        })?;
    }
    match args.common.format {
        Format::Csv => {
            print!("{}", trace.to_csv());
            Ok(())
        }
        _ => emit(&summarize(label, &trace, r.steps), Format::Json),
    }
}

#[derive(Serialize)]
struct ControlReport {
    control_set: String,
    lie_closure_dim: usize,
    space_dim: usize,
    dmc: bool,
    ct: Option<CtReport>,
}

#[derive(Serialize)]
struct CtReport {
    found: bool,
    spectral_residual: f64,
    coefficients: Option<Vec<f64>>,
}

fn cmd_control(args: &ControlArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let statistics = resolve_statistics(args.statistics, r.scenario.as_ref());
    let name = resolve_set_name(&args.set, r.scenario.as_ref())?;
    let cs = parse_control_set(&name, statistics)?;
    let ctx = ThermalContext::new(r.beta)?;

    let ct = if args.state.is_some()
        || r.scenario.as_ref().map(|s| s.input_state.is_some()).unwrap_or(false)
    {
        let rho = resolve_state(&args.state, r.scenario.as_ref(), statistics)?;
        if cs.dim() != rho.dim() {
            return Err(Error::DimensionMismatch(cs.dim(), rho.dim()));
        }
        let report = if name.eq_ignore_ascii_case("c2") {
            let sol = ct_solve_c2(&rho, &ctx)?;
            CtReport {
                found: sol.ct.spectral_residual <= args.tol,
                spectral_residual: sol.ct.spectral_residual,
                coefficients: Some(sol.ct.coefficients),
            }
        } else {
            let budget = SearchBudget { seed: r.seed, ..Default::default() };
            match ct_search_generic(&cs, &rho, &ctx, &budget)? {
                CtSearchOutcome::Found(sol) => CtReport {
                    found: sol.spectral_residual <= args.tol,
                    spectral_residual: sol.spectral_residual,
                    coefficients: Some(sol.coefficients),
                },
                CtSearchOutcome::Absent { best_residual } => CtReport {
                    found: false,
                    spectral_residual: best_residual,
                    coefficients: None,
                },
            }
        };
        Some(report)
    } else {
        None
    };

    let report = ControlReport {
        control_set: cs.name().to_string(),
        lie_closure_dim: lie_closure_dim(&cs),
        space_dim: cs.dim(),
        dmc: is_dmc(&cs),
        ct,
    };
    match args.common.format {
        Format::Json => emit(&report, Format::Json),
        _ => {
            println!("control set      {}", report.control_set);
            println!("closure dim      {}", report.lie_closure_dim);
            println!("space dim        {} (DMC needs {})", report.space_dim, report.space_dim * report.space_dim - 1);
            println!("DMC              {}", report.dmc);
            if let Some(ct) = &report.ct {
                println!("CT found         {}", ct.found);
                println!("residual         {:.3e}", ct.spectral_residual);
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct OracleReport {
    control_set: String,
    estimate_bits: f64,
    closed_form_bits: Option<f64>,
    difference_bits: Option<f64>,
    converged: bool,
    evaluations: usize,
    restarts: usize,
    seed: u64,
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let statistics = resolve_statistics(args.statistics, r.scenario.as_ref());
    let rho = resolve_state(&args.state, r.scenario.as_ref(), statistics)?;
    let cs = parse_control_set(&resolve_set_name(&args.set, r.scenario.as_ref())?, statistics)?;
    let ctx = ThermalContext::new(r.beta)?;
    let budget = OracleBudget { restarts: args.restarts, ..Default::default() };
    let est = brute_force_su(&rho, &cs, &ctx, &budget, r.seed)?;

    let closed = match cs.name() {
        usitir::control::ControlSetName::LocalIndependent => {
            Some(usitir::work::s_u_local_independent(&rho)?)
        }
        usitir::control::ControlSetName::LocalCommon => Some(usitir::work::s_u_local_common(&rho)?),
        usitir::control::ControlSetName::CollectiveZ => Some(match statistics {
            Statistics::Boson => s_u_fn_boson(&rho)?,
            _ => s_u_fn_distinguishable(&rho)?,
        }),
        _ => None,
    };
    let report = OracleReport {
        control_set: cs.name().to_string(),
        estimate_bits: est.value_bits,
        closed_form_bits: closed,
        difference_bits: closed.map(|c| est.value_bits - c),
        converged: est.converged,
        evaluations: est.evaluations,
        restarts: args.restarts,
        seed: r.seed,
    };
    emit(&report, Format::Json)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Work(a) => cmd_work(a),
        Cmd::Tables(a) => cmd_tables(a),
        Cmd::Cycle(a) => cmd_cycle(a),
        Cmd::Control(a) => cmd_control(a),
        Cmd::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
