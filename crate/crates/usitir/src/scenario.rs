//! Scenario files: a small JSON schema naming an engine, a control set and
//! an input state, with named-state shorthand for the common inputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::ControlSet;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, DensityMatrix, HilbertSpace, Statistics};
use crate::work::WorkMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineKind {
    #[serde(rename = "1mqihe")]
    OneMqihe,
    #[serde(rename = "2mqihe")]
    TwoMqihe,
    #[serde(rename = "usitir")]
    Usitir,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    /// Inline matrix with entries as [re, im] pairs.
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub engine: Option<EngineKind>,
    #[serde(default)]
    pub mode: Option<WorkModeField>,
    #[serde(default)]
    pub statistics: Option<Statistics>,
    #[serde(default)]
    pub control_set: Option<String>,
    #[serde(default)]
    pub input_state: Option<StateSpec>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Ancilla polarization for the single-qubit engine.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub clamp: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkModeField {
    Swap,
    Feedback,
}

impl From<WorkModeField> for WorkMode {
    fn from(m: WorkModeField) -> Self {
        match m {
            WorkModeField::Swap => WorkMode::Swap,
            WorkModeField::Feedback => WorkMode::Feedback,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::InvalidScenario(format!("malformed scenario file: {e}")))?;
        if s.schema != 1 {
            return Err(Error::InvalidScenario(format!(
                "unsupported schema version {}, expected 1",
                s.schema
            )));
        }
        Ok(s)
    }
}

/// Parses control set shorthand: L<n>, G<n>, F<n>, C2.
pub fn parse_control_set(name: &str, statistics: Statistics) -> Result<ControlSet> {
    let upper = name.to_uppercase();
    let (kind, rest) = upper.split_at(1);
    let n: usize = rest
        .parse()
        .map_err(|_| Error::IncompatibleControlSet(format!("unknown control set {name}")))?;
    match kind {
        "L" => ControlSet::local_independent(n),
        "G" => ControlSet::local_common(n),
        "F" => ControlSet::collective_z(n, statistics),
        "C" if n == 2 => Ok(ControlSet::c2()),
        _ => Err(Error::IncompatibleControlSet(format!("unknown control set {name}"))),
    }
}

fn space_for(dim: usize, statistics: Statistics) -> Result<HilbertSpace> {
    match statistics {
        Statistics::Distinguishable => {
            if !dim.is_power_of_two() {
                return Err(Error::InvalidSpace(format!(
                    "dimension {dim} is not a qubit register dimension"
                )));
            }
            Ok(HilbertSpace::qubits(dim.trailing_zeros() as usize))
        }
        Statistics::Boson => HilbertSpace::new(dim - 1, 2, Statistics::Boson),
        Statistics::Fermion => HilbertSpace::new(2, 2, Statistics::Fermion),
    }
}

fn bell(which: &str) -> Result<DensityMatrix> {
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let space = HilbertSpace::qubits(2);
    let psi = match which {
        "phi+" => [a, Complex64::ZERO, Complex64::ZERO, a],
        "phi-" => [a, Complex64::ZERO, Complex64::ZERO, -a],
        "psi+" => [Complex64::ZERO, a, a, Complex64::ZERO],
        "psi-" => [Complex64::ZERO, a, -a, Complex64::ZERO],
        other => {
            return Err(Error::InvalidScenario(format!("unknown Bell state bell-{other}")))
        }
    };
    DensityMatrix::from_pure(space, &psi)
}

fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidScenario(format!("werner parameter {p} outside [0, 1]")));
    }
    let b = bell("phi+")?;
    let space = HilbertSpace::qubits(2);
    let m = b.matrix() * Complex64::new(p, 0.0)
        + DensityMatrix::maximally_mixed(space).matrix() * Complex64::new(1.0 - p, 0.0);
    DensityMatrix::new(space, m)
}

fn parse_probs(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidScenario(format!("bad probability entry {t:?}")))
        })
        .collect()
}

fn parse_single(name: &str, statistics: Statistics) -> Result<DensityMatrix> {
    let name = name.trim();
    if let Some(body) = name.strip_prefix('|').and_then(|s| s.strip_suffix('>')) {
        return match statistics {
            Statistics::Distinguishable => {
                let mut index = 0usize;
                for ch in body.chars() {
                    index = 2 * index
                        + match ch {
                            '0' => 0,
                            '1' => 1,
                            _ => {
                                return Err(Error::InvalidScenario(format!(
                                    "ket {name} must contain only 0s and 1s"
                                )))
                            }
                        };
                }
                DensityMatrix::basis_state(HilbertSpace::qubits(body.len()), index)
            }
            _ => {
                let n: usize = body.parse().map_err(|_| {
                    Error::InvalidScenario(format!("occupation ket {name} must hold a number"))
                })?;
                DensityMatrix::basis_state(HilbertSpace::bosonic_qubits(2), n)
            }
        };
    }
    if let Some(which) = name.strip_prefix("bell-") {
        return bell(which);
    }
    if let Some(p) = name.strip_prefix("werner:") {
        let p: f64 = p
            .parse()
            .map_err(|_| Error::InvalidScenario(format!("bad werner parameter {p:?}")))?;
        return werner(p);
    }
    if let Some(n) = name.strip_prefix("occupation:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::InvalidScenario(format!("bad occupation number {n:?}")))?;
        return DensityMatrix::basis_state(HilbertSpace::bosonic_qubits(2), n);
    }
    if let Some(entries) = name.strip_prefix("spectrum:") {
        let probs = parse_probs(entries)?;
        let space = space_for(probs.len(), statistics)?;
        return DensityMatrix::from_diagonal(space, &probs);
    }
    if let Some(d) = name.strip_prefix("mixed:") {
        let d: usize = d
            .parse()
            .map_err(|_| Error::InvalidScenario(format!("bad dimension {d:?}")))?;
        return Ok(DensityMatrix::maximally_mixed(space_for(d, statistics)?));
    }
    Err(Error::InvalidScenario(format!("unknown named state {name:?}")))
}

/// Expands a named state. Tensor products of distinguishable factors are
/// written with an infix `⊗` (or ASCII `(x)`).
pub fn parse_named_state(name: &str, statistics: Statistics) -> Result<DensityMatrix> {
    let normalized = name.replace("(x)", "⊗");
    let mut factors = normalized.split('⊗');
    let mut state = parse_single(factors.next().unwrap(), statistics)?;
    for factor in factors {
        state = state.tensor(&parse_single(factor, statistics)?)?;
    }
    Ok(state)
}

/// Result of loading an inline or named state; carries a normalization
/// warning when the trace deviation fell in (1e-10, 1e-6].
pub struct LoadedState {
    pub state: DensityMatrix,
    pub warning: Option<String>,
}

pub fn load_state(spec: &StateSpec, statistics: Statistics) -> Result<LoadedState> {
    match spec {
        StateSpec::Named(name) => Ok(LoadedState {
            state: parse_named_state(name, statistics)?,
            warning: None,
        }),
        StateSpec::Matrix(rows) => {
            let d = rows.len();
            if d == 0 || rows.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidScenario("inline matrix must be square".into()));
            }
            let mut m = CMatrix::zeros(d, d);
            for (i, row) in rows.iter().enumerate() {
                for (j, &[re, im]) in row.iter().enumerate() {
                    m[(i, j)] = Complex64::new(re, im);
                }
            }
            let trace: f64 = (0..d).map(|i| m[(i, i)].re).sum();
            let deviation = (trace - 1.0).abs();
            let mut warning = None;
            if deviation > 1e-10 {
                if deviation > 1e-6 {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "trace {trace} deviates from 1 by {deviation:.3e}, beyond the 1e-6 normalization window"
                    )));
                }
                m /= Complex64::new(trace, 0.0);
                warning = Some(format!(
                    "input state renormalized: trace deviated from 1 by {deviation:.3e}"
                ));
            }
            let state = DensityMatrix::new(space_for(d, statistics)?, m)?;
            Ok(LoadedState { state, warning })
        }
    }
}
