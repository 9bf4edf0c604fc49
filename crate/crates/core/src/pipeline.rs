//! End-to-end steps behind the command-line tools: prepare a state, evolve
//! it, evaluate correlations along the trajectory and fit the relaxation
//! parameters back out.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::config::RunConfig;
use crate::correlations::{correlations_exact, quantum_correlation_q};
use crate::error::{Error, Result};
use crate::fitting::{add_noise, estimate_parameters, FitConfig, FitReport, Series};
use crate::io::{self, CorrelationRow, ExactColumns};
use crate::relaxation::time_series;
use crate::state::{DeviationMatrix, ThermalState};
use crate::states::{bell_pseudopure, computational_pseudopure, equilibrium_deviation, random_x, BellState};

/// Step-to-step increase tolerated by the monotonicity flags.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Named initial states understood by `prepare`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpec {
    Bell(BellState),
    XRandom,
    /// Pseudopure `|ij>`, basis index `2i + j`.
    Computational(usize),
    Equilibrium,
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(b) = s.parse::<BellState>() {
            return Ok(StateSpec::Bell(b));
        }
        match s {
            "x-random" => return Ok(StateSpec::XRandom),
            "equilibrium" => return Ok(StateSpec::Equilibrium),
            _ => {}
        }
        if let Some(bits) = s.strip_prefix("computational:") {
            let b = bits.as_bytes();
            if b.len() == 2 && b.iter().all(|c| *c == b'0' || *c == b'1') {
                return Ok(StateSpec::Computational(2 * (b[0] - b'0') as usize + (b[1] - b'0') as usize));
            }
        }
        Err(Error::Parse(format!(
            "unknown state '{s}' (expected psi+, psi-, phi+, phi-, x-random, computational:ij or equilibrium)"
        )))
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Bell(b) => write!(f, "{}", b.name()),
            StateSpec::XRandom => write!(f, "x-random"),
            StateSpec::Computational(k) => write!(f, "computational:{}{}", k / 2, k % 2),
            StateSpec::Equilibrium => write!(f, "equilibrium"),
        }
    }
}

/// Builds the deviation matrix of a named state, using `alpha` and `seed`
/// from the configuration where relevant.
pub fn prepare(spec: StateSpec, cfg: &RunConfig) -> Result<DeviationMatrix> {
    match spec {
        StateSpec::Bell(b) => Ok(bell_pseudopure(b, cfg.alpha)),
        StateSpec::XRandom => Ok(random_x(cfg.seed, cfg.alpha)),
        StateSpec::Computational(k) => computational_pseudopure(k, cfg.alpha),
        StateSpec::Equilibrium => Ok(equilibrium_deviation()),
    }
}

/// Trajectory on `t = k dt`, `k = 1..=n_steps`, optionally preceded by the
/// initial state at `t = 0`.
pub fn evolve(d0: &DeviationMatrix, cfg: &RunConfig, include_initial: bool) -> Result<Series> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.n_steps + 1);
    if include_initial {
        out.push((0.0, *d0));
    }
    out.extend(time_series(d0, &cfg.relaxation()?, cfg.dt, cfg.n_steps)?);
    Ok(out)
}

/// Expansion-path correlations for every row; with `exact`, also the exact
/// values in bits at the configured `epsilon`.
pub fn correlations(series: &[(f64, DeviationMatrix)], cfg: &RunConfig, exact: bool) -> Result<Vec<CorrelationRow>> {
    let opt = cfg.optimizer();
    series
        .iter()
        .enumerate()
        .map(|(k, (t, d))| {
            let tag = |e: Error| match e {
                Error::OptimizerFailure(m) => Error::OptimizerFailure(format!("row {k}: {m}")),
                other => other,
            };
            let report = quantum_correlation_q(d, &opt).map_err(tag)?;
            let exact = if exact {
                let s = ThermalState::new(cfg.epsilon, *d)?;
                let r = correlations_exact(&s, &opt, None).map_err(tag)?;
                Some(ExactColumns { total_i: r.total_i, classical_k: r.classical_k, quantum_q: r.quantum_q })
            } else {
                None
            };
            Ok(CorrelationRow { t: *t, report, exact })
        })
        .collect()
}

/// Fits `(J0, J1, J2)` and `R1..R3`, optionally after adding seeded noise.
/// Returns the report and the series actually fitted.
pub fn fit(
    series: &[(f64, DeviationMatrix)],
    cfg: &RunConfig,
    noise: Option<(f64, u64)>,
    strict: bool,
) -> Result<(FitReport, Series)> {
    let data = match noise {
        Some((sigma, seed)) => add_noise(series, sigma, seed)?,
        None => series.to_vec(),
    };
    let fit_cfg = FitConfig { strict, ..cfg.fit() };
    let report = estimate_parameters(&data, cfg.c, &fit_cfg)?;
    Ok((report, data))
}

/// The five initial states followed by `reproduce`.
pub const REPRODUCE_STATES: [StateSpec; 5] = [
    StateSpec::XRandom,
    StateSpec::Bell(BellState::PsiPlus),
    StateSpec::Bell(BellState::PsiMinus),
    StateSpec::Bell(BellState::PhiPlus),
    StateSpec::Bell(BellState::PhiMinus),
];

#[derive(Debug, Clone, PartialEq)]
pub struct StateRun {
    pub state: StateSpec,
    pub initial: DeviationMatrix,
    pub rows: Vec<CorrelationRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub state: StateSpec,
    pub i0: f64,
    pub k0: f64,
    pub q0: f64,
    /// First grid time with `Q < 0.05 Q(0)`; `None` if never reached or
    /// `Q(0) = 0`.
    pub q_5pct_time: Option<f64>,
    pub monotone_i: bool,
    pub monotone_k: bool,
    pub monotone_q: bool,
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + MONOTONE_TOL)
}

pub fn summarize(run: &StateRun) -> Summary {
    let col = |f: fn(&CorrelationRow) -> f64| run.rows.iter().map(f).collect::<Vec<f64>>();
    let i = col(|r| r.report.total_i);
    let k = col(|r| r.report.classical_k);
    let q = col(|r| r.report.quantum_q);
    let q0 = q[0];
    let q_5pct_time = (q0 > 0.0)
        .then(|| run.rows.iter().find(|r| r.report.quantum_q < 0.05 * q0).map(|r| r.t))
        .flatten();
    Summary {
        state: run.state,
        i0: i[0],
        k0: k[0],
        q0,
        q_5pct_time,
        monotone_i: nonincreasing(&i),
        monotone_k: nonincreasing(&k),
        monotone_q: nonincreasing(&q),
    }
}

/// Prepare, evolve (including `t = 0`) and evaluate correlations for each of
/// [`REPRODUCE_STATES`].
pub fn reproduce(cfg: &RunConfig) -> Result<Vec<StateRun>> {
    REPRODUCE_STATES
        .iter()
        .map(|&state| {
            let initial = prepare(state, cfg)?;
            let series = evolve(&initial, cfg, true)?;
            let rows = correlations(&series, cfg, false)?;
            Ok(StateRun { state, initial, rows })
        })
        .collect()
}

pub fn format_summary(summaries: &[Summary]) -> String {
    let mut out = String::from("state,I0,K0,Q0,t_Q_below_5pct_s,monotone_I,monotone_K,monotone_Q\n");
    for s in summaries {
        let t = s.q_5pct_time.map_or_else(|| "none".to_string(), |t| format!("{t:.16e}"));
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{},{},{}\n",
            s.state, s.i0, s.k0, s.q0, t, s.monotone_i, s.monotone_k, s.monotone_q
        ));
    }
    out
}

/// File name used for a state's correlation CSV, e.g. `psi+` -> `psi_plus.csv`.
pub fn state_file_name(state: StateSpec) -> String {
    let name = state.to_string();
    let name = match state {
        StateSpec::Bell(_) => name.replace('+', "_plus").replace('-', "_minus"),
        _ => name.replace(['-', ':'], "_"),
    };
    format!("{name}.csv")
}

/// Writes one correlations CSV per state, `summary.csv` and the initial
/// matrices into `dir`, returning the summaries.
pub fn write_reproduction(runs: &[StateRun], dir: &Path) -> Result<Vec<Summary>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut summaries = Vec::new();
    for run in runs {
        io::write_atomic(&dir.join(state_file_name(run.state)), &io::format_correlations(&run.rows))?;
        let init = state_file_name(run.state).replace(".csv", ".initial.txt");
        io::write_atomic(&dir.join(init), &io::format_deviation(&run.initial))?;
        summaries.push(summarize(run));
    }
    io::write_atomic(&dir.join("summary.csv"), &format_summary(&summaries))?;
    Ok(summaries)
}
