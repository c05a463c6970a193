//! Configuration-driven runner for the particle + bath structure experiments.

pub mod config;
pub mod output;

use std::fs;
use std::io::{self, Write};

use log::info;
use qbm_core::experiments::{self, perturb_generic, ScenarioConfig, StructureKind};
use qbm_core::model::build_qbm_hamiltonian;
use qbm_core::structure::{alternate_structure_with, RelativeBasis};
use qbm_core::StructureMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{parse_config, parse_config_with, ConfigError, RunConfig, Scenario};
use output::Table;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "QBM_THREADS";

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Model(qbm_core::Error),
    Io(String),
}

impl RunError {
    /// 1 for bad input, 2 for numerical conditioning failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Model(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Model(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Domain(e) => RunError::Model(e),
            other => RunError::Config(other),
        }
    }
}

impl From<qbm_core::Error> for RunError {
    fn from(e: qbm_core::Error) -> Self {
        RunError::Model(e)
    }
}

/// The scenario after the seeded perturbation has been applied.
pub fn effective_scenario(cfg: &RunConfig) -> Result<ScenarioConfig, RunError> {
    let mut sc = cfg.scenario_config.clone();
    if cfg.perturb > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        sc.model = perturb_generic(&sc.model, cfg.perturb, &mut rng);
        sc.validate()?;
    }
    Ok(sc)
}

fn structure_map(sc: &ScenarioConfig) -> Result<StructureMap, RunError> {
    let h = build_qbm_hamiltonian(&sc.model)?;
    Ok(match sc.structure {
        StructureKind::Alternate => alternate_structure_with(&h, RelativeBasis::ParticleAnchored)?.map,
        StructureKind::AlternateJacobi => alternate_structure_with(&h, RelativeBasis::Jacobi)?.map,
        StructureKind::Identity => StructureMap::identity(h.n_modes()),
    })
}

/// Runs the scenario and returns the result table plus a short summary.
pub fn execute(cfg: &RunConfig) -> Result<(Table, String), RunError> {
    let sc = effective_scenario(cfg)?;
    info!(
        "scenario {} with {} bath modes, {} time points",
        cfg.scenario.name(),
        sc.model.n_bath(),
        sc.times.len()
    );
    let result = match cfg.scenario {
        Scenario::Pod => {
            let r = experiments::run_pod(&sc)?;
            let summary = format!(
                "pod: final purity_1 {:.6}, purity_Sp {:.6}; half-times {} / {}; recurrences {} / {}",
                r.purity_1.last().copied().unwrap_or(f64::NAN),
                r.purity_sp.last().copied().unwrap_or(f64::NAN),
                fmt_opt(r.half_time_1),
                fmt_opt(r.half_time_sp),
                r.recurrence_1,
                r.recurrence_sp,
            );
            (output::pod_table(&r), summary)
        }
        Scenario::Er => {
            let r = experiments::run_er_check(&sc)?;
            let hits = r.witnessed.iter().filter(|&&w| w).count();
            let summary = format!("er: witnessed at {hits} of {} instants", r.times.len());
            (output::er_table(&r), summary)
        }
        Scenario::Exclusivity => {
            let r = experiments::run_exclusivity(&sc)?;
            let summary = format!("exclusivity: flagged fraction {:.4}", r.flagged_fraction);
            (output::exclusivity_table(&r), summary)
        }
        Scenario::Marginal => {
            let reports = sc
                .times
                .iter()
                .map(|&t| experiments::marginal_incompatibility(&sc, t))
                .collect::<qbm_core::Result<Vec<_>>>()?;
            let worst = reports.iter().map(|r| r.l1_distance).fold(0.0, f64::max);
            let summary = format!("marginal: largest L1 distance {worst:.6}");
            (output::marginal_table(&reports), summary)
        }
        Scenario::OracleCompare => {
            let settings = cfg
                .oracle
                .as_ref()
                .ok_or_else(|| RunError::Io("oracle settings missing".into()))?;
            let r = experiments::oracle_compare(&sc, settings)?;
            let summary = format!(
                "oracle-compare: max |Δ| {:.3e}, cutoff convergence {:.3e} ({:?} → {:?})",
                r.max_abs_diff(),
                r.max_convergence(),
                r.cutoffs,
                r.converged_cutoffs
            );
            (output::oracle_table(&r), summary)
        }
    };
    if let Some(path) = &cfg.map_output {
        let map = structure_map(&sc)?;
        fs::write(path, map.to_text()).map_err(|e| RunError::Io(format!("{path}: {e}")))?;
    }
    Ok(result)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |t| format!("{t:.4}"))
}

/// Executes `cfg`, writes the CSV and prints the summary.
pub fn run(cfg: &RunConfig) -> Result<(), RunError> {
    let (table, summary) = execute(cfg)?;
    let csv = table.to_csv()?;
    match &cfg.output {
        Some(path) => {
            fs::write(path, csv).map_err(|e| RunError::Io(format!("{path}: {e}")))?;
            println!("{summary}");
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(csv.as_bytes())
                .map_err(|e| RunError::Io(e.to_string()))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// Sizes the global thread pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> Result<(), RunError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| RunError::Io(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Io(e.to_string()))
}
