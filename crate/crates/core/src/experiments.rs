//! Scenario runners comparing the particle + bath structure `1 + 2` with the
//! alternate structure `S' + E'` along one global evolution.
//!
//! Every run evolves the global state once, in the original coordinates. The
//! `S'` side is obtained by pushing the same state through the structure map.
//! Purifying ancillas, when present, are appended after the physical modes and
//! are counted on the environment side of both structures.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, FockState};
use crate::gaussian::{
    self, coherent_state, condition_on, decoherence_factor, log_negativity, purity, reduce,
    CatState, Evolve, GaussianState,
};
use crate::model::{build_qbm_hamiltonian, ModelParams, Potential, QuadraticHamiltonian};
use crate::structure::{alternate_structure_with, RelativeBasis, StructureMap};

/// `E_N` above which an instant counts as excluding an alternate branching.
pub const EXCLUSIVITY_THRESHOLD: f64 = 1e-3;
/// `E_N` below which a state counts as a product in the witness test.
pub const PRODUCT_THRESHOLD: f64 = 1e-8;
/// Purity rise after a minimum that counts as a recurrence.
pub const RECURRENCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParticleState {
    Coherent,
    /// Equal-weight superposition of two coherent states at `x ± separation / 2`.
    Cat { separation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub kind: ParticleState,
    pub x: f64,
    pub p: f64,
    /// Frequency fixing the coherent-state width together with `m1`.
    pub width_omega: f64,
    pub temperature: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            kind: ParticleState::Coherent,
            x: 1.0,
            p: 0.0,
            width_omega: 1.0,
            temperature: 0.0,
        }
    }
}

/// Which map defines the alternate structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StructureKind {
    /// Center of mass + relative coordinates, then normal modes.
    #[default]
    Alternate,
    AlternateJacobi,
    /// The alternate structure coincides with `1 + 2`.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    pub initial: InitialState,
    pub times: Vec<f64>,
    pub purified: bool,
    pub structure: StructureKind,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let init = &self.initial;
        for (field, v) in [("initial.x", init.x), ("initial.p", init.p)] {
            if !v.is_finite() {
                return Err(Error::domain(field, "must be finite"));
            }
        }
        if !(init.width_omega > 0.0 && init.width_omega.is_finite()) {
            return Err(Error::domain("initial.width_omega", "must be positive"));
        }
        if !(init.temperature >= 0.0 && init.temperature.is_finite()) {
            return Err(Error::domain("initial.temperature", "must be non-negative"));
        }
        if let ParticleState::Cat { separation } = init.kind {
            if !(separation > 0.0 && separation.is_finite()) {
                return Err(Error::domain("initial.separation", "must be positive"));
            }
        }
        match self.times.first() {
            None => return Err(Error::domain("times", "grid is empty")),
            Some(&t0) if t0 != 0.0 => return Err(Error::domain("times", "grid must start at 0")),
            _ => {}
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("times", "must be finite"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("times", "must be strictly increasing"));
        }
        Ok(())
    }

    pub fn is_globally_pure(&self) -> bool {
        self.initial.temperature == 0.0 || self.purified
    }
}

/// `n` evenly spaced instants from 0 to `t_max` inclusive.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Multiplies every mass, frequency and coupling by an independent factor in
/// `[1 − spread, 1 + spread]` to break accidental symmetries.
pub fn perturb_generic<R: Rng + ?Sized>(params: &ModelParams, spread: f64, rng: &mut R) -> ModelParams {
    let mut factor = || 1.0 + spread * rng.random_range(-1.0..=1.0);
    let mut out = params.clone();
    out.m1 *= factor();
    if let Potential::Harmonic { omega } = &mut out.potential {
        *omega *= factor();
    }
    for mode in &mut out.bath {
        mode.mass *= factor();
        mode.omega *= factor();
        mode.coupling *= factor();
    }
    out
}

/// Everything a run needs: the Hamiltonian on all modes, the structure map
/// lift and the initial global state (base coherent branch).
struct Universe {
    n_phys: usize,
    n_total: usize,
    hamiltonian: QuadraticHamiltonian,
    lift: DMatrix<f64>,
    initial: GaussianState,
    /// Phase-space offset between the two cat branches, if any.
    cat_offset: Option<DVector<f64>>,
}

impl Universe {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let h = build_qbm_hamiltonian(&cfg.model)?;
        let n_phys = h.n_modes();
        let map = match cfg.structure {
            StructureKind::Alternate => alternate_structure_with(&h, RelativeBasis::ParticleAnchored)?.map,
            StructureKind::AlternateJacobi => alternate_structure_with(&h, RelativeBasis::Jacobi)?.map,
            StructureKind::Identity => StructureMap::identity(n_phys),
        };
        let init = &cfg.initial;
        let particle = coherent_state(1, 0, init.x, init.p, cfg.model.m1, init.width_omega)?;
        let bath_modes: Vec<(f64, f64)> = cfg.model.bath.iter().map(|b| (b.mass, b.omega)).collect();
        let bath = gaussian::thermal_state(&bath_modes, init.temperature)?;
        let mut state = particle.tensor(&bath);
        let mut hamiltonian = h;
        let mut map = map;
        if cfg.purified {
            state = gaussian::purify(&state)?;
            hamiltonian = hamiltonian.with_inert_modes(n_phys);
            map = map.with_spectator_modes(n_phys);
        }
        let n_total = state.n_modes();
        let cat_offset = match init.kind {
            ParticleState::Coherent => None,
            ParticleState::Cat { separation } => {
                let mut d = DVector::zeros(2 * n_total);
                d[0] = separation;
                Some(d)
            }
        };
        let lift = map.lift();
        Ok(Self {
            n_phys,
            n_total,
            hamiltonian,
            lift,
            initial: state,
            cat_offset,
        })
    }

    fn environment(&self) -> Vec<usize> {
        (1..self.n_total).collect()
    }

    fn propagators(&self, times: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        times
            .par_iter()
            .map(|&t| gaussian::propagator(&self.hamiltonian, t))
            .collect()
    }

    fn cat(&self) -> Result<Option<CatState>> {
        self.cat_offset
            .as_ref()
            .map(|d| CatState::two_branch(&self.initial, d))
            .transpose()
    }
}

/// Per-instant observables in both structures for one global state.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Snapshot {
    purity_1: f64,
    purity_sp: f64,
    neg_12: f64,
    neg_spep: f64,
    coherence_1: Option<f64>,
    coherence_sp: Option<f64>,
}

fn snapshot(u: &Universe, s: &DMatrix<f64>, need_negativity: bool) -> Result<Snapshot> {
    let state = u.initial.evolve(s)?;
    let alt = state.evolve(&u.lift)?;
    let (neg_12, neg_spep) = if need_negativity {
        (log_negativity(&state, &[0])?, log_negativity(&alt, &[0])?)
    } else {
        (0.0, 0.0)
    };
    let (coherence_1, coherence_sp) = match u.cat()? {
        None => (None, None),
        Some(cat) => {
            let env = u.environment();
            let cat_t = cat.evolve(s)?;
            let cat_alt = cat_t.evolve(&u.lift)?;
            (
                Some(decoherence_factor(&cat_t, &env)?),
                Some(decoherence_factor(&cat_alt, &env)?),
            )
        }
    };
    Ok(Snapshot {
        purity_1: purity(&reduce(&state, &[0])?)?,
        purity_sp: purity(&reduce(&alt, &[0])?)?,
        neg_12,
        neg_spep,
        coherence_1,
        coherence_sp,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PodReport {
    pub times: Vec<f64>,
    pub purity_1: Vec<f64>,
    pub purity_sp: Vec<f64>,
    pub neg_12: Vec<f64>,
    pub neg_spep: Vec<f64>,
    /// Branch decoherence factors, present for cat initial states.
    pub coherence_1: Option<Vec<f64>>,
    pub coherence_sp: Option<Vec<f64>>,
    pub half_time_1: Option<f64>,
    pub half_time_sp: Option<f64>,
    /// Purity rises again by more than [`RECURRENCE_TOL`] after a minimum.
    pub recurrence_1: bool,
    pub recurrence_sp: bool,
}

/// Purity and entanglement of the particle and of `S'` along one evolution.
pub fn run_pod(cfg: &ScenarioConfig) -> Result<PodReport> {
    let u = Universe::new(cfg)?;
    let props = u.propagators(&cfg.times)?;
    let snaps: Vec<Snapshot> = props
        .par_iter()
        .map(|s| snapshot(&u, s, true))
        .collect::<Result<_>>()?;
    let col = |f: fn(&Snapshot) -> f64| snaps.iter().map(f).collect::<Vec<f64>>();
    let purity_1 = col(|s| s.purity_1);
    let purity_sp = col(|s| s.purity_sp);
    let opt_col = |f: fn(&Snapshot) -> Option<f64>| snaps.iter().map(f).collect::<Option<Vec<f64>>>();
    Ok(PodReport {
        half_time_1: half_time(&cfg.times, &purity_1),
        half_time_sp: half_time(&cfg.times, &purity_sp),
        recurrence_1: has_recurrence(&purity_1),
        recurrence_sp: has_recurrence(&purity_sp),
        times: cfg.times.clone(),
        neg_12: col(|s| s.neg_12),
        neg_spep: col(|s| s.neg_spep),
        coherence_1: opt_col(|s| s.coherence_1),
        coherence_sp: opt_col(|s| s.coherence_sp),
        purity_1,
        purity_sp,
    })
}

/// Mean of the last 20% of the samples (at least one).
pub fn plateau(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let tail = (values.len() / 5).max(1);
    let slice = &values[values.len() - tail..];
    Some(slice.iter().sum::<f64>() / slice.len() as f64)
}

/// First time the series falls below the midpoint between its initial value
/// and its plateau, linearly interpolated. `None` if it never decays.
pub fn half_time(times: &[f64], values: &[f64]) -> Option<f64> {
    let start = *values.first()?;
    let end = plateau(values)?;
    if !(start - end > 1e-12) {
        return None;
    }
    let level = 0.5 * (start + end);
    (1..values.len()).find(|&i| values[i] < level).map(|i| {
        let (t0, t1, v0, v1) = (times[i - 1], times[i], values[i - 1], values[i]);
        t0 + (t1 - t0) * (v0 - level) / (v0 - v1)
    })
}

pub fn has_recurrence(values: &[f64]) -> bool {
    let mut low = f64::INFINITY;
    values.iter().any(|&v| {
        low = low.min(v);
        v - low > RECURRENCE_TOL
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErReport {
    pub times: Vec<f64>,
    pub neg_12: Vec<f64>,
    pub neg_spep: Vec<f64>,
    /// One structure sees a product while the other sees entanglement.
    pub witnessed: Vec<bool>,
}

pub fn er_witnessed(a: f64, b: f64) -> bool {
    (a < PRODUCT_THRESHOLD && b > EXCLUSIVITY_THRESHOLD) || (b < PRODUCT_THRESHOLD && a > EXCLUSIVITY_THRESHOLD)
}

/// Entanglement of the same global state across `1|2` and across `S'|E'`.
pub fn run_er_check(cfg: &ScenarioConfig) -> Result<ErReport> {
    require_pure_global(cfg)?;
    let u = Universe::new(cfg)?;
    let props = u.propagators(&cfg.times)?;
    let pairs: Vec<(f64, f64)> = props
        .par_iter()
        .map(|s| {
            let state = u.initial.evolve(s)?;
            let alt = state.evolve(&u.lift)?;
            Ok((log_negativity(&state, &[0])?, log_negativity(&alt, &[0])?))
        })
        .collect::<Result<_>>()?;
    Ok(ErReport {
        times: cfg.times.clone(),
        witnessed: pairs.iter().map(|&(a, b)| er_witnessed(a, b)).collect(),
        neg_12: pairs.iter().map(|p| p.0).collect(),
        neg_spep: pairs.iter().map(|p| p.1).collect(),
    })
}

fn require_pure_global(cfg: &ScenarioConfig) -> Result<()> {
    if cfg.is_globally_pure() {
        Ok(())
    } else {
        Err(Error::State(
            "global state is mixed; set temperature to 0 or enable purification".into(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusivityReport {
    pub times: Vec<f64>,
    /// `E_N(S'|E')` of the branch proxy.
    pub neg_spep: Vec<f64>,
    pub excluding: Vec<bool>,
    pub flagged_fraction: f64,
}

/// The branch proxy at one instant: the particle in a coherent state at its
/// current mean, times the environment state conditioned on it.
pub fn branch_proxy(state: &GaussianState, pointer: &GaussianState) -> Result<GaussianState> {
    let env = condition_on(state, &[0], pointer)?;
    Ok(pointer.tensor(&env))
}

/// Whether each instantaneous `1 + 2` branch is entangled across `S'|E'`.
pub fn run_exclusivity(cfg: &ScenarioConfig) -> Result<ExclusivityReport> {
    require_pure_global(cfg)?;
    if cfg.initial.kind != ParticleState::Coherent {
        return Err(Error::State("exclusivity needs a coherent initial particle state".into()));
    }
    let u = Universe::new(cfg)?;
    let props = u.propagators(&cfg.times)?;
    let (m1, w) = (cfg.model.m1, cfg.initial.width_omega);
    let neg_spep: Vec<f64> = props
        .par_iter()
        .map(|s| {
            let state = u.initial.evolve(s)?;
            let (x, p) = (state.mean()[0], state.mean()[u.n_total]);
            let pointer = coherent_state(1, 0, x, p, m1, w)?;
            let proxy = branch_proxy(&state, &pointer)?;
            log_negativity(&proxy.evolve(&u.lift)?, &[0])
        })
        .collect::<Result<_>>()?;
    let excluding: Vec<bool> = neg_spep.iter().map(|&e| e > EXCLUSIVITY_THRESHOLD).collect();
    let flagged_fraction = excluding.iter().filter(|&&e| e).count() as f64 / excluding.len() as f64;
    Ok(ExclusivityReport {
        times: cfg.times.clone(),
        neg_spep,
        excluding,
        flagged_fraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncompatibilityReport {
    pub t: f64,
    /// `(mean, variance)` of the position density of `S'`.
    pub true_density: (f64, f64),
    /// The particle position density read as if it were the density of `S'`.
    pub relabeled_density: (f64, f64),
    pub l1_distance: f64,
}

/// Compares the true position density of `S'` with the particle's density
/// relabeled as a density of `S'`.
pub fn marginal_incompatibility(cfg: &ScenarioConfig, t: f64) -> Result<IncompatibilityReport> {
    if !t.is_finite() {
        return Err(Error::domain("t", "must be finite"));
    }
    let u = Universe::new(cfg)?;
    let s = gaussian::propagator(&u.hamiltonian, t)?;
    let state = u.initial.evolve(&s)?;
    let alt = state.evolve(&u.lift)?;
    let true_density = alt.position_marginal(0)?;
    let relabeled_density = state.position_marginal(0)?;
    Ok(IncompatibilityReport {
        t,
        true_density,
        relabeled_density,
        l1_distance: gaussian_l1_distance(true_density, relabeled_density),
    })
}

fn normal_cdf(x: f64, (mean, var): (f64, f64)) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-(x - mean) / (2.0 * var).sqrt())
    }
}

/// `∫ |p − q| dx` for one-dimensional normal densities given as `(mean, variance)`.
///
/// The densities cross at most twice; between crossings the sign of `p − q`
/// is fixed, so the integral is a sum of CDF differences.
pub fn gaussian_l1_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    if p == q {
        return 0.0;
    }
    let ((m1, v1), (m2, v2)) = (p, q);
    // log p − log q = a x² + b x + c
    let a = 0.5 / v2 - 0.5 / v1;
    let b = m1 / v1 - m2 / v2;
    let c = 0.5 * m2 * m2 / v2 - 0.5 * m1 * m1 / v1 + 0.5 * (v2 / v1).ln();
    let mut roots = Vec::with_capacity(2);
    if a.abs() <= 1e-14 * (0.5 / v1).max(0.5 / v2) {
        if b != 0.0 {
            roots.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let h = -0.5 * (b + b.signum() * sq);
            if h != 0.0 {
                roots.push(h / a);
                roots.push(c / h);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.retain(|r| r.is_finite());
    roots.sort_by(f64::total_cmp);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(roots);
    edges.push(f64::INFINITY);
    edges
        .windows(2)
        .map(|w| {
            let dp = normal_cdf(w[1], p) - normal_cdf(w[0], p);
            let dq = normal_cdf(w[1], q) - normal_cdf(w[0], q);
            (dp - dq).abs()
        })
        .sum()
}

/// Brute-force cross-check settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    /// Basis states per mode for the primary comparison.
    pub cutoffs: Vec<usize>,
    /// Added to every cutoff for the convergence run.
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub t: f64,
    pub purity_gauss: f64,
    pub purity_fock: f64,
    /// Largest particle mean/covariance discrepancy.
    pub moments_diff: f64,
    pub coherence_gauss: Option<f64>,
    pub coherence_fock: Option<f64>,
    /// Largest discrepancy over all compared quantities.
    pub max_abs_diff: f64,
    /// Largest change of the brute-force values when the cutoffs grow by `step`.
    pub convergence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub cutoffs: Vec<usize>,
    pub converged_cutoffs: Vec<usize>,
}

impl OracleReport {
    pub fn max_abs_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max)
    }

    pub fn max_convergence(&self) -> f64 {
        self.rows.iter().map(|r| r.convergence).fold(0.0, f64::max)
    }
}

struct FockValues {
    purity: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    coherence: Option<f64>,
}

struct FockRun {
    space: FockSpace,
    prop: fock::SpectralPropagator,
    base: FockState,
    branches: Option<(FockState, FockState)>,
}

impl FockRun {
    fn new(cfg: &ScenarioConfig, u: &Universe, cutoffs: &[usize]) -> Result<Self> {
        let particle_omega = match cfg.model.potential {
            Potential::Harmonic { omega } => omega,
            Potential::Free => cfg.initial.width_omega,
        };
        let oscillators: Vec<(f64, f64)> = std::iter::once((cfg.model.m1, particle_omega))
            .chain(cfg.model.bath.iter().map(|b| (b.mass, b.omega)))
            .collect();
        let space = FockSpace::for_oscillators(cutoffs.to_vec(), &oscillators)?;
        let prop = fock::build_fock_hamiltonian(&cfg.model, &space)?.diagonalize();
        let base = fock::gaussian_to_fock(&u.initial, &space)?;
        let branches = match u.cat()? {
            None => None,
            Some(cat) => Some((
                fock::gaussian_to_fock(&cat.branch_state(0), &space)?,
                fock::gaussian_to_fock(&cat.branch_state(1), &space)?,
            )),
        };
        Ok(Self {
            space,
            prop,
            base,
            branches,
        })
    }

    fn at(&self, t: f64) -> Result<FockValues> {
        let psi = fock::evolve_dense(&self.base, &self.prop, t)?;
        let rho = fock::reduced_density(&psi, &self.space, &[0])?;
        let (mean, cov) = fock::moments(&psi, &self.space, &[0])?;
        let coherence = match &self.branches {
            None => None,
            Some((b1, b2)) => {
                let b1 = fock::evolve_dense(b1, &self.prop, t)?;
                let b2 = fock::evolve_dense(b2, &self.prop, t)?;
                Some(fock::dense_decoherence_factor(&b1, &b2, &self.space, 0)?)
            }
        };
        Ok(FockValues {
            purity: fock::density_purity(&rho),
            mean,
            cov,
            coherence,
        })
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fock_values_diff(a: &FockValues, b: &FockValues) -> f64 {
    let mut d = (a.purity - b.purity).abs();
    d = d.max(max_diff(a.mean.as_slice(), b.mean.as_slice()));
    d = d.max(max_diff(a.cov.as_slice(), b.cov.as_slice()));
    if let (Some(x), Some(y)) = (a.coherence, b.coherence) {
        d = d.max((x - y).abs());
    }
    d
}

/// Gaussian results against a truncated Fock-space computation of the same
/// run, with a second, larger truncation to certify convergence.
///
/// Requires a pure bath at zero temperature and no purification.
pub fn oracle_compare(cfg: &ScenarioConfig, settings: &OracleSettings) -> Result<OracleReport> {
    if cfg.initial.temperature != 0.0 || cfg.purified {
        return Err(Error::domain(
            "initial.temperature",
            "the brute-force comparison needs a zero-temperature, unpurified run",
        ));
    }
    let u = Universe::new(cfg)?;
    if settings.cutoffs.len() != u.n_phys {
        return Err(Error::Dimension {
            expected: u.n_phys,
            found: settings.cutoffs.len(),
        });
    }
    let larger: Vec<usize> = settings.cutoffs.iter().map(|c| c + settings.step).collect();
    let coarse = FockRun::new(cfg, &u, &settings.cutoffs)?;
    let fine = FockRun::new(cfg, &u, &larger)?;
    let props = u.propagators(&cfg.times)?;
    let rows = cfg
        .times
        .par_iter()
        .zip(props.par_iter())
        .map(|(&t, s)| {
            let snap = snapshot(&u, s, false)?;
            let state = u.initial.evolve(s)?;
            let particle = reduce(&state, &[0])?;
            let f = coarse.at(t)?;
            let g = fine.at(t)?;
            let moments_diff = max_diff(particle.mean().as_slice(), f.mean.as_slice())
                .max(max_diff(particle.cov().as_slice(), f.cov.as_slice()));
            let mut max_abs_diff = (snap.purity_1 - f.purity).abs().max(moments_diff);
            if let (Some(x), Some(y)) = (snap.coherence_1, f.coherence) {
                max_abs_diff = max_abs_diff.max((x - y).abs());
            }
            Ok(OracleRow {
                t,
                purity_gauss: snap.purity_1,
                purity_fock: f.purity,
                moments_diff,
                coherence_gauss: snap.coherence_1,
                coherence_fock: f.coherence,
                max_abs_diff,
                convergence: fock_values_diff(&f, &g),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        rows,
        cutoffs: settings.cutoffs.clone(),
        converged_cutoffs: larger,
    })
}
