//! QLIF traces `T_d(t) = S_full(t) − S_frozen(t)` from paired evolutions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::ed::{self, DenseEigensystem, StateVector, DEFAULT_ED_CAP};
use crate::error::{Error, Result};
use crate::mps::{self, DmrgConfig, MpsState, TebdConfig};
use crate::spin_model::{build_frozen_hamiltonian, build_hamiltonian, HamiltonianSpec, Spin};

/// `|T_d|` values below this are flagged as roundoff.
pub const NOISE_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Neel,
    AllUp,
    Product(Vec<Spin>),
    /// Ground state of the given Hamiltonian: dense diagonalization on the
    /// ED engine, DMRG on the MPS engine.
    GroundState(HamiltonianSpec),
    Dense(StateVector),
}

impl InitialState {
    pub fn label(&self) -> String {
        match self {
            InitialState::Neel => "neel".into(),
            InitialState::AllUp => "all-up".into(),
            InitialState::Product(spins) => {
                let s: String = spins.iter().map(|s| if *s == Spin::Up { 'u' } else { 'd' }).collect();
                format!("product:{s}")
            }
            InitialState::GroundState(spec) => format!(
                "ground(J={}, B={}, hz={})",
                spec.coupling, spec.transverse, spec.longitudinal
            ),
            InitialState::Dense(_) => "dense".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum Engine {
    Ed,
    Mps(TebdConfig),
}

/// Uniform measurement grid `0, step, 2·step, …` up to `t_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub step: f64,
    pub t_max: f64,
}

impl TimeGrid {
    pub fn new(step: f64, t_max: f64) -> Self {
        Self { step, t_max }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidRequest(format!("time step {} must be > 0", self.step)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidRequest(format!("t_max {} must be >= 0", self.t_max)));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        (self.t_max / self.step + 1e-9).floor() as usize + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points()).map(|k| k as f64 * self.step).collect()
    }

    /// Number of TEBD steps per grid step.
    fn stride(&self, dt: f64) -> Result<usize> {
        let ratio = self.step / dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidRequest(format!(
                "measurement step {} is not a positive multiple of dt = {dt}",
                self.step
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QlifRequest {
    pub spec: HamiltonianSpec,
    pub frozen_site: usize,
    pub obs_site: usize,
    pub initial: InitialState,
    pub engine: Engine,
    pub grid: TimeGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapRequest {
    pub spec: HamiltonianSpec,
    pub frozen_site: usize,
    pub obs_sites: Vec<usize>,
    pub initial: InitialState,
    pub engine: Engine,
    pub grid: TimeGrid,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DmrgSummary {
    pub energy: f64,
    pub converged: bool,
    pub sweeps: usize,
    pub seed: u64,
    pub truncation_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub engine: String,
    pub chi: Option<usize>,
    pub dt: Option<f64>,
    pub initial_state: String,
    /// Cumulative discarded weight of the full and frozen branches.
    pub truncation_error_full: f64,
    pub truncation_error_frozen: f64,
    pub max_bond_full: Option<usize>,
    pub max_bond_frozen: Option<usize>,
    pub dmrg: Option<DmrgSummary>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QlifTrace {
    pub frozen_site: usize,
    pub obs_site: usize,
    pub times: Vec<f64>,
    pub t_d: Vec<f64>,
    pub s_full: Vec<f64>,
    pub s_frozen: Vec<f64>,
    pub integral: Vec<f64>,
    pub below_floor: Vec<bool>,
    pub metadata: TraceMetadata,
}

impl QlifTrace {
    pub fn distance(&self) -> usize {
        self.obs_site.abs_diff(self.frozen_site)
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.t_d.iter().map(|v| v.abs()).collect()
    }

    fn assemble(
        frozen_site: usize,
        obs_site: usize,
        times: Vec<f64>,
        s_full: Vec<f64>,
        s_frozen: Vec<f64>,
        metadata: TraceMetadata,
    ) -> Self {
        let t_d: Vec<f64> = s_full.iter().zip(&s_frozen).map(|(a, b)| a - b).collect();
        let integral = trapezoid(&times, &t_d);
        let below_floor = t_d.iter().map(|v| v.abs() < NOISE_FLOOR).collect();
        Self {
            frozen_site,
            obs_site,
            times,
            t_d,
            s_full,
            s_frozen,
            integral,
            below_floor,
            metadata,
        }
    }
}

/// Rows of `|T_d(t)|` for several observation sites sharing one trajectory pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QlifHeatmap {
    pub frozen_site: usize,
    pub times: Vec<f64>,
    /// Ordered by increasing distance, then by site.
    pub rows: Vec<QlifTrace>,
}

impl QlifHeatmap {
    pub fn distances(&self) -> Vec<usize> {
        self.rows.iter().map(QlifTrace::distance).collect()
    }

    /// `|T_d(t)|` indexed `[row][time]`.
    pub fn magnitudes(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(QlifTrace::magnitude).collect()
    }
}

/// Running trapezoid integral with `I(0) = 0`.
pub fn trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for k in 0..values.len() {
        if k > 0 {
            acc += 0.5 * (values[k] + values[k - 1]) * (times[k] - times[k - 1]);
        }
        out.push(acc);
    }
    out
}

pub fn time_integral(trace: &QlifTrace) -> Vec<f64> {
    trapezoid(&trace.times, &trace.t_d)
}

type CacheKey = ([u64; 4], Option<usize>);

/// Dense eigensystems of full and frozen Hamiltonians, built on first use
/// and shared between requests.
#[derive(Debug)]
pub struct EdSolver {
    cap: usize,
    cache: Mutex<HashMap<CacheKey, Arc<DenseEigensystem>>>,
}

impl Default for EdSolver {
    fn default() -> Self {
        Self::new(DEFAULT_ED_CAP)
    }
}

impl EdSolver {
    pub fn new(cap: usize) -> Self {
        Self {
            cap,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Eigensystem of `H(spec)`, or of its frozen variant when `frozen` is set.
    pub fn eigensystem(&self, spec: &HamiltonianSpec, frozen: Option<usize>) -> Result<Arc<DenseEigensystem>> {
        spec.validate()?;
        ed::check_capacity(spec.sites, self.cap)?;
        let key = (
            [
                spec.sites as u64,
                spec.coupling.to_bits(),
                spec.transverse.to_bits(),
                spec.longitudinal.to_bits(),
            ],
            frozen,
        );
        if let Some(hit) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let op = match frozen {
            Some(site) => build_frozen_hamiltonian(spec, site)?,
            None => build_hamiltonian(spec)?,
        };
        let eig = Arc::new(DenseEigensystem::with_cap(&op, self.cap)?);
        self.cache
            .lock()
            .expect("cache poisoned")
            .entry(key)
            .or_insert_with(|| eig.clone());
        Ok(eig)
    }

    fn initial_state(&self, sites: usize, initial: &InitialState) -> Result<StateVector> {
        Ok(match initial {
            InitialState::Neel => ed::neel_state(sites),
            InitialState::AllUp => StateVector::product(&vec![Spin::Up; sites]),
            InitialState::Product(spins) => {
                check_len(spins.len(), sites)?;
                StateVector::product(spins)
            }
            InitialState::GroundState(spec) => {
                check_len(spec.sites, sites)?;
                self.eigensystem(spec, None)?.ground_state().1
            }
            InitialState::Dense(psi) => {
                check_len(psi.sites(), sites)?;
                psi.clone()
            }
        })
    }

    fn entropies(&self, eig: &DenseEigensystem, psi0: &StateVector, times: &[f64], sites: &[usize]) -> Result<Vec<Vec<f64>>> {
        let states = eig.evolve(psi0, times)?;
        sites
            .iter()
            .map(|&s| {
                states
                    .iter()
                    .map(|psi| ed::von_neumann_entropy(&ed::reduce_single_site(psi, s)?))
                    .collect()
            })
            .collect()
    }
}

fn check_len(got: usize, sites: usize) -> Result<()> {
    if got != sites {
        return Err(Error::InvalidRequest(format!(
            "initial state has {got} sites, chain has {sites}"
        )));
    }
    Ok(())
}

fn validate_sites(spec: &HamiltonianSpec, frozen: usize, obs: &[usize]) -> Result<()> {
    spec.validate()?;
    spec.check_site(frozen)?;
    if obs.is_empty() {
        return Err(Error::InvalidRequest("no observation sites given".into()));
    }
    for &o in obs {
        spec.check_site(o)?;
        if o == frozen {
            return Err(Error::InvalidRequest(format!(
                "observation site {o} coincides with the frozen site"
            )));
        }
    }
    Ok(())
}

struct PairRun {
    times: Vec<f64>,
    /// `[site][time]`
    s_full: Vec<Vec<f64>>,
    s_frozen: Vec<Vec<f64>>,
    metadata: TraceMetadata,
}

fn run_pair(
    solver: &EdSolver,
    spec: &HamiltonianSpec,
    frozen: usize,
    obs: &[usize],
    initial: &InitialState,
    engine: &Engine,
    grid: &TimeGrid,
) -> Result<PairRun> {
    validate_sites(spec, frozen, obs)?;
    grid.validate()?;
    let label = initial.label();
    match engine {
        Engine::Ed => {
            let times = grid.times();
            let psi0 = solver.initial_state(spec.sites, initial)?;
            let full = solver.eigensystem(spec, None)?;
            let frz = solver.eigensystem(spec, Some(frozen))?;
            Ok(PairRun {
                s_full: solver.entropies(&full, &psi0, &times, obs)?,
                s_frozen: solver.entropies(&frz, &psi0, &times, obs)?,
                times,
                metadata: TraceMetadata {
                    engine: "ed".into(),
                    chi: None,
                    dt: None,
                    initial_state: label,
                    truncation_error_full: 0.0,
                    truncation_error_frozen: 0.0,
                    max_bond_full: None,
                    max_bond_frozen: None,
                    dmrg: None,
                    warnings: Vec::new(),
                },
            })
        }
        Engine::Mps(cfg) => {
            let mut cfg = *cfg;
            cfg.validate()?;
            cfg.measure_stride = grid.stride(cfg.dt)?;
            let t_end = (grid.points() - 1) as f64 * grid.step;
            let (psi0, dmrg) = mps_initial_state(spec.sites, initial, cfg.chi)?;
            let h_full = build_hamiltonian(spec)?;
            let h_frozen = build_frozen_hamiltonian(spec, frozen)?;
            let (full, frz) = std::thread::scope(|scope| {
                let psi = psi0.clone();
                let handle = scope.spawn(|| mps::tebd_evolve(&h_frozen, psi, &cfg, t_end, obs));
                let full = mps::tebd_evolve(&h_full, psi0, &cfg, t_end, obs);
                (full, handle.join().expect("frozen branch panicked"))
            });
            let (full, frz) = (full?, frz?);
            let entropies = |run: &mps::TebdRun| -> Vec<Vec<f64>> {
                (0..obs.len())
                    .map(|k| run.records.iter().map(|r| mps::bloch_entropy(&r.bloch[k])).collect())
                    .collect()
            };
            let mut warnings = Vec::new();
            for (branch, run) in [("full", &full), ("frozen", &frz)] {
                for w in &run.warnings {
                    warnings.push(format!(
                        "{branch} branch: discarded weight {:.3e} at t = {} (max bond {})",
                        w.discarded, w.time, w.max_bond
                    ));
                }
            }
            Ok(PairRun {
                times: full.records.iter().map(|r| r.step as f64 * cfg.dt).collect(),
                s_full: entropies(&full),
                s_frozen: entropies(&frz),
                metadata: TraceMetadata {
                    engine: "mps".into(),
                    chi: Some(cfg.chi),
                    dt: Some(cfg.dt),
                    initial_state: label,
                    truncation_error_full: full.final_state.truncation_error(),
                    truncation_error_frozen: frz.final_state.truncation_error(),
                    max_bond_full: full.records.iter().map(|r| r.max_bond).max(),
                    max_bond_frozen: frz.records.iter().map(|r| r.max_bond).max(),
                    dmrg,
                    warnings,
                },
            })
        }
    }
}

fn mps_initial_state(sites: usize, initial: &InitialState, chi: usize) -> Result<(MpsState, Option<DmrgSummary>)> {
    Ok(match initial {
        InitialState::Neel => (MpsState::neel(sites)?, None),
        InitialState::AllUp => (MpsState::from_spins(&vec![Spin::Up; sites])?, None),
        InitialState::Product(spins) => {
            check_len(spins.len(), sites)?;
            (MpsState::from_spins(spins)?, None)
        }
        InitialState::GroundState(spec) => {
            check_len(spec.sites, sites)?;
            let cfg = DmrgConfig::new(chi);
            let res = mps::dmrg_with_config(&build_hamiltonian(spec)?, &cfg)?;
            let summary = DmrgSummary {
                energy: res.energy,
                converged: res.converged,
                sweeps: res.sweeps,
                seed: cfg.seed,
                truncation_error: res.truncation_error,
            };
            (res.state, Some(summary))
        }
        InitialState::Dense(psi) => {
            check_len(psi.sites(), sites)?;
            (MpsState::from_dense(psi)?, None)
        }
    })
}

pub fn qlif_trace(req: &QlifRequest) -> Result<QlifTrace> {
    qlif_trace_with(&EdSolver::default(), req)
}

pub fn qlif_trace_with(solver: &EdSolver, req: &QlifRequest) -> Result<QlifTrace> {
    let mut pair = run_pair(
        solver,
        &req.spec,
        req.frozen_site,
        &[req.obs_site],
        &req.initial,
        &req.engine,
        &req.grid,
    )?;
    Ok(QlifTrace::assemble(
        req.frozen_site,
        req.obs_site,
        pair.times,
        pair.s_full.swap_remove(0),
        pair.s_frozen.swap_remove(0),
        pair.metadata,
    ))
}

pub fn qlif_heatmap(req: &HeatmapRequest) -> Result<QlifHeatmap> {
    qlif_heatmap_with(&EdSolver::default(), req)
}

pub fn qlif_heatmap_with(solver: &EdSolver, req: &HeatmapRequest) -> Result<QlifHeatmap> {
    let mut obs = req.obs_sites.clone();
    obs.sort_by_key(|&s| (s.abs_diff(req.frozen_site), s));
    obs.dedup();
    let pair = run_pair(solver, &req.spec, req.frozen_site, &obs, &req.initial, &req.engine, &req.grid)?;
    let rows = obs
        .iter()
        .zip(pair.s_full)
        .zip(pair.s_frozen)
        .map(|((&site, full), frozen)| {
            QlifTrace::assemble(req.frozen_site, site, pair.times.clone(), full, frozen, pair.metadata.clone())
        })
        .collect();
    Ok(QlifHeatmap {
        frozen_site: req.frozen_site,
        times: pair.times,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_of_constant_and_sawtooth() {
        assert_eq!(trapezoid(&[0.0, 1.0, 2.0], &[3.0, 3.0, 3.0]), vec![0.0, 3.0, 6.0]);
        let times: Vec<f64> = (0..=4).map(f64::from).collect();
        let saw = [0.0, 1.0, 0.0, -1.0, 0.0];
        assert!(trapezoid(&times, &saw)[4].abs() < 1e-15);
    }

    #[test]
    fn grid_points_and_stride() {
        let g = TimeGrid::new(0.1, 1.0);
        assert_eq!(g.points(), 11);
        assert_eq!(g.stride(0.05).unwrap(), 2);
        assert!(g.stride(0.03).is_err());
        assert!(TimeGrid::new(0.0, 1.0).validate().is_err());
    }

    #[test]
    fn rejects_coincident_sites() {
        let req = QlifRequest {
            spec: HamiltonianSpec::chaotic(4),
            frozen_site: 1,
            obs_site: 1,
            initial: InitialState::Neel,
            engine: Engine::Ed,
            grid: TimeGrid::new(0.5, 1.0),
        };
        assert!(qlif_trace(&req).is_err());
    }

    #[test]
    fn trace_starts_at_zero() {
        let req = QlifRequest {
            spec: HamiltonianSpec::chaotic(5),
            frozen_site: 1,
            obs_site: 3,
            initial: InitialState::Neel,
            engine: Engine::Ed,
            grid: TimeGrid::new(0.25, 2.0),
        };
        let tr = qlif_trace(&req).unwrap();
        assert_eq!(tr.times.len(), 9);
        assert!(tr.t_d[0].abs() < 1e-12);
        assert_eq!(tr.integral[0], 0.0);
        assert!(tr.t_d.iter().any(|v| v.abs() > 1e-6));
    }
}
