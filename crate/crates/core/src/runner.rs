//! Executes an [`ExperimentConfig`] and writes CSVs, fit records and a manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, HeatmapData};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::io;
use crate::otoc;
use crate::qlif::{self, EdSolver, Engine, HeatmapRequest, InitialState, QlifRequest, QlifTrace};
use crate::spin_model::{velocity_table, HamiltonianSpec};

pub const OUTPUT_ROOT_ENV: &str = "QLIF_OUTPUT_ROOT";

/// Directory under which run directories are created (`.` by default).
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    /// SHA-256 of the config and code version; repeated in every CSV header.
    pub manifest_hash: String,
    pub wall_clock_seconds: f64,
    /// Largest cumulative discarded weight of any branch.
    pub truncation_error: f64,
    pub dmrg_seeds: Vec<u64>,
    pub warnings: Vec<String>,
    /// Informational messages that do not affect the exit status.
    pub notes: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    CompletedWithWarnings,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::CompletedWithWarnings => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn status(&self) -> RunStatus {
        if self.manifest.warnings.is_empty() {
            RunStatus::Ok
        } else {
            RunStatus::CompletedWithWarnings
        }
    }
}

pub fn manifest_hash(config: &ExperimentConfig) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).map_err(|e| crate::Error::Parse(e.to_string()))?);
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    Ok(format!("{:x}", h.finalize()))
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    dir: PathBuf,
    hash: String,
    solver: EdSolver,
    outputs: Vec<String>,
    warnings: Vec<String>,
    notes: Vec<String>,
    truncation: f64,
    seeds: Vec<u64>,
}

type Preamble = Vec<(String, String)>;

impl Ctx<'_> {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.outputs.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let f = self.create(name)?;
        serde_json::to_writer_pretty(f, value).map_err(|e| crate::Error::Parse(e.to_string()))
    }

    fn preamble(&self, label: &str, spec: &HamiltonianSpec, obs: &[usize]) -> Preamble {
        let cfg = self.config;
        let mut p: Preamble = vec![
            ("manifest_hash".into(), self.hash.clone()),
            ("kind".into(), cfg.kind.as_str().into()),
            ("label".into(), label.into()),
            ("L".into(), spec.sites.to_string()),
            ("J".into(), spec.coupling.to_string()),
            ("B".into(), spec.transverse.to_string()),
            ("hz".into(), spec.longitudinal.to_string()),
            ("frozen".into(), cfg.sites.frozen.to_string()),
            (
                "obs".into(),
                obs.iter().map(|o| (o + 1).to_string()).collect::<Vec<_>>().join(" "),
            ),
        ];
        match &cfg.engine {
            Engine::Ed => p.push(("engine".into(), "ed".into())),
            Engine::Mps(t) => {
                p.push(("engine".into(), "mps".into()));
                p.push(("chi".into(), t.chi.to_string()));
                p.push(("dt".into(), t.dt.to_string()));
            }
        }
        p
    }

    fn absorb(&mut self, trace: &QlifTrace) {
        let m = &trace.metadata;
        self.truncation = self
            .truncation
            .max(m.truncation_error_full)
            .max(m.truncation_error_frozen);
        self.warnings.extend(m.warnings.iter().cloned());
        if let Some(d) = &m.dmrg {
            if !self.seeds.contains(&d.seed) {
                self.seeds.push(d.seed);
            }
            if !d.converged {
                self.warnings.push(format!(
                    "DMRG did not converge within {} sweeps (E = {})",
                    d.sweeps, d.energy
                ));
            }
        }
    }

    fn trace(&mut self, spec: &HamiltonianSpec, obs: usize, initial: &InitialState) -> Result<QlifTrace> {
        let cfg = self.config;
        let trace = qlif::qlif_trace_with(
            &self.solver,
            &QlifRequest {
                spec: *spec,
                frozen_site: cfg.frozen_site(),
                obs_site: obs,
                initial: initial.clone(),
                engine: cfg.engine,
                grid: cfg.time,
            },
        )?;
        self.absorb(&trace);
        Ok(trace)
    }

    fn write_trace(&mut self, name: &str, trace: &QlifTrace, mut preamble: Preamble) -> Result<()> {
        preamble.push(("initial".into(), trace.metadata.initial_state.clone()));
        let f = self.create(name)?;
        io::write_trace_csv(f, trace, &preamble)
    }

    fn run_traces(&mut self) -> Result<()> {
        let cfg = self.config;
        let initial = cfg.initial_state()?;
        for (label, spec) in cfg.labelled_models() {
            for obs in cfg.obs_sites() {
                let trace = self.trace(&spec, obs, &initial)?;
                let stem = format!("{label}_o{}", obs + 1);
                let pre = self.preamble(label, &spec, &[obs]);
                self.write_trace(&format!("trace_{stem}.csv"), &trace, pre)?;
                let window = cfg
                    .analysis
                    .fit_window
                    .unwrap_or_else(|| analysis::default_fit_window(&velocity_table(&spec), trace.distance()));
                match analysis::powerlaw_fit(&trace.times, &trace.t_d, window, cfg.analysis.floor) {
                    Ok(fit) => self.write_json(&format!("fit_{stem}.json"), &fit)?,
                    Err(e) => self.notes.push(format!("power-law fit for {stem} skipped: {e}")),
                }
                if cfg.kind == ExperimentKind::Latetime {
                    let t_scr = velocity_table(&spec).t_scr(spec.sites);
                    match analysis::chaos_metric(&trace.times, &trace.integral, t_scr, cfg.analysis.chaos) {
                        Ok(v) => self.write_json(&format!("verdict_{stem}.json"), &v)?,
                        Err(e) => self.notes.push(format!("chaos verdict for {stem} skipped: {e}")),
                    }
                }
            }
        }
        Ok(())
    }

    fn run_heatmaps(&mut self) -> Result<()> {
        let cfg = self.config;
        let initial = cfg.initial_state()?;
        for (label, spec) in cfg.labelled_models() {
            let hm = qlif::qlif_heatmap_with(
                &self.solver,
                &HeatmapRequest {
                    spec,
                    frozen_site: cfg.frozen_site(),
                    obs_sites: cfg.obs_sites(),
                    initial: initial.clone(),
                    engine: cfg.engine,
                    grid: cfg.time,
                },
            )?;
            for row in &hm.rows {
                self.absorb(row);
            }
            let obs: Vec<usize> = hm.rows.iter().map(|r| r.obs_site).collect();
            let pre = self.preamble(label, &spec, &obs);
            let f = self.create(&format!("heatmap_{label}.csv"))?;
            io::write_heatmap_csv(f, &hm, &pre)?;
            let data = HeatmapData {
                times: hm.times.clone(),
                distances: hm.distances(),
                rows: hm.magnitudes(),
            };
            let th = cfg.analysis.front_threshold;
            match analysis::light_cone_velocity(&data, th) {
                Ok(fit) => {
                    let sensitivity = analysis::light_cone_sensitivity(&data, &[0.1 * th, th, 10.0 * th]);
                    self.write_json(
                        &format!("lightcone_{label}.json"),
                        &serde_json::json!({ "fit": fit, "threshold_sensitivity": sensitivity }),
                    )?;
                }
                Err(e) => self.notes.push(format!("light-cone fit for {label} skipped: {e}")),
            }
        }
        Ok(())
    }

    fn run_otoc(&mut self) -> Result<()> {
        let cfg = self.config;
        let times = cfg.time.times();
        let trace = otoc::otoc_multidistance_with(&self.solver, &cfg.model, cfg.frozen_site(), &cfg.obs_sites(), &times)?;
        let pre = self.preamble("model", &cfg.model, &cfg.obs_sites());
        let f = self.create("otoc.csv")?;
        io::write_otoc_csv(f, &trace, &pre)?;
        match otoc::butterfly_velocity(&trace, cfg.analysis.otoc_threshold) {
            Ok(fit) => {
                self.warnings.extend(fit.warnings.iter().cloned());
                self.write_json("butterfly.json", &fit)?;
            }
            Err(e) => self.notes.push(format!("butterfly-velocity fit skipped: {e}")),
        }
        Ok(())
    }

    fn run_suite(&mut self) -> Result<()> {
        let cfg = self.config;
        let chaotic = cfg.model;
        let integrable = cfg.model.with_longitudinal(0.0);
        let protocols = [
            ("N", InitialState::Neel, chaotic),
            ("A", InitialState::GroundState(integrable), integrable),
            ("B", InitialState::GroundState(integrable), chaotic),
            ("C", InitialState::GroundState(chaotic), chaotic),
        ];
        let mut summary = Vec::new();
        for (label, initial, spec) in protocols {
            for obs in cfg.obs_sites() {
                let trace = self.trace(&spec, obs, &initial)?;
                let mut pre = self.preamble(label, &spec, &[obs]);
                pre.push(("protocol".into(), label.into()));
                self.write_trace(&format!("suite_{label}_o{}.csv", obs + 1), &trace, pre)?;
                let peak = trace.t_d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                summary.push(serde_json::json!({
                    "protocol": label,
                    "obs": obs + 1,
                    "initial": trace.metadata.initial_state,
                    "evolution": { "J": spec.coupling, "B": spec.transverse, "hz": spec.longitudinal },
                    "peak_abs_T_d": peak,
                }));
            }
        }
        self.write_json("suite_summary.json", &summary)
    }
}

/// Runs `config` in a directory under [`output_root`].
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    run_in(config, &output_root())
}

/// Runs `config` in `root/<output_dir or name>`.
pub fn run_in(config: &ExperimentConfig, root: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let start = Instant::now();
    let dir = root.join(config.output_dir.as_deref().unwrap_or(&config.name));
    fs::create_dir_all(&dir)?;
    let mut ctx = Ctx {
        config,
        dir: dir.clone(),
        hash: manifest_hash(config)?,
        solver: EdSolver::default(),
        outputs: Vec::new(),
        warnings: Vec::new(),
        notes: Vec::new(),
        truncation: 0.0,
        seeds: Vec::new(),
    };
    match config.kind {
        ExperimentKind::QlifTrace | ExperimentKind::Latetime => ctx.run_traces()?,
        ExperimentKind::QlifHeatmap => ctx.run_heatmaps()?,
        ExperimentKind::Otoc => ctx.run_otoc()?,
        ExperimentKind::InitialStateSuite => ctx.run_suite()?,
    }
    let manifest = RunManifest {
        config: config.clone(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        manifest_hash: ctx.hash.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        truncation_error: ctx.truncation,
        dmrg_seeds: ctx.seeds.clone(),
        warnings: ctx.warnings.clone(),
        notes: ctx.notes.clone(),
        outputs: ctx.outputs.clone(),
    };
    let f = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(f, &manifest).map_err(|e| crate::Error::Parse(e.to_string()))?;
    Ok(RunOutcome { dir, manifest })
}
