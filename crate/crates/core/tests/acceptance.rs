//! Acceptance report: one PASS/FAIL line per criterion with the measured
//! values and the tolerance it was judged against.
//!
//! The process fails only when an engine call errors or panics. Set
//! `QLIF_ACCEPTANCE_STRICT=1` to also fail on any FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use qlif::analysis::{chaos_metric, default_fit_window, light_cone_velocity, powerlaw_fit, ChaosThresholds, HeatmapData, Verdict};
use qlif::ed;
use qlif::mps::{bloch_entropy, dmrg_ground_state, tebd_evolve, BlochVector, MpsState, TebdConfig};
use qlif::otoc::{butterfly_velocity, otoc_multidistance_with};
use qlif::qlif::{
    qlif_heatmap_with, qlif_trace_with, EdSolver, Engine, HeatmapRequest, InitialState, QlifHeatmap, QlifRequest, QlifTrace,
    TimeGrid,
};
use qlif::spin_model::{build_hamiltonian, numeric_max_group_velocity, velocity_table, HamiltonianSpec, Spin};
use qlif::Result;

// Tolerances, one block per criterion.
const C1_MAX_GAP: f64 = 1e-5;
const C2_ORDER: (f64, f64) = (1.8, 2.2);
const C3_ENTROPY: f64 = 1e-10;
const C4_V_MAX: f64 = 1.60;
const C4_V_LR: f64 = 5.44;
const C4_V_LR_ROUNDING: f64 = 5e-3;
const C4_NUMERIC: f64 = 1e-6;
const C5_TARGET: f64 = 1.6;
const C5_BAND: f64 = 0.20;
const C5_AGREEMENT: f64 = 0.15;
const C6_ALPHA: (f64, f64) = (7.5, 11.5);
const C6_R2: f64 = 0.9;
const C6_AGREEMENT: f64 = 0.10;
const C7_FACTOR: f64 = 2.0;
const C7_FLOOR: f64 = 1e-12;
const C8_INTEGRAL: f64 = 2.0;
const C8_BAND: f64 = 0.5;
const C9_N_OVER_A: f64 = 2.0;
const C9_A_OVER_B: f64 = 5.0;
const C10_ENERGY: f64 = 1e-8;
const C11_ZERO: f64 = 1e-12;
const C12_ZERO: f64 = 1e-12;
const C12_V_B: (f64, f64) = (1.0, 2.5);

const FRONT_THRESHOLD: f64 = 1e-3;
const FIT_FLOOR: f64 = 1e-14;
const OTOC_THRESHOLD: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn solver() -> &'static EdSolver {
    static SOLVER: OnceLock<EdSolver> = OnceLock::new();
    SOLVER.get_or_init(EdSolver::default)
}

fn trace(spec: HamiltonianSpec, frozen: usize, obs: usize, initial: InitialState, engine: Engine, grid: TimeGrid) -> Result<QlifTrace> {
    qlif_trace_with(
        solver(),
        &QlifRequest {
            spec,
            frozen_site: frozen,
            obs_site: obs,
            initial,
            engine,
            grid,
        },
    )
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn peak(trace: &QlifTrace, t_end: f64) -> f64 {
    trace
        .times
        .iter()
        .zip(&trace.t_d)
        .filter(|(t, _)| **t <= t_end + 1e-12)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
}

fn cross_engine() -> Result<Outcome> {
    let grid = TimeGrid::new(0.05, 5.0);
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for (l, frozen, obs) in [(8, 2, 5), (10, 3, 6)] {
        let spec = HamiltonianSpec::chaotic(l);
        let exact = trace(spec, frozen, obs, InitialState::Neel, Engine::Ed, grid)?;
        let mps = trace(spec, frozen, obs, InitialState::Neel, Engine::Mps(TebdConfig::new(0.01, 64)), grid)?;
        let gap = max_gap(&exact.t_d, &mps.t_d);
        worst = worst.max(gap);
        parts.push(format!("L={l} sites {}->{}: {gap:.3e}", frozen + 1, obs + 1));
    }
    outcome(worst < C1_MAX_GAP, format!("max|dT_d| {} (tol < {C1_MAX_GAP:e})", parts.join(", ")))
}

fn trotter_order() -> Result<Outcome> {
    let spec = HamiltonianSpec::chaotic(8);
    let op = build_hamiltonian(&spec)?;
    let exact = ed::evolve(&op, &ed::neel_state(8), &[2.0])?.remove(0);
    let steps = [0.2, 0.1, 0.05];
    let mut errors = Vec::new();
    for dt in steps {
        let cfg = TebdConfig {
            svd_cutoff: 0.0,
            ..TebdConfig::new(dt, 256)
        };
        let run = tebd_evolve(&op, MpsState::neel(8)?, &cfg, 2.0, &[])?;
        let psi = run.final_state.contract_to_dense(12)?;
        let err = psi
            .amplitudes()
            .iter()
            .zip(exact.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        errors.push(err);
    }
    let x: Vec<f64> = steps.iter().map(|d: &f64| d.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let order = qlif::analysis::linear_fit(&x, &y)?.slope;
    outcome(
        order >= C2_ORDER.0 && order <= C2_ORDER.1,
        format!(
            "order {order:.4} from errors {:.3e}, {:.3e}, {:.3e} (tol [{}, {}])",
            errors[0], errors[1], errors[2], C2_ORDER.0, C2_ORDER.1
        ),
    )
}

fn entropy_identity() -> Result<Outcome> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let r = (k / 100) as f64 / 9.0;
        let j = k % 100;
        let z = 1.0 - 2.0 * (j as f64 + 0.5) / 100.0;
        let rho_xy = (1.0 - z * z).sqrt();
        let phi = golden * j as f64;
        let (x, y, z) = (r * rho_xy * phi.cos(), r * rho_xy * phi.sin(), r * z);
        let rho = Mat::<C64>::from_fn(2, 2, |a, b| match (a, b) {
            (0, 0) => C64::new(0.5 * (1.0 + z), 0.0),
            (1, 1) => C64::new(0.5 * (1.0 - z), 0.0),
            (0, 1) => C64::new(0.5 * x, -0.5 * y),
            _ => C64::new(0.5 * x, 0.5 * y),
        });
        let eig = rho.self_adjoint_eigenvalues(Side::Lower).expect("2x2 eigenvalues");
        let s: f64 = eig.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
        worst = worst.max((bloch_entropy(&BlochVector::new(x, y, z)) - s).abs());
    }
    outcome(worst < C3_ENTROPY, format!("max deviation {worst:.3e} over 1000 points (tol < {C3_ENTROPY:e})"))
}

fn velocity_check() -> Result<Outcome> {
    let table = velocity_table(&HamiltonianSpec::chaotic(10));
    let numeric = numeric_max_group_velocity(1.0, 0.8, 200_001);
    let pass = (table.max_group - C4_V_MAX).abs() < 1e-12
        && (table.lieb_robinson - C4_V_LR).abs() < C4_V_LR_ROUNDING
        && (numeric - 2.0 * 1.0f64.min(0.8)).abs() < C4_NUMERIC;
    outcome(
        pass,
        format!(
            "v_max {:.6}, v_LR {:.6}, numeric max group velocity {numeric:.9} (tol: v_max = {C4_V_MAX}, v_LR = {C4_V_LR} to rounding, numeric within {C4_NUMERIC:e})",
            table.max_group, table.lieb_robinson
        ),
    )
}

fn heatmap(spec: HamiltonianSpec) -> Result<QlifHeatmap> {
    qlif_heatmap_with(
        solver(),
        &HeatmapRequest {
            spec,
            frozen_site: 3,
            obs_sites: (4..=9).collect(),
            initial: InitialState::Neel,
            engine: Engine::Ed,
            grid: TimeGrid::new(0.02, 8.0),
        },
    )
}

struct Heatmaps {
    chaotic: QlifHeatmap,
    integrable: QlifHeatmap,
}

fn heatmaps() -> Result<&'static Heatmaps> {
    static DATA: OnceLock<Heatmaps> = OnceLock::new();
    if let Some(h) = DATA.get() {
        return Ok(h);
    }
    let data = Heatmaps {
        chaotic: heatmap(HamiltonianSpec::chaotic(12))?,
        integrable: heatmap(HamiltonianSpec::integrable(12))?,
    };
    Ok(DATA.get_or_init(|| data))
}

fn as_data(h: &QlifHeatmap) -> HeatmapData {
    HeatmapData {
        times: h.times.clone(),
        distances: h.distances(),
        rows: h.magnitudes(),
    }
}

fn light_cone() -> Result<Outcome> {
    let h = heatmaps()?;
    let chaos = light_cone_velocity(&as_data(&h.chaotic), FRONT_THRESHOLD)?;
    let integ = light_cone_velocity(&as_data(&h.integrable), FRONT_THRESHOLD)?;
    let off_target = (chaos.velocity - C5_TARGET).abs() / C5_TARGET;
    let spread = (chaos.velocity - integ.velocity).abs() / chaos.velocity;
    outcome(
        off_target <= C5_BAND && spread <= C5_AGREEMENT,
        format!(
            "v chaotic {:.4} (R2 {:.4}), integrable {:.4} (R2 {:.4}); |v-{C5_TARGET}|/{C5_TARGET} = {off_target:.3} (tol {C5_BAND}), chaotic vs integrable {spread:.3} (tol {C5_AGREEMENT})",
            chaos.velocity, chaos.r_squared, integ.velocity, integ.r_squared
        ),
    )
}

fn exponent() -> Result<Outcome> {
    let h = heatmaps()?;
    let window = default_fit_window(&velocity_table(&HamiltonianSpec::chaotic(12)), 4);
    let fit = |m: &QlifHeatmap| {
        let row = &m.rows[3];
        powerlaw_fit(&row.times, &row.t_d, window, FIT_FLOOR)
    };
    let (c, i) = (fit(&h.chaotic)?, fit(&h.integrable)?);
    let in_band = |a: f64| a >= C6_ALPHA.0 && a <= C6_ALPHA.1;
    let spread = (c.alpha - i.alpha).abs() / c.alpha;
    outcome(
        in_band(c.alpha) && in_band(i.alpha) && c.r_squared > C6_R2 && i.r_squared > C6_R2 && spread < C6_AGREEMENT,
        format!(
            "window [{:.4}, {:.4}]: alpha chaotic {:.4} (R2 {:.4}), integrable {:.4} (R2 {:.4}), spread {spread:.4} (tol alpha in [{}, {}], R2 > {C6_R2}, spread < {C6_AGREEMENT})",
            window.0, window.1, c.alpha, c.r_squared, i.alpha, i.r_squared, C6_ALPHA.0, C6_ALPHA.1
        ),
    )
}

fn early_time() -> Result<Outcome> {
    let h = heatmaps()?;
    let t_end = velocity_table(&HamiltonianSpec::chaotic(12)).t_max(4.0);
    let (c, i) = (&h.chaotic.rows[3], &h.integrable.rows[3]);
    let mut worst = (1.0, 0.0);
    let mut compared = 0;
    for k in 0..c.times.len() {
        let (a, b) = (c.t_d[k].abs(), i.t_d[k].abs());
        if c.times[k] < t_end && a > C7_FLOOR && b > C7_FLOOR {
            compared += 1;
            let ratio = (a / b).max(b / a);
            if ratio > worst.0 {
                worst = (ratio, c.times[k]);
            }
        }
    }
    outcome(
        compared > 0 && worst.0 <= C7_FACTOR,
        format!(
            "worst pointwise ratio {:.4} at t = {:.2} over {compared} points with t < {t_end:.4} (tol <= {C7_FACTOR})",
            worst.0, worst.1
        ),
    )
}

fn late_time() -> Result<Outcome> {
    let grid = TimeGrid::new(0.1, 40.0);
    let engine = Engine::Mps(TebdConfig::new(0.1, 128));
    let chaotic = HamiltonianSpec::chaotic(20);
    let t_scr = velocity_table(&chaotic).t_scr(20);
    let run = |spec| -> Result<_> {
        let start = Instant::now();
        let tr = trace(spec, 7, 11, InitialState::Neel, engine, grid)?;
        let verdict = chaos_metric(&tr.times, &tr.integral, t_scr, ChaosThresholds::default())?;
        Ok((tr, verdict, start.elapsed().as_secs_f64()))
    };
    let (ct, cv, c_secs) = run(chaotic)?;
    let (it, iv, i_secs) = run(HamiltonianSpec::integrable(20))?;
    let integral = *ct.integral.last().expect("non-empty trace");
    let off = (integral - C8_INTEGRAL).abs() / C8_INTEGRAL;
    outcome(
        off <= C8_BAND && cv.verdict == Verdict::MonotonicGrowth && iv.verdict == Verdict::Saturating,
        format!(
            "I(40) chaotic {integral:.4} (off by {off:.3}, tol {C8_BAND}), integrable {:.4}; verdict chaotic {:?} (ratio {:.3}), integrable {:?} (ratio {:.3}); truncation {:.2e}/{:.2e}; {c_secs:.0}s + {i_secs:.0}s",
            it.integral.last().expect("non-empty trace"),
            cv.verdict,
            cv.late_slope_ratio,
            iv.verdict,
            iv.late_slope_ratio,
            ct.metadata.truncation_error_full.max(ct.metadata.truncation_error_frozen),
            it.metadata.truncation_error_full.max(it.metadata.truncation_error_frozen),
        ),
    )
}

fn hierarchy() -> Result<Outcome> {
    let chaotic = HamiltonianSpec::chaotic(12);
    let integrable = HamiltonianSpec::integrable(12);
    let t_end = velocity_table(&chaotic).t_max(3.0);
    let grid = TimeGrid::new(0.02, (t_end / 0.02).ceil() * 0.02);
    let n = trace(chaotic, 3, 6, InitialState::Neel, Engine::Ed, grid)?;
    let a = trace(integrable, 3, 6, InitialState::GroundState(integrable), Engine::Ed, grid)?;
    let b = trace(chaotic, 3, 6, InitialState::GroundState(integrable), Engine::Ed, grid)?;
    let (pn, pa, pb) = (peak(&n, t_end), peak(&a, t_end), peak(&b, t_end));
    outcome(
        pn > pa && pa > pb && pn / pa > C9_N_OVER_A && pa / pb > C9_A_OVER_B,
        format!(
            "peaks over [0, {t_end:.4}]: N {pn:.4e}, A {pa:.4e}, B {pb:.4e}; N/A {:.3} (tol > {C9_N_OVER_A}), A/B {:.3} (tol > {C9_A_OVER_B})",
            pn / pa,
            pa / pb
        ),
    )
}

fn dmrg_energies() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (label, spec) in [("integrable", HamiltonianSpec::integrable(10)), ("chaotic", HamiltonianSpec::chaotic(10))] {
        let op = build_hamiltonian(&spec)?;
        let (exact, _) = ed::ground_state_dense(&op)?;
        let dmrg = dmrg_ground_state(&op, 64, 1e-12)?;
        let gap = (dmrg.energy - exact).abs();
        worst = worst.max(gap);
        parts.push(format!("{label} E {:.12} vs {exact:.12} ({gap:.2e})", dmrg.energy));
    }
    outcome(worst < C10_ENERGY, format!("{} (tol < {C10_ENERGY:e})", parts.join(", ")))
}

fn zero_cases() -> Result<Outcome> {
    let chaotic = HamiltonianSpec::chaotic(8);
    let integrable = HamiltonianSpec::integrable(8);
    let tilted = InitialState::Product(Spin::parse_pattern("uuduuddu").expect("valid pattern"));
    let protocols = [
        ("N", chaotic, InitialState::Neel),
        ("A", integrable, InitialState::GroundState(integrable)),
        ("B", chaotic, InitialState::GroundState(integrable)),
        ("C", chaotic, InitialState::GroundState(chaotic)),
        ("up", chaotic, InitialState::AllUp),
        ("product", chaotic, tilted.clone()),
    ];
    let short = TimeGrid::new(0.1, 0.5);
    let mut initial_worst: f64 = 0.0;
    for (_, spec, init) in &protocols {
        for engine in [Engine::Ed, Engine::Mps(TebdConfig::new(0.05, 32))] {
            let tr = trace(*spec, 2, 5, init.clone(), engine, short)?;
            initial_worst = initial_worst.max(tr.t_d[0].abs());
        }
    }
    let decoupled = HamiltonianSpec::new(8, 0.0, 0.8, 0.5)?;
    let grid = TimeGrid::new(0.1, 5.0);
    let mut flow_worst: f64 = 0.0;
    for init in [InitialState::Neel, tilted] {
        for engine in [Engine::Ed, Engine::Mps(TebdConfig::new(0.05, 16))] {
            let tr = trace(decoupled, 2, 5, init.clone(), engine, grid)?;
            flow_worst = tr.t_d.iter().fold(flow_worst, |m, v| m.max(v.abs()));
        }
    }
    outcome(
        initial_worst < C11_ZERO && flow_worst < C11_ZERO,
        format!(
            "max|T_d(0)| {initial_worst:.2e} over {} protocols and both engines; J=0 max|T_d| {flow_worst:.2e} (tol < {C11_ZERO:e})",
            protocols.len()
        ),
    )
}

fn otoc_check() -> Result<Outcome> {
    let spec = HamiltonianSpec::chaotic(12);
    let mut times: Vec<f64> = (0..=16).map(|k| 0.25 * k as f64).collect();
    times.extend([5.0, 6.0, 7.0]);
    let sites: Vec<usize> = (4..=9).collect();
    let tr = otoc_multidistance_with(solver(), &spec, 3, &sites, &times)?;
    let at_zero = tr.values.iter().map(|c| c[0].abs()).fold(0.0, f64::max);
    let fit = butterfly_velocity(&tr, OTOC_THRESHOLD)?;
    let others: Vec<String> = [0.05, 0.2, 0.3]
        .iter()
        .map(|th| match butterfly_velocity(&tr, *th) {
            Ok(f) => format!("{th}: {:.3}", f.velocity),
            Err(e) => format!("{th}: {e}"),
        })
        .collect();
    outcome(
        at_zero < C12_ZERO && fit.velocity >= C12_V_B.0 && fit.velocity <= C12_V_B.1,
        format!(
            "max C(0) {at_zero:.2e} (tol < {C12_ZERO:e}); v_B {:.4} at threshold {OTOC_THRESHOLD} (R2 {:.4}, tol [{}, {}]); other thresholds {}",
            fit.velocity,
            fit.r_squared,
            C12_V_B.0,
            C12_V_B.1,
            others.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Result<Outcome>); 12] = [
        (3, "entropy identity", entropy_identity),
        (4, "velocity table", velocity_check),
        (10, "DMRG ground energies", dmrg_energies),
        (11, "QLIF zero cases", zero_cases),
        (2, "Trotter order", trotter_order),
        (1, "cross-engine equivalence", cross_engine),
        (5, "light-cone front", light_cone),
        (6, "power-law exponent", exponent),
        (7, "early-time indistinguishability", early_time),
        (9, "initial-state hierarchy", hierarchy),
        (12, "OTOC sanity", otoc_check),
        (8, "late-time integral diagnostic (slow)", late_time),
    ];
    let strict = std::env::var("QLIF_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let (mut passed, mut failed, mut broken) = (0, 0, 0);
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(Ok(o)) => {
                let tag = if o.pass { "PASS" } else { "FAIL" };
                if o.pass {
                    passed += 1;
                } else {
                    failed += 1;
                }
                println!("{tag} [{id:>2}] {name}: {} [{secs:.1}s]", o.detail);
            }
            Ok(Err(e)) => {
                broken += 1;
                println!("FAIL [{id:>2}] {name}: error: {e} [{secs:.1}s]");
            }
            Err(_) => {
                broken += 1;
                println!("FAIL [{id:>2}] {name}: panicked [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {passed} passed, {} failed ({broken} by error or panic)", failed + broken);
    if broken > 0 || (strict && failed > 0) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
