//! Twelve-site exact heatmaps shared by several checks.

use std::sync::OnceLock;

use qlif::analysis::{self, default_fit_window, light_cone_velocity, powerlaw_fit, HeatmapData};
use qlif::qlif::{qlif_heatmap_with, EdSolver, Engine, HeatmapRequest, InitialState, QlifHeatmap, TimeGrid};
use qlif::spin_model::{velocity_table, HamiltonianSpec};

const FROZEN: usize = 3;

fn heatmap(spec: HamiltonianSpec) -> QlifHeatmap {
    static SOLVER: OnceLock<EdSolver> = OnceLock::new();
    qlif_heatmap_with(
        SOLVER.get_or_init(EdSolver::default),
        &HeatmapRequest {
            spec,
            frozen_site: FROZEN,
            obs_sites: (4..=9).collect(),
            initial: InitialState::Neel,
            engine: Engine::Ed,
            grid: TimeGrid::new(0.02, 8.0),
        },
    )
    .unwrap()
}

fn chaotic() -> &'static QlifHeatmap {
    static DATA: OnceLock<QlifHeatmap> = OnceLock::new();
    DATA.get_or_init(|| heatmap(HamiltonianSpec::chaotic(12)))
}

fn integrable() -> &'static QlifHeatmap {
    static DATA: OnceLock<QlifHeatmap> = OnceLock::new();
    DATA.get_or_init(|| heatmap(HamiltonianSpec::integrable(12)))
}

fn as_data(h: &QlifHeatmap) -> HeatmapData {
    HeatmapData {
        times: h.times.clone(),
        distances: h.distances(),
        rows: h.magnitudes(),
    }
}

fn early_max(h: &QlifHeatmap, d: usize) -> f64 {
    let cut = 0.5 * velocity_table(&HamiltonianSpec::chaotic(12)).t_lr(d as f64);
    let row = &h.rows[d - 1];
    row.times.iter().zip(&row.t_d).filter(|(t, _)| **t < cut).map(|(_, v)| v.abs()).fold(0.0, f64::max)
}

#[test]
fn nearer_sites_light_up_first() {
    let h = chaotic();
    assert_eq!(h.distances(), vec![1, 2, 3, 4, 5, 6]);
    let onset = |d: usize| analysis::front_arrival(&h.times, &h.rows[d - 1].t_d, 1e-3).unwrap();
    assert!(onset(1) < onset(5), "t*(1) = {}, t*(5) = {}", onset(1), onset(5));
}

#[test]
fn signal_outside_the_lieb_robinson_cone_is_tiny() {
    let h = chaotic();
    for d in 3..=6 {
        assert!(early_max(h, d) < 1e-8, "d = {d}: {:e}", early_max(h, d));
    }
    for d in 4..=6 {
        assert!(early_max(h, d) < 1e-10, "d = {d}: {:e}", early_max(h, d));
    }
    for d in 1..6 {
        assert!(early_max(h, d + 1) < early_max(h, d));
    }
}

#[test]
fn front_velocity_is_insensitive_to_integrability() {
    let bound = velocity_table(&HamiltonianSpec::chaotic(12)).lieb_robinson;
    let v_chaos = light_cone_velocity(&as_data(chaotic()), 1e-3).unwrap().velocity;
    let v_integ = light_cone_velocity(&as_data(integrable()), 1e-3).unwrap().velocity;
    assert!((v_chaos - v_integ).abs() / v_chaos < 0.15, "{v_chaos} vs {v_integ}");
    assert!(v_chaos < bound && v_integ < bound);
}

#[test]
fn exponent_is_insensitive_to_the_floor() {
    let row = &chaotic().rows[3];
    let window = default_fit_window(&velocity_table(&HamiltonianSpec::chaotic(12)), 4);
    let a = powerlaw_fit(&row.times, &row.t_d, window, 1e-14).unwrap().alpha;
    let b = powerlaw_fit(&row.times, &row.t_d, window, 1e-13).unwrap().alpha;
    assert!((a - b).abs() / a < 0.05, "α = {a} vs {b}");
}
