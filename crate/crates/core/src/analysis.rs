//! Power-law fits, light-cone fronts and the late-time chaos verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_model::VelocityTable;

/// Default `|T_d|` level for light-cone arrival times.
pub const DEFAULT_FRONT_THRESHOLD: f64 = 1e-3;
/// Smallest floor accepted by [`powerlaw_fit`].
pub const MIN_FIT_FLOOR: f64 = 1e-15;
const MIN_FIT_POINTS: usize = 5;

/// Ordinary least squares `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Fit(format!("{} abscissae but {} ordinates", n, y.len())));
    }
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// First time `values` reaches `level`, linearly interpolated between
/// grid points; `None` if it never does.
pub fn first_crossing(times: &[f64], values: &[f64], level: f64) -> Option<f64> {
    let k = values.iter().position(|&v| v >= level)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let (v0, v1) = (values[k - 1], values[k]);
    Some(t0 + (level - v0) / (v1 - v0) * (t1 - t0))
}

/// `|T_d(t)| ≈ A·t^α` fitted on a log-log scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    /// Points inside the window rejected for lying at or below the floor.
    pub floor_excluded_count: usize,
}

/// Window `[t_LR(d), t_max(d)]` between the Lieb-Robinson and quasiparticle arrivals.
pub fn default_fit_window(velocities: &VelocityTable, distance: usize) -> (f64, f64) {
    let d = distance as f64;
    (velocities.t_lr(d), velocities.t_max(d))
}

/// Least squares on `(ln t, ln|v|)` over points with `t` in `window` and `|v| > floor`.
pub fn powerlaw_fit(times: &[f64], values: &[f64], window: (f64, f64), floor: f64) -> Result<FitResult> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Fit(format!("empty fit window [{lo}, {hi}]")));
    }
    if !(floor >= MIN_FIT_FLOOR) {
        return Err(Error::Fit(format!("floor {floor:e} is below {MIN_FIT_FLOOR:e}")));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut excluded = 0;
    for (&t, &v) in times.iter().zip(values) {
        if t < lo || t > hi || t <= 0.0 {
            continue;
        }
        if v.abs() > floor {
            x.push(t.ln());
            y.push(v.abs().ln());
        } else {
            excluded += 1;
        }
    }
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: x.len(),
        });
    }
    let fit = linear_fit(&x, &y)?;
    Ok(FitResult {
        alpha: fit.slope,
        prefactor: fit.intercept.exp(),
        r_squared: fit.r_squared,
        window,
        n_points: x.len(),
        floor_excluded_count: excluded,
    })
}

/// First interpolated time at which `|values|` reaches `threshold`.
pub fn front_arrival(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    first_crossing(times, &mags, threshold)
}

/// Rows of a `(d, t)` heatmap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapData {
    pub times: Vec<f64>,
    pub distances: Vec<usize>,
    /// `[row][time]`
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontFit {
    /// `1 / slope` of arrival time against distance.
    pub velocity: f64,
    pub r_squared: f64,
    pub threshold: f64,
    /// Arrival per row; `None` where the row never crosses.
    pub arrivals: Vec<(usize, Option<f64>)>,
}

pub(crate) fn fit_front(arrivals: Vec<(usize, Option<f64>)>, threshold: f64) -> Result<FrontFit> {
    let (d, t): (Vec<f64>, Vec<f64>) = arrivals
        .iter()
        .filter_map(|&(d, t)| t.map(|t| (d as f64, t)))
        .unzip();
    if d.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} distances cross the threshold {threshold:e}; at least 3 are needed",
            d.len()
        )));
    }
    let fit = linear_fit(&d, &t)?;
    if !(fit.slope > 0.0) {
        return Err(Error::Fit(format!(
            "arrival times do not increase with distance (slope {})",
            fit.slope
        )));
    }
    Ok(FrontFit {
        velocity: 1.0 / fit.slope,
        r_squared: fit.r_squared,
        threshold,
        arrivals,
    })
}

pub fn light_cone_velocity(heatmap: &HeatmapData, threshold: f64) -> Result<FrontFit> {
    let arrivals = heatmap
        .distances
        .iter()
        .zip(&heatmap.rows)
        .map(|(&d, row)| (d, front_arrival(&heatmap.times, row, threshold)))
        .collect();
    fit_front(arrivals, threshold)
}

/// Light-cone velocity at each threshold; `None` where the fit fails.
pub fn light_cone_sensitivity(heatmap: &HeatmapData, thresholds: &[f64]) -> Vec<(f64, Option<f64>)> {
    thresholds
        .iter()
        .map(|&th| (th, light_cone_velocity(heatmap, th).ok().map(|f| f.velocity)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosThresholds {
    /// Late/early slope ratio above which growth counts as monotonic.
    pub growth_ratio: f64,
    /// Late/early magnitude ratio below which the integral counts as saturated.
    pub saturation_ratio: f64,
    /// Smallest late slope (nats per unit time) that counts as growth.
    pub slope_floor: f64,
}

impl Default for ChaosThresholds {
    fn default() -> Self {
        Self {
            growth_ratio: 0.5,
            saturation_ratio: 0.2,
            slope_floor: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    MonotonicGrowth,
    Saturating,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::MonotonicGrowth => "monotonic-growth",
            Verdict::Saturating => "saturating",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosVerdict {
    pub late_slope_ratio: f64,
    pub early_slope: f64,
    pub late_slope: f64,
    pub early_window: (f64, f64),
    pub late_window: (f64, f64),
    pub thresholds: ChaosThresholds,
    pub verdict: Verdict,
}

fn window_slope(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, v)| (*t, *v))
        .unzip();
    Ok(linear_fit(&x, &y)?.slope)
}

/// Compares the slope of `I(t)` over `[1.5·t_scr, end]` with that over `[t_scr, 1.5·t_scr]`.
pub fn chaos_metric(times: &[f64], integral: &[f64], t_scr: f64, thresholds: ChaosThresholds) -> Result<ChaosVerdict> {
    let end = times.last().copied().unwrap_or(0.0);
    if !(t_scr > 0.0) {
        return Err(Error::InvalidRequest(format!("scrambling time {t_scr} must be > 0")));
    }
    if end < 2.0 * t_scr {
        return Err(Error::InvalidRequest(format!(
            "series ends at t = {end}, chaos metric needs data beyond 2·t_scr = {}",
            2.0 * t_scr
        )));
    }
    let early_window = (t_scr, 1.5 * t_scr);
    let late_window = (1.5 * t_scr, end);
    let early = window_slope(times, integral, early_window.0, early_window.1)?;
    let late = window_slope(times, integral, late_window.0, late_window.1)?;
    let ratio = late / early;
    let verdict = if ratio > thresholds.growth_ratio
        && early.signum() == late.signum()
        && late.abs() > thresholds.slope_floor
    {
        Verdict::MonotonicGrowth
    } else if late.abs() < thresholds.saturation_ratio * early.abs() {
        Verdict::Saturating
    } else {
        Verdict::Indeterminate
    };
    Ok(ChaosVerdict {
        late_slope_ratio: ratio,
        early_slope: early,
        late_slope: late,
        early_window,
        late_window,
        thresholds,
        verdict,
    })
}
