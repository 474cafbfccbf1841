//! Multi-distance OTOC traces and butterfly-velocity fits.

use serde::{Deserialize, Serialize};

use crate::analysis::{self, FrontFit};
use crate::error::{Error, Result};
use crate::qlif::EdSolver;
use crate::spin_model::HamiltonianSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocTrace {
    pub spec: HamiltonianSpec,
    pub w_site: usize,
    pub v_sites: Vec<usize>,
    pub times: Vec<f64>,
    /// `C(t)` per V site, `[v_index][time]`.
    pub values: Vec<Vec<f64>>,
}

impl OtocTrace {
    pub fn distances(&self) -> Vec<usize> {
        self.v_sites.iter().map(|v| v.abs_diff(self.w_site)).collect()
    }
}

pub fn otoc_multidistance(spec: &HamiltonianSpec, w_site: usize, v_sites: &[usize], times: &[f64]) -> Result<OtocTrace> {
    otoc_multidistance_with(&EdSolver::default(), spec, w_site, v_sites, times)
}

pub fn otoc_multidistance_with(
    solver: &EdSolver,
    spec: &HamiltonianSpec,
    w_site: usize,
    v_sites: &[usize],
    times: &[f64],
) -> Result<OtocTrace> {
    spec.check_site(w_site)?;
    for &v in v_sites {
        spec.check_site(v)?;
    }
    let eig = solver.eigensystem(spec, None)?;
    let values = eig.otoc(w_site, v_sites, times)?;
    Ok(OtocTrace {
        spec: *spec,
        w_site,
        v_sites: v_sites.to_vec(),
        times: times.to_vec(),
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ButterflyFit {
    pub velocity: f64,
    pub r_squared: f64,
    pub threshold: f64,
    /// Arrival per distance; `None` where `C` never reaches the threshold.
    pub arrivals: Vec<(usize, Option<f64>)>,
    /// Plateau value `C_sat` per distance (mean over the final 20% of the window).
    pub saturation: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Mean of `values` over the final 20% of the time window.
pub fn saturation_value(times: &[f64], values: &[f64]) -> f64 {
    let (start, end) = (times[0], times[times.len() - 1]);
    let cut = end - 0.2 * (end - start);
    let tail: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= cut)
        .map(|(_, v)| *v)
        .collect();
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// `v_B` from first crossings of `threshold · C_sat(d)`, fitted linearly against `d`.
pub fn butterfly_velocity(trace: &OtocTrace, threshold: f64) -> Result<ButterflyFit> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidRequest(format!("threshold {threshold} must lie in (0, 1)")));
    }
    if trace.times.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: trace.times.len(),
        });
    }
    let mut warnings = Vec::new();
    let mut saturation = Vec::with_capacity(trace.values.len());
    let arrivals: Vec<(usize, Option<f64>)> = trace
        .distances()
        .into_iter()
        .zip(&trace.values)
        .map(|(d, c)| {
            let sat = saturation_value(&trace.times, c);
            saturation.push(sat);
            let t = analysis::first_crossing(&trace.times, c, threshold * sat);
            if t.is_none() {
                warnings.push(format!("distance {d} never reaches {threshold} x C_sat; excluded"));
            }
            (d, t)
        })
        .collect();
    let FrontFit {
        velocity,
        r_squared,
        threshold,
        arrivals,
    } = analysis::fit_front(arrivals, threshold)?;
    Ok(ButterflyFit {
        velocity,
        r_squared,
        threshold,
        arrivals,
        saturation,
        warnings,
    })
}
