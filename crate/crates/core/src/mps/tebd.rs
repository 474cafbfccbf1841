//! Second-order TEBD: `e^{-iHdt} ≈ e^{-iH_odd dt/2} e^{-iH_even dt} e^{-iH_odd dt/2}`.
//!
//! One-site terms are folded into the bond Hamiltonians: an interior site
//! gives half of its field to each of its two bonds, an edge site gives its
//! whole field to its only bond. Bonds without a two-site part reduce to a
//! product of one-site unitaries and are applied without an SVD.

use serde::{Deserialize, Serialize};

use super::{Absorb, BlochVector, MpsState};
use crate::error::{Error, Result};
use crate::ops::{self, Mat2, Mat4};
use crate::spin_model::OperatorSum;

fn default_cutoff() -> f64 {
    1e-16
}

fn default_stride() -> usize {
    1
}

fn default_alarm() -> f64 {
    1e-6
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TebdConfig {
    pub dt: f64,
    pub chi: usize,
    /// Singular values with squared weight below this are dropped.
    #[serde(default = "default_cutoff")]
    pub svd_cutoff: f64,
    #[serde(default = "default_stride")]
    pub measure_stride: usize,
    /// Per-step discarded weight above which a warning is recorded.
    #[serde(default = "default_alarm")]
    pub alarm_threshold: f64,
}

impl TebdConfig {
    pub fn new(dt: f64, chi: usize) -> Self {
        Self {
            dt,
            chi,
            svd_cutoff: default_cutoff(),
            measure_stride: default_stride(),
            alarm_threshold: default_alarm(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidRequest(format!("TEBD step dt = {} must be > 0", self.dt)));
        }
        if self.chi < 1 {
            return Err(Error::InvalidRequest("bond dimension chi must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.svd_cutoff) {
            return Err(Error::InvalidRequest(format!(
                "svd_cutoff = {} must lie in [0, 1)",
                self.svd_cutoff
            )));
        }
        if self.measure_stride < 1 {
            return Err(Error::InvalidRequest("measure_stride must be >= 1".into()));
        }
        Ok(())
    }
}

enum Gate {
    Identity,
    Local(Mat2, Mat2),
    Entangling(Mat4),
}

/// Bond propagators for the half and full Trotter steps.
pub struct BondGates {
    half: Vec<Gate>,
    full: Vec<Gate>,
}

impl BondGates {
    /// Bond Hamiltonians with the one-site fields split onto adjacent bonds.
    /// Returns the two-site part and the left/right one-site parts per bond.
    fn bond_parts(op: &OperatorSum) -> (Vec<Option<Mat4>>, Vec<(Mat2, Mat2)>) {
        let l = op.sites();
        let (singles, pairs) = op.local_blocks();
        let share = |site: usize| if site == 0 || site == l - 1 { 1.0 } else { 0.5 };
        let two_site = pairs
            .into_iter()
            .map(|b| if ops::is_zero(&b) { None } else { Some(b) })
            .collect();
        let one_site = (0..l - 1)
            .map(|b| {
                (
                    ops::scale2(&singles[b], share(b)),
                    ops::scale2(&singles[b + 1], share(b + 1)),
                )
            })
            .collect();
        (two_site, one_site)
    }

    pub fn new(op: &OperatorSum, dt: f64) -> Result<Self> {
        if op.sites() < 2 {
            return Err(Error::InvalidRequest("TEBD needs at least two sites".into()));
        }
        let (two_site, one_site) = Self::bond_parts(op);
        let build = |tau: f64| -> Result<Vec<Gate>> {
            two_site
                .iter()
                .zip(&one_site)
                .map(|(pair, (left, right))| {
                    let local_zero = ops::is_zero(left) && ops::is_zero(right);
                    Ok(match pair {
                        None if local_zero => Gate::Identity,
                        None => Gate::Local(local_propagator(left, tau)?, local_propagator(right, tau)?),
                        Some(block) => {
                            let h = ops::add4(
                                block,
                                &ops::add4(
                                    &ops::kron(left, &ops::IDENTITY),
                                    &ops::kron(&ops::IDENTITY, right),
                                ),
                            );
                            Gate::Entangling(ops::unitary_propagator(&h, tau)?)
                        }
                    })
                })
                .collect()
        };
        Ok(Self {
            half: build(0.5 * dt)?,
            full: build(dt)?,
        })
    }

    fn bonds(&self) -> usize {
        self.full.len()
    }
}

/// `exp(-i tau h)` for a 2x2 Hermitian block, embedded through the 4x4 path.
fn local_propagator(h: &Mat2, tau: f64) -> Result<Mat2> {
    let u = ops::unitary_propagator(&ops::kron(h, &ops::IDENTITY), tau)?;
    // The right factor is the identity; read the left factor off the even rows/cols.
    Ok([[u[0][0], u[0][2]], [u[2][0], u[2][2]]])
}

/// Bloch vectors at the observed sites at one measurement time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TebdRecord {
    pub step: usize,
    pub time: f64,
    pub bloch: Vec<BlochVector>,
    /// Cumulative discarded weight up to this record.
    pub truncation_error: f64,
    pub max_bond: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TebdWarning {
    pub step: usize,
    pub time: f64,
    pub discarded: f64,
    pub max_bond: usize,
}

#[derive(Clone, Debug)]
pub struct TebdRun {
    pub observed_sites: Vec<usize>,
    pub records: Vec<TebdRecord>,
    pub warnings: Vec<TebdWarning>,
    pub final_state: MpsState,
}

fn apply_layer(
    state: &mut MpsState,
    gates: &[Gate],
    bonds: impl DoubleEndedIterator<Item = usize> + Clone,
    cfg: &TebdConfig,
) -> Result<f64> {
    let l = state.sites();
    let mut discarded = 0.0;
    let ascending = 2 * state.center() < l;
    let order: Vec<usize> = if ascending {
        bonds.collect()
    } else {
        bonds.rev().collect()
    };
    for b in order {
        match &gates[b] {
            Gate::Identity => {}
            Gate::Local(left, right) => {
                state.apply_local(b, left);
                state.apply_local(b + 1, right);
            }
            Gate::Entangling(g) => {
                let split = if ascending {
                    if state.center() != b + 1 {
                        state.move_center(b)?;
                    }
                    state.apply_gate(b, g, cfg.chi, cfg.svd_cutoff, Absorb::Right)?
                } else {
                    if state.center() != b {
                        state.move_center(b + 1)?;
                    }
                    state.apply_gate(b, g, cfg.chi, cfg.svd_cutoff, Absorb::Left)?
                };
                discarded += split.discarded;
            }
        }
    }
    Ok(discarded)
}

fn step(state: &mut MpsState, gates: &BondGates, cfg: &TebdConfig) -> Result<f64> {
    let n = gates.bonds();
    let odd = (1..n).step_by(2);
    let even = (0..n).step_by(2);
    let mut discarded = apply_layer(state, &gates.half, odd.clone(), cfg)?;
    discarded += apply_layer(state, &gates.full, even, cfg)?;
    discarded += apply_layer(state, &gates.half, odd, cfg)?;
    Ok(discarded)
}

fn measure(state: &mut MpsState, sites: &[usize]) -> Result<Vec<BlochVector>> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    if 2 * state.center() >= state.sites() {
        order.sort_by_key(|&k| std::cmp::Reverse(sites[k]));
    } else {
        order.sort_by_key(|&k| sites[k]);
    }
    let mut out = vec![BlochVector::new(0.0, 0.0, 0.0); sites.len()];
    for k in order {
        out[k] = state.bloch_vector(sites[k])?;
    }
    Ok(out)
}

/// Evolves `psi0` under `op` up to `t_max`, recording Bloch vectors at
/// `observed` every `measure_stride` steps (step 0 included).
pub fn tebd_evolve(
    op: &OperatorSum,
    psi0: MpsState,
    cfg: &TebdConfig,
    t_max: f64,
    observed: &[usize],
) -> Result<TebdRun> {
    cfg.validate()?;
    if op.sites() != psi0.sites() {
        return Err(Error::InvalidRequest(format!(
            "state has {} sites, Hamiltonian has {}",
            psi0.sites(),
            op.sites()
        )));
    }
    if let Some(&bad) = observed.iter().find(|&&s| s >= op.sites()) {
        return Err(Error::SiteOutOfRange {
            site: bad,
            sites: op.sites(),
        });
    }
    if !(t_max >= 0.0) {
        return Err(Error::InvalidRequest(format!("t_max = {t_max} must be >= 0")));
    }
    let gates = BondGates::new(op, cfg.dt)?;
    let steps = (t_max / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let mut state = psi0;
    let mut records = Vec::with_capacity(steps / cfg.measure_stride + 1);
    let mut warnings = Vec::new();

    let record = |state: &mut MpsState, step: usize| -> Result<TebdRecord> {
        Ok(TebdRecord {
            step,
            time: step as f64 * cfg.dt,
            bloch: measure(state, observed)?,
            truncation_error: state.truncation_error(),
            max_bond: state.max_bond(),
        })
    };
    records.push(record(&mut state, 0)?);
    for n in 1..=steps {
        let discarded = step(&mut state, &gates, cfg)?;
        if discarded > cfg.alarm_threshold {
            warnings.push(TebdWarning {
                step: n,
                time: n as f64 * cfg.dt,
                discarded,
                max_bond: state.max_bond(),
            });
        }
        if n % cfg.measure_stride == 0 {
            records.push(record(&mut state, n)?);
        }
    }
    Ok(TebdRun {
        observed_sites: observed.to_vec(),
        records,
        warnings,
        final_state: state,
    })
}
