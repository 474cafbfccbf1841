//! Matrix product states for open spin-1/2 chains.
//!
//! States are kept in mixed canonical form around a single orthogonality
//! center: tensors left of the center are left-orthonormal, tensors right
//! of it are right-orthonormal. Two-site updates (TEBD gates, DMRG steps)
//! are only performed on bonds touching the center, so the singular values
//! of each split are the exact Schmidt coefficients of the current state.

mod dmrg;
mod tebd;

pub use dmrg::{dmrg_ground_state, dmrg_with_config, DmrgConfig, DmrgResult, Mpo};
pub use tebd::{tebd_evolve, BondGates, TebdConfig, TebdRecord, TebdRun, TebdWarning};

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ed::{check_capacity, StateVector};
use crate::error::{Error, Result};
use crate::ops::{Mat2, Mat4};
use crate::spin_model::Spin;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Expectation values `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of one spin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Length, clamped to 1 once it exceeds `1 + 1e-9`.
    pub fn length(&self) -> f64 {
        let r = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        if r > 1.0 + 1e-9 {
            1.0
        } else {
            r
        }
    }
}

/// Entropy of a single spin from its Bloch vector, `-Σ p± ln p±` with
/// `p± = (1 ± r) / 2`.
pub fn bloch_entropy(b: &BlochVector) -> f64 {
    let r = b.length().clamp(0.0, 1.0);
    [0.5 * (1.0 + r), 0.5 * (1.0 - r)]
        .into_iter()
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Spin direction on the Bloch sphere (polar angle from +Z, azimuth from +X).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochDirection {
    pub theta: f64,
    pub phi: f64,
}

impl From<Spin> for BlochDirection {
    fn from(s: Spin) -> Self {
        match s {
            Spin::Up => Self { theta: 0.0, phi: 0.0 },
            Spin::Down => Self {
                theta: std::f64::consts::PI,
                phi: 0.0,
            },
        }
    }
}

/// Rank-3 site tensor `A[l, s, r]` stored row-major as `(l * 2 + s) * right + r`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SiteTensor {
    pub(crate) left: usize,
    pub(crate) right: usize,
    pub(crate) data: Vec<C64>,
}

impl SiteTensor {
    #[inline]
    pub(crate) fn at(&self, l: usize, s: usize, r: usize) -> C64 {
        self.data[(l * 2 + s) * self.right + r]
    }

    fn norm_sqr(&self) -> f64 {
        self.data.iter().map(C64::norm_sqr).sum()
    }

    /// Applies a one-site operator on the physical index.
    fn apply_local(&mut self, op: &Mat2) {
        for l in 0..self.left {
            for r in 0..self.right {
                let a0 = self.at(l, 0, r);
                let a1 = self.at(l, 1, r);
                self.data[(l * 2) * self.right + r] = op[0][0] * a0 + op[0][1] * a1;
                self.data[(l * 2 + 1) * self.right + r] = op[1][0] * a0 + op[1][1] * a1;
            }
        }
    }
}

/// Which side of a split bond receives the singular values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Absorb {
    Left,
    Right,
}

/// Result of splitting a two-site block.
pub(crate) struct Split {
    pub(crate) discarded: f64,
}

/// Matrix product state in mixed canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    tensors: Vec<SiteTensor>,
    center: usize,
    truncation_error: f64,
}

impl MpsState {
    pub fn product(directions: &[BlochDirection]) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidRequest("an MPS needs at least one site".into()));
        }
        let tensors = directions
            .iter()
            .map(|d| SiteTensor {
                left: 1,
                right: 1,
                data: vec![
                    C64::new((0.5 * d.theta).cos(), 0.0),
                    C64::from_polar((0.5 * d.theta).sin(), d.phi),
                ],
            })
            .collect();
        Ok(Self {
            tensors,
            center: 0,
            truncation_error: 0.0,
        })
    }

    pub fn from_spins(spins: &[Spin]) -> Result<Self> {
        let mut state = Self::product(&vec![BlochDirection::from(Spin::Up); spins.len()])?;
        for (t, s) in state.tensors.iter_mut().zip(spins) {
            if *s == Spin::Down {
                t.data = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
            }
        }
        Ok(state)
    }

    pub fn neel(sites: usize) -> Result<Self> {
        Self::from_spins(&Spin::neel(sites))
    }

    /// Exact MPS of a dense state via successive SVDs (no truncation beyond
    /// numerically zero singular values).
    pub fn from_dense(psi: &StateVector) -> Result<Self> {
        let sites = psi.sites();
        let mut rest: Vec<C64> = psi.amplitudes().to_vec();
        let mut left = 1usize;
        let mut tensors = Vec::with_capacity(sites);
        for _ in 0..sites - 1 {
            let cols = rest.len() / (left * 2);
            let m = Mat::<C64>::from_fn(left * 2, cols, |i, j| rest[i * cols + j]);
            let svd = m
                .thin_svd()
                .map_err(|e| Error::Linalg(format!("SVD while building MPS: {e:?}")))?;
            let s = svd.S().column_vector();
            let keep = (0..s.nrows()).filter(|&k| s[k].re > 1e-15).count().max(1);
            let u = svd.U();
            tensors.push(SiteTensor {
                left,
                right: keep,
                data: (0..left * 2)
                    .flat_map(|i| (0..keep).map(move |k| (i, k)))
                    .map(|(i, k)| u[(i, k)])
                    .collect(),
            });
            let v = svd.V();
            rest = (0..keep)
                .flat_map(|k| (0..cols).map(move |j| (k, j)))
                .map(|(k, j)| s[k] * v[(j, k)].conj())
                .collect();
            left = keep;
        }
        tensors.push(SiteTensor {
            left,
            right: 1,
            data: rest,
        });
        Ok(Self {
            center: sites - 1,
            tensors,
            truncation_error: 0.0,
        })
    }

    pub fn sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    /// Cumulative discarded weight from all truncations so far.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// Dimensions of the `L - 1` internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.sites() - 1].iter().map(|t| t.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Norm read off the orthogonality center.
    pub fn norm(&self) -> f64 {
        self.tensors[self.center].norm_sqr().sqrt()
    }

    pub(crate) fn tensor(&self, site: usize) -> &SiteTensor {
        &self.tensors[site]
    }

    pub(crate) fn set_center(&mut self, c: usize) {
        self.center = c;
    }

    pub(crate) fn apply_local(&mut self, site: usize, op: &Mat2) {
        self.tensors[site].apply_local(op);
    }

    /// Shifts the orthogonality center to `target` with QR steps.
    pub fn move_center(&mut self, target: usize) -> Result<()> {
        assert!(target < self.sites(), "center target out of range");
        while self.center < target {
            self.shift_right()?;
        }
        while self.center > target {
            self.shift_left()?;
        }
        Ok(())
    }

    fn shift_right(&mut self) -> Result<()> {
        let i = self.center;
        let (dl, dr) = (self.tensors[i].left, self.tensors[i].right);
        let a = &self.tensors[i];
        let m = Mat::<C64>::from_fn(dl * 2, dr, |row, col| a.data[row * dr + col]);
        let qr = m.qr();
        let q = qr.compute_thin_Q();
        let r = qr.thin_R();
        let k = q.ncols();
        self.tensors[i] = SiteTensor {
            left: dl,
            right: k,
            data: (0..dl * 2)
                .flat_map(|row| (0..k).map(move |c| (row, c)))
                .map(|(row, c)| q[(row, c)])
                .collect(),
        };
        let next = &self.tensors[i + 1];
        let cols = 2 * next.right;
        let b = Mat::<C64>::from_fn(dr, cols, |row, col| next.data[row * cols + col]);
        let rb = r * &b;
        self.tensors[i + 1] = SiteTensor {
            left: k,
            right: next.right,
            data: (0..k)
                .flat_map(|row| (0..cols).map(move |c| (row, c)))
                .map(|(row, c)| rb[(row, c)])
                .collect(),
        };
        self.center = i + 1;
        Ok(())
    }

    fn shift_left(&mut self) -> Result<()> {
        let i = self.center;
        let (dl, dr) = (self.tensors[i].left, self.tensors[i].right);
        let a = &self.tensors[i];
        let cols = 2 * dr;
        // QR of A† gives A = R† Q†.
        let m = Mat::<C64>::from_fn(cols, dl, |row, col| a.data[col * cols + row].conj());
        let qr = m.qr();
        let q = qr.compute_thin_Q();
        let r = qr.thin_R();
        let k = q.ncols();
        self.tensors[i] = SiteTensor {
            left: k,
            right: dr,
            data: (0..k)
                .flat_map(|row| (0..cols).map(move |c| (row, c)))
                .map(|(row, c)| q[(c, row)].conj())
                .collect(),
        };
        let prev = &self.tensors[i - 1];
        let rows = prev.left * 2;
        let b = Mat::<C64>::from_fn(rows, dl, |row, col| prev.data[row * dl + col]);
        let br = &b * r.adjoint();
        self.tensors[i - 1] = SiteTensor {
            left: prev.left,
            right: k,
            data: (0..rows)
                .flat_map(|row| (0..k).map(move |c| (row, c)))
                .map(|(row, c)| br[(row, c)])
                .collect(),
        };
        self.center = i - 1;
        Ok(())
    }

    /// Two-site block `θ[(l, s1), (s2, r)]` on bond `(bond, bond + 1)`.
    pub(crate) fn two_site_block(&self, bond: usize) -> (usize, usize, Vec<C64>) {
        let a = &self.tensors[bond];
        let b = &self.tensors[bond + 1];
        let (dl, m, dr) = (a.left, a.right, b.right);
        let mut theta = vec![ZERO; dl * 4 * dr];
        for l in 0..dl {
            for s1 in 0..2 {
                for k in 0..m {
                    let x = a.at(l, s1, k);
                    if x == ZERO {
                        continue;
                    }
                    for s2 in 0..2 {
                        let row = ((l * 2 + s1) * 2 + s2) * dr;
                        let brow = (k * 2 + s2) * dr;
                        for r in 0..dr {
                            theta[row + r] += x * b.data[brow + r];
                        }
                    }
                }
            }
        }
        (dl, dr, theta)
    }

    /// Replaces sites `bond, bond + 1` by a truncated SVD of `theta`.
    ///
    /// Keeps at most `chi` singular values and drops those whose squared
    /// weight falls below `cutoff`; the kept spectrum is renormalized and the
    /// discarded weight is returned and accumulated.
    pub(crate) fn split_two_site(
        &mut self,
        bond: usize,
        dl: usize,
        dr: usize,
        theta: &[C64],
        chi: usize,
        cutoff: f64,
        absorb: Absorb,
    ) -> Result<Split> {
        let cols = 2 * dr;
        let m = Mat::<C64>::from_fn(dl * 2, cols, |i, j| theta[i * cols + j]);
        let svd = m
            .thin_svd()
            .map_err(|e| Error::Linalg(format!("SVD on bond {bond}: {e:?}")))?;
        let s = svd.S().column_vector();
        let weights: Vec<f64> = (0..s.nrows()).map(|k| s[k].re * s[k].re).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!("two-site block on bond {bond} has zero norm")));
        }
        let keep = weights
            .iter()
            .take(chi.max(1))
            .take_while(|w| **w / total >= cutoff)
            .count()
            .max(1);
        let kept: f64 = weights[..keep].iter().sum();
        let discarded = ((total - kept) / total).max(0.0);
        let scale = 1.0 / kept.sqrt();
        let sv: Vec<f64> = (0..keep).map(|k| s[k].re * scale).collect();
        let u = svd.U();
        let v = svd.V();
        let (lw, rw): (Vec<f64>, Vec<f64>) = match absorb {
            Absorb::Right => (vec![1.0; keep], sv),
            Absorb::Left => (sv, vec![1.0; keep]),
        };
        self.tensors[bond] = SiteTensor {
            left: dl,
            right: keep,
            data: (0..dl * 2)
                .flat_map(|i| (0..keep).map(move |k| (i, k)))
                .map(|(i, k)| u[(i, k)] * lw[k])
                .collect(),
        };
        self.tensors[bond + 1] = SiteTensor {
            left: keep,
            right: dr,
            data: (0..keep)
                .flat_map(|k| (0..cols).map(move |j| (k, j)))
                .map(|(k, j)| v[(j, k)].conj() * rw[k])
                .collect(),
        };
        self.center = match absorb {
            Absorb::Right => bond + 1,
            Absorb::Left => bond,
        };
        self.truncation_error += discarded;
        Ok(Split { discarded })
    }

    /// Applies a two-site gate on `(bond, bond + 1)`; the center must sit on
    /// one of the two sites.
    pub(crate) fn apply_gate(
        &mut self,
        bond: usize,
        gate: &Mat4,
        chi: usize,
        cutoff: f64,
        absorb: Absorb,
    ) -> Result<Split> {
        debug_assert!(self.center == bond || self.center == bond + 1);
        let (dl, dr, theta) = self.two_site_block(bond);
        let mut out = vec![ZERO; theta.len()];
        for l in 0..dl {
            for r in 0..dr {
                let idx = |s: usize| ((l * 2 + s / 2) * 2 + s % 2) * dr + r;
                let v = [theta[idx(0)], theta[idx(1)], theta[idx(2)], theta[idx(3)]];
                for (s, row) in gate.iter().enumerate() {
                    out[idx(s)] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
                }
            }
        }
        self.split_two_site(bond, dl, dr, &out, chi, cutoff, absorb)
    }

    /// One-spin reduced density matrix at `site` (moves the center there).
    pub fn single_site_density(&mut self, site: usize) -> Result<Mat2> {
        if site >= self.sites() {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.sites(),
            });
        }
        self.move_center(site)?;
        let a = &self.tensors[site];
        let mut rho = [[ZERO; 2]; 2];
        for l in 0..a.left {
            for r in 0..a.right {
                let x = [a.at(l, 0, r), a.at(l, 1, r)];
                for s in 0..2 {
                    for t in 0..2 {
                        rho[s][t] += x[s] * x[t].conj();
                    }
                }
            }
        }
        let trace = rho[0][0].re + rho[1][1].re;
        for x in rho.iter_mut().flatten() {
            *x /= trace;
        }
        Ok(rho)
    }

    pub fn bloch_vector(&mut self, site: usize) -> Result<BlochVector> {
        let rho = self.single_site_density(site)?;
        Ok(BlochVector::new(
            2.0 * rho[0][1].re,
            -2.0 * rho[0][1].im,
            rho[0][0].re - rho[1][1].re,
        ))
    }

    /// Full contraction into the dense site-0-major basis.
    pub fn contract_to_dense(&self, cap: usize) -> Result<StateVector> {
        check_capacity(self.sites(), cap)?;
        // acc[(prefix, bond)] with prefix the basis index of the sites so far.
        let mut acc = vec![C64::new(1.0, 0.0)];
        let mut width = 1usize;
        for t in &self.tensors {
            let prefixes = acc.len() / width;
            let mut next = vec![ZERO; prefixes * 2 * t.right];
            for p in 0..prefixes {
                for l in 0..t.left {
                    let x = acc[p * width + l];
                    if x == ZERO {
                        continue;
                    }
                    for s in 0..2 {
                        let row = (p * 2 + s) * t.right;
                        for r in 0..t.right {
                            next[row + r] += x * t.at(l, s, r);
                        }
                    }
                }
            }
            acc = next;
            width = t.right;
        }
        Ok(StateVector::from_raw(self.sites(), acc))
    }
}
