//! Two-site DMRG ground-state search.

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Absorb, BlochDirection, MpsState, SiteTensor};
use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpair, LanczosOptions};
use crate::ops::{self, Mat2};
use crate::spin_model::OperatorSum;

const ZERO: C64 = C64::new(0.0, 0.0);

/// One MPO site tensor `W[a, b][s, s']`, stored as `((a * right + b) * 2 + s) * 2 + s'`.
#[derive(Clone, Debug)]
struct MpoTensor {
    left: usize,
    right: usize,
    data: Vec<C64>,
}

impl MpoTensor {
    fn zeros(left: usize, right: usize) -> Self {
        Self {
            left,
            right,
            data: vec![ZERO; left * right * 4],
        }
    }

    fn set(&mut self, a: usize, b: usize, op: &Mat2) {
        for s in 0..2 {
            for t in 0..2 {
                self.data[((a * self.right + b) * 2 + s) * 2 + t] += op[s][t];
            }
        }
    }

    #[inline]
    fn at(&self, a: usize, b: usize, s: usize, t: usize) -> C64 {
        self.data[((a * self.right + b) * 2 + s) * 2 + t]
    }
}

/// Matrix product operator of a nearest-neighbour [`OperatorSum`].
///
/// Virtual index 0 means "no term placed yet", the last index means "term
/// completed", and the indices in between carry the operator-Schmidt
/// channels of the two-site block on that bond.
#[derive(Clone, Debug)]
pub struct Mpo {
    tensors: Vec<MpoTensor>,
}

impl Mpo {
    pub fn from_operator_sum(op: &OperatorSum) -> Result<Self> {
        let l = op.sites();
        if l < 2 {
            return Err(Error::InvalidRequest("an MPO needs at least two sites".into()));
        }
        let (singles, pairs) = op.local_blocks();
        // Operator-Schmidt decomposition: h = Σ_k A_k ⊗ B_k.
        let mut channels: Vec<Vec<(Mat2, Mat2)>> = Vec::with_capacity(l - 1);
        for block in &pairs {
            if ops::is_zero(block) {
                channels.push(Vec::new());
                continue;
            }
            let m = Mat::<C64>::from_fn(4, 4, |p, q| {
                let (s1, t1) = (p / 2, p % 2);
                let (s2, t2) = (q / 2, q % 2);
                block[2 * s1 + s2][2 * t1 + t2]
            });
            let svd = m
                .thin_svd()
                .map_err(|e| Error::Linalg(format!("operator-Schmidt SVD: {e:?}")))?;
            let s = svd.S().column_vector();
            let (u, v) = (svd.U(), svd.V());
            let mut terms = Vec::new();
            for k in 0..4 {
                let sk = s[k].re;
                if sk <= 1e-14 * s[0].re.max(1e-300) {
                    continue;
                }
                let a: Mat2 = [[u[(0, k)] * sk, u[(1, k)] * sk], [u[(2, k)] * sk, u[(3, k)] * sk]];
                let b: Mat2 = [
                    [v[(0, k)].conj(), v[(1, k)].conj()],
                    [v[(2, k)].conj(), v[(3, k)].conj()],
                ];
                terms.push((a, b));
            }
            channels.push(terms);
        }
        let bond_dim = |b: usize| 2 + channels[b].len();
        let mut tensors = Vec::with_capacity(l);
        for i in 0..l {
            let left = if i == 0 { 1 } else { bond_dim(i - 1) };
            let right = if i == l - 1 { 1 } else { bond_dim(i) };
            let start_l = 0;
            let done_r = right - 1;
            let mut w = MpoTensor::zeros(left, right);
            if i < l - 1 {
                w.set(start_l, 0, &ops::IDENTITY);
                for (k, (a, _)) in channels[i].iter().enumerate() {
                    w.set(start_l, 1 + k, a);
                }
            }
            w.set(start_l, done_r, &singles[i]);
            if i > 0 {
                let done_l = left - 1;
                for (k, (_, b)) in channels[i - 1].iter().enumerate() {
                    w.set(1 + k, done_r, b);
                }
                w.set(done_l, done_r, &ops::IDENTITY);
            }
            tensors.push(w);
        }
        Ok(Self { tensors })
    }

    pub fn sites(&self) -> usize {
        self.tensors.len()
    }

    /// Dense matrix of the MPO (small chains only).
    pub fn to_dense(&self) -> Mat<C64> {
        // acc[(row_prefix, col_prefix, bond)]
        let mut acc = vec![C64::new(1.0, 0.0)];
        let mut dim = 1usize;
        for w in &self.tensors {
            let nd = dim * 2;
            let mut next = vec![ZERO; nd * nd * w.right];
            for r in 0..dim {
                for c in 0..dim {
                    for a in 0..w.left {
                        let x = acc[(r * dim + c) * w.left + a];
                        if x == ZERO {
                            continue;
                        }
                        for b in 0..w.right {
                            for s in 0..2 {
                                for t in 0..2 {
                                    let y = w.at(a, b, s, t);
                                    if y != ZERO {
                                        next[((r * 2 + s) * nd + c * 2 + t) * w.right + b] += x * y;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            acc = next;
            dim = nd;
        }
        Mat::from_fn(dim, dim, |r, c| acc[r * dim + c])
    }
}

/// Environment block `E[a, w, a']` (bra bond, MPO bond, ket bond); bra and ket bonds agree.
#[derive(Clone, Debug)]
struct Env {
    mpo: usize,
    ket: usize,
    data: Vec<C64>,
}

impl Env {
    fn trivial() -> Self {
        Self {
            mpo: 1,
            ket: 1,
            data: vec![C64::new(1.0, 0.0)],
        }
    }

    #[inline]
    fn at(&self, a: usize, w: usize, k: usize) -> C64 {
        self.data[(a * self.mpo + w) * self.ket + k]
    }
}

fn extend_left(env: &Env, a: &SiteTensor, w: &MpoTensor) -> Env {
    let (dl, dr) = (a.left, a.right);
    // t1[a, w, s', b'] = Σ_{a'} E[a, w, a'] A[a', s', b']
    let mut t1 = vec![ZERO; dl * w.left * 2 * dr];
    for x in 0..dl {
        for m in 0..w.left {
            for y in 0..dl {
                let e = env.at(x, m, y);
                if e == ZERO {
                    continue;
                }
                for s in 0..2 {
                    let base = ((x * w.left + m) * 2 + s) * dr;
                    for b in 0..dr {
                        t1[base + b] += e * a.at(y, s, b);
                    }
                }
            }
        }
    }
    // t2[a, s, w', b'] = Σ_{w, s'} W[w, w'][s, s'] t1[a, w, s', b']
    let mut t2 = vec![ZERO; dl * 2 * w.right * dr];
    for x in 0..dl {
        for m in 0..w.left {
            for n in 0..w.right {
                for s in 0..2 {
                    for t in 0..2 {
                        let op = w.at(m, n, s, t);
                        if op == ZERO {
                            continue;
                        }
                        let src = ((x * w.left + m) * 2 + t) * dr;
                        let dst = ((x * 2 + s) * w.right + n) * dr;
                        for b in 0..dr {
                            t2[dst + b] += op * t1[src + b];
                        }
                    }
                }
            }
        }
    }
    // out[b, w', b'] = Σ_{a, s} conj(A[a, s, b]) t2[a, s, w', b']
    let mut data = vec![ZERO; dr * w.right * dr];
    for x in 0..dl {
        for s in 0..2 {
            for b in 0..dr {
                let c = a.at(x, s, b).conj();
                if c == ZERO {
                    continue;
                }
                for n in 0..w.right {
                    let src = ((x * 2 + s) * w.right + n) * dr;
                    let dst = (b * w.right + n) * dr;
                    for bp in 0..dr {
                        data[dst + bp] += c * t2[src + bp];
                    }
                }
            }
        }
    }
    Env {
        mpo: w.right,
        ket: dr,
        data,
    }
}

fn extend_right(env: &Env, a: &SiteTensor, w: &MpoTensor) -> Env {
    let (dl, dr) = (a.left, a.right);
    // t1[a', s', w', b] = Σ_{b'} A[a', s', b'] E[b, w', b']
    let mut t1 = vec![ZERO; dl * 2 * w.right * dr];
    for y in 0..dl {
        for t in 0..2 {
            for n in 0..w.right {
                for b in 0..dr {
                    let mut acc = ZERO;
                    for bp in 0..dr {
                        acc += a.at(y, t, bp) * env.at(b, n, bp);
                    }
                    t1[((y * 2 + t) * w.right + n) * dr + b] = acc;
                }
            }
        }
    }
    // t2[a', s, w, b] = Σ_{w', s'} W[w, w'][s, s'] t1[a', s', w', b]
    let mut t2 = vec![ZERO; dl * 2 * w.left * dr];
    for y in 0..dl {
        for m in 0..w.left {
            for n in 0..w.right {
                for s in 0..2 {
                    for t in 0..2 {
                        let op = w.at(m, n, s, t);
                        if op == ZERO {
                            continue;
                        }
                        let src = ((y * 2 + t) * w.right + n) * dr;
                        let dst = ((y * 2 + s) * w.left + m) * dr;
                        for b in 0..dr {
                            t2[dst + b] += op * t1[src + b];
                        }
                    }
                }
            }
        }
    }
    // out[a, w, a'] = Σ_{s, b} conj(A[a, s, b]) t2[a', s, w, b]
    let mut data = vec![ZERO; dl * w.left * dl];
    for x in 0..dl {
        for m in 0..w.left {
            for y in 0..dl {
                let mut acc = ZERO;
                for s in 0..2 {
                    let src = ((y * 2 + s) * w.left + m) * dr;
                    for b in 0..dr {
                        acc += a.at(x, s, b).conj() * t2[src + b];
                    }
                }
                data[(x * w.left + m) * dl + y] = acc;
            }
        }
    }
    Env {
        mpo: w.left,
        ket: dl,
        data,
    }
}

/// `H_eff θ` for the two-site block `θ[a, s1, s2, b]`.
fn apply_two_site(
    left: &Env,
    w1: &MpoTensor,
    w2: &MpoTensor,
    right: &Env,
    theta: &[C64],
) -> Vec<C64> {
    let (dl, dr) = (left.ket, right.ket);
    let (ml, mm, mr) = (w1.left, w1.right, w2.right);
    // t1[a, w, s1', s2', b'] = Σ_{a'} L[a, w, a'] θ[a', s1', s2', b']
    let blk = 4 * dr;
    let mut t1 = vec![ZERO; dl * ml * blk];
    for x in 0..dl {
        for m in 0..ml {
            let dst = (x * ml + m) * blk;
            for y in 0..dl {
                let e = left.at(x, m, y);
                if e == ZERO {
                    continue;
                }
                let src = y * blk;
                for k in 0..blk {
                    t1[dst + k] += e * theta[src + k];
                }
            }
        }
    }
    // t2[a, s1, w1, s2', b'] = Σ_{w, s1'} W1[w, w1][s1, s1'] t1[a, w, s1', s2', b']
    let half = 2 * dr;
    let mut t2 = vec![ZERO; dl * 2 * mm * half];
    for x in 0..dl {
        for m in 0..ml {
            for n in 0..mm {
                for s in 0..2 {
                    for t in 0..2 {
                        let op = w1.at(m, n, s, t);
                        if op == ZERO {
                            continue;
                        }
                        let src = (x * ml + m) * blk + t * half;
                        let dst = ((x * 2 + s) * mm + n) * half;
                        for k in 0..half {
                            t2[dst + k] += op * t1[src + k];
                        }
                    }
                }
            }
        }
    }
    // t3[a, s1, s2, w2, b'] = Σ_{w1, s2'} W2[w1, w2][s2, s2'] t2[a, s1, w1, s2', b']
    let mut t3 = vec![ZERO; dl * 4 * mr * dr];
    for xs in 0..dl * 2 {
        for n in 0..mm {
            for o in 0..mr {
                for s in 0..2 {
                    for t in 0..2 {
                        let op = w2.at(n, o, s, t);
                        if op == ZERO {
                            continue;
                        }
                        let src = (xs * mm + n) * half + t * dr;
                        let dst = ((xs * 2 + s) * mr + o) * dr;
                        for k in 0..dr {
                            t3[dst + k] += op * t2[src + k];
                        }
                    }
                }
            }
        }
    }
    // out[a, s1, s2, b] = Σ_{w2, b'} t3[a, s1, s2, w2, b'] R[b, w2, b']
    let mut out = vec![ZERO; dl * 4 * dr];
    for xss in 0..dl * 4 {
        for o in 0..mr {
            let src = (xss * mr + o) * dr;
            for b in 0..dr {
                let mut acc = ZERO;
                for bp in 0..dr {
                    acc += t3[src + bp] * right.at(b, o, bp);
                }
                out[xss * dr + b] += acc;
            }
        }
    }
    out
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_sweeps() -> usize {
    100
}

fn default_warmup_sweeps() -> usize {
    2
}

fn default_warmup_chi() -> usize {
    16
}

fn default_seed() -> u64 {
    0x5EED_D4A6
}

fn default_dmrg_cutoff() -> f64 {
    1e-14
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmrgConfig {
    pub chi: usize,
    /// Converged once `|ΔE|` between consecutive full sweeps drops below this.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_warmup_sweeps")]
    pub warmup_sweeps: usize,
    #[serde(default = "default_warmup_chi")]
    pub warmup_chi: usize,
    /// Seed of the random product initial state.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_dmrg_cutoff")]
    pub svd_cutoff: f64,
}

impl DmrgConfig {
    pub fn new(chi: usize) -> Self {
        Self {
            chi,
            tol: default_tol(),
            max_sweeps: default_max_sweeps(),
            warmup_sweeps: default_warmup_sweeps(),
            warmup_chi: default_warmup_chi(),
            seed: default_seed(),
            svd_cutoff: default_dmrg_cutoff(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DmrgResult {
    pub energy: f64,
    pub state: MpsState,
    pub converged: bool,
    pub sweeps: usize,
    /// Largest discarded weight of any split in the final sweep.
    pub truncation_error: f64,
}

pub fn dmrg_ground_state(op: &OperatorSum, chi: usize, convergence_tol: f64) -> Result<DmrgResult> {
    dmrg_with_config(
        op,
        &DmrgConfig {
            tol: convergence_tol,
            ..DmrgConfig::new(chi)
        },
    )
}

pub fn dmrg_with_config(op: &OperatorSum, cfg: &DmrgConfig) -> Result<DmrgResult> {
    if cfg.chi < 1 {
        return Err(Error::InvalidRequest("bond dimension chi must be >= 1".into()));
    }
    let l = op.sites();
    let mpo = Mpo::from_operator_sum(op)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs: Vec<BlochDirection> = (0..l)
        .map(|_| BlochDirection {
            theta: rng.gen_range(0.2..std::f64::consts::PI - 0.2),
            phi: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
        })
        .collect();
    let mut state = MpsState::product(&dirs)?;

    let mut left_env: Vec<Env> = vec![Env::trivial(); l + 1];
    let mut right_env: Vec<Env> = vec![Env::trivial(); l + 1];
    for i in (1..l).rev() {
        right_env[i] = extend_right(&right_env[i + 1], state.tensor(i), &mpo.tensors[i]);
    }

    let lanczos = LanczosOptions {
        krylov_dim: 30,
        max_restarts: 30,
        tol: 1e-10,
    };
    let mut previous: Option<f64> = None;
    let mut energy = f64::INFINITY;
    let mut converged = false;
    let mut sweeps = 0;
    let mut sweep_trunc = 0.0f64;

    let optimize = |state: &mut MpsState,
                        left_env: &[Env],
                        right_env: &[Env],
                        bond: usize,
                        chi: usize,
                        absorb: Absorb|
     -> Result<(f64, f64)> {
        let (dl, dr, theta) = state.two_site_block(bond);
        let (w1, w2) = (&mpo.tensors[bond], &mpo.tensors[bond + 1]);
        let (le, re) = (&left_env[bond], &right_env[bond + 2]);
        let (e, vec) = lowest_eigenpair(|v| apply_two_site(le, w1, w2, re, v), &theta, lanczos)?;
        let split = state.split_two_site(bond, dl, dr, &vec, chi, cfg.svd_cutoff, absorb)?;
        Ok((e, split.discarded))
    };

    while sweeps < cfg.max_sweeps {
        let chi = if sweeps < cfg.warmup_sweeps {
            cfg.warmup_chi.min(cfg.chi)
        } else {
            cfg.chi
        };
        sweep_trunc = 0.0;
        for bond in 0..l - 1 {
            let (e, w) = optimize(&mut state, &left_env, &right_env, bond, chi, Absorb::Right)?;
            energy = e;
            sweep_trunc = sweep_trunc.max(w);
            left_env[bond + 1] = extend_left(&left_env[bond], state.tensor(bond), &mpo.tensors[bond]);
        }
        for bond in (0..l - 1).rev() {
            let (e, w) = optimize(&mut state, &left_env, &right_env, bond, chi, Absorb::Left)?;
            energy = e;
            sweep_trunc = sweep_trunc.max(w);
            right_env[bond + 1] =
                extend_right(&right_env[bond + 2], state.tensor(bond + 1), &mpo.tensors[bond + 1]);
        }
        sweeps += 1;
        if sweeps > cfg.warmup_sweeps {
            if let Some(prev) = previous {
                if (energy - prev).abs() < cfg.tol {
                    converged = true;
                    break;
                }
            }
            previous = Some(energy);
        }
    }
    state.set_center(0);
    Ok(DmrgResult {
        energy,
        state,
        converged,
        sweeps,
        truncation_error: sweep_trunc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed;
    use crate::spin_model::{build_frozen_hamiltonian, build_hamiltonian, HamiltonianSpec};

    #[test]
    fn mpo_matches_dense_hamiltonian() {
        for op in [
            build_hamiltonian(&HamiltonianSpec::chaotic(5)).unwrap(),
            build_frozen_hamiltonian(&HamiltonianSpec::chaotic(5), 2).unwrap(),
            build_hamiltonian(&HamiltonianSpec::new(4, 0.0, 1.0, 0.2).unwrap()).unwrap(),
        ] {
            let a = Mpo::from_operator_sum(&op).unwrap().to_dense();
            let b = op.dense();
            let mut worst = 0.0f64;
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
                }
            }
            assert!(worst < 1e-13, "MPO differs by {worst}");
        }
    }

    #[test]
    fn two_site_classical_ground_energy() {
        let op = build_hamiltonian(&HamiltonianSpec::new(2, 1.0, 0.0, 0.0).unwrap()).unwrap();
        let res = dmrg_ground_state(&op, 4, 1e-10).unwrap();
        assert!((res.energy + 1.0).abs() < 1e-10);
        assert!(res.converged);
    }

    #[test]
    fn small_chain_matches_dense() {
        let op = build_hamiltonian(&HamiltonianSpec::chaotic(6)).unwrap();
        let res = dmrg_ground_state(&op, 16, 1e-12).unwrap();
        let (e0, psi) = ed::ground_state_dense(&op).unwrap();
        assert!((res.energy - e0).abs() < 1e-9);
        let dense = res.state.contract_to_dense(12).unwrap();
        assert!((dense.norm() - 1.0).abs() < 1e-10);
        assert!((dense.fidelity(&psi) - 1.0).abs() < 1e-8);
        assert!((op.expectation(dense.amplitudes()) - e0).abs() < 1e-9);
    }
}
