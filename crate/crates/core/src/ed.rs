//! Exact statevector dynamics for short chains.
//!
//! Dense states use site-0-major ordering: site `i` is bit `L - 1 - i` of the
//! basis index, and a clear bit is spin up (`Z = +1`). Time evolution goes
//! through one full Hermitian eigendecomposition of the dense Hamiltonian,
//! which is then reused for every time point, OTOC and ground-state query.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::mps::BlochVector;
use crate::ops::Mat2;
use crate::spin_model::{OperatorSum, Spin};

/// Largest chain the exact engine accepts by default (`2^12 = 4096` states).
pub const DEFAULT_ED_CAP: usize = 12;

const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub(crate) fn site_bit(sites: usize, site: usize) -> usize {
    1usize << (sites - 1 - site)
}

pub(crate) fn check_capacity(sites: usize, cap: usize) -> Result<()> {
    if sites > cap {
        return Err(Error::Capacity { sites, cap });
    }
    Ok(())
}

pub(crate) fn check_time_grid(times: &[f64]) -> Result<()> {
    if let Some(first) = times.first() {
        if *first < 0.0 || !first.is_finite() {
            return Err(Error::InvalidRequest(format!(
                "time grid must start at t >= 0, got {first}"
            )));
        }
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidRequest("time grid must be ascending".into()));
    }
    Ok(())
}

/// Normalized dense state of `sites` spins.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    sites: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized to within `1e-10`.
    pub fn from_amplitudes(sites: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << sites {
            return Err(Error::InvalidRequest(format!(
                "{} amplitudes do not describe {sites} spins",
                amps.len()
            )));
        }
        let state = Self { sites, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Numerical(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn normalized(sites: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(sites, amps)
    }

    /// Wraps amplitudes without checking the norm.
    pub(crate) fn from_raw(sites: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1usize << sites);
        Self { sites, amps }
    }

    pub fn basis(sites: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1usize << sites];
        amps[index] = C64::new(1.0, 0.0);
        Self { sites, amps }
    }

    pub fn product(spins: &[Spin]) -> Self {
        let sites = spins.len();
        let index = spins
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Spin::Down)
            .fold(0usize, |acc, (i, _)| acc | site_bit(sites, i));
        Self::basis(sites, index)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn expectation_z(&self, site: usize) -> f64 {
        let bit = site_bit(self.sites, site);
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }
}

pub fn neel_state(sites: usize) -> StateVector {
    StateVector::product(&Spin::neel(sites))
}

/// Reduced density matrix of a single spin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleSiteDensity {
    matrix: Mat2,
}

impl SingleSiteDensity {
    pub fn new(matrix: Mat2) -> Result<Self> {
        let defect = crate::ops::hermiticity_defect(&matrix);
        if defect > 1e-12 {
            return Err(Error::Numerical(format!(
                "density matrix is not Hermitian (defect {defect:e})"
            )));
        }
        let trace = matrix[0][0].re + matrix[1][1].re;
        if (trace - 1.0).abs() > 1e-12 {
            return Err(Error::Numerical(format!("density matrix trace {trace} is not 1")));
        }
        Ok(Self { matrix })
    }

    pub fn from_bloch(b: &BlochVector) -> Self {
        let half = |x: f64| C64::new(0.5 * x, 0.0);
        Self {
            matrix: [
                [half(1.0 + b.z), C64::new(0.5 * b.x, -0.5 * b.y)],
                [C64::new(0.5 * b.x, 0.5 * b.y), half(1.0 - b.z)],
            ],
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn bloch(&self) -> BlochVector {
        let m = &self.matrix;
        BlochVector::new(2.0 * m[0][1].re, -2.0 * m[0][1].im, m[0][0].re - m[1][1].re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.matrix[0][0].re;
        let d = self.matrix[1][1].re;
        let half_gap = (0.25 * (a - d) * (a - d) + self.matrix[0][1].norm_sqr()).sqrt();
        let mid = 0.5 * (a + d);
        [mid - half_gap, mid + half_gap]
    }
}

/// `-Σ λ ln λ` in nats, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &SingleSiteDensity) -> Result<f64> {
    let mut entropy = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < -1e-9 {
            return Err(Error::Numerical(format!(
                "density matrix has eigenvalue {lambda:e}"
            )));
        }
        let p = lambda.clamp(0.0, 1.0);
        if p > 0.0 {
            entropy -= p * p.ln();
        }
    }
    Ok(entropy)
}

/// Partial trace over every spin except `site`.
pub fn reduce_single_site(psi: &StateVector, site: usize) -> Result<SingleSiteDensity> {
    if site >= psi.sites {
        return Err(Error::SiteOutOfRange {
            site,
            sites: psi.sites,
        });
    }
    let bit = site_bit(psi.sites, site);
    let mut m = [[ZERO; 2]; 2];
    for (idx, up) in psi.amps.iter().enumerate() {
        if idx & bit != 0 {
            continue;
        }
        let down = psi.amps[idx | bit];
        m[0][0] += up.norm_sqr();
        m[1][1] += down.norm_sqr();
        m[0][1] += up * down.conj();
    }
    m[1][0] = m[0][1].conj();
    let trace = m[0][0].re + m[1][1].re;
    for x in m.iter_mut().flatten() {
        *x /= trace;
    }
    Ok(SingleSiteDensity { matrix: m })
}

enum Eigenvectors {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

/// Eigendecomposition `H = U diag(E) U†` of a dense Hamiltonian.
pub struct DenseEigensystem {
    sites: usize,
    energies: Vec<f64>,
    vectors: Eigenvectors,
}

impl std::fmt::Debug for DenseEigensystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseEigensystem")
            .field("sites", &self.sites)
            .field("ground_energy", &self.energies.first())
            .finish_non_exhaustive()
    }
}

impl DenseEigensystem {
    pub fn new(op: &OperatorSum) -> Result<Self> {
        Self::with_cap(op, DEFAULT_ED_CAP)
    }

    pub fn with_cap(op: &OperatorSum, cap: usize) -> Result<Self> {
        check_capacity(op.sites(), cap)?;
        let fail = |e| Error::Linalg(format!("dense eigendecomposition: {e:?}"));
        let (energies, vectors) = match op.dense_real() {
            Some(h) => {
                let eig = h.self_adjoint_eigen(Side::Lower).map_err(fail)?;
                let s = eig.S().column_vector();
                let energies = (0..s.nrows()).map(|i| s[i]).collect();
                (energies, Eigenvectors::Real(eig.U().to_owned()))
            }
            None => {
                let eig = op.dense().self_adjoint_eigen(Side::Lower).map_err(fail)?;
                let s = eig.S().column_vector();
                let energies = (0..s.nrows()).map(|i| s[i].re).collect();
                (energies, Eigenvectors::Complex(eig.U().to_owned()))
            }
        };
        Ok(Self {
            sites: op.sites(),
            energies,
            vectors,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Ascending eigenvalues.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvector `k` as a dense state.
    pub fn eigenstate(&self, k: usize) -> StateVector {
        let n = self.dim();
        let amps = match &self.vectors {
            Eigenvectors::Real(u) => (0..n).map(|i| C64::new(u[(i, k)], 0.0)).collect(),
            Eigenvectors::Complex(u) => (0..n).map(|i| u[(i, k)]).collect(),
        };
        StateVector {
            sites: self.sites,
            amps,
        }
    }

    pub fn ground_state(&self) -> (f64, StateVector) {
        (self.energies[0], self.eigenstate(0))
    }

    /// `U† ψ`
    fn to_eigenbasis(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.dim();
        match &self.vectors {
            Eigenvectors::Real(u) => {
                let v = Mat::<f64>::from_fn(n, 2, |i, j| if j == 0 { psi[i].re } else { psi[i].im });
                let c = u.transpose() * &v;
                (0..n).map(|k| C64::new(c[(k, 0)], c[(k, 1)])).collect()
            }
            Eigenvectors::Complex(u) => {
                let v = Mat::<C64>::from_fn(n, 1, |i, _| psi[i]);
                let c = u.adjoint() * &v;
                (0..n).map(|k| c[(k, 0)]).collect()
            }
        }
    }

    /// `ψ(t) = U e^{-iEt} U† ψ0` at every time in `times`.
    pub fn evolve(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        if psi0.sites != self.sites {
            return Err(Error::InvalidRequest(format!(
                "state has {} sites, Hamiltonian has {}",
                psi0.sites, self.sites
            )));
        }
        check_time_grid(times)?;
        let n = self.dim();
        let coeffs = self.to_eigenbasis(&psi0.amps);
        let mut out = Vec::with_capacity(times.len());
        // Batch the back-transformation so that it runs as a matrix product.
        const BATCH: usize = 64;
        for chunk in times.chunks(BATCH) {
            let phased = |k: usize, t: f64| coeffs[k] * C64::from_polar(1.0, -self.energies[k] * t);
            match &self.vectors {
                Eigenvectors::Real(u) => {
                    let m = Mat::<f64>::from_fn(n, 2 * chunk.len(), |k, j| {
                        let z = phased(k, chunk[j / 2]);
                        if j % 2 == 0 { z.re } else { z.im }
                    });
                    let psi = u * &m;
                    for j in 0..chunk.len() {
                        let amps = (0..n)
                            .map(|i| C64::new(psi[(i, 2 * j)], psi[(i, 2 * j + 1)]))
                            .collect();
                        out.push(StateVector {
                            sites: self.sites,
                            amps,
                        });
                    }
                }
                Eigenvectors::Complex(u) => {
                    let m = Mat::<C64>::from_fn(n, chunk.len(), |k, j| phased(k, chunk[j]));
                    let psi = u * &m;
                    for j in 0..chunk.len() {
                        out.push(StateVector {
                            sites: self.sites,
                            amps: (0..n).map(|i| psi[(i, j)]).collect(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Infinite-temperature OTOC `C(t) = Tr([W(t),V]†[W(t),V]) / 2^L` with
    /// `W = Z_w`, `V = Z_v`, for every `v` in `v_sites`. Returned as
    /// `values[v_index][time_index]`.
    ///
    /// `W(t)` is built once per time in the computational basis; since `V` is
    /// diagonal there, `C = (4/2^L) Σ_{a,b: v_a ≠ v_b} |W(t)_ab|²`.
    pub fn otoc(&self, w_site: usize, v_sites: &[usize], times: &[f64]) -> Result<Vec<Vec<f64>>> {
        for &site in std::iter::once(&w_site).chain(v_sites) {
            if site >= self.sites {
                return Err(Error::SiteOutOfRange {
                    site,
                    sites: self.sites,
                });
            }
        }
        if v_sites.contains(&w_site) {
            return Err(Error::InvalidRequest(
                "OTOC needs the W and V operators on distinct sites".into(),
            ));
        }
        check_time_grid(times)?;
        let n = self.dim();
        let sites = self.sites;
        let z = |site: usize, i: usize| -> f64 {
            if i & site_bit(sites, site) == 0 { 1.0 } else { -1.0 }
        };
        let weight = |w: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
            v_sites
                .iter()
                .map(|&v| {
                    let bit = site_bit(sites, v);
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            if (a ^ b) & bit != 0 {
                                acc += w(a, b);
                            }
                        }
                    }
                    4.0 * acc / n as f64
                })
                .collect()
        };

        let mut values = vec![Vec::with_capacity(times.len()); v_sites.len()];
        match &self.vectors {
            Eigenvectors::Real(u) => {
                let zu = Mat::<f64>::from_fn(n, n, |i, k| z(w_site, i) * u[(i, k)]);
                let w_eig = u.transpose() * &zu;
                drop(zu);
                for &t in times {
                    let phase: Vec<C64> =
                        self.energies.iter().map(|e| C64::from_polar(1.0, e * t)).collect();
                    let mut re = Mat::<f64>::zeros(n, n);
                    let mut im = Mat::<f64>::zeros(n, n);
                    for col in 0..n {
                        for row in 0..n {
                            let p = phase[row] * phase[col].conj() * w_eig[(row, col)];
                            re[(row, col)] = p.re;
                            im[(row, col)] = p.im;
                        }
                    }
                    let x = u * (&re * u.transpose());
                    let y = u * (&im * u.transpose());
                    let c = weight(&|a, b| x[(a, b)] * x[(a, b)] + y[(a, b)] * y[(a, b)]);
                    for (series, value) in values.iter_mut().zip(c) {
                        series.push(value);
                    }
                }
            }
            Eigenvectors::Complex(u) => {
                let zu = Mat::<C64>::from_fn(n, n, |i, k| u[(i, k)] * z(w_site, i));
                let w_eig = u.adjoint() * &zu;
                drop(zu);
                for &t in times {
                    let phase: Vec<C64> =
                        self.energies.iter().map(|e| C64::from_polar(1.0, e * t)).collect();
                    let p = Mat::<C64>::from_fn(n, n, |r, c| phase[r] * phase[c].conj() * w_eig[(r, c)]);
                    let wt = u * (&p * u.adjoint());
                    let c = weight(&|a, b| wt[(a, b)].norm_sqr());
                    for (series, value) in values.iter_mut().zip(c) {
                        series.push(value);
                    }
                }
            }
        }
        Ok(values)
    }
}

/// Exact evolution of `psi0` under `op` at every time in `times`.
pub fn evolve(op: &OperatorSum, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    DenseEigensystem::new(op)?.evolve(psi0, times)
}

/// OTOC of `Z_w` and `Z_v` at infinite temperature.
pub fn otoc(op: &OperatorSum, w_site: usize, v_site: usize, times: &[f64]) -> Result<Vec<f64>> {
    let mut values = DenseEigensystem::new(op)?.otoc(w_site, &[v_site], times)?;
    Ok(values.remove(0))
}

/// Lowest eigenpair of the dense Hamiltonian.
pub fn ground_state_dense(op: &OperatorSum) -> Result<(f64, StateVector)> {
    Ok(DenseEigensystem::new(op)?.ground_state())
}
