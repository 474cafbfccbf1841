//! Mixed-field Ising chain with open boundaries,
//! `H = -J Σ Z_i Z_{i+1} - B Σ X_i - h_z Σ Z_i`,
//! its frozen-site variants, and the analytic velocity scales.

use std::f64::consts::{E, PI};

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::{self, Mat2, Mat4};

/// Parameters of the open mixed-field Ising chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J", default = "default_coupling")]
    pub coupling: f64,
    #[serde(rename = "B")]
    pub transverse: f64,
    #[serde(rename = "hz", default)]
    pub longitudinal: f64,
}

fn default_coupling() -> f64 {
    1.0
}

impl HamiltonianSpec {
    pub fn new(sites: usize, coupling: f64, transverse: f64, longitudinal: f64) -> Result<Self> {
        let spec = Self {
            sites,
            coupling,
            transverse,
            longitudinal,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `J = 1, B = 0.8, h_z = 0.5`.
    pub fn chaotic(sites: usize) -> Self {
        Self {
            sites,
            coupling: 1.0,
            transverse: 0.8,
            longitudinal: 0.5,
        }
    }

    /// `J = 1, B = 0.8, h_z = 0`.
    pub fn integrable(sites: usize) -> Self {
        Self {
            longitudinal: 0.0,
            ..Self::chaotic(sites)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidSpec(format!(
                "chain needs at least 2 sites, got {}",
                self.sites
            )));
        }
        for (name, v) in [
            ("J", self.coupling),
            ("B", self.transverse),
            ("hz", self.longitudinal),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    pub fn is_integrable(&self) -> bool {
        self.longitudinal == 0.0
    }

    pub fn with_longitudinal(&self, longitudinal: f64) -> Self {
        Self {
            longitudinal,
            ..*self
        }
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.sites,
            });
        }
        Ok(())
    }
}

/// Z-basis orientation of one spin; `Up` is the `Z = +1` state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn z(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    /// `|↑↓↑↓…⟩`
    pub fn neel(sites: usize) -> Vec<Spin> {
        (0..sites)
            .map(|i| if i % 2 == 0 { Spin::Up } else { Spin::Down })
            .collect()
    }

    /// Parses a pattern such as `"uudu"` (also accepts `↑`/`↓` and `0`/`1`).
    pub fn parse_pattern(pattern: &str) -> Result<Vec<Spin>> {
        pattern
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'u' | 'U' | '↑' | '0' => Ok(Spin::Up),
                'd' | 'D' | '↓' | '1' => Ok(Spin::Down),
                other => Err(Error::InvalidRequest(format!(
                    "unknown spin symbol {other:?} in pattern {pattern:?}"
                ))),
            })
            .collect()
    }
}

/// One local term of an [`OperatorSum`].
#[derive(Clone, Debug, PartialEq)]
pub enum LocalTerm {
    Site { site: usize, block: Mat2 },
    /// Acts on the adjacent pair `(left, left + 1)`.
    Bond { left: usize, block: Mat4 },
}

impl LocalTerm {
    pub fn support(&self) -> Vec<usize> {
        match *self {
            LocalTerm::Site { site, .. } => vec![site],
            LocalTerm::Bond { left, .. } => vec![left, left + 1],
        }
    }

    pub fn touches(&self, site: usize) -> bool {
        match *self {
            LocalTerm::Site { site: s, .. } => s == site,
            LocalTerm::Bond { left, .. } => left == site || left + 1 == site,
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        match self {
            LocalTerm::Site { block, .. } => ops::hermiticity_defect(block),
            LocalTerm::Bond { block, .. } => ops::hermiticity_defect(block),
        }
    }

    fn is_real(&self) -> bool {
        match self {
            LocalTerm::Site { block, .. } => ops::is_real(block),
            LocalTerm::Bond { block, .. } => ops::is_real(block),
        }
    }
}

/// Nearest-neighbour Hamiltonian as an ordered list of local terms.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum {
    sites: usize,
    terms: Vec<LocalTerm>,
}

impl OperatorSum {
    pub fn new(sites: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        for term in &terms {
            let last = *term.support().last().expect("support is never empty");
            if last >= sites {
                return Err(Error::SiteOutOfRange { site: last, sites });
            }
            let defect = term.hermiticity_defect();
            if defect > 1e-12 {
                return Err(Error::InvalidSpec(format!(
                    "term on sites {:?} is not Hermitian (defect {defect:e})",
                    term.support()
                )));
            }
        }
        Ok(Self { sites, terms })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(LocalTerm::is_real)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(LocalTerm::hermiticity_defect)
            .fold(0.0, f64::max)
    }

    /// Drops every term whose support contains `site`.
    pub fn without_site(&self, site: usize) -> Result<Self> {
        if site >= self.sites {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.sites,
            });
        }
        Ok(Self {
            sites: self.sites,
            terms: self
                .terms
                .iter()
                .filter(|t| !t.touches(site))
                .cloned()
                .collect(),
        })
    }

    /// Sum of one-site blocks per site and two-site blocks per bond.
    pub fn local_blocks(&self) -> (Vec<Mat2>, Vec<Mat4>) {
        let zero2 = [[C64::new(0.0, 0.0); 2]; 2];
        let zero4 = [[C64::new(0.0, 0.0); 4]; 4];
        let mut singles = vec![zero2; self.sites];
        let mut bonds = vec![zero4; self.sites.saturating_sub(1)];
        for term in &self.terms {
            match term {
                LocalTerm::Site { site, block } => singles[*site] = ops::add2(&singles[*site], block),
                LocalTerm::Bond { left, block } => bonds[*left] = ops::add4(&bonds[*left], block),
            }
        }
        (singles, bonds)
    }

    /// `H |ψ⟩` applied term by term on a dense site-0-major vector.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.sites;
        assert_eq!(psi.len(), 1usize << n, "state dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for term in &self.terms {
            match term {
                LocalTerm::Site { site, block } => {
                    let bit = 1usize << (n - 1 - site);
                    for idx in 0..psi.len() {
                        if idx & bit != 0 {
                            continue;
                        }
                        let (a0, a1) = (psi[idx], psi[idx | bit]);
                        out[idx] += block[0][0] * a0 + block[0][1] * a1;
                        out[idx | bit] += block[1][0] * a0 + block[1][1] * a1;
                    }
                }
                LocalTerm::Bond { left, block } => {
                    let hi = 1usize << (n - 1 - left);
                    let lo = 1usize << (n - 2 - left);
                    for idx in 0..psi.len() {
                        if idx & (hi | lo) != 0 {
                            continue;
                        }
                        let ids = [idx, idx | lo, idx | hi, idx | hi | lo];
                        let amps = ids.map(|i| psi[i]);
                        for (r, &row_idx) in ids.iter().enumerate() {
                            let mut acc = C64::new(0.0, 0.0);
                            for c in 0..4 {
                                acc += block[r][c] * amps[c];
                            }
                            out[row_idx] += acc;
                        }
                    }
                }
            }
        }
        out
    }

    /// Dense `2^L x 2^L` matrix.
    pub fn dense(&self) -> Mat<C64> {
        let dim = 1usize << self.sites;
        let mut m = Mat::<C64>::zeros(dim, dim);
        let mut basis = vec![C64::new(0.0, 0.0); dim];
        for col in 0..dim {
            basis[col] = C64::new(1.0, 0.0);
            let image = self.apply(&basis);
            for (row, v) in image.iter().enumerate() {
                m[(row, col)] = *v;
            }
            basis[col] = C64::new(0.0, 0.0);
        }
        m
    }

    /// Dense real matrix, when every block is real.
    pub fn dense_real(&self) -> Option<Mat<f64>> {
        if !self.is_real() {
            return None;
        }
        let c = self.dense();
        Some(Mat::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)].re))
    }

    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let h_psi = self.apply(psi);
        psi.iter()
            .zip(&h_psi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<OperatorSum> {
    spec.validate()?;
    let l = spec.sites;
    let mut terms = Vec::with_capacity(3 * l);
    if spec.coupling != 0.0 {
        let zz = ops::scale4(&ops::kron(&ops::PAULI_Z, &ops::PAULI_Z), -spec.coupling);
        terms.extend((0..l - 1).map(|left| LocalTerm::Bond { left, block: zz }));
    }
    if spec.transverse != 0.0 {
        let x = ops::scale2(&ops::PAULI_X, -spec.transverse);
        terms.extend((0..l).map(|site| LocalTerm::Site { site, block: x }));
    }
    if spec.longitudinal != 0.0 {
        let z = ops::scale2(&ops::PAULI_Z, -spec.longitudinal);
        terms.extend((0..l).map(|site| LocalTerm::Site { site, block: z }));
    }
    OperatorSum::new(l, terms)
}

/// Hamiltonian with every term acting on `frozen_site` removed.
pub fn build_frozen_hamiltonian(spec: &HamiltonianSpec, frozen_site: usize) -> Result<OperatorSum> {
    spec.check_site(frozen_site)?;
    build_hamiltonian(spec)?.without_site(frozen_site)
}

/// Free-fermion dispersion of the transverse-field chain.
pub fn dispersion(coupling: f64, transverse: f64, k: f64) -> f64 {
    let arg = coupling * coupling + transverse * transverse - 2.0 * coupling * transverse * k.cos();
    2.0 * arg.max(0.0).sqrt()
}

/// Characteristic velocities of the chain and their derived timescales.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityTable {
    /// `2 e J`
    pub lieb_robinson: f64,
    /// `2 min(J, B)`
    pub max_group: f64,
}

impl VelocityTable {
    pub fn t_lr(&self, distance: f64) -> f64 {
        distance / self.lieb_robinson
    }

    pub fn t_max(&self, distance: f64) -> f64 {
        distance / self.max_group
    }

    pub fn t_scr(&self, sites: usize) -> f64 {
        sites as f64 / self.max_group
    }
}

pub fn velocity_table(spec: &HamiltonianSpec) -> VelocityTable {
    let (j, b) = (spec.coupling.abs(), spec.transverse.abs());
    VelocityTable {
        lieb_robinson: 2.0 * E * j,
        max_group: 2.0 * j.min(b),
    }
}

/// Maximum of `|dε/dk|` over a uniform grid on `[0, π]`, by central differences.
pub fn numeric_max_group_velocity(coupling: f64, transverse: f64, points: usize) -> f64 {
    let h = 1e-6;
    (0..points)
        .map(|i| {
            let k = PI * i as f64 / (points - 1) as f64;
            ((dispersion(coupling, transverse, k + h) - dispersion(coupling, transverse, k - h))
                / (2.0 * h))
                .abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_chain() {
        assert!(HamiltonianSpec::new(1, 1.0, 0.8, 0.5).is_err());
        assert!(HamiltonianSpec::new(4, f64::NAN, 0.8, 0.5).is_err());
        assert!(build_hamiltonian(&HamiltonianSpec::chaotic(1)).is_err());
    }

    #[test]
    fn term_counts() {
        let two = build_hamiltonian(&HamiltonianSpec::new(2, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(two.len(), 1);
        match &two.terms()[0] {
            LocalTerm::Bond { left, block } => {
                assert_eq!(*left, 0);
                assert_eq!(block[0][0], C64::new(-1.0, 0.0));
                assert_eq!(block[1][1], C64::new(1.0, 0.0));
            }
            other => panic!("unexpected term {other:?}"),
        }

        let spec = HamiltonianSpec::chaotic(12);
        assert_eq!(build_hamiltonian(&spec).unwrap().len(), 35);
        assert_eq!(build_frozen_hamiltonian(&spec, 5).unwrap().len(), 31);
        assert_eq!(build_frozen_hamiltonian(&spec, 0).unwrap().len(), 32);
        assert_eq!(build_frozen_hamiltonian(&spec, 11).unwrap().len(), 32);
        assert!(matches!(
            build_frozen_hamiltonian(&spec, 12),
            Err(Error::SiteOutOfRange { site: 12, sites: 12 })
        ));
    }

    #[test]
    fn integrable_flag_matches_z_terms() {
        for spec in [HamiltonianSpec::chaotic(6), HamiltonianSpec::integrable(6)] {
            let h = build_hamiltonian(&spec).unwrap();
            let has_z_field = h.terms().iter().any(|t| {
                matches!(t, LocalTerm::Site { block, .. } if block[0][0].re != 0.0)
            });
            assert_eq!(spec.is_integrable(), !has_z_field);
        }
    }

    #[test]
    fn frozen_terms_never_touch_frozen_site() {
        let spec = HamiltonianSpec::chaotic(7);
        for f in 0..7 {
            let h = build_frozen_hamiltonian(&spec, f).unwrap();
            assert!(h.terms().iter().all(|t| !t.touches(f)));
        }
    }

    #[test]
    fn dispersion_special_points() {
        assert!((dispersion(1.0, 0.8, 0.0) - 0.4).abs() < 1e-14);
        assert_eq!(dispersion(1.0, 1.0, 0.0), 0.0);
        assert!((dispersion(1.0, 0.8, PI) - 3.6).abs() < 1e-14);
    }

    #[test]
    fn velocity_table_values() {
        let v = velocity_table(&HamiltonianSpec::chaotic(20));
        assert!((v.max_group - 1.6).abs() < 1e-15);
        assert!((v.lieb_robinson - 5.43656365691809).abs() < 1e-12);
        assert!(v.lieb_robinson > v.max_group);
        for d in 1..20 {
            assert!(v.t_lr(d as f64) < v.t_max(d as f64));
        }
        assert!((v.t_scr(20) - 12.5).abs() < 1e-12);
        assert!((v.t_max(4.0) - 2.5).abs() < 1e-12);
    }
}
