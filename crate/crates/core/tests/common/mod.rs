//! Brute-force reference implementations used as test oracles. Nothing here
//! calls into the library's linear algebra.

#![allow(dead_code)]

use num_complex::Complex64 as C64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row major.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<C64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = ONE;
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.a[r * self.n + c]
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let x = self.a[r * n + k];
                if x == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.a[r * n + c] += x * other.a[k * n + c];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Dense, s: C64) -> Dense {
        let a = self.a.iter().zip(&other.a).map(|(x, y)| x + s * y).collect();
        Dense { n: self.n, a }
    }

    pub fn scale(&self, s: C64) -> Dense {
        Dense {
            n: self.n,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.a[c * n + r] = self.a[r * n + c].conj();
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n;
        (0..n)
            .map(|r| (0..n).map(|c| self.a[r * n + c] * v[c]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let (n, m) = (self.n, other.n);
        let mut out = Dense::zeros(n * m);
        for r1 in 0..n {
            for c1 in 0..n {
                let x = self.a[r1 * n + c1];
                if x == ZERO {
                    continue;
                }
                for r2 in 0..m {
                    for c2 in 0..m {
                        out.a[(r1 * m + r2) * n * m + c1 * m + c2] = x * other.a[r2 * m + c2];
                    }
                }
            }
        }
        out
    }

    /// `exp(s·self)` by scaling and squaring with a 20-term Taylor series.
    pub fn expm(&self, s: C64) -> Dense {
        let norm = self.max_abs() * self.n as f64 * s.norm();
        let squarings = norm.max(1.0).log2().ceil() as u32 + 1;
        let a = self.scale(s / 2f64.powi(squarings as i32));
        let mut term = Dense::identity(self.n);
        let mut sum = Dense::identity(self.n);
        for k in 1..=20 {
            term = term.mul(&a).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term, ONE);
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

pub fn pauli(name: char) -> Dense {
    let a = match name {
        'I' => vec![ONE, ZERO, ZERO, ONE],
        'X' => vec![ZERO, ONE, ONE, ZERO],
        'Y' => vec![ZERO, -I, I, ZERO],
        'Z' => vec![ONE, ZERO, ZERO, -ONE],
        _ => panic!("unknown Pauli {name}"),
    };
    Dense { n: 2, a }
}

/// `P` on `site` of an `l`-site chain, site 0 leftmost in the tensor product.
pub fn site_op(l: usize, site: usize, p: char) -> Dense {
    (0..l).fold(Dense::identity(1), |acc, s| acc.kron(&pauli(if s == site { p } else { 'I' })))
}

/// `-J Σ Z Z - B Σ X - h Σ Z` assembled from Kronecker products.
pub fn kron_hamiltonian(l: usize, j: f64, b: f64, h: f64) -> Dense {
    let mut out = Dense::zeros(1 << l);
    for i in 0..l {
        if i + 1 < l {
            out = out.add(&site_op(l, i, 'Z').mul(&site_op(l, i + 1, 'Z')), C64::new(-j, 0.0));
        }
        out = out.add(&site_op(l, i, 'X'), C64::new(-b, 0.0));
        out = out.add(&site_op(l, i, 'Z'), C64::new(-h, 0.0));
    }
    out
}

/// Hamiltonian action computed directly on bit strings.
pub fn apply_ising(l: usize, j: f64, b: f64, h: f64, psi: &[C64]) -> Vec<C64> {
    let z = |idx: usize, site: usize| if idx >> (l - 1 - site) & 1 == 0 { 1.0 } else { -1.0 };
    let mut out = vec![ZERO; psi.len()];
    for (idx, amp) in psi.iter().enumerate() {
        let mut diag = 0.0;
        for s in 0..l {
            diag -= h * z(idx, s);
            if s + 1 < l {
                diag -= j * z(idx, s) * z(idx, s + 1);
            }
            out[idx ^ (1 << (l - 1 - s))] -= b * amp;
        }
        out[idx] += diag * amp;
    }
    out
}

/// Classical RK4 for `dψ/dt = -i H ψ`.
pub fn rk4(l: usize, j: f64, b: f64, h: f64, psi0: &[C64], t: f64, dt: f64) -> Vec<C64> {
    let steps = (t / dt).round() as usize;
    let f = |v: &[C64]| -> Vec<C64> { apply_ising(l, j, b, h, v).into_iter().map(|x| -I * x).collect() };
    let axpy = |v: &[C64], k: &[C64], s: f64| -> Vec<C64> { v.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    let mut psi = psi0.to_vec();
    for _ in 0..steps {
        let k1 = f(&psi);
        let k2 = f(&axpy(&psi, &k1, dt / 2.0));
        let k3 = f(&axpy(&psi, &k2, dt / 2.0));
        let k4 = f(&axpy(&psi, &k3, dt));
        for i in 0..psi.len() {
            psi[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }
    psi
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |q| *q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Néel amplitudes with site 0 up.
pub fn neel_vector(l: usize) -> Vec<C64> {
    let idx = (0..l).fold(0usize, |acc, s| (acc << 1) | (s % 2));
    let mut v = vec![ZERO; 1 << l];
    v[idx] = ONE;
    v
}

/// `⟨Z_site⟩` read off the amplitudes.
pub fn z_expectation(l: usize, site: usize, psi: &[C64]) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(idx, a)| if idx >> (l - 1 - site) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

/// Entropy of a Hermitian 2×2 density matrix from its closed-form eigenvalues.
pub fn entropy_2x2(m: [[C64; 2]; 2]) -> f64 {
    let (a, d) = (m[0][0].re, m[1][1].re);
    let disc = ((a - d) * (a - d) / 4.0 + m[0][1].norm_sqr()).sqrt();
    [(a + d) / 2.0 + disc, (a + d) / 2.0 - disc]
        .into_iter()
        .filter(|p| *p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}
