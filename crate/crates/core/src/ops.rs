//! Fixed-size operator blocks for one and two spins.
//!
//! Two-site blocks use the index `2 * s_left + s_right`, with `s = 0` the
//! spin-up (Z = +1) state, matching the site-0-major ordering of dense
//! state vectors.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

const O: C64 = C64::new(0.0, 0.0);
const I1: C64 = C64::new(1.0, 0.0);
const IM: C64 = C64::new(0.0, 1.0);

pub const IDENTITY: Mat2 = [[I1, O], [O, I1]];
pub const PAULI_X: Mat2 = [[O, I1], [I1, O]];
pub const PAULI_Y: Mat2 = [[O, C64::new(0.0, -1.0)], [IM, O]];
pub const PAULI_Z: Mat2 = [[I1, O], [O, C64::new(-1.0, 0.0)]];

pub fn scale2(m: &Mat2, s: f64) -> Mat2 {
    let mut out = *m;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

pub fn add2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[O; 4]; 4];
    for i1 in 0..2 {
        for i2 in 0..2 {
            for j1 in 0..2 {
                for j2 in 0..2 {
                    out[2 * i1 + i2][2 * j1 + j2] = a[i1][j1] * b[i2][j2];
                }
            }
        }
    }
    out
}

pub fn scale4(m: &Mat4, s: f64) -> Mat4 {
    let mut out = *m;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

pub fn add4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += b[i][j];
        }
    }
    out
}

/// Largest element of `|M - M†|`.
pub fn hermiticity_defect<const N: usize>(m: &[[C64; N]; N]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    worst
}

pub fn is_real<const N: usize>(m: &[[C64; N]; N]) -> bool {
    m.iter().flatten().all(|x| x.im == 0.0)
}

pub fn is_zero<const N: usize>(m: &[[C64; N]; N]) -> bool {
    m.iter().flatten().all(|x| *x == O)
}

/// `exp(-i tau H)` for a Hermitian 4x4 block, by exact eigendecomposition.
pub fn unitary_propagator(h: &Mat4, tau: f64) -> Result<Mat4> {
    let m = Mat::<C64>::from_fn(4, 4, |i, j| h[i][j]);
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("4x4 eigendecomposition: {e:?}")))?;
    let u = eig.U();
    let s = eig.S().column_vector();
    let phases: Vec<C64> = (0..4).map(|k| C64::from_polar(1.0, -tau * s[k].re)).collect();
    let mut out = [[O; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = O;
            for k in 0..4 {
                acc += u[(i, k)] * phases[k] * u[(j, k)].conj();
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_paulis_is_hermitian_and_ordered() {
        let zz = kron(&PAULI_Z, &PAULI_Z);
        assert_eq!(zz[0][0], I1);
        assert_eq!(zz[1][1], -I1);
        assert_eq!(zz[2][2], -I1);
        assert_eq!(zz[3][3], I1);
        let xi = kron(&PAULI_X, &IDENTITY);
        // X on the left spin flips the most significant index bit.
        assert_eq!(xi[0][2], I1);
        assert_eq!(xi[1][3], I1);
        assert_eq!(hermiticity_defect(&xi), 0.0);
        assert!(hermiticity_defect(&kron(&PAULI_Y, &PAULI_X)) < 1e-15);
    }

    #[test]
    fn propagator_of_diagonal_block() {
        let h = kron(&PAULI_Z, &PAULI_Z);
        let u = unitary_propagator(&h, 0.3).unwrap();
        let expect = [C64::from_polar(1.0, -0.3), C64::from_polar(1.0, 0.3)];
        assert!((u[0][0] - expect[0]).norm() < 1e-14);
        assert!((u[1][1] - expect[1]).norm() < 1e-14);
        assert!(u[0][1].norm() < 1e-14);
    }
}
