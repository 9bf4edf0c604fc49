//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

const MAX_SWEEPS: usize = 64;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to the
/// norm of the whole matrix.
pub const JACOBI_TOL: f64 = 1e-14;

/// Eigen-decomposition `A = V diag(values) V^dagger` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<const N: usize> {
    /// Eigenvalues in ascending order.
    pub values: SVector<f64, N>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: SMatrix<Complex64, N, N>,
}

fn off_diagonal_norm<const N: usize>(a: &SMatrix<Complex64, N, N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

impl<const N: usize> HermitianEigen<N> {
    /// Diagonalizes `a`, which is assumed Hermitian. Only the Hermitian part
    /// of the input is used.
    pub fn new(a: &SMatrix<Complex64, N, N>) -> Self {
        let mut a = (a + a.adjoint()).scale(0.5);
        let mut v = SMatrix::<Complex64, N, N>::identity();
        let scale = a.norm();

        if scale > 0.0 {
            for _ in 0..MAX_SWEEPS {
                if off_diagonal_norm(&a) <= JACOBI_TOL * scale {
                    break;
                }
                for p in 0..N {
                    for q in (p + 1)..N {
                        rotate(&mut a, &mut v, p, q);
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..N).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let values = SVector::<f64, N>::from_fn(|k, _| a[(order[k], order[k])].re);
        let vectors = SMatrix::<Complex64, N, N>::from_fn(|r, c| v[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    /// Rebuilds `V f(diag) V^dagger` for a real function of the eigenvalues.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SMatrix<Complex64, N, N> {
        let mut out = SMatrix::<Complex64, N, N>::zeros();
        for k in 0..N {
            let w = f(self.values[k]);
            if w == 0.0 {
                continue;
            }
            let col = self.vectors.column(k);
            out += (col * col.adjoint()).scale(w);
        }
        out
    }
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate<const N: usize>(
    a: &mut SMatrix<Complex64, N, N>,
    v: &mut SMatrix<Complex64, N, N>,
    p: usize,
    q: usize,
) {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    // Phase that makes the pivot real, followed by a real symmetric rotation.
    let phase = g / mag;
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let ph = phase.conj();
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = ph * (-s);
    let uqq = ph * c;

    // A <- A U
    for k in 0..N {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    // A <- U^dagger A
    for k in 0..N {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..N {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng) -> Matrix4<Complex64> {
        let m = Matrix4::<Complex64>::from_fn(|_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (m + m.adjoint()).scale(0.5)
    }

    #[test]
    fn reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = random_hermitian(&mut rng);
            let eig = HermitianEigen::new(&a);
            let back = eig.map_values(|x| x);
            assert!((back - a).norm() < 1e-13);
            let gram = eig.vectors.adjoint() * eig.vectors;
            assert!((gram - Matrix4::identity()).norm() < 1e-13);
            for k in 1..4 {
                assert!(eig.values[k - 1] <= eig.values[k]);
            }
        }
    }

    #[test]
    fn agrees_with_nalgebra_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_hermitian(&mut rng);
            let ours = HermitianEigen::new(&a).values;
            let mut theirs: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for k in 0..4 {
                assert!((ours[k] - theirs[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_and_diagonal_inputs() {
        let z = HermitianEigen::new(&Matrix2::<Complex64>::zeros());
        assert_eq!(z.values[0], 0.0);
        assert_eq!(z.values[1], 0.0);

        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(3.0, 1.0, -1.0, -3.0).map(|x| Complex64::new(x, 0.0)));
        let eig = HermitianEigen::new(&d);
        assert_eq!(eig.values.as_slice(), &[-3.0, -1.0, 1.0, 3.0]);
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(&mut rng);
        let e1 = HermitianEigen::new(&a);
        let e2 = HermitianEigen::new(&a);
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors, e2.vectors);
    }
}
