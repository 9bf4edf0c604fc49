//! Matrix types for the effective two-qubit (four-level) system: deviation
//! matrices, thermal states, partial traces, entropies and fidelity.
//!
//! Basis order throughout is `{|00>, |01>, |10>, |11>}`; qubit A is the
//! leftmost label, so basis index `k = 2a + b`.

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;

use crate::eigen::HermitianEigen;
use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

/// Absolute tolerance on `|M - M^dagger|` for Hermitian-flagged matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on the trace of a deviation matrix (and on `Tr rho - 1`).
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above `-EIGEN_CLAMP` are treated as non-negative.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// One of the two logical qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermitian_defect<const N: usize>(m: &SMatrix<Complex64, N, N>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian part `(M + M^dagger) / 2`.
pub fn hermitize<const N: usize>(m: &SMatrix<Complex64, N, N>) -> SMatrix<Complex64, N, N> {
    (m + m.adjoint()).scale(0.5)
}

/// Traceless Hermitian 4x4 matrix carrying all correlations of
/// `rho = 1/4 + epsilon * delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationMatrix(Mat4);

impl DeviationMatrix {
    /// Validates hermiticity (1e-12) and tracelessness (1e-10).
    pub fn new(m: Mat4) -> Result<Self> {
        let defect = hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = m.trace();
        if tr.norm() > TRACE_TOL {
            return Err(Error::TraceViolation(tr.norm()));
        }
        Ok(DeviationMatrix(m))
    }

    /// Hermitizes the input and removes its trace before wrapping it.
    pub fn project(m: &Mat4) -> Self {
        let mut h = hermitize(m);
        let shift = h.trace().re / 4.0;
        for k in 0..4 {
            h[(k, k)] = Complex64::new(h[(k, k)].re - shift, 0.0);
        }
        DeviationMatrix(h)
    }

    /// Hermitizes the input, leaving its trace alone.
    pub(crate) fn project_keep_trace(m: &Mat4) -> Self {
        DeviationMatrix(hermitize(m))
    }

    pub fn zeros() -> Self {
        DeviationMatrix(Mat4::zeros())
    }

    /// Builds from a real diagonal; the entries must sum to zero.
    pub fn from_diagonal(diag: [f64; 4]) -> Result<Self> {
        let mut m = Mat4::zeros();
        for (k, v) in diag.iter().enumerate() {
            m[(k, k)] = Complex64::new(*v, 0.0);
        }
        Self::new(m)
    }

    /// `alpha * (|psi><psi| - 1/4)` for a normalized state vector.
    pub fn pseudopure(psi: &[Complex64; 4], alpha: f64) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = psi[i] * psi[j].conj() * alpha;
            }
            m[(i, i)] -= Complex64::new(alpha / 4.0, 0.0);
        }
        DeviationMatrix::project(&m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DeviationMatrix(self.0.scale(factor))
    }

    /// `U delta U^dagger`, re-hermitized.
    pub fn conjugated(&self, u: &Mat4) -> Self {
        DeviationMatrix::project(&(u * self.0 * u.adjoint()))
    }

    pub fn partial_trace(&self, keep: Party) -> Mat2 {
        partial_trace(&self.0, keep)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &DeviationMatrix) -> f64 {
        (self.0 - other.0).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

/// Reduced matrix of the kept party: `Tr_B` when `keep == A`, `Tr_A` when
/// `keep == B`.
pub fn partial_trace(m: &Mat4, keep: Party) -> Mat2 {
    let mut out = Mat2::zeros();
    for x in 0..2 {
        for y in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                s += match keep {
                    Party::A => m[(2 * x + k, 2 * y + k)],
                    Party::B => m[(2 * k + x, 2 * k + y)],
                };
            }
            out[(x, y)] = s;
        }
    }
    out
}

/// `Tr(M^2)`; real and non-negative for Hermitian `M`.
pub fn trace_square<const N: usize>(m: &SMatrix<Complex64, N, N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            s += (m[(i, j)] * m[(j, i)]).re;
        }
    }
    s
}

fn check_density<const N: usize>(rho: &SMatrix<Complex64, N, N>) -> Result<HermitianEigen<N>> {
    let defect = hermitian_defect(rho);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::NonPhysicalState(format!("trace {} differs from 1", tr)));
    }
    let eig = HermitianEigen::new(rho);
    if eig.values[0] < -EIGEN_CLAMP {
        return Err(Error::NonPhysicalState(format!(
            "negative eigenvalue {:e}",
            eig.values[0]
        )));
    }
    Ok(eig)
}

/// `-sum p log2 p` with `0 log 0 = 0`.
fn shannon_bits(values: impl Iterator<Item = f64>) -> f64 {
    values
        .map(|p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits of a density matrix of dimension 2 or 4.
pub fn von_neumann_entropy<const N: usize>(rho: &SMatrix<Complex64, N, N>) -> Result<f64> {
    let eig = check_density(rho)?;
    Ok(shannon_bits(eig.values.iter().copied()))
}

/// Uhlmann fidelity `Tr sqrt(sqrt(ideal) prepared sqrt(ideal))`.
pub fn fidelity<const N: usize>(
    ideal: &SMatrix<Complex64, N, N>,
    prepared: &SMatrix<Complex64, N, N>,
) -> Result<f64> {
    let sqrt_ideal = check_density(ideal)?.map_values(|x| x.max(0.0).sqrt());
    check_density(prepared)?;
    let inner = hermitize(&(sqrt_ideal * prepared * sqrt_ideal));
    let eig = HermitianEigen::new(&inner);
    let f: f64 = eig.values.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `(1 + x) ln(1 + x) - x`, accurate for small `|x|`; equals 1 at `x = -1`.
pub(crate) fn xlogx_excess(x: f64) -> f64 {
    if x <= -1.0 {
        return 1.0;
    }
    if x.abs() < 1e-3 {
        // sum_{n>=2} (-1)^n x^n / (n (n - 1))
        let mut term = x * x;
        let mut sum = 0.0;
        for n in 2..9 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * term / (n * (n - 1)) as f64;
            term *= x;
        }
        sum
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

/// Entropy deficit `log2(n) - S(1/n + eps * delta)` from the eigenvalues of
/// a traceless `delta`, evaluated without cancellation against `log2(n)`.
fn entropy_deficit(eps: f64, deviation_eigs: &[f64]) -> f64 {
    let n = deviation_eigs.len() as f64;
    deviation_eigs
        .iter()
        .map(|&d| xlogx_excess(n * eps * d))
        .sum::<f64>()
        / (n * std::f64::consts::LN_2)
}

/// Entropy deficit `1 - S(1/2 + X)` for a traceless Hermitian 2x2 `X`.
pub(crate) fn qubit_deficit(x: &Mat2) -> f64 {
    // Eigenvalues of a traceless 2x2 Hermitian matrix are +-lambda.
    let a = 0.5 * (x[(0, 0)].re - x[(1, 1)].re);
    let lambda = (a * a + x[(0, 1)].norm_sqr()).sqrt().min(0.5);
    entropy_deficit(1.0, &[lambda, -lambda])
}

/// `rho = 1/4 + epsilon * delta` with `0 < epsilon` and `rho >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    epsilon: f64,
    deviation: DeviationMatrix,
}

impl ThermalState {
    pub fn new(epsilon: f64, deviation: DeviationMatrix) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let lowest = HermitianEigen::new(deviation.matrix()).values[0];
        if 0.25 + epsilon * lowest < -EIGEN_CLAMP {
            return Err(Error::NonPhysicalState(format!(
                "1/4 + eps*delta has eigenvalue {:e}",
                0.25 + epsilon * lowest
            )));
        }
        Ok(ThermalState { epsilon, deviation })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn deviation(&self) -> &DeviationMatrix {
        &self.deviation
    }

    pub fn density(&self) -> Mat4 {
        Mat4::identity().scale(0.25) + self.deviation.matrix().scale(self.epsilon)
    }

    pub fn reduced_density(&self, keep: Party) -> Mat2 {
        Mat2::identity().scale(0.5) + self.deviation.partial_trace(keep).scale(self.epsilon)
    }

    /// Exact `S(rho)` in bits.
    pub fn entropy(&self) -> f64 {
        2.0 - self.entropy_deficit()
    }

    /// Exact `S(rho_A)` or `S(rho_B)` in bits.
    pub fn marginal_entropy(&self, keep: Party) -> f64 {
        1.0 - self.marginal_deficit(keep)
    }

    /// `2 - S(rho)`, computed from the deviation spectrum.
    pub(crate) fn entropy_deficit(&self) -> f64 {
        let eig = HermitianEigen::new(self.deviation.matrix());
        entropy_deficit(self.epsilon, eig.values.as_slice())
    }

    pub(crate) fn marginal_deficit(&self, keep: Party) -> f64 {
        qubit_deficit(&self.deviation.partial_trace(keep).scale(self.epsilon))
    }
}

/// Second-order expansion `2 (1 - eps^2 / ln2 * Tr delta^2)` of `S(rho)`.
pub fn entropy_expansion(s: &ThermalState) -> f64 {
    let eps = s.epsilon();
    2.0 * (1.0 - eps * eps / std::f64::consts::LN_2 * trace_square(s.deviation().matrix()))
}

/// Second-order expansion `1 - eps^2 / ln2 * Tr delta_k^2` of a marginal entropy.
pub fn marginal_entropy_expansion(s: &ThermalState, keep: Party) -> f64 {
    let eps = s.epsilon();
    1.0 - eps * eps / std::f64::consts::LN_2 * trace_square(&s.deviation().partial_trace(keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn psi_plus_dev() -> DeviationMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DeviationMatrix::pseudopure(&[c(h), c(0.0), c(0.0), c(h)], 1.0)
    }

    pub(crate) fn random_deviation(rng: &mut ChaCha8Rng) -> DeviationMatrix {
        let m = Mat4::from_fn(|_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        DeviationMatrix::project(&m)
    }

    /// Brute-force index contraction over the full tensor indices.
    fn contract(m: &Mat4, keep: Party) -> Mat2 {
        let mut out = Mat2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        let v = m[(2 * a + b, 2 * a2 + b2)];
                        match keep {
                            Party::A if b == b2 => out[(a, a2)] += v,
                            Party::B if a == a2 => out[(b, b2)] += v,
                            _ => {}
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn rejects_invalid_deviation() {
        let mut m = Mat4::zeros();
        m[(0, 1)] = c(1.0);
        assert!(matches!(DeviationMatrix::new(m), Err(Error::NotHermitian(_))));
        let d = Mat4::from_diagonal(&Vector4::new(c(1.0), c(0.0), c(0.0), c(0.0)));
        assert!(matches!(DeviationMatrix::new(d), Err(Error::TraceViolation(_))));
    }

    #[test]
    fn partial_trace_examples() {
        assert_eq!(DeviationMatrix::zeros().partial_trace(Party::A), Mat2::zeros());

        let eq = DeviationMatrix::from_diagonal([3.0, 1.0, -1.0, -3.0]).unwrap();
        let a = eq.partial_trace(Party::A);
        assert_eq!(a, contract(eq.matrix(), Party::A));
        assert_abs_diff_eq!(a[(0, 0)].re, 4.0);
        assert_abs_diff_eq!(a[(1, 1)].re, -4.0);
        assert_eq!(a[(0, 1)], c(0.0));
        let b = eq.partial_trace(Party::B);
        assert_abs_diff_eq!(b[(0, 0)].re, 2.0);
        assert_abs_diff_eq!(b[(1, 1)].re, -2.0);

        let bell = psi_plus_dev();
        assert!(bell.partial_trace(Party::A).norm() < 1e-15);
        assert!(bell.partial_trace(Party::B).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_matches_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let d = random_deviation(&mut rng);
            for p in [Party::A, Party::B] {
                let r = d.partial_trace(p);
                assert!((r - contract(d.matrix(), p)).norm() < 1e-14);
                assert!(r.trace().norm() < 1e-10);
                assert!(hermitian_defect(&r) < 1e-14);
            }
        }
    }

    #[test]
    fn trace_square_examples() {
        assert_eq!(trace_square(&Mat4::zeros()), 0.0);
        let eq = DeviationMatrix::from_diagonal([3.0, 1.0, -1.0, -3.0]).unwrap();
        assert_abs_diff_eq!(trace_square(eq.matrix()), 20.0);
        assert_abs_diff_eq!(trace_square(psi_plus_dev().matrix()), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(von_neumann_entropy(&Mat4::identity().scale(0.25)).unwrap(), 2.0, epsilon = 1e-14);
        let mut pure = Mat4::zeros();
        pure[(2, 2)] = c(1.0);
        assert_abs_diff_eq!(von_neumann_entropy(&pure).unwrap(), 0.0);
        let half = Mat4::from_diagonal(&Vector4::new(c(0.5), c(0.5), c(0.0), c(0.0)));
        assert_abs_diff_eq!(von_neumann_entropy(&half).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_rejects_nonphysical() {
        let neg = Mat2::from_diagonal(&nalgebra::Vector2::new(c(1.5), c(-0.5)));
        assert!(matches!(von_neumann_entropy(&neg), Err(Error::NonPhysicalState(_))));
        let big = Mat2::from_diagonal(&nalgebra::Vector2::new(c(0.7), c(0.7)));
        assert!(matches!(von_neumann_entropy(&big), Err(Error::NonPhysicalState(_))));
    }

    #[test]
    fn thermal_state_validation() {
        let eq = DeviationMatrix::from_diagonal([3.0, 1.0, -1.0, -3.0]).unwrap();
        assert!(ThermalState::new(0.0, eq).is_err());
        assert!(ThermalState::new(0.1, eq).is_err());
        let s = ThermalState::new(1.0 / 12.0, eq).unwrap();
        assert_abs_diff_eq!(s.density().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expansion_examples() {
        let s = ThermalState::new(0.3, DeviationMatrix::zeros()).unwrap();
        assert_eq!(entropy_expansion(&s), 2.0);

        let eps = 1e-5;
        let eq = DeviationMatrix::from_diagonal([3.0, 1.0, -1.0, -3.0]).unwrap();
        let s = ThermalState::new(eps, eq).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert_abs_diff_eq!(entropy_expansion(&s), 2.0 - 2e-10 / ln2 * 20.0, epsilon = 1e-15);
        assert_abs_diff_eq!(marginal_entropy_expansion(&s, Party::A), 1.0 - 1e-10 / ln2 * 32.0, epsilon = 1e-15);
        // Cross-check against exact entropies: error is O(eps^3).
        assert!((entropy_expansion(&s) - s.entropy()).abs() < 1e-13);
        assert!((entropy_expansion(&s) - von_neumann_entropy(&s.density()).unwrap()).abs() < 1e-13);
        assert!((marginal_entropy_expansion(&s, Party::A) - s.marginal_entropy(Party::A)).abs() < 1e-13);
    }

    #[test]
    fn stable_entropy_matches_direct_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let d = random_deviation(&mut rng);
            let s = ThermalState::new(0.05, d).unwrap();
            let direct = von_neumann_entropy(&s.density()).unwrap();
            assert!((direct - s.entropy()).abs() < 1e-12);
            for p in [Party::A, Party::B] {
                let direct = von_neumann_entropy(&s.reduced_density(p)).unwrap();
                assert!((direct - s.marginal_entropy(p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = ThermalState::new(0.1, random_deviation(&mut rng)).unwrap();
        assert_abs_diff_eq!(fidelity(&s.density(), &s.density()).unwrap(), 1.0, epsilon = 1e-10);

        let mut p0 = Mat4::zeros();
        p0[(0, 0)] = c(1.0);
        let mut p3 = Mat4::zeros();
        p3[(3, 3)] = c(1.0);
        assert_abs_diff_eq!(fidelity(&p0, &p3).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_of_slightly_depolarized_bell_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(h), c(0.0), c(0.0), c(h)];
        let ideal = Mat4::from_fn(|i, j| psi[i] * psi[j].conj());
        let prepared = ideal.scale(0.96) + Mat4::identity().scale(0.01);
        // Pure ideal state: F = sqrt(<psi|prepared|psi>) = sqrt(0.97).
        let f = fidelity(&ideal, &prepared).unwrap();
        assert_abs_diff_eq!(f, 0.97f64.sqrt(), epsilon = 1e-9);
        assert!((f - 0.98).abs() < 0.01);
    }
}
