//! Closed-form quadrupolar (Redfield) relaxation of the spin-3/2 deviation
//! matrix.
//!
//! Coherences decay with rates built from `C (J_a + J_b)` and the
//! populations relax towards the equilibrium deviation `2 Iz =
//! diag(3, 1, -1, -3)` with rates `2 C J1`, `2 C J2` and `2 C (J1 + J2)`.
//! The population amplitudes `R1..R3` are fixed by the initial populations.
//! Inputs normalized differently from `2 Iz` still relax towards this
//! equilibrium.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{DeviationMatrix, Mat4};
use crate::states::SpinOperators;

/// Coupling strength `C` (s^-2) and reduced spectral densities `J0..J2` (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationParams {
    pub c: f64,
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
}

impl RelaxationParams {
    pub fn new(c: f64, j0: f64, j1: f64, j2: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
        }
        for (name, j) in [("J0", j0), ("J1", j1), ("J2", j2)] {
            if !(j >= 0.0) || !j.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {j}")));
            }
        }
        Ok(RelaxationParams { c, j0, j1, j2 })
    }

    /// Sodium values measured in an oriented lyotropic liquid crystal:
    /// `C = 12e9 s^-2`, `J0 = 17e-9 s`, `J1 = 3.0e-9 s`, `J2 = 3.4e-9 s`.
    pub fn sodium_lyotropic() -> Self {
        RelaxationParams { c: 12e9, j0: 17e-9, j1: 3.0e-9, j2: 3.4e-9 }
    }
}

/// Population amplitudes of the three single-exponential combinations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RCoefficients {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConstants {
    pub tau_l1: f64,
    pub tau_l2: f64,
    pub tau_t: f64,
}

/// The three population combinations `(d, e, f)`:
/// `D00 + D11 - D22 - D33`, `-D00 + D11 + D22 - D33`, `D00 - D11 + D22 - D33`.
pub fn population_combinations(d: &DeviationMatrix) -> [f64; 3] {
    let p: [f64; 4] = std::array::from_fn(|k| d.get(k, k).re);
    [
        p[0] + p[1] - p[2] - p[3],
        -p[0] + p[1] + p[2] - p[3],
        p[0] - p[1] + p[2] - p[3],
    ]
}

/// Equilibrium values of [`population_combinations`].
pub const POPULATION_OFFSETS: [f64; 3] = [8.0, 0.0, 4.0];

pub fn r_coefficients(d0: &DeviationMatrix) -> RCoefficients {
    let [d, e, f] = population_combinations(d0);
    RCoefficients {
        r1: e - POPULATION_OFFSETS[1],
        r2: d - POPULATION_OFFSETS[0],
        r3: f - POPULATION_OFFSETS[2],
    }
}

pub fn time_constants(p: &RelaxationParams) -> Result<TimeConstants> {
    if p.j1 == 0.0 {
        return Err(Error::ZeroRate("J1 = 0 gives an infinite tau_L1"));
    }
    if p.j2 == 0.0 {
        return Err(Error::ZeroRate("J2 = 0 gives an infinite tau_L2"));
    }
    Ok(TimeConstants {
        tau_l1: 1.0 / (2.0 * p.c * p.j1),
        tau_l2: 1.0 / (2.0 * p.c * p.j2),
        tau_t: 1.0 / (p.c * (p.j1 + p.j2)),
    })
}

/// Deviation matrix after relaxing for `t` seconds from `d0`.
pub fn evolve(d0: &DeviationMatrix, p: &RelaxationParams, t: f64) -> Result<DeviationMatrix> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    let c = p.c;
    let e_01 = (-c * (p.j0 + p.j1) * t).exp();
    let e_02 = (-c * (p.j0 + p.j2) * t).exp();
    let e_t = (-c * (p.j1 + p.j2) * t).exp();
    let e_l1 = (-2.0 * c * p.j1 * t).exp();
    let e_l2 = (-2.0 * c * p.j2 * t).exp();
    let e_12 = (-2.0 * c * (p.j1 + p.j2) * t).exp();

    let g = |i: usize, j: usize| d0.get(i, j);
    let mut m = Mat4::zeros();

    let sum_01_23 = g(0, 1) + g(2, 3);
    let diff_01_23 = g(0, 1) - g(2, 3);
    m[(0, 1)] = (sum_01_23 + diff_01_23 * e_l2) * (0.5 * e_01);
    m[(2, 3)] = (sum_01_23 - diff_01_23 * e_l2) * (0.5 * e_01);

    let sum_02_13 = g(0, 2) + g(1, 3);
    let diff_02_13 = g(0, 2) - g(1, 3);
    m[(0, 2)] = (sum_02_13 + diff_02_13 * e_l1) * (0.5 * e_02);
    m[(1, 3)] = (sum_02_13 - diff_02_13 * e_l1) * (0.5 * e_02);

    m[(0, 3)] = g(0, 3) * e_t;
    m[(1, 2)] = g(1, 2) * e_t;

    for (i, j) in [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)] {
        m[(j, i)] = m[(i, j)].conj();
    }

    let r = r_coefficients(d0);
    let a1 = r.r1 * e_12;
    let a2 = r.r2 * e_l2;
    let a3 = r.r3 * e_l1;
    // Any residual trace of d0 is carried along unchanged.
    let shift = d0.matrix().trace().re / 4.0;
    let pops = [
        3.0 - 0.25 * (a1 - a2 - a3),
        1.0 + 0.25 * (a1 + a2 - a3),
        -1.0 + 0.25 * (a1 - a2 + a3),
        -3.0 - 0.25 * (a1 + a2 + a3),
    ];
    for (k, v) in pops.iter().enumerate() {
        m[(k, k)] = Complex64::new(v + shift, 0.0);
    }
    Ok(DeviationMatrix::project_keep_trace(&m))
}

/// `[(k dt, evolve(d0, p, k dt)) for k = 1..=n]`.
pub fn time_series(
    d0: &DeviationMatrix,
    p: &RelaxationParams,
    dt: f64,
    n: usize,
) -> Result<Vec<(f64, DeviationMatrix)>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("time series needs at least one point".into()));
    }
    (1..=n)
        .map(|k| {
            let t = k as f64 * dt;
            evolve(d0, p, t).map(|d| (t, d))
        })
        .collect()
}

/// `Tr(Iz delta) = sum_m m delta_mm`.
pub fn longitudinal_magnetization(d: &DeviationMatrix) -> f64 {
    1.5 * d.get(0, 0).re + 0.5 * d.get(1, 1).re - 0.5 * d.get(2, 2).re - 1.5 * d.get(3, 3).re
}

/// Transverse magnetization `<Ix> + i <Iy>`, both as the central-transition
/// coherence `2 delta_21` and as the full trace `Tr((Ix + i Iy) delta)`,
/// which also picks up the `sqrt(3)`-weighted outer coherences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseMagnetization {
    pub central: Complex64,
    pub full: Complex64,
}

pub fn transverse_magnetization(d: &DeviationMatrix) -> TransverseMagnetization {
    let raising = SpinOperators::new().raising();
    TransverseMagnetization {
        central: d.get(2, 1) * 2.0,
        full: (raising * d.matrix()).trace(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell_pseudopure, equilibrium_deviation, BellState};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_deviation(rng: &mut ChaCha8Rng) -> DeviationMatrix {
        let m = Mat4::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        DeviationMatrix::project(&m)
    }

    fn paper() -> RelaxationParams {
        RelaxationParams::sodium_lyotropic()
    }

    #[test]
    fn r_coefficient_examples() {
        let r = r_coefficients(&equilibrium_deviation());
        assert_eq!((r.r1, r.r2, r.r3), (0.0, 0.0, 0.0));
        let r = r_coefficients(&bell_pseudopure(BellState::PsiPlus, 1.0));
        assert_abs_diff_eq!(r.r1, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.r2, -8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.r3, -4.0, epsilon = 1e-15);
    }

    #[test]
    fn evolve_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let d0 = random_deviation(&mut rng);
        assert!(evolve(&d0, &paper(), 0.0).unwrap().max_abs_diff(&d0) < 1e-12);
        assert!(matches!(evolve(&d0, &paper(), -1e-3), Err(Error::NegativeTime(_))));

        let eq = equilibrium_deviation();
        for t in [1e-3, 1e-2, 1.0] {
            assert!(evolve(&eq, &paper(), t).unwrap().max_abs_diff(&eq) < 1e-10);
        }
        assert!(evolve(&d0, &paper(), 10.0).unwrap().max_abs_diff(&eq) < 1e-10);
    }

    #[test]
    fn evolution_preserves_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let d0 = random_deviation(&mut rng);
            let t = rng.random_range(0.0..0.1);
            let d = evolve(&d0, &paper(), t).unwrap();
            assert!(d.matrix().trace().norm() < 1e-10);
            assert!(DeviationMatrix::new(*d.matrix()).is_ok());
        }
    }

    #[test]
    fn semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..50 {
            let d0 = random_deviation(&mut rng);
            let (t1, t2) = (rng.random_range(0.0..0.05), rng.random_range(0.0..0.05));
            let direct = evolve(&d0, &paper(), t1 + t2).unwrap();
            let stepped = evolve(&evolve(&d0, &paper(), t1).unwrap(), &paper(), t2).unwrap();
            assert!(direct.max_abs_diff(&stepped) < 1e-10);
        }
    }

    #[test]
    fn coherence_magnitudes_decay_monotonically() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..20 {
            // Paired coherences with a shared sign.
            let mut m = *random_deviation(&mut rng).matrix();
            let x = rng.random_range(0.1..1.0);
            let y = rng.random_range(0.1..1.0);
            m[(0, 1)] = Complex64::new(x, 0.0);
            m[(1, 0)] = Complex64::new(x, 0.0);
            m[(2, 3)] = Complex64::new(y, 0.0);
            m[(3, 2)] = Complex64::new(y, 0.0);
            let d0 = DeviationMatrix::project(&m);
            let series = time_series(&d0, &paper(), 1.5e-3, 40).unwrap();
            let mut prev = [d0.get(0, 1).norm(), d0.get(2, 3).norm(), d0.get(0, 3).norm(), d0.get(1, 2).norm()];
            for (_, d) in &series {
                let now = [d.get(0, 1).norm(), d.get(2, 3).norm(), d.get(0, 3).norm(), d.get(1, 2).norm()];
                for k in 0..4 {
                    assert!(now[k] <= prev[k] + 1e-15);
                }
                prev = now;
            }
            let last = series.last().unwrap().1;
            let eq = equilibrium_deviation();
            let first_gap = (d0.get(0, 0).re - 3.0).abs();
            assert!((last.get(0, 0).re - eq.get(0, 0).re).abs() < first_gap);
        }
    }

    #[test]
    fn time_series_grid() {
        let d0 = bell_pseudopure(BellState::PsiPlus, 1.0);
        let s = time_series(&d0, &paper(), 1.5e-3, 40).unwrap();
        assert_eq!(s.len(), 40);
        assert_abs_diff_eq!(s[39].0, 0.06, epsilon = 1e-15);
        let one = time_series(&d0, &paper(), 1.5e-3, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].1, s[0].1);
        let twice = evolve(&s[0].1, &paper(), 1.5e-3).unwrap();
        assert!(twice.max_abs_diff(&s[1].1) < 1e-12);
        assert!(time_series(&d0, &paper(), 0.0, 3).is_err());
        assert!(time_series(&d0, &paper(), 1e-3, 0).is_err());
    }

    #[test]
    fn magnetization_examples() {
        assert_abs_diff_eq!(longitudinal_magnetization(&equilibrium_deviation()), 10.0);
        assert_eq!(longitudinal_magnetization(&DeviationMatrix::zeros()), 0.0);

        let tm = transverse_magnetization(&equilibrium_deviation());
        assert_eq!(tm.central, Complex64::new(0.0, 0.0));
        assert_eq!(tm.full, Complex64::new(0.0, 0.0));

        let c0 = Complex64::new(0.3, -0.2);
        let mut m = Mat4::zeros();
        m[(1, 2)] = c0;
        m[(2, 1)] = c0.conj();
        let d0 = DeviationMatrix::new(m).unwrap();
        let p = paper();
        let tau_t = time_constants(&p).unwrap().tau_t;
        for t in [0.0, 5e-3, 13e-3, 40e-3] {
            let tm = transverse_magnetization(&evolve(&d0, &p, t).unwrap());
            let expected = c0.conj() * 2.0 * (-t / tau_t).exp();
            assert!((tm.central - expected).norm() < 1e-12);
            // Only the central coherence is populated, so both forms agree.
            assert!((tm.full - tm.central).norm() < 1e-12);
        }
    }

    #[test]
    fn longitudinal_decay_rates() {
        // <Iz> - 10 = (2 R2 e^{-2CJ2 t} + R3 e^{-2CJ1 t}) / 2 for traceless input.
        let d0 = bell_pseudopure(BellState::PsiPlus, 1.0);
        let p = paper();
        let r = r_coefficients(&d0);
        for t in [1e-3, 7e-3, 30e-3] {
            let mz = longitudinal_magnetization(&evolve(&d0, &p, t).unwrap());
            let model = 10.0 + 0.5 * (2.0 * r.r2 * (-2.0 * p.c * p.j2 * t).exp() + r.r3 * (-2.0 * p.c * p.j1 * t).exp());
            assert_abs_diff_eq!(mz, model, epsilon = 1e-12);
        }
    }

    #[test]
    fn time_constant_examples() {
        let tc = time_constants(&paper()).unwrap();
        assert_abs_diff_eq!(tc.tau_l1 * 1e3, 13.9, epsilon = 0.05);
        assert_abs_diff_eq!(tc.tau_l2 * 1e3, 12.25, epsilon = 0.05);
        assert_abs_diff_eq!(tc.tau_t * 1e3, 13.0, epsilon = 0.05);
        let zero = RelaxationParams::new(12e9, 1e-9, 0.0, 1e-9).unwrap();
        assert!(matches!(time_constants(&zero), Err(Error::ZeroRate(_))));
        assert!(RelaxationParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(RelaxationParams::new(1.0, -1.0, 1.0, 1.0).is_err());
    }
}
