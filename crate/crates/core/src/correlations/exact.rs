//! Correlation measures from exact entropies of `rho = 1/4 + eps * delta`.
//!
//! Entropies are evaluated as deficits from their maximal values so that
//! the `O(eps^2)` differences survive at `eps ~ 1e-5`. All returned values
//! are in bits.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use super::basis::{canonical_angles, qubit_vectors, MeasurementBasis};
use super::expansion::outcome_deviations;
use super::{CorrelationReport, Mode, OneSided, Units};
use crate::error::Result;
use crate::optimizer::{maximize, Angle, OptimizerConfig};
use crate::state::{qubit_deficit, xlogx_excess, Mat2, Party, ThermalState};

/// Below this outcome probability a measurement branch contributes nothing.
pub const DEGENERATE_OUTCOME: f64 = 1e-14;

/// `S(rho_A) + S(rho_B) - S(rho)`.
pub fn mutual_information_exact(s: &ThermalState) -> f64 {
    s.entropy_deficit() - s.marginal_deficit(Party::A) - s.marginal_deficit(Party::B)
}

/// `J = S(rho_U) - sum_j q_j S(rho_U^j)` for a projective measurement of
/// `measured` along `(theta, phi)`, where `U` is the other qubit.
pub fn one_sided_classical_mi(s: &ThermalState, measured: Party, theta: f64, phi: f64) -> f64 {
    let eps = s.epsilon();
    let d = s.deviation().matrix();
    let index = |p: usize, u: usize| match measured {
        Party::A => 2 * p + u,
        Party::B => 2 * u + p,
    };
    let mut conditional = 0.0;
    for v in qubit_vectors(theta, phi) {
        // M = <v|_P delta |v>_P as an operator on the unmeasured qubit.
        let m = Mat2::from_fn(|u, w| {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..2 {
                for q in 0..2 {
                    acc += v[p].conj() * d[(index(p, u), index(q, w))] * v[q];
                }
            }
            acc
        });
        let tr = m.trace().re;
        let q = 0.5 + eps * tr;
        if q < DEGENERATE_OUTCOME {
            continue;
        }
        // rho_U^j - 1/2 = eps (M - Tr M / 2) / q
        let mut x = m;
        x[(0, 0)] -= Complex64::new(0.5 * tr, 0.0);
        x[(1, 1)] -= Complex64::new(0.5 * tr, 0.0);
        conditional += q * qubit_deficit(&x.scale(eps / q));
    }
    conditional - s.marginal_deficit(measured.other())
}

/// Discord and Henderson-Vedral classical correlation for measurements on
/// `measured`.
pub fn one_sided(s: &ThermalState, measured: Party, opt: &OptimizerConfig) -> Result<OneSided> {
    let eps = s.epsilon();
    let scale = LN_2 / (eps * eps);
    let max = maximize(
        |x: &[f64; 2]| scale * one_sided_classical_mi(s, measured, x[0], x[1]),
        [Angle::Polar, Angle::Azimuthal],
        |x| {
            let (t, p) = canonical_angles(x[0], x[1]);
            [t, p]
        },
        opt,
    )?;
    let classical = max.value / scale;
    let total = mutual_information_exact(s);
    Ok(OneSided {
        measured,
        discord: total - classical,
        classical,
        theta: max.point[0],
        phi: max.point[1],
    })
}

/// `D = I - max J` with measurements on `measured`.
pub fn discord_exact(s: &ThermalState, measured: Party, opt: &OptimizerConfig) -> Result<f64> {
    Ok(one_sided(s, measured, opt)?.discord)
}

/// `C = I - D`, identical to the maximal one-sided classical correlation.
pub fn classical_exact_c(s: &ThermalState, measured: Party, opt: &OptimizerConfig) -> Result<f64> {
    Ok(one_sided(s, measured, opt)?.classical)
}

/// Shannon mutual information (bits) of the outcome distribution of a
/// local measurement on both qubits.
pub fn classical_mi_exact(s: &ThermalState, b: &MeasurementBasis) -> f64 {
    measured_mi_scaled(s, &b.to_array()) * s.epsilon() * s.epsilon() / LN_2
}

/// Measured mutual information in units of `eps^2 / ln 2`, written as
/// `sum r_i c_j g(p_ij / (r_i c_j) - 1)` with `g(x) = (1+x) ln(1+x) - x`.
fn measured_mi_scaled(s: &ThermalState, angles: &[f64; 4]) -> f64 {
    let eps = s.epsilon();
    let delta = outcome_deviations(s.deviation().matrix(), angles);
    let a = [delta[0][0] + delta[0][1], delta[1][0] + delta[1][1]];
    let b = [delta[0][0] + delta[1][0], delta[0][1] + delta[1][1]];
    let mut total = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let rc = (0.5 + eps * a[i]) * (0.5 + eps * b[j]);
            if rc <= 0.0 {
                continue;
            }
            let diff = eps * (delta[i][j] - 0.5 * (a[i] + b[j])) - eps * eps * a[i] * b[j];
            total += rc * xlogx_excess(diff / rc);
        }
    }
    total / (eps * eps)
}

/// Symmetric classical correlation from exact Shannon entropies.
pub fn classical_correlation_k_exact(s: &ThermalState, opt: &OptimizerConfig) -> Result<(f64, MeasurementBasis)> {
    let max = maximize(
        |x: &[f64; 4]| measured_mi_scaled(s, x),
        [Angle::Polar, Angle::Azimuthal, Angle::Polar, Angle::Azimuthal],
        |x| MeasurementBasis::from_array(x).canonical().to_array(),
        opt,
    )?;
    let eps = s.epsilon();
    Ok((max.value * eps * eps / LN_2, MeasurementBasis::from_array(&max.point)))
}

/// Exact-path report: `I`, `K`, `Q = I - K` in bits, plus the one-sided
/// discord for `measured` when requested.
pub fn correlations_exact(
    s: &ThermalState,
    opt: &OptimizerConfig,
    measured: Option<Party>,
) -> Result<CorrelationReport> {
    let total_i = mutual_information_exact(s);
    let (classical_k, basis) = classical_correlation_k_exact(s, opt)?;
    let one_sided = match measured {
        Some(p) => Some(one_sided(s, p, opt)?),
        None => None,
    };
    Ok(CorrelationReport {
        total_i,
        classical_k,
        quantum_q: total_i - classical_k,
        optimal_basis: basis,
        mode: Mode::Exact,
        units: Units::Bits,
        one_sided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::expansion::{mutual_information_expansion, quantum_correlation_q};
    use crate::state::{partial_trace, von_neumann_entropy, DeviationMatrix, Mat4};
    use crate::states::{bell_pseudopure, equilibrium_deviation, BellState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_deviation(rng: &mut ChaCha8Rng) -> DeviationMatrix {
        let m = Mat4::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        DeviationMatrix::project(&m)
    }

    /// Textbook route: explicit conditional states and direct entropies.
    fn direct_j(s: &ThermalState, measured: Party, theta: f64, phi: f64) -> f64 {
        let rho = s.density();
        let unmeasured = measured.other();
        let mut cond = 0.0;
        for p in crate::correlations::basis::qubit_projectors(theta, phi) {
            let full = match measured {
                Party::A => p.kronecker(&Mat2::identity()),
                Party::B => Mat2::identity().kronecker(&p),
            };
            let post = full * rho * full;
            let q = post.trace().re;
            let reduced = partial_trace(&post, unmeasured).scale(1.0 / q);
            cond += q * von_neumann_entropy(&reduced).unwrap();
        }
        von_neumann_entropy(&partial_trace(&rho, unmeasured)).unwrap() - cond
    }

    #[test]
    fn one_sided_mi_matches_direct_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let s = ThermalState::new(0.05, random_deviation(&mut rng)).unwrap();
            let (t, p) = (rng.random_range(0.0..3.0), rng.random_range(0.0..6.0));
            for party in [Party::A, Party::B] {
                let ours = one_sided_classical_mi(&s, party, t, p);
                assert!((ours - direct_j(&s, party, t, p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measured_mi_matches_shannon_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..30 {
            let s = ThermalState::new(0.05, random_deviation(&mut rng)).unwrap();
            let b = MeasurementBasis::new(rng.random_range(0.0..3.0), rng.random_range(0.0..6.0), rng.random_range(0.0..3.0), rng.random_range(0.0..6.0));
            let rho = s.density();
            let probs: Vec<f64> = b.joint_projectors().iter().map(|p| (p * rho).trace().re).collect();
            let h = |v: &[f64]| -> f64 { v.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum() };
            let direct = h(&[probs[0] + probs[1], probs[2] + probs[3]]) + h(&[probs[0] + probs[2], probs[1] + probs[3]]) - h(&probs);
            assert!((classical_mi_exact(&s, &b) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn mutual_information_exact_examples() {
        let s = ThermalState::new(1e-3, DeviationMatrix::zeros()).unwrap();
        assert_eq!(mutual_information_exact(&s), 0.0);
        let s = ThermalState::new(1e-5, equilibrium_deviation()).unwrap();
        assert!(mutual_information_exact(&s).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let d = random_deviation(&mut rng);
            let s = ThermalState::new(0.05, d).unwrap();
            let direct = von_neumann_entropy(&s.reduced_density(Party::A)).unwrap()
                + von_neumann_entropy(&s.reduced_density(Party::B)).unwrap()
                - von_neumann_entropy(&s.density()).unwrap();
            assert!((mutual_information_exact(&s) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn product_and_mixed_states_have_no_discord() {
        let opt = OptimizerConfig::default();
        let s = ThermalState::new(0.01, DeviationMatrix::zeros()).unwrap();
        assert_eq!(discord_exact(&s, Party::B, &opt).unwrap(), 0.0);

        // rho_A (x) rho_B with rho_A = 1/2 + x sigma_z, rho_B = 1/2 + y sigma_x:
        // delta = (x Z (x) I + y I (x) X) / (2 eps) + x y Z (x) X / eps.
        let (eps, x, y) = (0.01, 0.2, 0.15);
        let z = Mat2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0));
        let sx = Mat2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let rho_a = Mat2::identity().scale(0.5) + z.scale(x);
        let rho_b = Mat2::identity().scale(0.5) + sx.scale(y);
        let rho = rho_a.kronecker(&rho_b);
        let delta = DeviationMatrix::new((rho - Mat4::identity().scale(0.25)).scale(1.0 / eps)).unwrap();
        let s = ThermalState::new(eps, delta).unwrap();
        for party in [Party::A, Party::B] {
            let r = one_sided(&s, party, &opt).unwrap();
            assert!(r.discord.abs() < 1e-12, "discord {}", r.discord);
            assert!((r.classical - mutual_information_exact(&s)).abs() < 1e-12);
        }
        assert!(mutual_information_exact(&s).abs() < 1e-12);
    }

    #[test]
    fn bell_discord_matches_expansion_q_in_small_eps_limit() {
        let opt = OptimizerConfig::default();
        let bell = bell_pseudopure(BellState::PsiPlus, 1.0);
        let q = quantum_correlation_q(&bell, &opt).unwrap();
        let mut prev_err = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let s = ThermalState::new(eps, bell).unwrap();
            let r = one_sided(&s, Party::B, &opt).unwrap();
            let d_scaled = r.discord * LN_2 / (eps * eps);
            let c_scaled = r.classical * LN_2 / (eps * eps);
            let err = (d_scaled - q.quantum_q).abs();
            assert!(err < prev_err);
            prev_err = err;
            assert!((c_scaled - 0.5).abs() < 50.0 * eps);
        }
        assert!(prev_err < 1e-3);
    }

    #[test]
    fn exact_report_tracks_expansion() {
        let opt = OptimizerConfig::default();
        let eps = 1e-5;
        let bell = bell_pseudopure(BellState::PsiPlus, 1.0);
        let s = ThermalState::new(eps, bell).unwrap();
        let exact = correlations_exact(&s, &opt, Some(Party::B)).unwrap();
        let approx = quantum_correlation_q(&bell, &opt).unwrap().in_bits(eps);
        assert!((exact.total_i - approx.total_i).abs() < 1e-4 * approx.total_i);
        assert!((exact.classical_k - approx.classical_k).abs() < 1e-4 * approx.classical_k);
        assert!((exact.quantum_q - approx.quantum_q).abs() < 1e-4 * approx.quantum_q);
        let os = exact.one_sided.unwrap();
        // Maximally mixed marginals: D = Q and C = K.
        assert!((os.discord - exact.quantum_q).abs() < 1e-6 * exact.quantum_q);
        assert!((os.classical - exact.classical_k).abs() < 1e-6 * exact.classical_k);
        assert!((mutual_information_expansion(&bell) - 1.5).abs() < 1e-12);
    }
}
