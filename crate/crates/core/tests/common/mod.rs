//! Independent brute-force oracle shared by the integration tests.

use std::f64::consts::PI;

use devcorr::state::DeviationMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Measurement vectors `|par>, |perp>` for Bloch angles `(theta, phi)`.
fn vectors(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let e = Complex64::new(phi.cos(), phi.sin());
    [
        [Complex64::new(theta.cos(), 0.0), e * theta.sin()],
        [e.conj() * theta.sin(), Complex64::new(-theta.cos(), 0.0)],
    ]
}

/// Maximum of `2 sum d_ij^2 - sum_i r_i^2 - sum_j c_j^2` over a dense grid,
/// with `d_ij = <u_i v_j| D |u_i v_j>`.
pub fn brute_force_k(d: &DeviationMatrix, n: usize) -> f64 {
    let angles: Vec<(f64, f64)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a as f64 * PI / (n - 1) as f64, 2.0 * PI * b as f64 / n as f64)))
        .collect();
    let m = d.matrix();
    // Partial contraction over qubit A for each outcome of A.
    let contracted: Vec<[[[Complex64; 2]; 2]; 2]> = angles
        .iter()
        .map(|&(t, p)| {
            let u = vectors(t, p);
            std::array::from_fn(|i| {
                std::array::from_fn(|b1| {
                    std::array::from_fn(|b2| {
                        let mut s = Complex64::new(0.0, 0.0);
                        for a1 in 0..2 {
                            for a2 in 0..2 {
                                s += u[i][a1].conj() * m[(2 * a1 + b1, 2 * a2 + b2)] * u[i][a2];
                            }
                        }
                        s
                    })
                })
            })
        })
        .collect();
    let vs: Vec<[[Complex64; 2]; 2]> = angles.iter().map(|&(t, p)| vectors(t, p)).collect();
    contracted
        .par_iter()
        .map(|ma| {
            let mut best = f64::NEG_INFINITY;
            for v in &vs {
                let mut dij = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        let mut s = Complex64::new(0.0, 0.0);
                        for b1 in 0..2 {
                            for b2 in 0..2 {
                                s += v[j][b1].conj() * ma[i][b1][b2] * v[j][b2];
                            }
                        }
                        dij[i][j] = s.re;
                    }
                }
                let joint: f64 = dij.iter().flatten().map(|x| x * x).sum();
                let rows: f64 = (0..2).map(|i| (dij[i][0] + dij[i][1]).powi(2)).sum();
                let cols: f64 = (0..2).map(|j| (dij[0][j] + dij[1][j]).powi(2)).sum();
                best = best.max(2.0 * joint - rows - cols);
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}
