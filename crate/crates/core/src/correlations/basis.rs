use std::f64::consts::PI;

use num_complex::Complex64;

use crate::state::{Mat2, Mat4, Party};

/// Local projective measurements on both qubits.
///
/// Each party measures `{|par><par|, |perp><perp|}` with
/// `|par> = cos(theta)|0> + e^{i phi} sin(theta)|1>` and
/// `|perp> = e^{-i phi} sin(theta)|0> - cos(theta)|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasurementBasis {
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
}

/// The two measurement vectors `[|par>, |perp>]` of one qubit.
pub fn qubit_vectors(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    [
        [Complex64::new(c, 0.0), e * s],
        [e.conj() * s, Complex64::new(-c, 0.0)],
    ]
}

/// Projector pair `[Pi_par, Pi_perp]` of one qubit.
pub fn qubit_projectors(theta: f64, phi: f64) -> [Mat2; 2] {
    qubit_vectors(theta, phi).map(|v| Mat2::from_fn(|i, j| v[i] * v[j].conj()))
}

/// Maps `(theta, phi)` to `theta in [0, pi)`, `phi in [0, 2 pi)`. Shifting
/// theta by pi only flips the sign of both vectors, so the projectors are
/// unchanged.
pub fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    (theta.rem_euclid(PI), phi.rem_euclid(2.0 * PI))
}

impl MeasurementBasis {
    pub fn new(theta_a: f64, phi_a: f64, theta_b: f64, phi_b: f64) -> Self {
        MeasurementBasis { theta_a, phi_a, theta_b, phi_b }
    }

    /// The computational basis on both qubits.
    pub fn computational() -> Self {
        MeasurementBasis::default()
    }

    pub fn from_array(x: &[f64; 4]) -> Self {
        MeasurementBasis::new(x[0], x[1], x[2], x[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.theta_a, self.phi_a, self.theta_b, self.phi_b]
    }

    pub fn canonical(&self) -> Self {
        let (ta, pa) = canonical_angles(self.theta_a, self.phi_a);
        let (tb, pb) = canonical_angles(self.theta_b, self.phi_b);
        MeasurementBasis::new(ta, pa, tb, pb)
    }

    pub fn angles(&self, party: Party) -> (f64, f64) {
        match party {
            Party::A => (self.theta_a, self.phi_a),
            Party::B => (self.theta_b, self.phi_b),
        }
    }

    pub fn projectors(&self, party: Party) -> [Mat2; 2] {
        let (t, p) = self.angles(party);
        qubit_projectors(t, p)
    }

    /// The four product projectors `Pi_i^A (x) Pi_j^B`, index `2i + j`.
    pub fn joint_projectors(&self) -> [Mat4; 4] {
        let pa = self.projectors(Party::A);
        let pb = self.projectors(Party::B);
        std::array::from_fn(|k| pa[k / 2].kronecker(&pb[k % 2]))
    }
}
