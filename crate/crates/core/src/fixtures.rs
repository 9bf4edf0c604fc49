//! Reference initial states.

use num_complex::Complex64;

use crate::state::{DeviationMatrix, Mat4};

/// Deviation matrix with every coherence populated and populations
/// `(0.375, -0.325, -0.625, 0.575)`, so that `(R1, R2, R3) = (-1.9, -7.9, -4.5)`.
/// All six fit combinations carry signal.
pub fn full_superposition() -> DeviationMatrix {
    let c = Complex64::new;
    let upper = [
        ((0, 1), c(0.6, 0.2)),
        ((0, 2), c(0.4, -0.3)),
        ((0, 3), c(0.3, 0.4)),
        ((1, 2), c(0.6, -0.3)),
        ((1, 3), c(0.5, -0.2)),
        ((2, 3), c(0.5, 0.1)),
    ];
    let mut m = Mat4::from_diagonal(&nalgebra::Vector4::new(c(0.375, 0.0), c(-0.325, 0.0), c(-0.625, 0.0), c(0.575, 0.0)));
    for ((i, j), z) in upper {
        m[(i, j)] = z;
        m[(j, i)] = z.conj();
    }
    DeviationMatrix::new(m).expect("fixture is Hermitian and traceless")
}
