//! Second-order (in epsilon) correlation measures, expressed directly in
//! terms of the deviation matrix. All values are in units of `eps^2 / ln 2`.

use num_complex::Complex64;

use super::basis::{qubit_vectors, MeasurementBasis};
use super::{CorrelationReport, Mode, Units};
use crate::optimizer::{maximize, Angle, OptimizerConfig};
use crate::state::{trace_square, DeviationMatrix, Mat4, Party};

const LAYOUT: [Angle; 4] = [Angle::Polar, Angle::Azimuthal, Angle::Polar, Angle::Azimuthal];

/// `2 Tr d^2 - Tr d_A^2 - Tr d_B^2`.
pub fn mutual_information_expansion(d: &DeviationMatrix) -> f64 {
    2.0 * trace_square(d.matrix())
        - trace_square(&d.partial_trace(Party::A))
        - trace_square(&d.partial_trace(Party::B))
}

/// `sum_ij (Pi_i (x) Pi_j) d (Pi_i (x) Pi_j)`.
pub fn measured_deviation(d: &DeviationMatrix, b: &MeasurementBasis) -> DeviationMatrix {
    let mut eta = Mat4::zeros();
    for p in b.joint_projectors() {
        eta += p * d.matrix() * p;
    }
    DeviationMatrix::project(&eta)
}

/// Projective measurement of one qubit only, identity on the other.
pub fn measured_deviation_one_side(d: &DeviationMatrix, party: Party, b: &MeasurementBasis) -> DeviationMatrix {
    let local = b.projectors(party);
    let mut eta = Mat4::zeros();
    for p in local {
        let full = match party {
            Party::A => p.kronecker(&crate::state::Mat2::identity()),
            Party::B => crate::state::Mat2::identity().kronecker(&p),
        };
        eta += full * d.matrix() * full;
    }
    DeviationMatrix::project(&eta)
}

/// Mutual information of the measured state, `2 Tr eta^2 - Tr eta_A^2 - Tr eta_B^2`
/// with `eta = measured_deviation(d, b)`.
pub fn classical_mi_expansion(d: &DeviationMatrix, b: &MeasurementBasis) -> f64 {
    mutual_information_expansion(&measured_deviation(d, b))
}

/// Outcome deviations `delta_ij = <a_i b_j| d |a_i b_j>` of a local measurement.
pub(crate) fn outcome_deviations(m: &Mat4, angles: &[f64; 4]) -> [[f64; 2]; 2] {
    let va = qubit_vectors(angles[0], angles[1]);
    let vb = qubit_vectors(angles[2], angles[3]);
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let v: [Complex64; 4] = std::array::from_fn(|k| va[i][k / 2] * vb[j][k % 2]);
            let mut s = Complex64::new(0.0, 0.0);
            for r in 0..4 {
                let mut row = Complex64::new(0.0, 0.0);
                for c in 0..4 {
                    row += m[(r, c)] * v[c];
                }
                s += v[r].conj() * row;
            }
            out[i][j] = s.re;
        }
    }
    out
}

/// Same value as [`classical_mi_expansion`]; the measured matrix is diagonal
/// in the product basis, so only the four outcome deviations are needed.
pub(crate) fn classical_mi_from_outcomes(p: &[[f64; 2]; 2]) -> f64 {
    let joint: f64 = p.iter().flatten().map(|x| x * x).sum();
    let rows: f64 = (0..2).map(|i| (p[i][0] + p[i][1]).powi(2)).sum();
    let cols: f64 = (0..2).map(|j| (p[0][j] + p[1][j]).powi(2)).sum();
    2.0 * joint - rows - cols
}

/// `K = max_b classical_mi_expansion(d, b)` with an optimizing basis.
pub fn classical_correlation_k(
    d: &DeviationMatrix,
    opt: &OptimizerConfig,
) -> crate::Result<(f64, MeasurementBasis)> {
    let m = *d.matrix();
    let max = maximize(
        |x: &[f64; 4]| classical_mi_from_outcomes(&outcome_deviations(&m, x)),
        LAYOUT,
        |x| MeasurementBasis::from_array(x).canonical().to_array(),
        opt,
    )?;
    Ok((max.value, MeasurementBasis::from_array(&max.point)))
}

/// `I`, `K` and `Q = I - K` in units of `eps^2 / ln 2`.
pub fn quantum_correlation_q(d: &DeviationMatrix, opt: &OptimizerConfig) -> crate::Result<CorrelationReport> {
    let total_i = mutual_information_expansion(d);
    let (classical_k, basis) = classical_correlation_k(d, opt)?;
    Ok(CorrelationReport {
        total_i,
        classical_k,
        quantum_q: total_i - classical_k,
        optimal_basis: basis,
        mode: Mode::Expansion,
        units: Units::EpsSquaredOverLn2,
        one_sided: None,
    })
}
