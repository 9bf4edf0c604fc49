//! Total, classical and quantum correlations of a two-qubit deviation matrix.
//!
//! Two routes are provided: [`expansion`] works with the leading `eps^2`
//! term only and reports values in units of `eps^2 / ln 2`, [`exact`] uses
//! full von Neumann and Shannon entropies of `rho = 1/4 + eps * delta` and
//! reports bits.

pub mod basis;
pub mod exact;
pub mod expansion;

use std::f64::consts::LN_2;

pub use basis::MeasurementBasis;
pub use exact::{
    classical_correlation_k_exact, classical_exact_c, classical_mi_exact, correlations_exact, discord_exact,
    mutual_information_exact, one_sided,
};
pub use expansion::{
    classical_correlation_k, classical_mi_expansion, measured_deviation, mutual_information_expansion,
    quantum_correlation_q,
};

use crate::state::Party;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Expansion,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    /// Dimensionless coefficient of `eps^2 / ln 2`.
    EpsSquaredOverLn2,
    Bits,
}

/// One-sided discord `D` and classical correlation `C = I - D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSided {
    pub measured: Party,
    pub discord: f64,
    pub classical: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub total_i: f64,
    pub classical_k: f64,
    pub quantum_q: f64,
    pub optimal_basis: MeasurementBasis,
    pub mode: Mode,
    pub units: Units,
    pub one_sided: Option<OneSided>,
}

impl CorrelationReport {
    /// Converts expansion-unit values to bits by multiplying with
    /// `eps^2 / ln 2`. Reports already in bits are returned unchanged.
    pub fn in_bits(&self, epsilon: f64) -> CorrelationReport {
        if self.units == Units::Bits {
            return *self;
        }
        let f = epsilon * epsilon / LN_2;
        CorrelationReport {
            total_i: self.total_i * f,
            classical_k: self.classical_k * f,
            quantum_q: self.quantum_q * f,
            units: Units::Bits,
            one_sided: self.one_sided.map(|o| OneSided {
                discord: o.discord * f,
                classical: o.classical * f,
                ..o
            }),
            ..*self
        }
    }
}
