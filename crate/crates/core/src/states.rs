//! Initial deviation matrices and the spin-3/2 level structure.
//!
//! The four Zeeman levels are mapped onto the two-qubit basis as
//! `m = 3/2, 1/2, -1/2, -3/2  <->  |00>, |01>, |10>, |11>`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::HermitianEigen;
use crate::error::{Error, Result};
use crate::state::{DeviationMatrix, Mat4, TRACE_TOL};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Spin-3/2 angular momentum operators (hbar = 1) in the level order above.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub iz: Mat4,
    pub ix: Mat4,
    pub iy: Mat4,
    pub isq: Mat4,
}

impl SpinOperators {
    pub fn new() -> Self {
        let m = [1.5, 0.5, -0.5, -1.5];
        let iz = Mat4::from_fn(|i, j| if i == j { re(m[i]) } else { ZERO });
        // <m+1| I+ |m> = sqrt(I(I+1) - m(m+1)); raising m moves one index down.
        let mut iplus = Mat4::zeros();
        for k in 1..4 {
            let mk = m[k];
            iplus[(k - 1, k)] = re((3.75 - mk * (mk + 1.0)).sqrt());
        }
        let iminus = iplus.adjoint();
        let ix = (iplus + iminus).scale(0.5);
        let iy = (iplus - iminus) * Complex64::new(0.0, -0.5);
        let isq = ix * ix + iy * iy + iz * iz;
        SpinOperators { iz, ix, iy, isq }
    }

    /// `I+ = Ix + i Iy`.
    pub fn raising(&self) -> Mat4 {
        self.ix + self.iy * Complex64::new(0.0, 1.0)
    }
}

impl Default for SpinOperators {
    fn default() -> Self {
        Self::new()
    }
}

/// First-order quadrupolar Hamiltonian parameters (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    pub omega_l: f64,
    pub omega_q: f64,
}

impl HamiltonianParams {
    pub fn new(omega_l: f64, omega_q: f64) -> Self {
        if omega_l.abs() <= omega_q.abs() {
            log::warn!(
                "|omega_L| = {} does not dominate |omega_Q| = {}; first-order quadrupolar treatment is unreliable",
                omega_l.abs(),
                omega_q.abs()
            );
        }
        HamiltonianParams { omega_l, omega_q }
    }

    /// `H = -omega_L Iz + omega_Q (3 Iz^2 - I^2)`.
    pub fn hamiltonian(&self, ops: &SpinOperators) -> Mat4 {
        ops.iz.scale(-self.omega_l) + (ops.iz * ops.iz).scale(3.0 * self.omega_q) - ops.isq.scale(self.omega_q)
    }
}

/// The three single-quantum transition angular frequencies, ascending:
/// `{omega_L - 6 omega_Q, omega_L, omega_L + 6 omega_Q}` for positive parameters.
pub fn transition_frequencies(h: &HamiltonianParams) -> [f64; 3] {
    let ops = SpinOperators::new();
    let ham = h.hamiltonian(&ops);
    // H is diagonal in the Zeeman basis; E(m-1) - E(m) for adjacent levels.
    let mut f = [0.0; 3];
    for k in 0..3 {
        f[k] = ham[(k + 1, k + 1)].re - ham[(k, k)].re;
    }
    f.sort_by(f64::total_cmp);
    f
}

/// Bell-basis labels: `Psi+- = (|00> +- |11>)/sqrt2`, `Phi+- = (|01> +- |10>)/sqrt2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PsiPlus,
        BellState::PsiMinus,
        BellState::PhiPlus,
        BellState::PhiMinus,
    ];

    pub fn vector(self) -> [Complex64; 4] {
        let h = re(FRAC_1_SQRT_2);
        match self {
            BellState::PsiPlus => [h, ZERO, ZERO, h],
            BellState::PsiMinus => [h, ZERO, ZERO, -h],
            BellState::PhiPlus => [ZERO, h, h, ZERO],
            BellState::PhiMinus => [ZERO, h, -h, ZERO],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi+" => Ok(BellState::PsiPlus),
            "psi-" | "psi−" => Ok(BellState::PsiMinus),
            "phi+" => Ok(BellState::PhiPlus),
            "phi-" | "phi−" => Ok(BellState::PhiMinus),
            _ => Err(Error::Parse(format!("unknown Bell state '{s}'"))),
        }
    }
}

/// `alpha (|bell><bell| - 1/4)`.
pub fn bell_pseudopure(which: BellState, alpha: f64) -> DeviationMatrix {
    DeviationMatrix::pseudopure(&which.vector(), alpha)
}

/// Populations `a..d` and coherences `e` (|01><10|) and `f` (|00><11|) of an
/// X-shaped deviation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: Complex64,
    pub f: Complex64,
}

/// Diagonal `(a, b, c, d)`, anti-diagonal `(f, e, e*, f*)`, zeros elsewhere.
pub fn x_pseudopure(p: &XStateParams) -> Result<DeviationMatrix> {
    let tr = p.a + p.b + p.c + p.d;
    if tr.abs() > TRACE_TOL {
        return Err(Error::TraceViolation(tr));
    }
    let mut m = Mat4::zeros();
    m[(0, 0)] = re(p.a);
    m[(1, 1)] = re(p.b);
    m[(2, 2)] = re(p.c);
    m[(3, 3)] = re(p.d);
    m[(0, 3)] = p.f;
    m[(3, 0)] = p.f.conj();
    m[(1, 2)] = p.e;
    m[(2, 1)] = p.e.conj();
    DeviationMatrix::new(m)
}

/// Reads the X parameters back out of a deviation matrix (ignoring any
/// entries outside the X pattern).
pub fn x_params(d: &DeviationMatrix) -> XStateParams {
    XStateParams {
        a: d.get(0, 0).re,
        b: d.get(1, 1).re,
        c: d.get(2, 2).re,
        d: d.get(3, 3).re,
        e: d.get(1, 2),
        f: d.get(0, 3),
    }
}

/// Seeded random X-form pseudopure deviation `alpha (|x><x| - 1/4)`.
///
/// Generator: `ChaCha8Rng::seed_from_u64(seed)`. The first draw picks the
/// sector (`u < 0.5` selects `{|00>, |11>}`, otherwise `{|01>, |10>}`); the
/// next three uniform draws `(u1, u2, u3)` give a Haar-random qubit state in
/// that sector, `cos(t)|first> + e^{i phi} sin(t)|second>` with
/// `cos^2(t) = u1`, `phi = 2 pi u2`, and a global phase `2 pi u3` that drops
/// out of the projector.
pub fn random_x(seed: u64, alpha: f64) -> DeviationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sector: f64 = rng.random();
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let _global: f64 = rng.random();
    let (first, second) = if sector < 0.5 { (0, 3) } else { (1, 2) };
    let cos_t = u1.sqrt();
    let sin_t = (1.0 - u1).sqrt();
    let mut psi = [ZERO; 4];
    psi[first] = re(cos_t);
    psi[second] = Complex64::from_polar(sin_t, 2.0 * PI * u2);
    DeviationMatrix::pseudopure(&psi, alpha)
}

/// Computational-basis pseudopure `alpha (|ij><ij| - 1/4)`, `index = 2i + j`.
pub fn computational_pseudopure(index: usize, alpha: f64) -> Result<DeviationMatrix> {
    if index > 3 {
        return Err(Error::InvalidParameter(format!("basis index {index} out of range")));
    }
    let mut psi = [ZERO; 4];
    psi[index] = re(1.0);
    Ok(DeviationMatrix::pseudopure(&psi, alpha))
}

/// Thermal-equilibrium deviation `2 Iz = diag(3, 1, -1, -3)`.
pub fn equilibrium_deviation() -> DeviationMatrix {
    DeviationMatrix::project(&SpinOperators::new().iz.scale(2.0))
}

/// Eigenvalue spectrum of the assembled Hamiltonian (ascending), used as an
/// independent check of [`transition_frequencies`].
pub fn hamiltonian_spectrum(h: &HamiltonianParams) -> [f64; 4] {
    let eig = HermitianEigen::new(&h.hamiltonian(&SpinOperators::new()));
    [eig.values[0], eig.values[1], eig.values[2], eig.values[3]]
}
