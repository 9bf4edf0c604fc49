//! Recovery of spectral densities and population amplitudes from a relaxing
//! deviation-matrix time series.
//!
//! Six linear combinations of matrix elements decay as single exponentials:
//!
//! | combination                   | rate            | offset |
//! |-------------------------------|-----------------|--------|
//! | `D01 + D23`                   | `C (J0 + J1)`   | 0      |
//! | `D02 + D13`                   | `C (J0 + J2)`   | 0      |
//! | `D12`                         | `C (J1 + J2)`   | 0      |
//! | `D00 + D11 - D22 - D33`       | `2 C J2`        | 8      |
//! | `-D00 + D11 + D22 - D33`      | `2 C (J1 + J2)` | 0      |
//! | `D00 - D11 + D22 - D33`       | `2 C J1`        | 4      |
//!
//! The coherence rates determine `J0, J1, J2`; the population rates give a
//! second estimate of `J1, J2` and their amplitudes are `R2, R1, R3`.

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::relaxation::{population_combinations, POPULATION_OFFSETS};
use crate::state::{DeviationMatrix, Mat4};

pub type Series = Vec<(f64, DeviationMatrix)>;

const MAX_ITERATIONS: usize = 200;
const PARAM_TOL: f64 = 1e-10;
/// Amplitudes smaller than this many standard errors are not identifiable.
const SIGNIFICANCE: f64 = 3.0;

/// Least-squares fit of `offset + amplitude * exp(-rate * t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFitResult {
    pub amplitude: f64,
    pub rate: f64,
    pub offset: f64,
    pub residual_rms: f64,
    pub amplitude_err: f64,
    pub rate_err: f64,
    /// Zero when the offset was held fixed.
    pub offset_err: f64,
}

impl ExpFitResult {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (-self.rate * t).exp()
    }
}

/// Joint fit of real and imaginary parts with a shared rate and zero offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexExpFit {
    pub amplitude: Complex64,
    pub rate: f64,
    pub residual_rms: f64,
    pub amplitude_err: f64,
    pub rate_err: f64,
}

impl ComplexExpFit {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.amplitude * (-self.rate * t).exp()
    }
}

struct Channel<'a> {
    values: &'a [f64],
    offset: Option<f64>,
}

struct SharedFit {
    rate: f64,
    amplitudes: Vec<f64>,
    offsets: Vec<f64>,
    rate_err: f64,
    amplitude_errs: Vec<f64>,
    offset_errs: Vec<f64>,
    residual_rms: f64,
}

fn check_times(t: &[f64]) -> Result<()> {
    if t.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "exponential fit needs at least 3 points, got {}",
            t.len()
        )));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("fit times must be strictly increasing".into()));
    }
    Ok(())
}

/// Slope of `ln|y - offset|` against `t`, using points on the same side of
/// the offset as the first sample.
fn log_linear_rate(t: &[f64], y: &[f64], offset: f64, skip_last: bool) -> Option<f64> {
    let z0 = y[0] - offset;
    if z0 == 0.0 {
        return None;
    }
    let n = if skip_last { t.len() - 1 } else { t.len() };
    let pts: Vec<(f64, f64)> = (0..n)
        .filter_map(|i| {
            let z = y[i] - offset;
            (z * z0.signum() > 1e-3 * z0.abs()).then(|| (t[i], z.abs().ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lm = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - lm)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let rate = -sxy / sxx;
    (rate.is_finite() && rate > 0.0).then_some(rate)
}

/// Parameter layout: `[rate, amplitude_0, (offset_0), amplitude_1, ...]`.
fn unpack(p: &[f64], channels: &[Channel]) -> (f64, Vec<f64>, Vec<f64>) {
    let mut amps = Vec::with_capacity(channels.len());
    let mut offs = Vec::with_capacity(channels.len());
    let mut k = 1;
    for ch in channels {
        amps.push(p[k]);
        k += 1;
        match ch.offset {
            Some(o) => offs.push(o),
            None => {
                offs.push(p[k]);
                k += 1;
            }
        }
    }
    (p[0], amps, offs)
}

fn residuals_and_jacobian(t: &[f64], channels: &[Channel], p: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = t.len();
    let (rate, amps, offs) = unpack(p, channels);
    let mut r = DVector::zeros(n * channels.len());
    let mut jac = DMatrix::zeros(n * channels.len(), p.len());
    let mut col = 1;
    for (c, ch) in channels.iter().enumerate() {
        for i in 0..n {
            let row = c * n + i;
            let e = (-rate * t[i]).exp();
            r[row] = ch.values[i] - (offs[c] + amps[c] * e);
            jac[(row, 0)] = -amps[c] * t[i] * e;
            jac[(row, col)] = e;
            if ch.offset.is_none() {
                jac[(row, col + 1)] = 1.0;
            }
        }
        col += if ch.offset.is_none() { 2 } else { 1 };
    }
    (r, jac)
}

/// Linear least squares for amplitudes (and free offsets) at a fixed rate.
fn linear_params(t: &[f64], channels: &[Channel], rate: f64) -> Vec<f64> {
    let mut p = vec![rate];
    for ch in channels {
        let e: Vec<f64> = t.iter().map(|&ti| (-rate * ti).exp()).collect();
        match ch.offset {
            Some(o) => {
                let num: f64 = e.iter().zip(ch.values).map(|(e, y)| e * (y - o)).sum();
                let den: f64 = e.iter().map(|e| e * e).sum();
                p.push(num / den);
            }
            None => {
                let n = t.len() as f64;
                let se: f64 = e.iter().sum();
                let see: f64 = e.iter().map(|e| e * e).sum();
                let sy: f64 = ch.values.iter().sum();
                let sey: f64 = e.iter().zip(ch.values).map(|(e, y)| e * y).sum();
                let det = see * n - se * se;
                let amp = (sey * n - se * sy) / det;
                let off = (see * sy - se * sey) / det;
                p.push(amp);
                p.push(off);
            }
        }
    }
    p
}

fn fit_shared_rate(t: &[f64], channels: &[Channel]) -> Result<SharedFit> {
    check_times(t)?;

    // Degeneracy: nothing moves away from the (known or mean) offset.
    let mut spread: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for ch in channels {
        let reference = ch.offset.unwrap_or_else(|| ch.values.iter().sum::<f64>() / ch.values.len() as f64);
        for &y in ch.values {
            spread = spread.max((y - reference).abs());
            scale = scale.max(y.abs());
        }
    }
    if spread <= 1e-12 * scale {
        return Err(Error::DegenerateSignal(format!(
            "signal never departs from its offset (max deviation {spread:e})"
        )));
    }

    // Initial rate from the channel with the largest excursion.
    let dominant = channels
        .iter()
        .max_by(|a, b| {
            let ex = |c: &Channel| {
                let o = c.offset.unwrap_or(*c.values.last().unwrap());
                (c.values[0] - o).abs()
            };
            ex(a).total_cmp(&ex(b))
        })
        .unwrap();
    let guess_offset = dominant.offset.unwrap_or(*dominant.values.last().unwrap());
    let span = t[t.len() - 1] - t[0];
    let rate0 = log_linear_rate(t, dominant.values, guess_offset, dominant.offset.is_none())
        .unwrap_or(3.0 / span);

    let mut p = linear_params(t, channels, rate0);
    let (mut r, mut jac) = residuals_and_jacobian(t, channels, &p);
    let mut cost = r.norm_squared();
    let data_norm: f64 = channels.iter().flat_map(|c| c.values.iter()).map(|y| y * y).sum();
    let mut lambda = 1e-3;
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        if cost <= 1e-30 * data_norm.max(1e-300) {
            converged = true;
            break;
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut damped = jtj.clone();
        for i in 0..p.len() {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let step = match damped.lu().solve(&jtr) {
            Some(s) => s,
            None => {
                lambda *= 10.0;
                continue;
            }
        };
        let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let (r_new, jac_new) = residuals_and_jacobian(t, channels, &trial);
        let cost_new = r_new.norm_squared();
        if cost_new.is_finite() && cost_new <= cost {
            let small = step
                .iter()
                .zip(trial.iter())
                .all(|(s, v)| s.abs() <= PARAM_TOL * v.abs().max(1e-300));
            p = trial;
            r = r_new;
            jac = jac_new;
            cost = cost_new;
            lambda = (lambda / 10.0).max(1e-12);
            if small {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e14 {
                // No descent direction left at double precision.
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FitDivergence(format!(
            "no convergence within {MAX_ITERATIONS} iterations"
        )));
    }

    let (rate, amplitudes, offsets) = unpack(&p, channels);
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::FitDivergence(format!("fitted rate {rate} is not a decay rate")));
    }

    let n_obs = r.len();
    let dof = n_obs.saturating_sub(p.len()).max(1);
    let s2 = cost / dof as f64;
    let cov = (jac.transpose() * &jac)
        .try_inverse()
        .ok_or_else(|| Error::FitDivergence("singular normal matrix at solution".into()))?
        * s2;
    let err = |i: usize| cov[(i, i)].max(0.0).sqrt();
    let mut amplitude_errs = Vec::new();
    let mut offset_errs = Vec::new();
    let mut k = 1;
    for ch in channels {
        amplitude_errs.push(err(k));
        k += 1;
        if ch.offset.is_none() {
            offset_errs.push(err(k));
            k += 1;
        } else {
            offset_errs.push(0.0);
        }
    }

    let amp_norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    let amp_err = amplitude_errs.iter().map(|a| a * a).sum::<f64>().sqrt();
    if amp_err > 0.0 && amp_norm < SIGNIFICANCE * amp_err {
        return Err(Error::DegenerateSignal(format!(
            "amplitude {amp_norm:e} is within {SIGNIFICANCE} standard errors of zero"
        )));
    }

    Ok(SharedFit {
        rate,
        amplitudes,
        offsets,
        rate_err: err(0),
        amplitude_errs,
        offset_errs,
        residual_rms: (cost / n_obs as f64).sqrt(),
    })
}

/// Fits `offset + amplitude * exp(-rate * t)`. A supplied `known_offset` is
/// held fixed.
pub fn fit_exponential(signal: &[(f64, f64)], known_offset: Option<f64>) -> Result<ExpFitResult> {
    let t: Vec<f64> = signal.iter().map(|s| s.0).collect();
    let y: Vec<f64> = signal.iter().map(|s| s.1).collect();
    let fit = fit_shared_rate(&t, &[Channel { values: &y, offset: known_offset }])?;
    Ok(ExpFitResult {
        amplitude: fit.amplitudes[0],
        rate: fit.rate,
        offset: fit.offsets[0],
        residual_rms: fit.residual_rms,
        amplitude_err: fit.amplitude_errs[0],
        rate_err: fit.rate_err,
        offset_err: fit.offset_errs[0],
    })
}

/// Fits `amplitude * exp(-rate * t)` to a complex signal, real and imaginary
/// parts sharing the rate.
pub fn fit_complex_exponential(signal: &[(f64, Complex64)]) -> Result<ComplexExpFit> {
    let t: Vec<f64> = signal.iter().map(|s| s.0).collect();
    let re: Vec<f64> = signal.iter().map(|s| s.1.re).collect();
    let im: Vec<f64> = signal.iter().map(|s| s.1.im).collect();
    // Drop a channel that is identically zero; it carries no rate information
    // and would make the normal matrix singular.
    let active = |v: &[f64]| v.iter().any(|x| *x != 0.0);
    let mut channels = Vec::new();
    let mut which = Vec::new();
    if active(&re) {
        channels.push(Channel { values: &re, offset: Some(0.0) });
        which.push(0);
    }
    if active(&im) {
        channels.push(Channel { values: &im, offset: Some(0.0) });
        which.push(1);
    }
    if channels.is_empty() {
        check_times(&t)?;
        return Err(Error::DegenerateSignal("complex signal is identically zero".into()));
    }
    let fit = fit_shared_rate(&t, &channels)?;
    let mut amp = Complex64::new(0.0, 0.0);
    for (k, &w) in which.iter().enumerate() {
        if w == 0 {
            amp.re = fit.amplitudes[k];
        } else {
            amp.im = fit.amplitudes[k];
        }
    }
    Ok(ComplexExpFit {
        amplitude: amp,
        rate: fit.rate,
        residual_rms: fit.residual_rms,
        amplitude_err: fit.amplitude_errs.iter().map(|a| a * a).sum::<f64>().sqrt(),
        rate_err: fit.rate_err,
    })
}

/// The six single-exponential signals extracted from a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Combinations {
    pub t: Vec<f64>,
    /// `D01 + D23`, rate `C (J0 + J1)`.
    pub coherence_01_23: Vec<Complex64>,
    /// `D02 + D13`, rate `C (J0 + J2)`.
    pub coherence_02_13: Vec<Complex64>,
    /// `D12`, rate `C (J1 + J2)`.
    pub coherence_12: Vec<Complex64>,
    /// `D00 + D11 - D22 - D33 = 8 + R2 exp(-2 C J2 t)`.
    pub population_r2: Vec<f64>,
    /// `-D00 + D11 + D22 - D33 = R1 exp(-2 C (J1 + J2) t)`.
    pub population_r1: Vec<f64>,
    /// `D00 - D11 + D22 - D33 = 4 + R3 exp(-2 C J1 t)`.
    pub population_r3: Vec<f64>,
}

pub fn combinations(series: &[(f64, DeviationMatrix)]) -> Result<Combinations> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut out = Combinations {
        t: Vec::new(),
        coherence_01_23: Vec::new(),
        coherence_02_13: Vec::new(),
        coherence_12: Vec::new(),
        population_r2: Vec::new(),
        population_r1: Vec::new(),
        population_r3: Vec::new(),
    };
    for (t, d) in series {
        out.t.push(*t);
        out.coherence_01_23.push(d.get(0, 1) + d.get(2, 3));
        out.coherence_02_13.push(d.get(0, 2) + d.get(1, 3));
        out.coherence_12.push(d.get(1, 2));
        let [pd, pe, pf] = population_combinations(d);
        out.population_r2.push(pd);
        out.population_r1.push(pe);
        out.population_r3.push(pf);
    }
    Ok(out)
}

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Relative disagreement between the two `(J1, J2)` determinations above
    /// which the fits are flagged.
    pub consistency_threshold: f64,
    /// Turn a flagged disagreement into [`Error::InconsistentFits`].
    pub strict: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { consistency_threshold: 0.25, strict: false }
    }
}

/// The six individual fits behind a [`FitReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinationFits {
    pub coherence_01_23: ComplexExpFit,
    pub coherence_02_13: ComplexExpFit,
    pub coherence_12: ComplexExpFit,
    pub population_r2: ExpFitResult,
    pub population_r1: ExpFitResult,
    pub population_r3: ExpFitResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub c: f64,
    /// From the coherence rates.
    pub j0: Estimate,
    pub j1: Estimate,
    pub j2: Estimate,
    /// `(J1, J2)` from the population rates.
    pub j1_population: Estimate,
    pub j2_population: Estimate,
    pub r1: Estimate,
    pub r2: Estimate,
    pub r3: Estimate,
    /// `max(|J1 - J1_pop| / J1_pop, |J2 - J2_pop| / J2_pop)`.
    pub consistency_gap: f64,
    pub consistent: bool,
    pub fits: CombinationFits,
}

/// Maps `(J0, J1, J2)` onto the coherence rates divided by `C`.
pub const COHERENCE_SYSTEM: [[f64; 3]; 3] = [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];

/// 2-norm condition number of [`COHERENCE_SYSTEM`].
pub fn coherence_system_condition() -> f64 {
    let m = Matrix3::from_fn(|i, j| COHERENCE_SYSTEM[i][j]);
    let sv = m.singular_values();
    sv.max() / sv.min()
}

pub fn estimate_parameters(series: &[(f64, DeviationMatrix)], c: f64, cfg: &FitConfig) -> Result<FitReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let comb = combinations(series)?;
    let t = &comb.t;
    let cplx = |v: &[Complex64]| -> Vec<(f64, Complex64)> { t.iter().copied().zip(v.iter().copied()).collect() };
    let real = |v: &[f64]| -> Vec<(f64, f64)> { t.iter().copied().zip(v.iter().copied()).collect() };

    let fits = CombinationFits {
        coherence_01_23: fit_complex_exponential(&cplx(&comb.coherence_01_23))?,
        coherence_02_13: fit_complex_exponential(&cplx(&comb.coherence_02_13))?,
        coherence_12: fit_complex_exponential(&cplx(&comb.coherence_12))?,
        population_r2: fit_exponential(&real(&comb.population_r2), Some(POPULATION_OFFSETS[0]))?,
        population_r1: fit_exponential(&real(&comb.population_r1), Some(POPULATION_OFFSETS[1]))?,
        population_r3: fit_exponential(&real(&comb.population_r3), Some(POPULATION_OFFSETS[2]))?,
    };

    let (ka, kb, kc) = (fits.coherence_01_23.rate, fits.coherence_02_13.rate, fits.coherence_12.rate);
    let coh_var = fits.coherence_01_23.rate_err.powi(2) + fits.coherence_02_13.rate_err.powi(2) + fits.coherence_12.rate_err.powi(2);
    let coh_sigma = coh_var.sqrt() / (2.0 * c);
    let j0 = Estimate { value: (ka + kb - kc) / (2.0 * c), uncertainty: coh_sigma };
    let j1 = Estimate { value: (ka - kb + kc) / (2.0 * c), uncertainty: coh_sigma };
    let j2 = Estimate { value: (-ka + kb + kc) / (2.0 * c), uncertainty: coh_sigma };

    // Least squares over 2CJ2 = kd, 2C(J1 + J2) = ke, 2CJ1 = kf.
    let (kd, ke, kf) = (fits.population_r2.rate, fits.population_r1.rate, fits.population_r3.rate);
    let (sd, se, sf) = (fits.population_r2.rate_err, fits.population_r1.rate_err, fits.population_r3.rate_err);
    let j1_population = Estimate {
        value: (2.0 * kf + ke - kd) / 3.0 / (2.0 * c),
        uncertainty: (4.0 * sf * sf + se * se + sd * sd).sqrt() / 3.0 / (2.0 * c),
    };
    let j2_population = Estimate {
        value: (2.0 * kd + ke - kf) / 3.0 / (2.0 * c),
        uncertainty: (4.0 * sd * sd + se * se + sf * sf).sqrt() / 3.0 / (2.0 * c),
    };

    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let consistency_gap = rel(j1.value, j1_population.value).max(rel(j2.value, j2_population.value));
    let consistent = consistency_gap <= cfg.consistency_threshold;
    if !consistent {
        if cfg.strict {
            return Err(Error::InconsistentFits { gap: consistency_gap, threshold: cfg.consistency_threshold });
        }
        log::warn!(
            "coherence and population fits disagree on (J1, J2): gap {:.3} > {:.3}",
            consistency_gap,
            cfg.consistency_threshold
        );
    }

    let est = |f: &ExpFitResult| Estimate { value: f.amplitude, uncertainty: f.amplitude_err };
    Ok(FitReport {
        c,
        j0,
        j1,
        j2,
        j1_population,
        j2_population,
        r1: est(&fits.population_r1),
        r2: est(&fits.population_r2),
        r3: est(&fits.population_r3),
        consistency_gap,
        consistent,
        fits,
    })
}

/// Adds `sigma * N(0, 1)` to the real and imaginary part of every entry
/// (row-major, real part first; generator `ChaCha8Rng::seed_from_u64(seed)`),
/// then restores hermiticity and removes the trace.
pub fn add_noise(series: &[(f64, DeviationMatrix)], sigma: f64, seed: u64) -> Result<Series> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(series.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        sigma * z
    };
    Ok(series
        .iter()
        .map(|(t, d)| {
            let mut m: Mat4 = *d.matrix();
            for i in 0..4 {
                for j in 0..4 {
                    let re = draw();
                    let im = draw();
                    m[(i, j)] += Complex64::new(re, im);
                }
            }
            (*t, DeviationMatrix::project(&m))
        })
        .collect())
}
