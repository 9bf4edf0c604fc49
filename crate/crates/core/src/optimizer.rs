//! Grid search followed by Nelder-Mead refinement, used to extremize
//! correlation objectives over measurement angles.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Settings for [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Grid points per angle. Polar angles cover `[0, pi]` inclusive,
    /// azimuthal angles cover `[0, 2 pi)`.
    pub grid_points: usize,
    /// Number of best grid points used as simplex starting points.
    pub starts: usize,
    /// Convergence threshold on the spread of objective values across the
    /// simplex, relative to `1 + |f_best|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Evaluate the grid on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            grid_points: 24,
            starts: 5,
            tolerance: 1e-9,
            max_iterations: 500,
            parallel: true,
        }
    }
}

/// Kind of angular coordinate; fixes grid layout and initial simplex steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Angle {
    Polar,
    Azimuthal,
}

impl Angle {
    fn grid_value(self, k: usize, n: usize) -> f64 {
        use std::f64::consts::PI;
        match self {
            Angle::Polar if n > 1 => PI * k as f64 / (n - 1) as f64,
            Angle::Polar => 0.0,
            Angle::Azimuthal => 2.0 * PI * k as f64 / n as f64,
        }
    }

    fn spacing(self, n: usize) -> f64 {
        use std::f64::consts::PI;
        match self {
            Angle::Polar => PI / (n.max(2) - 1) as f64,
            Angle::Azimuthal => 2.0 * PI / n as f64,
        }
    }
}

/// Outcome of a maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<const D: usize> {
    pub value: f64,
    pub point: [f64; D],
    /// Best value found on the coarse grid.
    pub grid_value: f64,
    /// Number of refinements that met the tolerance.
    pub converged_starts: usize,
}

/// Maximizes `objective` over the angles described by `layout`.
///
/// `canonical` maps a point onto its canonical representative; it is used
/// for the lexicographic tie-break between equal objective values (within
/// 1e-12). Grid points are ranked by value and then by grid index, so the
/// result is independent of `parallel`.
pub fn maximize<const D: usize, F, C>(
    objective: F,
    layout: [Angle; D],
    canonical: C,
    cfg: &OptimizerConfig,
) -> Result<Maximum<D>>
where
    F: Fn(&[f64; D]) -> f64 + Sync,
    C: Fn(&[f64; D]) -> [f64; D],
{
    let n = cfg.grid_points;
    if n < 2 || cfg.starts == 0 {
        return Err(Error::InvalidParameter(format!(
            "optimizer needs grid_points >= 2 and starts >= 1, got {n} and {}",
            cfg.starts
        )));
    }
    let total = n.pow(D as u32);
    let point_at = |mut idx: usize| -> [f64; D] {
        let mut p = [0.0; D];
        for d in (0..D).rev() {
            p[d] = layout[d].grid_value(idx % n, n);
            idx /= n;
        }
        p
    };

    let values: Vec<f64> = if cfg.parallel {
        (0..total).into_par_iter().map(|i| objective(&point_at(i))).collect()
    } else {
        (0..total).map(|i| objective(&point_at(i))).collect()
    };

    let mut ranked: Vec<usize> = (0..total).collect();
    ranked.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let grid_value = values[ranked[0]];

    let steps: [f64; D] = std::array::from_fn(|d| 0.5 * layout[d].spacing(n));
    let neg = |x: &[f64; D]| -objective(x);

    let mut best: Option<([f64; D], f64)> = None;
    let mut converged_starts = 0;
    for &start in ranked.iter().take(cfg.starts) {
        let run = nelder_mead(&neg, point_at(start), steps, cfg.tolerance, cfg.max_iterations);
        if run.converged {
            converged_starts += 1;
        }
        let value = -run.fmin;
        let point = canonical(&run.xmin);
        best = Some(match best {
            None => (point, value),
            Some((bp, bv)) => {
                if value > bv + 1e-12 || ((value - bv).abs() <= 1e-12 && lex_less(&point, &bp)) {
                    (point, value)
                } else {
                    (bp, bv)
                }
            }
        });
    }

    if converged_starts == 0 {
        return Err(Error::OptimizerFailure(format!(
            "no simplex refinement converged within {} iterations (grid maximum {grid_value:e})",
            cfg.max_iterations
        )));
    }
    let (point, value) = best.expect("at least one start");
    Ok(Maximum { value, point, grid_value, converged_starts })
}

fn lex_less<const D: usize>(a: &[f64; D], b: &[f64; D]) -> bool {
    for d in 0..D {
        match a[d].total_cmp(&b[d]) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexResult<const D: usize> {
    pub xmin: [f64; D],
    pub fmin: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead minimization with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2) and an axis-aligned initial
/// simplex.
pub fn nelder_mead<const D: usize, F>(
    f: &F,
    x0: [f64; D],
    steps: [f64; D],
    tol: f64,
    max_iterations: usize,
) -> SimplexResult<D>
where
    F: Fn(&[f64; D]) -> f64,
{
    let mut simplex: Vec<([f64; D], f64)> = Vec::with_capacity(D + 1);
    simplex.push((x0, f(&x0)));
    for d in 0..D {
        let mut x = x0;
        x[d] += steps[d];
        simplex.push((x, f(&x)));
    }

    let mut iterations = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[D].1;
        if (worst - best).abs() <= tol * (1.0 + best.abs()) {
            return SimplexResult { xmin: simplex[0].0, fmin: best, iterations, converged: true };
        }
        if iterations >= max_iterations {
            return SimplexResult { xmin: simplex[0].0, fmin: best, iterations, converged: false };
        }
        iterations += 1;

        let mut centroid = [0.0; D];
        for (x, _) in simplex.iter().take(D) {
            for d in 0..D {
                centroid[d] += x[d] / D as f64;
            }
        }
        let x_worst = simplex[D].0;
        let along = |t: f64| -> [f64; D] {
            std::array::from_fn(|d| centroid[d] + t * (x_worst[d] - centroid[d]))
        };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[D] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[D - 1].1 {
            simplex[D] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = along(-0.5);
            (xc, f(&xc))
        } else {
            let xc = along(0.5);
            (xc, f(&xc))
        };
        if fc < worst.min(fr) {
            simplex[D] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0;
        for v in simplex.iter_mut().skip(1) {
            let x: [f64; D] = std::array::from_fn(|d| x_best[d] + 0.5 * (v.0[d] - x_best[d]));
            *v = (x, f(&x));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_quadratic() {
        let f = |x: &[f64; 2]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let r = nelder_mead(&f, [0.0, 0.0], [0.5, 0.5], 1e-14, 1000);
        assert!(r.converged);
        assert!((r.xmin[0] - 1.0).abs() < 1e-5);
        assert!((r.xmin[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(&f, [-1.2, 1.0], [0.1, 0.1], 1e-16, 5000);
        assert!(r.converged);
        assert!(r.fmin < 1e-10);
    }

    #[test]
    fn maximize_finds_global_peak_and_is_parallel_invariant() {
        // Two peaks; the smaller one sits at a grid point, the larger between points.
        let f = |x: &[f64; 2]| {
            0.8 * (-((x[0] - 0.0).powi(2) + (x[1] - 0.0).powi(2)) * 4.0).exp()
                + (-((x[0] - 2.0).powi(2) + (x[1] - 3.3).powi(2)) * 4.0).exp()
        };
        let id = |x: &[f64; 2]| *x;
        let seq = OptimizerConfig { parallel: false, ..Default::default() };
        let par = OptimizerConfig::default();
        let a = maximize(f, [Angle::Polar, Angle::Azimuthal], id, &seq).unwrap();
        let b = maximize(f, [Angle::Polar, Angle::Azimuthal], id, &par).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 1.0).abs() < 1e-8);
        assert!(a.value >= a.grid_value);
    }

    #[test]
    fn constant_objective_ties_break_lexicographically() {
        let m = maximize(|_: &[f64; 4]| 0.0, [Angle::Polar, Angle::Azimuthal, Angle::Polar, Angle::Azimuthal], |x| *x, &OptimizerConfig::default()).unwrap();
        assert_eq!(m.point, [0.0; 4]);
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let f = |x: &[f64; 2]| x[0].sin() * 3.0 + x[1].cos();
        let cfg = OptimizerConfig { max_iterations: 1, tolerance: 1e-15, ..Default::default() };
        let err = maximize(f, [Angle::Polar, Angle::Azimuthal], |x| *x, &cfg).unwrap_err();
        assert!(matches!(err, Error::OptimizerFailure(_)));
    }
}
