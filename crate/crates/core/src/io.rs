//! Text formats read and written by the command-line tools.
//!
//! Floats are written with 17 significant digits so that every `f64`
//! survives a write/read cycle unchanged.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::correlations::{CorrelationReport, Units};
use crate::error::{Error, Result};
use crate::fitting::{combinations, FitReport, Series};
use crate::state::{DeviationMatrix, Mat4};

pub const DEVIATION_HEADER: &str = "# deviation 4x4";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(tok: &str, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: '{tok}' is not a number")))
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::from(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn format_deviation(d: &DeviationMatrix) -> String {
    let mut out = String::from(DEVIATION_HEADER);
    out.push('\n');
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .flat_map(|j| {
                let z = d.get(i, j);
                [num(z.re), num(z.im)]
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the deviation-matrix text format and validates the matrix.
pub fn parse_deviation(text: &str) -> Result<DeviationMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some(h) if h == DEVIATION_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header '{DEVIATION_HEADER}', found {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut m = Mat4::zeros();
    for i in 0..4 {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("deviation matrix has only {i} rows")))?;
        let vals = line
            .split_whitespace()
            .map(|t| parse_f64(t, &format!("row {i}")))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != 8 {
            return Err(Error::Parse(format!("row {i} has {} values, expected 8", vals.len())));
        }
        for j in 0..4 {
            m[(i, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    if let Some(extra) = lines.next() {
        return Err(Error::Parse(format!("unexpected trailing line '{extra}'")));
    }
    DeviationMatrix::new(m)
}

pub fn series_header() -> String {
    let mut h = String::from("t_s");
    for i in 0..4 {
        for j in 0..4 {
            let _ = write!(h, ",re_{i}{j},im_{i}{j}");
        }
    }
    h
}

/// Time-series CSV: `t_s` then `re_ij,im_ij` for the full matrix, row-major.
pub fn format_series(series: &[(f64, DeviationMatrix)]) -> String {
    let mut out = series_header();
    out.push('\n');
    for (t, d) in series {
        out.push_str(&num(*t));
        for i in 0..4 {
            for j in 0..4 {
                let z = d.get(i, j);
                out.push(',');
                out.push_str(&num(z.re));
                out.push(',');
                out.push_str(&num(z.im));
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_series(text: &str) -> Result<Series> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or(Error::EmptySeries)?;
    if header.trim() != series_header() {
        return Err(Error::Parse("time-series header does not match `t_s,re_00,im_00,...`".into()));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|t| parse_f64(t.trim(), &format!("data row {k}")))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != 33 {
            return Err(Error::Parse(format!("data row {k} has {} columns, expected 33", vals.len())));
        }
        let m = Mat4::from_fn(|i, j| Complex64::new(vals[1 + 2 * (4 * i + j)], vals[2 + 2 * (4 * i + j)]));
        let d = DeviationMatrix::new(m).map_err(|e| Error::Parse(format!("data row {k}: {e}")))?;
        out.push((vals[0], d));
    }
    if out.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(out)
}

/// A single deviation matrix is read as a one-point series at `t = 0`.
pub fn parse_matrix_or_series(text: &str) -> Result<Series> {
    if text.trim_start().starts_with(DEVIATION_HEADER) {
        Ok(vec![(0.0, parse_deviation(text)?)])
    } else {
        parse_series(text)
    }
}

/// Exact-path values in bits alongside an expansion-path row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactColumns {
    pub total_i: f64,
    pub classical_k: f64,
    pub quantum_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRow {
    pub t: f64,
    pub report: CorrelationReport,
    pub exact: Option<ExactColumns>,
}

fn units_label(u: Units) -> &'static str {
    match u {
        Units::EpsSquaredOverLn2 => "eps^2/ln2",
        Units::Bits => "bits",
    }
}

pub fn format_correlations(rows: &[CorrelationRow]) -> String {
    let units = rows.first().map_or(Units::EpsSquaredOverLn2, |r| r.report.units);
    let exact = rows.iter().any(|r| r.exact.is_some());
    let mut out = format!("# units: {}\n", units_label(units));
    if exact {
        out.push_str("# exact columns in bits\n");
    }
    out.push_str("t_s,I,K,Q,theta_A,phi_A,theta_B,phi_B");
    if exact {
        out.push_str(",I_exact,K_exact,Q_exact");
    }
    out.push('\n');
    for r in rows {
        let b = r.report.optimal_basis;
        let mut cols = vec![
            r.t,
            r.report.total_i,
            r.report.classical_k,
            r.report.quantum_q,
            b.theta_a,
            b.phi_a,
            b.theta_b,
            b.phi_b,
        ];
        if let Some(e) = r.exact {
            cols.extend([e.total_i, e.classical_k, e.quantum_q]);
        }
        let cols: Vec<String> = cols.into_iter().map(num).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Columns of a correlations CSV: `(t, I, K, Q)` per row.
pub fn parse_correlations(text: &str) -> Result<Vec<[f64; 4]>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or(Error::EmptySeries)?;
    if !header.starts_with("t_s,I,K,Q") {
        return Err(Error::Parse("correlations header must start with `t_s,I,K,Q`".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let vals = line
                .split(',')
                .take(4)
                .map(|t| parse_f64(t.trim(), &format!("data row {k}")))
                .collect::<Result<Vec<f64>>>()?;
            vals.try_into()
                .map_err(|_| Error::Parse(format!("data row {k} is too short")))
        })
        .collect()
}

/// Flat `key = value` rendering of a fit report.
pub fn format_fit_report(r: &FitReport) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: f64| {
        let _ = writeln!(out, "{k} = {}", num(v));
    };
    kv("C", r.c);
    kv("J0", r.j0.value);
    kv("J0_err", r.j0.uncertainty);
    kv("J1", r.j1.value);
    kv("J1_err", r.j1.uncertainty);
    kv("J2", r.j2.value);
    kv("J2_err", r.j2.uncertainty);
    kv("J1_population", r.j1_population.value);
    kv("J1_population_err", r.j1_population.uncertainty);
    kv("J2_population", r.j2_population.value);
    kv("J2_population_err", r.j2_population.uncertainty);
    kv("R1", r.r1.value);
    kv("R1_err", r.r1.uncertainty);
    kv("R2", r.r2.value);
    kv("R2_err", r.r2.uncertainty);
    kv("R3", r.r3.value);
    kv("R3_err", r.r3.uncertainty);
    kv("consistency_gap", r.consistency_gap);
    let f = &r.fits;
    for (name, rate, err, rms) in [
        ("rate_01_23", f.coherence_01_23.rate, f.coherence_01_23.rate_err, f.coherence_01_23.residual_rms),
        ("rate_02_13", f.coherence_02_13.rate, f.coherence_02_13.rate_err, f.coherence_02_13.residual_rms),
        ("rate_12", f.coherence_12.rate, f.coherence_12.rate_err, f.coherence_12.residual_rms),
        ("rate_pop_r2", f.population_r2.rate, f.population_r2.rate_err, f.population_r2.residual_rms),
        ("rate_pop_r1", f.population_r1.rate, f.population_r1.rate_err, f.population_r1.residual_rms),
        ("rate_pop_r3", f.population_r3.rate, f.population_r3.rate_err, f.population_r3.residual_rms),
    ] {
        kv(name, rate);
        kv(&format!("{name}_err"), err);
        kv(&format!("{name}_residual_rms"), rms);
    }
    let _ = writeln!(out, "consistent = {}", r.consistent);
    out
}

/// Parses `key = value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Observed and fitted values of the six combinations, one row per time.
pub fn format_fit_curves(series: &[(f64, DeviationMatrix)], r: &FitReport) -> Result<String> {
    let c = combinations(series)?;
    let f = &r.fits;
    let mut out = String::from(
        "t_s,re_01_23,im_01_23,fit_re_01_23,fit_im_01_23,re_02_13,im_02_13,fit_re_02_13,fit_im_02_13,\
re_12,im_12,fit_re_12,fit_im_12,pop_r2,fit_pop_r2,pop_r1,fit_pop_r1,pop_r3,fit_pop_r3\n",
    );
    for (k, &t) in c.t.iter().enumerate() {
        let mut cols = vec![t];
        for (obs, fit) in [
            (c.coherence_01_23[k], f.coherence_01_23.eval(t)),
            (c.coherence_02_13[k], f.coherence_02_13.eval(t)),
            (c.coherence_12[k], f.coherence_12.eval(t)),
        ] {
            cols.extend([obs.re, obs.im, fit.re, fit.im]);
        }
        cols.extend([c.population_r2[k], f.population_r2.eval(t)]);
        cols.extend([c.population_r1[k], f.population_r1.eval(t)]);
        cols.extend([c.population_r3[k], f.population_r3.eval(t)]);
        let cols: Vec<String> = cols.into_iter().map(num).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    Ok(out)
}
