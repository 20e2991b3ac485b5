// SPDX-License-Identifier: Apache-2.0

//! Plain-text dataset and state files.
//!
//! Dataset: a version header, a column header, then one comma-separated
//! record per line (`rotation,re_alpha,im_alpha,tau_ns,e_value,shots`, with
//! `shots` either an integer or `exact`). Numbers are written in the
//! shortest form that parses back to the identical value.
//!
//! State: a version header, `dim`, `basis`, then one `re im` pair per entry
//! in row-major order.

use std::fmt::Write;

use num_complex::Complex;

use super::dataset::{MeasurementRecord, Shots};
use super::{QubitRotation, TomographySetting};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qop::{Basis, DensityMatrix, Operator};
use crate::scalar::Real;

pub const DATASET_HEADER: &str = "# magbell-dataset v1";
pub const DATASET_COLUMNS: &str = "rotation,re_alpha,im_alpha,tau_ns,e_value,shots";
pub const STATE_HEADER: &str = "# magbell-state v1";

pub fn write_dataset<T: Real>(records: &[MeasurementRecord<T>]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 2));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    out.push_str(DATASET_COLUMNS);
    out.push('\n');
    for r in records {
        let shots = match r.shots {
            Shots::Exact => "exact".to_string(),
            Shots::Finite(n) => n.to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.setting.rotation.label(),
            r.setting.alpha.re,
            r.setting.alpha.im,
            r.setting.tau,
            r.e_value,
            shots
        );
    }
    out
}

fn parse_num<T: Real>(field: &str, line: usize, name: &str) -> Result<T> {
    field
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Parse { line, reason: format!("bad {name} '{field}'") })
}

pub fn parse_dataset<T: Real>(text: &str) -> Result<Vec<MeasurementRecord<T>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == DATASET_HEADER => {}
        _ => return Err(Error::Parse { line: 1, reason: format!("expected '{DATASET_HEADER}'") }),
    }
    let mut records = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') || l == DATASET_COLUMNS {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Parse { line, reason: format!("expected 6 fields, found {}", f.len()) });
        }
        let rotation = QubitRotation::from_label(f[0].trim())
            .ok_or_else(|| Error::Parse { line, reason: format!("unknown rotation '{}'", f[0]) })?;
        let alpha = Complex::new(parse_num(f[1], line, "re_alpha")?, parse_num(f[2], line, "im_alpha")?);
        let tau: T = parse_num(f[3], line, "tau_ns")?;
        let e_value: T = parse_num(f[4], line, "e_value")?;
        if e_value < T::zero() || e_value > T::one() {
            return Err(Error::Parse { line, reason: format!("e_value {e_value} outside [0, 1]") });
        }
        let shots = match f[5].trim() {
            "exact" => Shots::Exact,
            s => {
                let n: u64 = s.parse().map_err(|_| Error::Parse { line, reason: format!("bad shots '{s}'") })?;
                Shots::finite(n).map_err(|_| Error::Parse { line, reason: "zero shots".into() })?
            }
        };
        records.push(MeasurementRecord { setting: TomographySetting { rotation, alpha, tau }, e_value, shots });
    }
    Ok(records)
}

pub fn write_state<T: Real>(rho: &DensityMatrix<T>) -> String {
    let m = rho.matrix();
    let d = m.nrows();
    let mut out = format!("{STATE_HEADER}\ndim {d}\nbasis {}\n", rho.op().basis().tag());
    for i in 0..d {
        for j in 0..d {
            let _ = writeln!(out, "{} {}", m[(i, j)].re, m[(i, j)].im);
        }
    }
    out
}

pub fn parse_state<T: Real>(text: &str) -> Result<DensityMatrix<T>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(i, l)| (i + 1, l.trim().to_string()))
            .ok_or_else(|| Error::Parse { line: 0, reason: format!("missing {what}") })
    };
    let (line, header) = next("header")?;
    if header != STATE_HEADER {
        return Err(Error::Parse { line, reason: format!("expected '{STATE_HEADER}'") });
    }
    let (line, dim_line) = next("dim")?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parse { line, reason: "expected 'dim N'".into() })?;
    let (line, basis_line) = next("basis")?;
    let basis = basis_line
        .strip_prefix("basis ")
        .and_then(|s| Basis::from_tag(s.trim()))
        .ok_or_else(|| Error::Parse { line, reason: "expected 'basis TAG'".into() })?;
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let (line, l) = next("matrix entry")?;
        let mut parts = l.split_whitespace();
        let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse { line, reason: "expected 're im'".into() });
        };
        entries.push(Complex::new(parse_num(re, line, "re")?, parse_num(im, line, "im")?));
    }
    let m = CMatrix::from_row_slice(dim, dim, &entries);
    DensityMatrix::new(Operator::new(m, basis)?)
}
