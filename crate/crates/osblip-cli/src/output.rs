//! Output plumbing: JSON/CSV formatting and file-or-stdout emission.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use nalgebra::DMatrix;
use serde::Serialize;

use osblip::efficiency::EfficiencyCurve;
use osblip::{Error, Result};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

/// Formats a float with 12 significant digits, stable across platforms.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Writes to the path when one was given, otherwise prints to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Curve CSV: one row per grid point per curve, 12 significant digits.
pub fn curve_csv(curves: &[EfficiencyCurve], n: usize, r: usize) -> String {
    let mut s = String::from("delta,value,kind,n,r,targets\n");
    for c in curves {
        let targets = c
            .spec
            .targets
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(";");
        for (d, v) in c.delta_grid.iter().zip(&c.values) {
            let _ = writeln!(
                s,
                "{},{},{},{n},{r},{targets}",
                sig12(*d),
                sig12(*v),
                c.spec.kind.name()
            );
        }
    }
    s
}
