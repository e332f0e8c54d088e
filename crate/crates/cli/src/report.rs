//! CSV output and the summary statistics used by the benchmark commands.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// One growth measurement: serialized euro bytes after `index` transactions.
#[derive(Clone, Copy, Debug)]
pub struct GrowthRow {
    pub index: usize,
    pub bytes: usize,
}

/// One verification measurement.
#[derive(Clone, Copy, Debug)]
pub struct VerifyRow {
    pub index: usize,
    pub repeat: usize,
    pub nanos: u128,
}

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from("index,bytes\n");
    for row in rows {
        let _ = writeln!(out, "{},{}", row.index, row.bytes);
    }
    out
}

pub fn verify_csv(rows: &[VerifyRow]) -> String {
    let mut out = String::from("index,repeat,nanos\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{}", row.index, row.repeat, row.nanos);
    }
    out
}

pub fn write_out(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)
}

/// Least-squares line fit; returns (slope, intercept, r_squared).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, intercept, r2)
}

/// Per-index min/mean/max over repeated measurements.
pub fn per_index_stats(rows: &[VerifyRow], n: usize) -> Vec<(usize, u128, f64, u128)> {
    (1..=n)
        .map(|i| {
            let samples: Vec<u128> = rows
                .iter()
                .filter(|r| r.index == i)
                .map(|r| r.nanos)
                .collect();
            let min = *samples.iter().min().unwrap();
            let max = *samples.iter().max().unwrap();
            let mean = samples.iter().sum::<u128>() as f64 / samples.len() as f64;
            (i, min, mean, max)
        })
        .collect()
}
