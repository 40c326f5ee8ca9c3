use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const KIN40K_ROWS: usize = 40_000;
pub const KIN40K_FEATURES: usize = 8;
/// Rows treated as previously observed: used for statistics only.
pub const WARMUP_ROWS: usize = 10_000;

/// Standardized regression data with a warm-up prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub warmup: usize,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    /// Rows available after the warm-up prefix.
    pub fn stream_len(&self) -> usize {
        self.rows() - self.warmup
    }

    pub fn warmup_x(&self) -> DMatrix<f64> {
        self.x.rows(0, self.warmup).into_owned()
    }

    /// Standardize features and center targets with warm-up statistics.
    pub fn standardize(x: DMatrix<f64>, y: DVector<f64>, warmup: usize) -> Result<Self> {
        if x.nrows() <= warmup {
            return Err(Error::Dataset(format!("{} rows leave nothing after a {warmup}-row warm-up", x.nrows())));
        }
        let mut x = x;
        let w = warmup as f64;
        for mut col in x.column_iter_mut() {
            let head = col.rows(0, warmup);
            let mean = head.sum() / w;
            let sd = (head.map(|v| (v - mean).powi(2)).sum() / w).sqrt();
            let sd = if sd > 0.0 { sd } else { 1.0 };
            col.apply(|v| *v = (*v - mean) / sd);
        }
        let ymean = y.rows(0, warmup).sum() / w;
        let y = y.map(|v| v - ymean);
        Ok(Self { x, y, warmup })
    }
}

/// Parse delimited text with 8 feature columns and one target column.
pub fn parse_kin40k(text: &str) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut values = Vec::new();
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != KIN40K_FEATURES + 1 {
            return Err(Error::Dataset(format!("row {}: expected {} columns, found {}", lineno + 1, KIN40K_FEATURES + 1, fields.len())));
        }
        for f in fields {
            let v: f64 = f.parse().map_err(|_| Error::Dataset(format!("row {}: non-numeric field {f:?}", lineno + 1)))?;
            values.push(v);
        }
        rows += 1;
    }
    let all = DMatrix::from_row_slice(rows, KIN40K_FEATURES + 1, &values);
    let x = all.columns(0, KIN40K_FEATURES).into_owned();
    let y = all.column(KIN40K_FEATURES).into_owned();
    Ok((x, y))
}

pub fn load_kin40k(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let (x, y) = parse_kin40k(&text)?;
    if x.nrows() != KIN40K_ROWS {
        log::warn!("{}: {} rows (expected {KIN40K_ROWS})", path.display(), x.nrows());
    }
    log::info!("{}: {} rows, {KIN40K_FEATURES} features + target in the last column", path.display(), x.nrows());
    Dataset::standardize(x, y, WARMUP_ROWS)
}

const STANDIN_TERMS: usize = 64;
const STANDIN_LENGTH_SCALE: f64 = 8.0;
const STANDIN_NOISE: f64 = 0.1;

/// Offline substitute with the same shape as kin40k: Gaussian features and
/// a smooth random target `sum_k a_k cos(x v_k + b_k)` with frequencies
/// drawn for a length scale of 8, scaled to unit variance, plus noise
/// with standard deviation 0.1.
pub fn standin_dataset<R: Rng + ?Sized>(rng: &mut R) -> Result<Dataset> {
    let n = KIN40K_ROWS;
    let x: DMatrix<f64> = DMatrix::from_fn(n, KIN40K_FEATURES, |_, _| StandardNormal.sample(rng));
    let v = DMatrix::from_fn(STANDIN_TERMS, KIN40K_FEATURES, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        z / STANDIN_LENGTH_SCALE
    });
    let b = DVector::from_fn(STANDIN_TERMS, |_, _| rng.random::<f64>() * std::f64::consts::TAU);
    let a = DVector::from_fn(STANDIN_TERMS, |_, _| -> f64 { StandardNormal.sample(rng) });
    let mut proj: DMatrix<f64> = &x * v.transpose();
    for mut row in proj.row_iter_mut() {
        for (p, bk) in row.iter_mut().zip(b.iter()) {
            *p = (*p + bk).cos();
        }
    }
    let f = proj * a;
    let mean = f.mean();
    let sd = f.map(|v| (v - mean).powi(2)).mean().sqrt();
    let y = DVector::from_fn(n, |i, _| {
        let z: f64 = StandardNormal.sample(rng);
        (f[i] - mean) / sd + STANDIN_NOISE * z
    });
    Dataset::standardize(x, y, WARMUP_ROWS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn parse_reports_bad_rows() {
        let good = "1 2 3 4 5 6 7 8 9\n1,2,3,4,5,6,7,8,10\n";
        let (x, y) = parse_kin40k(good).unwrap();
        assert_eq!((x.nrows(), x.ncols(), y[1]), (2, 8, 10.0));
        let err = parse_kin40k("1 2 3\n").unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
        let err = parse_kin40k("1 2 3 4 5 6 7 8 9\n1 2 3 4 5 6 7 x 9\n").unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("\"x\""), "{err}");
    }

    #[test]
    fn standin_is_standardized_on_warmup() {
        let d = standin_dataset(&mut seeded(1)).unwrap();
        assert_eq!((d.rows(), d.x.ncols()), (KIN40K_ROWS, KIN40K_FEATURES));
        for col in d.x.column_iter() {
            let head = col.rows(0, WARMUP_ROWS);
            assert!(head.mean().abs() < 1e-9);
            assert!((head.map(|v| v * v).mean() - 1.0).abs() < 1e-9);
        }
        assert!(d.y.rows(0, WARMUP_ROWS).mean().abs() < 1e-9);
    }
}
