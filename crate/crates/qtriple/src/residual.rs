//! Per-point substitution residuals shared by the solvers.

/// One sampled equation: `|lhs - data|` over the band's data scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub band: &'static str,
    pub point: f64,
    pub residual: f64,
}

/// Normalizes `(point, lhs, data)` samples of one band by its largest `|data|`
/// (or 1 when the data vanish).
pub fn band_rows(band: &'static str, samples: &[(f64, f64, f64)]) -> Vec<ResidualRow> {
    let scale = samples.iter().fold(0.0f64, |m, s| m.max(s.2.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    samples
        .iter()
        .map(|&(point, lhs, data)| ResidualRow { band, point, residual: (lhs - data).abs() / scale })
        .collect()
}

/// Largest residual of `band`, 0 if absent.
pub fn band_max(rows: &[ResidualRow], band: &str) -> f64 {
    rows.iter().filter(|r| r.band == band).fold(0.0, |m, r| m.max(r.residual))
}
