//! Largest Lyapunov exponent from a scalar series by nearest-neighbour
//! divergence.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConfig {
    /// Neighbour radius on the normalized series.
    pub eps: f64,
    pub k_max: usize,
    /// Minimum index separation of a pair; defaults to `k_max`.
    pub min_pair_gap: Option<usize>,
    /// Inclusive fit range over k; defaults to `1..=k_max/4`.
    pub fit: Option<(usize, usize)>,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            k_max: 20,
            min_pair_gap: None,
            fit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceCurve {
    pub k: Vec<usize>,
    pub mean_ln_d: Vec<f64>,
    pub pairs: Vec<usize>,
    pub fit_range: (usize, usize),
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
}

impl DivergenceCurve {
    /// Two-sided 95 % interval for the slope.
    pub fn slope_ci(&self) -> (f64, f64) {
        let n = self
            .k
            .iter()
            .filter(|&&k| k >= self.fit_range.0 && k <= self.fit_range.1)
            .count();
        let half = t_975(n.saturating_sub(2)) * self.slope_se;
        (self.slope - half, self.slope + half)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mean_ln_d,pairs\n");
        for i in 0..self.k.len() {
            out.push_str(&format!("{},{},{}\n", self.k[i], self.mean_ln_d[i], self.pairs[i]));
        }
        out
    }
}

fn t_975(dof: usize) -> f64 {
    const T: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
        2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    match dof {
        0 => f64::INFINITY,
        1..=30 => T[dof - 1],
        _ => 1.96,
    }
}

/// Zero mean, unit range.
fn normalize(series: &[f64]) -> Result<Vec<f64>> {
    let max = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = max - min;
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::DegenerateSeries);
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    Ok(series.iter().map(|x| (x - mean) / span).collect())
}

/// Least squares line through `(x, y)`: slope, intercept, slope standard error.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, se)
}

pub fn lyapunov_curve(series: &[f64], cfg: &LyapunovConfig) -> Result<DivergenceCurve> {
    if cfg.k_max == 0 {
        return Err(Error::Precondition("k_max must be at least 1".into()));
    }
    let gap = cfg.min_pair_gap.unwrap_or(cfg.k_max);
    if series.len() <= cfg.k_max + gap {
        return Err(Error::InsufficientData(format!(
            "series of {} points is too short for k_max {} and gap {gap}",
            series.len(),
            cfg.k_max
        )));
    }
    let x = normalize(series)?;
    let m = x.len() - cfg.k_max;

    // Nearest admissible neighbour of every reference point.
    let mut pairs = Vec::new();
    for i in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if i.abs_diff(j) < gap {
                continue;
            }
            let d = (x[i] - x[j]).abs();
            if d < cfg.eps && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err(Error::InsufficientPairs);
    }

    let mut ks = Vec::new();
    let mut means = Vec::new();
    let mut counts = Vec::new();
    for k in 1..=cfg.k_max {
        let (mut sum, mut n) = (0.0, 0usize);
        for &(i, j) in &pairs {
            let d = (x[i + k] - x[j + k]).abs();
            if d > 0.0 {
                sum += d.ln();
                n += 1;
            }
        }
        if n > 0 {
            ks.push(k);
            means.push(sum / n as f64);
            counts.push(n);
        }
    }

    let (lo, hi) = cfg.fit.unwrap_or((1, (cfg.k_max / 4).max(2)));
    if lo < 1 || hi <= lo || hi > cfg.k_max {
        return Err(Error::Precondition(format!("fit range {lo}..={hi} outside 1..={}", cfg.k_max)));
    }
    let (fx, fy): (Vec<f64>, Vec<f64>) = ks
        .iter()
        .zip(&means)
        .filter(|(k, _)| **k >= lo && **k <= hi)
        .map(|(k, m)| (*k as f64, *m))
        .unzip();
    if fx.len() < 2 {
        return Err(Error::InsufficientPairs);
    }
    let (slope, intercept, slope_se) = line_fit(&fx, &fy);
    Ok(DivergenceCurve {
        k: ks,
        mean_ln_d: means,
        pairs: counts,
        fit_range: (lo, hi),
        slope,
        intercept,
        slope_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_degenerate() {
        assert_eq!(
            lyapunov_curve(&[1.0; 100], &LyapunovConfig::default()),
            Err(Error::DegenerateSeries)
        );
    }

    #[test]
    fn short_series_rejected() {
        let s: Vec<f64> = (0..30).map(|i| i as f64).collect();
        assert!(matches!(
            lyapunov_curve(&s, &LyapunovConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn exact_line_fit() {
        let (s, b, se) = line_fit(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12 && se < 1e-12);
    }

    #[test]
    fn no_pairs_within_radius() {
        // Two far clusters, gap forbids pairing inside a cluster.
        let s: Vec<f64> = (0..60).map(|i| if i < 30 { 0.0 } else { 1.0 } + i as f64 * 1e-3).collect();
        let cfg = LyapunovConfig {
            eps: 1e-6,
            k_max: 4,
            ..Default::default()
        };
        assert_eq!(lyapunov_curve(&s, &cfg), Err(Error::InsufficientPairs));
    }
}
