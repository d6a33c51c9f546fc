//! Post-processing of recorded series: divergence curves, loop metrics,
//! detection thresholds and summary statistics.

pub mod lyapunov;
pub mod plot;

pub use lyapunov::{lyapunov_curve, DivergenceCurve, LyapunovConfig};
pub use plot::{line_plot_svg, PlotSeries};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LoopMetrics {
    /// Signed shoelace area of the (V, zc) polygon; positive when the loop
    /// runs counter-clockwise.
    pub area: f64,
    /// Voltages where the rising and falling branches cross.
    pub crossings: Vec<f64>,
    pub range: f64,
}

impl LoopMetrics {
    /// First branch crossing, if any.
    pub fn pinch_voltage(&self) -> Option<f64> {
        self.crossings.first().copied()
    }
}

pub fn shoelace_area(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        acc += x[i] * y[j] - x[j] * y[i];
    }
    0.5 * acc
}

/// Per-loop metrics of a staircase hysteresis record. Each loop holds
/// `2n + 1` samples: `n + 1` rising levels followed by `n` falling levels
/// mirroring the rising ones below the top.
pub fn hysteresis_metrics(v: &[f64], zc: &[f64], per_loop: usize) -> Result<Vec<LoopMetrics>> {
    if v.len() != zc.len() {
        return Err(Error::ShapeMismatch {
            expected: v.len(),
            got: zc.len(),
        });
    }
    if per_loop < 3 || per_loop % 2 == 0 {
        return Err(Error::PartialLoop(per_loop));
    }
    if v.is_empty() || v.len() % per_loop != 0 {
        return Err(Error::PartialLoop(v.len() % per_loop));
    }
    let n = per_loop / 2;
    let mut out = Vec::with_capacity(v.len() / per_loop);
    for (lv, lz) in v.chunks(per_loop).zip(zc.chunks(per_loop)) {
        let area = shoelace_area(lv, lz);
        let max = lz.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = lz.iter().cloned().fold(f64::INFINITY, f64::min);
        // diff(k) = rising - falling at level k, k = 0..n-1.
        let diff: Vec<f64> = (0..n).map(|k| lz[k] - lz[2 * n - k]).collect();
        let mut crossings = Vec::new();
        for k in 0..n.saturating_sub(1) {
            let (d0, d1) = (diff[k], diff[k + 1]);
            if d0 == 0.0 {
                crossings.push(lv[k]);
            } else if d0 * d1 < 0.0 {
                let f = d0 / (d0 - d1);
                crossings.push(lv[k] + f * (lv[k + 1] - lv[k]));
            }
        }
        out.push(LoopMetrics {
            area,
            crossings,
            range: max - min,
        });
    }
    Ok(out)
}

/// Midpoint between the lowest and second-lowest value.
pub fn detection_threshold(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData("need at least two values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(0.5 * (v[0] + v[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 when undefined.
    pub std: f64,
    pub std_defined: bool,
    pub histogram: Histogram,
}

pub const DEFAULT_BINS: usize = 20;

pub fn summary_stats(values: &[f64], bins: usize) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no values".into()));
    }
    let bins = bins.max(1);
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let (std, std_defined) = if n > 1 {
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (var.sqrt(), true)
    } else {
        (0.0, false)
    };
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0; bins];
    for &x in values {
        let b = if hi > lo {
            (((x - lo) / (hi - lo)) * bins as f64) as usize
        } else {
            0
        };
        counts[b.min(bins - 1)] += 1;
    }
    Ok(SummaryStats {
        n,
        mean,
        std,
        std_defined,
        histogram: Histogram { lo, hi, counts },
    })
}

/// Spearman rank correlation (average ranks on ties).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("need at least two points".into()));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok(cov / (vx * vy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(detection_threshold(&[10.0, 20.0, 30.0]).unwrap(), 15.0);
        assert_eq!(detection_threshold(&[30.0, 10.0, 10.0]).unwrap(), 10.0);
        assert!(detection_threshold(&[1.0]).is_err());
    }

    #[test]
    fn stats() {
        let s = summary_stats(&[1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert_eq!(s.histogram.counts, vec![1, 1, 1]);
        let one = summary_stats(&[5.0], 4).unwrap();
        assert!(!one.std_defined && one.std == 0.0);
        assert!(summary_stats(&[], 4).is_err());
    }

    #[test]
    fn flat_loop_has_zero_area() {
        let v = [0.0, 1.0, 2.0, 1.0, 0.0];
        let z = [5.0, 6.0, 7.0, 6.0, 5.0];
        let m = hysteresis_metrics(&v, &z, 5).unwrap();
        assert_eq!(m[0].area, 0.0);
        assert_eq!(m[0].range, 2.0);
    }

    #[test]
    fn partial_loops() {
        assert_eq!(hysteresis_metrics(&[0.0], &[1.0], 1), Err(Error::PartialLoop(1)));
        assert_eq!(
            hysteresis_metrics(&[0.0; 6], &[0.0; 6], 5),
            Err(Error::PartialLoop(1))
        );
    }

    #[test]
    fn crossing_is_interpolated() {
        // Rising branch below on the left, above on the right.
        let v = [-1.0, 0.0, 1.0, 2.0, 1.0, 0.0, -1.0];
        let z = [0.0, 1.0, 3.0, 4.0, 2.0, 2.0, 1.0];
        let m = hysteresis_metrics(&v, &z, 7).unwrap();
        // rising - falling = [-1, -1, 1] at -1, 0, 1 V
        assert_eq!(m[0].crossings, vec![0.5]);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }
}
