//! Small statistics helpers: means with standard errors, jackknife, quantiles,
//! Kolmogorov-Smirnov, weighted least squares.

use crate::numeric::pairwise_sum;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe { mean: f64::NAN, se: f64::NAN };
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return MeanSe { mean, se: f64::NAN };
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    MeanSe { mean, se: (var / n as f64).sqrt() }
}

/// Sample covariance of paired data with known zero means, and its standard error.
pub fn zero_mean_cov(xs: &[f64], ys: &[f64]) -> MeanSe {
    let prod: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x * y).collect();
    mean_se(&prod)
}

/// Grouped (delete-one-group) jackknife of the mean of `xs`.
///
/// Groups are contiguous runs of the index, so the estimate is reproducible.
pub fn jackknife_mean(xs: &[f64], groups: usize) -> MeanSe {
    let n = xs.len();
    let g = groups.min(n).max(2);
    if n < 2 {
        return mean_se(xs);
    }
    let bounds: Vec<usize> = (0..=g).map(|k| k * n / g).collect();
    let sums: Vec<f64> = (0..g).map(|k| pairwise_sum(&xs[bounds[k]..bounds[k + 1]])).collect();
    let total = pairwise_sum(&sums);
    let mean = total / n as f64;
    let loo: Vec<f64> = (0..g)
        .map(|k| (total - sums[k]) / (n - (bounds[k + 1] - bounds[k])) as f64)
        .collect();
    let loo_mean = pairwise_sum(&loo) / g as f64;
    let dev: Vec<f64> = loo.iter().map(|v| (v - loo_mean) * (v - loo_mean)).collect();
    let se = ((g - 1) as f64 / g as f64 * pairwise_sum(&dev)).sqrt();
    MeanSe { mean, se }
}

/// Linear-interpolated quantile of unsorted data, `q` in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic 1% critical value of the KS statistic, with the usual small-n correction.
pub fn ks_critical_1pct(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    1.6276 / (s + 0.12 + 0.11 / s)
}

/// Weighted least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Fit y = a + b x with weights w (inverse variances).
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> LineFit {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    LineFit { slope, intercept: my - slope * mx, slope_se: (1.0 / sxx).sqrt() }
}

/// Ordinary least squares, with the slope SE from the residual scatter.
pub fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let w = vec![1.0; x.len()];
    let f = weighted_line_fit(x, y, &w);
    let n = x.len();
    if n <= 2 {
        return LineFit { slope_se: f64::NAN, ..f };
    }
    let rss: f64 = x.iter().zip(y).map(|(x, y)| (y - f.intercept - f.slope * x).powi(2)).sum();
    let mx = x.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    LineFit { slope_se: (rss / (n - 2) as f64 / sxx).sqrt(), ..f }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let m = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jackknife_of_mean_matches_plain_se_for_singleton_groups() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let a = jackknife_mean(&xs, 50);
        let b = mean_se(&xs);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.se - b.se).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let xs = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert_eq!(quantile(&xs, 0.25), 2.0);
    }

    #[test]
    fn ks_on_perfect_grid() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
        assert!((ks_critical_1pct(10_000) - 0.016_27).abs() < 1e-4);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = line_fit(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
    }
}
