//! Evaluation kernels for sums `Re sum_j z_j exp(i w_j x)`.
//!
//! Two routes: a rotation recurrence across a uniform grid (exact up to rounding,
//! cost O(N M)), and a Chebyshev expansion on an interval built from the
//! Jacobi-Anger identity (cost O(N K) once per amplitude vector, then O(K) per point).

use crate::numeric::CompensatedSum;
use crate::special::bessel_j_sequence_into;
use num_complex::Complex64;

/// Steps between direct re-evaluations of the rotated phasors.
pub const RESYNC_STEPS: usize = 1024;
const CHUNK: usize = 512;
const LANES: usize = 8;

/// `out[k] = Re sum_j z_j exp(i w_j (x0 + k dx))` for `k < m`.
pub fn rotation_sum(freqs: &[f64], amps: &[Complex64], x0: f64, dx: f64, m: usize) -> Vec<f64> {
    assert_eq!(freqs.len(), amps.len());
    let mut acc = vec![CompensatedSum::default(); m];
    let mut sr = [0.0f64; CHUNK];
    let mut si = [0.0f64; CHUNK];
    let mut cr = [0.0f64; CHUNK];
    let mut ci = [0.0f64; CHUNK];
    for (fchunk, achunk) in freqs.chunks(CHUNK).zip(amps.chunks(CHUNK)) {
        let len = fchunk.len();
        let padded = len.div_ceil(LANES) * LANES;
        for j in 0..padded {
            if j < len {
                let (s, c) = (fchunk[j] * dx).sin_cos();
                cr[j] = c;
                ci[j] = s;
            } else {
                cr[j] = 0.0;
                ci[j] = 0.0;
                sr[j] = 0.0;
                si[j] = 0.0;
            }
        }
        for k in 0..m {
            if k % RESYNC_STEPS == 0 {
                let x = x0 + k as f64 * dx;
                for j in 0..len {
                    let (s, c) = (fchunk[j] * x).sin_cos();
                    let z = achunk[j];
                    sr[j] = z.re * c - z.im * s;
                    si[j] = z.re * s + z.im * c;
                }
            }
            let mut lane = [0.0f64; LANES];
            for ((((a, b), c), d), _) in sr[..padded]
                .chunks_exact_mut(LANES)
                .zip(si[..padded].chunks_exact_mut(LANES))
                .zip(cr[..padded].chunks_exact(LANES))
                .zip(ci[..padded].chunks_exact(LANES))
                .zip(0..)
            {
                for l in 0..LANES {
                    let re = a[l];
                    let im = b[l];
                    lane[l] += re;
                    a[l] = re * c[l] - im * d[l];
                    b[l] = re * d[l] + im * c[l];
                }
            }
            let s = ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
            acc[k].add(s);
        }
    }
    acc.iter().map(|a| a.value()).collect()
}

/// Direct evaluation `Re sum_j z_j exp(i w_j x)` at one point, pairwise summed.
pub fn direct_sum(freqs: &[f64], amps: &[Complex64], x: f64) -> f64 {
    crate::numeric::pairwise_sum_by(freqs.len(), &|j| {
        let (s, c) = (freqs[j] * x).sin_cos();
        amps[j].re * c - amps[j].im * s
    })
}

/// A Chebyshev series on [x0, x1].
#[derive(Debug, Clone)]
pub struct ChebSeries {
    pub x0: f64,
    pub x1: f64,
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    /// Clenshaw evaluation; `x` must lie in [x0, x1].
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.x0 - self.x1) / (self.x1 - self.x0);
        let t2 = 2.0 * t;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + t2 * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + t * b1 - b2
    }

    /// Values at `k/(m-1)`, `k < m`.
    pub fn eval_unit_grid(&self, m: usize) -> Vec<f64> {
        let d = 1.0 / (m - 1) as f64;
        (0..m).map(|k| self.eval(k as f64 * d)).collect()
    }
}

/// Chebyshev degree needed so that the truncated Jacobi-Anger tail is below 1e-18
/// for every frequency with `|w| h <= zmax`.
pub fn chebyshev_degree(zmax: f64) -> usize {
    // |J_n(z)| <= (z/2)^n / n!
    let half = (0.5 * zmax).max(1e-300);
    let mut log_term = 0.0f64;
    let mut n = 0usize;
    loop {
        n += 1;
        log_term += half.ln() - (n as f64).ln();
        if n as f64 > zmax && log_term < -41.5 {
            return n.max(4);
        }
    }
}

/// Precomputed Bessel coefficients for a fixed frequency set on [x0, x1].
pub struct SpectralBasis {
    n: usize,
    x0: f64,
    x1: f64,
    degree: usize,
    center: Vec<Complex64>,
    /// `(degree + 1) * n`, row `k` holds `J_k(w_j h)` for all j.
    jmat: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(freqs: &[f64], x0: f64, x1: f64) -> Self {
        let n = freqs.len();
        let h = 0.5 * (x1 - x0);
        let c = 0.5 * (x0 + x1);
        let zmax = freqs.iter().fold(0.0f64, |m, w| m.max(w.abs())) * h;
        let degree = chebyshev_degree(zmax);
        let mut jmat = vec![0.0; (degree + 1) * n];
        let mut buf = vec![0.0; degree + 1];
        let mut center = Vec::with_capacity(n);
        for (j, &w) in freqs.iter().enumerate() {
            bessel_j_sequence_into(w * h, &mut buf);
            for (k, v) in buf.iter().enumerate() {
                jmat[k * n + j] = *v;
            }
            let (s, co) = (w * c).sin_cos();
            center.push(Complex64::new(co, s));
        }
        SpectralBasis { n, x0, x1, degree, center, jmat }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Series for the prefix sums over the first `cp` terms, for each checkpoint `cp`
    /// (non-decreasing, each at most `len`). Amplitudes are given as (re, im) slices
    /// that must cover the largest checkpoint.
    pub fn expand(&self, amp_re: &[f64], amp_im: &[f64], checkpoints: &[usize]) -> Vec<ChebSeries> {
        let top = checkpoints.iter().copied().max().unwrap_or(0);
        assert!(top <= self.n && amp_re.len() >= top && amp_im.len() >= top);
        let mut wr = vec![0.0; top];
        let mut wi = vec![0.0; top];
        for j in 0..top {
            let z = Complex64::new(amp_re[j], amp_im[j]) * self.center[j];
            wr[j] = z.re;
            wi[j] = z.im;
        }
        let mut out: Vec<ChebSeries> = checkpoints
            .iter()
            .map(|_| ChebSeries { x0: self.x0, x1: self.x1, coeffs: vec![0.0; self.degree + 1] })
            .collect();
        for k in 0..=self.degree {
            let row = &self.jmat[k * self.n..k * self.n + top];
            let v = if k % 2 == 0 { &wr } else { &wi };
            let sign = match k % 4 {
                0 | 3 => 1.0,
                _ => -1.0,
            };
            let eps = if k == 0 { 1.0 } else { 2.0 };
            let mut cum = CompensatedSum::default();
            let mut prev = 0;
            for (ci, &cp) in checkpoints.iter().enumerate() {
                cum.add(dot(&row[prev..cp], &v[prev..cp]));
                prev = cp;
                out[ci].coeffs[k] = eps * sign * cum.value();
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lane = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            lane[l] += x[l] * y[l];
        }
    }
    let mut s = ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// One-shot Chebyshev series of `Re sum_j z_j exp(i w_j x)` on [x0, x1] without
/// storing the Bessel matrix; suited to very long frequency lists.
pub fn chebyshev_series(freqs: &[f64], amps: &[Complex64], x0: f64, x1: f64) -> ChebSeries {
    let h = 0.5 * (x1 - x0);
    let c = 0.5 * (x0 + x1);
    let zmax = freqs.iter().fold(0.0f64, |m, w| m.max(w.abs())) * h;
    let degree = chebyshev_degree(zmax);
    let mut buf = vec![0.0; degree + 1];
    let mut acc = vec![CompensatedSum::default(); degree + 1];
    for (&w, &z) in freqs.iter().zip(amps) {
        bessel_j_sequence_into(w * h, &mut buf);
        let (s, co) = (w * c).sin_cos();
        let v = z * Complex64::new(co, s);
        for k in 0..=degree {
            let part = if k % 2 == 0 { v.re } else { v.im };
            acc[k].add(part * buf[k]);
        }
    }
    let coeffs = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let sign = match k % 4 {
                0 | 3 => 1.0,
                _ => -1.0,
            };
            let eps = if k == 0 { 1.0 } else { 2.0 };
            eps * sign * a.value()
        })
        .collect();
    ChebSeries { x0, x1, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Vec<f64>, Vec<Complex64>) {
        let freqs: Vec<f64> = (0..3000).map(|j| ((j + 2) as f64).ln() * 1.3).collect();
        let amps: Vec<Complex64> = (0..3000)
            .map(|j| Complex64::from_polar(1.0 / ((j + 2) as f64).sqrt(), j as f64 * 0.7))
            .collect();
        (freqs, amps)
    }

    #[test]
    fn rotation_matches_direct() {
        let (f, a) = sample();
        let m = 2500;
        let dx = 1.0 / (m - 1) as f64;
        let v = rotation_sum(&f, &a, 0.0, dx, m);
        for k in [0, 1, 1023, 1024, 1025, 2047, 2499] {
            let d = direct_sum(&f, &a, k as f64 * dx);
            assert!((v[k] - d).abs() < 1e-11, "k={k}: {} vs {d}", v[k]);
        }
    }

    #[test]
    fn chebyshev_matches_direct() {
        let (f, a) = sample();
        let basis = SpectralBasis::new(&f, 0.0, 1.0);
        let re: Vec<f64> = a.iter().map(|z| z.re).collect();
        let im: Vec<f64> = a.iter().map(|z| z.im).collect();
        let series = basis.expand(&re, &im, &[100, 3000]);
        let one_shot = chebyshev_series(&f, &a, 0.0, 1.0);
        for &x in &[0.0, 0.123, 0.5, 0.77, 1.0] {
            let d = direct_sum(&f, &a, x);
            assert!((series[1].eval(x) - d).abs() < 1e-11);
            assert!((one_shot.eval(x) - d).abs() < 1e-11);
            let d100 = direct_sum(&f[..100], &a[..100], x);
            assert!((series[0].eval(x) - d100).abs() < 1e-11);
        }
        // off-unit interval
        let s = chebyshev_series(&f, &a, -0.5, 2.0);
        assert!((s.eval(1.7) - direct_sum(&f, &a, 1.7)).abs() < 1e-11);
    }

    #[test]
    fn degree_grows_with_bandwidth() {
        assert!(chebyshev_degree(1.0) < chebyshev_degree(10.0));
        assert!(chebyshev_degree(10.0) < 60);
    }
}
