//! Summation and quadrature primitives shared by every module.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (tree) summation; error grows like O(log n) ulps.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        // four lanes so the leaf loop vectorizes
        let mut acc = [0.0f64; 4];
        let chunks = xs.chunks_exact(4);
        let rem = chunks.remainder();
        for c in chunks {
            acc[0] += c[0];
            acc[1] += c[1];
            acc[2] += c[2];
            acc[3] += c[3];
        }
        let mut tail = 0.0;
        for &r in rem {
            tail += r;
        }
        return (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i` in `0..n` without materializing the terms.
pub fn pairwise_sum_by(n: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

/// Neumaier compensated running sum, for prefix sums that must stay exact.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature.
///
/// Stops when the summed error estimate falls below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    integrate_with_limit(&f, a, b, abs_tol, rel_tol, 4000)
}

pub fn integrate_with_limit(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total_err = e;
    let mut total = v;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= max_segments {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}]: error {total_err:.3e} above {tol:.3e}"
            )));
        }
        let seg = heap.pop().expect("heap is never empty");
        let m = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(f, seg.a, m);
        let (v2, e2) = gk15(f, m, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, err: e2 });
    }
    let values: Vec<f64> = heap.into_vec().into_iter().map(|s| s.value).collect();
    Ok(pairwise_sum(&values))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule: `panels` equal panels on [a, b], `order` nodes each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for k in 0..order {
            nodes.push(lo + 0.5 * h * (x[k] + 1.0));
            weights.push(0.5 * h * w[k]);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let xs: Vec<f64> = (1..=100_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5_000_050_000.0);
        assert_eq!(pairwise_sum_by(100_000, &|i| (i + 1) as f64), 5_000_050_000.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-17);
        }
        assert!((s.value() - (1.0 + 1e-14)).abs() < 1e-16);
    }

    #[test]
    fn adaptive_quadrature_known_integrals() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x| (-x * x).exp(), -8.0, 8.0, 1e-14, 1e-14).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let (x, w) = composite_gauss_legendre(0.0, 3.0, 7, 8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert!((s - 3f64.sin()).abs() < 1e-14);
    }
}
