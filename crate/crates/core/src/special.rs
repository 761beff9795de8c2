//! Special functions: Bessel J/I, sine and cosine integrals, normal CDF.

use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bessel J0, via the msun rational approximations.
#[inline]
pub fn j0(x: f64) -> f64 {
    libm::j0(x)
}

/// J_0(z), ..., J_nmax(z) by Miller's backward recurrence normalized with
/// J_0 + 2(J_2 + J_4 + ...) = 1.
pub fn bessel_j_sequence(z: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    bessel_j_sequence_into(z, &mut out);
    out
}

pub fn bessel_j_sequence_into(z: f64, out: &mut [f64]) {
    let nmax = out.len() - 1;
    if z == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    let neg = z < 0.0;
    let x = z.abs();
    let top = (nmax as f64).max(x);
    let mut m = (top + 16.0 + (160.0 * top).sqrt()) as usize;
    m += m % 2;
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=m).rev() {
        // j holds J_k, jp1 holds J_{k+1}
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += 2.0 * j;
        }
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out[0] = j;
    norm += j;
    let inv = 1.0 / norm;
    for (k, v) in out.iter_mut().enumerate() {
        *v *= inv;
        if neg && k % 2 == 1 {
            *v = -*v;
        }
    }
}

const I0_SERIES_LIMIT: f64 = 20.0;

/// Modified Bessel I0: power series up to |z| = 20, asymptotic expansion above.
pub fn i0(z: f64) -> f64 {
    let x = z.abs();
    if x <= I0_SERIES_LIMIT {
        i0_series(x)
    } else {
        x.exp() * i0_asymptotic_factor(x) / (2.0 * PI * x).sqrt()
    }
}

/// log I0(z), accurate for tiny and huge arguments.
pub fn log_i0(z: f64) -> f64 {
    let x = z.abs();
    if x < 1e-4 {
        let y = 0.25 * x * x;
        return y - 0.25 * y * y;
    }
    if x <= I0_SERIES_LIMIT {
        i0_series(x).ln()
    } else {
        x - 0.5 * (2.0 * PI * x).ln() + i0_asymptotic_factor(x).ln()
    }
}

fn i0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= y / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

fn i0_asymptotic_factor(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let a = (2 * k - 1) as f64;
        let next = term * a * a / (8.0 * k as f64 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Sine and cosine integrals (Si(x), Ci(|x|)).
///
/// Power series for |x| <= 2, continued fraction for E1(ix) above.
pub fn si_ci(x: f64) -> (f64, f64) {
    let t = x.abs();
    if t == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let (si, ci) = if t <= 2.0 {
        let mut si = 0.0;
        let mut ci = 0.0;
        // term_k = t^k / k!
        let mut fact = 1.0;
        let mut sign_s = 1.0;
        let mut sign_c = -1.0;
        for k in 1..60 {
            fact *= t / k as f64;
            if k % 2 == 1 {
                si += sign_s * fact / k as f64;
                sign_s = -sign_s;
            } else {
                ci += sign_c * fact / k as f64;
                sign_c = -sign_c;
            }
            if fact < 1e-18 {
                break;
            }
        }
        (si, ci + EULER_GAMMA + t.ln())
    } else {
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..1000 {
            let a = -((i - 1) as f64).powi(2);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        (0.5 * PI + h.im, -h.re)
    };
    (if x < 0.0 { -si } else { si }, ci)
}

pub fn si(x: f64) -> f64 {
    si_ci(x).0
}

pub fn ci(x: f64) -> f64 {
    si_ci(x).1
}

/// Fourier transform of max(log(1/|x|), 0): 2 Si(k)/k, with value 2 at k = 0.
pub fn c_hat(k: f64) -> f64 {
    let k = k.abs();
    if k < 1e-8 {
        return 2.0 - k * k / 9.0;
    }
    2.0 * si(k) / k
}

const BERNOULLI_2K: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Riemann zeta by Euler-Maclaurin summation, for moderate |Im s| (up to ~60) and s != 1.
pub fn zeta_em(s: Complex64) -> Complex64 {
    const N: usize = 40;
    let one = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in (1..N).rev() {
        sum += (-s * (n as f64).ln()).exp();
    }
    let nf = N as f64;
    let n_pow = (-s * nf.ln()).exp();
    sum += n_pow * nf / (s - one) + 0.5 * n_pow;
    // rising factorial s(s+1)...(s+2k-2) / (2k)! * N^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n_pow / nf;
    for (k, b) in BERNOULLI_2K.iter().enumerate() {
        let term = rising * npow * (*b / fact);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        let k2 = 2.0 * (k + 1) as f64;
        rising = rising * (s + (k2 - 1.0)) * (s + k2);
        fact *= (k2 + 1.0) * (k2 + 2.0);
        npow /= nf * nf;
    }
    sum
}

/// Riemann zeta on the real axis (s != 1).
pub fn zeta_real(s: f64) -> f64 {
    zeta_em(Complex64::new(s, 0.0)).re
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    fn j0_oracle(x: f64) -> f64 {
        integrate(|t| (x * t.sin()).cos(), 0.0, PI, 1e-15, 1e-15).unwrap() / PI
    }

    fn i0_oracle(x: f64) -> f64 {
        integrate(|t| (x * t.cos()).exp(), 0.0, PI, 0.0, 1e-15).unwrap() / PI
    }

    #[test]
    fn j0_against_quadrature() {
        for &x in &[0.0, 0.3, 1.0, 2.404825557695773, 5.0, 7.99, 8.01, 12.5, 30.0, 100.0] {
            assert!((j0(x) - j0_oracle(x)).abs() < 1e-12, "x = {x}");
        }
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
    }

    #[test]
    fn i0_against_quadrature() {
        for &x in &[0.0, 0.1, 0.7071, 1.0, 4.0, 8.0, 15.0, 19.9, 20.1, 35.0] {
            let rel = (i0(x) - i0_oracle(x)).abs() / i0_oracle(x);
            assert!(rel < 1e-12, "x = {x}: rel {rel}");
        }
        assert!((log_i0(1.0 / 2f64.sqrt()) - i0_oracle(1.0 / 2f64.sqrt()).ln()).abs() < 1e-13);
        assert!((log_i0(1.0 / 2f64.sqrt()) - 0.121_297_678_239_33).abs() < 1e-12);
        let y = 0.25e-10;
        assert!((log_i0(1e-5) - (y - 0.25 * y * y)).abs() < 1e-26);
    }

    #[test]
    fn miller_sequence_matches_libm() {
        for &z in &[0.01, 0.5, 3.0, 7.1, 9.6, 14.0] {
            let s = bessel_j_sequence(z, 50);
            for (n, v) in s.iter().enumerate() {
                let r = libm::jn(n as i32, z);
                assert!((v - r).abs() < 1e-14 + 1e-12 * r.abs(), "z={z} n={n}: {v} vs {r}");
            }
        }
        let s = bessel_j_sequence(-2.0, 5);
        assert!((s[1] + libm::jn(1, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn sine_integral_against_quadrature() {
        for &x in &[0.1, 1.0, PI, 1.99, 2.01, 5.0, 8.0, 8.5, 20.0, 50.0] {
            let oracle = integrate(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0, x, 1e-15, 1e-15)
                .unwrap();
            assert!((si(x) - oracle).abs() < 1e-12, "x = {x}");
        }
        assert!((si(PI) - 1.851_937_051_982_466).abs() < 1e-13);
        assert!((si(-1.0) + si(1.0)).abs() < 1e-16);
    }

    #[test]
    fn cosine_integral_known_values() {
        // Ci(1) and Ci(10) from standard tables
        assert!((ci(1.0) - 0.337_403_922_900_968_1).abs() < 1e-13);
        assert!((ci(10.0) - -0.045_456_433_004_455_37).abs() < 1e-13);
        // Ci(b) - Ci(a) = int_a^b cos t / t dt
        let oracle = integrate(|t| t.cos() / t, 0.5, 7.0, 1e-15, 1e-15).unwrap();
        assert!((ci(7.0) - ci(0.5) - oracle).abs() < 1e-12);
    }

    #[test]
    fn c_hat_values() {
        assert_eq!(c_hat(0.0), 2.0);
        let k = 100.0;
        assert!((c_hat(k) - PI / k).abs() < 2.0 / (k * k));
        assert!((c_hat(1e-9) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zeta_known_values() {
        assert!((zeta_real(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta_real(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta_real(3.0) - 1.202_056_903_159_594_3).abs() < 1e-14);
        assert!((zeta_real(200.0) - 1.0).abs() < 1e-15);
        // first nontrivial zero
        let z = zeta_em(Complex64::new(0.5, 14.134_725_141_734_693));
        assert!(z.norm() < 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-12);
    }
}
