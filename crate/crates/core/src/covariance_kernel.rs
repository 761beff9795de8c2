//! Covariance kernels of the prime field.
//!
//! psi_N(u) = (1/2) sum_{j<=N} cos(u log p_j) / p_j is the exact covariance of
//! both X_N and G_N at lag u. Its N -> infinity limit is computed twice: from
//! the prime sum with an analytic tail, and from (1/2) Re(log zeta(1+iu) - A(u)).

use crate::error::{Error, Result};
use crate::numeric::{integrate, pairwise_sum_by};
use crate::primes::{mobius, riemann_r, PrimeTable};
use crate::special::{ci, log_i0, zeta_em};
use crate::trig_sum::rotation_sum;
use num_complex::Complex64;

pub use crate::special::{c_hat, si};

/// Which computation produced a limit-kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRoute {
    PrimeSum,
    Zeta,
}

/// psi_N(u) by pairwise summation over the first `n_use` primes.
pub fn psi_n(u: f64, table: &PrimeTable, n_use: usize) -> Result<f64> {
    table.check_n(n_use)?;
    let lp = table.log_p();
    let p = table.primes();
    Ok(0.5 * pairwise_sum_by(n_use, &|j| (u * lp[j]).cos() / p[j] as f64))
}

/// psi_N on the uniform lag grid u_k = u0 + k du, k < count.
pub fn psi_n_grid(table: &PrimeTable, n_use: usize, u0: f64, du: f64, count: usize) -> Result<Vec<f64>> {
    table.check_n(n_use)?;
    let amps: Vec<Complex64> = table.primes()[..n_use]
        .iter()
        .map(|&p| Complex64::new(0.5 / p as f64, 0.0))
        .collect();
    Ok(rotation_sum(&table.log_p()[..n_use], &amps, u0, du, count))
}

/// Uniform-bound constants sup_u |psi_N(u) - (1/2) log min(1/|u|, L)|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBound {
    pub n_primes: usize,
    /// L = log p_N (default reading).
    pub c_log_pn: f64,
    /// L = log N.
    pub c_log_n: f64,
}

/// Bound constants over the lag grid u_k = k / count, k = 1..=count.
pub fn kernel_bound_check(table: &PrimeTable, n_use: usize, count: usize) -> Result<KernelBound> {
    if n_use < 2 || count == 0 {
        return Err(Error::InvalidParameter("kernel bound needs n >= 2 and a non-empty grid".into()));
    }
    let du = 1.0 / count as f64;
    let psi = psi_n_grid(table, n_use, du, du, count)?;
    let lpn = table.log_p()[n_use - 1];
    let ln = (n_use as f64).ln();
    let sup = |l: f64| {
        psi.iter()
            .enumerate()
            .map(|(k, v)| {
                let u = (k + 1) as f64 * du;
                (v - 0.5 * (1.0 / u).min(l).ln()).abs()
            })
            .fold(0.0f64, f64::max)
    };
    Ok(KernelBound { n_primes: n_use, c_log_pn: sup(lpn), c_log_n: sup(ln) })
}

const BORWEIN_N: usize = 40;

/// Dirichlet eta by Borwein's accelerated alternating series.
fn eta_borwein(s: Complex64) -> Complex64 {
    let n = BORWEIN_N;
    let nf = n as f64;
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0 / nf;
    let mut acc = term;
    d.push(nf * acc);
    for i in 0..n {
        let fi = i as f64;
        term *= 4.0 * (nf + fi) * (nf - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        acc += term;
        d.push(nf * acc);
    }
    let dn = d[n];
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += (-s * ((k + 1) as f64).ln()).exp() * (sign * (d[k] - dn));
    }
    -sum / dn
}

/// zeta(1 + iu) for 0 < |u| <= 4, from eta(s) / (1 - 2^{1-s}).
pub fn zeta_1_plus_iu(u: f64) -> Result<Complex64> {
    if u == 0.0 {
        return Err(Error::Domain("zeta(1+iu) has a pole at u = 0".into()));
    }
    if !(u.abs() <= 4.0) {
        return Err(Error::Domain(format!("zeta(1+iu) supported for |u| <= 4, got {u}")));
    }
    let s = Complex64::new(1.0, u);
    // 1 - 2^{-iu} = e^{-i th/2} 2i sin(th/2), th = u log 2, without cancellation
    let th = u * std::f64::consts::LN_2;
    let denom = Complex64::from_polar(1.0, -0.5 * th) * Complex64::new(0.0, 2.0 * (0.5 * th).sin());
    Ok(eta_borwein(s) / denom)
}

const A_EXACT_PRIMES: usize = 1000;

/// log of zeta with the primes <= q removed, for Re w >= 2.
fn log_zeta_without(w: Complex64, small: &[u64]) -> Complex64 {
    let q = *small.last().expect("non-empty") as f64;
    if w.re >= 8.0 && q > 1000.0 {
        // next prime term is below q^{-8}
        return Complex64::new(0.0, 0.0);
    }
    let mut v = zeta_em(w).ln();
    for &p in small {
        v += (Complex64::new(1.0, 0.0) - (-w * (p as f64).ln()).exp()).ln();
    }
    v
}

/// A(u) = sum_p sum_{k>=2} p^{-k(1+iu)} / k.
///
/// Exact over the first 1000 primes; the rest is summed through the prime zeta
/// function P_Q(w) = sum_m mu(m)/m log zeta_Q(m w), zeta_Q being zeta with the
/// primes <= Q removed.
pub fn a_double_sum(u: f64, table: &PrimeTable) -> Result<Complex64> {
    table.check_n(A_EXACT_PRIMES)?;
    let small = &table.primes()[..A_EXACT_PRIMES];
    let s = Complex64::new(1.0, u);
    let one = Complex64::new(1.0, 0.0);
    let mut head = Complex64::new(0.0, 0.0);
    for &p in small {
        let z = (-s * (p as f64).ln()).exp();
        head += -(one - z).ln() - z;
    }
    let q = *small.last().expect("non-empty") as f64;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut k = 2;
    while q.powf(1.0 - k as f64) / k as f64 > 1e-18 {
        let w = s * k as f64;
        let mut pq = Complex64::new(0.0, 0.0);
        let mut m = 1;
        while q.powf(1.0 - (m * k) as f64) > 1e-19 {
            let mu = mobius(m as u64);
            if mu != 0 {
                pq += log_zeta_without(w * m as f64, small) * (mu as f64 / m as f64);
            }
            m += 1;
        }
        tail += pq / k as f64;
        k += 1;
    }
    Ok(head + tail)
}

/// (1/2) Re(log zeta(1+iu) - A(u)).
pub fn psi_limit_zeta(u: f64, table: &PrimeTable) -> Result<f64> {
    check_limit_domain(u)?;
    let z = zeta_1_plus_iu(u.abs())?;
    let a = a_double_sum(u.abs(), table)?;
    Ok(0.5 * (z.norm().ln() - a.re))
}

/// Default number of primes in the prime-sum route.
pub const PRIME_ROUTE_N: usize = 10_000_000;

/// psi_N(u) plus the tail (1/2) sum_{p > p_N} cos(u log p)/p.
///
/// The tail is an integral against dR, R being Riemann's prime-counting
/// approximation, plus the boundary correction F(p_N)(R(p_N) - N).
pub fn psi_limit_prime(u: f64, table: &PrimeTable, n_use: usize) -> Result<f64> {
    check_limit_domain(u)?;
    let head = psi_n(u, table, n_use)?;
    Ok(head + prime_tail(u, table.primes()[n_use - 1] as f64, n_use)?)
}

fn prime_tail(u: f64, p: f64, n: usize) -> Result<f64> {
    let l = p.ln();
    let mut sum = -ci(u.abs() * l);
    for k in 2..=10u64 {
        let mu = mobius(k);
        if mu == 0 {
            continue;
        }
        let decay = 1.0 - 1.0 / k as f64;
        let ik = integrate(
            |v| (u * v).cos() * (-decay * v).exp() / v,
            l,
            l + 45.0 / decay,
            1e-16,
            1e-12,
        )?;
        sum += mu as f64 / k as f64 * ik;
    }
    let boundary = (u * l).cos() / p * (riemann_r(p) - n as f64);
    Ok(0.5 * (sum + boundary))
}

fn check_limit_domain(u: f64) -> Result<()> {
    if u == 0.0 {
        return Err(Error::Domain("limit kernel is singular at u = 0".into()));
    }
    if !(u.abs() <= 2.0) {
        return Err(Error::Domain(format!("limit kernel supported for 0 < |u| <= 2, got {u}")));
    }
    Ok(())
}

/// Limit kernel by the chosen route (prime route uses `PRIME_ROUTE_N` primes,
/// or the whole table if it is smaller).
pub fn psi_limit(u: f64, route: KernelRoute, table: &PrimeTable) -> Result<f64> {
    match route {
        KernelRoute::Zeta => psi_limit_zeta(u, table),
        KernelRoute::PrimeSum => psi_limit_prime(u, table, table.count().min(PRIME_ROUTE_N)),
    }
}

/// g(u) = psi(u) - (1/2) log(1/|u|).
pub fn g_smooth(u: f64, route: KernelRoute, table: &PrimeTable) -> Result<f64> {
    Ok(psi_limit(u, route, table)? + 0.5 * u.abs().ln())
}

/// log E e^{beta X_N(x)}, exactly and in Gaussian form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstants {
    pub n_primes: usize,
    pub beta: f64,
    /// sum_j log I0(beta / sqrt(p_j))
    pub log_norm_exact: f64,
    /// (beta^2 / 4) sum_j 1/p_j
    pub log_norm_gaussian: f64,
}

pub fn normalization(table: &PrimeTable, n_use: usize, beta: f64) -> Result<NormalizationConstants> {
    table.check_n(n_use)?;
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let isp = table.inv_sqrt_p();
    Ok(NormalizationConstants {
        n_primes: n_use,
        beta,
        log_norm_exact: pairwise_sum_by(n_use, &|j| log_i0(beta * isp[j])),
        log_norm_gaussian: 0.25 * beta * beta * table.sum_inv_p(n_use),
    })
}
