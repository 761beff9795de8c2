//! The normalized exponential measures mu_{beta,N}(dx) = e^{beta X_N(x)} / E e^{beta X_N(x)} dx
//! on [0, 1]: box masses, exact Bessel-product moment oracles, Monte Carlo
//! moments, scaling fits, the martingale check and the critical normalization.

use crate::covariance_kernel::normalization;
use crate::error::{Error, Result};
use crate::field_engine::{FieldGrid, FieldLabel, FieldSampler};
use crate::numeric::{integrate, pairwise_sum, pairwise_sum_by};
use crate::parallel::try_map_indexed;
use crate::primes::PrimeTable;
use crate::rng::{stream_id, StreamKind, StreamRng};
use crate::special::{i0, log_i0};
use crate::stats::{jackknife_mean, mean_se, quantile, weighted_line_fit, MeanSe};
use crate::trig_sum::{chebyshev_series, ChebSeries};
use num_complex::Complex64;

pub const BETA_CRITICAL: f64 = 2.0;

/// Quadrature points per box at the finest level, as a power of two.
pub const OVERSAMPLING_LOG2: usize = 4;

/// Grid size M = 2^{level + 4} + 1 matching a dyadic level.
pub fn grid_for_level(level: usize) -> usize {
    (1usize << (level + OVERSAMPLING_LOG2)) + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// log E e^{beta X_N} = sum log I0(beta / sqrt p), exact.
    ExactBessel,
    /// (beta^2 / 4) sum 1/p.
    GaussianForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosParams {
    pub beta: f64,
    pub n_primes: usize,
    pub normalization: Normalization,
    /// Multiply masses by sqrt(log log N), N = n_primes.
    pub critical_factor: bool,
    /// log E e^{beta X_N(x)} under the chosen normalization.
    pub log_norm: f64,
}

impl ChaosParams {
    pub fn new(table: &PrimeTable, beta: f64, n_primes: usize, normalization_kind: Normalization) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        let c = normalization(table, n_primes, beta)?;
        let log_norm = match normalization_kind {
            Normalization::ExactBessel => c.log_norm_exact,
            Normalization::GaussianForm => c.log_norm_gaussian,
        };
        Ok(ChaosParams { beta, n_primes, normalization: normalization_kind, critical_factor: false, log_norm })
    }

    pub fn with_critical_factor(mut self) -> Self {
        self.critical_factor = true;
        self
    }

    /// sqrt(log log N) when the critical factor is on, else 1.
    pub fn scale(&self) -> f64 {
        if self.critical_factor {
            critical_factor(self.n_primes)
        } else {
            1.0
        }
    }

    pub fn beta_critical(&self) -> f64 {
        BETA_CRITICAL
    }
}

/// sqrt(log log N).
pub fn critical_factor(n: usize) -> f64 {
    (n as f64).ln().ln().sqrt()
}

/// Dyadic box masses of mu_{beta,N} at a level.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMeasure {
    pub level: usize,
    pub masses: Vec<f64>,
    pub params: ChaosParams,
    /// Quadrature intervals per box.
    pub oversampling: usize,
}

impl BoxMeasure {
    pub fn total(&self) -> f64 {
        pairwise_sum(&self.masses)
    }

    /// Merge boxes in pairs (level - 1).
    pub fn coarsen(&self) -> Result<BoxMeasure> {
        if self.level == 0 {
            return Err(Error::Resolution("level 0 cannot be coarsened".into()));
        }
        Ok(BoxMeasure {
            level: self.level - 1,
            masses: self.masses.chunks_exact(2).map(|c| c[0] + c[1]).collect(),
            params: self.params,
            oversampling: self.oversampling * 2,
        })
    }

    /// Mass of [a, b]; both endpoints must lie on the box grid.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        interval_mass(&self.masses, self.level, a, b)
    }
}

fn interval_mass(masses: &[f64], level: usize, a: f64, b: f64) -> Result<f64> {
    let scale = (1usize << level) as f64;
    let (ka, kb) = (a * scale, b * scale);
    if !(0.0..=scale).contains(&ka) || !(ka..=scale).contains(&kb) || ka.fract() != 0.0 || kb.fract() != 0.0 {
        return Err(Error::Resolution(format!("[{a}, {b}] is not a union of level-{level} boxes")));
    }
    Ok(pairwise_sum(&masses[ka as usize..kb as usize]))
}

/// Trapezoid box masses of exp(beta f - log_norm) for grid values of f on [0, 1].
pub fn box_masses(values: &[f64], beta: f64, log_norm: f64, level: usize, scale: f64) -> Result<Vec<f64>> {
    let m = values.len();
    let boxes = 1usize << level;
    let per = (m.saturating_sub(1)) / boxes;
    if m < 2 || (m - 1) % boxes != 0 || per < (1 << OVERSAMPLING_LOG2) || !per.is_power_of_two() {
        return Err(Error::Resolution(format!(
            "grid of {m} points does not give 2^{OVERSAMPLING_LOG2} or more intervals per box at level {level}"
        )));
    }
    let h = scale / (m - 1) as f64;
    let dens: Vec<f64> = values.iter().map(|v| (beta * v - log_norm).exp()).collect();
    Ok((0..boxes)
        .map(|k| {
            let s = &dens[k * per..=(k + 1) * per];
            h * (0.5 * (s[0] + s[per]) + pairwise_sum(&s[1..per]))
        })
        .collect())
}

/// Box masses of mu_{beta,N} from an X-grid whose size is 2^{level+s}+1 with s >= 4.
pub fn chaos_boxes(field: &FieldGrid, params: &ChaosParams, level: usize) -> Result<BoxMeasure> {
    if field.label != FieldLabel::X {
        return Err(Error::InvalidParameter(format!("chaos boxes need an X field, got {}", field.label)));
    }
    let masses = box_masses(&field.values, params.beta, params.log_norm, level, params.scale())?;
    let oversampling = (field.values.len() - 1) >> level;
    Ok(BoxMeasure { level, masses, params: *params, oversampling })
}

/// E exp(sum_i lambda_i X_N(x_i)) = prod_j I0(|sum_i lambda_i e^{i x_i log p_j}| / sqrt p_j).
pub fn laplace_functional_oracle(table: &PrimeTable, n_use: usize, points: &[f64], lambdas: &[f64]) -> Result<f64> {
    table.check_n(n_use)?;
    if points.len() != lambdas.len() {
        return Err(Error::InvalidParameter("points and lambdas differ in length".into()));
    }
    let lp = table.log_p();
    let isp = table.inv_sqrt_p();
    let log = pairwise_sum_by(n_use, &|j| {
        let z: Complex64 = points
            .iter()
            .zip(lambdas)
            .map(|(&x, &l)| Complex64::from_polar(l, x * lp[j]))
            .sum();
        log_i0(z.norm() * isp[j])
    });
    Ok(log.exp())
}

/// rho_2(u) = E[e^{beta X(x) + beta X(x+u)}] / (E e^{beta X})^2, by direct product over all primes.
pub fn two_point_density(u: f64, table: &PrimeTable, n_use: usize, beta: f64) -> Result<f64> {
    table.check_n(n_use)?;
    let lp = table.log_p();
    let isp = table.inv_sqrt_p();
    let log = pairwise_sum_by(n_use, &|j| {
        let a = beta * isp[j];
        log_i0(2.0 * a * (0.5 * u * lp[j]).cos().abs()) - 2.0 * log_i0(a)
    });
    Ok(log.exp())
}

/// Primes handled exactly in the fast two-point density; the rest use the
/// expansion of log I0 through z^6.
const RHO2_EXACT_PRIMES: usize = 2000;

/// Fast evaluator of rho_2 on [0, u_max].
///
/// For p beyond the first 2000 primes, log I0(2 beta |cos(u w / 2)| / sqrt p) is
/// expanded through z^6 and regrouped into harmonics cos(k u w), k <= 3, whose
/// prime sums are Chebyshev series in u.
pub struct TwoPointDensity {
    beta: f64,
    u_max: f64,
    n_exact: usize,
    exact_log_p: Vec<f64>,
    exact_amp: Vec<f64>,
    constant: f64,
    harmonics: Option<ChebSeries>,
}

impl TwoPointDensity {
    pub fn new(table: &PrimeTable, n_use: usize, beta: f64, u_max: f64) -> Result<Self> {
        table.check_n(n_use)?;
        if !(u_max > 0.0) {
            return Err(Error::InvalidParameter("u_max must be positive".into()));
        }
        let n_exact = n_use.min(RHO2_EXACT_PRIMES);
        let isp = table.inv_sqrt_p();
        let lp = table.log_p();
        let exact_amp: Vec<f64> = (0..n_exact).map(|j| 2.0 * beta * isp[j]).collect();
        let norm2 = 2.0 * pairwise_sum_by(n_use, &|j| log_i0(beta * isp[j]));
        let mut freqs = Vec::new();
        let mut amps = Vec::new();
        let mut consts = Vec::new();
        for j in n_exact..n_use {
            let b = 2.0 * beta * beta * isp[j] * isp[j];
            let (b2, b3) = (b * b, b * b * b);
            consts.push(b / 4.0 - 3.0 * b2 / 128.0 + 5.0 * b3 / 1152.0);
            for (k, c) in [
                (1.0, b / 4.0 - b2 / 32.0 + 15.0 * b3 / 2304.0),
                (2.0, -b2 / 128.0 + b3 / 384.0),
                (3.0, b3 / 2304.0),
            ] {
                freqs.push(k * lp[j]);
                amps.push(Complex64::new(c, 0.0));
            }
        }
        let harmonics = if freqs.is_empty() { None } else { Some(chebyshev_series(&freqs, &amps, 0.0, u_max)) };
        Ok(TwoPointDensity {
            beta,
            u_max,
            n_exact,
            exact_log_p: lp[..n_exact].to_vec(),
            exact_amp,
            constant: pairwise_sum(&consts) - norm2,
            harmonics,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.abs();
        assert!(u <= self.u_max * (1.0 + 1e-12), "lag {u} beyond u_max {}", self.u_max);
        let head = pairwise_sum_by(self.n_exact, &|j| {
            log_i0(self.exact_amp[j] * (0.5 * u * self.exact_log_p[j]).cos().abs())
        });
        let tail = self.harmonics.as_ref().map_or(0.0, |h| h.eval(u.min(self.u_max)));
        (head + tail + self.constant).exp()
    }
}

/// E mu(I)^2 for an interval of length 2r: int_{-2r}^{2r} (2r - |t|) rho_2(t) dt.
pub fn second_moment_box_exact(r: f64, rho: &TwoPointDensity) -> Result<f64> {
    if rho.beta >= std::f64::consts::SQRT_2 {
        return Err(Error::MomentBarrier(format!(
            "beta = {} >= sqrt 2: the second moment diverges as N grows (moments need q < 4 / beta^2)",
            rho.beta
        )));
    }
    if !(r > 0.0 && r <= 0.25) || 2.0 * r > rho.u_max * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("r = {r} outside (0, 1/4] or beyond the density range")));
    }
    let l = 2.0 * r;
    let v = integrate(|t| (l - t) * rho.eval(t), 0.0, l, 0.0, 1e-11)?;
    Ok(2.0 * v)
}

/// Box masses for every (beta, N) pair, one row per realization.
///
/// Realization i uses phase stream (Phases, i); nested N share their phases.
#[derive(Debug, Clone)]
pub struct MassSamples {
    pub betas: Vec<f64>,
    pub n_list: Vec<usize>,
    pub level: usize,
    /// rows[i] is laid out as [beta][n][box].
    pub rows: Vec<Vec<f64>>,
}

impl MassSamples {
    fn offset(&self, bi: usize, ni: usize) -> usize {
        (bi * self.n_list.len() + ni) << self.level
    }

    pub fn boxes(&self, sample: usize, bi: usize, ni: usize) -> &[f64] {
        let o = self.offset(bi, ni);
        &self.rows[sample][o..o + (1 << self.level)]
    }

    /// Mass of [a, b] for every realization.
    pub fn interval_masses(&self, bi: usize, ni: usize, a: f64, b: f64) -> Result<Vec<f64>> {
        (0..self.rows.len()).map(|s| interval_mass(self.boxes(s, bi, ni), self.level, a, b)).collect()
    }

    /// Mass of the ball B(1/2, r) for every realization.
    pub fn ball_masses(&self, bi: usize, ni: usize, r: f64) -> Result<Vec<f64>> {
        self.interval_masses(bi, ni, 0.5 - r, 0.5 + r)
    }
}

#[derive(Debug, Clone)]
pub struct MassStudyConfig {
    pub betas: Vec<f64>,
    pub n_list: Vec<usize>,
    pub level: usize,
    pub normalization: Normalization,
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

pub fn sample_box_masses(table: &PrimeTable, cfg: &MassStudyConfig) -> Result<MassSamples> {
    if cfg.n_list.is_empty() || cfg.n_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("n_list must be non-empty and non-decreasing".into()));
    }
    let n_max = *cfg.n_list.last().expect("non-empty");
    let sampler = FieldSampler::new(table, n_max, 0.0, 1.0)?;
    let mut log_norms = Vec::new();
    for &b in &cfg.betas {
        for &n in &cfg.n_list {
            log_norms.push(ChaosParams::new(table, b, n, cfg.normalization)?.log_norm);
        }
    }
    let m = grid_for_level(cfg.level);
    let rows = try_map_indexed(cfg.n_samples, cfg.workers, |i| {
        let ph = crate::field_engine::sample_phases_n(n_max, cfg.seed, stream_id(StreamKind::Phases, i as u64));
        let series = sampler.x_series(&ph.theta, &cfg.n_list);
        let grids: Vec<Vec<f64>> = series.iter().map(|s| s.eval_unit_grid(m)).collect();
        let mut row = Vec::with_capacity(log_norms.len() << cfg.level);
        for (bi, &b) in cfg.betas.iter().enumerate() {
            for (ni, g) in grids.iter().enumerate() {
                row.extend(box_masses(g, b, log_norms[bi * cfg.n_list.len() + ni], cfg.level, 1.0)?);
            }
        }
        Ok(row)
    })?;
    Ok(MassSamples { betas: cfg.betas.clone(), n_list: cfg.n_list.clone(), level: cfg.level, rows })
}

/// Jackknife groups used for moment standard errors.
pub const JACKKNIFE_GROUPS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub q: f64,
    pub r: f64,
    pub moment: f64,
    pub se: f64,
    pub n_samples: usize,
}

/// q-th moments of ball masses from stored samples.
pub fn moments_from_samples(s: &MassSamples, bi: usize, ni: usize, q: f64, r_list: &[f64]) -> Result<Vec<MomentEstimate>> {
    r_list
        .iter()
        .map(|&r| {
            let m = s.ball_masses(bi, ni, r)?;
            let pw: Vec<f64> = m.iter().map(|v| v.powf(q)).collect();
            let est = jackknife_mean(&pw, JACKKNIFE_GROUPS);
            Ok(MomentEstimate { q, r, moment: est.mean, se: est.se, n_samples: m.len() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentStudy {
    pub estimates: Vec<MomentEstimate>,
    /// Set when q beta^2 / 4 >= 1, where heavy tails make the SE unreliable.
    pub warning: Option<String>,
}

/// Monte Carlo E mu(B(1/2, r))^q for each r, with jackknife standard errors.
pub fn mc_moment(
    table: &PrimeTable,
    params: &ChaosParams,
    q: f64,
    r_list: &[f64],
    n_samples: usize,
    level: usize,
    seed: u64,
    workers: usize,
) -> Result<MomentStudy> {
    let cfg = MassStudyConfig {
        betas: vec![params.beta],
        n_list: vec![params.n_primes],
        level,
        normalization: params.normalization,
        n_samples,
        seed,
        workers,
    };
    let s = sample_box_masses(table, &cfg)?;
    let mut estimates = moments_from_samples(&s, 0, 0, q, r_list)?;
    let sc = params.scale().powf(q);
    for e in &mut estimates {
        e.moment *= sc;
        e.se *= sc;
    }
    let warning = (q * params.beta * params.beta / 4.0 >= 1.0).then(|| {
        format!("q beta^2 / 4 = {:.3} >= 1: moment may not exist, SE unreliable", q * params.beta * params.beta / 4.0)
    });
    Ok(MomentStudy { estimates, warning })
}

/// Log-log regression of moments against r.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub q: f64,
    pub beta: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    /// (1 + beta^2/2) q - (beta^2/2) q^2
    pub full_kernel_formula: f64,
    /// (1 + beta^2/4) q - (beta^2/4) q^2, from the field's own kernel
    pub half_kernel_formula: f64,
    pub r: Vec<f64>,
    pub moments: Vec<f64>,
    pub ses: Vec<f64>,
}

/// Weighted least squares of log moment on log r (weights (moment/se)^2;
/// equal weights when an SE is zero, as for exact oracle values).
pub fn scaling_exponent_fit(moments: &[MomentEstimate], beta: f64) -> Result<ScalingFit> {
    if moments.len() < 4 {
        return Err(Error::InvalidParameter("scaling fit needs at least 4 radii".into()));
    }
    let q = moments[0].q;
    let x: Vec<f64> = moments.iter().map(|m| m.r.ln()).collect();
    let y: Vec<f64> = moments.iter().map(|m| m.moment.ln()).collect();
    let exact = moments.iter().any(|m| !(m.se > 0.0));
    let w: Vec<f64> = moments.iter().map(|m| if exact { 1.0 } else { (m.moment / m.se).powi(2) }).collect();
    let fit = if exact { crate::stats::line_fit(&x, &y) } else { weighted_line_fit(&x, &y, &w) };
    let b2 = beta * beta;
    Ok(ScalingFit {
        q,
        beta,
        slope: fit.slope,
        slope_se: fit.slope_se,
        intercept: fit.intercept,
        full_kernel_formula: (1.0 + b2 / 2.0) * q - b2 / 2.0 * q * q,
        half_kernel_formula: (1.0 + b2 / 4.0) * q - b2 / 4.0 * q * q,
        r: moments.iter().map(|m| m.r).collect(),
        moments: moments.iter().map(|m| m.moment).collect(),
        ses: moments.iter().map(|m| m.se).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleDraw {
    pub base_mass: f64,
    pub inner_mean: f64,
    pub inner_se: f64,
    /// inner_mean / base_mass - 1
    pub ratio_minus_one: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    pub draws: Vec<MartingaleDraw>,
    /// sum of per-draw z-scores over sqrt(count)
    pub aggregate_z: f64,
    /// Set for a zero-width box, where every mass is 0.
    pub skipped: bool,
}

#[derive(Debug, Clone)]
pub struct MartingaleConfig {
    pub beta: f64,
    pub n_base: usize,
    pub n_extended: usize,
    /// Interval [a, b] on the level grid.
    pub interval: (f64, f64),
    pub level: usize,
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Hold phases 1..n_base fixed, average the box mass over fresh phases
/// n_base+1..n_extended, and compare with the base mass.
pub fn martingale_check(table: &PrimeTable, cfg: &MartingaleConfig) -> Result<MartingaleReport> {
    if cfg.n_extended < cfg.n_base || cfg.n_base == 0 {
        return Err(Error::InvalidParameter("need 0 < n_base <= n_extended".into()));
    }
    let (a, b) = cfg.interval;
    if a == b {
        return Ok(MartingaleReport { draws: Vec::new(), aggregate_z: 0.0, skipped: true });
    }
    let sampler = FieldSampler::new(table, cfg.n_extended, 0.0, 1.0)?;
    let ln_base = ChaosParams::new(table, cfg.beta, cfg.n_base, Normalization::ExactBessel)?.log_norm;
    let ln_ext = ChaosParams::new(table, cfg.beta, cfg.n_extended, Normalization::ExactBessel)?.log_norm;
    let m = grid_for_level(cfg.level);
    let mut draws = Vec::with_capacity(cfg.n_outer);
    for o in 0..cfg.n_outer {
        let base = crate::field_engine::sample_phases_n(cfg.n_base, cfg.seed, stream_id(StreamKind::Phases, o as u64));
        let g = sampler.x_series(&base.theta, &[cfg.n_base])[0].eval_unit_grid(m);
        let base_mass = interval_mass(&box_masses(&g, cfg.beta, ln_base, cfg.level, 1.0)?, cfg.level, a, b)?;
        if cfg.n_extended == cfg.n_base {
            draws.push(MartingaleDraw { base_mass, inner_mean: base_mass, inner_se: 0.0, ratio_minus_one: 0.0, z: 0.0 });
            continue;
        }
        let inner = try_map_indexed(cfg.n_inner, cfg.workers, |i| {
            let sid = stream_id(StreamKind::Auxiliary, (o * cfg.n_inner + i) as u64);
            let mut rng = StreamRng::new(cfg.seed, sid);
            let mut theta = base.theta.clone();
            theta.extend((cfg.n_base..cfg.n_extended).map(|_| 2.0 * std::f64::consts::PI * rng.uniform()));
            let g = sampler.x_series(&theta, &[cfg.n_extended])[0].eval_unit_grid(m);
            interval_mass(&box_masses(&g, cfg.beta, ln_ext, cfg.level, 1.0)?, cfg.level, a, b)
        })?;
        let est = mean_se(&inner);
        let r = est.mean / base_mass - 1.0;
        let se = est.se / base_mass;
        draws.push(MartingaleDraw { base_mass, inner_mean: est.mean, inner_se: est.se, ratio_minus_one: r, z: r / se });
    }
    let aggregate_z = if cfg.n_extended == cfg.n_base {
        0.0
    } else {
        draws.iter().map(|d| d.z).sum::<f64>() / (draws.len() as f64).sqrt()
    };
    Ok(MartingaleReport { draws, aggregate_z, skipped: false })
}

/// Summary of sqrt(log log N) mu_{2,N}(0, 1) at one N.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSummary {
    pub n_primes: usize,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub mean: f64,
    pub min: f64,
    /// E (normalized mass)^{1/2}
    pub half_moment: MeanSe,
}

pub fn critical_mass_study(
    table: &PrimeTable,
    n_list: &[usize],
    n_samples: usize,
    level: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<CriticalSummary>> {
    let cfg = MassStudyConfig {
        betas: vec![BETA_CRITICAL],
        n_list: n_list.to_vec(),
        level,
        normalization: Normalization::ExactBessel,
        n_samples,
        seed,
        workers,
    };
    let s = sample_box_masses(table, &cfg)?;
    critical_summaries(&s, 0)
}

/// Critical summaries from stored samples for beta index `bi`.
pub fn critical_summaries(s: &MassSamples, bi: usize) -> Result<Vec<CriticalSummary>> {
    s.n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let f = critical_factor(n);
            let tot: Vec<f64> = s.interval_masses(bi, ni, 0.0, 1.0)?.iter().map(|v| v * f).collect();
            let half: Vec<f64> = tot.iter().map(|v| v.sqrt()).collect();
            Ok(CriticalSummary {
                n_primes: n,
                median: quantile(&tot, 0.5),
                lower_quartile: quantile(&tot, 0.25),
                upper_quartile: quantile(&tot, 0.75),
                mean: mean_se(&tot).mean,
                min: tot.iter().copied().fold(f64::INFINITY, f64::min),
                half_moment: jackknife_mean(&half, JACKKNIFE_GROUPS),
            })
        })
        .collect()
}

/// One-prime check of the Bessel identity E e^{lambda cos(theta - phi)} = I0(lambda).
pub fn bessel_identity(lambda: f64) -> f64 {
    i0(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_engine::{eval_field, sample_phases};
    use crate::numeric::integrate;
    use crate::primes::build_prime_table;

    #[test]
    fn two_point_density_single_prime() {
        let t = build_prime_table(10).unwrap();
        let v = two_point_density(0.0, &t, 1, 1.0).unwrap();
        let oracle = |x: f64| integrate(|th| (x * th.cos()).exp(), 0.0, std::f64::consts::PI, 0.0, 1e-15).unwrap() / std::f64::consts::PI;
        let expect = oracle(2f64.sqrt()) / oracle(0.5f64.sqrt()).powi(2);
        assert!((v - expect).abs() < 1e-13);
        assert!((v - 1.22872).abs() < 2e-5);
        assert!((two_point_density(0.3, &t, 10, 1e-9).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fast_two_point_density_matches_direct() {
        let t = build_prime_table(100_000).unwrap();
        let rho = TwoPointDensity::new(&t, 100_000, 1.2, 0.5).unwrap();
        for &u in &[0.0, 1e-4, 0.01, 0.137, 0.5] {
            let d = two_point_density(u, &t, 100_000, 1.2).unwrap();
            assert!((rho.eval(u) / d - 1.0).abs() < 1e-11, "u = {u}");
        }
    }

    #[test]
    fn second_moment_limits_and_barrier() {
        let t = build_prime_table(5000).unwrap();
        let rho = TwoPointDensity::new(&t, 5000, 1e-6, 0.5).unwrap();
        let v = second_moment_box_exact(0.125, &rho).unwrap();
        assert!((v - 0.0625).abs() < 1e-9);
        let rho = TwoPointDensity::new(&t, 5000, 1.5, 0.5).unwrap();
        assert!(matches!(second_moment_box_exact(0.125, &rho), Err(Error::MomentBarrier(_))));
    }

    #[test]
    fn boxes_nest_and_small_beta_is_lebesgue() {
        let t = build_prime_table(1000).unwrap();
        let ph = sample_phases(&t, 1, 1);
        let f = eval_field(&t, &ph, 1000, grid_for_level(5)).unwrap();
        let p = ChaosParams::new(&t, 1.0, 1000, Normalization::ExactBessel).unwrap();
        let b5 = chaos_boxes(&f, &p, 5).unwrap();
        let b4 = chaos_boxes(&f, &p, 4).unwrap();
        let c = b5.coarsen().unwrap();
        for (x, y) in c.masses.iter().zip(&b4.masses) {
            assert!(((x - y) / y).abs() < 1e-10);
        }
        assert!(b5.masses.iter().all(|&m| m > 0.0));
        let tiny = ChaosParams::new(&t, 1e-12, 1000, Normalization::ExactBessel).unwrap();
        let b = chaos_boxes(&f, &tiny, 5).unwrap();
        assert!(b.masses.iter().all(|m| (m - 1.0 / 32.0).abs() < 1e-10));
        assert!(matches!(chaos_boxes(&f, &p, 6), Err(Error::Resolution(_))));
    }

    #[test]
    fn scaling_fit_of_linear_moments() {
        let ms: Vec<MomentEstimate> = [0.25, 0.125, 0.0625, 0.03125]
            .iter()
            .map(|&r| MomentEstimate { q: 1.0, r, moment: 2.0 * r, se: 0.0, n_samples: 0 })
            .collect();
        let f = scaling_exponent_fit(&ms, 1.0).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert_eq!(f.full_kernel_formula, 1.0);
        let ms2: Vec<MomentEstimate> = ms.iter().map(|m| MomentEstimate { q: 2.0, ..m.clone() }).collect();
        let f2 = scaling_exponent_fit(&ms2, 1.0).unwrap();
        assert_eq!((f2.full_kernel_formula, f2.half_kernel_formula), (1.0, 1.5));
    }

    #[test]
    fn martingale_trivial_cases() {
        let t = build_prime_table(200).unwrap();
        let mut cfg = MartingaleConfig {
            beta: 1.0,
            n_base: 100,
            n_extended: 100,
            interval: (0.0, 1.0),
            level: 3,
            n_outer: 3,
            n_inner: 10,
            seed: 1,
            workers: 1,
        };
        let r = martingale_check(&t, &cfg).unwrap();
        assert!(r.draws.iter().all(|d| d.ratio_minus_one == 0.0));
        cfg.interval = (0.5, 0.5);
        assert!(martingale_check(&t, &cfg).unwrap().skipped);
    }

    #[test]
    fn laplace_oracle_single_point() {
        let t = build_prime_table(10).unwrap();
        let v = laplace_functional_oracle(&t, 1, &[0.3], &[1.0]).unwrap();
        assert!((v - bessel_identity(std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-14);
    }
}
