//! The twelve acceptance criteria, each returning a PASS/FAIL verdict with the
//! measured numbers. `tests/acceptance.rs` runs them and prints one line each.

use std::path::Path;
use std::time::{Duration, Instant};
use zeta_chaos::chaos_measure::{
    critical_summaries, laplace_functional_oracle, martingale_check, moments_from_samples, sample_box_masses,
    scaling_exponent_fit, second_moment_box_exact, MartingaleConfig, MassSamples, MassStudyConfig, MomentEstimate,
    Normalization, TwoPointDensity,
};
use zeta_chaos::cli::{run, Format, RunConfig, Subcommand};
use zeta_chaos::coupling::{audit_block, AuditConfig};
use zeta_chaos::covariance_kernel::{kernel_bound_check, psi_limit_prime, psi_limit_zeta, psi_n, PRIME_ROUTE_N};
use zeta_chaos::critical_chain::js1_conditions;
use zeta_chaos::field_engine::{eval_field_at, eval_gaussian_field_at, sample_gaussians_n, sample_phases_n};
use zeta_chaos::parallel::map_indexed;
use zeta_chaos::primes::{build_prime_table, log_spaced_indices, pnt_error_profile, PrimeTable};
use zeta_chaos::rng::{stream_id, StreamKind, StreamRng};
use zeta_chaos::stats::{jackknife_mean, line_fit, mean_se, zero_mean_cov};
use zeta_chaos::Result;

pub const SEED: u64 = 20_240_601;

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} [{}] {} ({:.1}s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Shared data: one prime table and one chaos ensemble reused by criteria 5, 6, 7, 11, 12.
pub struct Context {
    pub table: PrimeTable,
    pub ensemble: MassSamples,
    pub ensemble_cfg: MassStudyConfig,
    pub ensemble_time: Duration,
}

pub const ENSEMBLE_BETAS: [f64; 5] = [0.5, 1.0, 1.6, 1.9, 2.0];
pub const ENSEMBLE_N: [usize; 3] = [1_000, 10_000, 100_000];
pub const ENSEMBLE_SAMPLES: usize = 10_000;
pub const ENSEMBLE_LEVEL: usize = 6;

fn beta_index(b: f64) -> usize {
    ENSEMBLE_BETAS.iter().position(|&x| x == b).expect("beta in ensemble")
}

fn n_index(n: usize) -> usize {
    ENSEMBLE_N.iter().position(|&x| x == n).expect("N in ensemble")
}

impl Context {
    pub fn build() -> Result<Self> {
        let table = build_prime_table(PRIME_ROUTE_N)?;
        let ensemble_cfg = MassStudyConfig {
            betas: ENSEMBLE_BETAS.to_vec(),
            n_list: ENSEMBLE_N.to_vec(),
            level: ENSEMBLE_LEVEL,
            normalization: Normalization::ExactBessel,
            n_samples: ENSEMBLE_SAMPLES,
            seed: SEED,
            workers: workers(),
        };
        let t = Instant::now();
        let ensemble = sample_box_masses(&table, &ensemble_cfg)?;
        Ok(Context { table, ensemble, ensemble_cfg, ensemble_time: t.elapsed() })
    }
}

fn verdict(id: usize, name: &'static str, limit_s: f64, start: Instant, extra: Duration, body: Result<(bool, String)>) -> Verdict {
    let elapsed = start.elapsed() + extra;
    match body {
        Ok((ok, detail)) => {
            let in_time = elapsed.as_secs_f64() < limit_s;
            let detail = if in_time { detail } else { format!("{detail}; runtime over {limit_s}s") };
            Verdict { id, name, pass: ok && in_time, detail, elapsed }
        }
        Err(e) => Verdict { id, name, pass: false, detail: format!("error: {e}"), elapsed },
    }
}

/// Random points in [0, 1] from the auxiliary stream.
fn random_points(count: usize, index: u64) -> Vec<f64> {
    let mut rng = StreamRng::new(SEED, stream_id(StreamKind::Auxiliary, index));
    (0..count).map(|_| rng.uniform()).collect()
}

pub fn c1_laplace(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let n = 100;
        let beta = 1.0;
        let xs = random_points(3, 1 << 40);
        let lambdas = [beta, -0.5 * beta, 0.75 * beta];
        let oracle = laplace_functional_oracle(&ctx.table, n, &xs, &lambdas)?;
        let v = map_indexed(100_000, workers(), |i| {
            let ph = sample_phases_n(n, SEED, stream_id(StreamKind::Phases, i as u64));
            let x = eval_field_at(&ctx.table, &ph.theta, n, &xs);
            x.iter().zip(&lambdas).map(|(a, l)| a * l).sum::<f64>().exp()
        })?;
        let m = mean_se(&v);
        let z = (m.mean - oracle) / m.se;
        Ok((z.abs() <= 3.0, format!("mc {:.6} +- {:.6}, oracle {:.6}, z {:.2}", m.mean, m.se, oracle, z)))
    })();
    verdict(1, "Laplace-functional oracle", 60.0, start, Duration::ZERO, body)
}

pub fn c2_covariance(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let n = 100;
        let pts = random_points(20, 1 << 41);
        let samples = 100_000;
        let vals = map_indexed(samples, workers(), |i| {
            let ph = sample_phases_n(n, SEED, stream_id(StreamKind::Phases, i as u64));
            let gd = sample_gaussians_n(n, SEED, stream_id(StreamKind::Gaussians, i as u64));
            (
                eval_field_at(&ctx.table, &ph.theta, n, &pts),
                eval_gaussian_field_at(&ctx.table, &gd.w1, &gd.w2, n, &pts),
            )
        })?;
        let mut worst = 0.0f64;
        for k in 0..10 {
            let (a, b) = (2 * k, 2 * k + 1);
            let psi = psi_n(pts[a] - pts[b], &ctx.table, n)?;
            for field in 0..2 {
                let pick = |s: &(Vec<f64>, Vec<f64>), i: usize| if field == 0 { s.0[i] } else { s.1[i] };
                let xa: Vec<f64> = vals.iter().map(|s| pick(s, a)).collect();
                let xb: Vec<f64> = vals.iter().map(|s| pick(s, b)).collect();
                let c = zero_mean_cov(&xa, &xb);
                worst = worst.max(((c.mean - psi) / c.se).abs());
            }
        }
        Ok((worst <= 3.0, format!("20 comparisons (X and G, 10 pairs), max |z| {worst:.2}")))
    })();
    verdict(2, "Covariance exactness", 120.0, start, Duration::ZERO, body)
}

pub fn c3_kernel_bound(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let cs: Vec<f64> = [10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| kernel_bound_check(&ctx.table, n, 1000).map(|b| b.c_log_pn))
            .collect::<Result<_>>()?;
        let ratio = cs.iter().cloned().fold(f64::MIN, f64::max) / cs.iter().cloned().fold(f64::MAX, f64::min);
        Ok((ratio < 2.0, format!("constants {:.4} {:.4} {:.4}, max/min {:.3}", cs[0], cs[1], cs[2], ratio)))
    })();
    verdict(3, "Kernel bound", 60.0, start, Duration::ZERO, body)
}

pub fn c4_dual_route(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let mut worst = 0.0f64;
        for u in [0.1, 0.5, 1.0, 2.0] {
            let a = psi_limit_prime(u, &ctx.table, PRIME_ROUTE_N)?;
            let b = psi_limit_zeta(u, &ctx.table)?;
            worst = worst.max((a - b).abs());
        }
        Ok((worst < 1e-5, format!("max |prime - zeta| {worst:.2e}")))
    })();
    verdict(4, "Dual-route limit kernel", 120.0, start, Duration::ZERO, body)
}

pub fn c5_martingale(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let ni = n_index(10_000);
        let mut ok = true;
        let mut parts = Vec::new();
        for b in [0.5, 1.0, 1.9] {
            let m = ctx.ensemble.interval_masses(beta_index(b), ni, 0.0, 1.0)?;
            let e = jackknife_mean(&m, 50);
            let z = (e.mean - 1.0) / e.se;
            ok &= z.abs() <= 3.0;
            parts.push(format!("beta {b}: {:.4} +- {:.4} (z {:.2})", e.mean, e.se, z));
        }
        let rep = martingale_check(
            &ctx.table,
            &MartingaleConfig {
                beta: 1.0,
                n_base: 1_000,
                n_extended: 10_000,
                interval: (0.0, 1.0),
                level: ENSEMBLE_LEVEL,
                n_outer: 20,
                n_inner: 500,
                seed: SEED,
                workers: workers(),
            },
        )?;
        ok &= rep.aggregate_z.abs() <= 3.0;
        parts.push(format!("conditional ratio aggregate z {:.2}", rep.aggregate_z));
        Ok((ok, parts.join("; ")))
    })();
    verdict(5, "Martingale/normalization", 300.0, start, ctx.ensemble_time, body)
}

pub fn c6_second_moment(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let r_list = [0.25, 0.125, 0.0625, 0.03125];
        let n = 100_000;
        let est = moments_from_samples(&ctx.ensemble, beta_index(1.0), n_index(n), 2.0, &r_list)?;
        let rho = TwoPointDensity::new(&ctx.table, n, 1.0, 0.5)?;
        let mut worst = 0.0f64;
        let mut exact = Vec::new();
        for e in &est {
            let o = second_moment_box_exact(e.r, &rho)?;
            worst = worst.max(((e.moment - o) / e.se).abs());
            exact.push(MomentEstimate { moment: o, se: 0.0, ..e.clone() });
        }
        let fit = scaling_exponent_fit(&est, 1.0)?;
        let oracle_fit = scaling_exponent_fit(&exact, 1.0)?;
        let ok = worst <= 3.0 && (1.3..=1.7).contains(&fit.slope);
        Ok((
            ok,
            format!(
                "max |z| vs oracle {worst:.2}; MC slope {:.3} +- {:.3} (oracle slope {:.3}); half-kernel formula {:.2}, full-kernel formula {:.2}",
                fit.slope, fit.slope_se, oracle_fit.slope, fit.half_kernel_formula, fit.full_kernel_formula
            ),
        ))
    })();
    verdict(6, "Second-moment oracle", 600.0, start, ctx.ensemble_time, body)
}

fn total_moment(ctx: &Context, beta: f64, n: usize, q: f64) -> Result<MomentEstimate> {
    Ok(moments_from_samples(&ctx.ensemble, beta_index(beta), n_index(n), q, &[0.5])?.remove(0))
}

pub fn c7_barrier(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let a = total_moment(ctx, 1.0, 10_000, 3.5)?;
        let b = total_moment(ctx, 1.0, 100_000, 3.5)?;
        let ratio = b.moment / a.moment;
        let g: Vec<f64> = ENSEMBLE_N
            .iter()
            .map(|&n| total_moment(ctx, 1.6, n, 2.0).map(|m| m.moment))
            .collect::<Result<_>>()?;
        let grows = g.windows(2).all(|w| w[1] > w[0]);
        Ok((
            (0.5..=2.0).contains(&ratio) && grows,
            format!(
                "beta 1, q 3.5: ratio N=1e5/1e4 {ratio:.3}; beta 1.6, q 2: {:.4} {:.4} {:.4}",
                g[0], g[1], g[2]
            ),
        ))
    })();
    verdict(7, "Moment barrier direction", 600.0, start, ctx.ensemble_time, body)
}

pub fn c8_coupling(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let cfg = AuditConfig { seed: SEED, workers: workers(), ..AuditConfig::default() };
        let rows = [16, 64, 256, 1024]
            .iter()
            .map(|&n| audit_block(&ctx.table, n, &cfg))
            .collect::<Result<Vec<_>>>()?;
        let ks_ok = rows.iter().all(|a| a.ks_v1 < a.ks_critical && a.ks_v2 < a.ks_critical);
        let chain_ok = rows.iter().all(|a| a.ordering_chain);
        let means: Vec<f64> = rows.iter().map(|a| a.mean_abs_v).collect();
        let decreasing = means.windows(2).all(|w| w[1] < w[0]);
        let x: Vec<f64> = rows.iter().map(|a| (a.n as f64).ln()).collect();
        let y: Vec<f64> = means.iter().map(|m| m.ln()).collect();
        let slope = line_fit(&x, &y).slope;
        let ly: Vec<f64> = rows.iter().map(|a| a.fourier_l1.ln()).collect();
        let l1_slope = line_fit(&x, &ly).slope;
        let ok = ks_ok && chain_ok && decreasing && (-0.7..=-0.3).contains(&slope);
        let cells: Vec<String> = rows
            .iter()
            .map(|a| format!("n={} |V| {:.2e} cost {:.2e}", a.n, a.mean_abs_v, a.coupling_cost))
            .collect();
        Ok((
            ok,
            format!(
                "(a) KS {} (b) chain {} (c) decreasing {}, slope {slope:.3}; Fourier L1 slope {l1_slope:.3}; {}",
                ks_ok,
                chain_ok,
                decreasing,
                cells.join(", ")
            ),
        ))
    })();
    verdict(8, "Coupling audit", 900.0, start, Duration::ZERO, body)
}

pub fn c9_pnt(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let idx = log_spaced_indices(1_000, 1_000_000, 20);
        let prof = pnt_error_profile(&ctx.table, &idx)?;
        let v: Vec<f64> = prof.iter().map(|p| p.1).collect();
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        let finite = v.iter().all(|x| x.is_finite());
        Ok((
            finite && max / min < 10.0,
            format!("{} indices, bounded by {max:.4}, min {min:.4}, spread {:.2}", v.len(), max / min),
        ))
    })();
    verdict(9, "PNT error", 60.0, start, Duration::ZERO, body)
}

pub fn c10_js1() -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let reps = js1_conditions(&[1_000, 10_000, 100_000], 1000)?;
        let sups: Vec<f64> = reps.iter().map(|r| r.sup_diff).collect();
        let ratio = sups.iter().cloned().fold(f64::MIN, f64::max) / sups.iter().cloned().fold(f64::MAX, f64::min);
        let off: Vec<f64> = reps.iter().map(|r| r.offdiag[1]).collect();
        let decreasing = off.windows(2).all(|w| w[1] < w[0]);
        let d: Vec<f64> = reps.iter().map(|r| r.diag_offset).collect();
        let spread = d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min);
        Ok((
            ratio < 3.0 && decreasing && spread < 0.5,
            format!(
                "sup_diff max/min {ratio:.3}; offdiag(0.1) {:.4} {:.4} {:.4} decreasing {decreasing}; diagonal spread {spread:.4}",
                off[0], off[1], off[2]
            ),
        ))
    })();
    verdict(10, "Critical comparison", 180.0, start, Duration::ZERO, body)
}

pub fn c11_critical(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        let e = &ctx.ensemble;
        let sub = MassSamples {
            betas: e.betas.clone(),
            n_list: e.n_list.clone(),
            level: e.level,
            rows: e.rows[..2000].to_vec(),
        };
        let s = critical_summaries(&sub, beta_index(2.0))?;
        let med: Vec<f64> = s.iter().map(|c| c.median).collect();
        let ch1 = ((med[1] - med[0]) / med[0]).abs();
        let ch2 = ((med[2] - med[1]) / med[1]).abs();
        let half: Vec<f64> = s.iter().map(|c| c.half_moment.mean).collect();
        let finite = half.iter().all(|h| h.is_finite() && *h > 0.0);
        let stable = half.windows(2).all(|w| (0.5..=2.0).contains(&(w[1] / w[0])));
        Ok((
            ch2 < ch1 && finite && stable,
            format!(
                "medians {:.4} {:.4} {:.4}, relative changes {ch1:.4} then {ch2:.4}; q=1/2 moments {:.4} {:.4} {:.4}",
                med[0], med[1], med[2], half[0], half[1], half[2]
            ),
        ))
    })();
    verdict(11, "Critical mass trend", 1200.0, start, ctx.ensemble_time, body)
}

fn dirs_identical(a: &Path, b: &Path) -> std::io::Result<bool> {
    let mut names: Vec<_> = std::fs::read_dir(a)?.map(|e| e.map(|e| e.file_name())).collect::<std::io::Result<_>>()?;
    names.sort();
    let mut other: Vec<_> = std::fs::read_dir(b)?.map(|e| e.map(|e| e.file_name())).collect::<std::io::Result<_>>()?;
    other.sort();
    if names != other {
        return Ok(false);
    }
    for n in names {
        if std::fs::read(a.join(&n))? != std::fs::read(b.join(&n))? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn c12_determinism(ctx: &Context) -> Verdict {
    let start = Instant::now();
    let body = (|| {
        // a slice of the shared ensemble, recomputed with a different worker count
        let w = if ctx.ensemble_cfg.workers == 3 { 2 } else { 3 };
        let cfg = MassStudyConfig { n_samples: 48, workers: w, ..ctx.ensemble_cfg.clone() };
        let again = sample_box_masses(&ctx.table, &cfg)?;
        let same_rows = again
            .rows
            .iter()
            .zip(&ctx.ensemble.rows)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        // a full CLI run with 1 and 3 workers
        let cli = RunConfig {
            subcommand: Subcommand::All,
            n_primes: 1_000,
            level: 4,
            grid_size: 256,
            r_list: vec![0.25, 0.125, 0.0625],
            n_samples: 64,
            seed: SEED,
            format: Format::Csv,
            ..RunConfig::default()
        };
        let d1 = tempfile::tempdir()?;
        let d3 = tempfile::tempdir()?;
        run(&cli, 1, d1.path())?;
        run(&cli, 3, d3.path())?;
        let same_files = dirs_identical(d1.path(), d3.path())?;
        Ok((
            same_rows && same_files,
            format!("ensemble rows ({} vs {w} workers) identical {same_rows}; CLI outputs (1 vs 3 workers) identical {same_files}", ctx.ensemble_cfg.workers),
        ))
    })();
    verdict(12, "Determinism", f64::INFINITY, start, Duration::ZERO, body)
}

/// Run every criterion in order.
pub fn run_all(mut report: impl FnMut(&Verdict)) -> Result<Vec<Verdict>> {
    let ctx = Context::build()?;
    let mut out = Vec::new();
    let steps: Vec<Box<dyn Fn(&Context) -> Verdict>> = vec![
        Box::new(c1_laplace),
        Box::new(c2_covariance),
        Box::new(c3_kernel_bound),
        Box::new(c4_dual_route),
        Box::new(c5_martingale),
        Box::new(c6_second_moment),
        Box::new(c7_barrier),
        Box::new(c8_coupling),
        Box::new(c9_pnt),
        Box::new(|_: &Context| c10_js1()),
        Box::new(c11_critical),
        Box::new(c12_determinism),
    ];
    for s in steps {
        let v = s(&ctx);
        report(&v);
        out.push(v);
    }
    Ok(out)
}
