//! Command-line front end: run configuration, manifests and the study drivers.

use crate::chaos_measure::{
    critical_summaries, grid_for_level, martingale_check, moments_from_samples, sample_box_masses,
    scaling_exponent_fit, second_moment_box_exact, MartingaleConfig, MassStudyConfig, Normalization,
    TwoPointDensity,
};
use crate::coupling::{audit_block, AuditConfig, PlanarGrid};
use crate::covariance_kernel::{kernel_bound_check, psi_limit, psi_n_grid, KernelRoute, PRIME_ROUTE_N};
use crate::critical_chain::{js1_conditions, matching_t, stage_gaps, ReferenceSampler, MAX_REFERENCE_GRID};
use crate::error::{Error, Result};
use crate::field_engine::{eval_field, eval_gaussian_field, sample_gaussians_n, sample_phases_n};
use crate::primes::{load_or_build, PrimeTable};
use crate::rng::{stream_id, StreamKind};
use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Field,
    Kernel,
    Chaos,
    Coupling,
    Critical,
    All,
}

impl Subcommand {
    fn name(self) -> &'static str {
        match self {
            Subcommand::Field => "field",
            Subcommand::Kernel => "kernel",
            Subcommand::Chaos => "chaos",
            Subcommand::Coupling => "coupling",
            Subcommand::Critical => "critical",
            Subcommand::All => "all",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        <Subcommand as ValueEnum>::from_str(s, true).map_err(|_| Error::InvalidParameter(format!("unknown subcommand {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "zeta-chaos", about = "Random Euler-product fields, their chaos measures and coupling audits")]
pub struct Args {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_primes: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub level: Option<usize>,
    /// Comma-separated ball radii.
    #[arg(long)]
    pub r_list: Option<String>,
    /// Comma-separated moment orders.
    #[arg(long)]
    pub q_list: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Everything that determines output bytes. Worker count and output
/// directory are deliberately absent.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub n_primes: usize,
    pub beta: f64,
    pub alpha: f64,
    pub grid_size: usize,
    pub level: usize,
    pub r_list: Vec<f64>,
    pub q_list: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: Subcommand::All,
            n_primes: 10_000,
            beta: 1.0,
            alpha: 0.3,
            grid_size: 1024,
            level: 6,
            r_list: vec![0.25, 0.125, 0.0625, 0.03125],
            q_list: vec![0.5, 1.0, 2.0],
            n_samples: 1000,
            seed: 0,
            format: Format::Csv,
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number {v:?}"))))
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidParameter(format!("bad value for {key}: {v:?}")))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("config line without '=': {line}")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "subcommand" => self.subcommand = Subcommand::parse(v)?,
                "n_primes" => self.n_primes = parse_num(k, v)?,
                "beta" => self.beta = parse_num(k, v)?,
                "alpha" => self.alpha = parse_num(k, v)?,
                "grid_size" => self.grid_size = parse_num(k, v)?,
                "level" => self.level = parse_num(k, v)?,
                "r_list" => self.r_list = parse_list(v)?,
                "q_list" => self.q_list = parse_list(v)?,
                "n_samples" => self.n_samples = parse_num(k, v)?,
                "seed" => self.seed = parse_num(k, v)?,
                "format" => {
                    self.format = match v {
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        _ => return Err(Error::InvalidParameter(format!("unknown format {v}"))),
                    }
                }
                // recorded in manifests, not an input
                "manifest_version" => {}
                _ => return Err(Error::InvalidParameter(format!("unknown config key {k}"))),
            }
        }
        Ok(())
    }

    pub fn from_args(args: &Args) -> Result<Self> {
        let mut c = RunConfig::default();
        if let Some(p) = &args.config {
            c.apply_text(&std::fs::read_to_string(p)?)?;
        }
        c.subcommand = args.subcommand;
        if let Some(v) = args.n_primes {
            c.n_primes = v;
        }
        if let Some(v) = args.beta {
            c.beta = v;
        }
        if let Some(v) = args.alpha {
            c.alpha = v;
        }
        if let Some(v) = args.grid {
            c.grid_size = v;
        }
        if let Some(v) = args.level {
            c.level = v;
        }
        if let Some(v) = &args.r_list {
            c.r_list = parse_list(v)?;
        }
        if let Some(v) = &args.q_list {
            c.q_list = parse_list(v)?;
        }
        if let Some(v) = args.samples {
            c.n_samples = v;
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        if let Some(v) = args.format {
            c.format = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.4) {
            return Err(Error::InvalidParameter(format!("alpha must be in (0, 2/5), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidParameter("grid_size must be at least 2".into()));
        }
        let needs_level = matches!(self.subcommand, Subcommand::Chaos | Subcommand::All);
        if needs_level && (self.level + 4 >= 64 || (1usize << (self.level + 4)) > self.grid_size) {
            return Err(Error::Resolution(format!(
                "level + 4 = {} exceeds log2(grid_size = {})",
                self.level + 4,
                self.grid_size
            )));
        }
        if self.r_list.iter().any(|&r| !(r > 0.0 && r <= 0.5)) {
            return Err(Error::InvalidParameter("radii must lie in (0, 1/2]".into()));
        }
        if needs_level {
            let cells = (1u64 << self.level) as f64;
            if let Some(r) = self.r_list.iter().find(|&&r| (r * cells).fract() != 0.0) {
                return Err(Error::Resolution(format!("radius {r} is not a multiple of 2^-{}", self.level)));
            }
        }
        if self.q_list.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(Error::InvalidParameter("moment orders must be positive".into()));
        }
        Ok(())
    }

    /// Flat text form; parses back through [`RunConfig::apply_text`].
    pub fn manifest_text(&self) -> String {
        let fmt = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        format!(
            "manifest_version = 1\nsubcommand = {}\nn_primes = {}\nbeta = {:?}\nalpha = {:?}\ngrid_size = {}\nlevel = {}\nr_list = {}\nq_list = {}\nn_samples = {}\nseed = {}\nformat = {}\n",
            self.subcommand.name(),
            self.n_primes,
            self.beta,
            self.alpha,
            self.grid_size,
            self.level,
            fmt_list(&self.r_list),
            fmt_list(&self.q_list),
            self.n_samples,
            self.seed,
            fmt
        )
    }

    pub fn manifest_hash(&self) -> String {
        let d = Sha256::digest(self.manifest_text().as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Rows of named numeric columns, written as CSV or JSON.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// f64 as JSON; NaN and infinities become null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Output sink for one run: every file carries the manifest hash.
pub struct Output {
    pub dir: PathBuf,
    pub hash: String,
    pub format: Format,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let out = Output { dir: dir.to_path_buf(), hash: cfg.manifest_hash(), format: cfg.format, written: Vec::new() };
        std::fs::write(dir.join("manifest.txt"), cfg.manifest_text())?;
        Ok(out)
    }

    pub fn table(&mut self, stem: &str, t: &Table) -> Result<()> {
        match self.format {
            Format::Csv => {
                let path = self.dir.join(format!("{stem}.csv"));
                let mut buf = format!("# manifest_sha256={}\n", self.hash).into_bytes();
                {
                    let mut w = csv::Writer::from_writer(&mut buf);
                    w.write_record(&t.columns).map_err(csv_err)?;
                    for r in &t.rows {
                        w.write_record(r.iter().map(cell)).map_err(csv_err)?;
                    }
                    w.flush()?;
                }
                std::fs::write(&path, buf)?;
                self.written.push(path);
            }
            Format::Json => {
                let records: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| Value::Object(t.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                self.json(stem, json!({ "records": records }))?;
            }
        }
        Ok(())
    }

    /// Writes `{stem}.json` with the manifest hash added at top level.
    pub fn json(&mut self, stem: &str, mut v: Value) -> Result<()> {
        if let Value::Object(m) = &mut v {
            m.insert("manifest_sha256".into(), Value::String(self.hash.clone()));
        }
        let path = self.dir.join(format!("{stem}.json"));
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        std::fs::write(&path, s)?;
        self.written.push(path);
        Ok(())
    }

    pub fn text(&mut self, stem: &str, lines: &[String]) -> Result<()> {
        let path = self.dir.join(format!("{stem}.txt"));
        let mut s = format!("# manifest_sha256={}\n", self.hash);
        for l in lines {
            s.push_str(l);
            s.push('\n');
        }
        std::fs::write(&path, s)?;
        self.written.push(path);
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("ZETA_CHAOS_CACHE").map(PathBuf::from)
}

fn table_for(n: usize) -> Result<PrimeTable> {
    load_or_build(n.max(1), cache_dir().as_deref())
}

/// N / 100, N / 10, N, keeping values >= 10.
fn n_ladder(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [n / 100, n / 10, n].into_iter().filter(|&k| k >= 10).collect();
    v.dedup();
    v
}

pub fn cmd_field(cfg: &RunConfig, _workers: usize, out: &mut Output) -> Result<()> {
    let table = table_for(cfg.n_primes)?;
    let n = cfg.n_primes;
    let ph = sample_phases_n(n, cfg.seed, stream_id(StreamKind::Phases, 0));
    let gd = sample_gaussians_n(n, cfg.seed, stream_id(StreamKind::Gaussians, 0));
    let x = eval_field(&table, &ph, n, cfg.grid_size)?;
    let g = eval_gaussian_field(&table, &gd, n, cfg.grid_size)?;
    let mut t = Table::new(&["x", "X", "G"]);
    for k in 0..cfg.grid_size {
        t.push(vec![num(x.x(k)), num(x.values[k]), num(g.values[k])]);
    }
    out.table("field", &t)?;
    out.text(
        "field_summary",
        &[format!("n_primes = {n}"), format!("sup_X = {:?}", x.sup_norm()), format!("sup_G = {:?}", g.sup_norm())],
    )
}

pub fn cmd_kernel(cfg: &RunConfig, _workers: usize, out: &mut Output) -> Result<()> {
    let big = table_for(PRIME_ROUTE_N)?;
    let n = cfg.n_primes.clamp(2, PRIME_ROUTE_N);
    let mut t = Table::new(&["u", "psi_prime", "psi_zeta", "diff"]);
    for k in 1..=40 {
        let u = 0.05 * k as f64;
        let a = psi_limit(u, KernelRoute::PrimeSum, &big)?;
        let b = psi_limit(u, KernelRoute::Zeta, &big)?;
        t.push(vec![num(u), num(a), num(b), num(a - b)]);
    }
    out.table("kernel_limit", &t)?;

    let count = 1000;
    let du = 1.0 / count as f64;
    let psi = psi_n_grid(&big, n, du, du, count)?;
    let lpn = big.log_p()[n - 1];
    let mut t = Table::new(&["u", "psi_n", "half_log_min"]);
    for (k, p) in psi.iter().enumerate() {
        let u = du * (k + 1) as f64;
        t.push(vec![num(u), num(*p), num(0.5 * (1.0 / u).min(lpn).ln())]);
    }
    out.table("kernel_psi", &t)?;

    let mut t = Table::new(&["n_primes", "c_log_pn", "c_log_n"]);
    for m in n_ladder(n) {
        let b = kernel_bound_check(&big, m, count)?;
        t.push(vec![json!(m), num(b.c_log_pn), num(b.c_log_n)]);
    }
    out.table("kernel_bound", &t)?;
    out.text("kernel_summary", &["u = 0 omitted: psi has a pole there".to_string()])
}

pub fn cmd_chaos(cfg: &RunConfig, workers: usize, out: &mut Output) -> Result<()> {
    let n = cfg.n_primes.max(10);
    let table = table_for(n)?;
    let mut notes = Vec::new();
    let ms = MassStudyConfig {
        betas: vec![cfg.beta],
        n_list: vec![n],
        level: cfg.level,
        normalization: Normalization::ExactBessel,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        workers,
    };
    let samples = sample_box_masses(&table, &ms)?;
    let r_max = cfg.r_list.iter().cloned().fold(0.0, f64::max);
    let subcritical_pair = cfg.beta * cfg.beta < 2.0;
    let rho = if subcritical_pair { Some(TwoPointDensity::new(&table, n, cfg.beta, 2.0 * r_max.min(0.25))?) } else { None };
    let mut t = Table::new(&["beta", "n_primes", "q", "r", "moment", "se", "oracle"]);
    let mut fits = Table::new(&["q", "slope", "slope_se", "full_kernel_formula", "half_kernel_formula"]);
    for &q in &cfg.q_list {
        if q == 2.0 && !subcritical_pair {
            notes.push(format!("warning: beta = {} >= sqrt(2), the second moment does not exist", cfg.beta));
        }
        if q * cfg.beta * cfg.beta / 4.0 >= 1.0 {
            notes.push(format!("warning: q beta^2 / 4 = {:.3} >= 1 for q = {q}, SE unreliable", q * cfg.beta * cfg.beta / 4.0));
        }
        let est = moments_from_samples(&samples, 0, 0, q, &cfg.r_list)?;
        for e in &est {
            let oracle = match (&rho, q == 2.0) {
                // the exact box oracle covers r <= 1/4 only
                (Some(rho), true) if e.r <= 0.25 => num(second_moment_box_exact(e.r, rho)?),
                _ => Value::Null,
            };
            t.push(vec![num(cfg.beta), json!(n), num(q), num(e.r), num(e.moment), num(e.se), oracle]);
        }
        if est.len() >= 4 {
            let f = scaling_exponent_fit(&est, cfg.beta)?;
            fits.push(vec![num(q), num(f.slope), num(f.slope_se), num(f.full_kernel_formula), num(f.half_kernel_formula)]);
        }
    }
    out.table("chaos_moments", &t)?;
    out.table("chaos_scaling", &fits)?;

    let mc = MartingaleConfig {
        beta: cfg.beta,
        n_base: (n / 10).max(1),
        n_extended: n,
        interval: (0.0, 1.0),
        level: cfg.level,
        n_outer: 10,
        n_inner: (cfg.n_samples / 10).max(10),
        seed: cfg.seed,
        workers,
    };
    let rep = martingale_check(&table, &mc)?;
    let mut t = Table::new(&["base_mass", "inner_mean", "inner_se", "ratio_minus_one", "z"]);
    for d in &rep.draws {
        t.push(vec![num(d.base_mass), num(d.inner_mean), num(d.inner_se), num(d.ratio_minus_one), num(d.z)]);
    }
    out.table("chaos_martingale", &t)?;
    notes.push(format!("martingale aggregate z = {:?}", rep.aggregate_z));

    let cs = MassStudyConfig {
        betas: vec![crate::chaos_measure::BETA_CRITICAL],
        n_list: n_ladder(n),
        level: cfg.level,
        normalization: Normalization::ExactBessel,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        workers,
    };
    let crit = critical_summaries(&sample_box_masses(&table, &cs)?, 0)?;
    let mut t = Table::new(&["n_primes", "median", "lower_quartile", "upper_quartile", "mean", "half_moment", "half_moment_se"]);
    for c in &crit {
        t.push(vec![
            json!(c.n_primes),
            num(c.median),
            num(c.lower_quartile),
            num(c.upper_quartile),
            num(c.mean),
            num(c.half_moment.mean),
            num(c.half_moment.se),
        ]);
    }
    out.table("chaos_critical", &t)?;
    notes.push(format!("grid points per realization = {}", grid_for_level(cfg.level)));
    out.text("chaos_summary", &notes)
}

pub const AUDIT_SIZES: [usize; 5] = [2, 16, 64, 256, 1024];

pub fn cmd_coupling(cfg: &RunConfig, workers: usize, out: &mut Output) -> Result<()> {
    let ac = AuditConfig {
        grid: PlanarGrid::default(),
        n_samples: cfg.n_samples.max(2),
        n_pairs: cfg.n_samples.clamp(2, 512),
        seed: cfg.seed,
        workers,
        ..AuditConfig::default()
    };
    let table = table_for(ac.start + AUDIT_SIZES[AUDIT_SIZES.len() - 1])?;
    let rows: Vec<_> = AUDIT_SIZES.iter().map(|&n| audit_block(&table, n, &ac)).collect::<Result<_>>()?;
    let records: Vec<Value> = rows
        .iter()
        .map(|a| {
            json!({
                "n": a.n,
                "coupled": a.coupled,
                "mean_abs_V": num(a.mean_abs_v),
                "se": num(a.se),
                "coupling_cost": num(a.coupling_cost),
                "w1_bound": num(a.w1_bound),
                "w1_bound_r": num(a.w1_bound_r),
                "grid_allowance": num(a.grid_allowance),
                "empirical_w1": num(a.empirical_w1),
                "empirical_se": num(a.empirical_se),
                "fourier_l1": num(a.fourier_l1),
                "ks_v1": num(a.ks_v1),
                "ks_v2": num(a.ks_v2),
                "ks_critical": num(a.ks_critical),
                "tv": num(a.tv),
                "grid_resolution": a.grid_resolution,
                "ordering_chain": if a.coupled { json!(a.ordering_chain) } else { Value::Null },
            })
        })
        .collect();
    out.json("coupling_audit", json!({ "records": records }))
}

pub fn cmd_critical(cfg: &RunConfig, _workers: usize, out: &mut Output) -> Result<()> {
    let ladder = n_ladder(cfg.n_primes.max(10));
    let reports = js1_conditions(&ladder, 200.max(cfg.grid_size.min(1000)))?;
    let mut t = Table::new(&["N", "t", "sup_diff", "offdiag_005", "offdiag_01", "offdiag_02"]);
    for r in &reports {
        t.push(vec![json!(r.n), num(r.t), num(r.sup_diff), num(r.offdiag[0]), num(r.offdiag[1]), num(r.offdiag[2])]);
    }
    out.table("critical_js1", &t)?;

    let mut t = Table::new(&["N", "gn1_gn2", "gn2_gn3", "gn3_gn4"]);
    for &n in &ladder {
        let g = stage_gaps(n, 100)?;
        t.push(vec![json!(n), num(g.gn1_gn2), num(g.gn2_gn3), num(g.gn3_gn4)]);
    }
    out.table("critical_stage_gaps", &t)?;

    let tt = matching_t(cfg.n_primes.max(10))?;
    let sampler = ReferenceSampler::new(tt, cfg.grid_size.min(MAX_REFERENCE_GRID).min(1025))?;
    let f = sampler.sample(cfg.seed, 0);
    let mut t = Table::new(&["x", "value"]);
    for (k, v) in f.values.iter().enumerate() {
        t.push(vec![num(f.x(k)), num(*v)]);
    }
    out.table("critical_reference", &t)?;
    let decreasing = reports.windows(2).all(|w| w[1].offdiag[1] < w[0].offdiag[1]);
    out.text(
        "critical_summary",
        &[
            format!("t = {tt:?}"),
            format!("reference clipped mass = {:?} (trace {:?})", sampler.clipped_mass, sampler.trace),
            format!("offdiag_01 decreasing in N = {decreasing}"),
        ],
    )
}

/// Run a validated configuration, writing into `dir`.
pub fn run(cfg: &RunConfig, workers: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Output::new(dir, cfg)?;
    let all = cfg.subcommand == Subcommand::All;
    if all || cfg.subcommand == Subcommand::Field {
        cmd_field(cfg, workers, &mut out)?;
    }
    if all || cfg.subcommand == Subcommand::Kernel {
        cmd_kernel(cfg, workers, &mut out)?;
    }
    if all || cfg.subcommand == Subcommand::Chaos {
        cmd_chaos(cfg, workers, &mut out)?;
    }
    if all || cfg.subcommand == Subcommand::Coupling {
        cmd_coupling(cfg, workers, &mut out)?;
    }
    if all || cfg.subcommand == Subcommand::Critical {
        cmd_critical(cfg, workers, &mut out)?;
    }
    Ok(out.written)
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args(args: Args) -> i32 {
    let res = RunConfig::from_args(&args).and_then(|cfg| run(&cfg, args.workers, &args.out));
    match res {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
