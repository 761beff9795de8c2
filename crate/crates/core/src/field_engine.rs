//! Sampling and grid evaluation of the prime field X_N, its Gaussian
//! counterpart G_N, the block fields and the coupling error fields.
//!
//! X_N(x) = sum_j p_j^{-1/2} cos(x log p_j - theta_j)
//! G_N(x) = sum_j (2 p_j)^{-1/2} (W1_j cos(x log p_j) + W2_j sin(x log p_j))
//!
//! Both are written as Re sum_j z_j e^{i x log p_j}. The grid route uses the
//! rotation recurrence of [`crate::trig_sum::rotation_sum`]; the Monte Carlo
//! route uses the Chebyshev expansion of [`FieldSampler`].

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::rng::{StreamKind, StreamRng};
use crate::trig_sum::{rotation_sum, ChebSeries, SpectralBasis};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

/// One draw of the uniform phases theta_j.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub seed: u64,
    pub stream_id: u64,
    pub theta: Vec<f64>,
}

/// One draw of the Gaussian coefficients W1_j, W2_j.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDraws {
    pub seed: u64,
    pub stream_id: u64,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

/// `theta_j = 2 pi U_j`, with U_j read from word j of the keyed stream.
pub fn sample_phases(table: &PrimeTable, seed: u64, stream_id: u64) -> PhaseVector {
    sample_phases_n(table.count(), seed, stream_id)
}

pub fn sample_phases_n(n: usize, seed: u64, stream_id: u64) -> PhaseVector {
    let mut rng = StreamRng::new(seed, stream_id);
    let theta = (0..n).map(|_| 2.0 * PI * rng.uniform()).collect();
    PhaseVector { seed, stream_id, theta }
}

/// Pair j of Gaussians uses words 2j and 2j+1 (Box-Muller).
pub fn sample_gaussians(table: &PrimeTable, seed: u64, stream_id: u64) -> GaussianDraws {
    sample_gaussians_n(table.count(), seed, stream_id)
}

pub fn sample_gaussians_n(n: usize, seed: u64, stream_id: u64) -> GaussianDraws {
    let mut rng = StreamRng::new(seed, stream_id);
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = rng.normal_pair();
        w1.push(a);
        w2.push(b);
    }
    GaussianDraws { seed, stream_id, w1, w2 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldLabel {
    X,
    G,
    Y(usize),
    Z(usize),
    Ytilde(usize),
    Ztilde(usize),
    E1,
    E2,
    ETotal,
    /// White-noise reference field at scale t.
    Reference,
}

impl std::fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldLabel::X => write!(f, "X"),
            FieldLabel::G => write!(f, "G"),
            FieldLabel::Y(m) => write!(f, "Y_{m}"),
            FieldLabel::Z(m) => write!(f, "Z_{m}"),
            FieldLabel::Ytilde(m) => write!(f, "Ytilde_{m}"),
            FieldLabel::Ztilde(m) => write!(f, "Ztilde_{m}"),
            FieldLabel::E1 => write!(f, "E1"),
            FieldLabel::E2 => write!(f, "E2"),
            FieldLabel::ETotal => write!(f, "E_total"),
            FieldLabel::Reference => write!(f, "Gtilde"),
        }
    }
}

/// Field values on the uniform grid x_k = k/(M-1), k = 0..M.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub label: FieldLabel,
    /// Number of primes used (for block labels: primes up to the block end).
    pub n_primes: usize,
    pub values: Vec<f64>,
}

impl FieldGrid {
    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 / (self.values.len() - 1) as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// CSV with header `x,value`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.17e},{:.17e}", self.x(k), v)?;
        }
        Ok(())
    }
}

fn check_grid(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("grid_size must be at least 2, got {m}")));
    }
    Ok(())
}

/// Amplitudes z_j = p_j^{-1/2} e^{-i theta_j} of X on the prime index range.
pub fn x_amplitudes(table: &PrimeTable, theta: &[f64], range: std::ops::Range<usize>) -> Vec<Complex64> {
    let isp = table.inv_sqrt_p();
    range.map(|j| Complex64::from_polar(isp[j], -theta[j])).collect()
}

/// Amplitudes z_j = (2 p_j)^{-1/2} (W1_j - i W2_j) of G on the prime index range.
pub fn g_amplitudes(table: &PrimeTable, w1: &[f64], w2: &[f64], range: std::ops::Range<usize>) -> Vec<Complex64> {
    let isp = table.inv_sqrt_p();
    range
        .map(|j| Complex64::new(w1[j], -w2[j]) * (isp[j] * std::f64::consts::FRAC_1_SQRT_2))
        .collect()
}

fn grid_sum(table: &PrimeTable, amps: &[Complex64], start: usize, m: usize) -> Vec<f64> {
    let freqs = &table.log_p()[start..start + amps.len()];
    rotation_sum(freqs, amps, 0.0, 1.0 / (m - 1) as f64, m)
}

/// X_{n_use} on an M-point grid of [0, 1].
pub fn eval_field(table: &PrimeTable, phases: &PhaseVector, n_use: usize, m: usize) -> Result<FieldGrid> {
    check_grid(m)?;
    table.check_n(n_use)?;
    if n_use > phases.theta.len() {
        return Err(Error::Index(format!("{n_use} primes requested, {} phases drawn", phases.theta.len())));
    }
    let amps = x_amplitudes(table, &phases.theta, 0..n_use);
    Ok(FieldGrid { label: FieldLabel::X, n_primes: n_use, values: grid_sum(table, &amps, 0, m) })
}

/// G_{n_use} on an M-point grid of [0, 1].
pub fn eval_gaussian_field(table: &PrimeTable, draws: &GaussianDraws, n_use: usize, m: usize) -> Result<FieldGrid> {
    check_grid(m)?;
    table.check_n(n_use)?;
    if n_use > draws.w1.len() {
        return Err(Error::Index(format!("{n_use} primes requested, {} draws", draws.w1.len())));
    }
    let amps = g_amplitudes(table, &draws.w1, &draws.w2, 0..n_use);
    Ok(FieldGrid { label: FieldLabel::G, n_primes: n_use, values: grid_sum(table, &amps, 0, m) })
}

/// X_{n_use}(x) at arbitrary points, by direct summation.
pub fn eval_field_at(table: &PrimeTable, theta: &[f64], n_use: usize, xs: &[f64]) -> Vec<f64> {
    let amps = x_amplitudes(table, theta, 0..n_use);
    let freqs = &table.log_p()[..n_use];
    xs.iter().map(|&x| crate::trig_sum::direct_sum(freqs, &amps, x)).collect()
}

/// G_{n_use}(x) at arbitrary points, by direct summation.
pub fn eval_gaussian_field_at(table: &PrimeTable, w1: &[f64], w2: &[f64], n_use: usize, xs: &[f64]) -> Vec<f64> {
    let amps = g_amplitudes(table, w1, w2, 0..n_use);
    let freqs = &table.log_p()[..n_use];
    xs.iter().map(|&x| crate::trig_sum::direct_sum(freqs, &amps, x)).collect()
}

/// Fast Monte Carlo evaluation of X_n on an interval, for several nested n.
///
/// Each realization costs O(n K) where K is the Chebyshev degree, and the
/// expansions for all checkpoints come out of one pass, so nested n share
/// their random phases.
pub struct FieldSampler<'a> {
    table: &'a PrimeTable,
    basis: SpectralBasis,
}

impl<'a> FieldSampler<'a> {
    /// Sampler over the first `n_max` primes on [x0, x1].
    pub fn new(table: &'a PrimeTable, n_max: usize, x0: f64, x1: f64) -> Result<Self> {
        table.check_n(n_max)?;
        let basis = SpectralBasis::new(&table.log_p()[..n_max], x0, x1);
        Ok(FieldSampler { table, basis })
    }

    pub fn n_max(&self) -> usize {
        self.basis.len()
    }

    /// Expansions of X_n for each n in `checkpoints` (non-decreasing, each <= n_max).
    pub fn x_series(&self, theta: &[f64], checkpoints: &[usize]) -> Vec<ChebSeries> {
        let top = checkpoints.iter().copied().max().unwrap_or(0);
        let isp = self.table.inv_sqrt_p();
        let mut re = Vec::with_capacity(top);
        let mut im = Vec::with_capacity(top);
        for j in 0..top {
            let (s, c) = theta[j].sin_cos();
            re.push(isp[j] * c);
            im.push(-isp[j] * s);
        }
        self.basis.expand(&re, &im, checkpoints)
    }

    /// Expansions of G_n for each n in `checkpoints`.
    pub fn g_series(&self, w1: &[f64], w2: &[f64], checkpoints: &[usize]) -> Vec<ChebSeries> {
        let top = checkpoints.iter().copied().max().unwrap_or(0);
        let isp = self.table.inv_sqrt_p();
        let re: Vec<f64> = (0..top).map(|j| isp[j] * std::f64::consts::FRAC_1_SQRT_2 * w1[j]).collect();
        let im: Vec<f64> = (0..top).map(|j| -isp[j] * std::f64::consts::FRAC_1_SQRT_2 * w2[j]).collect();
        self.basis.expand(&re, &im, checkpoints)
    }
}

/// Raw schedule value floor(exp(m^alpha)), m >= 1.
pub fn raw_cut(m: usize, alpha: f64) -> usize {
    (m as f64).powf(alpha).exp().floor() as usize
}

/// Block cut points r_1 < r_2 < ... (1-based prime indices); block m covers
/// primes r_m ..= r_{m+1} - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSchedule {
    pub alpha: f64,
    pub cuts: Vec<usize>,
    /// Per block: gap >= 2 and p_{r_{m+1}-1} / p_{r_m} <= 2.
    pub valid: Vec<bool>,
}

impl BlockSchedule {
    pub fn n_blocks(&self) -> usize {
        self.cuts.len().saturating_sub(1)
    }

    /// 0-based prime index range of block m (1-based).
    pub fn block_range(&self, m: usize) -> Result<std::ops::Range<usize>> {
        if m == 0 || m > self.n_blocks() {
            return Err(Error::Index(format!("block {m} outside 1..={}", self.n_blocks())));
        }
        Ok(self.cuts[m - 1] - 1..self.cuts[m] - 1)
    }

    /// Number of primes covered by blocks 1..=n.
    pub fn primes_through(&self, n: usize) -> Result<usize> {
        Ok(self.block_range(n)?.end)
    }
}

/// Cut points from floor(exp(m^alpha)), with r_1 = 1 and adjacent blocks
/// merged until every block holds at least two primes. Only blocks that end
/// inside the table are kept.
pub fn build_block_schedule(alpha: f64, table: &PrimeTable) -> Result<BlockSchedule> {
    if !(alpha > 0.0 && alpha < 0.4) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 2/5), got {alpha}")));
    }
    let n = table.count();
    let p = table.primes();
    let mut cuts = vec![1usize];
    let mut m = 1usize;
    loop {
        let r = raw_cut(m, alpha);
        m += 1;
        if r > n + 1 {
            break;
        }
        let last = *cuts.last().expect("non-empty");
        if r >= last + 2 {
            cuts.push(r);
        } else {
            // skip the m whose cut would be rejected; for small alpha there are astronomically many
            let jump = ((last + 2) as f64).ln().powf(1.0 / alpha).floor();
            if jump >= 1e15 {
                break;
            }
            m = m.max((jump as usize).saturating_sub(1));
        }
    }
    let valid = cuts
        .windows(2)
        .map(|w| w[1] - w[0] >= 2 && p[w[1] - 2] as f64 / p[w[0] - 1] as f64 <= 2.0)
        .collect();
    Ok(BlockSchedule { alpha, cuts, valid })
}

/// Aggregates of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSample {
    pub m: usize,
    /// C = sum p^{-1/2} cos theta, or sum (2p)^{-1/2} W1 for a Gaussian source.
    pub c: f64,
    /// S = sum p^{-1/2} sin theta, or sum (2p)^{-1/2} W2 for a Gaussian source.
    pub s: f64,
    /// b^2 = (1/2) sum 1/p over the block.
    pub b: f64,
    /// Coupled standard Gaussian pair, if one has been attached.
    pub v: Option<(f64, f64)>,
    pub coupled: bool,
}

/// What a block field is built from.
#[derive(Debug, Clone, Copy)]
pub enum BlockSource<'a> {
    Phases(&'a PhaseVector),
    Gaussians(&'a GaussianDraws),
}

/// Block field Y_m / Z_m, or its frozen version, plus the block aggregates.
///
/// Frozen fields are cos(x log p_{r_m}) C + sin(x log p_{r_m}) S; for a Gaussian
/// source C, S equal b (v1, v2).
pub fn eval_block(
    table: &PrimeTable,
    source: BlockSource<'_>,
    schedule: &BlockSchedule,
    m: usize,
    grid_size: usize,
    frozen: bool,
) -> Result<(FieldGrid, BlockSample)> {
    check_grid(grid_size)?;
    let range = schedule.block_range(m)?;
    table.check_n(range.end)?;
    let b = (0.5 * table.sum_inv_p_range(range.start, range.end)).sqrt();
    let (amps, label) = match source {
        BlockSource::Phases(ph) => {
            if ph.theta.len() < range.end {
                return Err(Error::Index(format!("block {m} needs {} phases", range.end)));
            }
            (x_amplitudes(table, &ph.theta, range.clone()), if frozen { FieldLabel::Ytilde(m) } else { FieldLabel::Y(m) })
        }
        BlockSource::Gaussians(g) => {
            if g.w1.len() < range.end {
                return Err(Error::Index(format!("block {m} needs {} draws", range.end)));
            }
            (g_amplitudes(table, &g.w1, &g.w2, range.clone()), if frozen { FieldLabel::Ztilde(m) } else { FieldLabel::Z(m) })
        }
    };
    // Re(z) = C-part, -Im(z) = S-part
    let c = crate::numeric::pairwise_sum_by(amps.len(), &|j| amps[j].re);
    let s = crate::numeric::pairwise_sum_by(amps.len(), &|j| -amps[j].im);
    let v = match source {
        BlockSource::Gaussians(_) => Some((c / b, s / b)),
        BlockSource::Phases(_) => None,
    };
    let sample = BlockSample { m, c, s, b, v, coupled: false };
    let values = if frozen {
        let w = table.log_p()[range.start];
        let dx = 1.0 / (grid_size - 1) as f64;
        (0..grid_size)
            .map(|k| {
                let (sn, cs) = (w * k as f64 * dx).sin_cos();
                cs * c + sn * s
            })
            .collect()
    } else {
        grid_sum(table, &amps, range.start, grid_size)
    };
    Ok((FieldGrid { label, n_primes: range.end, values }, sample))
}

/// Per-prime Gaussians on a block conditioned on the weighted sums
/// sum_j (2 p_j)^{-1/2} W^{(i)}_j = s_i.
///
/// W = Z + a (s - a.Z) / |a|^2 with Z standard normal: exact Gaussian
/// conditioning, so the constraint holds to rounding.
pub fn gaussian_conditional_fill(
    table: &PrimeTable,
    range: std::ops::Range<usize>,
    target: (f64, f64),
    seed: u64,
    stream_id: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    table.check_n(range.end)?;
    if range.is_empty() {
        return Err(Error::InvalidParameter("empty block".into()));
    }
    let isp = table.inv_sqrt_p();
    let a: Vec<f64> = range.clone().map(|j| isp[j] * std::f64::consts::FRAC_1_SQRT_2).collect();
    if a.len() == 1 {
        return Ok((vec![target.0 / a[0]], vec![target.1 / a[0]]));
    }
    let draws = sample_gaussians_n(a.len(), seed, stream_id);
    let a2 = crate::numeric::pairwise_sum_by(a.len(), &|j| a[j] * a[j]);
    let fill = |z: &[f64], s: f64| -> Vec<f64> {
        let az = crate::numeric::pairwise_sum_by(a.len(), &|j| a[j] * z[j]);
        let k = (s - az) / a2;
        z.iter().zip(&a).map(|(z, a)| z + a * k).collect()
    };
    Ok((fill(&draws.w1, target.0), fill(&draws.w2, target.1)))
}

/// A block whose Gaussian pair has been coupled to its phases, with the
/// per-prime Gaussians filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledBlock {
    pub sample: BlockSample,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorFields {
    pub e1: FieldGrid,
    pub e2: FieldGrid,
    pub total: FieldGrid,
    pub sup_e1: f64,
    pub sup_e2: f64,
    pub sup_total: f64,
}

/// E1 = sum_{m<=n} (Ytilde_m - Ztilde_m), E2 = sum_{m<=n} (Y_m - Ytilde_m + Ztilde_m - Z_m).
pub fn error_fields(
    table: &PrimeTable,
    phases: &PhaseVector,
    blocks: &[CoupledBlock],
    schedule: &BlockSchedule,
    n: usize,
    grid_size: usize,
) -> Result<ErrorFields> {
    check_grid(grid_size)?;
    let end = schedule.primes_through(n)?;
    table.check_n(end)?;
    if phases.theta.len() < end {
        return Err(Error::Index(format!("error fields need {end} phases")));
    }
    let mut freqs = Vec::with_capacity(n);
    let mut e1_amps = Vec::with_capacity(n);
    let mut total_amps = Vec::with_capacity(end);
    for m in 1..=n {
        let blk = blocks.get(m - 1).ok_or(Error::MissingCoupling(m))?;
        let (v1, v2) = blk.sample.v.ok_or(Error::MissingCoupling(m))?;
        let range = schedule.block_range(m)?;
        if blk.w1.len() != range.len() || blk.w2.len() != range.len() {
            return Err(Error::MissingCoupling(m));
        }
        let b = blk.sample.b;
        freqs.push(table.log_p()[range.start]);
        e1_amps.push(Complex64::new(blk.sample.c - b * v1, -(blk.sample.s - b * v2)));
        let isp = table.inv_sqrt_p();
        for (i, j) in range.enumerate() {
            let x = Complex64::from_polar(isp[j], -phases.theta[j]);
            let g = Complex64::new(blk.w1[i], -blk.w2[i]) * (isp[j] * std::f64::consts::FRAC_1_SQRT_2);
            total_amps.push(x - g);
        }
    }
    let dx = 1.0 / (grid_size - 1) as f64;
    let e1 = rotation_sum(&freqs, &e1_amps, 0.0, dx, grid_size);
    let total = rotation_sum(&table.log_p()[..end], &total_amps, 0.0, dx, grid_size);
    let e2: Vec<f64> = total.iter().zip(&e1).map(|(t, a)| t - a).collect();
    let mk = |label, values| FieldGrid { label, n_primes: end, values };
    let (e1, e2, total) = (mk(FieldLabel::E1, e1), mk(FieldLabel::E2, e2), mk(FieldLabel::ETotal, total));
    Ok(ErrorFields {
        sup_e1: e1.sup_norm(),
        sup_e2: e2.sup_norm(),
        sup_total: total.sup_norm(),
        e1,
        e2,
        total,
    })
}

/// Stream id used for the conditional fill of block m in realization `index`.
pub fn fill_stream(index: u64, m: usize) -> u64 {
    crate::rng::stream_id(StreamKind::BlockFill, (index << 20) | m as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::build_prime_table;
    use crate::rng::stream_id;

    fn table() -> PrimeTable {
        build_prime_table(2000).unwrap()
    }

    #[test]
    fn single_term_values() {
        let t = table();
        let ph = PhaseVector { seed: 0, stream_id: 0, theta: vec![0.0; 5] };
        let f = eval_field(&t, &ph, 1, 5).unwrap();
        assert!((f.values[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let z = eval_field(&t, &ph, 0, 5).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let g = GaussianDraws { seed: 0, stream_id: 0, w1: vec![1.0; 3], w2: vec![0.0; 3] };
        let gf = eval_gaussian_field(&t, &g, 1, 3).unwrap();
        assert!((gf.values[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_route_matches_direct_evaluation() {
        let t = table();
        let ph = sample_phases(&t, 3, stream_id(StreamKind::Phases, 0));
        let f = eval_field(&t, &ph, 2000, 2049).unwrap();
        let xs: Vec<f64> = [0, 1, 1024, 1025, 2048].iter().map(|&k| f.x(k)).collect();
        let d = eval_field_at(&t, &ph.theta, 2000, &xs);
        for (i, &k) in [0usize, 1, 1024, 1025, 2048].iter().enumerate() {
            assert!((f.values[k] - d[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn sampler_matches_grid_route() {
        let t = table();
        let ph = sample_phases(&t, 9, stream_id(StreamKind::Phases, 4));
        let s = FieldSampler::new(&t, 2000, 0.0, 1.0).unwrap();
        let series = s.x_series(&ph.theta, &[500, 2000]);
        let f = eval_field(&t, &ph, 500, 33).unwrap();
        for k in 0..33 {
            assert!((series[0].eval(f.x(k)) - f.values[k]).abs() < 1e-11);
        }
        let g = sample_gaussians(&t, 9, 1);
        let gs = s.g_series(&g.w1, &g.w2, &[2000]);
        let gf = eval_gaussian_field(&t, &g, 2000, 17).unwrap();
        for k in 0..17 {
            assert!((gs[0].eval(gf.x(k)) - gf.values[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn phases_are_reproducible_and_in_range() {
        let t = table();
        let a = sample_phases(&t, 1, 2);
        let b = sample_phases(&t, 1, 2);
        assert_eq!(a, b);
        assert!(a.theta.iter().all(|&x| (0.0..2.0 * PI).contains(&x)));
    }

    #[test]
    fn schedule_properties() {
        assert_eq!(raw_cut(8, 1.0 / 3.0), 7);
        assert_eq!(raw_cut(27, 1.0 / 3.0), 20);
        assert_eq!(raw_cut(3, 1.0 / 3.0), 4);
        assert_eq!(raw_cut(4, 1.0 / 3.0), 4);
        let t = table();
        let s = build_block_schedule(1.0 / 3.0, &t).unwrap();
        assert_eq!(s.cuts[0], 1);
        assert!(s.cuts.windows(2).all(|w| w[1] >= w[0] + 2));
        assert!(s.valid.iter().all(|&v| v));
        assert!(*s.cuts.last().unwrap() <= t.count() + 1);
        assert!(build_block_schedule(0.4, &t).is_err());
        assert!(build_block_schedule(0.0, &t).is_err());
    }

    #[test]
    fn block_regrouping_reproduces_field() {
        let t = table();
        let s = build_block_schedule(1.0 / 3.0, &t).unwrap();
        let ph = sample_phases(&t, 5, 5);
        let n = 10;
        let end = s.primes_through(n).unwrap();
        let full = eval_field(&t, &ph, end, 65).unwrap();
        let mut acc = vec![0.0; 65];
        for m in 1..=n {
            let (g, smp) = eval_block(&t, BlockSource::Phases(&ph), &s, m, 65, false).unwrap();
            let (gt, _) = eval_block(&t, BlockSource::Phases(&ph), &s, m, 65, true).unwrap();
            assert!((gt.values[0] - smp.c).abs() < 1e-15);
            for k in 0..65 {
                acc[k] += g.values[k];
            }
        }
        for k in 0..65 {
            assert!((acc[k] - full.values[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn block_b_for_5_7_11() {
        let t = table();
        let s = BlockSchedule { alpha: 0.3, cuts: vec![1, 3, 6], valid: vec![true, true] };
        let ph = sample_phases(&t, 1, 1);
        let (_, smp) = eval_block(&t, BlockSource::Phases(&ph), &s, 2, 3, true).unwrap();
        let expect = (0.5f64 * (1.0 / 5.0 + 1.0 / 7.0 + 1.0 / 11.0)).sqrt();
        assert!((smp.b - expect).abs() < 1e-15);
        assert!((smp.b - 0.465_707).abs() < 1e-6);
    }

    #[test]
    fn conditional_fill_constraints() {
        let t = table();
        let (w1, w2) = gaussian_conditional_fill(&t, 4..5, (0.0, 0.0), 1, 1).unwrap();
        assert_eq!((w1[0], w2[0]), (0.0, 0.0));
        for k in 0..20u64 {
            let r = (10 + k as usize)..(40 + 3 * k as usize);
            let (w1, w2) = gaussian_conditional_fill(&t, r.clone(), (0.3, -1.2), 7, k).unwrap();
            let isp = t.inv_sqrt_p();
            let s1: f64 = r.clone().zip(&w1).map(|(j, w)| isp[j] / 2f64.sqrt() * w).sum();
            let s2: f64 = r.clone().zip(&w2).map(|(j, w)| isp[j] / 2f64.sqrt() * w).sum();
            assert!((s1 - 0.3).abs() < 1e-12 && (s2 + 1.2).abs() < 1e-12);
        }
    }

    #[test]
    fn error_fields_vanish_under_forced_coupling() {
        let t = table();
        let s = build_block_schedule(1.0 / 3.0, &t).unwrap();
        let ph = sample_phases(&t, 2, 2);
        let n = 8;
        let mut blocks = Vec::new();
        for m in 1..=n {
            let (_, mut smp) = eval_block(&t, BlockSource::Phases(&ph), &s, m, 2, true).unwrap();
            smp.v = Some((smp.c / smp.b, smp.s / smp.b));
            smp.coupled = true;
            let (w1, w2) =
                gaussian_conditional_fill(&t, s.block_range(m).unwrap(), (smp.c, smp.s), 2, fill_stream(0, m)).unwrap();
            blocks.push(CoupledBlock { sample: smp, w1, w2 });
        }
        let e = error_fields(&t, &ph, &blocks, &s, n, 129).unwrap();
        assert!(e.sup_e1 < 1e-14);
        assert!(e.e2.values[0].abs() < 1e-12);
        blocks[3].sample.v = None;
        assert!(matches!(error_fields(&t, &ph, &blocks, &s, n, 129), Err(Error::MissingCoupling(4))));
    }
}
