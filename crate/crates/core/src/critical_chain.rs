//! Gaussian approximation chain for the critical field and the white-noise
//! reference field it is compared with.
//!
//! All chain covariances are translation invariant, so they are functions of
//! the lag u = x - y in [-1, 1]. With L_j = Li^{-1}(j) and l_j = log L_j:
//!
//! - GN1: (1/2) sum_{j<=N} cos(u l_j) / L_j
//! - GN2: (1/2) sum_{j<=N} (1/(L_{j+1} - L_j)) int_{L_j}^{L_{j+1}} cos(u log t) dt / t
//! - GN3: (1/2) int_a^b cos(u s) ds / s, a = l_1, b = l_{N+1}
//! - GN4: (1/(2 pi)) int_a^b C^(s) cos(u s) ds, C^(s) = 2 Si(s) / s

use crate::error::{Error, Result};
use crate::field_engine::{FieldGrid, FieldLabel};
use crate::numeric::{integrate, pairwise_sum};
use crate::primes::li_inverse;
use crate::rng::{stream_id, StreamKind, StreamRng};
use crate::special::{c_hat, ci};
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    GN1,
    GN2,
    GN3,
    GN4,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::GN1 => "GN1",
            Stage::GN2 => "GN2",
            Stage::GN3 => "GN3",
            Stage::GN4 => "GN4",
        };
        f.write_str(s)
    }
}

pub const STAGES: [Stage; 4] = [Stage::GN1, Stage::GN2, Stage::GN3, Stage::GN4];

/// Quadrature tolerance of the GN4 integral.
pub const CHAIN_TOL: f64 = 1e-10;

/// Li^{-1}(j) for j = 1..=n.
pub fn li_inverse_nodes(n: usize) -> Result<Vec<f64>> {
    (1..=n).map(|j| li_inverse(j as f64)).collect()
}

/// Covariance of one chain stage at a fixed N.
#[derive(Debug, Clone)]
pub struct ChainCovariance {
    pub stage: Stage,
    pub n: usize,
    /// log Li^{-1}(1) and log Li^{-1}(N+1)
    pub a: f64,
    pub b: f64,
    // L_1..L_{N+1}; only filled for GN1 and GN2
    nodes: Vec<f64>,
}

impl ChainCovariance {
    pub fn new(stage: Stage, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("chain covariance needs N >= 1".into()));
        }
        let nodes = match stage {
            Stage::GN1 | Stage::GN2 => li_inverse_nodes(n + 1)?,
            Stage::GN3 | Stage::GN4 => Vec::new(),
        };
        Self::with_nodes(stage, n, nodes)
    }

    /// Reuse precomputed Li^{-1}(1..=N+1) (longer tables are truncated).
    pub fn with_nodes(stage: Stage, n: usize, mut nodes: Vec<f64>) -> Result<Self> {
        let (a, b) = if nodes.len() > n {
            nodes.truncate(n + 1);
            (nodes[0].ln(), nodes[n].ln())
        } else {
            (li_inverse(1.0)?.ln(), li_inverse(n as f64 + 1.0)?.ln())
        };
        if matches!(stage, Stage::GN1 | Stage::GN2) && nodes.len() != n + 1 {
            return Err(Error::InvalidParameter(format!("{stage} needs Li^-1(1..=N+1)")));
        }
        Ok(ChainCovariance { stage, n, a, b, nodes })
    }

    /// C(x, y) for x, y in [0, 1].
    pub fn cov_xy(&self, x: f64, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain(format!("points must lie in [0, 1], got ({x}, {y})")));
        }
        self.cov(x - y)
    }

    /// Covariance as a function of the lag.
    pub fn cov(&self, u: f64) -> Result<f64> {
        let u = u.abs();
        match self.stage {
            Stage::GN1 => {
                let t: Vec<f64> = self.nodes[..self.n].iter().map(|&l| (u * l.ln()).cos() / l).collect();
                Ok(0.5 * pairwise_sum(&t))
            }
            Stage::GN2 => {
                let t: Vec<f64> = self
                    .nodes
                    .windows(2)
                    .map(|w| {
                        // int_{l_j}^{l_{j+1}} cos(u s) ds = d cos(u mid) sinc(u d / 2)
                        let d = ((w[1] - w[0]) / w[0]).ln_1p();
                        let mid = w[0].ln() + 0.5 * d;
                        (u * mid).cos() * d * sinc(0.5 * u * d) / (w[1] - w[0])
                    })
                    .collect();
                Ok(0.5 * pairwise_sum(&t))
            }
            Stage::GN3 => {
                if u == 0.0 {
                    Ok(0.5 * (self.b / self.a).ln())
                } else if u * self.b < 1e-3 {
                    // Ci(x) - log x is entire; use its series to avoid cancellation
                    let g = |x: f64| -x * x / 4.0 + x.powi(4) / 96.0;
                    Ok(0.5 * ((self.b / self.a).ln() + g(u * self.b) - g(u * self.a)))
                } else {
                    Ok(0.5 * (ci(u * self.b) - ci(u * self.a)))
                }
            }
            Stage::GN4 => {
                let v = integrate(|s| c_hat(s) * (u * s).cos(), self.a, self.b, CHAIN_TOL, 1e-13)?;
                Ok(v / (2.0 * PI))
            }
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// chain_covariance(stage, N, x, y)
pub fn chain_covariance(stage: Stage, n: usize, x: f64, y: f64) -> Result<f64> {
    ChainCovariance::new(stage, n)?.cov_xy(x, y)
}

/// Covariance of the white-noise reference field at scale t.
pub fn reference_covariance(t: f64, x: f64, y: f64) -> Result<f64> {
    reference_covariance_lag(t, x - y)
}

pub fn reference_covariance_lag(t: f64, u: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let d = u.abs();
    if !(d <= 1.0) {
        return Err(Error::Domain(format!("|x - y| must be at most 1, got {d}")));
    }
    if d <= (-t).exp() {
        Ok(0.5 * (1.0 + t - t.exp() * d))
    } else {
        Ok(-0.5 * d.ln())
    }
}

/// Dense sampler of the reference field on x_k = k/(M-1).
#[derive(Debug, Clone)]
pub struct ReferenceSampler {
    pub t: f64,
    pub grid_size: usize,
    /// Sum of |negative eigenvalues| set to zero.
    pub clipped_mass: f64,
    pub trace: f64,
    factor: DMatrix<f64>,
}

pub const MAX_REFERENCE_GRID: usize = 4096;

impl ReferenceSampler {
    pub fn new(t: f64, grid_size: usize) -> Result<Self> {
        if !(2..=MAX_REFERENCE_GRID).contains(&grid_size) {
            return Err(Error::InvalidParameter(format!(
                "grid_size must be in [2, {MAX_REFERENCE_GRID}], got {grid_size}"
            )));
        }
        let m = grid_size;
        let h = 1.0 / (m - 1) as f64;
        let lag: Vec<f64> = (0..m).map(|k| reference_covariance_lag(t, k as f64 * h)).collect::<Result<_>>()?;
        let cov = DMatrix::from_fn(m, m, |i, j| lag[i.abs_diff(j)]);
        let trace = lag[0] * m as f64;
        let eig = SymmetricEigen::new(cov);
        let mut clipped_mass = 0.0;
        let mut roots = eig.eigenvalues.clone();
        for v in roots.iter_mut() {
            if *v < 0.0 {
                clipped_mass += -*v;
                *v = 0.0;
            }
            *v = v.sqrt();
        }
        if clipped_mass > 1e-6 * trace {
            return Err(Error::Factorization(format!(
                "clipped eigenvalue mass {clipped_mass:.3e} exceeds 1e-6 of trace {trace:.3e}"
            )));
        }
        let mut factor = eig.eigenvectors;
        for (j, r) in roots.iter().enumerate() {
            factor.column_mut(j).scale_mut(*r);
        }
        Ok(ReferenceSampler { t, grid_size, clipped_mass, trace, factor })
    }

    /// Draw number `index`; normals come from stream (Reference, index).
    pub fn sample(&self, seed: u64, index: u64) -> FieldGrid {
        let mut rng = StreamRng::new(seed, stream_id(StreamKind::Reference, index));
        let z = nalgebra::DVector::from_fn(self.grid_size, |_, _| rng.normal());
        let v = &self.factor * z;
        FieldGrid { label: FieldLabel::Reference, n_primes: 0, values: v.iter().copied().collect() }
    }
}

/// One reference-field draw on `grid_size` points.
pub fn sample_reference_field(t: f64, grid_size: usize, seed: u64) -> Result<FieldGrid> {
    Ok(ReferenceSampler::new(t, grid_size)?.sample(seed, 0))
}

/// t = log log Li^{-1}(N + 1)
pub fn matching_t(n: usize) -> Result<f64> {
    Ok(li_inverse(n as f64 + 1.0)?.ln().ln())
}

pub const OFFDIAG_DELTAS: [f64; 3] = [0.05, 0.1, 0.2];

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Js1Report {
    pub n: usize,
    pub t: f64,
    /// max over lags of |C_GN4 - C_ref|
    pub sup_diff: f64,
    /// the same, restricted to lags > delta, for each of [`OFFDIAG_DELTAS`]
    pub offdiag: [f64; 3],
    /// C_GN4(0) - t / 2
    pub diag_offset: f64,
}

/// Largest |C_GN4 - C_ref| over lags k / grid with lag > delta; 0 if there are none.
pub fn offdiag_sup(gaps: &[f64], delta: f64) -> f64 {
    let grid = gaps.len() - 1;
    gaps.iter()
        .enumerate()
        .filter(|(k, _)| *k as f64 / grid as f64 > delta)
        .fold(0.0, |m, (_, g)| m.max(*g))
}

/// Covariance comparison of GN4 with the reference field at t = log log Li^{-1}(N+1).
pub fn js1_conditions(n_list: &[usize], grid: usize) -> Result<Vec<Js1Report>> {
    if grid < 200 {
        return Err(Error::InvalidParameter(format!("js1 grid must be at least 200, got {grid}")));
    }
    n_list
        .iter()
        .map(|&n| {
            let t = matching_t(n)?;
            let c4 = ChainCovariance::new(Stage::GN4, n)?;
            let gaps: Vec<f64> = (0..=grid)
                .map(|k| {
                    let u = k as f64 / grid as f64;
                    Ok((c4.cov(u)? - reference_covariance_lag(t, u)?).abs())
                })
                .collect::<Result<_>>()?;
            let sup_diff = gaps.iter().fold(0.0f64, |m, g| m.max(*g));
            let offdiag = OFFDIAG_DELTAS.map(|d| offdiag_sup(&gaps, d));
            Ok(Js1Report { n, t, sup_diff, offdiag, diag_offset: c4.cov(0.0)? - 0.5 * t })
        })
        .collect()
}

pub fn write_js1_csv(reports: &[Js1Report], mut w: impl Write) -> Result<()> {
    writeln!(w, "N,t,sup_diff,offdiag_005,offdiag_01,offdiag_02")?;
    for r in reports {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.n, r.t, r.sup_diff, r.offdiag[0], r.offdiag[1], r.offdiag[2]
        )?;
    }
    Ok(())
}

/// Sup-norm gaps between consecutive stages over the lags k / grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StageGaps {
    pub n: usize,
    pub gn1_gn2: f64,
    pub gn2_gn3: f64,
    pub gn3_gn4: f64,
}

pub fn stage_gaps(n: usize, grid: usize) -> Result<StageGaps> {
    let nodes = li_inverse_nodes(n + 1)?;
    let covs: Vec<ChainCovariance> = STAGES
        .iter()
        .map(|&s| ChainCovariance::with_nodes(s, n, nodes.clone()))
        .collect::<Result<_>>()?;
    let mut sup = [0.0f64; 3];
    for k in 0..=grid {
        let u = k as f64 / grid as f64;
        let c: Vec<f64> = covs.iter().map(|c| c.cov(u)).collect::<Result<_>>()?;
        for i in 0..3 {
            sup[i] = sup[i].max((c[i] - c[i + 1]).abs());
        }
    }
    Ok(StageGaps { n, gn1_gn2: sup[0], gn2_gn3: sup[1], gn3_gn4: sup[2] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_branches() {
        let t = 2.0;
        assert_eq!(reference_covariance(t, 0.3, 0.3).unwrap(), 1.5);
        let d = (-t as f64).exp();
        let a = 0.5 * (1.0 + t - t.exp() * d);
        assert!((a - 0.5 * t).abs() < 1e-15);
        assert!((reference_covariance(t, 0.0, d).unwrap() - 0.5 * t).abs() < 1e-15);
        assert!((reference_covariance(t, 0.0, d * (1.0 + 1e-12)).unwrap() - 0.5 * t).abs() < 1e-11);
        assert_eq!(reference_covariance(t, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(reference_covariance(t, -0.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gn1_small_n_is_finite_sum() {
        let l: Vec<f64> = (1..=3).map(|j| li_inverse(j as f64).unwrap()).collect();
        let want = 0.5 * (1.0 / l[0] + 1.0 / l[1] + 1.0 / l[2]);
        assert!((chain_covariance(Stage::GN1, 3, 0.4, 0.4).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn gn2_and_gn3_match_quadrature() {
        let n = 50;
        let c2 = ChainCovariance::new(Stage::GN2, n).unwrap();
        let c3 = ChainCovariance::new(Stage::GN3, n).unwrap();
        let nodes = li_inverse_nodes(n + 1).unwrap();
        for u in [0.0, 1e-5, 0.3, 1.0] {
            let q2: f64 = nodes
                .windows(2)
                .map(|w| integrate(|t| (u * t.ln()).cos() / t, w[0], w[1], 1e-14, 1e-13).unwrap() / (w[1] - w[0]))
                .sum();
            assert!((c2.cov(u).unwrap() - 0.5 * q2).abs() < 1e-10, "GN2 at {u}");
            let q3 = integrate(|s| (u * s).cos() / s, c3.a, c3.b, 1e-14, 1e-13).unwrap();
            assert!((c3.cov(u).unwrap() - 0.5 * q3).abs() < 1e-10, "GN3 at {u}");
        }
    }

    #[test]
    fn gn4_diagonal_tracks_half_log_log() {
        let offs: Vec<f64> = js1_conditions(&[1_000, 10_000, 100_000], 200)
            .unwrap()
            .iter()
            .map(|r| r.diag_offset)
            .collect();
        let spread = offs.iter().cloned().fold(f64::MIN, f64::max) - offs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.5);
    }

    #[test]
    fn covariance_is_symmetric() {
        for s in STAGES {
            let c = ChainCovariance::new(s, 20).unwrap();
            assert_eq!(c.cov_xy(0.2, 0.7).unwrap(), c.cov_xy(0.7, 0.2).unwrap());
        }
    }

    #[test]
    fn reference_sampler_small_t() {
        let s = ReferenceSampler::new(1e-9, 33).unwrap();
        assert!(s.clipped_mass <= 1e-6 * s.trace);
        let f = s.sample(1, 0);
        assert_eq!(f.values.len(), 33);
    }

    #[test]
    fn vacuous_offdiag() {
        assert_eq!(offdiag_sup(&[1.0, 2.0, 3.0], 1.0), 0.0);
    }
}
