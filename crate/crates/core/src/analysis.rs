//! Post-processing: resonance scans, Landau-Zener exponent fits, and
//! scaling-collapse quantification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{propagate_driven, DenseState, DrivenOptions};
use crate::hamiltonian::DrivenIsingOp;
use crate::lattice::{ModelParams, ResonanceSpec, SpinConfig};
use crate::observables::{self, DEFAULT_N_MAX};
use crate::schedule::DriveSchedule;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Summary of one grid point of a longitudinal-field scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanPoint {
    pub h_z: f64,
    pub final_m: f64,
    /// `λ₁ ..= λ_nmax` at the end of the schedule.
    pub lambda: Vec<f64>,
}

/// A resonance detected in a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceHit {
    /// Bubble size whose density peaks.
    pub n: usize,
    /// Grid value at the peak.
    pub h_z: f64,
    /// Grid index of the peak.
    pub index: usize,
}

/// Result of a resonance scan over a longitudinal-field grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: Vec<f64>,
    pub points: Vec<ScanPoint>,
    pub resonances: Vec<ResonanceHit>,
    /// `M(t)` per grid point for heat-profile output.
    pub heatmap_times: Vec<f64>,
    pub heatmap_m: Vec<Vec<f64>>,
    pub meta: ScanMeta,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanMeta {
    pub n_sites: usize,
    pub h_x: f64,
    pub backend: String,
    pub seed: u64,
    pub schedule_hash: u64,
}

/// Scan a schedule template over a strictly monotone `h_z` grid, recording
/// final observables and the `M(t)` heat profile. Grid points run as
/// independent simulations (in parallel when enabled).
pub fn resonance_scan<F>(
    grid: &[f64],
    params: &ModelParams,
    schedule_of: F,
    dt: f64,
    record_every: f64,
    meta: ScanMeta,
) -> Result<ScanResult>
where
    F: Fn(f64) -> DriveSchedule + Sync + Send,
{
    if grid.len() < 2 {
        return Err(Error::Range("scan grid needs at least two points".into()));
    }
    let increasing = grid[1] > grid[0];
    for w in grid.windows(2) {
        if (w[1] > w[0]) != increasing || w[1] == w[0] {
            return Err(Error::Range("scan grid must be strictly monotone".into()));
        }
    }
    let op = DrivenIsingOp::new(params)?;
    let run_one = |&h_z: &f64| -> Result<(ScanPoint, Vec<(f64, f64)>)> {
        let schedule = schedule_of(h_z);
        let initial = DenseState::from_config(&SpinConfig::all_up(params.n_sites)?);
        let mut m_series = Vec::new();
        let out = propagate_driven(
            &initial,
            &schedule,
            &op,
            dt,
            record_every,
            &DrivenOptions::default(),
            |t, state| m_series.push((t, observables::magnetization(state))),
        )?;
        let point = ScanPoint {
            h_z,
            final_m: observables::magnetization(&out.state),
            lambda: observables::lambda_profile(&out.state, DEFAULT_N_MAX),
        };
        Ok((point, m_series))
    };
    #[cfg(feature = "parallel")]
    let results: Result<Vec<_>> = grid.par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<_>> = grid.iter().map(run_one).collect();
    let results = results?;

    let heatmap_times: Vec<f64> = results
        .first()
        .map(|(_, series)| series.iter().map(|&(t, _)| t).collect())
        .unwrap_or_default();
    let heatmap_m: Vec<Vec<f64>> = results
        .iter()
        .map(|(_, series)| series.iter().map(|&(_, m)| m).collect())
        .collect();
    let points: Vec<ScanPoint> = results.into_iter().map(|(p, _)| p).collect();
    let resonances = detect_resonances(grid, &points, params.j);
    Ok(ScanResult {
        grid: grid.to_vec(),
        points,
        resonances,
        heatmap_times,
        heatmap_m,
        meta,
    })
}

/// Flag local maxima of λₙ near `-2J/n`.
///
/// A peak must beat its grid neighbours and carry a minimum prominence of
/// twice every other bubble density at the same point; this keeps the
/// adiabatic feature at large `|h_z|` (where all sizes respond together)
/// from being reported as a bubble resonance.
fn detect_resonances(grid: &[f64], points: &[ScanPoint], j: f64) -> Vec<ResonanceHit> {
    let mut hits = Vec::new();
    let n_max = points.first().map(|p| p.lambda.len()).unwrap_or(0);
    for n in 1..=n_max {
        let res = match ResonanceSpec::exact(n, j) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let grid_step = (grid[1] - grid[0]).abs();
        let mut best: Option<(usize, f64)> = None;
        for i in 1..points.len() - 1 {
            let lam = points[i].lambda[n - 1];
            if lam <= points[i - 1].lambda[n - 1] || lam <= points[i + 1].lambda[n - 1] {
                continue;
            }
            let others = points[i]
                .lambda
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != n - 1)
                .map(|(_, &v)| v)
                .fold(0.0, f64::max);
            if lam < 2.0 * others {
                continue;
            }
            // only flag peaks in the neighbourhood of the expected value
            if (grid[i] - res.h_z_res).abs() > 4.0 * grid_step.max(0.05 * res.h_z_res.abs()) {
                continue;
            }
            if best.map(|(_, b)| lam > b).unwrap_or(true) {
                best = Some((i, lam));
            }
        }
        if let Some((i, _)) = best {
            hits.push(ResonanceHit {
                n,
                h_z: grid[i],
                index: i,
            });
        }
    }
    hits
}

/// Least-squares fit of `log λ` against `log h_x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LzFit {
    pub slope: f64,
    pub intercept: f64,
    /// Bootstrap 16th/84th percentile interval on the slope.
    pub slope_ci: (f64, f64),
    /// Set when the densities carry no usable variation.
    pub degenerate: bool,
}

/// Fit the Landau-Zener exponent: slope of `log λₙ` vs `log h_x`.
///
/// At the `n`-th resonance the slope is expected to approach `n`.
pub fn lz_exponent_fit(points: &[(f64, f64)], seed: u64) -> Result<LzFit> {
    if points.len() < 2 {
        return Err(Error::Data("need at least two ladder points".into()));
    }
    for &(h, lam) in points {
        if h <= 0.0 {
            return Err(Error::Data(format!("non-positive field {h}")));
        }
        if lam <= 0.0 {
            return Err(Error::Data(format!(
                "non-positive density {lam} in the fit window"
            )));
        }
    }
    let log_pts: Vec<(f64, f64)> = points.iter().map(|&(h, l)| (h.ln(), l.ln())).collect();
    let y_spread = log_pts
        .iter()
        .map(|&(_, y)| y)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
            (lo.min(y), hi.max(y))
        });
    if (y_spread.1 - y_spread.0).abs() < 1e-12 {
        return Ok(LzFit {
            slope: 0.0,
            intercept: y_spread.0,
            slope_ci: (0.0, 0.0),
            degenerate: true,
        });
    }
    let (slope, intercept) = least_squares(&log_pts);
    // pairs bootstrap for the interval
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(200);
    for _ in 0..200 {
        let resampled: Vec<(f64, f64)> = (0..log_pts.len())
            .map(|_| log_pts[rng.gen_range(0..log_pts.len())])
            .collect();
        let xs: Vec<f64> = resampled.iter().map(|&(x, _)| x).collect();
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread > 1e-9 {
            slopes.push(least_squares(&resampled).0);
        }
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ci = if slopes.is_empty() {
        (slope, slope)
    } else {
        (
            slopes[(slopes.len() as f64 * 0.16) as usize],
            slopes[((slopes.len() as f64 * 0.84) as usize).min(slopes.len() - 1)],
        )
    };
    Ok(LzFit {
        slope,
        intercept,
        slope_ci: ci,
        degenerate: false,
    })
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let my = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &(x, y) in points {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    let slope = cov / var;
    (slope, my - slope * mx)
}

/// Number of points on the common rescaled-time grid; fixed so collapse
/// residuals are reproducible.
pub const COLLAPSE_GRID: usize = 200;

/// One curve after rescaling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RescaledCurve {
    pub param: f64,
    pub series: Vec<(f64, f64)>,
}

/// Quantified scaling collapse of a family of curves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollapseReport {
    /// Exponent `p` used on the `param^p · t` axis.
    pub exponent: f64,
    pub rescaled: Vec<RescaledCurve>,
    /// Max pairwise L∞ distance between interpolated rescaled curves over
    /// the common window, normalized by the value range on that window.
    pub residual: f64,
    pub window: (f64, f64),
}

/// Rescale each curve's time axis by `param^p` and measure how well the
/// family collapses onto a single curve.
pub fn scaling_collapse(
    curves: &[(f64, Vec<(f64, f64)>)],
    exponent: f64,
) -> Result<CollapseReport> {
    if curves.len() < 3 {
        return Err(Error::Data("collapse needs at least three curves".into()));
    }
    let mut rescaled = Vec::with_capacity(curves.len());
    for (param, series) in curves {
        if *param <= 0.0 {
            return Err(Error::Data(format!(
                "collapse parameters must be positive, got {param}"
            )));
        }
        if series.len() < 2 {
            return Err(Error::Data("each curve needs at least two samples".into()));
        }
        let factor = param.powf(exponent);
        let series: Vec<(f64, f64)> = series.iter().map(|&(t, y)| (factor * t, y)).collect();
        rescaled.push(RescaledCurve {
            param: *param,
            series,
        });
    }
    let lo = rescaled
        .iter()
        .map(|c| c.series.first().unwrap().0)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = rescaled
        .iter()
        .map(|c| c.series.last().unwrap().0)
        .fold(f64::INFINITY, f64::min);
    if hi <= lo {
        return Err(Error::Range(format!(
            "rescaled curves share no common window ({lo}, {hi})"
        )));
    }
    let mut residual = 0.0f64;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for k in 0..COLLAPSE_GRID {
        let x = lo + (hi - lo) * k as f64 / (COLLAPSE_GRID - 1) as f64;
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for c in &rescaled {
            let y = interp_series(&c.series, x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        residual = residual.max(ymax - ymin);
        vmin = vmin.min(ymin);
        vmax = vmax.max(ymax);
    }
    let range = (vmax - vmin).max(f64::MIN_POSITIVE);
    Ok(CollapseReport {
        exponent,
        rescaled,
        residual: residual / range,
        window: (lo, hi),
    })
}

fn interp_series(series: &[(f64, f64)], x: f64) -> f64 {
    if x <= series[0].0 {
        return series[0].1;
    }
    if x >= series[series.len() - 1].0 {
        return series[series.len() - 1].1;
    }
    let k = series.partition_point(|&(t, _)| t <= x);
    let (t0, v0) = series[k - 1];
    let (t1, v1) = series[k];
    if t1 == t0 {
        return v0;
    }
    v0 + (v1 - v0) * (x - t0) / (t1 - t0)
}

/// Scan exponents on a fixed grid and return `(p, residual)` at the
/// minimum; deterministic for reproducibility.
pub fn best_exponent(
    curves: &[(f64, Vec<(f64, f64)>)],
    p_lo: f64,
    p_hi: f64,
    steps: usize,
) -> Result<(f64, f64)> {
    if steps < 2 || p_hi <= p_lo {
        return Err(Error::Range("invalid exponent search range".into()));
    }
    let mut best = (f64::NAN, f64::INFINITY);
    for k in 0..=steps {
        let p = p_lo + (p_hi - p_lo) * k as f64 / steps as f64;
        if let Ok(report) = scaling_collapse(curves, p) {
            if report.residual < best.1 {
                best = (p, report.residual);
            }
        }
    }
    if best.0.is_nan() {
        return Err(Error::Range(
            "no exponent in the search range produced a common window".into(),
        ));
    }
    Ok(best)
}
