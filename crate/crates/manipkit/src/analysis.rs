//! Scaling-relationship fits and corpus statistics.
//!
//! Two ordinary-least-squares models:
//! - success rate against the mixture proportion, `sr = k*ln(1-x) + b`,
//!   with the knee point `p* = 1 - k` where the marginal loss rate reaches
//!   -1 (d sr / dx = k/(x-1) = -1);
//! - success rate against a trajectory count, `sr = a*ln(x) + c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traj::{Phase, Segment, Source};

/// One observation: mixture proportion (or count) and measured success rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub x: f64,
    pub sr: f64,
}

/// Least-squares result for `sr = k*ln(1-x) + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProportionFit {
    pub k: f64,
    pub b: f64,
    /// Knee proportion `1 - k`; meaningful only when `p_star_valid`.
    pub p_star: f64,
    /// Set when `k` lies in (0, 1); otherwise the knee is out of range.
    pub p_star_valid: bool,
    pub rss: f64,
    pub n_points: usize,
}

/// Least-squares result for `sr = a*ln(x) + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCountFit {
    pub a: f64,
    pub c: f64,
    pub rss: f64,
    pub n_points: usize,
}

fn ols(us: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = us.len() as f64;
    let u_mean = us.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut suu = 0.0;
    let mut suy = 0.0;
    for (u, y) in us.iter().zip(ys) {
        suu += (u - u_mean) * (u - u_mean);
        suy += (u - u_mean) * (y - y_mean);
    }
    if suu == 0.0 {
        return Err(Error::RankDeficient);
    }
    let slope = suy / suu;
    let intercept = y_mean - slope * u_mean;
    let rss = us
        .iter()
        .zip(ys)
        .map(|(u, y)| {
            let r = y - (slope * u + intercept);
            r * r
        })
        .sum();
    Ok((slope, intercept, rss))
}

/// Fit `sr = k*ln(1-x) + b` over proportions in `[0, 1)`.
pub fn fit_log_proportion(points: &[ScalingPoint]) -> Result<LogProportionFit> {
    if points.len() < 2 {
        return Err(Error::Domain("need at least 2 points".into()));
    }
    for p in points {
        if !(p.x.is_finite() && p.sr.is_finite()) {
            return Err(Error::Domain("non-finite observation".into()));
        }
        if !(0.0..1.0).contains(&p.x) {
            return Err(Error::Domain(format!(
                "proportion {} outside [0, 1)",
                p.x
            )));
        }
    }
    let us: Vec<f64> = points.iter().map(|p| (1.0 - p.x).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sr).collect();
    let (k, b, rss) = ols(&us, &ys)?;
    let p_star = 1.0 - k;
    Ok(LogProportionFit {
        k,
        b,
        p_star,
        p_star_valid: k > 0.0 && k < 1.0,
        rss,
        n_points: points.len(),
    })
}

/// Fit `sr = a*ln(x) + c` over counts `x >= 1`.
pub fn fit_log_count(points: &[ScalingPoint]) -> Result<LogCountFit> {
    if points.len() < 2 {
        return Err(Error::Domain("need at least 2 points".into()));
    }
    for p in points {
        if !(p.x.is_finite() && p.sr.is_finite()) {
            return Err(Error::Domain("non-finite observation".into()));
        }
        if p.x < 1.0 {
            return Err(Error::Domain(format!("count {} below 1", p.x)));
        }
    }
    let us: Vec<f64> = points.iter().map(|p| p.x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sr).collect();
    let (a, c, rss) = ols(&us, &ys)?;
    Ok(LogCountFit {
        a,
        c,
        rss,
        n_points: points.len(),
    })
}

/// Summary of one trajectory for corpus statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord {
    pub source: Source,
    pub num_steps: usize,
    pub segments: Vec<Segment>,
}

/// Aggregate corpus statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub full_trajectories: usize,
    pub srp_only_trajectories: usize,
    pub srp_segments: usize,
    pub pip_segments: usize,
    pub mean_srp_segment_len: f64,
    pub mean_pip_segment_len: f64,
    pub mean_full_len: f64,
    pub mean_srp_only_len: f64,
    /// Mean full-trajectory length over mean approach-only length; absent
    /// when either side is missing.
    pub full_to_srp_length_ratio: Option<f64>,
}

pub fn corpus_stats(records: &[CorpusRecord]) -> Result<CorpusStats> {
    if records.is_empty() {
        return Err(Error::EmptyInput("corpus has no trajectories".into()));
    }
    let mut stats = CorpusStats {
        full_trajectories: 0,
        srp_only_trajectories: 0,
        srp_segments: 0,
        pip_segments: 0,
        mean_srp_segment_len: 0.0,
        mean_pip_segment_len: 0.0,
        mean_full_len: 0.0,
        mean_srp_only_len: 0.0,
        full_to_srp_length_ratio: None,
    };
    let mut srp_len_total = 0usize;
    let mut pip_len_total = 0usize;
    let mut full_steps = 0usize;
    let mut srp_only_steps = 0usize;
    for r in records {
        match r.source {
            Source::Full => {
                stats.full_trajectories += 1;
                full_steps += r.num_steps;
            }
            Source::SrpOnly => {
                stats.srp_only_trajectories += 1;
                srp_only_steps += r.num_steps;
            }
        }
        for s in &r.segments {
            match s.phase {
                Phase::Srp => {
                    stats.srp_segments += 1;
                    srp_len_total += s.len();
                }
                Phase::Pip => {
                    stats.pip_segments += 1;
                    pip_len_total += s.len();
                }
            }
        }
    }
    if stats.srp_segments > 0 {
        stats.mean_srp_segment_len = srp_len_total as f64 / stats.srp_segments as f64;
    }
    if stats.pip_segments > 0 {
        stats.mean_pip_segment_len = pip_len_total as f64 / stats.pip_segments as f64;
    }
    if stats.full_trajectories > 0 {
        stats.mean_full_len = full_steps as f64 / stats.full_trajectories as f64;
    }
    if stats.srp_only_trajectories > 0 {
        stats.mean_srp_only_len = srp_only_steps as f64 / stats.srp_only_trajectories as f64;
    }
    if stats.full_trajectories > 0 && stats.srp_only_trajectories > 0 && stats.mean_srp_only_len > 0.0
    {
        stats.full_to_srp_length_ratio = Some(stats.mean_full_len / stats.mean_srp_only_len);
    }
    Ok(stats)
}
