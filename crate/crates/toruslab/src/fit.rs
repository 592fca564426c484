//! Log-log slope fits with bootstrap confidence intervals.
//!
//! Exponent experiments reduce to fitting log y = a log x + b and asking
//! whether the predicted exponent lies in the 95% interval. The interval
//! comes from 1000 bootstrap resamples drawn from a counter-seeded stream,
//! so fits are reproducible regardless of execution order.

use crate::error::{Error, Result};
use crate::rng::{domains, sample_rng};
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% bootstrap interval for the slope.
    pub lo: f64,
    pub hi: f64,
    /// Points actually used (positive coordinates only).
    pub points: usize,
}

fn lsq(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-18 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Least-squares fit of log y against log x with a 95% bootstrap interval.
///
/// Pairs with a nonpositive coordinate are dropped (an empirical mass of
/// zero carries no log-log information); at least three positive pairs are
/// required.
pub fn loglog_fit(points: &[(f64, f64)], seed: u64) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::invalid(format!(
            "log-log fit needs at least 3 positive points, got {}",
            xs.len()
        )));
    }
    let (slope, intercept) =
        lsq(&xs, &ys).ok_or_else(|| Error::invalid("degenerate abscissae in log-log fit"))?;
    let n = xs.len();
    let reps = 1000usize;
    let mut slopes = Vec::with_capacity(reps);
    for i in 0..reps {
        let mut rng = sample_rng(seed, domains::BOOTSTRAP, i as u64);
        // Resample until the replicate has a usable spread (bounded retries).
        for _ in 0..16 {
            let mut bx = Vec::with_capacity(n);
            let mut by = Vec::with_capacity(n);
            for _ in 0..n {
                let j = rng.gen_range(0..n);
                bx.push(xs[j]);
                by.push(ys[j]);
            }
            if let Some((s, _)) = lsq(&bx, &by) {
                slopes.push(s);
                break;
            }
        }
    }
    if slopes.len() < reps / 2 {
        return Err(Error::nonconv("bootstrap replicates kept collapsing"));
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = slopes[(slopes.len() as f64 * 0.025) as usize];
    let hi = slopes[((slopes.len() as f64 * 0.975) as usize).min(slopes.len() - 1)];
    Ok(SlopeFit { slope, intercept, lo, hi, points: n })
}
