//! Poisson-approximation error bounds and moment-growth diagnostics.
//!
//! Everything here reduces to the pair census: delta1 aggregates the
//! squared means over overlapping pairs, delta2 the correlated second
//! moments, and their sum bounds the total-variation distance between the
//! count and a Poisson law of the same mean.

use serde::Serialize;

use crate::census::census_fast;
use crate::error::{Error, Result};
use crate::oracle::covariance_from_census_f64;
use crate::progression::count_aps;
use crate::rational::{rat_int, rat_pow, Rat};

/// Everything the `bounds` command reports.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub ell: u32,
    pub p: f64,
    /// Poisson mean: the expected count.
    pub poisson_param: f64,
    /// Neighborhood first-moment term.
    pub delta1: f64,
    /// Neighborhood second-moment term (proper overlaps only).
    pub delta2: f64,
    /// delta1 + delta2: the total-variation bound.
    pub tv_bound: f64,
    /// Moment-growth diagnostic order; meaningful for s > 2.
    pub s: f64,
    pub mikhailov_m: f64,
    pub mikhailov_q: f64,
    pub sigma: f64,
    /// (M / sigma) (Q / sigma)^(s - 1), None when sigma vanishes.
    pub criterion_ratio: Option<f64>,
    pub sigma_zero: bool,
    /// Density below which the count is asymptotically degenerate.
    pub poisson_cutoff_a: f64,
    /// Density above which the Poisson regime ends.
    pub poisson_cutoff_b: f64,
}

/// The two Chen-Stein terms, exactly.
///
/// delta1 = p^(2 ell) * (ordered pairs sharing at least one element,
/// the pair (T, T) included); delta2 sums p^(2 ell - r) over ordered pairs
/// sharing exactly r elements, 1 <= r < ell.
pub fn chen_stein_exact(n: u64, ell: u32, p: &Rat) -> Result<(Rat, Rat)> {
    if p < &Rat::from_integer(0.into()) || p > &Rat::from_integer(1.into()) {
        return Err(Error::Domain("probability outside [0, 1]".into()));
    }
    let census = census_fast(n, ell, ell)?;
    let neighbors: i128 = census.counts[1..].iter().sum();
    let delta1 = rat_int(neighbors) * rat_pow(p, 2 * ell);
    let mut delta2 = Rat::from_integer(0.into());
    for r in 1..ell {
        let c = census.counts[r as usize];
        if c != 0 {
            delta2 += rat_int(c) * rat_pow(p, 2 * ell - r);
        }
    }
    Ok((delta1, delta2))
}

/// Floating-point bound report; `s` is the moment order of the growth
/// diagnostic and must exceed 2.
pub fn bound_report(n: u64, ell: u32, p: f64, s: f64) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    if !(s > 2.0) {
        return Err(Error::Domain(format!("moment order s = {s} must exceed 2")));
    }
    let census = census_fast(n, ell, ell)?;
    let a = count_aps(n, ell)? as f64;
    let poisson_param = a * p.powi(ell as i32);

    let neighbors: f64 = census.counts[1..].iter().map(|&c| c as f64).sum();
    let delta1 = neighbors * p.powi(2 * ell as i32);
    let mut delta2 = 0.0;
    for r in 1..ell {
        delta2 += census.counts[r as usize] as f64 * p.powi((2 * ell - r) as i32);
    }

    let var = covariance_from_census_f64(&census, p)?;
    let sigma = var.max(0.0).sqrt();
    let sigma_zero = sigma == 0.0;
    let mikhailov_m = poisson_param;
    let mikhailov_q = n as f64 * p.powi(ell as i32 - 1) * ell as f64 + (ell as f64).powi(4);
    let criterion_ratio = if sigma_zero {
        None
    } else {
        Some((mikhailov_m / sigma) * (mikhailov_q / sigma).powf(s - 1.0))
    };

    let nf = n as f64;
    let lf = ell as f64;
    let poisson_cutoff_a = nf.powf(-3.0 / (2.0 * lf - 1.0));
    let poisson_cutoff_b = nf.powf(-2.0 / (lf + 1.0)) * lf.powf(-3.0 / (lf + 1.0));

    Ok(BoundReport {
        n,
        ell,
        p,
        poisson_param,
        delta1,
        delta2,
        tv_bound: delta1 + delta2,
        s,
        mikhailov_m,
        mikhailov_q,
        sigma,
        criterion_ratio,
        sigma_zero,
        poisson_cutoff_a,
        poisson_cutoff_b,
    })
}
