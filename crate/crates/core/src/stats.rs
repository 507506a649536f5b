//! Empirical distances used to compare simulation output with limit laws.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// the standard normal: the larger one-sided gap on both sides of every
/// jump of the empirical CDF.
pub fn ks_normal_distance(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("samples contain NaN".into()));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = normal.cdf(*x);
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(d)
}

/// Density of the standard normal, for plotting and diagnostics.
pub fn normal_pdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").pdf(x)
}

/// Empirical probability mass function of nonnegative integer samples,
/// indexed 0..=max(samples).
pub fn empirical_pmf(samples: &[u64]) -> Vec<f64> {
    let Some(&max) = samples.iter().max() else {
        return Vec::new();
    };
    let mut pmf = vec![0.0; max as usize + 1];
    for &s in samples {
        pmf[s as usize] += 1.0;
    }
    let m = samples.len() as f64;
    for q in &mut pmf {
        *q /= m;
    }
    pmf
}

/// Largest Poisson mean the total-variation routine evaluates in direct
/// (non-logarithmic) arithmetic without the pmf recurrence degrading.
pub const MAX_TV_LAMBDA: f64 = 700.0;

/// Total-variation distance between the empirical law of integer samples
/// and Poisson(lambda):
///   1/2 sum_k |emp_k - pois_k|,
/// the Poisson tail beyond the truncation point entering as pure mass.
pub fn tv_distance_poisson(samples: &[u64], lambda: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    if !(0.0..=MAX_TV_LAMBDA).contains(&lambda) {
        return Err(Error::Domain(format!(
            "Poisson mean {lambda} outside [0, {MAX_TV_LAMBDA}]"
        )));
    }
    let emp = empirical_pmf(samples);
    let mut pk = (-lambda).exp();
    let mut cum = 0.0;
    let mut acc = 0.0;
    let mut k = 0usize;
    loop {
        let e = emp.get(k).copied().unwrap_or(0.0);
        acc += (e - pk).abs();
        cum += pk;
        // stop once the sample support is exhausted and the Poisson mass
        // is accounted for (or provably stuck below f64 resolution)
        if k + 1 >= emp.len() && (cum >= 1.0 - 1e-12 || k as f64 > lambda + 60.0 * (lambda.sqrt() + 1.0))
        {
            break;
        }
        k += 1;
        pk *= lambda / k as f64;
    }
    Ok(0.5 * acc + 0.5 * (1.0 - cum).max(0.0))
}

/// Pearson correlation of two equally long samples.
pub fn empirical_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "sample lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Domain("need at least two paired samples".into()));
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Domain("degenerate sample: zero variance".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_quantiles_is_half_step() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let m = 1000usize;
        let samples: Vec<f64> = (0..m)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / m as f64))
            .collect();
        let d = ks_normal_distance(&samples).unwrap();
        assert!((d - 0.5 / m as f64).abs() < 1e-6, "d = {d}");
    }

    #[test]
    fn ks_detects_a_shift() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let samples: Vec<f64> = (0..500)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / 500.0) + 1.0)
            .collect();
        assert!(ks_normal_distance(&samples).unwrap() > 0.3);
    }

    #[test]
    fn ks_rejects_empty() {
        assert!(ks_normal_distance(&[]).is_err());
    }

    #[test]
    fn tv_of_point_mass_against_poisson() {
        // all-zero samples against Poisson(log 2): TV = 1 - e^(-lambda) = 1/2
        let zeros = vec![0u64; 100];
        let tv = tv_distance_poisson(&zeros, std::f64::consts::LN_2).unwrap();
        assert!((tv - 0.5).abs() < 1e-9, "tv = {tv}");
        // against a vanishing mean the distance vanishes
        let tv = tv_distance_poisson(&zeros, 1e-13).unwrap();
        assert!(tv < 1e-9);
    }

    #[test]
    fn tv_is_a_distance_on_probabilities() {
        let samples: Vec<u64> = (0..50).flat_map(|_| [0u64, 1, 1, 2, 3]).collect();
        let tv = tv_distance_poisson(&samples, 1.4).unwrap();
        assert!((0.0..=1.0).contains(&tv));
        // disjoint support: samples all huge
        let far = vec![100u64; 40];
        let tv = tv_distance_poisson(&far, 0.5).unwrap();
        assert!(tv > 0.999);
    }

    #[test]
    fn tv_domain_checks() {
        assert!(tv_distance_poisson(&[], 1.0).is_err());
        assert!(tv_distance_poisson(&[1], -0.1).is_err());
        assert!(tv_distance_poisson(&[1], 701.0).is_err());
    }

    #[test]
    fn pmf_normalizes() {
        let pmf = empirical_pmf(&[0, 0, 1, 3]);
        assert_eq!(pmf, vec![0.5, 0.25, 0.0, 0.25]);
        assert!(empirical_pmf(&[]).is_empty());
    }

    #[test]
    fn correlation_of_linear_data() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((empirical_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((empirical_correlation(&x, &z).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_small_case() {
        let r = empirical_correlation(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn correlation_domain_checks() {
        assert!(empirical_correlation(&[1.0], &[1.0, 2.0]).is_err());
        assert!(empirical_correlation(&[1.0], &[1.0]).is_err());
        assert!(empirical_correlation(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
