//! Regime classification at finite (n, p) and the limiting correlation
//! kappa of the standardized pair (X_ell1, X_ell2).
//!
//! The classifier is driven by psi = n p^(ell1 - 1) ell1, the expected
//! number of points of [n]_p falling in a fixed progression's span, and by
//! the moment threshold n^2 p^ell1 / (ell1 - 1), twice the leading term of
//! the expected count. Cutoffs are heuristic knobs, exposed in
//! [`RegimeThresholds`]; the limits they select are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{entropy_norm_sq, inner_product, Kernel, LengthClass};
use crate::progression::{count_aps, ModelParams};

/// Classification cutoffs. `psi_overlap` and `psi_loose` bound the
/// intermediate window for the pair regime; `poisson_max` caps the moment
/// threshold for a Poisson label; `zero_mean` is the expected count below
/// which the count is essentially zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub psi_overlap: f64,
    pub psi_loose: f64,
    pub poisson_max: f64,
    pub zero_mean: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { psi_overlap: 0.1, psi_loose: 10.0, poisson_max: 100.0, zero_mean: 0.01 }
    }
}

impl RegimeThresholds {
    fn validate(&self) -> Result<()> {
        let ok = self.psi_overlap > 0.0
            && self.psi_loose > self.psi_overlap
            && self.poisson_max > 0.0
            && self.zero_mean > 0.0
            && [self.psi_overlap, self.psi_loose, self.poisson_max, self.zero_mean]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("regime thresholds must be finite, positive and ordered".into()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnivariateRegime {
    Zero,
    Poisson { c: f64 },
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairRegime {
    Overlap,
    Intermediate { c: f64 },
    Loose,
}

/// Everything the classifier knows about one parameter point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegimeReport {
    pub n: u64,
    pub ell1: u32,
    pub ell2: u32,
    pub p: f64,
    /// n p^(ell1-1) ell1.
    pub psi: f64,
    /// n^2 p^ell1 / (ell1 - 1).
    pub moment_threshold: f64,
    /// Exact-count Poisson parameter count_aps(n, ell1) * p^ell1.
    pub poisson_param: f64,
    pub regime_univariate: UnivariateRegime,
    pub regime_pair: PairRegime,
    /// Limiting correlation in the classified pair regime.
    pub kappa: f64,
    /// Variance inflation coefficient at c = psi; None when psi = 0.
    pub gamma: Option<f64>,
    /// [intermediate kappa at c = psi, loose-regime kappa]: the predicted
    /// range for the finite-n correlation. The intermediate value grows
    /// monotonically in c toward the loose limit.
    pub kappa_band: [f64; 2],
}

pub fn classify_regimes(params: &ModelParams) -> Result<RegimeReport> {
    classify_regimes_with(params, &RegimeThresholds::default())
}

pub fn classify_regimes_with(params: &ModelParams, th: &RegimeThresholds) -> Result<RegimeReport> {
    th.validate()?;
    let p = params.p.as_f64();
    let n = params.n as f64;
    let l1 = params.ell1 as f64;
    let psi = n * p.powi(params.ell1 as i32 - 1) * l1;
    let moment_threshold = n * n * p.powi(params.ell1 as i32) / (l1 - 1.0);
    let poisson_param = count_aps(params.n, params.ell1)? as f64 * p.powi(params.ell1 as i32);
    let regime_univariate = if poisson_param < th.zero_mean {
        UnivariateRegime::Zero
    } else if moment_threshold <= th.poisson_max {
        UnivariateRegime::Poisson { c: moment_threshold }
    } else {
        UnivariateRegime::Gaussian
    };
    let regime_pair = if psi < th.psi_overlap {
        PairRegime::Overlap
    } else if psi > th.psi_loose {
        PairRegime::Loose
    } else {
        PairRegime::Intermediate { c: psi }
    };
    let lc1 = LengthClass::Finite(params.ell1);
    let lc2 = LengthClass::Finite(params.ell2);
    let kap = kappa(lc1, lc2, &regime_pair)?;
    let gamma = if psi > 0.0 { Some(gamma_coeff(lc1, psi)?) } else { None };
    let band_lo = if psi > 0.0 {
        kappa(lc1, lc2, &PairRegime::Intermediate { c: psi })?
    } else {
        0.0
    };
    let band_hi = kappa(lc1, lc2, &PairRegime::Loose)?;
    Ok(RegimeReport {
        n: params.n,
        ell1: params.ell1,
        ell2: params.ell2,
        p,
        psi,
        moment_threshold,
        poisson_param,
        regime_univariate,
        regime_pair,
        kappa: kap,
        gamma,
        kappa_band: [band_lo, band_hi],
    })
}

/// Limiting correlation of the standardized pair in a given regime:
/// 0 in the overlap regime, the kernel cosine in the loose regime, and the
/// cosine damped by sqrt(1 + gamma) in the intermediate regime.
pub fn kappa(ell: LengthClass, ell_prime: LengthClass, regime: &PairRegime) -> Result<f64> {
    match regime {
        PairRegime::Overlap => Ok(0.0),
        PairRegime::Loose => kernel_cosine(ell, ell_prime),
        PairRegime::Intermediate { c } => {
            let g = gamma_coeff(ell, *c)?;
            Ok(kernel_cosine(ell, ell_prime)? / (1.0 + g).sqrt())
        }
    }
}

/// <phi_1, phi_2> / (||phi_1|| ||phi_2||); exactly 1 for equal classes.
fn kernel_cosine(ell: LengthClass, ell_prime: LengthClass) -> Result<f64> {
    if ell == ell_prime {
        return Ok(1.0);
    }
    let k1 = Kernel::for_class(ell)?;
    let k2 = Kernel::for_class(ell_prime)?;
    let ip = inner_product(&k1, &k2).as_f64();
    let n1 = inner_product(&k1, &k1).as_f64();
    let n2 = inner_product(&k2, &k2).as_f64();
    Ok(ip / (n1 * n2).sqrt())
}

/// Variance inflation from the Poisson point count at finite c:
/// ell / (2 (ell - 1) c ||phi_ell||^2) for finite lengths and
/// 1 / (2 c ||phi_inf||^2) for the divergent class. Requires c > 0.
pub fn gamma_coeff(ell: LengthClass, c: f64) -> Result<f64> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::Domain(format!("intermediate constant c = {c} must be positive")));
    }
    match ell {
        LengthClass::Finite(l) => {
            let k = Kernel::for_class(ell)?;
            let norm = inner_product(&k, &k).as_f64();
            Ok(l as f64 / (2.0 * (l as f64 - 1.0) * c * norm))
        }
        LengthClass::Divergent => Ok(1.0 / (2.0 * c * entropy_norm_sq())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Prob;

    fn params(n: u64, p: f64, l1: u32, l2: u32) -> ModelParams {
        ModelParams::new(n, Prob::approx(p).unwrap(), l1, l2).unwrap()
    }

    #[test]
    fn univariate_labels() {
        let r = classify_regimes(&params(100, 1e-4, 3, 3)).unwrap();
        assert_eq!(r.regime_univariate, UnivariateRegime::Zero);
        let r = classify_regimes(&params(100, 0.05, 3, 3)).unwrap();
        assert!(matches!(r.regime_univariate, UnivariateRegime::Poisson { .. }));
        let r = classify_regimes(&params(100, 0.5, 3, 3)).unwrap();
        assert_eq!(r.regime_univariate, UnivariateRegime::Gaussian);
    }

    #[test]
    fn pair_labels() {
        let r = classify_regimes(&params(100, 0.01, 3, 3)).unwrap();
        assert_eq!(r.regime_pair, PairRegime::Overlap);
        assert_eq!(r.kappa, 0.0);
        let r = classify_regimes(&params(100, 0.5, 3, 3)).unwrap();
        assert_eq!(r.regime_pair, PairRegime::Loose);
        assert_eq!(r.kappa, 1.0);
        let r = classify_regimes(&params(10_000, 0.05, 4, 3)).unwrap();
        match r.regime_pair {
            PairRegime::Intermediate { c } => assert!((c - 5.0).abs() < 1e-12, "c = {c}"),
            other => panic!("expected intermediate, got {other:?}"),
        }
    }

    #[test]
    fn intermediate_worked_example() {
        // c chosen so gamma = 1; kappa drops to 1/sqrt(2).
        let c = 1.0 / (2.0 * entropy_norm_sq());
        let g = gamma_coeff(LengthClass::Divergent, c).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        let k = kappa(
            LengthClass::Divergent,
            LengthClass::Divergent,
            &PairRegime::Intermediate { c },
        )
        .unwrap();
        assert!((k - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn finite_pair_values() {
        let loose = kappa(LengthClass::Finite(4), LengthClass::Finite(3), &PairRegime::Loose).unwrap();
        assert!((loose - 0.9967657002470139).abs() < 1e-12);
        let inter = kappa(
            LengthClass::Finite(4),
            LengthClass::Finite(3),
            &PairRegime::Intermediate { c: 5.0 },
        )
        .unwrap();
        let g = gamma_coeff(LengthClass::Finite(4), 5.0).unwrap();
        assert!((g - 0.2823529411764706).abs() < 1e-12);
        assert!((inter - 0.8802160816915492).abs() < 1e-12);
    }

    #[test]
    fn loose_kappa_is_one_only_for_equal_classes() {
        for (a, b) in [
            (LengthClass::Divergent, LengthClass::Divergent),
            (LengthClass::Finite(5), LengthClass::Finite(5)),
        ] {
            assert_eq!(kappa(a, b, &PairRegime::Loose).unwrap(), 1.0);
        }
        let k = kappa(LengthClass::Finite(5), LengthClass::Finite(3), &PairRegime::Loose).unwrap();
        assert!(k < 1.0 && k > 0.9);
        let k = kappa(LengthClass::Finite(3), LengthClass::Divergent, &PairRegime::Loose).unwrap();
        assert!(k < 1.0 && k > 0.9);
    }

    #[test]
    fn band_brackets_kappa_and_orders() {
        let r = classify_regimes(&params(10_000, 0.05, 4, 3)).unwrap();
        let [lo, hi] = r.kappa_band;
        assert!(lo <= r.kappa && r.kappa <= hi, "{lo} {} {hi}", r.kappa);
        assert!(lo > 0.8 && hi < 1.0);
        // monotone in c: larger c moves the intermediate value toward loose
        let k1 = kappa(
            LengthClass::Finite(4),
            LengthClass::Finite(3),
            &PairRegime::Intermediate { c: 1.0 },
        )
        .unwrap();
        let k2 = kappa(
            LengthClass::Finite(4),
            LengthClass::Finite(3),
            &PairRegime::Intermediate { c: 8.0 },
        )
        .unwrap();
        assert!(k1 < k2 && k2 < hi);
    }

    #[test]
    fn gamma_domain() {
        assert!(gamma_coeff(LengthClass::Finite(3), 0.0).is_err());
        assert!(gamma_coeff(LengthClass::Finite(3), -1.0).is_err());
        assert!(gamma_coeff(LengthClass::Finite(3), f64::INFINITY).is_err());
        assert!(kappa(
            LengthClass::Finite(3),
            LengthClass::Finite(3),
            &PairRegime::Intermediate { c: 0.0 }
        )
        .is_err());
    }

    #[test]
    fn zero_probability_report() {
        let r = classify_regimes(&params(50, 0.0, 3, 3)).unwrap();
        assert_eq!(r.regime_univariate, UnivariateRegime::Zero);
        assert_eq!(r.regime_pair, PairRegime::Overlap);
        assert_eq!(r.gamma, None);
        assert_eq!(r.kappa_band[0], 0.0);
        assert_eq!(r.kappa_band[1], 1.0);
    }

    #[test]
    fn report_json_round_trip() {
        let r = classify_regimes(&params(1000, 0.02, 4, 3)).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: RegimeReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.regime_pair, r.regime_pair);
        assert_eq!(back.kappa, r.kappa);
        assert_eq!(back.kappa_band, r.kappa_band);
    }

    #[test]
    fn threshold_validation() {
        let bad = RegimeThresholds { psi_overlap: 5.0, psi_loose: 1.0, ..Default::default() };
        assert!(classify_regimes_with(&params(100, 0.5, 3, 3), &bad).is_err());
    }
}
