//! The acceptance suite: ten numbered criteria, each runnable on its own.
//!
//! A criterion never panics on a mathematical failure; it collects the
//! offending cases into its report so a regression shows up as a readable
//! FAIL line rather than a backtrace. Every stochastic criterion runs on a
//! fixed seed and fixed parameters, so reruns are bit-identical.

use std::time::Instant;

use num_traits::{One, Zero};

use crate::bounds::bound_report;
use crate::census::{census_bruteforce_with_budget, census_fast, point_degree, positional_sum};
use crate::error::{Error, Result};
use crate::explorer::{
    centred_product_expectation, dominant_moment, exact_joint_moment, explore, perfect_matchings,
    standardized_from_mixed,
};
use crate::kernel::{
    build_phi, entropy_norm_sq, inner_product, l2_distance, lambda_constant, Kernel, LengthClass,
};
use crate::montecarlo::run_experiment;
use crate::oracle::{exact_covariance, exact_covariance_f64, exact_joint_distribution};
use crate::progression::{count_aps, enumerate_aps, expected_count, ModelParams, Progression};
use crate::rational::{rat, rat_int, Num, Prob, Rat};
use crate::regime::{classify_regimes, PairRegime, UnivariateRegime};
use crate::stats::{empirical_correlation, ks_normal_distance, tv_distance_poisson};

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {} ({:.2}s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.details
        )
    }
}

pub const CRITERION_NAMES: [&str; 10] = [
    "exact count matches enumeration",
    "census routes agree",
    "positional sum identities",
    "small-case oracle agreement",
    "kernel constants and census trend",
    "Poisson-regime total variation",
    "Gaussian-regime KS",
    "correlation and kappa band",
    "moment assembly against oracle",
    "exploration laws and matchings",
];

pub fn run_criterion(id: u32) -> Result<CriterionReport> {
    let start = Instant::now();
    let outcome = match id {
        1 => c1_count_vs_enumeration(),
        2 => c2_census_routes(),
        3 => c3_positional_identities(),
        4 => c4_oracle_agreement(),
        5 => c5_kernel_and_trend(),
        6 => c6_poisson_tv(),
        7 => c7_gaussian_ks(),
        8 => c8_correlation_band(),
        9 => c9_moment_assembly(),
        10 => c10_exploration_laws(),
        _ => {
            return Err(Error::Domain(format!(
                "unknown criterion {id}; valid ids are 1..=10"
            )))
        }
    }?;
    Ok(CriterionReport {
        id,
        name: CRITERION_NAMES[(id - 1) as usize],
        passed: outcome.0,
        details: outcome.1,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all() -> Result<Vec<CriterionReport>> {
    (1..=10).map(run_criterion).collect()
}

fn finish(summary: String, fails: Vec<String>) -> (bool, String) {
    if fails.is_empty() {
        (true, summary)
    } else {
        let shown = fails.iter().take(5).cloned().collect::<Vec<_>>().join("; ");
        (false, format!("{summary}; {} failures: {shown}", fails.len()))
    }
}

fn c1_count_vs_enumeration() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let mut cases = 0u64;
    let mut total = 0u64;
    for ell in 3..=12u32 {
        for n in ell as u64..=500 {
            let c = count_aps(n, ell)?;
            let e = enumerate_aps(n, ell)?;
            cases += 1;
            total += e.len() as u64;
            if c != e.len() as i128 {
                fails.push(format!("(n, ell) = ({n}, {ell}): {c} vs {}", e.len()));
            }
        }
    }
    for (n, ell, want) in [
        (5u64, 3u32, 4i128),
        (9, 3, 16),
        (9, 4, 9),
        (12, 3, 30),
        (12, 4, 18),
        (100_000, 3, 2_499_950_000),
    ] {
        if count_aps(n, ell)? != want {
            fails.push(format!("anchor (n, ell) = ({n}, {ell}) != {want}"));
        }
    }
    Ok(finish(
        format!("count == enumeration on {cases} (n, ell) cells, {total} progressions listed"),
        fails,
    ))
}

/// Grid shared by criteria 2 and 3: every n up to 64 and three larger
/// anchors, lengths up to 8. Pairs whose brute-force cost passes the
/// budget are skipped in criterion 2 (the fast route is still identity-
/// checked at far larger n in criterion 3).
const CENSUS_ANCHORS: [u64; 3] = [100, 181, 300];
const CENSUS_BRUTE_BUDGET: u64 = 2_000_000_000;

fn census_grid() -> Vec<u64> {
    let mut grid: Vec<u64> = (3..=64).collect();
    grid.extend(CENSUS_ANCHORS);
    grid
}

fn c2_census_routes() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let mut cells = 0u64;
    let mut skipped = 0u64;
    for n in census_grid() {
        let lmax = 8.min(n as u32);
        for ell in 3..=lmax {
            for ell_prime in 3..=ell {
                let pairs = count_aps(n, ell)? * count_aps(n, ell_prime)?;
                if pairs > CENSUS_BRUTE_BUDGET as i128 {
                    skipped += 1;
                    continue;
                }
                let brute = census_bruteforce_with_budget(n, ell, ell_prime, CENSUS_BRUTE_BUDGET)?;
                let fast = census_fast(n, ell, ell_prime)?;
                cells += 1;
                if brute.counts != fast.counts {
                    fails.push(format!(
                        "(n, ell, ell') = ({n}, {ell}, {ell_prime}): fast {:?} vs brute {:?}",
                        fast.counts, brute.counts
                    ));
                }
            }
        }
    }
    Ok(finish(
        format!("census_fast == census_bruteforce on {cells} cells ({skipped} over brute budget)"),
        fails,
    ))
}

fn c3_positional_identities() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let mut cells = 0u64;
    let mut check = |n: u64, ell: u32, ell_prime: u32| -> Result<()> {
        let census = census_fast(n, ell, ell_prime)?;
        let ps = positional_sum(n, ell, ell_prime)?;
        cells += 1;
        if census.weighted_sum() != ps {
            fails.push(format!(
                "(n, ell, ell') = ({n}, {ell}, {ell_prime}): weighted census {} vs positional sum {ps}",
                census.weighted_sum()
            ));
        }
        let a = count_aps(n, ell)? * count_aps(n, ell_prime)?;
        if census.total() != a {
            fails.push(format!(
                "(n, ell, ell') = ({n}, {ell}, {ell_prime}): census total {} vs pair count {a}",
                census.total()
            ));
        }
        let mut dot = 0i128;
        for m in 1..=n {
            dot += point_degree(n, ell, m)? * point_degree(n, ell_prime, m)?;
        }
        if dot != ps {
            fails.push(format!(
                "(n, ell, ell') = ({n}, {ell}, {ell_prime}): degree dot product {dot} vs {ps}"
            ));
        }
        Ok(())
    };
    for n in census_grid() {
        let lmax = 8.min(n as u32);
        for ell in 3..=lmax {
            for ell_prime in 3..=ell {
                check(n, ell, ell_prime)?;
            }
        }
    }
    for (n, ell, ell_prime) in [
        (1_000u64, 3u32, 3u32),
        (1_000, 8, 8),
        (10_000, 4, 3),
        (10_000, 12, 5),
        (100_000, 3, 3),
        (100_000, 5, 4),
    ] {
        check(n, ell, ell_prime)?;
    }
    if positional_sum(5, 3, 3)? != 32 || positional_sum(9, 3, 3)? != 272 {
        fails.push("positional sum anchors (5, 3, 3) = 32, (9, 3, 3) = 272".into());
    }
    Ok(finish(format!("positional identities hold on {cells} cells"), fails))
}

fn c4_oracle_agreement() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let mut cases = 0u64;
    let ns: Vec<u64> = (5..=12).chain([14, 16, 18, 20]).collect();
    let pairs = [(3u32, 3u32), (4, 3), (4, 4), (5, 3), (5, 4), (5, 5)];
    let probs = [rat(1, 4), rat(1, 2), rat(3, 4)];
    for &n in &ns {
        for (ell1, ell2) in pairs {
            if ell1 as u64 > n {
                continue;
            }
            for p in &probs {
                let d = exact_joint_distribution(n, ell1, ell2, p)?;
                cases += 1;
                let tag = format!("(n, ell1, ell2, p) = ({n}, {ell1}, {ell2}, {p})");
                if !d.total_mass().is_one() {
                    fails.push(format!("{tag}: pmf mass {}", d.total_mass()));
                }
                for (which, ell) in [(1u8, ell1), (2, ell2)] {
                    let want = match expected_count(n, ell, &Prob::Exact(p.clone()))? {
                        Num::Exact(r) => r,
                        Num::Approx(_) => unreachable!("exact probability in"),
                    };
                    if d.mean(which) != want {
                        fails.push(format!("{tag}: mean{which} mismatch"));
                    }
                    let v = exact_covariance(n, ell, ell, p)?;
                    if d.variance(which) != v {
                        fails.push(format!("{tag}: variance{which} mismatch"));
                    }
                }
                if d.covariance() != exact_covariance(n, ell1, ell2, p)? {
                    fails.push(format!("{tag}: covariance mismatch"));
                }
            }
        }
    }
    let anchor = exact_joint_distribution(5, 3, 3, &rat(1, 2))?;
    if anchor.variance(1) != rat(7, 8) {
        fails.push("anchor Var(X_3; n = 5, p = 1/2) = 7/8".into());
    }
    Ok(finish(
        format!("oracle distribution agrees with census moments on {cases} parameter points"),
        fails,
    ))
}

fn c5_kernel_and_trend() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    // frozen exact inner products
    for (l1, l2, num, den) in [(3u32, 3u32, 7i64, 12i64), (4, 4, 17, 36), (5, 5, 91, 216), (4, 3, 113, 216)] {
        let k1 = build_phi(l1)?;
        let k2 = build_phi(l2)?;
        match inner_product(&k1, &k2) {
            Num::Exact(r) if r == rat(num, den) => {}
            other => fails.push(format!(
                "<phi_{l1}, phi_{l2}> = {} != {num}/{den}",
                other.as_f64()
            )),
        }
    }
    // entropy kernel norm against its closed form
    let closed = 5.0 / 6.0 - std::f64::consts::PI * std::f64::consts::PI / 18.0;
    if (entropy_norm_sq() - closed).abs() > 1e-8 {
        fails.push(format!("entropy norm {} vs {closed}", entropy_norm_sq()));
    }
    // finite kernels approach the entropy kernel
    let entropy = Kernel::for_class(LengthClass::Divergent)?;
    let dists: Vec<f64> = [10u32, 20, 40, 80, 160]
        .iter()
        .map(|&l| Ok(l2_distance(&build_phi(l)?, &entropy)))
        .collect::<Result<_>>()?;
    if !dists.windows(2).all(|w| w[1] < w[0]) || dists[4] >= 0.05 {
        fails.push(format!("L2 distances not shrinking: {dists:?}"));
    }
    // census trend: positional_sum / n^3 approaches the computed constant
    // 7/12 and stays away from the tabulated 31/48
    let computed = 7.0 / 12.0;
    let tabulated = 31.0 / 48.0;
    let mut rel = Vec::new();
    for n in [500u64, 1000, 2000, 4000] {
        let t = positional_sum(n, 3, 3)? as f64 / (n as f64).powi(3);
        rel.push(((t - computed) / computed).abs());
        if n == 4000 {
            let d_combined = (t - tabulated).abs();
            let d_computed = (t - computed).abs();
            if d_combined < 5.0 * d_computed {
                fails.push(format!(
                    "trend at n = 4000 ({t:.6}) fails to separate {computed:.6} from {tabulated:.6}"
                ));
            }
        }
    }
    if !rel.windows(2).all(|w| w[1] < w[0]) || rel[3] > 0.02 {
        fails.push(format!("trend errors not shrinking: {rel:?}"));
    }
    // report record: both constants side by side
    let rep = lambda_constant(LengthClass::Finite(3), LengthClass::Finite(3))?;
    let computed_ok = matches!(&rep.computed, Num::Exact(r) if *r == rat(7, 12));
    let tabulated_ok = rep.tabulated.as_ref() == Some(&rat(31, 48));
    if !computed_ok || !tabulated_ok {
        fails.push("lambda report for (3, 3) should carry 7/12 computed, 31/48 tabulated".into());
    }
    Ok(finish(
        format!(
            "kernel constants exact; trend errors {:.4}/{:.4}/{:.4}/{:.4} favor 7/12 over 31/48",
            rel[0], rel[1], rel[2], rel[3]
        ),
        fails,
    ))
}

const C6_SEED: u64 = 0xC0FFEE;
const C6_REPLICAS: u64 = 10_000;
const TV_SAMPLING_SLACK: f64 = 0.015;

fn c6_poisson_tv() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let n = 100_000u64;
    let p = 9.283e-4;
    let params = ModelParams::new(n, Prob::approx(p)?, 3, 3)?;
    let regime = classify_regimes(&params)?;
    if !matches!(regime.regime_univariate, UnivariateRegime::Poisson { .. }) {
        fails.push(format!("expected the Poisson regime, got {:?}", regime.regime_univariate));
    }
    let bounds = bound_report(n, 3, p, 3.0)?;
    if !(1.9..=2.1).contains(&bounds.poisson_param) {
        fails.push(format!("calibration drift: lambda = {}", bounds.poisson_param));
    }
    let batch = run_experiment(&params, C6_REPLICAS, C6_SEED, 0)?;
    let xs: Vec<u64> = batch.rows.iter().map(|r| r.x1).collect();
    let tv = tv_distance_poisson(&xs, bounds.poisson_param)?;
    let limit = bounds.tv_bound + TV_SAMPLING_SLACK;
    if tv > limit {
        fails.push(format!("TV {tv:.4} over the bound {limit:.4}"));
    }
    Ok(finish(
        format!(
            "TV(empirical, Poisson({:.4})) = {tv:.4} within delta1 + delta2 + slack = {limit:.4}",
            bounds.poisson_param
        ),
        fails,
    ))
}

const C7_SEED: u64 = 0xFEED17;
const C7_REPLICAS: u64 = 2_000;
const KS_LIMIT: f64 = 0.05;

fn c7_gaussian_ks() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let n = 10_000u64;
    let p = 0.02;
    let params = ModelParams::new(n, Prob::approx(p)?, 3, 3)?;
    let regime = classify_regimes(&params)?;
    if regime.regime_univariate != UnivariateRegime::Gaussian {
        fails.push(format!("expected the Gaussian regime, got {:?}", regime.regime_univariate));
    }
    let batch = run_experiment(&params, C7_REPLICAS, C7_SEED, 0)?;
    let zs: Vec<f64> = batch.rows.iter().map(|r| r.z1).collect();
    let ks = ks_normal_distance(&zs)?;
    if ks > KS_LIMIT {
        fails.push(format!("KS {ks:.4} over {KS_LIMIT}"));
    }
    Ok(finish(
        format!("KS(standardized counts, normal) = {ks:.4} within {KS_LIMIT}"),
        fails,
    ))
}

const C8_SEED: u64 = 0xBEEF05;
const C8_REPLICAS: u64 = 2_000;
const CORRELATION_TOLERANCE: f64 = 0.05;

fn c8_correlation_band() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let n = 10_000u64;
    let p = 0.05;
    let params = ModelParams::new(n, Prob::approx(p)?, 4, 3)?;
    let regime = classify_regimes(&params)?;
    if !matches!(regime.regime_pair, PairRegime::Intermediate { .. }) {
        fails.push(format!("expected the intermediate regime, got {:?}", regime.regime_pair));
    }
    let cov = exact_covariance_f64(n, 4, 3, p)?;
    let sd1 = exact_covariance_f64(n, 4, 4, p)?.sqrt();
    let sd2 = exact_covariance_f64(n, 3, 3, p)?.sqrt();
    let exact = cov / (sd1 * sd2);
    let [lo, hi] = regime.kappa_band;
    if !(lo - 1e-9 <= exact && exact <= hi + 1e-9) {
        fails.push(format!("exact correlation {exact:.4} outside kappa band [{lo:.4}, {hi:.4}]"));
    }
    let batch = run_experiment(&params, C8_REPLICAS, C8_SEED, 0)?;
    let z1: Vec<f64> = batch.rows.iter().map(|r| r.z1).collect();
    let z2: Vec<f64> = batch.rows.iter().map(|r| r.z2).collect();
    let emp = empirical_correlation(&z1, &z2)?;
    if (emp - exact).abs() > CORRELATION_TOLERANCE {
        fails.push(format!("empirical correlation {emp:.4} vs exact {exact:.4}"));
    }
    Ok(finish(
        format!(
            "correlation: empirical {emp:.4}, exact {exact:.4}, kappa band [{lo:.4}, {hi:.4}]"
        ),
        fails,
    ))
}

fn c9_moment_assembly() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let n = 12u64;
    let p = rat(1, 2);
    let d = exact_joint_distribution(n, 4, 3, &p)?;
    let var1 = d.variance(1);
    let var2 = d.variance(2);
    let units: &[(i64, i64)] = &[(1, 1), (2, -1), (1, 0), (0, 1)];
    let mut checked = 0u64;
    for k in 1..=4u32 {
        let us: &[(i64, i64)] = if k == 4 { &units[..2] } else { units };
        for &(a, b) in us {
            let u1 = rat(a, 1);
            let u2 = rat(b, 1);
            let jm = exact_joint_moment(n, 4, 3, &p, k, &u1, &u2)?;
            checked += 1;
            let tag = format!("(k, u1, u2) = ({k}, {a}, {b})");
            // the same assembly, fed by the exhaustive oracle
            let raw: Vec<Rat> = (0..=k)
                .map(|j| {
                    rat_int(binom(k as u64, j as u64) as i128) * d.central_mixed_moment(j, k - j)
                })
                .collect();
            let want = standardized_from_mixed(k, &u1, &u2, &raw, &var1, &var2);
            if jm.total != want {
                fails.push(format!("{tag}: moment disagrees with the oracle"));
            }
            let resum = |i: usize| &jm.dominant.coeffs[i] + &jm.residual.coeffs[i];
            if (0..4).any(|i| resum(i) != jm.total.coeffs[i]) {
                fails.push(format!("{tag}: dominant + residual != total"));
            }
            if k == 1 && !jm.total.coeffs.iter().all(|c| c.is_zero()) {
                fails.push(format!("{tag}: first centred moment must vanish"));
            }
        }
    }
    // unit-vector second moments are exactly 1
    for (u1, u2) in [(rat(1, 1), rat(0, 1)), (rat(0, 1), rat(1, 1))] {
        let jm = exact_joint_moment(n, 4, 3, &p, 2, &u1, &u2)?;
        if jm.total.as_exact() != Some(&Rat::one()) {
            fails.push("unit-direction second moment must be exactly 1".into());
        }
    }
    Ok(finish(
        format!("exact joint moments match the oracle on {checked} (k, u) combinations"),
        fails,
    ))
}

fn binom(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

const C10_SEED: u64 = 0xA11CE;

fn c10_exploration_laws() -> Result<(bool, String)> {
    let mut fails = Vec::new();
    let pool: Vec<Progression> = enumerate_aps(10, 4)?
        .into_iter()
        .chain(enumerate_aps(10, 3)?)
        .collect();
    let a = pool.len();
    let p_half = rat(1, 2);
    let p_third = rat(1, 3);
    let mut multisets = 0u64;
    let mut zero_law_checked = 0u64;

    // every multiset of up to 4 members over the full pool
    for k in 1..=4usize {
        let mut idx = vec![0usize; k];
        'outer: loop {
            let tuple: Vec<Progression> = idx.iter().map(|&i| pool[i]).collect();
            let r = explore(&tuple, 4, 3)?;
            multisets += 1;
            let zeros: Vec<usize> =
                r.t.iter().enumerate().filter(|(_, &t)| t == 0).map(|(i, _)| i).collect();
            if zeros != r.component_starts {
                fails.push(format!("{idx:?}: component starts {:?} vs zeros {zeros:?}", r.component_starts));
            }
            if r.component_count() != independent_component_count(&tuple) {
                fails.push(format!("{idx:?}: component count mismatch"));
            }
            if r.check.contributing && !r.check.component_budget {
                fails.push(format!("{idx:?}: contributing tuple exceeding the zero budget"));
            }
            if !r.check.contributing {
                zero_law_checked += 1;
                for p in [&p_half, &p_third] {
                    let e = centred_product_expectation(&tuple, p)?;
                    if !e.is_zero() {
                        fails.push(format!("{idx:?}: non-contributing tuple with E = {e} at p = {p}"));
                    }
                }
            }
            // advance the nondecreasing odometer
            let mut pos = k;
            loop {
                if pos == 0 {
                    break 'outer;
                }
                pos -= 1;
                if idx[pos] + 1 < a {
                    let v = idx[pos] + 1;
                    for slot in idx.iter_mut().skip(pos) {
                        *slot = v;
                    }
                    break;
                }
            }
        }
    }

    // exploration is invariant under every permutation of the listing
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(C10_SEED);
    let mut perm_cases = 0u64;
    for _ in 0..150 {
        let tuple: Vec<Progression> =
            (0..5).map(|_| pool[rng.random_range(0..a)]).collect();
        let base = explore(&tuple, 4, 3)?;
        let mut arrangement: Vec<usize> = (0..5).collect();
        permutations(&mut arrangement, 0, &mut |order| {
            let shuffled: Vec<Progression> = order.iter().map(|&i| tuple[i]).collect();
            perm_cases += 1;
            if explore(&shuffled, 4, 3).expect("explored above") != base {
                fails.push(format!("permutation changed the exploration of {tuple:?}"));
            }
        });
    }

    // seeded tuples over a larger ground set, walking the same laws
    let big: Vec<Progression> = enumerate_aps(60, 5)?
        .into_iter()
        .chain(enumerate_aps(60, 3)?)
        .collect();
    for _ in 0..1000 {
        let k = rng.random_range(2..=6usize);
        let tuple: Vec<Progression> =
            (0..k).map(|_| big[rng.random_range(0..big.len())]).collect();
        let r = explore(&tuple, 5, 3)?;
        let zeros = r.t.iter().filter(|&&t| t == 0).count();
        if zeros != r.component_count() {
            fails.push("zero entries must count components".into());
        }
        if !r.check.contributing {
            let e = centred_product_expectation(&tuple, &p_third)?;
            if !e.is_zero() {
                fails.push(format!("zero law broken on {tuple:?}"));
            }
        }
    }

    // matching combinatorics
    for (k, want) in [(2u32, 1usize), (4, 3), (6, 15)] {
        let ms = perfect_matchings(k);
        if ms.len() != want {
            fails.push(format!("{k} vertices: {} matchings vs {want}", ms.len()));
        }
        let odd_product: usize = (1..k as usize).step_by(2).product();
        if ms.len() != odd_product {
            fails.push(format!("matching count vs double factorial at k = {k}"));
        }
    }
    if dominant_moment(3, 1.0, 2.0, 0.5) != 0.0
        || (dominant_moment(2, 1.0, 1.0, 0.5) - 3.0).abs() > 1e-12
    {
        fails.push("dominant moment spot values".into());
    }
    Ok(finish(
        format!(
            "{multisets} multisets explored, zero law on {zero_law_checked} of them, {perm_cases} permutations invariant"
        ),
        fails,
    ))
}

/// Ground-truth component count by pairwise union-find, sharing no code
/// with the exploration walk.
fn independent_component_count(tuple: &[Progression]) -> usize {
    let k = tuple.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let meet = tuple[i]
                .elements()
                .any(|e| tuple[j].contains(e));
            if meet {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    (0..k).map(|i| find(&mut parent, i)).collect::<std::collections::HashSet<_>>().len()
}

/// Heap's algorithm, calling `visit` on each arrangement.
fn permutations(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion_is_rejected() {
        assert!(run_criterion(0).is_err());
        assert!(run_criterion(11).is_err());
    }

    #[test]
    fn report_line_shape() {
        let rep = CriterionReport {
            id: 3,
            name: "positional sum identities",
            passed: true,
            details: "ok".into(),
            seconds: 0.25,
        };
        let line = rep.line();
        assert!(line.contains("PASS") && line.contains("criterion  3"));
    }

    #[test]
    fn binom_small_values() {
        assert_eq!(binom(4, 2), 6);
        assert_eq!(binom(51, 4), 249_900);
        assert_eq!(binom(5, 0), 1);
    }

    #[test]
    fn permutation_helper_visits_all() {
        let mut items = vec![0, 1, 2];
        let mut seen = Vec::new();
        permutations(&mut items, 0, &mut |o| seen.push(o.to_vec()));
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn component_count_ground_truth() {
        let t = |s, d, l| Progression::new(s, d, l).unwrap();
        assert_eq!(independent_component_count(&[t(1, 1, 3), t(3, 1, 3), t(20, 1, 3)]), 2);
        assert_eq!(independent_component_count(&[t(1, 1, 3)]), 1);
        assert_eq!(independent_component_count(&[]), 0);
    }
}
