//! Exact joint distribution of the two progression counts on small ground
//! sets, and exact covariance formulas valid for every n.
//!
//! The distribution route enumerates all 2^n subsets, so it is capped at
//! n = 24; it exists to check the analytic routes, which it shares no code
//! with. The covariance route only needs the pair census.

use std::io::Write as IoWrite;
use std::path::Path;

use num_traits::{One, Zero};

use crate::census::{census_fast, PairCensus};
use crate::error::{Error, Result};
use crate::progression::{count_aps, enumerate_aps};
use crate::rational::{rat_int, rat_pow, Rat};

/// Largest ground set the exhaustive oracle will enumerate.
pub const MAX_ORACLE_N: u64 = 24;

/// Exact joint law of (X_ell1, X_ell2) on {1, .., n} with density p.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub n: u64,
    pub ell1: u32,
    pub ell2: u32,
    pub p: Rat,
    /// Support points (x1, x2) with their exact probabilities; sorted.
    pub pmf: Vec<(u64, u64, Rat)>,
}

impl ExactDistribution {
    pub fn total_mass(&self) -> Rat {
        self.pmf.iter().map(|(_, _, q)| q).sum()
    }

    fn moment<F: Fn(u64, u64) -> Rat>(&self, f: F) -> Rat {
        self.pmf.iter().map(|(x1, x2, q)| f(*x1, *x2) * q).sum()
    }

    /// E X_i, i in {1, 2}.
    pub fn mean(&self, which: u8) -> Rat {
        self.moment(|x1, x2| rat_int(if which == 1 { x1 } else { x2 } as i128))
    }

    /// Var X_i, i in {1, 2}.
    pub fn variance(&self, which: u8) -> Rat {
        let m = self.mean(which);
        self.moment(|x1, x2| {
            let x = rat_int(if which == 1 { x1 } else { x2 } as i128);
            let d = x - &m;
            &d * &d
        })
    }

    pub fn covariance(&self) -> Rat {
        let m1 = self.mean(1);
        let m2 = self.mean(2);
        self.moment(|x1, x2| (rat_int(x1 as i128) - &m1) * (rat_int(x2 as i128) - &m2))
    }

    /// E (X1 - E X1)^j1 (X2 - E X2)^j2.
    pub fn central_mixed_moment(&self, j1: u32, j2: u32) -> Rat {
        let m1 = self.mean(1);
        let m2 = self.mean(2);
        self.moment(|x1, x2| {
            rat_pow(&(rat_int(x1 as i128) - &m1), j1) * rat_pow(&(rat_int(x2 as i128) - &m2), j2)
        })
    }

    /// Marginal law of X_i as sorted (value, probability) pairs.
    pub fn marginal(&self, which: u8) -> Vec<(u64, Rat)> {
        let mut acc: std::collections::BTreeMap<u64, Rat> = std::collections::BTreeMap::new();
        for (x1, x2, q) in &self.pmf {
            let x = if which == 1 { *x1 } else { *x2 };
            *acc.entry(x).or_insert_with(Rat::zero) += q;
        }
        acc.into_iter().collect()
    }

    /// Writes the pmf with exact rational probabilities.
    pub fn write_pmf_csv<W: IoWrite>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_ell1", "x_ell2", "probability"])?;
        for (x1, x2, q) in &self.pmf {
            w.write_record([x1.to_string(), x2.to_string(), q.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_pmf_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_pmf_csv(std::fs::File::create(path)?)
    }
}

/// Exhaustive joint distribution of the two counts.
///
/// Walks every subset of {1, .., n} once: the per-subset counts come from a
/// subset-sum (zeta) transform over the progression indicator masks, so the
/// cost is O(2^n n) words rather than O(2^n) progression scans. Subsets are
/// then folded into a (x1, x2, |S|) histogram and weighted rationally.
pub fn exact_joint_distribution(n: u64, ell1: u32, ell2: u32, p: &Rat) -> Result<ExactDistribution> {
    if ell2 < 3 || ell1 < ell2 || (ell1 as u64) > n {
        return Err(Error::Domain(format!(
            "invalid parameters (n, ell1, ell2) = ({n}, {ell1}, {ell2})"
        )));
    }
    if n > MAX_ORACLE_N {
        return Err(Error::Resource(format!(
            "exhaustive oracle needs 2^{n} subsets; n is capped at {MAX_ORACLE_N}"
        )));
    }
    if p < &Rat::zero() || p > &Rat::one() {
        return Err(Error::Domain("probability outside [0, 1]".into()));
    }
    let nb = n as usize;
    let full = 1usize << nb;

    let counts_per_subset = |ell: u32| -> Result<Vec<u16>> {
        let mut f = vec![0u16; full];
        for t in enumerate_aps(n, ell)? {
            let mask = t.elements().fold(0usize, |m, e| m | (1 << (e - 1)));
            f[mask] += 1;
        }
        for bit in 0..nb {
            let step = 1usize << bit;
            for s in 0..full {
                if s & step != 0 {
                    f[s] += f[s ^ step];
                }
            }
        }
        Ok(f)
    };
    let x1 = counts_per_subset(ell1)?;
    let x2 = if ell2 == ell1 { Vec::new() } else { counts_per_subset(ell2)? };
    let x2 = if ell2 == ell1 { &x1 } else { &x2 };

    let a1 = count_aps(n, ell1)? as usize;
    let a2 = count_aps(n, ell2)? as usize;
    let mut hist = vec![0u64; (a1 + 1) * (a2 + 1) * (nb + 1)];
    for s in 0..full {
        let idx = (x1[s] as usize * (a2 + 1) + x2[s] as usize) * (nb + 1) + s.count_ones() as usize;
        hist[idx] += 1;
    }

    // weight p^j (1-p)^(n-j) per popcount j
    let q = Rat::one() - p;
    let mut weight = Vec::with_capacity(nb + 1);
    for j in 0..=nb {
        weight.push(rat_pow(p, j as u32) * rat_pow(&q, (nb - j) as u32));
    }
    let mut pmf = Vec::new();
    for v1 in 0..=a1 {
        for v2 in 0..=a2 {
            let mut prob = Rat::zero();
            for (j, w) in weight.iter().enumerate() {
                let c = hist[(v1 * (a2 + 1) + v2) * (nb + 1) + j];
                if c != 0 {
                    prob += rat_int(c as i128) * w;
                }
            }
            if !prob.is_zero() {
                pmf.push((v1 as u64, v2 as u64, prob));
            }
        }
    }
    Ok(ExactDistribution { n, ell1, ell2, p: p.clone(), pmf })
}

/// Cov(X_ell, X_ell') from a pair census:
///   sum over r >= 1 of N_r (p^(ell + ell' - r) - p^(ell + ell')),
/// where N_r counts ordered pairs sharing exactly r elements. Disjoint
/// pairs are independent and drop out.
pub fn covariance_from_census(census: &PairCensus, p: &Rat) -> Result<Rat> {
    if p < &Rat::zero() || p > &Rat::one() {
        return Err(Error::Domain("probability outside [0, 1]".into()));
    }
    let le = census.ell + census.ell_prime;
    let base = rat_pow(p, le);
    let mut total = Rat::zero();
    for (r, &c) in census.counts.iter().enumerate().skip(1) {
        if c != 0 {
            total += rat_int(c) * (rat_pow(p, le - r as u32) - &base);
        }
    }
    Ok(total)
}

/// Floating-point twin of `covariance_from_census`.
pub fn covariance_from_census_f64(census: &PairCensus, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let le = (census.ell + census.ell_prime) as i32;
    let base = p.powi(le);
    let mut total = 0.0;
    for (r, &c) in census.counts.iter().enumerate().skip(1) {
        total += c as f64 * (p.powi(le - r as i32) - base);
    }
    Ok(total)
}

/// Cov(X_ell1, X_ell2) for arbitrary n, through the pair census.
pub fn exact_covariance(n: u64, ell1: u32, ell2: u32, p: &Rat) -> Result<Rat> {
    covariance_from_census(&census_fast(n, ell1, ell2)?, p)
}

/// Same covariance in f64, for standardizing simulations.
pub fn exact_covariance_f64(n: u64, ell1: u32, ell2: u32, p: f64) -> Result<f64> {
    covariance_from_census_f64(&census_fast(n, ell1, ell2)?, p)
}
