//! Arithmetic progressions in {1, .., n}: domain types, enumeration, and
//! the exact closed-form count.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rational::{rat_int, rat_pow, Num, Prob};

/// The progression start, start + diff, .., start + (length - 1) * diff.
///
/// `start >= 1` and `diff >= 1`; degenerate progressions (diff 0) are not
/// representable on purpose. Ordering is by (diff, start, length), the
/// canonical order used everywhere an order matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Progression {
    pub start: u64,
    pub diff: u64,
    pub length: u32,
}

impl Progression {
    pub fn new(start: u64, diff: u64, length: u32) -> Result<Self> {
        if start == 0 {
            return Err(Error::Domain("start must be at least 1".into()));
        }
        if diff == 0 {
            return Err(Error::Domain("diff must be at least 1".into()));
        }
        if length < 3 {
            return Err(Error::Domain(format!("length {length} below 3")));
        }
        Ok(Progression { start, diff, length })
    }

    /// i-th element, 1-based.
    pub fn element(&self, i: u32) -> u64 {
        self.start + (i as u64 - 1) * self.diff
    }

    pub fn last(&self) -> u64 {
        self.element(self.length)
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.length as u64).map(move |i| self.start + i * self.diff)
    }

    /// Whether every element lies in {1, .., n}.
    pub fn fits(&self, n: u64) -> bool {
        self.last() <= n
    }

    pub fn contains(&self, m: u64) -> bool {
        if m < self.start || m > self.last() {
            return false;
        }
        (m - self.start) % self.diff == 0
    }
}

impl Ord for Progression {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.diff, self.start, self.length).cmp(&(other.diff, other.start, other.length))
    }
}

impl PartialOrd for Progression {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Model parameters for the pair (X_ell1, X_ell2) on [n]_p, with
/// 3 <= ell2 <= ell1 <= n.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub n: u64,
    pub p: Prob,
    pub ell1: u32,
    pub ell2: u32,
}

impl ModelParams {
    pub fn new(n: u64, p: Prob, ell1: u32, ell2: u32) -> Result<Self> {
        if ell2 < 3 {
            return Err(Error::Domain(format!("ell2 = {ell2} below 3")));
        }
        if ell1 < ell2 {
            return Err(Error::Domain(format!("ell1 = {ell1} below ell2 = {ell2}")));
        }
        if (ell1 as u64) > n {
            return Err(Error::Domain(format!("ell1 = {ell1} exceeds n = {n}")));
        }
        Ok(ModelParams { n, p, ell1, ell2 })
    }
}

pub(crate) fn check_count_domain(n: u64, ell: u32) -> Result<()> {
    if ell < 3 {
        return Err(Error::Domain(format!("ell = {ell} below 3")));
    }
    if (ell as u64) > n {
        return Err(Error::Domain(format!("ell = {ell} exceeds n = {n}")));
    }
    Ok(())
}

/// Largest common difference an ell-term progression in [n] can have.
pub(crate) fn max_diff(n: u64, ell: u32) -> u64 {
    (n - 1) / (ell as u64 - 1)
}

/// Exact number of ell-term progressions in {1, .., n}:
/// D*n - (ell - 1)*D*(D + 1)/2 with D = floor((n - 1)/(ell - 1)).
///
/// All arithmetic is checked 128-bit; exceeding that range is an error
/// rather than a wrap.
pub fn count_aps(n: u64, ell: u32) -> Result<i128> {
    check_count_domain(n, ell)?;
    let overflow = || Error::Overflow(format!("count_aps({n}, {ell}) exceeds 128-bit range"));
    let d = max_diff(n, ell) as i128;
    let dn = d.checked_mul(n as i128).ok_or_else(overflow)?;
    let pairs = d
        .checked_mul(d.checked_add(1).ok_or_else(overflow)?)
        .ok_or_else(overflow)?
        / 2;
    let sub = (ell as i128 - 1).checked_mul(pairs).ok_or_else(overflow)?;
    dn.checked_sub(sub).ok_or_else(overflow)
}

/// Every ell-term progression contained in {1, .., n}, in canonical
/// (diff, start) order.
pub fn enumerate_aps(n: u64, ell: u32) -> Result<Vec<Progression>> {
    check_count_domain(n, ell)?;
    let total = count_aps(n, ell)?;
    let mut out = Vec::with_capacity(total as usize);
    let span = ell as u64 - 1;
    for diff in 1..=max_diff(n, ell) {
        for start in 1..=(n - span * diff) {
            out.push(Progression { start, diff, length: ell });
        }
    }
    Ok(out)
}

/// E(X_ell) = count_aps(n, ell) * p^ell; exact when p is exact.
pub fn expected_count(n: u64, ell: u32, p: &Prob) -> Result<Num> {
    let a = count_aps(n, ell)?;
    Ok(match p {
        Prob::Exact(r) => Num::Exact(rat_int(a) * rat_pow(r, ell)),
        Prob::Approx(x) => Num::Approx(a as f64 * x.powi(ell as i32)),
    })
}
