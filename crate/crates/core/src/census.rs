//! Ordered-pair census of progression intersections.
//!
//! For lengths ell >= ell', `counts[r]` is the number of ordered pairs
//! (T, T') of an ell-progression and an ell'-progression in {1, .., n} with
//! |T ∩ T'| = r. Two independent routes are provided: `census_bruteforce`
//! compares element sets pairwise and is the correctness oracle;
//! `census_fast` runs in roughly linear time and is the production route.
//! The two must agree exactly and the test suite holds them to that.

use std::cmp::{max, min};
use std::io::{Read, Write};

use num_integer::gcd;

use crate::error::{Error, Result};
use crate::progression::{check_count_domain, count_aps, max_diff};

/// Intersection-size profile of ordered progression pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCensus {
    pub n: u64,
    pub ell: u32,
    pub ell_prime: u32,
    /// counts[r], r in 0..=ell_prime.
    pub counts: Vec<i128>,
}

impl PairCensus {
    /// Pairs meeting in exactly one point.
    pub fn loose(&self) -> i128 {
        self.counts[1]
    }

    /// Pairs where the shorter progression is contained in the longer one.
    pub fn overlap(&self) -> i128 {
        self.counts[self.ell_prime as usize]
    }

    pub fn total(&self) -> i128 {
        self.counts.iter().sum()
    }

    /// Sum of r * counts[r]; equals `positional_sum(n, ell, ell_prime)`.
    pub fn weighted_sum(&self) -> i128 {
        self.counts
            .iter()
            .enumerate()
            .map(|(r, c)| r as i128 * c)
            .sum()
    }

    /// CSV rows `n,ell,ellPrime,r,count`, one per intersection size.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["n", "ell", "ellPrime", "r", "count"])?;
        for (r, c) in self.counts.iter().enumerate() {
            wtr.write_record([
                self.n.to_string(),
                self.ell.to_string(),
                self.ell_prime.to_string(),
                r.to_string(),
                c.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<PairCensus> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let head = rdr.headers()?.clone();
        if head.iter().collect::<Vec<_>>() != ["n", "ell", "ellPrime", "r", "count"] {
            return Err(Error::Domain(format!("unexpected census header {head:?}")));
        }
        let mut key: Option<(u64, u32, u32)> = None;
        let mut rows: Vec<(usize, i128)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<&str> {
                rec.get(i)
                    .ok_or_else(|| Error::Domain(format!("short census row {rec:?}")))
            };
            let parse_err = |what: &str| Error::Domain(format!("bad {what} in census row {rec:?}"));
            let n: u64 = field(0)?.parse().map_err(|_| parse_err("n"))?;
            let ell: u32 = field(1)?.parse().map_err(|_| parse_err("ell"))?;
            let ell_prime: u32 = field(2)?.parse().map_err(|_| parse_err("ellPrime"))?;
            let r: usize = field(3)?.parse().map_err(|_| parse_err("r"))?;
            let count: i128 = field(4)?.parse().map_err(|_| parse_err("count"))?;
            match key {
                None => key = Some((n, ell, ell_prime)),
                Some(k) if k != (n, ell, ell_prime) => {
                    return Err(Error::Domain("census rows mix parameter sets".into()))
                }
                _ => {}
            }
            rows.push((r, count));
        }
        let (n, ell, ell_prime) = key.ok_or_else(|| Error::Domain("empty census file".into()))?;
        let mut counts = vec![None; ell_prime as usize + 1];
        for (r, c) in rows {
            if r >= counts.len() {
                return Err(Error::Domain(format!("intersection size {r} exceeds ellPrime")));
            }
            if counts[r].replace(c).is_some() {
                return Err(Error::Domain(format!("duplicate census row for r = {r}")));
            }
        }
        let counts = counts
            .into_iter()
            .enumerate()
            .map(|(r, c)| c.ok_or_else(|| Error::Domain(format!("missing census row for r = {r}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PairCensus { n, ell, ell_prime, counts })
    }
}

pub(crate) fn check_pair_domain(n: u64, ell: u32, ell_prime: u32) -> Result<()> {
    if ell_prime < 3 {
        return Err(Error::Domain(format!("ell' = {ell_prime} below 3")));
    }
    if ell < ell_prime {
        return Err(Error::Domain(format!("ell = {ell} below ell' = {ell_prime}")));
    }
    check_count_domain(n, ell)
}

/// Default ceiling on pair comparisons for `census_bruteforce`.
pub const DEFAULT_PAIR_BUDGET: u64 = 100_000_000;

/// Element-set comparison census; the oracle route.
pub fn census_bruteforce(n: u64, ell: u32, ell_prime: u32) -> Result<PairCensus> {
    census_bruteforce_with_budget(n, ell, ell_prime, DEFAULT_PAIR_BUDGET)
}

pub fn census_bruteforce_with_budget(
    n: u64,
    ell: u32,
    ell_prime: u32,
    budget: u64,
) -> Result<PairCensus> {
    check_pair_domain(n, ell, ell_prime)?;
    let a1 = count_aps(n, ell)?;
    let a2 = count_aps(n, ell_prime)?;
    let pairs = a1
        .checked_mul(a2)
        .ok_or_else(|| Error::Overflow("pair count exceeds 128-bit range".into()))?;
    if pairs > budget as i128 {
        return Err(Error::Resource(format!(
            "census_bruteforce({n}, {ell}, {ell_prime}) needs {pairs} pair comparisons, \
             over the budget of {budget}; use census_fast"
        )));
    }
    let masks1 = ap_masks(n, ell);
    let masks2 = if ell_prime == ell { None } else { Some(ap_masks(n, ell_prime)) };
    let second = masks2.as_ref().unwrap_or(&masks1);
    let mut counts = vec![0i128; ell_prime as usize + 1];
    for a in &masks1 {
        for b in second {
            let mut r = 0u32;
            for (x, y) in a.iter().zip(b) {
                r += (x & y).count_ones();
            }
            counts[r as usize] += 1;
        }
    }
    Ok(PairCensus { n, ell, ell_prime, counts })
}

/// Element bitmasks of every ell-progression in [n]; bit m-1 is element m.
fn ap_masks(n: u64, ell: u32) -> Vec<Vec<u64>> {
    let words = (n as usize).div_ceil(64);
    let span = ell as u64 - 1;
    let mut out = Vec::new();
    for diff in 1..=max_diff(n, ell) {
        for start in 1..=(n - span * diff) {
            let mut mask = vec![0u64; words];
            for k in 0..ell as u64 {
                let m = start + k * diff - 1;
                mask[(m / 64) as usize] |= 1u64 << (m % 64);
            }
            out.push(mask);
        }
    }
    out
}

/// Closed-form census.
///
/// Pairs meeting in r >= 2 points have consecutive shared points exactly
/// lcm(delta, delta') apart, so both delta / gcd <= ell' - 1 and
/// delta' / gcd <= ell - 1; only order n such blocks exist and each is
/// classified by the alignment of its first shared point in O(ell * ell').
/// The r = 1 count then follows from the positional sum, which equals
/// sum over r of r * counts[r], and the r = 0 count from the pair total.
pub fn census_fast(n: u64, ell: u32, ell_prime: u32) -> Result<PairCensus> {
    check_pair_domain(n, ell, ell_prime)?;
    let s = positional_sum(n, ell, ell_prime)?;
    let nn = n as i128;
    let l = ell as i128;
    let lp = ell_prime as i128;
    let dmax = max_diff(n, ell) as i128;
    let dpmax = max_diff(n, ell_prime) as i128;
    let mut counts = vec![0i128; ell_prime as usize + 1];
    for u in 1..=(lp - 1) {
        for v in 1..=(l - 1) {
            if gcd(u, v) != 1 {
                continue;
            }
            // delta = g u <= dmax, delta' = g v <= dpmax
            let gmax = min(dmax / u, dpmax / v);
            for g in 1..=gmax {
                block_shared(nn, l, lp, g * u, g * v, v, u, &mut counts);
            }
        }
    }
    let weighted: i128 = counts
        .iter()
        .enumerate()
        .map(|(r, c)| r as i128 * c)
        .sum();
    let singles = s - weighted;
    assert!(singles >= 0, "positional sum below multi-point mass");
    counts[1] = singles;
    let total = count_aps(n, ell)?
        .checked_mul(count_aps(n, ell_prime)?)
        .ok_or_else(|| Error::Overflow("pair count exceeds 128-bit range".into()))?;
    let meeting: i128 = counts[1..].iter().sum();
    counts[0] = total - meeting;
    assert!(counts[0] >= 0, "pair total below meeting mass");
    Ok(PairCensus { n, ell, ell_prime, counts })
}

/// Accumulates the r >= 2 pairs of one (delta, delta') block.
///
/// q = delta' / g, qp = delta / g. Positions i in T and j in T' (0-based)
/// of the first shared point satisfy i < q or j < qp; later shared points
/// sit q (resp. qp) steps further along. Placements for an alignment:
/// n - max(i delta, j delta') - max((l-1-i) delta, (l'-1-j) delta'), when
/// positive. Shared points: min((l-1-i)/q, (l'-1-j)/qp) + 1.
#[allow(clippy::too_many_arguments)]
fn block_shared(n: i128, l: i128, lp: i128, d: i128, dp: i128, q: i128, qp: i128, counts: &mut [i128]) {
    for i in 0..l {
        let ai = (l - 1 - i) / q + 1;
        if ai < 2 {
            break; // nonincreasing in i, nothing with r >= 2 remains
        }
        for j in 0..lp {
            let bj = (lp - 1 - j) / qp + 1;
            if bj < 2 {
                break;
            }
            if i >= q && j >= qp {
                continue; // not the first shared point
            }
            let head = max(i * d, j * dp);
            let tail = max((l - 1 - i) * d, (lp - 1 - j) * dp);
            let c = n - head - tail;
            if c > 0 {
                counts[min(ai, bj) as usize] += c;
            }
        }
    }
}

/// Sum over positions (iota, iota') and differences (delta, delta') of the
/// placements with a shared point at those positions:
///
///   sum (n - max((iota-1) delta, (iota'-1) delta')
///          - max((ell-iota) delta, (ell'-iota') delta'))_+
///
/// Equals sum over r of r * counts[r] and also the inner product of the
/// point-degree sequences. Never enumerates pairs; for each
/// (iota, iota', delta') the sum over delta is a few arithmetic series.
pub fn positional_sum(n: u64, ell: u32, ell_prime: u32) -> Result<i128> {
    check_pair_domain(n, ell, ell_prime)?;
    let overflow =
        || Error::Overflow(format!("positional_sum({n}, {ell}, {ell_prime}) exceeds 128-bit range"));
    let nn = n as i128;
    let l = ell as i128;
    let lp = ell_prime as i128;
    let dmax = max_diff(n, ell) as i128;
    let dpmax = max_diff(n, ell_prime) as i128;
    let mut total: i128 = 0;
    for iota in 1..=l {
        let a_arm = iota - 1;
        let b_arm = l - iota;
        for iota_p in 1..=lp {
            let ap_arm = iota_p - 1;
            let bp_arm = lp - iota_p;
            for dp in 1..=dpmax {
                let c1 = ap_arm * dp;
                let c2 = bp_arm * dp;
                // f(delta) = n - max(a_arm delta, c1) - max(b_arm delta, c2):
                // nonincreasing, linear between the two branch switches.
                let t1 = if a_arm == 0 { dmax + 1 } else { max(1, ceil_div(c1, a_arm)) };
                let t2 = if b_arm == 0 { dmax + 1 } else { max(1, ceil_div(c2, b_arm)) };
                let mut cuts = [1, min(t1, dmax + 1), min(t2, dmax + 1), dmax + 1];
                cuts.sort_unstable();
                for w in 0..3 {
                    let lo = cuts[w];
                    let hi = cuts[w + 1] - 1;
                    if lo > hi {
                        continue;
                    }
                    let mut slope = 0;
                    let mut konst = nn;
                    if lo >= t1 {
                        slope += a_arm;
                    } else {
                        konst -= c1;
                    }
                    if lo >= t2 {
                        slope += b_arm;
                    } else {
                        konst -= c2;
                    }
                    let piece = series_sum(konst, slope, lo, hi).ok_or_else(overflow)?;
                    total = total.checked_add(piece).ok_or_else(overflow)?;
                }
            }
        }
    }
    Ok(total)
}

/// Sum of max(0, konst - slope * delta) over integer delta in [lo, hi],
/// slope >= 0. None on 128-bit overflow.
fn series_sum(konst: i128, slope: i128, lo: i128, hi: i128) -> Option<i128> {
    if slope == 0 {
        if konst <= 0 {
            return Some(0);
        }
        return konst.checked_mul(hi - lo + 1);
    }
    let cut = (konst - 1).div_euclid(slope); // last delta with a positive term
    let h = min(hi, cut);
    if h < lo {
        return Some(0);
    }
    let m = h - lo + 1;
    let delta_sum = (lo + h).checked_mul(m)? / 2;
    konst
        .checked_mul(m)?
        .checked_sub(slope.checked_mul(delta_sum)?)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    (a + b - 1) / b
}

/// Ordered pairs where the ell'-progression is contained in the
/// ell-progression: a progression is determined by its element set, so the
/// inner count is the number of ell'-progressions in a length-ell index set.
pub fn overlap_count(n: u64, ell: u32, ell_prime: u32) -> Result<i128> {
    check_pair_domain(n, ell, ell_prime)?;
    let outer = count_aps(n, ell)?;
    let inner = count_aps(ell as u64, ell_prime)?;
    outer
        .checked_mul(inner)
        .ok_or_else(|| Error::Overflow("overlap count exceeds 128-bit range".into()))
}

/// Number of ell-progressions in [n] containing the point m, split over the
/// position iota the point occupies: the difference is capped by the room
/// on each side, (m-1)/(iota-1) and (n-m)/(ell-iota).
pub fn point_degree(n: u64, ell: u32, m: u64) -> Result<i128> {
    check_count_domain(n, ell)?;
    if m < 1 || m > n {
        return Err(Error::Domain(format!("point {m} outside [1, {n}]")));
    }
    let left = (m - 1) as i128;
    let right = (n - m) as i128;
    let l = ell as i128;
    let mut total = 0i128;
    for iota in 1..=l {
        let by_left = if iota > 1 { left / (iota - 1) } else { i128::MAX };
        let by_right = if iota < l { right / (l - iota) } else { i128::MAX };
        total += min(by_left, by_right);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal quadruple sum; kept only as a test oracle.
    fn positional_sum_reference(n: u64, ell: u32, ell_prime: u32) -> i128 {
        let nn = n as i128;
        let l = ell as i128;
        let lp = ell_prime as i128;
        let mut total = 0i128;
        for iota in 1..=l {
            for iota_p in 1..=lp {
                for d in 1..=max_diff(n, ell) as i128 {
                    for dp in 1..=max_diff(n, ell_prime) as i128 {
                        let head = max((iota - 1) * d, (iota_p - 1) * dp);
                        let tail = max((l - iota) * d, (lp - iota_p) * dp);
                        total += max(0, nn - head - tail);
                    }
                }
            }
        }
        total
    }

    #[test]
    fn frozen_census_vectors() {
        let cases: [(u64, u32, u32, &[i128]); 8] = [
            (5, 3, 3, &[0, 4, 8, 4]),
            (9, 3, 3, &[58, 140, 42, 16]),
            (12, 4, 3, &[136, 266, 102, 36]),
            (12, 4, 4, &[66, 100, 116, 24, 18]),
            (10, 5, 3, &[22, 48, 58, 32]),
            (20, 3, 3, &[4744, 2992, 274, 90]),
            (15, 5, 4, &[143, 182, 209, 54, 42]),
            (9, 4, 3, &[22, 54, 50, 18]),
        ];
        for (n, l, lp, want) in cases {
            assert_eq!(census_fast(n, l, lp).unwrap().counts, want, "fast {n} {l} {lp}");
            assert_eq!(census_bruteforce(n, l, lp).unwrap().counts, want, "brute {n} {l} {lp}");
        }
    }

    #[test]
    fn fast_matches_bruteforce_grid() {
        for n in 3..=28u64 {
            for l in 3..=6u32 {
                for lp in 3..=l {
                    if l as u64 > n {
                        continue;
                    }
                    let fast = census_fast(n, l, lp).unwrap();
                    let brute = census_bruteforce(n, l, lp).unwrap();
                    assert_eq!(fast, brute, "n={n} l={l} lp={lp}");
                }
            }
        }
    }

    #[test]
    fn partition_and_diagonal() {
        for (n, l, lp) in [(17, 4, 3), (23, 5, 5), (30, 3, 3)] {
            let c = census_fast(n, l, lp).unwrap();
            let a1 = count_aps(n, l).unwrap();
            let a2 = count_aps(n, lp).unwrap();
            assert_eq!(c.total(), a1 * a2);
            assert_eq!(c.overlap(), overlap_count(n, l, lp).unwrap());
            if l == lp {
                // equal sets happen exactly on the diagonal
                assert_eq!(c.overlap(), a1 * count_aps(l as u64, lp).unwrap());
            }
        }
    }

    #[test]
    fn positional_sum_values_and_reference() {
        assert_eq!(positional_sum(5, 3, 3).unwrap(), 32);
        assert_eq!(positional_sum(9, 3, 3).unwrap(), 272);
        for n in 3..=25u64 {
            for l in 3..=5u32 {
                for lp in 3..=l {
                    if l as u64 > n {
                        continue;
                    }
                    assert_eq!(
                        positional_sum(n, l, lp).unwrap(),
                        positional_sum_reference(n, l, lp),
                        "n={n} l={l} lp={lp}"
                    );
                }
            }
        }
    }

    #[test]
    fn weighted_sum_is_positional_sum() {
        for (n, l, lp) in [(25, 3, 3), (25, 5, 3), (40, 4, 4), (33, 6, 5)] {
            let c = census_fast(n, l, lp).unwrap();
            assert_eq!(c.weighted_sum(), positional_sum(n, l, lp).unwrap());
        }
    }

    #[test]
    fn point_degree_identities() {
        assert_eq!(point_degree(9, 3, 5).unwrap(), 8);
        assert_eq!(point_degree(9, 3, 1).unwrap(), 4);
        for (n, l) in [(9u64, 3u32), (20, 4), (17, 5)] {
            let total: i128 = (1..=n).map(|m| point_degree(n, l, m).unwrap()).sum();
            assert_eq!(total, l as i128 * count_aps(n, l).unwrap());
        }
        // positional sum as the inner product of point-degree sequences
        for (n, l, lp) in [(9u64, 3u32, 3u32), (20, 4, 3), (17, 5, 4)] {
            let dot: i128 = (1..=n)
                .map(|m| point_degree(n, l, m).unwrap() * point_degree(n, lp, m).unwrap())
                .sum();
            assert_eq!(dot, positional_sum(n, l, lp).unwrap());
        }
    }

    #[test]
    fn bruteforce_budget_refusal() {
        let err = census_bruteforce_with_budget(300, 3, 3, 1000).unwrap_err();
        assert_eq!(err.kind(), "resource");
        assert!(err.to_string().contains("census_fast"));
    }

    #[test]
    fn overflow_detected() {
        let err = positional_sum(u64::MAX, 3, 3).unwrap_err();
        assert_eq!(err.kind(), "overflow");
        let err = census_fast(u64::MAX, 3, 3).unwrap_err();
        assert_eq!(err.kind(), "overflow");
    }

    #[test]
    fn domain_checks() {
        assert!(census_fast(10, 3, 4).is_err());
        assert!(census_fast(10, 2, 2).is_err());
        assert!(census_fast(4, 5, 3).is_err());
        assert!(point_degree(9, 3, 0).is_err());
        assert!(point_degree(9, 3, 10).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = census_fast(12, 4, 3).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,ell,ellPrime,r,count\n"));
        let back = PairCensus::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn csv_rejects_damage() {
        let c = census_fast(9, 3, 3).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let missing: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(PairCensus::read_csv(missing.as_bytes()).is_err());
        let bad_header = text.replacen("ellPrime", "ellp", 1);
        assert!(PairCensus::read_csv(bad_header.as_bytes()).is_err());
    }
}
