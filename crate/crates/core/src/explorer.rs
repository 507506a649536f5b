//! Exploration of progression tuples and exact joint moments.
//!
//! `explore` replays the breadth-first discovery order of a tuple's
//! intersection graph and records the overlap type vector (t, s);
//! `validate_type_vectors` checks the structural constraints a type vector
//! must satisfy. `centred_product_expectation` is the exact expectation of
//! a product of centred indicators, and `exact_joint_moment` sums it over
//! all tuples to produce standardized joint moments of (X_ell1, X_ell2) in
//! an exact symbolic form.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::oracle::covariance_from_census;
use crate::census::census_fast;
use crate::progression::{enumerate_aps, Progression};
use crate::rational::{rat_int, rat_pow, rat_to_f64, Rat};

/// Validity flags of a type vector; the four checks are independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeVectorCheck {
    /// 0 <= t[j] <= s[j], and every s[j] is one of the two lengths.
    pub overlap_bounds: bool,
    /// t[j] = 0 only on a long member or where all of s[j..] are short.
    pub zero_pattern: bool,
    /// No zero overlap in two consecutive positions, and the last overlap
    /// is positive; tuples failing this have centred expectation zero.
    pub contributing: bool,
    /// At most floor(k/2) zero entries: every component of a contributing
    /// tuple has at least two members.
    pub component_budget: bool,
}

impl TypeVectorCheck {
    pub fn all_valid(&self) -> bool {
        self.overlap_bounds && self.zero_pattern && self.contributing && self.component_budget
    }
}

/// Outcome of exploring one tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationResult {
    /// Members in processing order.
    pub order: Vec<Progression>,
    /// t[j]: elements member j shares with the union of members 0..j.
    pub t: Vec<u32>,
    /// s[j]: length of member j.
    pub s: Vec<u32>,
    /// Positions opening a new connected component (exactly where t[j] = 0).
    pub component_starts: Vec<usize>,
    pub check: TypeVectorCheck,
}

impl ExplorationResult {
    pub fn component_count(&self) -> usize {
        self.component_starts.len()
    }
}

/// Deterministic breadth-first exploration of a tuple of progressions.
///
/// Members are ranked long-before-short, then by (diff, start); the walk
/// repeatedly takes the lowest-ranked active member, records its overlap
/// with everything already seen, and activates the inactive members it
/// intersects. When nothing is active the lowest-ranked unseen member
/// starts a new component. The result depends only on the multiset, not on
/// the order the caller lists it in.
pub fn explore(tuple: &[Progression], ell1: u32, ell2: u32) -> Result<ExplorationResult> {
    if ell2 < 3 {
        return Err(Error::Domain(format!("ell2 = {ell2} below 3")));
    }
    if ell1 < ell2 {
        return Err(Error::Domain(format!("ell1 = {ell1} below ell2 = {ell2}")));
    }
    for m in tuple {
        if m.length != ell1 && m.length != ell2 {
            return Err(Error::Domain(format!(
                "member length {} is neither ell1 = {ell1} nor ell2 = {ell2}",
                m.length
            )));
        }
    }
    let k = tuple.len();
    let mut rank: Vec<usize> = (0..k).collect();
    rank.sort_by_key(|&i| (Reverse(tuple[i].length), tuple[i].diff, tuple[i].start));

    let meets = pairwise_meets(tuple);
    let mut absorb = make_absorber(tuple);

    let mut consumed = vec![false; k];
    let mut active: BTreeSet<usize> = BTreeSet::new();
    let mut order = Vec::with_capacity(k);
    let mut t_vec = Vec::with_capacity(k);
    let mut s_vec = Vec::with_capacity(k);
    let mut component_starts = Vec::new();
    for step in 0..k {
        if active.is_empty() {
            let pos = (0..k).find(|&q| !consumed[q]).expect("unseen member exists");
            consumed[pos] = true;
            active.insert(pos);
        }
        let pos = *active.iter().next().expect("active set nonempty");
        active.remove(&pos);
        let idx = rank[pos];
        let t = absorb(idx);
        if t == 0 {
            component_starts.push(step);
        }
        t_vec.push(t);
        s_vec.push(tuple[idx].length);
        order.push(tuple[idx]);
        for (q, &r) in rank.iter().enumerate() {
            if !consumed[q] && meets[idx * k + r] {
                consumed[q] = true;
                active.insert(q);
            }
        }
    }
    let check = validate_type_vectors(&t_vec, &s_vec, ell1, ell2)?;
    Ok(ExplorationResult { order, t: t_vec, s: s_vec, component_starts, check })
}

/// Flat k*k table of pairwise element-set intersection (diagonal true).
fn pairwise_meets(tuple: &[Progression]) -> Vec<bool> {
    let k = tuple.len();
    let mut meets = vec![false; k * k];
    for i in 0..k {
        meets[i * k + i] = true;
        for j in (i + 1)..k {
            let m = progressions_meet(&tuple[i], &tuple[j]);
            meets[i * k + j] = m;
            meets[j * k + i] = m;
        }
    }
    meets
}

/// Whether two progressions share an element (sorted-merge walk).
pub fn progressions_meet(a: &Progression, b: &Progression) -> bool {
    let mut x = a.start;
    let mut y = b.start;
    let (ea, eb) = (a.last(), b.last());
    loop {
        if x == y {
            return true;
        }
        if x < y {
            if x == ea {
                return false;
            }
            x += a.diff;
            if x > ea {
                return false;
            }
        } else {
            if y == eb {
                return false;
            }
            y += b.diff;
            if y > eb {
                return false;
            }
        }
    }
}

/// Closure computing |T_idx ∩ union-so-far|, then merging T_idx in.
/// Tuples confined to [128] run on machine words; anything else falls back
/// to a hash set.
fn make_absorber(tuple: &[Progression]) -> Box<dyn FnMut(usize) -> u32 + '_> {
    let max_elem = tuple.iter().map(|t| t.last()).max().unwrap_or(0);
    if max_elem <= 128 {
        let masks: Vec<u128> = tuple
            .iter()
            .map(|t| t.elements().fold(0u128, |m, e| m | (1u128 << (e - 1))))
            .collect();
        let mut union: u128 = 0;
        Box::new(move |idx| {
            let t = (masks[idx] & union).count_ones();
            union |= masks[idx];
            t
        })
    } else {
        let mut union: HashSet<u64> = HashSet::new();
        Box::new(move |idx| {
            let mut t = 0;
            for e in tuple[idx].elements() {
                if !union.insert(e) {
                    t += 1;
                }
            }
            t
        })
    }
}

/// Checks the structural constraints on a type vector (t, s) against the
/// length pair (ell1, ell2), ell2 <= ell1.
pub fn validate_type_vectors(t: &[u32], s: &[u32], ell1: u32, ell2: u32) -> Result<TypeVectorCheck> {
    if ell2 < 3 || ell1 < ell2 {
        return Err(Error::Domain(format!("invalid length pair ({ell1}, {ell2})")));
    }
    if t.len() != s.len() {
        return Err(Error::Domain(format!(
            "type vectors of different lengths: {} vs {}",
            t.len(),
            s.len()
        )));
    }
    let k = t.len();
    let overlap_bounds = t
        .iter()
        .zip(s)
        .all(|(&tj, &sj)| tj <= sj && (sj == ell1 || sj == ell2));
    let mut zero_pattern = true;
    for j in 0..k {
        if t[j] == 0 && s[j] != ell1 && !s[j..].iter().all(|&x| x == ell2) {
            zero_pattern = false;
        }
    }
    let contributing = k == 0
        || (t[k - 1] > 0 && t.windows(2).all(|w| w[0] > 0 || w[1] > 0));
    let zeros = t.iter().filter(|&&x| x == 0).count();
    let component_budget = zeros <= k / 2;
    Ok(TypeVectorCheck { overlap_bounds, zero_pattern, contributing, component_budget })
}

/// Largest tuple accepted by the inclusion-exclusion expectation.
pub const MAX_CENTRED_TUPLE: usize = 12;

/// E prod_i (1{T_i ⊆ [n]_p} - p^(s_i)), exactly.
///
/// Expanding the product, the subset R of factors contributing their
/// centring constant gives
///   sum_R (-1)^|R| p^(sum_{i in R} s_i) p^|union_{i not in R} T_i| .
pub fn centred_product_expectation(tuple: &[Progression], p: &Rat) -> Result<Rat> {
    let k = tuple.len();
    if k > MAX_CENTRED_TUPLE {
        return Err(Error::Resource(format!(
            "tuple of {k} factors exceeds the inclusion-exclusion limit {MAX_CENTRED_TUPLE}"
        )));
    }
    if p.is_negative() || p > &Rat::one() {
        return Err(Error::Domain("probability outside [0, 1]".into()));
    }
    if k == 0 {
        return Ok(Rat::one());
    }
    // compress elements so sets become bitmask words
    let mut elems: Vec<u64> = tuple.iter().flat_map(|t| t.elements()).collect();
    elems.sort_unstable();
    elems.dedup();
    let words = elems.len().div_ceil(64);
    let id = |e: u64| elems.binary_search(&e).expect("element present");
    let sets: Vec<Vec<u64>> = tuple
        .iter()
        .map(|t| {
            let mut m = vec![0u64; words];
            for e in t.elements() {
                let b = id(e);
                m[b / 64] |= 1u64 << (b % 64);
            }
            m
        })
        .collect();
    let s_exp: Vec<u64> = tuple.iter().map(|t| t.length as u64).collect();
    let s_total: u64 = s_exp.iter().sum();

    // per-subset union popcounts and centred exponents by subset DP
    let full = 1usize << k;
    let mut union_mask: Vec<Vec<u64>> = vec![vec![0u64; words]; full];
    let mut union_pop = vec![0u64; full];
    let mut s_sum = vec![0u64; full];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut m = union_mask[rest].clone();
        for (w, sw) in m.iter_mut().zip(&sets[low]) {
            *w |= sw;
        }
        union_pop[mask] = m.iter().map(|w| w.count_ones() as u64).sum();
        s_sum[mask] = s_sum[rest] + s_exp[low];
        union_mask[mask] = m;
    }

    // group signs by exponent before touching big rationals
    let mut coeff: HashMap<u64, i64> = HashMap::new();
    for r_mask in 0..full {
        let rest = (full - 1) ^ r_mask;
        let e = s_sum[r_mask] + union_pop[rest];
        let sign = if (r_mask.count_ones() & 1) == 0 { 1 } else { -1 };
        *coeff.entry(e).or_insert(0) += sign;
    }
    let mut powers = Vec::with_capacity(s_total as usize + 1);
    let mut acc = Rat::one();
    powers.push(acc.clone());
    for _ in 0..s_total {
        acc *= p;
        powers.push(acc.clone());
    }
    let mut total = Rat::zero();
    for (e, c) in coeff {
        if c != 0 {
            total += rat_int(c as i128) * &powers[e as usize];
        }
    }
    Ok(total)
}

/// A standardized moment in the exact form
///   c0 + c1/sigma1 + c2/sigma2 + c3/(sigma1 sigma2)
/// with sigma_i = sqrt(var_i); the coefficients and variances are rational,
/// so equality of two moments is decidable exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizedMoment {
    pub coeffs: [Rat; 4],
    pub var1: Rat,
    pub var2: Rat,
}

impl StandardizedMoment {
    pub fn zero(var1: Rat, var2: Rat) -> Self {
        StandardizedMoment {
            coeffs: [Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()],
            var1,
            var2,
        }
    }

    pub fn as_f64(&self) -> f64 {
        let s1 = rat_to_f64(&self.var1).sqrt();
        let s2 = rat_to_f64(&self.var2).sqrt();
        rat_to_f64(&self.coeffs[0])
            + rat_to_f64(&self.coeffs[1]) / s1
            + rat_to_f64(&self.coeffs[2]) / s2
            + rat_to_f64(&self.coeffs[3]) / (s1 * s2)
    }

    /// The rational value, when no odd sigma power is left.
    pub fn as_exact(&self) -> Option<&Rat> {
        if self.coeffs[1].is_zero() && self.coeffs[2].is_zero() && self.coeffs[3].is_zero() {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn sub(&self, other: &StandardizedMoment) -> StandardizedMoment {
        debug_assert_eq!(self.var1, other.var1);
        debug_assert_eq!(self.var2, other.var2);
        StandardizedMoment {
            coeffs: [
                &self.coeffs[0] - &other.coeffs[0],
                &self.coeffs[1] - &other.coeffs[1],
                &self.coeffs[2] - &other.coeffs[2],
                &self.coeffs[3] - &other.coeffs[3],
            ],
            var1: self.var1.clone(),
            var2: self.var2.clone(),
        }
    }
}

/// Builds a standardized moment from the raw mixed sums
/// raw[j] = sum over ordered tuples with j long slots of E prod (centred),
/// dividing slot count j by sigma1 and k - j by sigma2.
pub fn standardized_from_mixed(
    k: u32,
    u1: &Rat,
    u2: &Rat,
    raw: &[Rat],
    var1: &Rat,
    var2: &Rat,
) -> StandardizedMoment {
    let mut out = StandardizedMoment::zero(var1.clone(), var2.clone());
    for j in 0..=k {
        let m = &raw[j as usize];
        if m.is_zero() {
            continue;
        }
        let term = rat_pow(u1, j) * rat_pow(u2, k - j) * m
            / (rat_pow(var1, j / 2) * rat_pow(var2, (k - j) / 2));
        let cell = (j % 2 + 2 * ((k - j) % 2)) as usize;
        out.coeffs[cell] += term;
    }
    out
}

/// Joint-moment computation output: the exact moment, its dominant
/// (perfect-matching) part, the residual, and tuple tallies per class.
#[derive(Clone, Debug)]
pub struct JointMomentResult {
    pub n: u64,
    pub ell1: u32,
    pub ell2: u32,
    pub k: u32,
    pub u1: Rat,
    pub u2: Rat,
    pub total: StandardizedMoment,
    pub dominant: StandardizedMoment,
    pub residual: StandardizedMoment,
    /// Ordered tuples whose intersection graph is a perfect matching.
    pub matching_tuples: u64,
    /// Ordered tuples with no isolated member (nonzero expectation possible).
    pub contributing_tuples: u64,
    pub enumerated_multisets: u64,
}

/// Default ceiling on enumerated multisets for `exact_joint_moment`.
pub const DEFAULT_MOMENT_BUDGET: u64 = 30_000_000;

/// E[(u1 Xt1/sigma1 + u2 Xt2/sigma2)^k] with Xti the centred counts,
/// by exhaustive enumeration of k-multisets of progressions.
///
/// The expectation of a centred product factors over the connected
/// components of the tuple's intersection graph, and any multiset with an
/// isolated member vanishes; component values are memoized.
pub fn exact_joint_moment(
    n: u64,
    ell1: u32,
    ell2: u32,
    p: &Rat,
    k: u32,
    u1: &Rat,
    u2: &Rat,
) -> Result<JointMomentResult> {
    exact_joint_moment_with_budget(n, ell1, ell2, p, k, u1, u2, DEFAULT_MOMENT_BUDGET)
}

#[allow(clippy::too_many_arguments)]
pub fn exact_joint_moment_with_budget(
    n: u64,
    ell1: u32,
    ell2: u32,
    p: &Rat,
    k: u32,
    u1: &Rat,
    u2: &Rat,
    budget: u64,
) -> Result<JointMomentResult> {
    if ell2 < 3 || ell1 < ell2 || (ell1 as u64) > n {
        return Err(Error::Domain(format!("invalid parameters (n, ell1, ell2) = ({n}, {ell1}, {ell2})")));
    }
    if p <= &Rat::zero() || p >= &Rat::one() {
        return Err(Error::Domain("need 0 < p < 1 for standardized moments".into()));
    }
    if k == 0 {
        return Err(Error::Domain("moment order k must be at least 1".into()));
    }
    if k as usize > MAX_CENTRED_TUPLE {
        return Err(Error::Resource(format!(
            "moment order {k} exceeds the inclusion-exclusion limit {MAX_CENTRED_TUPLE}"
        )));
    }
    let var1 = covariance_from_census(&census_fast(n, ell1, ell1)?, p)?;
    let var2 = if ell2 == ell1 {
        var1.clone()
    } else {
        covariance_from_census(&census_fast(n, ell2, ell2)?, p)?
    };
    assert!(var1.is_positive() && var2.is_positive(), "variance must be positive for 0 < p < 1");

    let longs = enumerate_aps(n, ell1)?;
    let shorts = if ell2 == ell1 { Vec::new() } else { enumerate_aps(n, ell2)? };
    let n_long = longs.len();
    let pool: Vec<Progression> = longs.into_iter().chain(shorts).collect();
    let a = pool.len() as u64;
    let multisets = binomial_u128(a + k as u64 - 1, k as u64)
        .ok_or_else(|| Error::Overflow("multiset count exceeds 128-bit range".into()))?;
    if multisets > budget as u128 {
        return Err(Error::Resource(format!(
            "exact_joint_moment(n = {n}, k = {k}) needs {multisets} multisets, over the budget of \
             {budget}; lower n or k, or raise the budget"
        )));
    }

    let meets = pairwise_meets(&pool);
    let mut memo: HashMap<Vec<u32>, Rat> = HashMap::new();
    let mut raw = vec![Rat::zero(); k as usize + 1];
    let mut raw_dom = vec![Rat::zero(); k as usize + 1];
    let mut matching_tuples = 0u64;
    let mut contributing_tuples = 0u64;
    let mut enumerated = 0u64;

    let kk = k as usize;
    let mut idx = vec![0usize; kk];
    let factorial_k: u64 = (1..=k as u64).product();
    let mut support: Vec<(usize, u32)> = Vec::with_capacity(kk);
    'outer: loop {
        enumerated += 1;
        // multiset support with multiplicities
        support.clear();
        for &i in &idx {
            match support.last_mut() {
                Some((j, m)) if *j == i => *m += 1,
                _ => support.push((i, 1)),
            }
        }
        // isolated member -> expectation zero
        let isolated = support.iter().any(|&(i, m)| {
            m == 1 && !support.iter().any(|&(j, _)| j != i && meets[i * pool.len() + j])
        });
        if !isolated {
            let orderings = orderings_count(factorial_k, &support);
            // connected components among distinct members
            let comps = components(&support, &meets, pool.len());
            let mut value = Rat::one();
            for comp in &comps {
                let key: Vec<u32> = comp
                    .iter()
                    .flat_map(|&si| {
                        let (i, m) = support[si];
                        std::iter::repeat(i as u32).take(m as usize)
                    })
                    .collect();
                let v = match memo.get(&key) {
                    Some(v) => v.clone(),
                    None => {
                        let members: Vec<Progression> =
                            key.iter().map(|&i| pool[i as usize]).collect();
                        let v = centred_product_expectation(&members, p)?;
                        memo.insert(key, v.clone());
                        v
                    }
                };
                value *= v;
            }
            let j_long: u32 = support
                .iter()
                .filter(|&&(i, _)| i < n_long)
                .map(|&(_, m)| m)
                .sum();
            contributing_tuples += orderings;
            let weighted = rat_int(orderings as i128) * &value;
            raw[j_long as usize] += &weighted;
            // perfect matching: every slot has exactly one neighbor slot
            let matching = support.iter().all(|&(i, m)| {
                let mut deg = m - 1;
                for &(j, mj) in &support {
                    if j != i && meets[i * pool.len() + j] {
                        deg += mj;
                    }
                }
                deg == 1
            });
            if matching {
                matching_tuples += orderings;
                raw_dom[j_long as usize] += weighted;
            }
        }
        // next nondecreasing index tuple
        let mut pos = kk;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            if idx[pos] + 1 < pool.len() {
                let v = idx[pos] + 1;
                for slot in idx.iter_mut().skip(pos) {
                    *slot = v;
                }
                break;
            }
        }
    }

    let (raw, raw_dom) = if ell2 == ell1 {
        // one variable twice over: slots are unlabeled, so the sum over
        // label assignments contributes binomial(k, j) per mixed index
        let total: Rat = raw.iter().sum();
        let total_dom: Rat = raw_dom.iter().sum();
        let spread = |v: &Rat| -> Vec<Rat> {
            (0..=k)
                .map(|j| rat_int(binomial_u128(k as u64, j as u64).unwrap() as i128) * v)
                .collect()
        };
        (spread(&total), spread(&total_dom))
    } else {
        (raw, raw_dom)
    };

    let total = standardized_from_mixed(k, u1, u2, &raw, &var1, &var2);
    let dominant = standardized_from_mixed(k, u1, u2, &raw_dom, &var1, &var2);
    let residual = total.sub(&dominant);
    Ok(JointMomentResult {
        n,
        ell1,
        ell2,
        k,
        u1: u1.clone(),
        u2: u2.clone(),
        total,
        dominant,
        residual,
        matching_tuples,
        contributing_tuples,
        enumerated_multisets: enumerated,
    })
}

/// k! / prod(multiplicities!): the ordered tuples one multiset represents.
fn orderings_count(factorial_k: u64, support: &[(usize, u32)]) -> u64 {
    let mut denom = 1u64;
    for &(_, m) in support {
        for f in 2..=m as u64 {
            denom *= f;
        }
    }
    factorial_k / denom
}

/// Connected components of the support graph; vertices are indices into
/// `support`, edges are intersecting member pairs.
fn components(support: &[(usize, u32)], meets: &[bool], stride: usize) -> Vec<Vec<usize>> {
    let d = support.len();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..d {
        for b in (a + 1)..d {
            if meets[support[a].0 * stride + support[b].0] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut buckets: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..d {
        let r = find(&mut parent, v);
        buckets.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = buckets.into_values().collect();
    out.sort();
    out
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// (k-1)!! (u1^2 + u2^2 + 2 u1 u2 kappa)^(k/2) for even k, zero for odd:
/// the perfect-matching value of the k-th standardized moment.
pub fn dominant_moment(k: u32, u1: f64, u2: f64, kappa: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let base = u1 * u1 + u2 * u2 + 2.0 * u1 * u2 * kappa;
    let mut dfac = 1.0;
    let mut i = k as i64 - 1;
    while i > 1 {
        dfac *= i as f64;
        i -= 2;
    }
    dfac * base.powi((k / 2) as i32)
}

/// All perfect matchings of {0, .., k-1}, each a sorted list of pairs.
/// Built by always pairing the smallest free vertex, so each matching
/// appears exactly once; empty for odd k (and one empty matching for k = 0).
pub fn perfect_matchings(k: u32) -> Vec<Vec<(u32, u32)>> {
    if k % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut free: Vec<u32> = (0..k).collect();
    let mut current = Vec::new();
    fn rec(free: &mut Vec<u32>, current: &mut Vec<(u32, u32)>, out: &mut Vec<Vec<(u32, u32)>>) {
        if free.is_empty() {
            out.push(current.clone());
            return;
        }
        let a = free[0];
        for pick in 1..free.len() {
            let b = free[pick];
            let mut rest: Vec<u32> = free[1..].to_vec();
            rest.remove(pick - 1);
            current.push((a, b));
            rec(&mut rest, current, out);
            current.pop();
        }
    }
    rec(&mut free, &mut current, &mut out);
    out
}
