//! Simulation of Bernoulli random subsets and exact-moment standardization.
//!
//! Sampling is deterministic given (seed, n, p): each replica derives its
//! own stream seed from the master seed via a splitmix64 step, so a batch
//! is reproducible bit for bit regardless of how many worker threads carve
//! it up.

use std::io::{Read as IoRead, Write as IoWrite};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::census::census_fast;
use crate::error::{Error, Result};
use crate::oracle::covariance_from_census_f64;
use crate::progression::{count_aps, enumerate_aps, ModelParams};

/// Bit-set over {1, .., n}; element m lives at bit m - 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetMask {
    n: u64,
    words: Vec<u64>,
    ones: u64,
}

impl SubsetMask {
    pub fn new(n: u64) -> SubsetMask {
        SubsetMask { n, words: vec![0; (n as usize).div_ceil(64)], ones: 0 }
    }

    pub fn from_elements(n: u64, elements: &[u64]) -> Result<SubsetMask> {
        let mut mask = SubsetMask::new(n);
        for &e in elements {
            if e < 1 || e > n {
                return Err(Error::Domain(format!("element {e} outside 1..={n}")));
            }
            if mask.contains(e) {
                return Err(Error::Domain(format!("duplicate element {e}")));
            }
            mask.insert(e);
        }
        Ok(mask)
    }

    pub fn insert(&mut self, e: u64) {
        debug_assert!(e >= 1 && e <= self.n);
        let b = (e - 1) as usize;
        let w = &mut self.words[b / 64];
        if *w & (1 << (b % 64)) == 0 {
            *w |= 1 << (b % 64);
            self.ones += 1;
        }
    }

    pub fn contains(&self, e: u64) -> bool {
        if e < 1 || e > self.n {
            return false;
        }
        let b = (e - 1) as usize;
        self.words[b / 64] & (1 << (b % 64)) != 0
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn ones(&self) -> u64 {
        self.ones
    }

    pub fn elements(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.ones as usize);
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as u64;
                out.push(wi as u64 * 64 + b + 1);
                bits &= bits - 1;
            }
        }
        out
    }
}

/// One splitmix64 output step; used to spread a master seed over replicas.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stream seed of one replica. Replicas of one master seed are decorrelated
/// but fully determined; the mapping never changes.
pub fn replica_seed(master: u64, replica: u64) -> u64 {
    splitmix64(master ^ replica.wrapping_mul(0x9E3779B97F4A7C15))
}

/// Draws a p-Bernoulli subset of {1, .., n}: one uniform f64 per element,
/// in ascending element order, from a ChaCha8 stream seeded with `seed`.
pub fn sample_subset(n: u64, p: f64, seed: u64) -> Result<SubsetMask> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = SubsetMask::new(n);
    for e in 1..=n {
        if rng.random::<f64>() < p {
            mask.insert(e);
        }
    }
    Ok(mask)
}

/// Number of ell-term progressions contained in the subset, exactly.
///
/// Two routes, picked by density: sparse extends each element pair to a
/// full progression, dense walks residue chains per difference and counts
/// runs. Both are exact; `count_naive` is the reference they are tested
/// against.
pub fn count_in_subset(mask: &SubsetMask, ell: u32) -> Result<u64> {
    if ell < 3 {
        return Err(Error::Domain(format!("length {ell} below 3")));
    }
    let n = mask.n();
    let m = ell as u64;
    let max_d = if n >= m { (n - 1) / (m - 1) } else { 0 };
    if max_d == 0 {
        return Ok(0);
    }
    let s = mask.ones() as u128;
    // sparse touches |S|^2 pairs, dense touches n per difference
    if s * s > (n as u128) * (max_d as u128) {
        Ok(count_dense(mask, m, max_d))
    } else {
        Ok(count_sparse(mask, m))
    }
}

fn count_dense(mask: &SubsetMask, m: u64, max_d: u64) -> u64 {
    let n = mask.n();
    let mut total = 0u64;
    for d in 1..=max_d {
        for r in 1..=d {
            let mut run = 0u64;
            let mut e = r;
            while e <= n {
                if mask.contains(e) {
                    run += 1;
                    if run >= m {
                        total += 1;
                    }
                } else {
                    run = 0;
                }
                match e.checked_add(d) {
                    Some(next) => e = next,
                    None => break,
                }
            }
        }
    }
    total
}

fn count_sparse(mask: &SubsetMask, m: u64) -> u64 {
    let elems = mask.elements();
    let n = mask.n();
    let mut total = 0u64;
    for i in 0..elems.len() {
        let a = elems[i];
        // pairs (a, a + d) head at most one progression each
        let d_limit = (n - a) / (m - 1);
        for &b in &elems[i + 1..] {
            let d = b - a;
            if d > d_limit {
                break;
            }
            let mut e = b;
            let mut ok = true;
            for _ in 2..m {
                e += d;
                if !mask.contains(e) {
                    ok = false;
                    break;
                }
            }
            if ok {
                total += 1;
            }
        }
    }
    total
}

/// Reference count by testing every progression; test oracle only.
pub fn count_naive(mask: &SubsetMask, ell: u32) -> Result<u64> {
    if ell < 3 {
        return Err(Error::Domain(format!("length {ell} below 3")));
    }
    let n = mask.n();
    if n < ell as u64 {
        return Ok(0);
    }
    let mut total = 0u64;
    for t in enumerate_aps(n, ell)? {
        if t.elements().all(|e| mask.contains(e)) {
            total += 1;
        }
    }
    Ok(total)
}

/// One replica's counts and standardized counts.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRow {
    pub replica: u64,
    pub x1: u64,
    pub x2: u64,
    pub z1: f64,
    pub z2: f64,
}

/// A full simulation batch, with the exact standardization constants used.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub n: u64,
    pub ell1: u32,
    pub ell2: u32,
    pub p: f64,
    pub seed: u64,
    pub mean1: f64,
    pub sd1: f64,
    pub mean2: f64,
    pub sd2: f64,
    pub rows: Vec<SampleRow>,
}

const BATCH_HEADER: [&str; 5] = ["replica", "x_ell1", "x_ell2", "std_x_ell1", "std_x_ell2"];

impl SampleBatch {
    pub fn write_csv<W: IoWrite>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(BATCH_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.replica.to_string(),
                r.x1.to_string(),
                r.x2.to_string(),
                format!("{:?}", r.z1),
                format!("{:?}", r.z2),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Reads rows written by `SampleBatch::write_csv`.
pub fn read_batch_csv<R: IoRead>(input: R) -> Result<Vec<SampleRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != BATCH_HEADER {
        return Err(Error::Domain(format!("unexpected batch header {header:?}")));
    }
    let mut rows = Vec::new();
    let bad = |f: &str| Error::Domain(format!("bad batch field {f:?}"));
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Domain(format!("batch row of width {}", rec.len())));
        }
        rows.push(SampleRow {
            replica: rec[0].parse().map_err(|_| bad(&rec[0]))?,
            x1: rec[1].parse().map_err(|_| bad(&rec[1]))?,
            x2: rec[2].parse().map_err(|_| bad(&rec[2]))?,
            z1: rec[3].parse().map_err(|_| bad(&rec[3]))?,
            z2: rec[4].parse().map_err(|_| bad(&rec[4]))?,
        });
    }
    Ok(rows)
}

/// Runs `replicas` independent replicas of the subset experiment and
/// standardizes both counts by their exact mean and standard deviation
/// (from the pair census, not from sample estimates).
///
/// `threads = 0` uses the global rayon pool; any other value builds a
/// dedicated pool of that size. The output is identical either way.
pub fn run_experiment(
    params: &ModelParams,
    replicas: u64,
    seed: u64,
    threads: usize,
) -> Result<SampleBatch> {
    let n = params.n;
    let (ell1, ell2) = (params.ell1, params.ell2);
    let p = params.p.as_f64();

    let moments = |ell: u32| -> Result<(f64, f64)> {
        let a = count_aps(n, ell)? as f64;
        let mean = a * p.powi(ell as i32);
        let var = covariance_from_census_f64(&census_fast(n, ell, ell)?, p)?;
        Ok((mean, var.max(0.0).sqrt()))
    };
    let (mean1, sd1) = moments(ell1)?;
    let (mean2, sd2) = if ell2 == ell1 { (mean1, sd1) } else { moments(ell2)? };
    if replicas > 0 && (sd1 == 0.0 || sd2 == 0.0) {
        return Err(Error::Domain(format!(
            "standard deviation vanishes at p = {p}; standardized counts are undefined"
        )));
    }

    let one = |i: u64| -> Result<SampleRow> {
        let mask = sample_subset(n, p, replica_seed(seed, i))?;
        let x1 = count_in_subset(&mask, ell1)?;
        let x2 = if ell2 == ell1 { x1 } else { count_in_subset(&mask, ell2)? };
        Ok(SampleRow {
            replica: i,
            x1,
            x2,
            z1: (x1 as f64 - mean1) / sd1,
            z2: (x2 as f64 - mean2) / sd2,
        })
    };
    let rows: Result<Vec<SampleRow>> = if threads == 0 {
        (0..replicas).into_par_iter().map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
        pool.install(|| (0..replicas).into_par_iter().map(one).collect())
    };
    Ok(SampleBatch {
        n,
        ell1,
        ell2,
        p,
        seed,
        mean1,
        sd1,
        mean2,
        sd2,
        rows: rows?,
    })
}
