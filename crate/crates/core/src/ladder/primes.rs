//! Prime counting by an odd-only sieve of Eratosthenes.

use crate::error::{Error, Result};

/// π(x) for every x up to `limit`.
///
/// Bit i of the sieve stands for the odd number 2i + 1. Each 64-bit word
/// carries the number of primes in all earlier words, so a lookup is one
/// prefix read plus one popcount.
#[derive(Debug, Clone)]
pub struct PrimePiTable {
    limit: u64,
    words: Vec<u64>,
    prefix: Vec<u32>,
}

impl PrimePiTable {
    pub fn new(limit: u64) -> Self {
        let n_odd = (limit / 2 + 1) as usize;
        let n_words = n_odd.div_ceil(64);
        let mut words = vec![u64::MAX; n_words];
        // 1 is not prime; trailing bits past the limit are cleared below.
        words[0] &= !1;
        let mut i = 1usize;
        loop {
            let p = 2 * i + 1;
            if p * p > limit as usize {
                break;
            }
            if words[i / 64] >> (i % 64) & 1 == 1 {
                let mut j = p * p / 2;
                while j < n_odd {
                    words[j / 64] &= !(1u64 << (j % 64));
                    j += p;
                }
            }
            i += 1;
        }
        // Clear indices whose odd number exceeds the limit.
        let last = if limit >= 1 { ((limit - 1) / 2) as usize } else { 0 };
        for idx in last + 1..n_words * 64 {
            words[idx / 64] &= !(1u64 << (idx % 64));
        }
        if limit < 1 {
            words[0] = 0;
        }
        let mut prefix = Vec::with_capacity(n_words);
        let mut acc = 0u32;
        for w in &words {
            prefix.push(acc);
            acc += w.count_ones();
        }
        Self { limit, words, prefix }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// π(x); x must not exceed the sieve limit.
    pub fn count(&self, x: u64) -> Result<u64> {
        if x > self.limit {
            return Err(Error::Range(format!(
                "pi_count({x}) exceeds the sieve limit {}",
                self.limit
            )));
        }
        if x < 2 {
            return Ok(0);
        }
        let idx = ((x - 1) / 2) as usize;
        let (w, b) = (idx / 64, idx % 64);
        let mask = if b == 63 { u64::MAX } else { (1u64 << (b + 1)) - 1 };
        Ok(1 + self.prefix[w] as u64 + (self.words[w] & mask).count_ones() as u64)
    }

    /// π at a real height, π(⌊x⌋).
    pub fn count_real(&self, x: f64) -> Result<u64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("pi requires finite x >= 0, got {x}")));
        }
        self.count(x.floor() as u64)
    }
}

/// π(x) looked up in `table`.
pub fn pi_count(x: u64, table: &PrimePiTable) -> Result<u64> {
    table.count(x)
}
