//! Exact integer convolution.
//!
//! Products are computed with number-theoretic transforms under three
//! 30-bit primes and recombined by Garner's method, so every output below
//! the configured bound is exact. Sliding (pattern-against-text) products
//! are evaluated block by block: each block covers `2m` text characters and
//! yields `m + 1` outputs, so the transformed length grows linearly in the
//! text length.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default per-value input bound B_in.
pub const DEFAULT_MAX_VALUE: u64 = 1 << 20;
/// Default exactness bound: `m * B_in^2` must stay below `2^62`.
pub const DEFAULT_BOUND_BITS: u32 = 62;
/// Kernels up to this length use the schoolbook loop.
pub const DEFAULT_SCHOOLBOOK_THRESHOLD: usize = 16;

const PRIMES: [u64; 3] = [998_244_353, 167_772_161, 469_762_049];
const GENERATOR: u64 = 3;
/// Largest power-of-two transform supported by all three primes.
const MAX_LOG: u32 = 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStrategy {
    /// Blocks of `2m` text characters per transform.
    Blocked,
    /// One transform over the whole text.
    Whole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvConfig {
    /// Largest admissible input value.
    pub max_value: u64,
    /// Outputs must stay below `2^bound_bits` (at most 62).
    pub bound_bits: u32,
    pub schoolbook_threshold: usize,
    pub blocks: BlockStrategy,
}

impl Default for ConvConfig {
    fn default() -> Self {
        ConvConfig {
            max_value: DEFAULT_MAX_VALUE,
            bound_bits: DEFAULT_BOUND_BITS,
            schoolbook_threshold: DEFAULT_SCHOOLBOOK_THRESHOLD,
            blocks: BlockStrategy::Blocked,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounters {
    /// Total text-side length (padding included) fed to sliding products.
    pub sliding_input: u64,
    /// Total length of all number-theoretic transforms performed.
    pub transformed: u64,
    /// Number of sliding products evaluated.
    pub sliding_calls: u64,
}

/// Convolution engine: a configuration plus work counters. Calls only
/// touch the atomic counters, so one engine can be shared across threads.
#[derive(Debug, Default)]
pub struct ConvEngine {
    config: ConvConfig,
    sliding_input: AtomicU64,
    transformed: AtomicU64,
    sliding_calls: AtomicU64,
}

impl ConvEngine {
    pub fn new(config: ConvConfig) -> Self {
        assert!(config.bound_bits <= 62, "bound_bits above 62 cannot be exact in i64");
        ConvEngine {
            config,
            ..Default::default()
        }
    }

    pub fn config(&self) -> &ConvConfig {
        &self.config
    }

    pub fn work(&self) -> WorkCounters {
        WorkCounters {
            sliding_input: self.sliding_input.load(Ordering::Relaxed),
            transformed: self.transformed.load(Ordering::Relaxed),
            sliding_calls: self.sliding_calls.load(Ordering::Relaxed),
        }
    }

    pub fn reset_work(&self) {
        self.sliding_input.store(0, Ordering::Relaxed);
        self.transformed.store(0, Ordering::Relaxed);
        self.sliding_calls.store(0, Ordering::Relaxed);
    }

    /// Rejects inputs whose products could leave the exact range.
    pub fn check_bound(&self, u: &[u64], v: &[u64]) -> Result<()> {
        let limit = self.config.max_value;
        let max_u = u.iter().copied().max().unwrap_or(0);
        let max_v = v.iter().copied().max().unwrap_or(0);
        if let Some(big) = [max_u, max_v].into_iter().find(|&x| x > limit) {
            return Err(Error::BoundExceeded(format!(
                "input value {big} exceeds the per-value bound {limit}"
            )));
        }
        let terms = u.len().min(v.len()) as u128;
        let worst = terms * max_u as u128 * max_v as u128;
        if worst >= 1u128 << self.config.bound_bits {
            return Err(Error::BoundExceeded(format!(
                "{terms} terms of magnitude {max_u} x {max_v} may reach 2^{}",
                self.config.bound_bits
            )));
        }
        Ok(())
    }

    /// Full linear convolution, `out[k] = sum_{i+j=k} u[i] v[j]`.
    pub fn convolve_full(&self, u: &[u64], v: &[u64]) -> Result<Vec<i64>> {
        if u.is_empty() || v.is_empty() {
            return Err(Error::Invalid("convolution operands must be non-empty".into()));
        }
        self.check_bound(u, v)?;
        if u.len().min(v.len()) <= self.config.schoolbook_threshold {
            return Ok(schoolbook_full(u, v));
        }
        let max_len = 1usize << MAX_LOG;
        if u.len() + v.len() - 1 <= max_len {
            return Ok(self.ntt_full(u, v));
        }
        // Split both operands so each piece pair fits one transform.
        let piece = max_len / 2;
        let mut out = vec![0i64; u.len() + v.len() - 1];
        for (a, uc) in u.chunks(piece).enumerate() {
            for (b, vc) in v.chunks(piece).enumerate() {
                let part = self.ntt_full(uc, vc);
                let base = a * piece + b * piece;
                for (o, x) in out[base..].iter_mut().zip(part) {
                    *o += x;
                }
            }
        }
        Ok(out)
    }

    /// Sliding dot products: `out[i] = sum_j pattern[j] * text[i + j]` for
    /// every alignment of the pattern fully inside the text.
    pub fn sliding_convolve(&self, text: &[u64], pattern: &[u64]) -> Result<Vec<i64>> {
        self.sliding_convolve_padded(text, pattern, 0)
    }

    /// Same as [`sliding_convolve`](Self::sliding_convolve) on the text with
    /// `left_pad` zeros prepended.
    pub fn sliding_convolve_padded(
        &self,
        text: &[u64],
        pattern: &[u64],
        left_pad: usize,
    ) -> Result<Vec<i64>> {
        let m = pattern.len();
        if m == 0 {
            return Err(Error::EmptyPattern);
        }
        let total = left_pad + text.len();
        if total < m {
            return Err(Error::Invalid(format!(
                "text length {total} is shorter than the pattern length {m}"
            )));
        }
        self.check_bound(text, pattern)?;
        self.sliding_input.fetch_add(total as u64, Ordering::Relaxed);
        self.sliding_calls.fetch_add(1, Ordering::Relaxed);

        let padded;
        let text: &[u64] = if left_pad == 0 {
            text
        } else {
            let mut buf = vec![0u64; total];
            buf[left_pad..].copy_from_slice(text);
            padded = buf;
            &padded
        };

        if m <= self.config.schoolbook_threshold {
            return Ok(schoolbook_sliding(text, pattern));
        }
        match self.config.blocks {
            BlockStrategy::Blocked if 2 * m <= 1 << MAX_LOG => {
                Ok(self.blocked_sliding(text, pattern))
            }
            _ => {
                let reversed: Vec<u64> = pattern.iter().rev().copied().collect();
                let full = self.convolve_full(text, &reversed)?;
                Ok(full[m - 1..text.len()].to_vec())
            }
        }
    }

    fn blocked_sliding(&self, text: &[u64], pattern: &[u64]) -> Vec<i64> {
        let m = pattern.len();
        let outputs = text.len() - m + 1;
        let size = (2 * m).next_power_of_two();
        let tables = tables();

        // Reversed pattern, transformed once per prime.
        let kernels: Vec<Vec<u64>> = (0..3)
            .map(|k| {
                let p = PRIMES[k];
                let mut a = vec![0u64; size];
                for (slot, &x) in a.iter_mut().zip(pattern.iter().rev()) {
                    *slot = x % p;
                }
                ntt(&mut a, &tables[k], false);
                a
            })
            .collect();

        // Each block of up to 2m characters yields m + 1 outputs. The
        // circular wrap only reaches indices below m - 1, which are unused.
        let step = m + 1;
        let mut out = Vec::with_capacity(outputs);
        let mut start = 0;
        while start < outputs {
            let block = &text[start..(start + 2 * m).min(text.len())];
            let produced = block.len() - m + 1;
            let mut residues = [Vec::new(), Vec::new(), Vec::new()];
            for k in 0..3 {
                let p = PRIMES[k];
                let mut a = vec![0u64; size];
                for (slot, &x) in a.iter_mut().zip(block) {
                    *slot = x % p;
                }
                ntt(&mut a, &tables[k], false);
                for (x, &y) in a.iter_mut().zip(&kernels[k]) {
                    *x = *x * y % p;
                }
                ntt(&mut a, &tables[k], true);
                residues[k] = a;
            }
            self.transformed
                .fetch_add(3 * size as u64, Ordering::Relaxed);
            for i in 0..produced {
                let idx = m - 1 + i;
                out.push(garner(residues[0][idx], residues[1][idx], residues[2][idx]));
            }
            start += step;
        }
        out
    }

    fn ntt_full(&self, u: &[u64], v: &[u64]) -> Vec<i64> {
        let len = u.len() + v.len() - 1;
        let size = len.next_power_of_two();
        let tables = tables();
        let mut residues = [Vec::new(), Vec::new(), Vec::new()];
        for k in 0..3 {
            let p = PRIMES[k];
            let mut a = vec![0u64; size];
            let mut b = vec![0u64; size];
            for (slot, &x) in a.iter_mut().zip(u) {
                *slot = x % p;
            }
            for (slot, &x) in b.iter_mut().zip(v) {
                *slot = x % p;
            }
            ntt(&mut a, &tables[k], false);
            ntt(&mut b, &tables[k], false);
            for (x, &y) in a.iter_mut().zip(&b) {
                *x = *x * y % p;
            }
            ntt(&mut a, &tables[k], true);
            residues[k] = a;
        }
        self.transformed
            .fetch_add(3 * size as u64, Ordering::Relaxed);
        (0..len)
            .map(|i| garner(residues[0][i], residues[1][i], residues[2][i]))
            .collect()
    }
}

/// Schoolbook full convolution in 128-bit accumulators.
pub fn schoolbook_full(u: &[u64], v: &[u64]) -> Vec<i64> {
    let mut out = vec![0i128; u.len() + v.len() - 1];
    for (i, &a) in u.iter().enumerate() {
        for (j, &b) in v.iter().enumerate() {
            out[i + j] += a as i128 * b as i128;
        }
    }
    out.into_iter().map(|x| x as i64).collect()
}

/// Schoolbook sliding dot products.
pub fn schoolbook_sliding(text: &[u64], pattern: &[u64]) -> Vec<i64> {
    text.windows(pattern.len())
        .map(|w| {
            w.iter()
                .zip(pattern)
                .map(|(&a, &b)| a as i128 * b as i128)
                .sum::<i128>() as i64
        })
        .collect()
}

struct PrimeTables {
    p: u64,
    /// `roots[s]` is a primitive `2^s`-th root of unity.
    roots: Vec<u64>,
    inv_roots: Vec<u64>,
}

fn tables() -> &'static [PrimeTables; 3] {
    static TABLES: OnceLock<[PrimeTables; 3]> = OnceLock::new();
    TABLES.get_or_init(|| {
        PRIMES.map(|p| {
            debug_assert_eq!((p - 1) % (1 << MAX_LOG), 0);
            let roots: Vec<u64> = (0..=MAX_LOG)
                .map(|s| pow_mod(GENERATOR, (p - 1) >> s, p))
                .collect();
            let inv_roots = roots.iter().map(|&w| pow_mod(w, p - 2, p)).collect();
            PrimeTables { p, roots, inv_roots }
        })
    })
}

const fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn ntt(a: &mut [u64], t: &PrimeTables, inverse: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let p = t.p;
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    let mut stage = 1;
    while len <= n {
        let w_len = if inverse { t.inv_roots[stage] } else { t.roots[stage] };
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            twiddles.push(w);
            w = w * w_len % p;
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((x, y), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let u = *x;
                let v = *y * w % p;
                *x = if u + v >= p { u + v - p } else { u + v };
                *y = if u >= v { u - v } else { u + p - v };
            }
        }
        len <<= 1;
        stage += 1;
    }
    if inverse {
        let n_inv = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = *x * n_inv % p;
        }
    }
}

/// Reconstructs the integer in `[0, p0 p1 p2)` from its residues. Callers
/// guarantee the true value lies below `2^62`.
fn garner(r0: u64, r1: u64, r2: u64) -> i64 {
    const P0: u64 = PRIMES[0];
    const P1: u64 = PRIMES[1];
    const P2: u64 = PRIMES[2];
    const INV_P0_MOD_P1: u64 = pow_mod(P0 % P1, P1 - 2, P1);
    const INV_P0P1_MOD_P2: u64 = pow_mod(P0 % P2 * (P1 % P2) % P2, P2 - 2, P2);
    let (p0, p1, p2) = (P0, P1, P2);
    let (inv_p0_mod_p1, inv_p0p1_mod_p2) = (INV_P0_MOD_P1, INV_P0P1_MOD_P2);
    let x1 = (r1 + p1 - r0 % p1) % p1 * inv_p0_mod_p1 % p1;
    let partial = (r0 + p0 * x1) as u128;
    let partial_mod_p2 = (partial % p2 as u128) as u64;
    let x2 = (r2 + p2 - partial_mod_p2) % p2 * inv_p0p1_mod_p2 % p2;
    let value = partial + (p0 as u128 * p1 as u128) * x2 as u128;
    value as i64
}
