//! Brute-force oracles shared by the integration suites. Nothing here calls
//! into the compressed-domain code paths it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slpconv::corpus::{random_slp, CorpusParams};
use slpconv::{Rule, Slp, Trie, NodeId};

/// Recursive expansion of the rules.
pub fn expand(slp: &Slp) -> Vec<u64> {
    fn go(rules: &[Rule], i: usize, out: &mut Vec<u64>) {
        match rules[i - 1] {
            Rule::Terminal(c) => out.push(c),
            Rule::Binary(l, r) => {
                go(rules, l.0, out);
                go(rules, r.0, out);
            }
        }
    }
    let mut out = Vec::new();
    go(slp.rules(), slp.n(), &mut out);
    out
}

pub fn expand_var(slp: &Slp, var: usize) -> Vec<u64> {
    fn go(rules: &[Rule], i: usize, out: &mut Vec<u64>) {
        match rules[i - 1] {
            Rule::Terminal(c) => out.push(c),
            Rule::Binary(l, r) => {
                go(rules, l.0, out);
                go(rules, r.0, out);
            }
        }
    }
    let mut out = Vec::new();
    go(slp.rules(), var, &mut out);
    out
}

/// Every derivation-tree node as (variable, start, length, depth).
pub fn derivation_nodes(slp: &Slp) -> Vec<(usize, u64, u64, usize)> {
    let mut out = Vec::new();
    let mut stack = vec![(slp.n(), 1u64, 0usize)];
    while let Some((var, start, depth)) = stack.pop() {
        let len = expand_var(slp, var).len() as u64;
        out.push((var, start, len, depth));
        if let Rule::Binary(l, r) = slp.rules()[var - 1] {
            let ll = expand_var(slp, l.0).len() as u64;
            stack.push((l.0, start, depth + 1));
            stack.push((r.0, start + ll, depth + 1));
        }
    }
    out
}

pub fn naive_conv(text: &[u64], pattern: &[u64]) -> Vec<i64> {
    if text.len() < pattern.len() {
        return Vec::new();
    }
    (0..=text.len() - pattern.len())
        .map(|i| {
            let mut acc: i128 = 0;
            for j in 0..pattern.len() {
                acc += text[i + j] as i128 * pattern[j] as i128;
            }
            acc as i64
        })
        .collect()
}

pub fn naive_hamming(text: &[u64], pattern: &[u64]) -> Vec<i64> {
    if text.len() < pattern.len() {
        return Vec::new();
    }
    (0..=text.len() - pattern.len())
        .map(|i| (0..pattern.len()).filter(|&j| text[i + j] != pattern[j]).count() as i64)
        .collect()
}

/// 1-based positions where the pattern matches, 0 being a wildcard.
pub fn naive_wildcard(text: &[u64], pattern: &[u64]) -> Vec<u64> {
    if text.len() < pattern.len() {
        return Vec::new();
    }
    (0..=text.len() - pattern.len())
        .filter(|&i| (0..pattern.len()).all(|j| pattern[j] == 0 || pattern[j] == text[i + j]))
        .map(|i| i as u64 + 1)
        .collect()
}

pub fn distinct_grams(text: &[u64], m: usize) -> BTreeSet<Vec<u64>> {
    if text.len() < m {
        return BTreeSet::new();
    }
    text.windows(m).map(<[u64]>::to_vec).collect()
}

/// Dot product of the pattern with the last m characters above `v`,
/// found by walking parent links.
pub fn naive_node_value(trie: &Trie, v: NodeId, pattern: &[u64]) -> i64 {
    let mut chars = Vec::new();
    let mut node = v;
    while chars.len() < pattern.len() && node != 0 {
        chars.push(trie.node(node).code);
        node = trie.node(node).parent;
    }
    chars.reverse();
    chars.iter().zip(pattern).map(|(&a, &b)| a as i64 * b as i64).sum()
}

/// The deterministic random corpus: `count` grammars with n <= 60, sigma <= 4,
/// N <= 5000.
pub fn corpus(seed: u64, count: usize) -> Vec<Slp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let params = CorpusParams {
                max_rules: 60,
                sigma: rng.gen_range(1..=4),
                max_len: 5000,
            };
            random_slp(&mut rng, params)
        })
        .collect()
}

pub fn random_pattern(rng: &mut ChaCha8Rng, m: usize, max: u64) -> Vec<u64> {
    (0..m).map(|_| rng.gen_range(0..=max)).collect()
}
