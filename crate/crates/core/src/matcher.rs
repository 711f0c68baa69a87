//! Matching problems that reduce to convolution, evaluated on the compact
//! representations: Hamming distance through per-symbol indicator channels
//! and exact matching with don't-care positions through the
//! `sum p s (p - s)^2` identity.

use std::sync::Arc;

use crate::conv::ConvEngine;
use crate::error::{Error, Result};
use crate::repr::{ConvRepr, Mode};
use crate::slp::{Rule, Slp, Var};
use crate::window_trie::WindowTrie;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub weight: i64,
    pub repr: ConvRepr,
}

/// A score that is an affine combination of convolution channels:
/// `score(i) = bias + sum_c weight_c * C_c[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRepr {
    m: usize,
    bias: i64,
    channels: Vec<Channel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    AtMost(i64),
    Equal(i64),
    AtLeast(i64),
}

impl Predicate {
    pub fn holds(self, score: i64) -> bool {
        match self {
            Predicate::AtMost(k) => score <= k,
            Predicate::Equal(k) => score == k,
            Predicate::AtLeast(k) => score >= k,
        }
    }
}

/// Sorted, duplicate-free 1-based text positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OccurrenceSet(pub Vec<u64>);

impl OccurrenceSet {
    pub fn positions(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One decimal position per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(8 * self.0.len());
        for p in &self.0 {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }
}

fn shared_window(slp: &Slp, m: usize, mode: Mode) -> Result<Option<Arc<WindowTrie>>> {
    if mode == Mode::Trie && m >= 2 && m as u64 <= slp.text_len() {
        Ok(Some(Arc::new(WindowTrie::build(slp, m)?)))
    } else {
        Ok(None)
    }
}

/// Hamming distance: one indicator channel per distinct pattern symbol,
/// `hamming(i) = m - sum_a C_a[i]`.
pub fn hamming_repr(slp: &Slp, pattern: &[u64], mode: Mode, engine: &ConvEngine) -> Result<ScoreRepr> {
    let m = pattern.len();
    if m == 0 {
        return Err(Error::EmptyPattern);
    }
    if pattern.contains(&0) {
        return Err(Error::Invalid("Hamming patterns use codes >= 1".into()));
    }
    let mut symbols = pattern.to_vec();
    symbols.sort_unstable();
    symbols.dedup();
    let window = shared_window(slp, m, mode)?;
    let channels = symbols
        .into_iter()
        .map(|a| {
            let indicator: Vec<u64> = pattern.iter().map(|&c| u64::from(c == a)).collect();
            let map = move |c: u64| u64::from(c == a);
            ConvRepr::build_mapped(slp, &indicator, mode, window.clone(), &map, engine)
                .map(|repr| Channel { weight: -1, repr })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreRepr {
        m,
        bias: m as i64,
        channels,
    })
}

/// Exact matching with don't cares (pattern code 0). The score
/// `sum_j p_j s_j (p_j - s_j)^2` is zero exactly at matching positions; it
/// expands into three channels pairing `p^3, p^2, p` with `s, s^2, s^3`.
pub fn dontcare_repr(slp: &Slp, pattern: &[u64], mode: Mode, engine: &ConvEngine) -> Result<ScoreRepr> {
    let m = pattern.len();
    if m == 0 {
        return Err(Error::EmptyPattern);
    }
    let limit = engine.config().max_value;
    let max_code = pattern
        .iter()
        .chain(slp.alphabet())
        .copied()
        .max()
        .unwrap_or(0);
    if (max_code as u128).pow(3) > limit as u128 {
        return Err(Error::BoundExceeded(format!(
            "code {max_code} cubed exceeds the per-value bound {limit}"
        )));
    }
    let window = shared_window(slp, m, mode)?;
    let parts: [(u32, u32, i64); 3] = [(3, 1, 1), (2, 2, -2), (1, 3, 1)];
    let channels = parts
        .into_iter()
        .map(|(pat_pow, text_pow, weight)| {
            let weights: Vec<u64> = pattern.iter().map(|&p| p.pow(pat_pow)).collect();
            let map = move |c: u64| c.pow(text_pow);
            ConvRepr::build_mapped(slp, &weights, mode, window.clone(), &map, engine)
                .map(|repr| Channel { weight, repr })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreRepr { m, bias: 0, channels })
}

impl ScoreRepr {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn positions(&self, slp: &Slp) -> u64 {
        (slp.text_len() + 1).saturating_sub(self.m as u64)
    }

    /// The combined score at text position `i`.
    pub fn score(&self, slp: &Slp, i: u64) -> Result<i64> {
        let mut total = self.bias;
        for ch in &self.channels {
            total += ch.weight * ch.repr.query(slp, i)?;
        }
        if self.channels.is_empty() && (i == 0 || i > self.positions(slp)) {
            return Err(Error::OutOfRange {
                what: "position",
                value: i,
                lo: 1,
                hi: self.positions(slp),
            });
        }
        Ok(total)
    }

    pub fn materialize(&self, slp: &Slp, cap: u64) -> Result<Vec<i64>> {
        let count = self.positions(slp);
        if count > cap {
            return Err(Error::CapExceeded { len: count, cap });
        }
        (1..=count).map(|i| self.score(slp, i)).collect()
    }

    /// All positions whose score satisfies `predicate`. Scans the stored
    /// tables once and expands each qualifying window through every
    /// occurrence of its stabbing variable.
    pub fn report_occurrences(&self, slp: &Slp, predicate: Predicate) -> Result<OccurrenceSet> {
        let m = self.m as u64;
        if slp.text_len() < m {
            return Ok(OccurrenceSet::default());
        }
        let mut out = Vec::new();
        let Some(first) = self.channels.first() else {
            // A constant score: either every position or none.
            if predicate.holds(self.bias) {
                out.extend(1..=self.positions(slp));
            }
            return Ok(OccurrenceSet(out));
        };
        match &first.repr {
            ConvRepr::Basic(_) if self.m == 1 => {
                for var in slp.vars() {
                    if !matches!(slp.rule(var), Rule::Terminal(_)) {
                        continue;
                    }
                    let mut score = self.bias;
                    for ch in &self.channels {
                        let ConvRepr::Basic(b) = &ch.repr else {
                            return Err(mixed());
                        };
                        score += ch.weight * b.terminal_value(var).ok_or_else(mixed)?;
                    }
                    if predicate.holds(score) {
                        slp.for_each_occurrence(var, |s| out.push(s));
                    }
                }
            }
            ConvRepr::Basic(layout) => {
                for (var, table) in layout.tables() {
                    for p in 0..table.values.len() {
                        let mut score = self.bias;
                        for ch in &self.channels {
                            let ConvRepr::Basic(b) = &ch.repr else {
                                return Err(mixed());
                            };
                            let t = b.table(var).ok_or_else(mixed)?;
                            score += ch.weight * t.values[p];
                        }
                        if predicate.holds(score) {
                            let rel = table.t_start_offset + p as u64;
                            slp.for_each_occurrence(var, |s| out.push(s + rel));
                        }
                    }
                }
            }
            ConvRepr::Trie(layout) => {
                let window = layout.window();
                for ch in &self.channels {
                    match &ch.repr {
                        ConvRepr::Trie(t) if Arc::ptr_eq(t.window(), window) || t.window() == window => {}
                        _ => return Err(mixed()),
                    }
                }
                for var in slp.vars() {
                    let Rule::Binary(l, _) = slp.rule(var) else {
                        continue;
                    };
                    let prefix_len = slp.len(l).min(m - 1);
                    let offset = slp.len(l) - prefix_len;
                    for (k, &node) in window.ext(var).iter().enumerate() {
                        let q = k as u64 + 1;
                        if prefix_len + q < m {
                            continue;
                        }
                        let mut score = self.bias;
                        for ch in &self.channels {
                            let ConvRepr::Trie(t) = &ch.repr else {
                                return Err(mixed());
                            };
                            let v = t.table().get(node).ok_or_else(|| {
                                Error::Internal(format!("node {node} has no value"))
                            })?;
                            score += ch.weight * v;
                        }
                        if predicate.holds(score) {
                            // window starts at t position q + prefix_len - m + 1
                            let rel = offset + prefix_len + q - m;
                            slp.for_each_occurrence(var, |s| out.push(s + rel));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(OccurrenceSet(out))
    }
}

fn mixed() -> Error {
    Error::Internal("score channels do not share one layout".into())
}

/// Positions where `pattern` occurs, treating code 0 as a wildcard.
pub fn find_matches(slp: &Slp, pattern: &[u64], mode: Mode, engine: &ConvEngine) -> Result<OccurrenceSet> {
    dontcare_repr(slp, pattern, mode, engine)?.report_occurrences(slp, Predicate::Equal(0))
}

/// Positions whose Hamming distance to `pattern` is at most `k`.
pub fn find_hamming(
    slp: &Slp,
    pattern: &[u64],
    k: i64,
    mode: Mode,
    engine: &ConvEngine,
) -> Result<OccurrenceSet> {
    hamming_repr(slp, pattern, mode, engine)?.report_occurrences(slp, Predicate::AtMost(k))
}

/// Occurrence starts of `var`, sorted (convenience for tests and tools).
pub fn occurrences_of(slp: &Slp, var: Var) -> Vec<u64> {
    let mut out = Vec::new();
    slp.for_each_occurrence(var, |s| out.push(s));
    out.sort_unstable();
    out
}
