//! Straight-line programs: grammars in Chomsky normal form that derive
//! exactly one string.
//!
//! Variables are numbered from 1 (as in the SLP1 text format); rule `i` may
//! only reference variables with smaller indices and the last rule is the
//! root. All queries run on precomputed lengths and never decompress more
//! than they return.

use std::fmt;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A 1-based variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

impl Var {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// A single character; codes start at 1, 0 is the padding sentinel.
    Terminal(u64),
    Binary(Var, Var),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarMeta {
    /// Length of the derived string.
    pub len: u64,
    /// Number of derivation-tree nodes labelled with this variable.
    pub vocc: u64,
}

/// The deepest derivation-tree node whose interval covers a query interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabResult {
    pub var: Var,
    /// 1-based text position where this occurrence of `var` starts.
    pub start: u64,
    /// Length of the left child, 0 when `var` is a terminal.
    pub left_len: u64,
}

/// The boundary string `suf(left, m-1) . pre(right, m-1)` of a binary rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TString {
    pub chars: Vec<u64>,
    /// Number of characters taken from the left child.
    pub prefix_len: u64,
    /// Distance from the start of the variable to the start of `chars`.
    pub t_start_offset: u64,
}

/// A reference from a child to one of its parents: `child` occurs inside
/// `parent` starting `offset` characters after the parent's start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ParentRef {
    parent: Var,
    offset: u64,
}

#[derive(Debug, Clone)]
pub struct Slp {
    rules: Vec<Rule>,
    meta: Vec<VarMeta>,
    height: Vec<u32>,
    parents: Vec<Vec<ParentRef>>,
    alphabet: Vec<u64>,
}

impl Slp {
    /// Validates `rules` and computes per-variable metadata.
    pub fn from_rules(rules: Vec<Rule>) -> Result<Self> {
        let n = rules.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for (k, rule) in rules.iter().enumerate() {
            let i = k + 1;
            match *rule {
                Rule::Terminal(0) => return Err(Error::ZeroTerminal(i)),
                Rule::Terminal(_) => {}
                Rule::Binary(l, r) => {
                    for t in [l, r] {
                        if t.0 == 0 || t.0 > n {
                            return Err(Error::IndexOutOfRange {
                                rule: i,
                                target: t.0,
                                n,
                            });
                        }
                        if t.0 >= i {
                            return Err(Error::ForwardReference { rule: i, target: t.0 });
                        }
                    }
                }
            }
        }

        let mut len = vec![0u64; n];
        let mut height = vec![0u32; n];
        for (k, rule) in rules.iter().enumerate() {
            match *rule {
                Rule::Terminal(_) => len[k] = 1,
                Rule::Binary(l, r) => {
                    len[k] = len[l.idx()]
                        .checked_add(len[r.idx()])
                        .ok_or(Error::LengthOverflow(k + 1))?;
                    height[k] = 1 + height[l.idx()].max(height[r.idx()]);
                }
            }
        }

        // Occurrence counts, top-down. A zero count means unreachable.
        let mut vocc = vec![0u64; n];
        vocc[n - 1] = 1;
        for k in (0..n).rev() {
            if vocc[k] == 0 {
                return Err(Error::Unreachable(k + 1));
            }
            if let Rule::Binary(l, r) = rules[k] {
                vocc[l.idx()] += vocc[k];
                vocc[r.idx()] += vocc[k];
            }
        }

        let mut parents = vec![Vec::new(); n];
        for (k, rule) in rules.iter().enumerate() {
            if let Rule::Binary(l, r) = *rule {
                let parent = Var(k + 1);
                parents[l.idx()].push(ParentRef { parent, offset: 0 });
                parents[r.idx()].push(ParentRef {
                    parent,
                    offset: len[l.idx()],
                });
            }
        }

        let mut alphabet: Vec<u64> = rules
            .iter()
            .filter_map(|r| match r {
                Rule::Terminal(c) => Some(*c),
                Rule::Binary(..) => None,
            })
            .collect();
        alphabet.sort_unstable();
        alphabet.dedup();

        let meta = len
            .into_iter()
            .zip(vocc)
            .map(|(len, vocc)| VarMeta { len, vocc })
            .collect();
        Ok(Slp {
            rules,
            meta,
            height,
            parents,
            alphabet,
        })
    }

    /// Parses the SLP1 text format.
    pub fn parse(input: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(input).map_err(|e| Error::Syntax {
            line: 1,
            msg: format!("not valid UTF-8: {e}"),
        })?;
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or("");
        let n: usize = match header.split(' ').collect::<Vec<_>>().as_slice() {
            ["SLP1", count] => parse_num(count, 1)?,
            _ => {
                return Err(Error::Syntax {
                    line: 1,
                    msg: format!("expected `SLP1 <n>`, found {header:?}"),
                })
            }
        };
        let mut rules = Vec::with_capacity(n);
        for i in 1..=n {
            let lineno = i + 1;
            let line = lines.next().ok_or_else(|| Error::Syntax {
                line: lineno,
                msg: format!("missing rule {i} of {n}"),
            })?;
            let fields: Vec<&str> = line.split(' ').collect();
            let rule = match fields.as_slice() {
                ["T", code] => Rule::Terminal(parse_num(code, lineno)?),
                ["B", l, r] => {
                    Rule::Binary(Var(parse_num(l, lineno)?), Var(parse_num(r, lineno)?))
                }
                _ => {
                    return Err(Error::Syntax {
                        line: lineno,
                        msg: format!("expected `T <code>` or `B <l> <r>`, found {line:?}"),
                    })
                }
            };
            rules.push(rule);
        }
        // Only a single trailing newline may follow the last rule.
        let rest: Vec<&str> = lines.collect();
        if !(rest.is_empty() || rest == [""]) {
            return Err(Error::Syntax {
                line: n + 2,
                msg: "trailing content after the last rule".into(),
            });
        }
        Self::from_rules(rules)
    }

    /// Serializes to the SLP1 text format.
    pub fn to_slp1(&self) -> String {
        let mut out = String::with_capacity(8 * self.rules.len() + 16);
        writeln!(out, "SLP1 {}", self.rules.len()).unwrap();
        for rule in &self.rules {
            match rule {
                Rule::Terminal(c) => writeln!(out, "T {c}").unwrap(),
                Rule::Binary(l, r) => writeln!(out, "B {} {}", l.0, r.0).unwrap(),
            }
        }
        out
    }

    /// Short content hash of the canonical SLP1 form, used to tie
    /// serialized representations to their grammar.
    pub fn identity(&self) -> String {
        let digest = Sha256::digest(self.to_slp1().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.rules.len()
    }

    #[inline]
    pub fn root(&self) -> Var {
        Var(self.rules.len())
    }

    /// Length N of the derived text.
    #[inline]
    pub fn text_len(&self) -> u64 {
        self.meta[self.rules.len() - 1].len
    }

    #[inline]
    pub fn rule(&self, var: Var) -> Rule {
        self.rules[var.idx()]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    #[inline]
    pub fn meta(&self, var: Var) -> VarMeta {
        self.meta[var.idx()]
    }

    #[inline]
    pub fn len(&self, var: Var) -> u64 {
        self.meta[var.idx()].len
    }

    #[inline]
    pub fn vocc(&self, var: Var) -> u64 {
        self.meta[var.idx()].vocc
    }

    /// Height of the derivation tree below `var` (0 for terminals).
    pub fn height_of(&self, var: Var) -> u32 {
        self.height[var.idx()]
    }

    pub fn height(&self) -> u32 {
        self.height[self.rules.len() - 1]
    }

    /// Distinct terminal codes, ascending.
    pub fn alphabet(&self) -> &[u64] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.rules.len()).map(Var)
    }

    fn check_var(&self, var: Var) -> Result<()> {
        if var.0 == 0 || var.0 > self.rules.len() {
            return Err(Error::OutOfRange {
                what: "variable",
                value: var.0 as u64,
                lo: 1,
                hi: self.rules.len() as u64,
            });
        }
        Ok(())
    }

    /// Fully decompresses the text, refusing when it is longer than `cap`.
    pub fn decode(&self, cap: u64) -> Result<Vec<u64>> {
        let len = self.text_len();
        if len > cap {
            return Err(Error::CapExceeded { len, cap });
        }
        let mut out = Vec::with_capacity(len as usize);
        self.push_prefix(self.root(), len, &mut out);
        Ok(out)
    }

    /// `val(var)[1:q]`.
    pub fn prefix(&self, var: Var, q: u64) -> Result<Vec<u64>> {
        self.check_var(var)?;
        self.check_q(var, q)?;
        let mut out = Vec::with_capacity(q as usize);
        self.push_prefix(var, q, &mut out);
        Ok(out)
    }

    /// The last `q` characters of `val(var)`.
    pub fn suffix(&self, var: Var, q: u64) -> Result<Vec<u64>> {
        self.check_var(var)?;
        self.check_q(var, q)?;
        let mut out = Vec::with_capacity(q as usize);
        self.push_suffix(var, q, &mut out);
        Ok(out)
    }

    fn check_q(&self, var: Var, q: u64) -> Result<()> {
        let len = self.len(var);
        if q == 0 || q > len {
            return Err(Error::OutOfRange {
                what: "length",
                value: q,
                lo: 1,
                hi: len,
            });
        }
        Ok(())
    }

    /// Appends the first `q` characters of `var` to `out`. Right children
    /// are only visited when the left child is too short, so the work is
    /// O(q + height).
    pub(crate) fn push_prefix(&self, var: Var, q: u64, out: &mut Vec<u64>) {
        let mut need = q.min(self.len(var));
        let mut stack = vec![var];
        while need > 0 {
            let v = stack.pop().expect("prefix stack underflow");
            match self.rules[v.idx()] {
                Rule::Terminal(c) => {
                    out.push(c);
                    need -= 1;
                }
                Rule::Binary(l, r) => {
                    if self.len(l) < need {
                        stack.push(r);
                    }
                    stack.push(l);
                }
            }
        }
    }

    /// Appends the last `q` characters of `var` to `out`, in text order.
    pub(crate) fn push_suffix(&self, var: Var, q: u64, out: &mut Vec<u64>) {
        let mut need = q.min(self.len(var));
        let base = out.len();
        let mut stack = vec![var];
        while need > 0 {
            let v = stack.pop().expect("suffix stack underflow");
            match self.rules[v.idx()] {
                Rule::Terminal(c) => {
                    out.push(c);
                    need -= 1;
                }
                Rule::Binary(l, r) => {
                    if self.len(r) < need {
                        stack.push(l);
                    }
                    stack.push(r);
                }
            }
        }
        out[base..].reverse();
    }

    /// Finds the deepest derivation-tree node covering `[b:e]` by descending
    /// from the root.
    pub fn stab(&self, b: u64, e: u64) -> Result<StabResult> {
        let n_len = self.text_len();
        if b == 0 || b > e || e > n_len {
            return Err(Error::OutOfRange {
                what: if b == 0 || b > e { "interval start" } else { "interval end" },
                value: if b == 0 || b > e { b } else { e },
                lo: 1,
                hi: n_len,
            });
        }
        let mut var = self.root();
        let mut start = 1u64;
        loop {
            match self.rules[var.idx()] {
                Rule::Terminal(_) => {
                    return Ok(StabResult {
                        var,
                        start,
                        left_len: 0,
                    })
                }
                Rule::Binary(l, r) => {
                    let left_len = self.len(l);
                    let split = start + left_len;
                    if e < split {
                        var = l;
                    } else if b >= split {
                        var = r;
                        start = split;
                    } else {
                        return Ok(StabResult {
                            var,
                            start,
                            left_len,
                        });
                    }
                }
            }
        }
    }

    /// `|t_j|` without materializing it; 0 for terminals.
    pub fn t_len(&self, var: Var, m: usize) -> u64 {
        match self.rules[var.idx()] {
            Rule::Terminal(_) => 0,
            Rule::Binary(l, r) => {
                let k = m.saturating_sub(1) as u64;
                self.len(l).min(k) + self.len(r).min(k)
            }
        }
    }

    /// The boundary string of binary rule `var` for window length `m`.
    pub fn t_string(&self, var: Var, m: usize) -> Result<TString> {
        self.check_var(var)?;
        if m == 0 {
            return Err(Error::Invalid("window length must be at least 1".into()));
        }
        let Rule::Binary(l, r) = self.rules[var.idx()] else {
            return Err(Error::TerminalVariable(var.0));
        };
        let k = (m - 1) as u64;
        let prefix_len = self.len(l).min(k);
        let mut chars = Vec::with_capacity((2 * k) as usize);
        self.push_suffix(l, prefix_len, &mut chars);
        self.push_prefix(r, k, &mut chars);
        Ok(TString {
            chars,
            prefix_len,
            t_start_offset: self.len(l) - prefix_len,
        })
    }

    /// Redundancy captured by the grammar with respect to length-`m`
    /// windows: the sum over binary variables with `|X| >= m` of
    /// `(vocc - 1) * (|t| - m + 1)`.
    pub fn alpha(&self, m: usize) -> u64 {
        assert!(m >= 1, "window length must be at least 1");
        let mut total: u128 = 0;
        for var in self.vars() {
            if matches!(self.rule(var), Rule::Binary(..)) && self.len(var) >= m as u64 {
                let windows = self.t_len(var, m) + 1 - m as u64;
                total += (self.vocc(var) - 1) as u128 * windows as u128;
            }
        }
        u64::try_from(total).expect("alpha is bounded by the text length")
    }

    /// Calls `f` with the 1-based start position of every occurrence of
    /// `var` in the derivation tree. Visits `vocc(var)` positions in
    /// O(vocc * height) time.
    pub fn for_each_occurrence(&self, var: Var, mut f: impl FnMut(u64)) {
        let root = self.root();
        let mut stack = vec![(var, 0u64)];
        while let Some((v, acc)) = stack.pop() {
            if v == root {
                f(acc + 1);
                continue;
            }
            for p in &self.parents[v.idx()] {
                stack.push((p.parent, acc + p.offset));
            }
        }
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Syntax {
            line,
            msg: format!("expected a decimal number, found {s:?}"),
        });
    }
    s.parse().map_err(|_| Error::Syntax {
        line,
        msg: format!("number {s:?} out of range"),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = "SLP1 7\nT 1\nT 2\nB 1 2\nB 1 3\nB 3 4\nB 4 5\nB 6 5\n";

    pub(crate) fn sample() -> Slp {
        Slp::parse(SAMPLE.as_bytes()).unwrap()
    }

    fn codes(s: &str) -> Vec<u64> {
        s.bytes().map(|b| (b - b'a' + 1) as u64).collect()
    }

    #[test]
    fn parses_and_decodes_sample() {
        let slp = sample();
        assert_eq!(slp.n(), 7);
        assert_eq!(slp.text_len(), 13);
        assert_eq!(slp.decode(100).unwrap(), codes("aababaababaab"));
        assert_eq!(slp.alphabet(), &[1, 2]);
        assert_eq!(slp.to_slp1(), SAMPLE);
    }

    #[test]
    fn single_terminal() {
        let slp = Slp::parse(b"SLP1 1\nT 1\n").unwrap();
        assert_eq!(slp.decode(10).unwrap(), vec![1]);
        assert_eq!(slp.vocc(Var(1)), 1);
    }

    #[test]
    fn rejects_forward_reference() {
        let err = Slp::parse(b"SLP1 5\nT 1\nT 2\nB 1 5\nB 1 2\nB 3 4\n").unwrap_err();
        assert_eq!(err, Error::ForwardReference { rule: 3, target: 5 });
    }

    #[test]
    fn rejects_out_of_range_and_syntax() {
        assert!(matches!(
            Slp::parse(b"SLP1 2\nT 1\nB 1 9\n").unwrap_err(),
            Error::IndexOutOfRange { rule: 2, target: 9, .. }
        ));
        assert!(matches!(
            Slp::parse(b"SLP1 2\nT 1\nB 1  1\n").unwrap_err(),
            Error::Syntax { line: 3, .. }
        ));
        assert!(matches!(
            Slp::parse(b"SLP 1\nT 1\n").unwrap_err(),
            Error::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            Slp::parse(b"SLP1 2\nT 1\n").unwrap_err(),
            Error::Syntax { line: 3, .. }
        ));
        assert!(matches!(
            Slp::parse(b"SLP1 1\nT 1\nT 2\n").unwrap_err(),
            Error::Syntax { .. }
        ));
        assert_eq!(Slp::parse(b"SLP1 1\nT 0\n").unwrap_err(), Error::ZeroTerminal(1));
        assert_eq!(Slp::parse(b"SLP1 0\n").unwrap_err(), Error::Empty);
        assert_eq!(
            Slp::parse(b"SLP1 3\nT 1\nT 2\nB 1 1\n").unwrap_err(),
            Error::Unreachable(2)
        );
    }

    #[test]
    fn accepts_missing_final_newline() {
        let slp = Slp::parse(b"SLP1 2\nT 1\nB 1 1").unwrap();
        assert_eq!(slp.text_len(), 2);
    }

    #[test]
    fn length_overflow_is_reported() {
        let mut rules = vec![Rule::Terminal(1)];
        for i in 1..=64 {
            rules.push(Rule::Binary(Var(i), Var(i)));
        }
        assert_eq!(Slp::from_rules(rules).unwrap_err(), Error::LengthOverflow(65));
    }

    #[test]
    fn metadata_sample() {
        let slp = sample();
        let lens: Vec<u64> = slp.vars().map(|v| slp.len(v)).collect();
        assert_eq!(lens, vec![1, 1, 2, 3, 5, 8, 13]);
        let vocc: Vec<u64> = slp.vars().map(|v| slp.vocc(v)).collect();
        assert_eq!(vocc, vec![8, 5, 5, 3, 2, 1, 1]);
        assert_eq!(vocc[0] + vocc[1], slp.text_len());
    }

    #[test]
    fn prefix_and_suffix_examples() {
        let slp = sample();
        assert_eq!(slp.prefix(Var(5), 3).unwrap(), codes("aba"));
        assert_eq!(slp.prefix(Var(6), 1).unwrap(), codes("a"));
        assert_eq!(slp.prefix(Var(6), 8).unwrap(), codes("aababaab"));
        assert_eq!(slp.suffix(Var(6), 2).unwrap(), codes("ab"));
        assert_eq!(slp.suffix(Var(4), 2).unwrap(), codes("ab"));
        assert_eq!(slp.suffix(Var(2), 1).unwrap(), codes("b"));
        assert!(slp.prefix(Var(5), 6).is_err());
        assert!(slp.prefix(Var(5), 0).is_err());
        assert!(slp.suffix(Var(8), 1).is_err());
    }

    #[test]
    fn stab_examples() {
        let slp = sample();
        assert_eq!(
            slp.stab(3, 5).unwrap(),
            StabResult { var: Var(6), start: 1, left_len: 3 }
        );
        assert_eq!(
            slp.stab(5, 7).unwrap(),
            StabResult { var: Var(5), start: 4, left_len: 2 }
        );
        assert_eq!(
            slp.stab(1, 13).unwrap(),
            StabResult { var: Var(7), start: 1, left_len: 8 }
        );
        let single = slp.stab(4, 4).unwrap();
        assert_eq!(single.left_len, 0);
        assert_eq!(slp.rule(single.var), Rule::Terminal(1));
        assert!(slp.stab(0, 3).is_err());
        assert!(slp.stab(4, 3).is_err());
        assert!(slp.stab(4, 14).is_err());
    }

    #[test]
    fn t_string_examples() {
        let slp = sample();
        let t5 = slp.t_string(Var(5), 3).unwrap();
        assert_eq!(t5.chars, codes("abaa"));
        assert_eq!((t5.prefix_len, t5.t_start_offset), (2, 0));
        let t3 = slp.t_string(Var(3), 3).unwrap();
        assert_eq!(t3.chars, codes("ab"));
        assert_eq!((t3.prefix_len, t3.t_start_offset), (1, 0));
        let t7 = slp.t_string(Var(7), 3).unwrap();
        assert_eq!(t7.chars, codes("abab"));
        assert_eq!((t7.prefix_len, t7.t_start_offset), (2, 6));
        assert_eq!(slp.t_string(Var(1), 3).unwrap_err(), Error::TerminalVariable(1));
        for v in slp.vars() {
            if let Ok(t) = slp.t_string(v, 3) {
                assert_eq!(t.chars.len() as u64, slp.t_len(v, 3));
            }
        }
    }

    #[test]
    fn alpha_examples() {
        let slp = sample();
        assert_eq!(slp.alpha(3), 4);
        assert_eq!(slp.alpha(14), 0);
        // every variable used once
        let comb = Slp::parse(b"SLP1 5\nT 1\nT 2\nB 1 2\nT 3\nB 3 4\n").unwrap();
        assert_eq!(comb.alpha(2), 0);
    }

    #[test]
    fn occurrences_of_sample_vars() {
        let slp = sample();
        let mut got = Vec::new();
        slp.for_each_occurrence(Var(5), |p| got.push(p));
        got.sort_unstable();
        assert_eq!(got, vec![4, 9]);
        let mut ones = Vec::new();
        slp.for_each_occurrence(Var(1), |p| ones.push(p));
        assert_eq!(ones.len() as u64, slp.vocc(Var(1)));
    }

    #[test]
    fn identity_is_stable_and_distinguishes() {
        let a = sample();
        assert_eq!(a.identity(), sample().identity());
        let b = Slp::parse(b"SLP1 1\nT 1\n").unwrap();
        assert_ne!(a.identity(), b.identity());
        assert_eq!(a.identity().len(), 16);
    }
}
