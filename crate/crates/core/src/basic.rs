//! Per-variable convolution tables over the boundary strings `t_j`.
//!
//! Every length-`m` window of the text is stabbed by exactly one occurrence
//! of a binary variable `X_j`, and it lies inside that variable's boundary
//! string `t_j`. Storing the sliding products of each `t_j` with the
//! pattern therefore answers every position with at most `n (m - 1)`
//! stored values.

use std::fmt::Write as _;

use crate::conv::ConvEngine;
use crate::error::{Error, Result};
use crate::slp::{Rule, Slp, Var};

/// Sliding products of one boundary string with the pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarTable {
    pub t_start_offset: u64,
    pub values: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicConvRepr {
    m: usize,
    n: usize,
    text_len: u64,
    slp_id: String,
    /// Indexed by `Var::idx`; `None` when `|t_j| < m` or the rule is terminal.
    tables: Vec<Option<VarTable>>,
    /// Only populated for `m == 1`: `P[1] * code` per terminal variable.
    terminal: Vec<Option<i64>>,
    text_chars: u64,
}

/// Builds the representation for `pattern` over the text of `slp`.
pub fn build_basic(slp: &Slp, pattern: &[u64], engine: &ConvEngine) -> Result<BasicConvRepr> {
    build_basic_mapped(slp, pattern, &|c| c, engine)
}

/// Like [`build_basic`], with every text character passed through `map`
/// before it is multiplied (used for indicator and power channels).
pub fn build_basic_mapped(
    slp: &Slp,
    pattern: &[u64],
    map: &dyn Fn(u64) -> u64,
    engine: &ConvEngine,
) -> Result<BasicConvRepr> {
    let m = pattern.len();
    if m == 0 {
        return Err(Error::EmptyPattern);
    }
    let n = slp.n();
    let mut tables = vec![None; n];
    let mut terminal = vec![None; n];
    let mut text_chars = 0u64;

    if m == 1 {
        for var in slp.vars() {
            if let Rule::Terminal(c) = slp.rule(var) {
                let code = map(c);
                engine.check_bound(&[code], pattern)?;
                terminal[var.idx()] = Some(pattern[0] as i64 * code as i64);
            }
        }
    } else {
        for var in slp.vars() {
            if slp.t_len(var, m) < m as u64 {
                continue;
            }
            let t = slp.t_string(var, m)?;
            text_chars += t.chars.len() as u64;
            let mapped: Vec<u64> = t.chars.iter().map(|&c| map(c)).collect();
            let values = engine.sliding_convolve(&mapped, pattern)?;
            tables[var.idx()] = Some(VarTable {
                t_start_offset: t.t_start_offset,
                values,
            });
        }
    }

    Ok(BasicConvRepr {
        m,
        n,
        text_len: slp.text_len(),
        slp_id: slp.identity(),
        tables,
        terminal,
        text_chars,
    })
}

impl BasicConvRepr {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn text_len(&self) -> u64 {
        self.text_len
    }

    pub fn slp_id(&self) -> &str {
        &self.slp_id
    }

    /// Number of valid query positions, `N - m + 1` (0 when `N < m`).
    pub fn positions(&self) -> u64 {
        (self.text_len + 1).saturating_sub(self.m as u64)
    }

    /// Text characters decompressed while building.
    pub fn text_chars(&self) -> u64 {
        self.text_chars
    }

    pub fn table(&self, var: Var) -> Option<&VarTable> {
        self.tables.get(var.idx()).and_then(Option::as_ref)
    }

    pub fn terminal_value(&self, var: Var) -> Option<i64> {
        self.terminal.get(var.idx()).copied().flatten()
    }

    /// Stored tables in ascending variable order.
    pub fn tables(&self) -> impl Iterator<Item = (Var, &VarTable)> {
        self.tables
            .iter()
            .enumerate()
            .filter_map(|(k, t)| t.as_ref().map(|t| (Var(k + 1), t)))
    }

    pub fn stored_entries(&self) -> usize {
        self.tables().map(|(_, t)| t.values.len()).sum::<usize>()
            + self.terminal.iter().flatten().count()
    }

    /// Fails unless this representation was built for `slp`.
    pub fn check_slp(&self, slp: &Slp) -> Result<()> {
        let id = slp.identity();
        if id != self.slp_id {
            return Err(Error::SlpMismatch {
                expected: self.slp_id.clone(),
                found: id,
            });
        }
        Ok(())
    }

    pub(crate) fn check_position(&self, slp: &Slp, i: u64) -> Result<()> {
        if slp.n() != self.n || slp.text_len() != self.text_len {
            return Err(Error::SlpMismatch {
                expected: self.slp_id.clone(),
                found: slp.identity(),
            });
        }
        if i == 0 || i > self.positions() {
            return Err(Error::OutOfRange {
                what: "position",
                value: i,
                lo: 1,
                hi: self.positions(),
            });
        }
        Ok(())
    }

    /// `C[i]` for `1 <= i <= N - m + 1`.
    pub fn query(&self, slp: &Slp, i: u64) -> Result<i64> {
        self.check_position(slp, i)?;
        let m = self.m as u64;
        let stab = slp.stab(i, i + m - 1)?;
        if self.m == 1 {
            return self
                .terminal_value(stab.var)
                .ok_or_else(|| Error::Internal(format!("no terminal value for {}", stab.var)));
        }
        let table = self
            .table(stab.var)
            .ok_or_else(|| Error::Internal(format!("window {i} stabbed at unstored {}", stab.var)))?;
        let p = i - (stab.start + table.t_start_offset) + 1;
        table
            .values
            .get((p - 1) as usize)
            .copied()
            .ok_or_else(|| Error::Internal(format!("offset {p} outside the table of {}", stab.var)))
    }

    /// The full vector `C[1..=N-m+1]`.
    pub fn materialize(&self, slp: &Slp, cap: u64) -> Result<Vec<i64>> {
        let count = self.positions();
        if count > cap {
            return Err(Error::CapExceeded { len: count, cap });
        }
        (1..=count).map(|i| self.query(slp, i)).collect()
    }

    /// Serializes to the BCR1 text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "BCR1 {} {} {}", self.n, self.m, self.text_len).unwrap();
        writeln!(out, "H {}", self.slp_id).unwrap();
        for (var, t) in self.tables() {
            writeln!(out, "{} {} {}", var.0, t.t_start_offset, t.values.len()).unwrap();
            let line: Vec<String> = t.values.iter().map(i64::to_string).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        for (k, v) in self.terminal.iter().enumerate() {
            if let Some(v) = v {
                writeln!(out, "T {} {v}", k + 1).unwrap();
            }
        }
        out
    }

    /// Parses the BCR1 text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
        let syntax = |line: usize, msg: &str| Error::Syntax {
            line,
            msg: msg.to_string(),
        };

        let (_, header) = lines.next().ok_or_else(|| syntax(1, "empty input"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let [tag, n, m, text_len] = fields.as_slice() else {
            return Err(syntax(1, "expected `BCR1 <n> <m> <N>`"));
        };
        if *tag != "BCR1" {
            return Err(syntax(1, "expected `BCR1 <n> <m> <N>`"));
        }
        let n: usize = num(n, 1)?;
        let m: usize = num(m, 1)?;
        let text_len: u64 = num(text_len, 1)?;
        if m == 0 {
            return Err(syntax(1, "pattern length must be at least 1"));
        }

        let (_, id_line) = lines.next().ok_or_else(|| syntax(2, "missing `H <id>` line"))?;
        let slp_id = id_line
            .strip_prefix("H ")
            .ok_or_else(|| syntax(2, "expected `H <id>`"))?
            .to_string();

        let mut tables = vec![None; n];
        let mut terminal = vec![None; n];
        while let Some((lineno, line)) = lines.next() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            match fields.as_slice() {
                ["T", j, value] => {
                    let j: usize = num(j, lineno)?;
                    let slot = terminal
                        .get_mut(j.wrapping_sub(1))
                        .ok_or_else(|| syntax(lineno, "variable index out of range"))?;
                    *slot = Some(num::<i64>(value, lineno)?);
                }
                [j, offset, len] => {
                    let j: usize = num(j, lineno)?;
                    let t_start_offset: u64 = num(offset, lineno)?;
                    let len: usize = num(len, lineno)?;
                    let (vline_no, vline) = lines
                        .next()
                        .ok_or_else(|| syntax(lineno + 1, "missing value line"))?;
                    let values: Vec<i64> = vline
                        .split(' ')
                        .filter(|s| !s.is_empty())
                        .map(|s| num(s, vline_no))
                        .collect::<Result<_>>()?;
                    if values.len() != len {
                        return Err(syntax(vline_no, "value count does not match the declared length"));
                    }
                    let slot = tables
                        .get_mut(j.wrapping_sub(1))
                        .ok_or_else(|| syntax(lineno, "variable index out of range"))?;
                    *slot = Some(VarTable {
                        t_start_offset,
                        values,
                    });
                }
                _ => return Err(syntax(lineno, "unrecognized line")),
            }
        }
        Ok(BasicConvRepr {
            m,
            n,
            text_len,
            slp_id,
            tables,
            terminal,
            text_chars: 0,
        })
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Syntax {
        line,
        msg: format!("invalid number {s:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::tests::sample;

    fn naive(text: &[u64], pattern: &[u64]) -> Vec<i64> {
        text.windows(pattern.len())
            .map(|w| w.iter().zip(pattern).map(|(a, b)| (a * b) as i64).sum())
            .collect()
    }

    #[test]
    fn sample_tables() {
        let slp = sample();
        let engine = ConvEngine::default();
        let repr = build_basic(&slp, &[1, 2, 1], &engine).unwrap();
        assert_eq!(repr.table(Var(5)).unwrap().values, vec![6, 5]);
        assert!(repr.table(Var(3)).is_none());
        let stored: Vec<usize> = repr.tables().map(|(v, _)| v.0).collect();
        assert_eq!(stored, vec![4, 5, 6, 7]);
        assert!(repr.stored_entries() <= slp.n() * 2);
    }

    #[test]
    fn sample_queries() {
        let slp = sample();
        let engine = ConvEngine::default();
        let repr = build_basic(&slp, &[1, 2, 1], &engine).unwrap();
        assert_eq!(repr.query(&slp, 3).unwrap(), 6);
        assert_eq!(repr.query(&slp, 1).unwrap(), 5);
        let all = repr.materialize(&slp, 100).unwrap();
        assert_eq!(&all[..3], &[5, 6, 6]);
        assert_eq!(all, naive(&slp.decode(100).unwrap(), &[1, 2, 1]));
        assert!(repr.query(&slp, 0).is_err());
        assert!(repr.query(&slp, 12).is_err());
    }

    #[test]
    fn unit_pattern_uses_terminal_table() {
        let slp = sample();
        let engine = ConvEngine::default();
        let repr = build_basic(&slp, &[7], &engine).unwrap();
        assert_eq!(repr.terminal_value(Var(1)), Some(7));
        assert_eq!(repr.terminal_value(Var(2)), Some(14));
        let ident = build_basic(&slp, &[1], &engine).unwrap();
        let text = slp.decode(100).unwrap();
        for i in 1..=13 {
            assert_eq!(ident.query(&slp, i).unwrap(), text[i as usize - 1] as i64);
        }
    }

    #[test]
    fn degenerate_lengths() {
        let slp = sample();
        let engine = ConvEngine::default();
        let whole: Vec<u64> = (1..=13).collect();
        let repr = build_basic(&slp, &whole, &engine).unwrap();
        let text = slp.decode(100).unwrap();
        let dot: i64 = text.iter().zip(&whole).map(|(a, b)| (a * b) as i64).sum();
        assert_eq!(repr.materialize(&slp, 100).unwrap(), vec![dot]);

        let long = vec![1u64; 14];
        let empty = build_basic(&slp, &long, &engine).unwrap();
        assert_eq!(empty.positions(), 0);
        assert!(empty.materialize(&slp, 100).unwrap().is_empty());
        assert!(empty.query(&slp, 1).is_err());
        assert_eq!(build_basic(&slp, &[], &engine), Err(Error::EmptyPattern));
    }

    #[test]
    fn text_round_trip_and_identity() {
        let slp = sample();
        let engine = ConvEngine::default();
        for pat in [vec![1u64, 2, 1], vec![3]] {
            let repr = build_basic(&slp, &pat, &engine).unwrap();
            let text = repr.to_text();
            let back = BasicConvRepr::parse(&text).unwrap();
            assert_eq!(back.to_text(), text);
            assert_eq!(back.materialize(&slp, 100).unwrap(), repr.materialize(&slp, 100).unwrap());
            back.check_slp(&slp).unwrap();
        }
        let repr = build_basic(&slp, &[1, 2, 1], &engine).unwrap();
        assert!(repr.to_text().starts_with("BCR1 7 3 13\nH "));
        let other = Slp::parse(b"SLP1 1\nT 1\n").unwrap();
        assert!(matches!(repr.check_slp(&other), Err(Error::SlpMismatch { .. })));
        assert!(BasicConvRepr::parse("BCR1 7 3\n").is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let slp = sample();
        let repr = build_basic(&slp, &[1, 2], &ConvEngine::default()).unwrap();
        assert_eq!(
            repr.materialize(&slp, 5),
            Err(Error::CapExceeded { len: 12, cap: 5 })
        );
    }
}
