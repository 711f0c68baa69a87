//! Convolution between a trie and a pattern.
//!
//! For every node `v` of depth at least `m` we want the dot product of the
//! pattern with the last `m` characters on the root-to-`v` path. The trie is
//! split into long paths (each node continues into its highest child). A
//! path of `d >= m` nodes is handled by one sliding product over the
//! `d + m - 1` characters ending at its last node. A shorter path reuses the
//! values of its sibling chain `z`, which shares everything above the
//! branching point, and only corrects the last `d` pattern positions:
//! `C(w_i) = C(z_i) - C'(z_i) + C'(w_i)`. The total sliding input stays
//! within `4r` characters.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::conv::ConvEngine;
use crate::error::{Error, Result};
use crate::slp::Slp;
use crate::window_trie::{NodeId, Trie, WindowTrie, ROOT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LongPathDecomposition {
    /// Node sequences, top-down. The root belongs to no path.
    pub paths: Vec<Vec<NodeId>>,
    pub long_child: Vec<Option<NodeId>>,
    pub height: Vec<usize>,
    /// Path id per node (`None` for the root).
    pub path_of: Vec<Option<u32>>,
    /// 1-based position within the node's path (0 for the root).
    pub index_in_path: Vec<u32>,
}

/// Long path decomposition; ties between equally high children go to the
/// smallest character code. A path is always listed after the path that
/// contains the parent of its head.
pub fn long_path_decompose(trie: &Trie) -> LongPathDecomposition {
    let r = trie.len();
    let mut height = vec![0usize; r];
    let mut long_child = vec![None; r];
    // Children always have larger ids than their parents.
    for id in (0..r as NodeId).rev() {
        let mut best: Option<NodeId> = None;
        for c in trie.children(id) {
            if best.is_none_or(|b| height[c as usize] > height[b as usize]) {
                best = Some(c);
            }
        }
        if let Some(b) = best {
            height[id as usize] = height[b as usize] + 1;
        }
        long_child[id as usize] = best;
    }

    let mut paths = Vec::new();
    let mut path_of = vec![None; r];
    let mut index_in_path = vec![0u32; r];
    let mut pending: Vec<NodeId> = Vec::new();
    let mut walk = |head: NodeId, include_head: bool, pending: &mut Vec<NodeId>| {
        let mut path = Vec::new();
        let mut node = head;
        if include_head {
            path.push(node);
        }
        loop {
            let long = long_child[node as usize];
            for c in trie.children(node).rev() {
                if Some(c) != long {
                    pending.push(c);
                }
            }
            match long {
                Some(c) => {
                    path.push(c);
                    node = c;
                }
                None => break,
            }
        }
        if !path.is_empty() {
            let pid = paths.len() as u32;
            for (k, &v) in path.iter().enumerate() {
                path_of[v as usize] = Some(pid);
                index_in_path[v as usize] = k as u32 + 1;
            }
            paths.push(path);
        }
    };
    walk(ROOT, false, &mut pending);
    while let Some(head) = pending.pop() {
        walk(head, true, &mut pending);
    }

    LongPathDecomposition {
        paths,
        long_child,
        height,
        path_of,
        index_in_path,
    }
}

/// `C_T(v)` for every node of depth at least `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieConvTable {
    m: usize,
    pattern: Vec<u64>,
    values: Vec<Option<i64>>,
}

impl TrieConvTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pattern(&self) -> &[u64] {
        &self.pattern
    }

    /// `None` for nodes shallower than `m`.
    pub fn get(&self, node: NodeId) -> Option<i64> {
        self.values.get(node as usize).copied().flatten()
    }

    pub fn defined(&self) -> impl Iterator<Item = (NodeId, i64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|v| (k as NodeId, v)))
    }
}

pub fn trie_convolution(trie: &Trie, pattern: &[u64], engine: &ConvEngine) -> Result<TrieConvTable> {
    let lpd = long_path_decompose(trie);
    trie_convolution_mapped(trie, &lpd, pattern, &|c| c, engine)
}

/// Trie convolution with node characters passed through `map`.
pub fn trie_convolution_mapped(
    trie: &Trie,
    lpd: &LongPathDecomposition,
    pattern: &[u64],
    map: &dyn Fn(u64) -> u64,
    engine: &ConvEngine,
) -> Result<TrieConvTable> {
    let m = pattern.len();
    if m == 0 {
        return Err(Error::EmptyPattern);
    }
    let mut values: Vec<Option<i64>> = vec![None; trie.len()];
    let chars_ending_at = |node: NodeId, len: usize| -> (Vec<u64>, usize) {
        let s: Vec<u64> = trie.path_suffix(node, len).into_iter().map(map).collect();
        let pad = len - s.len();
        (s, pad)
    };

    for path in &lpd.paths {
        let d = path.len();
        let last = path[d - 1];
        if trie.depth(last) < m {
            continue;
        }
        if d >= m {
            let (s, pad) = chars_ending_at(last, d + m - 1);
            let out = engine.sliding_convolve_padded(&s, pattern, pad)?;
            for (&w, value) in path.iter().zip(out) {
                if trie.depth(w) >= m {
                    values[w as usize] = Some(value);
                }
            }
            continue;
        }

        // Short path: borrow from the sibling chain below the same parent.
        let parent = trie
            .parent(path[0])
            .ok_or_else(|| Error::Internal("short path starts at the root".into()))?;
        let mut z = Vec::with_capacity(d);
        let mut cur = lpd.long_child[parent as usize];
        while z.len() < d {
            let node = cur.ok_or_else(|| Error::Internal("sibling chain shorter than the path".into()))?;
            if node == path[0] {
                return Err(Error::Internal("sibling chain coincides with the path".into()));
            }
            z.push(node);
            cur = lpd.long_child[node as usize];
        }
        let tail = &pattern[m - d..];
        let (sw, pw) = chars_ending_at(last, 2 * d - 1);
        let (sz, pz) = chars_ending_at(z[d - 1], 2 * d - 1);
        let cw = engine.sliding_convolve_padded(&sw, tail, pw)?;
        let cz = engine.sliding_convolve_padded(&sz, tail, pz)?;
        for k in 0..d {
            let w = path[k];
            if trie.depth(w) < m {
                continue;
            }
            let base = values[z[k] as usize].ok_or_else(|| {
                Error::Internal(format!("sibling node {} has no value yet", z[k]))
            })?;
            values[w as usize] = Some(base - cz[k] + cw[k]);
        }
    }

    Ok(TrieConvTable {
        m,
        pattern: pattern.to_vec(),
        values,
    })
}

/// Window trie plus per-node values: the compact representation whose
/// size is at most `min(n m, N - alpha)` up to lower-order terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieConvRepr {
    slp_id: String,
    n: usize,
    text_len: u64,
    window: Arc<WindowTrie>,
    table: TrieConvTable,
}

/// Builds the trie representation for `pattern` (length at least 2).
pub fn build_trie_repr(slp: &Slp, pattern: &[u64], engine: &ConvEngine) -> Result<TrieConvRepr> {
    let m = pattern.len();
    if m == 0 {
        return Err(Error::EmptyPattern);
    }
    let window = Arc::new(WindowTrie::build(slp, m)?);
    TrieConvRepr::with_trie(slp, window, pattern, &|c| c, engine)
}

impl TrieConvRepr {
    /// Builds over an existing window trie, so several channels can share it.
    pub fn with_trie(
        slp: &Slp,
        window: Arc<WindowTrie>,
        pattern: &[u64],
        map: &dyn Fn(u64) -> u64,
        engine: &ConvEngine,
    ) -> Result<Self> {
        if window.m() != pattern.len() {
            return Err(Error::Invalid(format!(
                "window trie built for m = {}, pattern has length {}",
                window.m(),
                pattern.len()
            )));
        }
        let lpd = long_path_decompose(window.trie());
        let table = trie_convolution_mapped(window.trie(), &lpd, pattern, map, engine)?;
        Ok(TrieConvRepr {
            slp_id: slp.identity(),
            n: slp.n(),
            text_len: slp.text_len(),
            window,
            table,
        })
    }

    pub fn m(&self) -> usize {
        self.table.m
    }

    pub fn window(&self) -> &Arc<WindowTrie> {
        &self.window
    }

    pub fn table(&self) -> &TrieConvTable {
        &self.table
    }

    pub fn slp_id(&self) -> &str {
        &self.slp_id
    }

    pub fn text_len(&self) -> u64 {
        self.text_len
    }

    pub fn positions(&self) -> u64 {
        (self.text_len + 1).saturating_sub(self.m() as u64)
    }

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

    /// `C[i]` via the node that spells the window at `i`.
    pub fn query(&self, slp: &Slp, i: u64) -> Result<i64> {
        if slp.n() != self.n || slp.text_len() != self.text_len {
            return Err(Error::SlpMismatch {
                expected: self.slp_id.clone(),
                found: slp.identity(),
            });
        }
        let node = self.window.locate(slp, i)?;
        self.table
            .get(node)
            .ok_or_else(|| Error::Internal(format!("node {node} has no value")))
    }

    pub fn materialize(&self, slp: &Slp, cap: u64) -> Result<Vec<i64>> {
        let count = self.positions();
        if count > cap {
            return Err(Error::CapExceeded { len: count, cap });
        }
        (1..=count).map(|i| self.query(slp, i)).collect()
    }

    /// Serializes to the TCR1 format: header, identity line, trie dump, and
    /// one `CT <node id> <value>` line per defined node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "TCR1 {} {}", self.m(), self.window.len()).unwrap();
        writeln!(out, "H {}", self.slp_id).unwrap();
        out.push_str(&self.window.dump());
        for (node, value) in self.table.defined() {
            writeln!(out, "CT {node} {value}").unwrap();
        }
        out
    }

    /// Parses a TCR1 file. The window trie is rebuilt from `slp` (its
    /// construction is deterministic) and must match the stored dump.
    pub fn parse(text: &str, slp: &Slp) -> Result<Self> {
        let syntax = |line: usize, msg: String| Error::Syntax { line, msg };
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
        let (_, header) = lines.next().ok_or_else(|| syntax(1, "empty input".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let (m, r): (usize, usize) = match fields.as_slice() {
            ["TCR1", m, r] => (
                m.parse().map_err(|_| syntax(1, format!("invalid m {m:?}")))?,
                r.parse().map_err(|_| syntax(1, format!("invalid r {r:?}")))?,
            ),
            _ => return Err(syntax(1, "expected `TCR1 <m> <r>`".into())),
        };
        let (_, id_line) = lines.next().ok_or_else(|| syntax(2, "missing `H <id>`".into()))?;
        let slp_id = id_line
            .strip_prefix("H ")
            .ok_or_else(|| syntax(2, "expected `H <id>`".into()))?
            .to_string();
        let found = slp.identity();
        if found != slp_id {
            return Err(Error::SlpMismatch {
                expected: slp_id,
                found,
            });
        }

        let window = WindowTrie::build(slp, m)?;
        if window.len() != r {
            return Err(syntax(1, format!("trie has {} nodes, header says {r}", window.len())));
        }
        let dump = window.dump();
        let mut expected = dump.lines();
        for _ in 0..r {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| syntax(0, "truncated trie dump".into()))?;
            if Some(line) != expected.next() {
                return Err(syntax(lineno, "trie dump does not match the grammar".into()));
            }
        }

        let mut values = vec![None; r];
        for (lineno, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let ["CT", node, value] = fields.as_slice() else {
                return Err(syntax(lineno, format!("expected `CT <node> <value>`, found {line:?}")));
            };
            let node: usize = node
                .parse()
                .map_err(|_| syntax(lineno, format!("invalid node id {node:?}")))?;
            let value: i64 = value
                .parse()
                .map_err(|_| syntax(lineno, format!("invalid value {value:?}")))?;
            if node >= r || window.trie().depth(node as NodeId) < m {
                return Err(syntax(lineno, format!("node {node} cannot hold a value")));
            }
            values[node] = Some(value);
        }

        Ok(TrieConvRepr {
            slp_id,
            n: slp.n(),
            text_len: slp.text_len(),
            window: Arc::new(window),
            table: TrieConvTable {
                m,
                pattern: Vec::new(),
                values,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::build_basic;
    use crate::conv::{schoolbook_sliding, ConvConfig};
    use crate::slp::tests::sample;

    fn naive_node(trie: &Trie, v: NodeId, pattern: &[u64]) -> i64 {
        let s = trie.path_suffix(v, pattern.len());
        s.iter().zip(pattern).map(|(a, b)| (a * b) as i64).sum()
    }

    fn spell(trie: &Trie, id: NodeId) -> String {
        trie.path_suffix(id, usize::MAX)
            .iter()
            .map(|&c| (b'a' + c as u8 - 1) as char)
            .collect()
    }

    fn node_of(trie: &Trie, word: &str) -> NodeId {
        let mut node = ROOT;
        for b in word.bytes() {
            node = trie.child(node, (b - b'a' + 1) as u64).unwrap();
        }
        node
    }

    #[test]
    fn sample_decomposition() {
        let slp = sample();
        let wt = WindowTrie::build(&slp, 3).unwrap();
        let lpd = long_path_decompose(wt.trie());
        let spelled: Vec<Vec<String>> = lpd
            .paths
            .iter()
            .map(|p| p.iter().map(|&v| spell(wt.trie(), v)).collect())
            .collect();
        assert_eq!(
            spelled,
            vec![
                vec!["a", "ab", "aba", "abaa"],
                vec!["abab"],
                vec!["aa", "aab"],
                vec!["b"],
            ]
        );
        assert_eq!(lpd.paths.iter().map(Vec::len).sum::<usize>(), wt.len() - 1);
        assert_eq!(lpd.path_of[ROOT as usize], None);
    }

    #[test]
    fn single_path_trie() {
        let trie = Trie::from_strings(&[vec![3u64, 1, 4, 1, 5, 9, 2, 6]]);
        let lpd = long_path_decompose(&trie);
        assert_eq!(lpd.paths.len(), 1);
        assert_eq!(lpd.paths[0].len(), trie.len() - 1);
        let pattern = [2u64, 7, 1];
        let table = trie_convolution(&trie, &pattern, &ConvEngine::default()).unwrap();
        let expected = schoolbook_sliding(&[3, 1, 4, 1, 5, 9, 2, 6], &pattern);
        let got: Vec<i64> = (3..=8).map(|v| table.get(v).unwrap()).collect();
        assert_eq!(got, expected);
        assert_eq!(table.get(2), None);
    }

    #[test]
    fn balanced_binary_trie() {
        let k = 6;
        let words: Vec<Vec<u64>> = (0..1u32 << k)
            .map(|bits| (0..k).map(|b| 1 + ((bits >> b) & 1) as u64).collect())
            .collect();
        let trie = Trie::from_strings(&words);
        assert_eq!(trie.len(), (1 << (k + 1)) - 1);
        let lpd = long_path_decompose(&trie);
        assert_eq!(lpd.paths.iter().map(Vec::len).sum::<usize>(), trie.len() - 1);
        for path in &lpd.paths {
            // each path runs from its head down to a leaf
            let head = path[0];
            assert_eq!(path.len(), k - trie.depth(head) + 1);
        }
        let pattern = [5u64, 2, 4, 1];
        let table = trie_convolution(&trie, &pattern, &ConvEngine::default()).unwrap();
        for v in 0..trie.len() as NodeId {
            if trie.depth(v) >= 4 {
                assert_eq!(table.get(v), Some(naive_node(&trie, v, &pattern)));
            } else {
                assert_eq!(table.get(v), None);
            }
        }
    }

    #[test]
    fn sample_values_and_queries() {
        let slp = sample();
        let engine = ConvEngine::default();
        let repr = build_trie_repr(&slp, &[1, 2, 1], &engine).unwrap();
        let trie = repr.window().trie();
        for (word, value) in [("aab", 5), ("aba", 6), ("abaa", 5), ("abab", 6)] {
            assert_eq!(repr.table().get(node_of(trie, word)), Some(value), "{word}");
        }
        assert_eq!(repr.query(&slp, 3).unwrap(), 6);
        assert_eq!(repr.query(&slp, 5).unwrap(), 5);
        let basic = build_basic(&slp, &[1, 2, 1], &engine).unwrap();
        assert_eq!(
            repr.materialize(&slp, 100).unwrap(),
            basic.materialize(&slp, 100).unwrap()
        );
    }

    #[test]
    fn zero_pattern_gives_zero() {
        let slp = sample();
        let repr = build_trie_repr(&slp, &[0, 0, 0, 0], &ConvEngine::default()).unwrap();
        assert!(repr.table().defined().all(|(_, v)| v == 0));
        assert!(repr.table().defined().count() > 0);
    }

    #[test]
    fn short_paths_are_exercised() {
        // many branches of length < m hanging off a long spine
        let mut words = vec![(1..=30).map(|c| c % 5 + 1).collect::<Vec<u64>>()];
        for cut in 5..28 {
            let mut w = words[0][..cut].to_vec();
            w.extend([7, 8, 9]);
            words.push(w);
        }
        let trie = Trie::from_strings(&words);
        let engine = ConvEngine::new(ConvConfig {
            schoolbook_threshold: 0,
            ..ConvConfig::default()
        });
        let pattern: Vec<u64> = (1..=6).collect();
        let table = trie_convolution(&trie, &pattern, &engine).unwrap();
        for v in 0..trie.len() as NodeId {
            let want = (trie.depth(v) >= 6).then(|| naive_node(&trie, v, &pattern));
            assert_eq!(table.get(v), want);
        }
        assert!(engine.work().sliding_input <= 4 * trie.len() as u64);
    }

    #[test]
    fn shallow_trie_gives_empty_table() {
        let slp = sample();
        let pattern = vec![1u64; 20];
        let repr = build_trie_repr(&slp, &pattern, &ConvEngine::default()).unwrap();
        assert_eq!(repr.table().defined().count(), 0);
        assert_eq!(repr.positions(), 0);
        assert!(repr.query(&slp, 1).is_err());
    }

    #[test]
    fn tcr1_round_trip() {
        let slp = sample();
        let repr = build_trie_repr(&slp, &[1, 2, 1], &ConvEngine::default()).unwrap();
        let text = repr.to_text();
        assert!(text.starts_with("TCR1 3 9\nH "));
        let back = TrieConvRepr::parse(&text, &slp).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.materialize(&slp, 100).unwrap(), repr.materialize(&slp, 100).unwrap());
        let other = Slp::parse(b"SLP1 3\nT 1\nT 2\nB 2 1\n").unwrap();
        assert!(matches!(
            TrieConvRepr::parse(&text, &other),
            Err(Error::SlpMismatch { .. })
        ));
        let broken = text.replacen("\n1 0 1 1\n", "\n1 0 2 1\n", 1);
        assert!(TrieConvRepr::parse(&broken, &slp).is_err());
    }
}
