//! A trie holding every length-`m` window of an SLP-compressed text as the
//! last `m` characters of some root-to-node path.
//!
//! Variables are processed in index order. A terminal `X -> c` maps to the
//! root's `c` child. For a binary rule `X_j -> X_l X_r` the characters of
//! `pre(X_r, m - 1)` are inserted below the node of `X_l` (whose path ends
//! with `suf(X_l, m - 1)`), so every window stabbed at any occurrence of
//! `X_j` ends at one of the inserted nodes. Each rule inserts at most
//! `m - 1` characters no matter how often it occurs in the derivation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::slp::{Rule, Slp, Var};

pub type NodeId = u32;
pub const ROOT: NodeId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieNode {
    pub parent: NodeId,
    /// Incoming character; 0 for the root.
    pub code: u64,
    pub depth: usize,
    pub children: BTreeMap<u64, NodeId>,
}

/// A plain trie over integer codes. Node ids grow with creation order, so a
/// parent always has a smaller id than its children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trie {
    nodes: Vec<TrieNode>,
}

impl Default for Trie {
    fn default() -> Self {
        Trie {
            nodes: vec![TrieNode {
                parent: ROOT,
                code: 0,
                depth: 0,
                children: BTreeMap::new(),
            }],
        }
    }
}

impl Trie {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a trie holding each of `strings` as a root path.
    pub fn from_strings<S: AsRef<[u64]>>(strings: &[S]) -> Self {
        let mut trie = Trie::new();
        for s in strings {
            let mut node = ROOT;
            for &c in s.as_ref() {
                node = trie.child_or_insert(node, c);
            }
        }
        trie
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, id: NodeId) -> &TrieNode {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[TrieNode] {
        &self.nodes
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        (id != ROOT).then(|| self.nodes[id as usize].parent)
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id as usize].depth
    }

    pub fn child(&self, id: NodeId, code: u64) -> Option<NodeId> {
        self.nodes[id as usize].children.get(&code).copied()
    }

    /// Children in ascending code order.
    pub fn children(&self, id: NodeId) -> impl DoubleEndedIterator<Item = NodeId> + '_ {
        self.nodes[id as usize].children.values().copied()
    }

    pub fn child_or_insert(&mut self, id: NodeId, code: u64) -> NodeId {
        if let Some(c) = self.child(id, code) {
            return c;
        }
        let new = NodeId::try_from(self.nodes.len()).expect("trie exceeds u32 node ids");
        let depth = self.nodes[id as usize].depth + 1;
        self.nodes.push(TrieNode {
            parent: id,
            code,
            depth,
            children: BTreeMap::new(),
        });
        self.nodes[id as usize].children.insert(code, new);
        new
    }

    /// The last `min(k, depth)` characters on the path to `id`.
    pub fn path_suffix(&self, id: NodeId, k: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(k.min(self.depth(id)));
        let mut node = id;
        while node != ROOT && out.len() < k {
            out.push(self.nodes[node as usize].code);
            node = self.nodes[node as usize].parent;
        }
        out.reverse();
        out
    }

    /// Line-based dump: `<node id> <parent id> <char code> <depth>`, the
    /// root written as `0 0 0 0`.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(16 * self.nodes.len());
        for (id, node) in self.nodes.iter().enumerate() {
            writeln!(out, "{id} {} {} {}", node.parent, node.code, node.depth).unwrap();
        }
        out
    }
}

/// The window trie of an SLP together with the position-to-node mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowTrie {
    m: usize,
    trie: Trie,
    /// Per variable, the node whose path ends with `suf(X_i, m - 1)`.
    var_node: Vec<NodeId>,
    /// Per binary variable, the nodes reached while inserting
    /// `pre(X_r, m - 1)`; empty for terminals.
    ext: Vec<Vec<NodeId>>,
    text_chars: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrieStats {
    /// Node count, root included.
    pub r: usize,
    pub alpha: u64,
    /// `min(n m, N - alpha)`.
    pub bound: u64,
}

impl WindowTrie {
    pub fn build(slp: &Slp, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Invalid(
                "window trie needs m >= 2; m = 1 is served by the terminal table".into(),
            ));
        }
        let n = slp.n();
        let mut trie = Trie::new();
        let mut var_node = vec![ROOT; n];
        let mut ext = vec![Vec::new(); n];
        let mut text_chars = 0u64;
        let mut buf = Vec::with_capacity(m);
        for var in slp.vars() {
            match slp.rule(var) {
                Rule::Terminal(c) => var_node[var.idx()] = trie.child_or_insert(ROOT, c),
                Rule::Binary(l, r) => {
                    buf.clear();
                    slp.push_prefix(r, (m - 1) as u64, &mut buf);
                    text_chars += buf.len() as u64;
                    let mut node = var_node[l.idx()];
                    let mut visited = Vec::with_capacity(buf.len());
                    for &c in &buf {
                        node = trie.child_or_insert(node, c);
                        visited.push(node);
                    }
                    var_node[var.idx()] = if slp.len(r) >= (m - 1) as u64 {
                        var_node[r.idx()]
                    } else {
                        node
                    };
                    ext[var.idx()] = visited;
                }
            }
        }
        Ok(WindowTrie {
            m,
            trie,
            var_node,
            ext,
            text_chars,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn trie(&self) -> &Trie {
        &self.trie
    }

    pub fn len(&self) -> usize {
        self.trie.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn var_node(&self, var: Var) -> NodeId {
        self.var_node[var.idx()]
    }

    pub fn ext(&self, var: Var) -> &[NodeId] {
        &self.ext[var.idx()]
    }

    /// Text characters decompressed while building.
    pub fn text_chars(&self) -> u64 {
        self.text_chars
    }

    /// The node whose last `m` path characters spell `S[i : i + m - 1]`.
    pub fn locate(&self, slp: &Slp, i: u64) -> Result<NodeId> {
        if slp.n() != self.var_node.len() {
            return Err(Error::Invalid("window trie was built for a different grammar".into()));
        }
        let m = self.m as u64;
        let positions = (slp.text_len() + 1).saturating_sub(m);
        if i == 0 || i > positions {
            return Err(Error::OutOfRange {
                what: "position",
                value: i,
                lo: 1,
                hi: positions,
            });
        }
        let stab = slp.stab(i, i + m - 1)?;
        let Rule::Binary(l, _) = slp.rule(stab.var) else {
            return Err(Error::Internal(format!("window {i} stabbed at terminal {}", stab.var)));
        };
        let prefix_len = slp.len(l).min(m - 1);
        let t_start = stab.start + slp.len(l) - prefix_len;
        let p = i - t_start + 1;
        let q = p + m - 1 - prefix_len;
        self.ext[stab.var.idx()]
            .get((q - 1) as usize)
            .copied()
            .ok_or_else(|| Error::Internal(format!("extension index {q} missing for {}", stab.var)))
    }

    pub fn stats(&self, slp: &Slp) -> TrieStats {
        let alpha = slp.alpha(self.m);
        let nm = slp.n() as u64 * self.m as u64;
        TrieStats {
            r: self.len(),
            alpha,
            bound: nm.min(slp.text_len() - alpha),
        }
    }

    pub fn dump(&self) -> String {
        self.trie.dump()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::tests::sample;
    use std::collections::BTreeSet;

    fn codes(s: &str) -> Vec<u64> {
        s.bytes().map(|b| (b - b'a' + 1) as u64).collect()
    }

    fn spell(trie: &Trie, id: NodeId) -> String {
        trie.path_suffix(id, usize::MAX)
            .iter()
            .map(|&c| (b'a' + c as u8 - 1) as char)
            .collect()
    }

    #[test]
    fn sample_trie_nodes() {
        let slp = sample();
        let wt = WindowTrie::build(&slp, 3).unwrap();
        let spelled: BTreeSet<String> = (0..wt.len() as NodeId).map(|v| spell(wt.trie(), v)).collect();
        let expected: BTreeSet<String> = ["", "a", "b", "ab", "aa", "aab", "aba", "abaa", "abab"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(spelled, expected);

        let windows: BTreeSet<Vec<u64>> = (0..wt.len() as NodeId)
            .filter(|&v| wt.trie().depth(v) >= 3)
            .map(|v| wt.trie().path_suffix(v, 3))
            .collect();
        let grams: BTreeSet<Vec<u64>> = ["aab", "aba", "baa", "bab"].iter().map(|s| codes(s)).collect();
        assert_eq!(windows, grams);
    }

    #[test]
    fn sample_locate() {
        let slp = sample();
        let wt = WindowTrie::build(&slp, 3).unwrap();
        assert_eq!(spell(wt.trie(), wt.locate(&slp, 5).unwrap()), "abaa");
        assert_eq!(spell(wt.trie(), wt.locate(&slp, 3).unwrap()), "abab");
        assert_eq!(spell(wt.trie(), wt.locate(&slp, 1).unwrap()), "aab");
        let text = slp.decode(100).unwrap();
        for i in 1..=11u64 {
            let v = wt.locate(&slp, i).unwrap();
            assert_eq!(wt.trie().path_suffix(v, 3), text[i as usize - 1..i as usize + 2]);
        }
        assert!(wt.locate(&slp, 0).is_err());
        assert!(wt.locate(&slp, 12).is_err());
    }

    #[test]
    fn sample_stats() {
        let slp = sample();
        let wt = WindowTrie::build(&slp, 3).unwrap();
        assert_eq!(wt.stats(&slp), TrieStats { r: 9, alpha: 4, bound: 9 });
    }

    #[test]
    fn unary_squaring_chain_is_one_path() {
        let mut rules = vec![Rule::Terminal(1)];
        for i in 1..12 {
            rules.push(Rule::Binary(Var(i), Var(i)));
        }
        let slp = Slp::from_rules(rules).unwrap();
        let wt = WindowTrie::build(&slp, 5).unwrap();
        // one path; it reaches depth 2(m - 1) because X_3 (length m - 1)
        // ends at depth m - 1 and X_4 extends it by another m - 1
        assert_eq!(wt.len(), 9);
        assert!((1..9).all(|v| wt.trie().depth(v) == v as usize));
        assert!((0..9).all(|v| wt.trie().children(v).count() <= 1));
    }

    #[test]
    fn single_terminal() {
        let slp = Slp::parse(b"SLP1 1\nT 1\n").unwrap();
        let wt = WindowTrie::build(&slp, 2).unwrap();
        assert_eq!(wt.len(), 2);
        assert!(wt.locate(&slp, 1).is_err());
        assert_eq!(wt.stats(&slp).r, 2);
    }

    #[test]
    fn distinct_left_comb_is_linear() {
        let mut rules = vec![Rule::Terminal(1)];
        let mut acc = Var(1);
        for c in 2..=40u64 {
            rules.push(Rule::Terminal(c));
            let t = Var(rules.len());
            rules.push(Rule::Binary(acc, t));
            acc = Var(rules.len());
        }
        let slp = Slp::from_rules(rules).unwrap();
        for m in [2, 4, 8] {
            let wt = WindowTrie::build(&slp, m).unwrap();
            // root, 40 terminal children, and the 39-edge comb path
            assert_eq!(wt.len(), 80);
        }
    }

    #[test]
    fn rejects_small_m() {
        assert!(WindowTrie::build(&sample(), 1).is_err());
    }

    #[test]
    fn dump_format() {
        let trie = Trie::from_strings(&[vec![5u64, 2], vec![5, 3]]);
        assert_eq!(trie.dump(), "0 0 0 0\n1 0 5 1\n2 1 2 2\n3 1 3 2\n");
    }
}
