//! Either compact representation behind one interface.

use std::str::FromStr;
use std::sync::Arc;

use crate::basic::{build_basic_mapped, BasicConvRepr};
use crate::conv::ConvEngine;
use crate::error::{Error, Result};
use crate::slp::Slp;
use crate::trie_conv::TrieConvRepr;
use crate::window_trie::WindowTrie;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Per-variable tables, `O(n m)` entries.
    Basic,
    /// Window trie with per-node values, `O(min(n m, N - alpha))` entries.
    #[default]
    Trie,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Mode::Basic),
            "trie" => Ok(Mode::Trie),
            _ => Err(Error::Invalid(format!("unknown mode {s:?} (expected basic or trie)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvRepr {
    Basic(BasicConvRepr),
    Trie(TrieConvRepr),
}

impl ConvRepr {
    /// Builds in the requested mode. Patterns of length 1, or longer than
    /// the text, always give the basic layout.
    pub fn build(slp: &Slp, pattern: &[u64], mode: Mode, engine: &ConvEngine) -> Result<Self> {
        Self::build_mapped(slp, pattern, mode, None, &|c| c, engine)
    }

    /// Builds with text characters passed through `map`. A window trie
    /// built for the same grammar and `m` may be passed in to be shared.
    pub fn build_mapped(
        slp: &Slp,
        pattern: &[u64],
        mode: Mode,
        window: Option<Arc<WindowTrie>>,
        map: &dyn Fn(u64) -> u64,
        engine: &ConvEngine,
    ) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::EmptyPattern);
        }
        if mode == Mode::Basic || pattern.len() == 1 || pattern.len() as u64 > slp.text_len() {
            return build_basic_mapped(slp, pattern, map, engine).map(ConvRepr::Basic);
        }
        let window = match window {
            Some(w) => w,
            None => Arc::new(WindowTrie::build(slp, pattern.len())?),
        };
        TrieConvRepr::with_trie(slp, window, pattern, map, engine).map(ConvRepr::Trie)
    }

    pub fn mode(&self) -> Mode {
        match self {
            ConvRepr::Basic(_) => Mode::Basic,
            ConvRepr::Trie(_) => Mode::Trie,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            ConvRepr::Basic(b) => b.m(),
            ConvRepr::Trie(t) => t.m(),
        }
    }

    pub fn positions(&self) -> u64 {
        match self {
            ConvRepr::Basic(b) => b.positions(),
            ConvRepr::Trie(t) => t.positions(),
        }
    }

    pub fn check_slp(&self, slp: &Slp) -> Result<()> {
        match self {
            ConvRepr::Basic(b) => b.check_slp(slp),
            ConvRepr::Trie(t) => t.check_slp(slp),
        }
    }

    pub fn query(&self, slp: &Slp, i: u64) -> Result<i64> {
        match self {
            ConvRepr::Basic(b) => b.query(slp, i),
            ConvRepr::Trie(t) => t.query(slp, i),
        }
    }

    pub fn materialize(&self, slp: &Slp, cap: u64) -> Result<Vec<i64>> {
        match self {
            ConvRepr::Basic(b) => b.materialize(slp, cap),
            ConvRepr::Trie(t) => t.materialize(slp, cap),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            ConvRepr::Basic(b) => b.to_text(),
            ConvRepr::Trie(t) => t.to_text(),
        }
    }

    /// Parses a BCR1 or TCR1 file and checks it against `slp`.
    pub fn parse(text: &str, slp: &Slp) -> Result<Self> {
        if text.starts_with("BCR1 ") {
            let b = BasicConvRepr::parse(text)?;
            b.check_slp(slp)?;
            Ok(ConvRepr::Basic(b))
        } else if text.starts_with("TCR1 ") {
            TrieConvRepr::parse(text, slp).map(ConvRepr::Trie)
        } else {
            Err(Error::Syntax {
                line: 1,
                msg: "expected a BCR1 or TCR1 header".into(),
            })
        }
    }
}
