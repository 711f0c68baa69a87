//! Convolution between a grammar-compressed text and an uncompressed
//! pattern, computed without decompressing the text.
//!
//! The text is given as a straight-line program ([`Slp`]). Two compact
//! representations answer `C[i] = sum_j P[j] * S[i + j - 1]` for any
//! position: per-variable tables over the boundary strings of each rule
//! ([`BasicConvRepr`], `O(n m)` values) and a trie of all length-`m`
//! windows with one value per node ([`TrieConvRepr`]). Hamming distance
//! and wildcard matching are built on top of them in [`matcher`].

pub mod basic;
pub mod conv;
pub mod corpus;
pub mod error;
pub mod lz78;
pub mod matcher;
pub mod repr;
pub mod slp;
pub mod trie_conv;
pub mod window_trie;

pub use basic::{build_basic, BasicConvRepr};
pub use conv::{BlockStrategy, ConvConfig, ConvEngine, WorkCounters};
pub use error::{Error, Result};
pub use matcher::{dontcare_repr, hamming_repr, OccurrenceSet, Predicate, ScoreRepr};
pub use repr::{ConvRepr, Mode};
pub use slp::{Rule, Slp, StabResult, TString, Var, VarMeta};
pub use trie_conv::{build_trie_repr, long_path_decompose, trie_convolution, TrieConvRepr};
pub use window_trie::{NodeId, Trie, WindowTrie};
