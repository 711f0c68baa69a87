//! Grammar generators for tests, benchmarks and the CLI corpus command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::slp::{Rule, Slp, Var};

/// Shape limits for [`random_slp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusParams {
    pub max_rules: usize,
    pub sigma: usize,
    pub max_len: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_rules: 60,
            sigma: 4,
            max_len: 5000,
        }
    }
}

/// A random SLP with at most `max_rules` rules over codes `1..=sigma`,
/// deriving at most `max_len` characters. Most new rules take the previous
/// rule as one child, so few rules are dead and texts grow long and
/// repetitive. Rules that end up unreachable from the root are dropped and
/// the rest renumbered.
pub fn random_slp<R: Rng>(rng: &mut R, params: CorpusParams) -> Slp {
    let sigma = params.sigma.clamp(1, params.max_rules.max(1));
    let mut rules: Vec<Rule> = (1..=sigma as u64).map(Rule::Terminal).collect();
    let mut len: Vec<u64> = vec![1; sigma];
    let target = rng.gen_range(sigma..=params.max_rules.max(sigma));

    let pick = |rng: &mut R, count: usize| -> usize {
        // max of two uniforms leans towards recent variables
        rng.gen_range(0..count).max(rng.gen_range(0..count))
    };
    let mut attempts = 0;
    while rules.len() < target && attempts < 50 * params.max_rules {
        attempts += 1;
        let count = rules.len();
        let a = if rng.gen_bool(0.75) { count - 1 } else { pick(rng, count) };
        let b = if rng.gen_bool(0.2) { a } else { rng.gen_range(0..count) };
        let (l, r) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        if len[l] + len[r] > params.max_len {
            continue;
        }
        rules.push(Rule::Binary(Var(l + 1), Var(r + 1)));
        len.push(len[l] + len[r]);
    }
    prune(rules)
}

/// [`random_slp`] driven by a ChaCha generator seeded with `seed`.
pub fn seeded_slp(seed: u64, params: CorpusParams) -> Slp {
    random_slp(&mut ChaCha8Rng::seed_from_u64(seed), params)
}

/// Keeps only rules reachable from the last one.
fn prune(rules: Vec<Rule>) -> Slp {
    let n = rules.len();
    let mut live = vec![false; n];
    live[n - 1] = true;
    for k in (0..n).rev() {
        if let (true, Rule::Binary(l, r)) = (live[k], rules[k]) {
            live[l.idx()] = true;
            live[r.idx()] = true;
        }
    }
    let mut renumber = vec![0usize; n];
    let mut kept = Vec::new();
    for k in 0..n {
        if live[k] {
            kept.push(match rules[k] {
                Rule::Terminal(c) => Rule::Terminal(c),
                Rule::Binary(l, r) => Rule::Binary(Var(renumber[l.idx()]), Var(renumber[r.idx()])),
            });
            renumber[k] = kept.len();
        }
    }
    Slp::from_rules(kept).expect("pruned grammar is valid")
}

/// `X_1 -> code`, `X_{i+1} -> X_i X_i`: a text of `2^(n-1)` copies of `code`.
pub fn squaring_chain(n: usize, code: u64) -> Slp {
    let mut rules = vec![Rule::Terminal(code)];
    for i in 1..n {
        rules.push(Rule::Binary(Var(i), Var(i)));
    }
    Slp::from_rules(rules).expect("squaring chain is valid")
}

/// Fibonacci words: `X_1 -> b`, `X_2 -> a`, `X_{i} -> X_{i-1} X_{i-2}`.
/// For `n < 3` the single-character word of `X_n` is returned.
pub fn fibonacci(n: usize) -> Slp {
    if n < 3 {
        let code = if n == 2 { 1 } else { 2 };
        return Slp::from_rules(vec![Rule::Terminal(code)]).expect("single terminal");
    }
    let mut rules = vec![Rule::Terminal(2), Rule::Terminal(1)];
    for i in 3..=n {
        rules.push(Rule::Binary(Var(i - 1), Var(i - 2)));
    }
    Slp::from_rules(rules).expect("fibonacci grammar is valid")
}

/// A left-deep comb deriving `text` character by character.
pub fn left_comb(text: &[u64]) -> Slp {
    let mut rules = vec![Rule::Terminal(text[0])];
    let mut acc = Var(1);
    for &c in &text[1..] {
        rules.push(Rule::Terminal(c));
        let t = Var(rules.len());
        rules.push(Rule::Binary(acc, t));
        acc = Var(rules.len());
    }
    Slp::from_rules(rules).expect("comb grammar is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_grammars_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = CorpusParams::default();
        for _ in 0..200 {
            let slp = random_slp(&mut rng, params);
            assert!(slp.n() <= 60);
            assert!(slp.text_len() <= 5000);
            assert!(slp.alphabet_size() <= 4);
        }
    }

    #[test]
    fn fibonacci_lengths() {
        // hand expansion: lengths follow the Fibonacci numbers
        let lens: Vec<u64> = (1..=10).map(|n| fibonacci(n).text_len()).collect();
        assert_eq!(lens, vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55]);
        let w = fibonacci(6).decode(100).unwrap();
        // abaab aba -> "abaababa"
        assert_eq!(w, vec![1, 2, 1, 1, 2, 1, 2, 1]);
    }

    #[test]
    fn squaring_chain_is_huge_but_small() {
        let slp = squaring_chain(40, 1);
        assert_eq!(slp.text_len(), 1 << 39);
        assert_eq!(slp.n(), 40);
    }

    #[test]
    fn comb_decodes() {
        let text = [3u64, 1, 4, 1, 5];
        assert_eq!(left_comb(&text).decode(10).unwrap(), text);
    }
}
