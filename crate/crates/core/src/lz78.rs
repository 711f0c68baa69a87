//! LZ78 factorization turned into an SLP.
//!
//! Each factor `(prev, c)` becomes a binary variable over the previous
//! factor's variable and the terminal for `c` (a factor with an empty
//! reference is the terminal itself). The factors are then joined left to
//! right by a spine of binary variables whose last element is the root.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::slp::{Rule, Slp, Var};

/// The LZ78 factors of `text` as `(reference, character)` pairs, where the
/// reference is the 1-based index of an earlier factor (0 for none). The
/// last factor may repeat an earlier phrase, in which case its character is
/// `None` and the reference names that phrase.
pub fn factorize(text: &[u64]) -> Vec<(usize, Option<u64>)> {
    let mut dict: HashMap<(usize, u64), usize> = HashMap::new();
    let mut factors = Vec::new();
    let mut cur = 0usize;
    for &c in text {
        match dict.get(&(cur, c)) {
            Some(&next) => cur = next,
            None => {
                factors.push((cur, Some(c)));
                dict.insert((cur, c), factors.len());
                cur = 0;
            }
        }
    }
    if cur != 0 {
        factors.push((cur, None));
    }
    factors
}

/// Compresses `text` (codes >= 1) into an SLP deriving exactly `text`.
pub fn compress(text: &[u64]) -> Result<Slp> {
    if text.is_empty() {
        return Err(Error::Empty);
    }
    if text.contains(&0) {
        return Err(Error::Invalid("text codes must be at least 1".into()));
    }
    let mut rules: Vec<Rule> = Vec::new();
    let mut terminal: HashMap<u64, Var> = HashMap::new();
    let mut factor_var: Vec<Var> = Vec::new();
    let mut spine: Option<Var> = None;

    let push = |rules: &mut Vec<Rule>, rule: Rule| {
        rules.push(rule);
        Var(rules.len())
    };

    for (prev, c) in factorize(text) {
        let var = match c {
            None => factor_var[prev - 1],
            Some(c) => {
                let t = match terminal.get(&c) {
                    Some(&t) => t,
                    None => {
                        let t = push(&mut rules, Rule::Terminal(c));
                        terminal.insert(c, t);
                        t
                    }
                };
                if prev == 0 {
                    t
                } else {
                    push(&mut rules, Rule::Binary(factor_var[prev - 1], t))
                }
            }
        };
        factor_var.push(var);
        spine = Some(match spine {
            None => var,
            Some(s) => push(&mut rules, Rule::Binary(s, var)),
        });
    }
    Slp::from_rules(rules)
}
