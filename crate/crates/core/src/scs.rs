//! Exact shortest common supersequence of a handful of short strands.
//!
//! Breadth-first search over the lattice of match pointers: a state records how
//! many symbols of each strand are already covered, and emitting symbol `c`
//! advances every strand whose next symbol is `c`. All moves cost one, so the
//! first time the all-covered state is reached gives an optimal witness.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Symbol;

#[derive(Debug, Clone, Copy)]
pub struct ScsLimits {
    pub max_strands: usize,
    /// Upper bound on `Π (n_i + 1)`.
    pub max_states: usize,
}

impl Default for ScsLimits {
    fn default() -> Self {
        Self { max_strands: 4, max_states: 100_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scs {
    pub length: usize,
    pub witness: Vec<Symbol>,
}

pub fn is_subsequence(needle: &[Symbol], haystack: &[Symbol]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|c| it.any(|h| h == c))
}

pub fn scs_exact(strands: &[Vec<Symbol>], limits: ScsLimits) -> Result<Scs> {
    if strands.len() > limits.max_strands {
        return Err(Error::TooLarge(format!(
            "{} strands exceeds the limit of {}",
            strands.len(),
            limits.max_strands
        )));
    }
    // mixed-radix encoding of the pointer tuple
    let mut radix = Vec::with_capacity(strands.len());
    let mut total: usize = 1;
    for s in strands {
        radix.push(total);
        total = total
            .checked_mul(s.len() + 1)
            .filter(|&t| t <= limits.max_states)
            .ok_or_else(|| {
                Error::TooLarge(format!("state space exceeds {} states", limits.max_states))
            })?;
    }
    let goal = total - 1;

    let mut alphabet: Vec<Symbol> = strands.iter().flatten().copied().collect();
    alphabet.sort_unstable();
    alphabet.dedup();

    let pointer = |state: usize, i: usize| (state / radix[i]) % (strands[i].len() + 1);

    let mut parent: HashMap<usize, (usize, Symbol)> = HashMap::from([(0, (0, 0))]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(state) = queue.pop_front() {
        if state == goal {
            break;
        }
        for &c in &alphabet {
            let mut next = state;
            for (i, s) in strands.iter().enumerate() {
                let p = pointer(state, i);
                if p < s.len() && s[p] == c {
                    next += radix[i];
                }
            }
            if next != state && !parent.contains_key(&next) {
                parent.insert(next, (state, c));
                queue.push_back(next);
            }
        }
    }

    let mut witness = Vec::new();
    let mut state = goal;
    while state != 0 {
        let (prev, c) = parent[&state];
        witness.push(c);
        state = prev;
    }
    witness.reverse();
    if let Some(bad) = strands.iter().position(|s| !is_subsequence(s, &witness)) {
        return Err(Error::NumericalFailure(format!(
            "witness does not cover strand {bad}"
        )));
    }
    Ok(Scs { length: witness.len(), witness })
}
