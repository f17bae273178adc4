//! The de Bruijn-derived presentation of the `k`-run-length system over `[r]`.
//!
//! Vertices are the `r^k` words of length `k`; an edge `u → v` exists when the
//! last `k-1` symbols of `u` are the first `k-1` symbols of `v`, and it is
//! labelled with the last symbol of `v`. Removing the `r` self-loops at the
//! constant words `a^k` leaves exactly the words with no run longer than `k`.
//!
//! With states written as base-`r` numbers, the successors of `i` are
//! `(i mod r^{k-1})·r + c` for `c ∈ [r]`, minus `i` itself.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::{ConstraintParams, StateId, Symbol};

/// Largest graph for which [`TransferGraph::dense`] is offered.
pub const DENSE_EXPORT_LIMIT: usize = 4096;

/// Sparse adjacency of the presentation. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferGraph {
    params: ConstraintParams,
    rows: Vec<Vec<StateId>>,
}

pub fn build_graph(params: ConstraintParams) -> TransferGraph {
    let r = params.r();
    let high = params.state_count() / r; // r^{k-1}
    let rows = params
        .states()
        .map(|i| {
            let base = (i.0 % high) * r;
            (0..r)
                .map(|c| StateId(base + c))
                .filter(|&j| j != i)
                .collect()
        })
        .collect();
    TransferGraph { params, rows }
}

impl TransferGraph {
    pub fn params(&self) -> &ConstraintParams {
        &self.params
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    /// Sorted successors of `state`.
    pub fn successors(&self, state: StateId) -> &[StateId] {
        &self.rows[state.0]
    }

    pub fn rows(&self) -> &[Vec<StateId>] {
        &self.rows
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, from: StateId, to: StateId) -> bool {
        from.is_valid(&self.params) && self.rows[from.0].binary_search(&to).is_ok()
    }

    /// The successor of `state` reached by emitting `label`, if that edge exists.
    pub fn step(&self, state: StateId, label: Symbol) -> Option<StateId> {
        let r = self.params.r();
        let next = StateId((state.0 % (self.params.state_count() / r)) * r + label as usize);
        (next != state && (label as usize) < r).then_some(next)
    }

    /// Follows `labels` from `start`, returning the end state.
    pub fn walk(&self, start: StateId, labels: &[Symbol]) -> Option<StateId> {
        labels.iter().try_fold(start, |s, &c| self.step(s, c))
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|j| x[j.0]).sum();
        }
    }

    /// `y = Aᵀ x`.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (xi, row) in x.iter().zip(&self.rows) {
            for j in row {
                y[j.0] += xi;
            }
        }
    }

    /// Dense 0/1 adjacency matrix; only for `r^k ≤ 4096`.
    pub fn dense(&self) -> Result<Vec<Vec<u8>>> {
        let n = self.state_count();
        if n > DENSE_EXPORT_LIMIT {
            return Err(Error::TooLarge(format!(
                "dense export limited to {DENSE_EXPORT_LIMIT} states, graph has {n}"
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; n];
                row.iter().for_each(|j| dense[j.0] = 1);
                dense
            })
            .collect())
    }

    /// Dense matrix as text: one row per line, entries separated by a space.
    pub fn dense_text(&self) -> Result<String> {
        let mut out = String::new();
        for row in self.dense()? {
            let line: Vec<_> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        Ok(out)
    }

    /// Diagonal positions zeroed relative to the de Bruijn graph of span `k`.
    pub fn removed_self_loops(&self) -> Vec<(usize, usize)> {
        (0..self.params.r())
            .map(|a| {
                let s = self.params.constant_state(a as Symbol).0;
                (s, s)
            })
            .collect()
    }

    /// Adjacency triples `row,col,1`, one per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for (i, row) in self.rows.iter().enumerate() {
            for j in row {
                let _ = writeln!(out, "{i},{},1", j.0);
            }
        }
        out
    }

    pub fn is_irreducible(&self) -> bool {
        let rows: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|s| s.0).collect())
            .collect();
        is_strongly_connected(&rows)
    }
}

/// Strong connectivity by forward and backward reachability from vertex 0,
/// counting only paths of positive length, so an isolated vertex is not
/// considered connected to itself.
pub fn is_strongly_connected(rows: &[Vec<usize>]) -> bool {
    let n = rows.len();
    if n == 0 {
        return false;
    }
    let mut reverse = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            if j >= n {
                return false;
            }
            reverse[j].push(i);
        }
    }
    reaches_all(rows, 0) && reaches_all(&reverse, 0)
}

fn reaches_all(adj: &[Vec<usize>], start: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = adj[start].iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        if !seen[v] {
            seen[v] = true;
            queue.extend(adj[v].iter().copied().filter(|&w| !seen[w]));
        }
    }
    seen.into_iter().all(|s| s)
}

/// Whether `word` has no run of `k + 1` equal symbols.
pub fn is_admissible(word: &[Symbol], params: &ConstraintParams) -> Result<bool> {
    params.check_word(word)?;
    Ok(first_violation(word, params.k()).is_none())
}

/// Position of the symbol that completes the first run of length `k + 1`.
fn first_violation(word: &[Symbol], k: usize) -> Option<usize> {
    let mut run = 0;
    for (i, &s) in word.iter().enumerate() {
        run = if i > 0 && word[i - 1] == s { run + 1 } else { 1 };
        if run > k {
            return Some(i);
        }
    }
    None
}

pub fn check_admissible(word: &[Symbol], params: &ConstraintParams) -> Result<()> {
    params.check_word(word)?;
    match first_violation(word, params.k()) {
        None => Ok(()),
        Some(position) => Err(Error::Inadmissible { k: params.k(), position }),
    }
}

/// Exact number of admissible words of length `n`.
///
/// Every word of length `≤ k` is admissible. A longer word is its first `k`
/// symbols (a state) followed by the labels of a unique path of length
/// `n - k`, so the count is `1ᵀ A^{n-k} 1`.
pub fn count_words(n: usize, params: &ConstraintParams) -> BigUint {
    let graph = build_graph(*params);
    count_words_in(n, &graph)
}

pub fn count_words_in(n: usize, graph: &TransferGraph) -> BigUint {
    let params = graph.params();
    if n <= params.k() {
        return BigUint::from(params.r()).pow(n as u32);
    }
    // paths[i] = number of paths of the current length ending at i
    let mut paths: Vec<BigUint> = vec![BigUint::one(); graph.state_count()];
    let mut next = vec![BigUint::zero(); graph.state_count()];
    for _ in 0..(n - params.k()) {
        next.iter_mut().for_each(|v| v.set_zero());
        for (count, row) in paths.iter().zip(graph.rows()) {
            for j in row {
                next[j.0] += count;
            }
        }
        std::mem::swap(&mut paths, &mut next);
    }
    paths.into_iter().sum()
}

/// Differencing map onto generalized `(0, k-1)`-RLL words:
/// `x_i = (w_{i+1} - w_i) mod r`. The output has no run of `k` zeros.
pub fn to_rll_word(word: &[Symbol], params: &ConstraintParams) -> Result<Vec<Symbol>> {
    if word.is_empty() {
        return Err(Error::InvalidParams("word must be nonempty".into()));
    }
    check_admissible(word, params)?;
    let r = params.r();
    Ok(word
        .windows(2)
        .map(|w| ((w[1] as usize + r - w[0] as usize) % r) as Symbol)
        .collect())
}

/// Inverse of [`to_rll_word`] given the first symbol.
pub fn from_rll_word(first: Symbol, rll: &[Symbol], params: &ConstraintParams) -> Result<Vec<Symbol>> {
    params.check_symbol(first)?;
    params.check_word(rll)?;
    let r = params.r();
    let mut out = Vec::with_capacity(rll.len() + 1);
    out.push(first);
    for &d in rll {
        let last = *out.last().unwrap() as usize;
        out.push(((last + d as usize) % r) as Symbol);
    }
    Ok(out)
}
