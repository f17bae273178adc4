//! The entropy-maximizing Markov measure on the run-length system.
//!
//! `Q_{ij} = A_{ij} φ_j / (λ φ_i)` and `π_i = φ_i ξ_i`, with `Σ ξ_i φ_i = 1`.
//! Strands are the edge labels of a stationary walk: the start state is drawn
//! from `π` and each step from the current row of `Q`.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{check_admissible, TransferGraph};
use crate::par::Execution;
use crate::params::{lsb_run, ConstraintParams, StateId, Symbol};
use crate::seeding::{substream, Rng};
use crate::spectral::SpectralData;

/// Tolerance on `‖πQ - π‖_∞` accepted by [`build_measure`].
pub const STATIONARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MarkovMeasure {
    params: ConstraintParams,
    graph: TransferGraph,
    lambda: f64,
    phi: Vec<f64>,
    /// `Q` row by row, aligned with `graph.successors(i)`.
    q: Vec<Vec<f64>>,
    pi: Vec<f64>,
    pi_cdf: Vec<f64>,
}

pub fn build_measure(spectral: &SpectralData, graph: &TransferGraph) -> Result<MarkovMeasure> {
    let n = graph.state_count();
    if spectral.phi.len() != n || spectral.xi.len() != n {
        return Err(Error::ShapeMismatch { expected: n, got: spectral.phi.len() });
    }
    let lambda = spectral.lambda;
    let phi = &spectral.phi;
    let q: Vec<Vec<f64>> = graph
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|j| phi[j.0] / (lambda * phi[i])).collect())
        .collect();
    let pi: Vec<f64> = phi.iter().zip(&spectral.xi).map(|(a, b)| a * b).collect();
    if pi.iter().any(|&p| p.is_nan() || p <= 0.0) {
        return Err(Error::NumericalFailure("stationary distribution not positive".into()));
    }
    let mut acc = 0.0;
    let pi_cdf = pi
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let measure = MarkovMeasure {
        params: *graph.params(),
        graph: graph.clone(),
        lambda,
        phi: phi.clone(),
        q,
        pi,
        pi_cdf,
    };
    let residual = measure.stationarity_residual();
    if residual > STATIONARITY_TOL {
        return Err(Error::NumericalFailure(format!(
            "stationarity residual {residual:e} exceeds {STATIONARITY_TOL:e}"
        )));
    }
    Ok(measure)
}

/// `μ(a b^i)` for `i = 1..=max_i` with `a = 0, b = 1`, plus how far the same
/// quantities drift over every other ordered pair `a ≠ b`.
#[derive(Debug, Clone, Serialize)]
pub struct RunTable {
    pub probabilities: Vec<f64>,
    /// `max |μ(a b^i) - μ(0 1^i)|` over all `a ≠ b` and `i`.
    pub max_symmetry_gap: f64,
    /// `min_i μ(ab^i) - μ(ab^{i+1})` over all pairs; positive iff strictly decreasing.
    pub min_decrease: f64,
}

/// Batch of `M` strands of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Batch {
    pub strands: Vec<Vec<Symbol>>,
    pub seed: u64,
    pub params: ConstraintParams,
}

impl MarkovMeasure {
    pub fn from_params(params: ConstraintParams) -> Result<Self> {
        let graph = crate::graph::build_graph(params);
        let spectral = SpectralData::compute(&graph)?;
        build_measure(&spectral, &graph)
    }

    pub fn params(&self) -> &ConstraintParams {
        &self.params
    }

    pub fn graph(&self) -> &TransferGraph {
        &self.graph
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Transition probabilities of `state`, aligned with its successors.
    pub fn row(&self, state: StateId) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.graph
            .successors(state)
            .iter()
            .copied()
            .zip(self.q[state.0].iter().copied())
    }

    /// `Q_{ij}`, zero off the edge set.
    pub fn q(&self, from: StateId, to: StateId) -> f64 {
        self.graph
            .successors(from)
            .binary_search(&to)
            .map(|pos| self.q[from.0][pos])
            .unwrap_or(0.0)
    }

    /// `max_i |Σ_j Q_{ij} - 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.q
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `‖πQ - π‖_∞`.
    pub fn stationarity_residual(&self) -> f64 {
        let mut next = vec![0.0; self.pi.len()];
        for (i, row) in self.q.iter().enumerate() {
            for (j, p) in self.graph.successors(StateId(i)).iter().zip(row) {
                next[j.0] += self.pi[i] * p;
            }
        }
        next.iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `-Σ_i π_i Σ_j Q_{ij} log_r Q_{ij}`.
    pub fn entropy_rate(&self) -> f64 {
        let ln_r = (self.params.r() as f64).ln();
        -self
            .q
            .iter()
            .zip(&self.pi)
            .map(|(row, p)| p * row.iter().map(|q| q * q.ln()).sum::<f64>())
            .sum::<f64>()
            / ln_r
    }

    /// Stationary probability that `word.len()` consecutive emitted labels
    /// equal `word`. Inadmissible words have probability zero.
    pub fn pattern_probability(&self, word: &[Symbol]) -> Result<f64> {
        self.params.check_word(word)?;
        if word.is_empty() {
            return Ok(1.0);
        }
        Ok(self
            .params
            .states()
            .map(|start| {
                let mut state = start;
                let mut prob = self.pi[start.0];
                for &c in word {
                    match self.graph.step(state, c) {
                        Some(next) => {
                            prob *= self.q(state, next);
                            state = next;
                        }
                        None => return 0.0,
                    }
                }
                prob
            })
            .sum())
    }

    pub fn run_probability_table(&self, max_i: usize) -> Result<RunTable> {
        let r = self.params.r() as Symbol;
        let run = |a: Symbol, b: Symbol| -> Result<Vec<f64>> {
            (1..=max_i)
                .map(|i| {
                    let mut word = vec![b; i + 1];
                    word[0] = a;
                    self.pattern_probability(&word)
                })
                .collect()
        };
        let reference = run(0, 1)?;
        let mut max_symmetry_gap = 0.0f64;
        let mut min_decrease = f64::INFINITY;
        for a in 0..r {
            for b in (0..r).filter(|&b| b != a) {
                let probs = run(a, b)?;
                for (x, y) in probs.iter().zip(&reference) {
                    max_symmetry_gap = max_symmetry_gap.max((x - y).abs());
                }
                for w in probs.windows(2) {
                    min_decrease = min_decrease.min(w[0] - w[1]);
                }
            }
        }
        Ok(RunTable { probabilities: reference, max_symmetry_gap, min_decrease })
    }

    /// Whether `Q_{ij} > Q_{it}` for all successors `j, t` of every `i` with
    /// `lsb_run(j) < lsb_run(t)`.
    pub fn successor_order_check(&self) -> bool {
        self.params.states().all(|i| {
            let row: Vec<(usize, f64)> =
                self.row(i).map(|(j, q)| (lsb_run(j, &self.params), q)).collect();
            row.iter().all(|&(lj, qj)| {
                row.iter().all(|&(lt, qt)| lj >= lt || qj > qt)
            })
        })
    }

    fn draw_start(&self, rng: &mut Rng) -> StateId {
        let u: f64 = rng.random::<f64>() * self.pi_cdf[self.pi_cdf.len() - 1];
        let idx = self.pi_cdf.partition_point(|&c| c <= u);
        StateId(idx.min(self.pi.len() - 1))
    }

    fn draw_next(&self, state: StateId, rng: &mut Rng) -> StateId {
        let row = &self.q[state.0];
        let succ = self.graph.successors(state);
        let mut u: f64 = rng.random();
        for (j, &p) in succ.iter().zip(row) {
            if u < p {
                return *j;
            }
            u -= p;
        }
        *succ.last().expect("every state has successors")
    }

    /// Stationary vertex walk `X_0, …, X_n`.
    pub fn sample_path(&self, rng: &mut Rng, n: usize) -> Vec<StateId> {
        let mut path = Vec::with_capacity(n + 1);
        let mut state = self.draw_start(rng);
        path.push(state);
        for _ in 0..n {
            state = self.draw_next(state, rng);
            path.push(state);
        }
        path
    }

    /// Labels of an `n`-step stationary walk.
    pub fn sample_strand(&self, rng: &mut Rng, n: usize) -> Vec<Symbol> {
        let mut state = self.draw_start(rng);
        (0..n)
            .map(|_| {
                state = self.draw_next(state, rng);
                state.label(&self.params)
            })
            .collect()
    }

    /// `m` independent strands of length `n`; strand `i` uses substream `i` of `seed`.
    pub fn sample_batch(&self, n: usize, m: usize, seed: u64, exec: Execution) -> Batch {
        let strands = exec.map_indexed(m, |i| {
            let mut rng = substream(seed, i as u64);
            self.sample_strand(&mut rng, n)
        });
        Batch { strands, seed, params: self.params }
    }
}

impl Batch {
    pub fn check(&self) -> Result<()> {
        self.strands
            .iter()
            .try_for_each(|s| check_admissible(s, &self.params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(r: usize, k: usize) -> MarkovMeasure {
        MarkovMeasure::from_params(ConstraintParams::new(r, k).unwrap()).unwrap()
    }

    #[test]
    fn k1_is_uniform() {
        let m = measure(4, 1);
        for i in 0..4 {
            assert!((m.pi()[i] - 0.25).abs() < 1e-14);
            for j in 0..4 {
                let expect = if i == j { 0.0 } else { 1.0 / 3.0 };
                assert!((m.q(StateId(i), StateId(j)) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn golden_ratio_transitions() {
        let m = measure(2, 2);
        let l = m.lambda();
        // state 01 → 11 repeats the 1, 01 → 10 switches
        assert!((m.q(StateId(1), StateId(3)) - 1.0 / (l * l)).abs() < 1e-14);
        assert!((m.q(StateId(1), StateId(2)) - 1.0 / l).abs() < 1e-14);
        assert!(m.row_sum_error() < 1e-12);
    }

    #[test]
    fn constant_rows_have_r_minus_1_entries() {
        let m = measure(3, 3);
        for a in 0..3 {
            assert_eq!(m.row(m.params().constant_state(a)).count(), 2);
        }
    }

    #[test]
    fn forbidden_and_normalized() {
        let m = measure(2, 2);
        assert_eq!(m.pattern_probability(&[0, 0, 0]).unwrap(), 0.0);
        let mut total = 0.0;
        for w in 0..8u8 {
            total += m.pattern_probability(&[w >> 2 & 1, w >> 1 & 1, w & 1]).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert!(m.pattern_probability(&[2]).is_err());
    }

    #[test]
    fn successor_order() {
        assert!(measure(2, 2).successor_order_check());
        assert!(measure(4, 3).successor_order_check());
        assert!(measure(3, 1).successor_order_check());
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let m = measure(3, 2);
        let a = m.sample_batch(50, 20, 11, Execution::Parallel);
        let b = m.sample_batch(50, 20, 11, Execution::Sequential);
        assert_eq!(a, b);
        a.check().unwrap();
        assert_ne!(a, m.sample_batch(50, 20, 12, Execution::Sequential));
    }
}
