//! Constraint parameters and state indexing.
//!
//! A state of the span-`k` presentation is a `k`-digit base-`r` number
//! `(i_{k-1} … i_0)`. The least significant digit `i_0` is the most recently
//! emitted symbol, so the run of equal low digits is the current run length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

/// The pair `(r, k)`: alphabet `[r]`, no run longer than `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintParams {
    r: usize,
    k: usize,
    state_count: usize,
}

impl ConstraintParams {
    pub fn new(r: usize, k: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParams("r must be ≥ 2".into()));
        }
        if r > 256 {
            return Err(Error::InvalidParams("r must be ≤ 256".into()));
        }
        if k < 1 {
            return Err(Error::InvalidParams("k must be ≥ 1".into()));
        }
        let state_count = u32::try_from(k)
            .ok()
            .and_then(|k| r.checked_pow(k))
            .ok_or_else(|| Error::InvalidParams(format!("r^k overflows for r={r}, k={k}")))?;
        Ok(Self { r, k, state_count })
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// `r^k`.
    #[inline]
    pub fn state_count(&self) -> usize {
        self.state_count
    }

    /// `(r^k - 1) / (r - 1)`, the index of the state `11…1`. The all-same-digit
    /// states are exactly the multiples `j * repunit()` for `j ∈ [r]`.
    #[inline]
    pub fn repunit(&self) -> usize {
        (self.state_count - 1) / (self.r - 1)
    }

    /// The state `a^k`.
    #[inline]
    pub fn constant_state(&self, a: Symbol) -> StateId {
        StateId(a as usize * self.repunit())
    }

    pub fn check_symbol(&self, s: Symbol) -> Result<()> {
        if (s as usize) < self.r {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange { symbol: s, r: self.r })
        }
    }

    pub fn check_word(&self, word: &[Symbol]) -> Result<()> {
        word.iter().try_for_each(|&s| self.check_symbol(s))
    }

    /// Iterator over all states.
    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.state_count).map(StateId)
    }
}

/// Index of a vertex of the presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

impl StateId {
    /// Builds a state from its `k` digits, most significant first. This is the
    /// state reached after emitting `digits` in order.
    pub fn from_digits(digits: &[Symbol], params: &ConstraintParams) -> Result<Self> {
        if digits.len() != params.k() {
            return Err(Error::ShapeMismatch { expected: params.k(), got: digits.len() });
        }
        params.check_word(digits)?;
        Ok(StateId(
            digits.iter().fold(0usize, |acc, &d| acc * params.r() + d as usize),
        ))
    }

    /// The `k` digits, most significant first.
    pub fn digits(self, params: &ConstraintParams) -> Vec<Symbol> {
        let mut out = vec![0; params.k()];
        let mut x = self.0;
        for slot in out.iter_mut().rev() {
            *slot = (x % params.r()) as Symbol;
            x /= params.r();
        }
        out
    }

    /// The least significant digit, i.e. the label of every edge entering this state.
    #[inline]
    pub fn label(self, params: &ConstraintParams) -> Symbol {
        (self.0 % params.r()) as Symbol
    }

    pub fn is_valid(self, params: &ConstraintParams) -> bool {
        self.0 < params.state_count()
    }

    /// Whether all `k` digits are equal.
    #[inline]
    pub fn is_constant(self, params: &ConstraintParams) -> bool {
        self.0.is_multiple_of(params.repunit())
    }
}

/// Number of repeated least-significant base-`r` digits of `state`, in `[1, k]`.
pub fn lsb_run(state: StateId, params: &ConstraintParams) -> usize {
    let r = params.r();
    let mut x = state.0;
    let low = x % r;
    let mut run = 1;
    x /= r;
    while run < params.k() && x % r == low {
        run += 1;
        x /= r;
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: usize, k: usize) -> ConstraintParams {
        ConstraintParams::new(r, k).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ConstraintParams::new(1, 2).is_err());
        assert!(ConstraintParams::new(2, 0).is_err());
        assert!(ConstraintParams::new(2, 64).is_err());
        assert!(ConstraintParams::new(2, 63).is_ok());
        let msg = ConstraintParams::new(1, 2).unwrap_err().to_string();
        assert_eq!(msg, "r must be ≥ 2");
    }

    #[test]
    fn lsb_run_examples() {
        assert_eq!(lsb_run(StateId(3), &p(2, 3)), 2);
        assert_eq!(lsb_run(StateId(4), &p(2, 3)), 2);
        assert_eq!(lsb_run(StateId(0), &p(2, 3)), 3);
        assert_eq!(lsb_run(StateId(5), &p(3, 2)), 1);
        assert_eq!(lsb_run(StateId(7), &p(2, 3)), 3);
        assert_eq!(lsb_run(StateId(2), &p(3, 1)), 1);
    }

    #[test]
    fn digits_round_trip() {
        let params = p(3, 4);
        for s in params.states() {
            let d = s.digits(&params);
            assert_eq!(StateId::from_digits(&d, &params).unwrap(), s);
        }
    }

    #[test]
    fn constant_states() {
        let params = p(4, 3);
        let constant: Vec<_> = params.states().filter(|s| s.is_constant(&params)).collect();
        assert_eq!(constant, vec![StateId(0), StateId(21), StateId(42), StateId(63)]);
        assert_eq!(params.constant_state(2), StateId(42));
    }
}
