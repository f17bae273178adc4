//! Capacity and Perron data of the presentation.
//!
//! The Perron eigenvalue `λ_k` is the largest real root of
//! `h_{k,r}(z) = z^k - (r-1)(1 + z + … + z^{k-1})`, which lies in
//! `(r - 1/k, r)` for `k ≥ 2` and equals `r - 1` for `k = 1`. The right
//! eigenvector has a closed form in terms of the polynomials
//! `g_{m,r}(z) = z^{m-1}/(r-1) - (z + … + z^{m-2})`: the entry of state `i`
//! is `1` when all `k` digits agree and `g_{l+1}(λ_k)` otherwise, where `l`
//! is the run of equal low digits of `i`. The same vector is produced by
//! iterating the block construction [`PerronForm::apply_t`] from the
//! all-ones vector of span 1. No closed form is known for the left
//! eigenvector, so it is computed by power iteration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_graph, TransferGraph};
use crate::params::{lsb_run, ConstraintParams};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;

/// `h_{k,r}(z)` by Horner's rule.
pub fn h_poly(z: f64, params: &ConstraintParams) -> f64 {
    let c = (params.r() - 1) as f64;
    (0..params.k()).fold(1.0, |acc, _| acc * z - c)
}

/// `g_{m,r}(z)`; `g_1 ≡ 1/(r-1)`.
pub fn g_poly(z: f64, m: usize, params: &ConstraintParams) -> f64 {
    assert!(m >= 1, "g_m is defined for m ≥ 1");
    let inv = 1.0 / (params.r() - 1) as f64;
    if m == 1 {
        return inv;
    }
    // z^{m-1}/(r-1) - z^{m-2} - … - z, Horner from the top coefficient.
    let mut acc = inv;
    for _ in 0..m - 2 {
        acc = acc * z - 1.0;
    }
    acc * z
}

/// Largest real root of `h_{k,r}` by bisection on `[r - 1/k, r]`.
pub fn perron_eigenvalue(params: &ConstraintParams, tol: f64) -> Result<f64> {
    let r = params.r() as f64;
    if params.k() == 1 {
        return Ok(r - 1.0);
    }
    let mut lo = r - 1.0 / params.k() as f64;
    let mut hi = r;
    if h_poly(lo, params) > 0.0 || h_poly(hi, params) <= 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h_poly(mid, params) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenvalue to full double precision; used wherever φ feeds further numerics.
pub fn perron_eigenvalue_precise(params: &ConstraintParams) -> Result<f64> {
    perron_eigenvalue(params, 0.0)
}

/// `log_r λ_k`.
pub fn capacity(params: &ConstraintParams) -> Result<f64> {
    let lambda = perron_eigenvalue(params, DEFAULT_TOL)?;
    Ok(lambda.ln() / (params.r() as f64).ln())
}

/// Closed-form right Perron eigenvector, with ones at the constant states.
pub fn right_eigenvector_closed_form(params: &ConstraintParams, lambda: f64) -> Vec<f64> {
    // g_{l+1}(λ) for l in 1..k, computed once.
    let by_run: Vec<f64> = (1..params.k()).map(|l| g_poly(lambda, l + 1, params)).collect();
    params
        .states()
        .map(|s| {
            let l = lsb_run(s, params);
            if l == params.k() {
                1.0
            } else {
                by_run[l - 1]
            }
        })
        .collect()
}

/// One entry of a right eigenvector written as a polynomial in `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormEntry {
    One,
    /// `g_m(λ)`
    G(usize),
}

/// Right Perron eigenvector of span `k` held symbolically, so it can be
/// re-evaluated at a different eigenvalue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerronForm {
    r: usize,
    k: usize,
    entries: Vec<FormEntry>,
}

impl PerronForm {
    /// The all-ones eigenvector of span 1.
    pub fn base(r: usize) -> Result<Self> {
        let params = ConstraintParams::new(r, 1)?;
        Ok(Self { r, k: 1, entries: vec![FormEntry::One; params.state_count()] })
    }

    pub fn new(r: usize, entries: Vec<FormEntry>) -> Result<Self> {
        let mut k = 0;
        let mut len = 1usize;
        while len < entries.len() {
            len = len.checked_mul(r).ok_or(Error::ShapeMismatch { expected: 0, got: entries.len() })?;
            k += 1;
        }
        if k == 0 || len != entries.len() {
            return Err(Error::ShapeMismatch { expected: len.max(r), got: entries.len() });
        }
        ConstraintParams::new(r, k)?;
        Ok(Self { r, k, entries })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[FormEntry] {
        &self.entries
    }

    pub fn params(&self) -> ConstraintParams {
        ConstraintParams::new(self.r, self.k).expect("validated at construction")
    }

    /// Lifts a span-`k` eigenvector form to span `k + 1`: `r` copies, where in
    /// copy `i` the constant states `j·(r^k-1)/(r-1)`, `j ≠ i`, become
    /// `g_{k+1}`. Every overwritten entry must be `1`.
    pub fn apply_t(&self) -> Result<PerronForm> {
        let params = self.params();
        let next = ConstraintParams::new(self.r, self.k + 1)?;
        let repunit = params.repunit();
        let mut entries = Vec::with_capacity(next.state_count());
        for i in 0..self.r {
            let mut block = self.entries.clone();
            for j in (0..self.r).filter(|&j| j != i) {
                let slot = &mut block[j * repunit];
                if *slot != FormEntry::One {
                    return Err(Error::NumericalFailure(format!(
                        "T-construction expects 1 at coordinate {}",
                        j * repunit
                    )));
                }
                *slot = FormEntry::G(self.k + 1);
            }
            entries.extend(block);
        }
        Ok(PerronForm { r: self.r, k: self.k + 1, entries })
    }

    pub fn evaluate(&self, lambda: f64) -> Vec<f64> {
        let params = self.params();
        self.entries
            .iter()
            .map(|e| match *e {
                FormEntry::One => 1.0,
                FormEntry::G(m) => g_poly(lambda, m, &params),
            })
            .collect()
    }
}

/// `T` applied to a numeric vector `x`, with `x`'s functional form given
/// symbolically, and the result evaluated at `lambda_next`.
pub fn apply_t(x: &PerronForm, lambda_next: f64) -> Result<(PerronForm, Vec<f64>)> {
    let lifted = x.apply_t()?;
    let values = lifted.evaluate(lambda_next);
    Ok((lifted, values))
}

/// `T^{k-1}` applied to the all-ones vector of span 1.
pub fn iterate_t(params: &ConstraintParams) -> Result<PerronForm> {
    let mut form = PerronForm::base(params.r())?;
    while form.k() < params.k() {
        form = form.apply_t()?;
    }
    Ok(form)
}

/// Options for the power iterations.
#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iterations: DEFAULT_MAX_ITERATIONS }
    }
}

/// Power iteration on `A + I` (or its transpose) from the all-ones vector.
/// The shift makes the iteration primitive even when `A` is periodic, e.g. at
/// `r = 2, k = 1`. Stops once the Collatz–Wielandt bounds
/// `min_i (Av)_i / v_i ≤ λ ≤ max_i (Av)_i / v_i` are within `tol·λ`.
/// Returns the eigenvalue estimate and the vector scaled to unit max-norm.
pub fn power_iteration(
    graph: &TransferGraph,
    transpose: bool,
    options: PowerOptions,
) -> Result<(f64, Vec<f64>)> {
    let n = graph.state_count();
    let mut v = vec![1.0; n];
    let mut av = vec![0.0; n];
    let mut spread = f64::INFINITY;
    for _ in 0..options.max_iterations {
        if transpose {
            graph.apply_transpose(&v, &mut av);
        } else {
            graph.apply(&v, &mut av);
        }
        let (lo, hi) = av
            .iter()
            .zip(&v)
            .map(|(a, x)| a / x)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q), hi.max(q)));
        let lambda = 0.5 * (lo + hi);
        spread = hi - lo;
        if spread <= options.tol * lambda.abs().max(f64::MIN_POSITIVE) {
            let norm = v.iter().cloned().fold(0.0, f64::max);
            return Ok((lambda, v.into_iter().map(|x| x / norm).collect()));
        }
        let mut norm = 0.0f64;
        for (x, a) in v.iter_mut().zip(&av) {
            *x += a;
            norm = norm.max(*x);
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Err(Error::NoConvergence { iterations: options.max_iterations, residual: spread })
}

/// Left Perron eigenvector `ξ`, scaled so `Σ ξ_i φ_i = 1`.
pub fn left_eigenvector_numeric(
    graph: &TransferGraph,
    lambda: f64,
    phi: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if phi.len() != graph.state_count() {
        return Err(Error::ShapeMismatch { expected: graph.state_count(), got: phi.len() });
    }
    let options = PowerOptions { tol: tol.min(1e-13), ..PowerOptions::default() };
    let (_, xi) = power_iteration(graph, true, options)?;
    let residual = transpose_residual(graph, lambda, &xi);
    if residual > tol {
        return Err(Error::NoConvergence { iterations: options.max_iterations, residual });
    }
    let dot: f64 = xi.iter().zip(phi).map(|(a, b)| a * b).sum();
    Ok(xi.into_iter().map(|x| x / dot).collect())
}

/// `‖A x - λ x‖_∞ / ‖x‖_∞`.
pub fn residual(graph: &TransferGraph, lambda: f64, x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    graph.apply(x, &mut ax);
    relative_gap(&ax, lambda, x)
}

/// `‖Aᵀ x - λ x‖_∞ / ‖x‖_∞`.
pub fn transpose_residual(graph: &TransferGraph, lambda: f64, x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    graph.apply_transpose(x, &mut ax);
    relative_gap(&ax, lambda, x)
}

fn relative_gap(ax: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let num = ax
        .iter()
        .zip(x)
        .map(|(a, v)| (a - lambda * v).abs())
        .fold(0.0, f64::max);
    let den = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    num / den
}

/// Perron eigenvalue, both eigenvectors and the capacity.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralData {
    pub lambda: f64,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    pub capacity: f64,
}

impl SpectralData {
    pub fn compute(graph: &TransferGraph) -> Result<Self> {
        let params = *graph.params();
        let lambda = perron_eigenvalue_precise(&params)?;
        let phi = right_eigenvector_closed_form(&params, lambda);
        let xi = left_eigenvector_numeric(graph, lambda, &phi, 1e-10)?;
        Ok(Self {
            lambda,
            phi,
            xi,
            capacity: lambda.ln() / (params.r() as f64).ln(),
        })
    }

    pub fn for_params(params: ConstraintParams) -> Result<Self> {
        Self::compute(&build_graph(params))
    }
}
