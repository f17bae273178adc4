#![allow(dead_code)]

use rll_synth::{ConstraintParams, Symbol};

pub fn p(r: usize, k: usize) -> ConstraintParams {
    ConstraintParams::new(r, k).unwrap()
}

/// Longest run of equal symbols, computed directly.
pub fn longest_run(word: &[Symbol]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for (i, &c) in word.iter().enumerate() {
        run = if i > 0 && word[i - 1] == c { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

/// All words of length `n` over `[r]`, in lexicographic order.
pub fn all_words(r: usize, n: usize) -> impl Iterator<Item = Vec<Symbol>> {
    let total = r.pow(n as u32);
    (0..total).map(move |mut x| {
        let mut w = vec![0; n];
        for slot in w.iter_mut().rev() {
            *slot = (x % r) as Symbol;
            x /= r;
        }
        w
    })
}

pub fn brute_count(r: usize, k: usize, n: usize) -> u64 {
    all_words(r, n).filter(|w| longest_run(w) <= k).count() as u64
}

/// Dense adjacency built from the definition: `u → v` iff the windows
/// overlap and `u` is not a constant window.
pub fn definition_matrix(r: usize, k: usize) -> Vec<Vec<f64>> {
    let words: Vec<Vec<Symbol>> = all_words(r, k).collect();
    words
        .iter()
        .map(|u| {
            words
                .iter()
                .map(|v| {
                    let overlap = u[1..] == v[..k - 1];
                    let constant = u.iter().all(|&c| c == u[0]) && v == u;
                    if overlap && !constant { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

/// Power iteration on a dense matrix shifted by the identity.
pub fn dense_perron(a: &[Vec<f64>], transpose: bool) -> (f64, Vec<f64>) {
    let n = a.len();
    let mut x = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..200_000 {
        let mut y = x.clone();
        for i in 0..n {
            for j in 0..n {
                let aij = if transpose { a[j][i] } else { a[i][j] };
                y[i] += aij * x[j];
            }
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        y.iter_mut().for_each(|v| *v /= norm);
        let delta = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        lambda = norm - 1.0;
        if delta < 1e-15 {
            break;
        }
    }
    (lambda, x)
}
