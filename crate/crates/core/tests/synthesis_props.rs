mod common;

use common::{all_words, p};
use rand::Rng as _;
use rll_synth::scs::{is_subsequence, scs_exact, ScsLimits};
use rll_synth::seeding::substream;
use rll_synth::synthesis::{compare_references, step_cost_f};
use rll_synth::{batch_cost, build_graph, expected_cost_rate, greedy_embed, Execution, MarkovMeasure, ReferenceSeq, Symbol};

/// Shortest prefix of `reference` containing `strand`, by trying every length.
fn brute_min_prefix(strand: &[Symbol], reference: &[Symbol]) -> Option<usize> {
    (0..=reference.len()).find(|&l| is_subsequence(strand, &reference[..l]))
}

#[test]
fn greedy_is_minimal_exhaustively() {
    for n in 0..=5 {
        for len in 0..=9 {
            for reference in all_words(2, len) {
                let seq = ReferenceSeq::new_unchecked(2, reference.clone(), vec![]).unwrap();
                for strand in all_words(2, n) {
                    let greedy = greedy_embed(&strand, &seq).ok().map(|t| t.last().copied().unwrap_or(0));
                    assert_eq!(greedy, brute_min_prefix(&strand, &reference));
                }
            }
        }
    }
}

#[test]
fn greedy_positions_spell_the_strand() {
    let mut rng = substream(4, 0);
    let reference = ReferenceSeq::periodic(3, vec![0, 2, 1, 1, 0]).unwrap();
    for _ in 0..500 {
        let strand: Vec<Symbol> = (0..rng.random_range(0..30)).map(|_| rng.random_range(0..3)).collect();
        let tau = greedy_embed(&strand, &reference).unwrap();
        assert!(tau.windows(2).all(|w| w[0] < w[1]));
        for (&t, &c) in tau.iter().zip(&strand) {
            assert_eq!(reference.symbol(t - 1), Some(c));
        }
    }
}

/// Two-strand supersequence length via the longest common subsequence.
fn scs2(a: &[Symbol], b: &[Symbol]) -> usize {
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            dp[i][j] = if a[i - 1] == b[j - 1] { dp[i - 1][j - 1] + 1 } else { dp[i - 1][j].max(dp[i][j - 1]) };
        }
    }
    a.len() + b.len() - dp[a.len()][b.len()]
}

#[test]
fn scs_sandwich_and_witness() {
    for (r, k) in [(2, 2), (3, 2), (4, 3)] {
        let measure = MarkovMeasure::from_params(p(r, k)).unwrap();
        let canonical = ReferenceSeq::canonical(r).unwrap();
        for seed in 0..30 {
            let m = 2 + (seed as usize % 3);
            let batch = measure.sample_batch(6, m, seed, Execution::Sequential);
            let scs = scs_exact(&batch.strands, ScsLimits::default()).unwrap();
            let longest = batch.strands.iter().map(Vec::len).max().unwrap();
            let cost = batch_cost(&batch.strands, &canonical, Execution::Sequential).unwrap();
            assert!(longest <= scs.length && scs.length <= cost);
            assert!(batch.strands.iter().all(|s| is_subsequence(s, &scs.witness)));
            let witness = ReferenceSeq::finite(r, scs.witness.clone()).unwrap();
            assert_eq!(batch_cost(&batch.strands, &witness, Execution::Sequential).unwrap(), scs.length);
            if m == 2 {
                assert_eq!(scs.length, scs2(&batch.strands[0], &batch.strands[1]));
            }
        }
    }
}

#[test]
fn edge_costs_lie_in_range() {
    for (r, k) in [(2, 1), (3, 3), (4, 2)] {
        let params = p(r, k);
        let graph = build_graph(params);
        for u in params.states() {
            for &v in graph.successors(u) {
                let f = step_cost_f(u, v, &params).unwrap();
                assert!((1..=r).contains(&f));
            }
        }
    }
}

/// `C` from the stationary pair distribution, without the library's helper.
fn pair_cost_rate(measure: &MarkovMeasure) -> f64 {
    let params = *measure.params();
    let r = params.r();
    let mut total = 0.0;
    for i in params.states() {
        for (j, q) in measure.row(i) {
            let (a, b) = (i.label(&params) as usize, j.label(&params) as usize);
            let f = (1..=r).find(|d| (a + d) % r == b).unwrap();
            total += measure.pi()[i.0] * q * f as f64;
        }
    }
    total
}

#[test]
fn cost_rate_matches_pair_distribution() {
    for (r, k) in [(2, 2), (3, 2), (4, 1), (4, 3), (5, 4)] {
        let m = MarkovMeasure::from_params(p(r, k)).unwrap();
        assert!((expected_cost_rate(&m) - pair_cost_rate(&m)).abs() < 1e-12);
    }
    // binary: f = 2 on a repeated symbol, 1 otherwise
    let m22 = MarkovMeasure::from_params(p(2, 2)).unwrap();
    let repeat = m22.pattern_probability(&[0, 0]).unwrap() + m22.pattern_probability(&[1, 1]).unwrap();
    assert!((expected_cost_rate(&m22) - (1.0 + repeat)).abs() < 1e-12);
}

#[test]
fn single_strand_rate_converges() {
    for (r, k) in [(2, 2), (3, 2), (4, 1)] {
        let m = MarkovMeasure::from_params(p(r, k)).unwrap();
        let c = expected_cost_rate(&m);
        let canonical = ReferenceSeq::canonical(r).unwrap();
        let seeds = 100;
        let within = (0..seeds)
            .filter(|&seed| {
                let batch = m.sample_batch(10_000, 1, seed, Execution::Sequential);
                let cost = batch_cost(&batch.strands, &canonical, Execution::Sequential).unwrap();
                (cost as f64 / 10_000.0 - c).abs() <= 0.02
            })
            .count();
        assert!(within as f64 >= 0.95 * seeds as f64, "r={r} k={k}: {within}/{seeds}");
    }
}

#[test]
fn comparison_ranks_canonical_first() {
    let m = MarkovMeasure::from_params(p(4, 3)).unwrap();
    let batch = m.sample_batch(500, 50, 8, Execution::Sequential);
    let refs = vec![
        ReferenceSeq::canonical(4).unwrap(),
        ReferenceSeq::periodic(4, vec![0, 0, 1, 1, 2, 2, 3, 3]).unwrap(),
        ReferenceSeq::periodic(4, vec![0, 1, 2, 3, 0, 3, 2, 1]).unwrap(),
    ];
    let table = compare_references(&batch.strands, &refs, Execution::default()).unwrap();
    assert_eq!(table[0].rank, 1);
    assert!(table[1].cost > table[0].cost && table[2].cost > table[0].cost);
}
