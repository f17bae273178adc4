mod common;

use common::{all_words, brute_count, longest_run, p};
use num_bigint::BigUint;
use proptest::prelude::*;
use rll_synth::graph::{from_rll_word, is_admissible, to_rll_word};
use rll_synth::{build_graph, capacity, count_words, StateId, Symbol};

#[test]
fn counts_match_enumeration() {
    for r in 2..=3 {
        for k in 1..=3 {
            for n in 0..=12 {
                let expected = BigUint::from(brute_count(r, k, n));
                assert_eq!(count_words(n, &p(r, k)), expected, "r={r} k={k} n={n}");
            }
        }
    }
}

#[test]
fn admissibility_matches_run_length() {
    for (r, k) in [(2, 1), (2, 3), (3, 2), (4, 2)] {
        for n in 0..=7 {
            for w in all_words(r, n) {
                assert_eq!(is_admissible(&w, &p(r, k)).unwrap(), longest_run(&w) <= k);
            }
        }
    }
}

#[test]
fn path_labels_are_admissible_and_lossless() {
    for (r, k) in [(2, 2), (2, 3), (3, 2)] {
        let params = p(r, k);
        let graph = build_graph(params);
        for n in k..=10 {
            for w in all_words(r, n).filter(|w| longest_run(w) <= k) {
                // paths reading the word: start state is the first k symbols
                let starts: Vec<StateId> = params
                    .states()
                    .filter(|&s| graph.walk(s, &w[k..]).is_some() && s.digits(&params) == w[..k])
                    .collect();
                assert_eq!(starts.len(), 1, "{w:?}");
            }
        }
        // every label of a path of length ≤ 12 is admissible
        let mut frontier: Vec<(StateId, Vec<Symbol>)> =
            params.states().map(|s| (s, s.digits(&params))).collect();
        for _ in k..12 {
            let mut next = Vec::new();
            for (s, w) in &frontier {
                assert!(longest_run(w) <= k);
                for &t in graph.successors(*s) {
                    let mut w2 = w.clone();
                    w2.push(t.label(&params));
                    next.push((t, w2));
                }
            }
            frontier = next;
            if frontier.len() > 200_000 {
                break;
            }
        }
    }
}

#[test]
fn growth_rate_near_capacity() {
    for (r, k) in [(2, 1), (2, 2), (2, 4), (3, 2), (4, 3)] {
        let count = count_words(200, &p(r, k));
        let digits = count.to_string();
        let lead: f64 = digits[..15.min(digits.len())].parse().unwrap();
        let log10 = lead.log10() + (digits.len() - 15.min(digits.len())) as f64;
        let log_r = log10 / (r as f64).log10() / 200.0;
        assert!((log_r - capacity(&p(r, k)).unwrap()).abs() < 0.05, "r={r} k={k} {log_r}");
    }
}

fn word_strategy() -> impl Strategy<Value = (usize, usize, Vec<Symbol>)> {
    (2usize..=5, 1usize..=4).prop_flat_map(|(r, k)| {
        (Just(r), Just(k), prop::collection::vec(0..r as Symbol, 1..40))
    })
}

fn clip_runs(w: &[Symbol], k: usize, r: usize) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = Vec::with_capacity(w.len());
    for &c in w {
        let run = out.iter().rev().take_while(|&&x| x == c).count();
        out.push(if run >= k { ((c as usize + 1) % r) as Symbol } else { c });
    }
    out
}

proptest! {
    #[test]
    fn rll_transform_inverts((r, k, w) in word_strategy()) {
        let params = p(r, k);
        let w = clip_runs(&w, k, r);
        let rll = to_rll_word(&w, &params).unwrap();
        prop_assert_eq!(from_rll_word(w[0], &rll, &params).unwrap(), w.clone());
        // cumulative sum of the prepended sequence mod r
        let mut acc = w[0] as usize;
        let mut rebuilt = vec![w[0]];
        for &d in &rll {
            acc = (acc + d as usize) % r;
            rebuilt.push(acc as Symbol);
        }
        prop_assert_eq!(rebuilt, w);
    }

    #[test]
    fn admissibility_is_permutation_invariant((r, k, w) in word_strategy(), shift in 1usize..5) {
        let params = p(r, k);
        let mapped: Vec<Symbol> = w.iter().map(|&c| ((c as usize * (2 * r - 1) + shift) % r) as Symbol).collect();
        // c ↦ (-c + shift) mod r is a bijection of [r]
        prop_assert_eq!(is_admissible(&w, &params).unwrap(), is_admissible(&mapped, &params).unwrap());
    }
}
