mod common;

use agk::family::build_family;
use agk::word_problem::{
    certify_free_product, enumerate_group_bounded, is_trivial, reduced_word_count, section_closure,
    unrank_reduced_word, CertifyOptions, GroupSize,
};
use agk::{Factor, GroupWord, MealyAutomaton, Verdict};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixes_level(aut: &MealyAutomaton, w: &GroupWord, depth: usize) -> bool {
    all_words(aut.degree() as u32, depth)
        .iter()
        .all(|v| oracle_apply(aut, &factors(w), v) == *v)
}

#[test]
fn triviality_matches_deep_action_on_b4() {
    let a = b4();
    for w in words_up_to(4, 5) {
        let w = GroupWord::from_states(&w);
        assert_eq!(is_trivial(&a, &w, BUDGET).unwrap(), fixes_level(&a, &w, 8), "{}", w.render(&a));
    }
}

#[test]
fn triviality_matches_deep_action_with_inverses() {
    // a finite group, so that trivial words with inverses are plentiful
    let a = MealyAutomaton::parse("x = (y, y) sigma; y = (x, x)").unwrap();
    let mut trivial = 0;
    for w in words_up_to(2, 4) {
        for mask in 0..(1u32 << w.len()) {
            let word = GroupWord(w.iter().enumerate().map(|(i, &q)| Factor::new(q, mask >> i & 1 == 1)).collect());
            let t = is_trivial(&a, &word, BUDGET).unwrap();
            assert_eq!(t, fixes_level(&a, &word, 8));
            trivial += t as usize;
        }
    }
    assert!(trivial > 10);
}

fn corpus() -> Vec<MealyAutomaton> {
    vec![
        b4(),
        script("b3.aut"),
        script("aleshin.aut"),
        MealyAutomaton::identity(),
        MealyAutomaton::parse("x = (y, y) sigma; y = (x, x)").unwrap(),
        MealyAutomaton::parse("a = (b, a) sigma; b = (a, b)").unwrap(),
        MealyAutomaton::parse("alphabet: 0 1 2\nr = (r, r, r) (0 1 2)\ns = (r, s, s)").unwrap(),
    ]
}

#[test]
fn group_and_dual_group_are_finite_together() {
    let mut decided = 0;
    for a in corpus() {
        let dual = a.dual();
        let (Ok(g), Ok(h)) = (
            enumerate_group_bounded(&a, 600, BUDGET),
            enumerate_group_bounded(&dual, 600, BUDGET),
        ) else {
            continue;
        };
        assert_eq!(g.is_finite(), h.is_finite(), "{}", a.to_script());
        decided += 1;
    }
    assert!(decided >= 5);
}

#[test]
fn finite_group_orders() {
    let a = MealyAutomaton::parse("x = (y, y) sigma; y = (x, x)").unwrap();
    assert!(matches!(enumerate_group_bounded(&a, 1000, BUDGET).unwrap(), GroupSize::Finite(_)));
    assert_eq!(
        enumerate_group_bounded(&MealyAutomaton::identity(), 10, BUDGET).unwrap(),
        GroupSize::Finite(1)
    );
}

#[test]
fn closure_size_bound() {
    for a in corpus() {
        let m = a.num_states() as u64;
        for w in words_up_to(m as u32, 3) {
            let w = GroupWord::from_states(&w);
            let c = section_closure(&a, &w, BUDGET).unwrap();
            assert!((c.len() as u64) <= (2 * m).pow(w.len() as u32).max(1));
        }
    }
}

#[test]
fn family_states_are_involutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 4..=8 {
        let a = build_family(&random_spec(&mut rng, n)).unwrap();
        for q in 0..n as u32 {
            assert!(is_trivial(&a, &GroupWord::from_states(&[q, q]), 1000).unwrap());
        }
    }
}

#[test]
fn reduced_word_ranks_enumerate_in_lex_order() {
    for m in 2..=4u32 {
        for len in 1..=4u32 {
            let expected: Vec<Vec<u32>> = all_words(m, len as usize)
                .into_iter()
                .filter(|w| w.windows(2).all(|p| p[0] != p[1]))
                .collect();
            assert_eq!(reduced_word_count(m as u64, len), expected.len() as u64);
            let got: Vec<Vec<u32>> = (0..expected.len() as u64).map(|r| unrank_reduced_word(m, len, r)).collect();
            assert_eq!(got, expected);
        }
    }
}

#[test]
fn certificate_is_independent_of_worker_count() {
    let a = b4();
    let reports: Vec<String> = [1, 2, 4]
        .iter()
        .map(|&j| {
            let opts = CertifyOptions {
                max_length: 6,
                jobs: Some(j),
                ..CertifyOptions::default()
            };
            certify_free_product(&a, "b4", &opts).unwrap().to_json_pretty()
        })
        .collect();
    assert!(reports.windows(2).all(|p| p[0] == p[1]));
}

#[test]
fn refutations_are_real_relations() {
    // dihedral-type automaton: states are involutions but their product has finite order
    let a = MealyAutomaton::parse("x = (y, y) sigma; y = (x, x) sigma").unwrap();
    let opts = CertifyOptions {
        max_length: 8,
        ..CertifyOptions::default()
    };
    for jobs in [1, 3] {
        let r = certify_free_product(&a, "pair", &CertifyOptions { jobs: Some(jobs), ..opts.clone() }).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        let w = GroupWord::parse(&a, &r.counterexample.as_ref().unwrap().value).unwrap();
        assert!(fixes_level(&a, &w, 10));
        // no shorter reduced word is trivial
        for len in 1..w.len() as u32 {
            for rank in 0..reduced_word_count(2, len) {
                let v = GroupWord::from_states(&unrank_reduced_word(2, len, rank));
                assert!(!is_trivial(&a, &v, BUDGET).unwrap());
            }
        }
    }
}
