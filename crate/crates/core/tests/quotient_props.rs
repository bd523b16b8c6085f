mod common;

use agk::family::build_family;
use agk::quotient::{
    build_group, check_even_sections, check_stab_equality, level_permutation, orbit_of, orbits, stabilizer_index_table,
    state_generators, LevelDomain,
};
use agk::schreier::enumerate;
use agk::{GroupWord, MealyAutomaton, Perm, Verdict};
use common::*;
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn binary_corpus() -> Vec<MealyAutomaton> {
    vec![
        b4(),
        script("b3.aut"),
        script("aleshin.aut"),
        MealyAutomaton::identity(),
        MealyAutomaton::parse("x = (y, y) sigma; y = (x, x)").unwrap(),
        MealyAutomaton::parse("a = (b, a) sigma; b = (a, b)").unwrap(),
    ]
}

/// Level permutation computed from the tables, as images of lexicographically ordered points.
fn oracle_level_perm(aut: &MealyAutomaton, w: &GroupWord, level: usize) -> Perm {
    let points = all_words(aut.degree() as u32, level);
    let images = points
        .iter()
        .map(|v| {
            let img = oracle_apply(aut, &factors(w), v);
            points.iter().position(|p| *p == img).unwrap() as u32
        })
        .collect();
    Perm::from_images(images).unwrap()
}

#[test]
fn level_permutations_match_the_table_oracle() {
    for a in binary_corpus() {
        for level in 0..=4 {
            let dom = LevelDomain::full(2, level).unwrap();
            for q in 0..a.num_states() as u32 {
                let w = GroupWord::from_states(&[q]);
                assert_eq!(level_permutation(&a, &w, &dom).unwrap(), oracle_level_perm(&a, &w, level));
            }
        }
    }
}

#[test]
fn primal_level_two_quotient_by_brute_force() {
    let a = b4();
    let gens: Vec<Perm> = (0..4).map(|q| oracle_level_perm(&a, &GroupWord::from_states(&[q]), 2)).collect();
    let elements = enumerate(4, &gens, 100).unwrap().elements;
    assert_eq!(elements.len(), 8);
    let orders: Vec<u64> = elements.iter().map(|p| p.order()).collect();
    assert_eq!(orders.iter().max(), Some(&4));
    // a cyclic group of order 8 would need an element of order 8
    assert!(!orders.contains(&8));
    let table = stabilizer_index_table(&a, &state_generators(&a), 2).unwrap();
    assert_eq!(table.quotient_orders, vec![BigUint::from(1u32), BigUint::from(2u32), BigUint::from(8u32)]);
}

#[test]
fn quotient_orders_divide_each_other() {
    for a in binary_corpus() {
        let t = stabilizer_index_table(&a, &state_generators(&a), 6).unwrap();
        assert_eq!(t.indices.len(), 6);
    }
    let dual = b4().dual();
    let t = stabilizer_index_table(&dual, &state_generators(&dual), 3).unwrap();
    assert_eq!(t.indices[0], BigUint::from(24u32));
    assert_eq!(t.indices[1], BigUint::from(27u32));
    let e = MealyAutomaton::identity();
    let t = stabilizer_index_table(&e, &state_generators(&e), 4).unwrap();
    assert!(t.indices.iter().all(|i| *i == BigUint::from(1u32)));
}

#[test]
fn orbit_sizes_divide_the_group_order() {
    for a in binary_corpus() {
        for level in 1..=4 {
            let dom = LevelDomain::full(2, level).unwrap();
            let g = build_group(&a, &state_generators(&a), &dom).unwrap();
            let all = enumerate(dom.len(), &g.generator_perms(), 1 << 16).unwrap();
            assert_eq!(BigUint::from(all.elements.len()), g.order().unwrap());
            for orbit in orbits(&g) {
                assert_eq!(all.elements.len() % orbit.len(), 0);
            }
        }
    }
}

#[test]
fn single_orbit_agrees_with_breadth_first_search() {
    let dual = b4().dual();
    let mut cases = vec![];
    for a in binary_corpus() {
        for level in 0..=5 {
            cases.push((a.clone(), LevelDomain::full(2, level).unwrap()));
        }
    }
    for level in 0..=4 {
        cases.push((dual.clone(), LevelDomain::squarefree(4, level).unwrap()));
        cases.push((dual.clone(), LevelDomain::full(4, level).unwrap()));
    }
    for (a, dom) in cases {
        let g = build_group(&a, &state_generators(&a), &dom).unwrap();
        let single = orbits(&g).len() == 1;
        assert_eq!(single, orbit_of(&g, 0).len() == dom.len());
    }
}

#[test]
fn level_permutation_of_a_product() {
    let mut autos = binary_corpus();
    autos.push(b4().dual());
    for a in autos {
        let dom = LevelDomain::full(a.degree(), 3).unwrap();
        let m = a.num_states() as u32;
        for q in 0..m {
            for r in 0..m {
                let (pq, pr) = (GroupWord::from_states(&[q]), GroupWord::from_states(&[r]));
                let product = level_permutation(&a, &pq.then(&pr), &dom).unwrap();
                let composed = level_permutation(&a, &pq, &dom)
                    .unwrap()
                    .then(&level_permutation(&a, &pr, &dom).unwrap());
                assert_eq!(product, composed);
            }
        }
    }
}

/// Depth-first walk over all square-free words of length `depth`.
fn squarefree_preserved(aut: &MealyAutomaton, depth: usize) -> bool {
    let d = aut.degree() as u32;
    let gens = state_generators(aut);
    let mut stack: Vec<Vec<u32>> = vec![vec![]];
    while let Some(v) = stack.pop() {
        if v.len() == depth {
            for g in &gens {
                let img = oracle_apply(aut, &factors(g), &v);
                if img.windows(2).any(|p| p[0] == p[1]) {
                    return false;
                }
            }
            continue;
        }
        for x in 0..d {
            if v.last() != Some(&x) {
                let mut c = v.clone();
                c.push(x);
                stack.push(c);
            }
        }
    }
    true
}

#[test]
fn dual_generators_preserve_square_free_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (n, depth) in [(4, 8), (5, 8), (6, 7), (7, 6), (8, 6)] {
        let dual = build_family(&random_spec(&mut rng, n)).unwrap().dual();
        assert!(squarefree_preserved(&dual, depth), "n={n}");
        for level in 0..=depth.min(5) {
            let dom = LevelDomain::squarefree(n, level).unwrap();
            build_group(&dual, &state_generators(&dual), &dom).unwrap();
        }
    }
}

#[test]
fn even_sections_fixtures() {
    let dual = b4().dual();
    let r = check_even_sections(&dual, &state_generators(&dual), "dual-b4").unwrap();
    assert_eq!(r.verdict, Verdict::Certified);

    let trivial = MealyAutomaton::parse("alphabet: a b c\ne = (e, e, e)").unwrap();
    let r = check_even_sections(&trivial, &state_generators(&trivial), "trivial").unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    assert_eq!(r.counts["level1_fixing_elements"], 1);

    // s fixes the first level and acts below `a` by the transposition t
    let odd = MealyAutomaton::parse("alphabet: a b c d\nt = (e, e, e, e) (a b)\ns = (t, e, e, e)\ne = (e, e, e, e)").unwrap();
    let r = check_even_sections(&odd, &state_generators(&odd), "odd").unwrap();
    assert_eq!(r.verdict, Verdict::Refuted);
    assert_eq!(r.counterexample.unwrap().value, "s");

    // constants act diagonally, so nothing fixing the first level moves anything below it
    let constants = MealyAutomaton::parse("alphabet: a b c d\nx = (x, x, x, x) (a b)\ny = (y, y, y, y) (a b c d)").unwrap();
    let r = check_even_sections(&constants, &state_generators(&constants), "constants").unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    assert_eq!(r.counts["level1_fixing_elements"], 1);
}

#[test]
fn stabilizer_equality_fixtures() {
    let dual = b4().dual();
    let r = check_stab_equality(&dual, &state_generators(&dual), 3, "dual-b4").unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    let dual5 = build_family(&agk::family::FamilySpec::all_swaps(5).unwrap()).unwrap().dual();
    let r = check_stab_equality(&dual5, &state_generators(&dual5), 3, "dual-b5").unwrap();
    assert_eq!(r.verdict, Verdict::Certified);

    // z acts only below `aa`, which no square-free vertex passes through
    let deep = MealyAutomaton::parse("alphabet: a b c\nu = (u, u, u) (a b)\nw = (u, e, e)\nz = (w, e, e)\ne = (e, e, e)").unwrap();
    let r = check_stab_equality(&deep, &state_generators(&deep), 3, "deep").unwrap();
    assert_eq!(r.verdict, Verdict::Refuted);
    assert_eq!(r.counterexample.unwrap().value, "3");
}
