#![allow(dead_code)]

use agk::family::{
    build_b4, build_family, derived_generators, lift_dual_word, DerivedGen, DerivedGenerators, FamilyMode, FamilySpec,
};
use agk::{GroupWord, MealyAutomaton};
use rand::Rng;

pub const BUDGET: usize = 100_000;

pub fn b4() -> MealyAutomaton {
    build_b4()
}

pub fn script(name: &str) -> MealyAutomaton {
    let path = format!("{}/automata/{name}", env!("CARGO_MANIFEST_DIR"));
    MealyAutomaton::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Image of `v` under the letter-by-letter action of `(state, inverse)` factors, read
/// straight from the tables.
pub fn oracle_apply(aut: &MealyAutomaton, word: &[(u32, bool)], v: &[u32]) -> Vec<u32> {
    let mut out = v.to_vec();
    for &(q, inv) in word {
        let mut s = q;
        for x in out.iter_mut() {
            if inv {
                let pre = (0..aut.degree() as u32).find(|&y| aut.output(s, y) == *x).unwrap();
                s = aut.transition(s, pre);
                *x = pre;
            } else {
                let y = aut.output(s, *x);
                s = aut.transition(s, *x);
                *x = y;
            }
        }
    }
    out
}

pub fn factors(w: &GroupWord) -> Vec<(u32, bool)> {
    w.factors().iter().map(|f| (f.state(), f.is_inverse())).collect()
}

/// All words of exactly `len` letters over `0..d`, lexicographic.
pub fn all_words(d: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..d).map(move |x| {
                    let mut c = w.clone();
                    c.push(x);
                    c
                })
            })
            .collect();
    }
    out
}

pub fn words_up_to(d: u32, len: usize) -> Vec<Vec<u32>> {
    (0..=len).flat_map(|k| all_words(d, k)).collect()
}

pub fn random_spec<R: Rng>(rng: &mut R, n: usize) -> FamilySpec {
    let mut sigma: Vec<bool> = (0..n - 2).map(|_| rng.gen()).collect();
    sigma[0] = true;
    sigma[n - 3] = true;
    FamilySpec::new(n, sigma, FamilyMode::Theorem).unwrap()
}

pub fn random_squarefree<R: Rng>(rng: &mut R, letters: u32, len: usize) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(len);
    while out.len() < len {
        let x = rng.gen_range(0..letters);
        if out.last() != Some(&x) {
            out.push(x);
        }
    }
    out
}

pub fn random_derived_word<R: Rng>(rng: &mut R, len: usize) -> Vec<DerivedGen> {
    (0..len)
        .map(|_| match rng.gen_range(0..3) {
            0 => DerivedGen::Alpha,
            1 => DerivedGen::Beta,
            _ => DerivedGen::BcBar,
        })
        .collect()
}

/// The two dual actions compared by the lifting rule.
pub struct LiftingSetup {
    pub n: usize,
    pub dual4: MealyAutomaton,
    pub gens4: DerivedGenerators,
    pub dualn: MealyAutomaton,
    pub gensn: DerivedGenerators,
}

impl LiftingSetup {
    pub fn new(spec: &FamilySpec) -> Self {
        LiftingSetup {
            n: spec.n,
            dual4: b4().dual(),
            gens4: derived_generators(&FamilySpec::b4(), BUDGET).unwrap(),
            dualn: build_family(spec).unwrap().dual(),
            gensn: derived_generators(spec, BUDGET).unwrap(),
        }
    }

    fn embed(&self, x: u32) -> u32 {
        if x == 3 {
            self.n as u32 - 1
        } else {
            x
        }
    }

    /// First prefix length at which the lifted word disagrees with the rule "same image,
    /// with d replaced by q1 after an odd number of α, β factors"; `None` if all agree.
    pub fn first_violation(&self, x: &[DerivedGen], g: &[u32]) -> Option<usize> {
        let y = lift_dual_word(x);
        let g_n: Vec<u32> = g.iter().map(|&l| self.embed(l)).collect();
        let d_n = self.n as u32 - 1;
        let mut odd = false;
        for i in 0..=x.len() {
            if i > 0 && x[i - 1] != DerivedGen::BcBar {
                odd = !odd;
            }
            let xi = oracle_apply(&self.dual4, &factors(&self.gens4.expand(&x[..i])), g);
            let yi = oracle_apply(&self.dualn, &factors(&self.gensn.expand_lifted(&y[..i])), &g_n);
            let expected: Vec<u32> = xi
                .iter()
                .map(|&l| {
                    let m = self.embed(l);
                    if odd && m == d_n {
                        3
                    } else {
                        m
                    }
                })
                .collect();
            if yi != expected {
                return Some(i);
            }
        }
        None
    }
}
