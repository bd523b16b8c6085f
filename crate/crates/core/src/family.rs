//! The Bellaterra automaton B4, its family B(n), their duals, the constant and derived
//! generators of the dual groups, and the word lifter relating the dual actions.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use crate::action::{Factor, GroupWord};
use crate::automaton::{Alphabet, MealyAutomaton, WreathRow};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::quotient::{build_group, orbit_of, orbits, state_generators, LevelDomain};
use crate::report::CertReport;
use crate::word_problem::{are_equal, is_trivial};

pub const EXPLORATION_WARNING: &str = "exploration mode: the endpoint permutations are not both \
     transpositions; this is a bounded observation about an instance outside the proved family";

pub const B4_SCRIPT: &str = "a = (c, b)\nb = (b, c)\nc = (d, d) sigma\nd = (a, a) sigma\n";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMode {
    Theorem,
    Exploration,
}

/// `n` states `a, b, c, q1, …, q(n-4), d`; `sigma[i]` says whether the `i`-th state of the
/// chain `c, q1, …, d` swaps the two letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    pub n: usize,
    pub sigma: Vec<bool>,
    pub mode: FamilyMode,
}

impl FamilySpec {
    pub fn new(n: usize, sigma: Vec<bool>, mode: FamilyMode) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidFamily(format!("n must be at least 4, got {n}")));
        }
        if sigma.len() != n - 2 {
            return Err(Error::InvalidFamily(format!(
                "n = {n} needs {} permutation bits, got {}",
                n - 2,
                sigma.len()
            )));
        }
        if mode == FamilyMode::Theorem && !(sigma[0] && sigma[n - 3]) {
            return Err(Error::InvalidFamily(
                "theorem mode needs the first and last bits set; use exploration mode otherwise".into(),
            ));
        }
        Ok(FamilySpec { n, sigma, mode })
    }

    pub fn b4() -> Self {
        FamilySpec::new(4, vec![true, true], FamilyMode::Theorem).expect("valid")
    }

    /// Every chain state swaps.
    pub fn all_swaps(n: usize) -> Result<Self> {
        FamilySpec::new(n, vec![true; n.saturating_sub(2)], FamilyMode::Theorem)
    }

    /// Parses a comma-separated bit list such as `1,0,1`.
    pub fn parse_sigma(text: &str) -> Result<Vec<bool>> {
        text.split(',')
            .map(|t| match t.trim() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(Error::InvalidFamily(format!("bad permutation bit `{other}`"))),
            })
            .collect()
    }

    pub fn sigma_string(&self) -> String {
        let bits: Vec<&str> = self.sigma.iter().map(|&b| if b { "1" } else { "0" }).collect();
        bits.join(",")
    }

    pub fn label(&self) -> String {
        format!("B({}) sigma={}", self.n, self.sigma_string())
    }

    pub fn warning(&self) -> Option<String> {
        (self.mode == FamilyMode::Exploration).then(|| EXPLORATION_WARNING.to_string())
    }

    /// Index of the letter `q1` of the dual alphabet (`d` when `n = 4`).
    pub fn q1(&self) -> u32 {
        3
    }

    pub fn d(&self) -> u32 {
        self.n as u32 - 1
    }
}

pub fn state_names(n: usize) -> Vec<String> {
    let mut names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    names.extend((1..=n.saturating_sub(4)).map(|i| format!("q{i}")));
    names.push("d".to_string());
    names
}

pub fn build_b4() -> MealyAutomaton {
    MealyAutomaton::parse(B4_SCRIPT).expect("bundled script parses")
}

pub fn build_family(spec: &FamilySpec) -> Result<MealyAutomaton> {
    let spec = FamilySpec::new(spec.n, spec.sigma.clone(), spec.mode)?;
    let names = state_names(spec.n);
    let row = |state: &str, s0: &str, s1: &str, swap: bool| WreathRow {
        state: state.to_string(),
        sections: vec![s0.to_string(), s1.to_string()],
        images: if swap { vec![1, 0] } else { vec![0, 1] },
    };
    let mut rows = vec![row("a", "c", "b", false), row("b", "b", "c", false)];
    // the chain c, q1, …, d, each state entering the next one on both letters
    for i in 2..spec.n {
        let next = if i + 1 == spec.n { "a" } else { names[i + 1].as_str() };
        rows.push(row(&names[i], next, next, spec.sigma[i - 2]));
    }
    MealyAutomaton::from_rows(Alphabet::binary(), &rows)
}

pub fn family_script(spec: &FamilySpec) -> Result<String> {
    let aut = build_family(spec)?;
    let mut out = format!("# {}\n", spec.label());
    if spec.mode == FamilyMode::Exploration {
        out.push_str("# exploration mode\n");
    }
    out.push_str(&aut.to_script());
    Ok(out)
}

fn check_dual(dual: &MealyAutomaton) -> Result<()> {
    if dual.num_states() != 2 || dual.degree() < 3 {
        return Err(Error::AlphabetMismatch(format!(
            "expected a 2-state dual over at least 3 letters, found {} states over {} letters",
            dual.num_states(),
            dual.degree()
        )));
    }
    Ok(())
}

fn transposition(d: usize, i: u32, j: u32) -> Perm {
    Perm::from_cycles(d, &[vec![i, j]]).expect("letters exist")
}

/// `O·1⁻¹`, acting as the constant transposition of the first two letters.
pub fn ab_bar() -> GroupWord {
    GroupWord(vec![Factor::pos(0), Factor::neg(1)])
}

/// `O⁻¹·1`, acting as the constant transposition of the second and third letters.
pub fn bc_bar() -> GroupWord {
    GroupWord(vec![Factor::neg(0), Factor::pos(1)])
}

/// Whether `w` acts on the whole tree as the constant permutation `p` at every vertex.
pub fn acts_as_constant(dual: &MealyAutomaton, w: &GroupWord, p: &Perm, budget: usize) -> Result<bool> {
    let name = (0..)
        .map(|i| format!("const{i}"))
        .find(|s| dual.state_index(s).is_none())
        .expect("fresh name");
    let constant = MealyAutomaton::constant(dual.alphabet().clone(), &name, p)?;
    let union = dual.disjoint_union(&constant)?;
    let c = GroupWord::from_states(&[dual.num_states() as u32]);
    are_equal(&union, w, &c, budget)
}

/// A word over the dual generators acting as the constant permutation `p`, found in the
/// subgroup generated by the transpositions of the first three letters.
pub fn constant_element(dual: &MealyAutomaton, p: &Perm, budget: usize) -> Result<GroupWord> {
    check_dual(dual)?;
    let d = dual.degree();
    if p.degree() != d {
        return Err(Error::AlphabetMismatch(format!("permutation of degree {} over {d} letters", p.degree())));
    }
    let gens = [
        (transposition(d, 0, 1), ab_bar()),
        (transposition(d, 1, 2), bc_bar()),
    ];
    let mut seen: HashMap<Perm, GroupWord> = HashMap::from([(Perm::identity(d), GroupWord::identity())]);
    let mut queue = VecDeque::from([Perm::identity(d)]);
    while let Some(q) = queue.pop_front() {
        if &q == p {
            break;
        }
        for (t, w) in &gens {
            let next = q.then(t);
            if !seen.contains_key(&next) {
                let word = seen[&q].then(w);
                seen.insert(next.clone(), word);
                queue.push_back(next);
            }
        }
    }
    let word = seen
        .remove(p)
        .ok_or_else(|| Error::NotExpressible(dual.cycle_notation(p)))?;
    if !acts_as_constant(dual, &word, p, budget)? {
        return Err(Error::VerificationFailed(format!(
            "`{}` does not act as the constant {}",
            word.render(dual),
            dual.cycle_notation(p)
        )));
    }
    Ok(word)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DerivedGen {
    Alpha,
    Beta,
    BcBar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LiftedGen {
    Alpha,
    AlphaInv,
    Beta,
    BetaInv,
    BcBar,
}

/// `α = 1·(ac)-bar`, `β = O·(ac)-bar` and the constants they are built from, as words over
/// the two dual states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedGenerators {
    pub alpha: GroupWord,
    pub beta: GroupWord,
    pub ab_bar: GroupWord,
    pub bc_bar: GroupWord,
    pub ac_bar: GroupWord,
}

impl DerivedGenerators {
    pub fn word(&self, g: DerivedGen) -> &GroupWord {
        match g {
            DerivedGen::Alpha => &self.alpha,
            DerivedGen::Beta => &self.beta,
            DerivedGen::BcBar => &self.bc_bar,
        }
    }

    pub fn expand(&self, x: &[DerivedGen]) -> GroupWord {
        x.iter().fold(GroupWord::identity(), |acc, &g| acc.then(self.word(g)))
    }

    pub fn expand_lifted(&self, y: &[LiftedGen]) -> GroupWord {
        y.iter().fold(GroupWord::identity(), |acc, &g| {
            let w = match g {
                LiftedGen::Alpha => self.alpha.clone(),
                LiftedGen::AlphaInv => self.alpha.inverse(),
                LiftedGen::Beta => self.beta.clone(),
                LiftedGen::BetaInv => self.beta.inverse(),
                LiftedGen::BcBar => self.bc_bar.clone(),
            };
            acc.then(&w)
        })
    }

    pub fn as_words(&self) -> Vec<GroupWord> {
        vec![self.alpha.clone(), self.beta.clone(), self.bc_bar.clone()]
    }

    /// Compares the orders of the level quotients of `⟨α, β, (bc)-bar⟩` and of the whole
    /// dual group on levels `0..=max_level`; returns the common orders.
    pub fn check_quotients(&self, dual: &MealyAutomaton, max_level: usize) -> Result<Vec<BigUint>> {
        let derived = self.as_words();
        let all = state_generators(dual);
        (0..=max_level)
            .map(|k| {
                let dom = LevelDomain::full(dual.degree(), k)?;
                let a = build_group(dual, &derived, &dom)?.order()?;
                let b = build_group(dual, &all, &dom)?.order()?;
                if a != b {
                    return Err(Error::VerificationFailed(format!(
                        "level {k}: derived generators give order {a}, the dual group {b}"
                    )));
                }
                Ok(a)
            })
            .collect()
    }
}

/// Builds and verifies the derived generators of the dual of `build_family(spec)`.
pub fn derived_generators(spec: &FamilySpec, budget: usize) -> Result<DerivedGenerators> {
    let dual = build_family(spec)?.dual();
    derived_generators_of(&dual, budget)
}

pub fn derived_generators_of(dual: &MealyAutomaton, budget: usize) -> Result<DerivedGenerators> {
    check_dual(dual)?;
    let d = dual.degree();
    let ab = constant_element(dual, &transposition(d, 0, 1), budget)?;
    let bc = constant_element(dual, &transposition(d, 1, 2), budget)?;
    let ac = ab.then(&bc).then(&ab);
    if !acts_as_constant(dual, &ac, &transposition(d, 0, 2), budget)? {
        return Err(Error::VerificationFailed("(ab)(bc)(ab) is not the constant (a c)".into()));
    }
    let o = GroupWord::from_states(&[0]);
    let one = GroupWord::from_states(&[1]);
    let alpha = one.then(&ac);
    let beta = o.then(&ac);
    let gens = DerivedGenerators {
        alpha,
        beta,
        ab_bar: ab,
        bc_bar: bc,
        ac_bar: ac,
    };
    let id = GroupWord::identity();
    let g = &gens;
    let mut checks: Vec<(&str, GroupWord, GroupWord)> = vec![
        ("alpha^-1*beta = (ab)-bar", g.alpha.inverse().then(&g.beta), g.ab_bar.clone()),
        ("(ab)-bar*(bc)-bar*(ab)-bar = (ac)-bar", g.ab_bar.then(&g.bc_bar).then(&g.ab_bar), g.ac_bar.clone()),
    ];
    // beyond four letters α and β permute the chain c, q1, …, d cyclically and have larger order
    if d == 4 {
        checks.push(("alpha^2 = 1", g.alpha.pow(2), id.clone()));
        checks.push(("beta^2 = 1", g.beta.pow(2), id.clone()));
        checks.push(("beta*alpha^-1 = (ab)-bar", g.beta.then(&g.alpha.inverse()), g.ab_bar.clone()));
    }
    for (name, lhs, rhs) in checks {
        if !are_equal(dual, &lhs, &rhs, budget)? {
            return Err(Error::VerificationFailed(name.to_string()));
        }
    }
    // O and 1 rewritten over α, β and (bc)-bar alone
    let ab_derived = g.alpha.inverse().then(&g.beta);
    let ac_derived = ab_derived.then(&g.bc_bar).then(&ab_derived);
    if !are_equal(dual, &o, &g.beta.then(&ac_derived), budget)?
        || !are_equal(dual, &one, &g.alpha.then(&ac_derived), budget)?
    {
        return Err(Error::VerificationFailed("O and 1 are not in the derived subgroup".into()));
    }
    Ok(gens)
}

/// Rewrites a word over the derived generators of the B4 dual into one over the derived
/// generators of a B(n) dual: `α`, `β` become inverted when an odd number of `α`, `β`
/// factors precede them.
pub fn lift_dual_word(x: &[DerivedGen]) -> Vec<LiftedGen> {
    let mut odd = false;
    x.iter()
        .map(|&g| match g {
            DerivedGen::BcBar => LiftedGen::BcBar,
            DerivedGen::Alpha | DerivedGen::Beta => {
                let lifted = match (g, odd) {
                    (DerivedGen::Alpha, false) => LiftedGen::Alpha,
                    (DerivedGen::Alpha, true) => LiftedGen::AlphaInv,
                    (_, false) => LiftedGen::Beta,
                    (_, true) => LiftedGen::BetaInv,
                };
                odd = !odd;
                lifted
            }
        })
        .collect()
}

/// The nontriviality witness for level `level ≥ 1` of the primal group:
/// `(ab)^k c` for odd levels and `(ab)^k ac` for even ones, of length `level`.
pub fn witness_word(level: usize) -> GroupWord {
    assert!(level >= 1);
    let ab = GroupWord::from_states(&[0, 1]);
    if level % 2 == 1 {
        ab.pow((level - 1) / 2).then(&GroupWord::from_states(&[2]))
    } else {
        ab.pow(level / 2 - 1).then(&GroupWord::from_states(&[0, 2]))
    }
}

pub fn max_certificate_level(n: usize) -> usize {
    if n == 4 {
        8
    } else {
        6
    }
}

/// Orbits of the dual group on the square-free levels `0..=max_level`, together with
/// the nontriviality of the witness words of each level in the primal group.
pub fn transitivity_certificate(spec: &FamilySpec, max_level: usize, budget: usize) -> Result<CertReport> {
    let limit = max_certificate_level(spec.n);
    if max_level > limit {
        return Err(Error::SizeCap(format!("n = {} allows levels up to {limit}", spec.n)));
    }
    let aut = build_family(spec)?;
    let dual = aut.dual();
    let gens = state_generators(&dual);
    let mut report = CertReport::new(spec.label(), "dual-transitivity")
        .param("n", spec.n as u64)
        .param("sigma", spec.sigma_string())
        .param("max_level", max_level as u64)
        .param("budget_closure", budget as u64);
    report.warning = spec.warning();

    let mut levels = Vec::new();
    let mut points_total = 0u64;
    for level in 0..=max_level {
        let dom = LevelDomain::squarefree(dual.degree(), level)?;
        let group = build_group(&dual, &gens, &dom)?;
        let parts = orbits(&group);
        let from_zero = orbit_of(&group, 0);
        if (parts.len() == 1) != (from_zero.len() == dom.len()) || parts[0] != from_zero {
            return Err(Error::VerificationFailed(format!(
                "orbit computations disagree on level {level}"
            )));
        }
        points_total += dom.len() as u64;
        let sizes: Vec<usize> = parts.iter().map(|c| c.len()).collect();
        levels.push(json!({
            "level": level,
            "points": dom.len(),
            "orbits": parts.len(),
            "sizes": sizes,
        }));
        if parts.len() != 1 {
            report.refute(
                "level",
                level.to_string(),
                format!("{} orbits on square-free level {level}", parts.len()),
            );
            break;
        }
    }
    let mut witnesses = Vec::new();
    if report.counterexample.is_none() {
        for level in 1..=max_level {
            let h = witness_word(level);
            let trivial = is_trivial(&aut, &h, budget)?;
            witnesses.push(json!({ "level": level, "word": h.render(&aut), "nontrivial": !trivial }));
            if trivial {
                report.refute("word", h.render(&aut), "witness word acts trivially");
                break;
            }
        }
    }
    report.count("levels_checked", levels.len() as u64);
    report.count("points_total", points_total);
    report.count("witnesses_checked", witnesses.len() as u64);
    report.details = Some(json!({ "levels": levels, "witnesses": witnesses }));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::root_permutation;
    use crate::word_problem::DEFAULT_CLOSURE_BUDGET;

    const BUDGET: usize = 100_000;

    fn spec(n: usize, bits: &[u8]) -> FamilySpec {
        FamilySpec::new(n, bits.iter().map(|&b| b == 1).collect(), FamilyMode::Theorem).unwrap()
    }

    #[test]
    fn b4_shape() {
        let a = build_b4();
        assert_eq!(a.num_states(), 4);
        assert!(a.is_bireversible());
        assert_eq!(build_family(&FamilySpec::b4()).unwrap(), a);
        for q in 0..4 {
            assert!(is_trivial(&a, &GroupWord::from_states(&[q, q]), 1000).unwrap());
        }
    }

    #[test]
    fn spec_validation() {
        assert!(FamilySpec::new(3, vec![true], FamilyMode::Theorem).is_err());
        assert!(FamilySpec::new(5, vec![true, true], FamilyMode::Theorem).is_err());
        assert!(FamilySpec::new(5, vec![false, true, true], FamilyMode::Theorem).is_err());
        let s = FamilySpec::new(5, vec![false, true, true], FamilyMode::Exploration).unwrap();
        assert!(s.warning().is_some());
        assert_eq!(FamilySpec::parse_sigma("1, 0,1").unwrap(), vec![true, false, true]);
        assert!(FamilySpec::parse_sigma("1,2").is_err());
    }

    #[test]
    fn family_recursion() {
        let a = build_family(&spec(5, &[1, 0, 1])).unwrap();
        assert_eq!(a.states(), &["a", "b", "c", "q1", "d"]);
        let q1 = a.state_index("q1").unwrap();
        let d = a.state_index("d").unwrap();
        assert_eq!((a.transition(q1, 0), a.transition(q1, 1)), (d, d));
        assert!(a.root_permutation(q1).unwrap().is_identity());
        assert!(a.is_bireversible());

        let dual = build_family(&spec(6, &[1, 1, 0, 1])).unwrap().dual();
        // sections of O at the letters a, b, c, q1, q2, d
        let sections: Vec<u32> = (0..6).map(|x| dual.transition(0, x)).collect();
        assert_eq!(sections, vec![0, 0, 1, 1, 0, 1]);
        assert_eq!(dual.cycle_notation(&dual.root_permutation(0).unwrap()), "(a c q1 q2 d)");
        assert_eq!(dual.cycle_notation(&dual.root_permutation(1).unwrap()), "(a b c q1 q2 d)");
    }

    #[test]
    fn constants() {
        let dual = build_b4().dual();
        let ab = Perm::from_cycles(4, &[vec![0, 1]]).unwrap();
        assert_eq!(constant_element(&dual, &ab, BUDGET).unwrap(), ab_bar());
        assert_eq!(constant_element(&dual, &Perm::identity(4), BUDGET).unwrap(), GroupWord::identity());
        let bc = Perm::from_cycles(4, &[vec![1, 2]]).unwrap();
        assert_eq!(constant_element(&dual, &bc, BUDGET).unwrap(), bc_bar());
        let cd = Perm::from_cycles(4, &[vec![2, 3]]).unwrap();
        assert!(matches!(constant_element(&dual, &cd, BUDGET), Err(Error::NotExpressible(_))));
        assert!(!acts_as_constant(&dual, &GroupWord::from_states(&[0]), &ab, BUDGET).unwrap());
    }

    #[test]
    fn derived_generators_of_b4() {
        let dual = build_b4().dual();
        let g = derived_generators(&FamilySpec::b4(), BUDGET).unwrap();
        let alpha = root_permutation(&dual, &g.alpha).unwrap();
        let beta = root_permutation(&dual, &g.beta).unwrap();
        assert_eq!(dual.cycle_notation(&alpha), "(a b)(c d)");
        assert_eq!(dual.cycle_notation(&beta), "(c d)");
        let orders = g.check_quotients(&dual, 2).unwrap();
        assert_eq!(orders[1], BigUint::from(24u32));
        // index 27 between the first two levels
        assert_eq!(&orders[2] / &orders[1], BigUint::from(27u32));
    }

    #[test]
    fn derived_generators_of_family() {
        let s = spec(6, &[1, 0, 1, 1]);
        let dual = build_family(&s).unwrap().dual();
        let g = derived_generators(&s, BUDGET).unwrap();
        let beta = root_permutation(&dual, &g.beta).unwrap();
        assert_eq!(dual.cycle_notation(&beta), "(c q1 q2 d)");
        let alpha = root_permutation(&dual, &g.alpha).unwrap();
        assert_eq!(dual.cycle_notation(&alpha), "(a b)(c q1 q2 d)");
        g.check_quotients(&dual, 2).unwrap();
    }

    #[test]
    fn lifting_rule() {
        use DerivedGen as X;
        use LiftedGen as Y;
        assert_eq!(lift_dual_word(&[X::BcBar]), vec![Y::BcBar]);
        assert_eq!(lift_dual_word(&[X::Alpha, X::Beta]), vec![Y::Alpha, Y::BetaInv]);
        assert_eq!(
            lift_dual_word(&[X::Beta, X::BcBar, X::Beta, X::Alpha]),
            vec![Y::Beta, Y::BcBar, Y::BetaInv, Y::Alpha]
        );
        assert!(lift_dual_word(&[]).is_empty());
    }

    #[test]
    fn witnesses() {
        let a = build_b4();
        assert_eq!(witness_word(1).render(&a), "c");
        assert_eq!(witness_word(2).render(&a), "a*c");
        assert_eq!(witness_word(5).render(&a), "a*b*a*b*c");
        assert_eq!(witness_word(6).render(&a), "a*b*a*b*a*c");
    }

    #[test]
    fn small_certificates() {
        let r = transitivity_certificate(&FamilySpec::b4(), 4, DEFAULT_CLOSURE_BUDGET).unwrap();
        assert_eq!(r.verdict, crate::Verdict::Certified);
        assert_eq!(r.counts["levels_checked"], 5);
        assert_eq!(r.details.as_ref().unwrap()["levels"][4]["sizes"], json!([108]));
        let s = FamilySpec::new(5, vec![true, false, true], FamilyMode::Theorem).unwrap();
        let r = transitivity_certificate(&s, 1, DEFAULT_CLOSURE_BUDGET).unwrap();
        assert_eq!(r.verdict, crate::Verdict::Certified);
        assert!(transitivity_certificate(&s, 7, DEFAULT_CLOSURE_BUDGET).is_err());
    }
}
