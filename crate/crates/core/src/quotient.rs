//! Finite level quotients: the permutation groups induced on one level of the
//! tree (all of it, or only its square-free words), their orders, orbits and
//! stabilizers.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::action::{apply_unchecked, GroupWord, Vertex};
use crate::automaton::MealyAutomaton;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::report::CertReport;
use crate::schreier::{enumerate, StabChain};

/// Largest group enumerated element by element.
pub const CLOSURE_LIMIT: u64 = 10_000_000;
/// Cap on `order × degree` for element-by-element enumeration.
const CLOSURE_ENTRY_LIMIT: u64 = 50_000_000;
/// Cap on the number of points of a level domain.
pub const MAX_DOMAIN_POINTS: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainMode {
    Full,
    Squarefree,
}

/// The vertices of one tree level, or its square-free part, in lexicographic order.
#[derive(Clone, Debug)]
pub struct LevelDomain {
    pub level: usize,
    pub mode: DomainMode,
    pub degree: usize,
    points: Vec<Vertex>,
    index: HashMap<Vertex, u32>,
}

impl LevelDomain {
    pub fn full(degree: usize, level: usize) -> Result<Self> {
        Self::build(degree, level, DomainMode::Full)
    }

    pub fn squarefree(degree: usize, level: usize) -> Result<Self> {
        Self::build(degree, level, DomainMode::Squarefree)
    }

    pub fn new(degree: usize, level: usize, mode: DomainMode) -> Result<Self> {
        Self::build(degree, level, mode)
    }

    fn build(degree: usize, level: usize, mode: DomainMode) -> Result<Self> {
        let expected = match mode {
            DomainMode::Full => (degree as f64).powi(level as i32),
            DomainMode::Squarefree if level == 0 => 1.0,
            DomainMode::Squarefree => degree as f64 * ((degree as f64) - 1.0).powi(level as i32 - 1),
        };
        if expected > MAX_DOMAIN_POINTS as f64 {
            return Err(Error::SizeCap(format!(
                "level {level} over {degree} letters has {expected} points"
            )));
        }
        let mut points: Vec<Vertex> = vec![Vec::new()];
        for _ in 0..level {
            let mut next = Vec::with_capacity(points.len() * degree);
            for v in &points {
                for x in 0..degree as u32 {
                    if mode == DomainMode::Squarefree && v.last() == Some(&x) {
                        continue;
                    }
                    let mut c = v.clone();
                    c.push(x);
                    next.push(c);
                }
            }
            points = next;
        }
        let index = points.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
        Ok(LevelDomain {
            level,
            mode,
            degree,
            points,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vertex] {
        &self.points
    }

    pub fn index_of(&self, v: &[u32]) -> Option<u32> {
        self.index.get(v).copied()
    }
}

/// Permutation of the domain points induced by `w`.
pub fn level_permutation(aut: &MealyAutomaton, w: &GroupWord, dom: &LevelDomain) -> Result<Perm> {
    w.validate(aut)?;
    if aut.degree() != dom.degree {
        return Err(Error::AlphabetMismatch(format!(
            "domain over {} letters, automaton over {}",
            dom.degree,
            aut.degree()
        )));
    }
    let images: Vec<Option<u32>> = dom
        .points
        .par_iter()
        .map(|v| dom.index_of(&apply_unchecked(aut, &w.0, v)))
        .collect();
    let mut out = Vec::with_capacity(images.len());
    for (i, img) in images.into_iter().enumerate() {
        match img {
            Some(j) => out.push(j),
            None => return Err(Error::DomainNotPreserved(aut.alphabet().render(&dom.points[i]))),
        }
    }
    Ok(Perm::from_images_unchecked(out))
}

/// The permutation group induced by a list of group words on a level domain.
#[derive(Debug)]
pub struct LevelPermutationGroup {
    pub domain: LevelDomain,
    pub generators: Vec<(String, Perm)>,
    order: OnceLock<BigUint>,
}

pub fn build_group(aut: &MealyAutomaton, gens: &[GroupWord], dom: &LevelDomain) -> Result<LevelPermutationGroup> {
    let generators = gens
        .iter()
        .map(|g| Ok((g.render(aut), level_permutation(aut, g, dom)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelPermutationGroup {
        domain: dom.clone(),
        generators,
        order: OnceLock::new(),
    })
}

/// Every state of the automaton, as a one-letter word.
pub fn state_generators(aut: &MealyAutomaton) -> Vec<GroupWord> {
    (0..aut.num_states() as u32).map(|q| GroupWord::from_states(&[q])).collect()
}

impl LevelPermutationGroup {
    pub fn degree(&self) -> usize {
        self.domain.len()
    }

    pub fn generator_perms(&self) -> Vec<Perm> {
        self.generators.iter().map(|(_, p)| p.clone()).collect()
    }

    pub fn chain(&self, base_prefix: &[u32]) -> Result<StabChain> {
        StabChain::new(self.degree(), &self.generator_perms(), base_prefix)
    }

    /// Exact order; see [`group_order`].
    pub fn order(&self) -> Result<BigUint> {
        if let Some(o) = self.order.get() {
            return Ok(o.clone());
        }
        let o = group_order(self)?;
        Ok(self.order.get_or_init(|| o).clone())
    }
}

/// Order of the group from a stabilizer chain; groups small enough to enumerate are
/// also closed element by element and the two counts must agree.
pub fn group_order(g: &LevelPermutationGroup) -> Result<BigUint> {
    let chain = g.chain(&[])?;
    let order = chain.order();
    if let Some(small) = closure_size_if_small(&order, g.degree()) {
        let closed = enumerate(g.degree(), &g.generator_perms(), small as usize + 1)
            .ok_or_else(|| Error::VerificationFailed("closure exceeded the chain order".into()))?;
        if closed.elements.len() as u64 != small {
            return Err(Error::VerificationFailed(format!(
                "stabilizer chain gives order {small}, closure gives {}",
                closed.elements.len()
            )));
        }
    }
    Ok(order)
}

fn closure_size_if_small(order: &BigUint, degree: usize) -> Option<u64> {
    let o: u64 = order.try_into().ok()?;
    (o <= CLOSURE_LIMIT && o.saturating_mul(degree.max(1) as u64) <= CLOSURE_ENTRY_LIMIT).then_some(o)
}

/// Orbit partition by union-find over generator images; orbits are sorted and listed by
/// smallest point.
pub fn orbits(g: &LevelPermutationGroup) -> Vec<Vec<u32>> {
    let n = g.degree();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for (_, p) in &g.generators {
        for x in 0..n as u32 {
            let (a, b) = (find(&mut parent, x), find(&mut parent, p.apply(x)));
            if a != b {
                let (lo, hi) = (a.min(b), a.max(b));
                parent[hi as usize] = lo;
            }
        }
    }
    let mut classes: HashMap<u32, Vec<u32>> = HashMap::new();
    for x in 0..n as u32 {
        let r = find(&mut parent, x);
        classes.entry(r).or_default().push(x);
    }
    let mut out: Vec<Vec<u32>> = classes.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Orbit of a single point by breadth-first search over generator images.
pub fn orbit_of(g: &LevelPermutationGroup, point: u32) -> Vec<u32> {
    let mut seen = vec![false; g.degree()];
    let mut queue = VecDeque::from([point]);
    seen[point as usize] = true;
    let mut out = Vec::new();
    while let Some(x) = queue.pop_front() {
        out.push(x);
        for (_, p) in &g.generators {
            let y = p.apply(x);
            if !seen[y as usize] {
                seen[y as usize] = true;
                queue.push_back(y);
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitRow {
    pub level: usize,
    pub points: usize,
    pub orbits: usize,
    pub sizes: Vec<usize>,
}

impl OrbitRow {
    /// `level, points, orbits, sizes` with sizes joined by spaces.
    pub fn to_text(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        format!("{}, {}, {}, {}", self.level, self.points, self.orbits, sizes.join(" "))
    }
}

/// Orbits of `⟨gens⟩` on square-free levels `0..=max_level`.
pub fn squarefree_orbit_table(aut: &MealyAutomaton, gens: &[GroupWord], max_level: usize) -> Result<Vec<OrbitRow>> {
    (0..=max_level)
        .map(|level| {
            let dom = LevelDomain::squarefree(aut.degree(), level)?;
            let g = build_group(aut, gens, &dom)?;
            let parts = orbits(&g);
            Ok(OrbitRow {
                level,
                points: dom.len(),
                orbits: parts.len(),
                sizes: parts.iter().map(|c| c.len()).collect(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizerTable {
    /// `|G/Stab(k)|` for `k = 0..=max_level`.
    #[serde(serialize_with = "ser_big_vec")]
    pub quotient_orders: Vec<BigUint>,
    /// `|Stab(k)/Stab(k+1)|` for `k < max_level`.
    #[serde(serialize_with = "ser_big_vec")]
    pub indices: Vec<BigUint>,
}

fn ser_big_vec<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

pub const MAX_TABLE_LEVEL: usize = 8;

/// Orders of the level quotients `G/Stab(k)` and the successive indices.
pub fn stabilizer_index_table(aut: &MealyAutomaton, gens: &[GroupWord], max_level: usize) -> Result<StabilizerTable> {
    if max_level > MAX_TABLE_LEVEL {
        return Err(Error::SizeCap(format!("stabilizer table beyond level {MAX_TABLE_LEVEL}")));
    }
    let quotient_orders = (0..=max_level)
        .map(|k| {
            let dom = LevelDomain::full(aut.degree(), k)?;
            build_group(aut, gens, &dom)?.order()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut indices = Vec::with_capacity(max_level);
    for k in 0..max_level {
        let (lo, hi) = (&quotient_orders[k], &quotient_orders[k + 1]);
        if hi % lo != BigUint::from(0u32) {
            return Err(Error::VerificationFailed(format!(
                "level {k} quotient order {lo} does not divide level {} order {hi}",
                k + 1
            )));
        }
        indices.push(hi / lo);
    }
    Ok(StabilizerTable {
        quotient_orders,
        indices,
    })
}

fn render_enumerated_word(aut: &MealyAutomaton, gens: &[GroupWord], word: &[usize]) -> String {
    let w = word.iter().fold(GroupWord::identity(), |acc, &i| acc.then(&gens[i]));
    w.render(aut)
}

/// Checks on the level-2 quotient that every element fixing level 1 pointwise has
/// sections at level 1 inducing even permutations of the alphabet.
pub fn check_even_sections(aut: &MealyAutomaton, gens: &[GroupWord], label: &str) -> Result<CertReport> {
    let d = aut.degree();
    if d < 3 {
        return Err(Error::AlphabetMismatch(format!(
            "even-sections check needs at least 3 letters, found {d}"
        )));
    }
    let dom = LevelDomain::full(d, 2)?;
    let group = build_group(aut, gens, &dom)?;
    let mut report = CertReport::new(label, "even-sections").param("level", 2);
    let order = group.order()?;
    let small = closure_size_if_small(&order, dom.len())
        .ok_or_else(|| Error::SizeCap(format!("level-2 quotient of order {order} is too large to enumerate")))?;
    let all = enumerate(dom.len(), &group.generator_perms(), small as usize + 1)
        .ok_or_else(|| Error::VerificationFailed("closure exceeded the chain order".into()))?;
    let mut fixing = 0u64;
    let mut sections = 0u64;
    for (p, word) in all.elements.iter().zip(&all.words) {
        // point x·y has index x*d + y
        let fixes_level_one = (0..d * d).all(|i| p.apply(i as u32) as usize / d == i / d);
        if !fixes_level_one {
            continue;
        }
        fixing += 1;
        for x in 0..d {
            sections += 1;
            let images: Vec<u32> = (0..d).map(|y| p.apply((x * d + y) as u32) % d as u32).collect();
            let section = Perm::from_images_unchecked(images);
            if !section.is_even() {
                report.count("elements", all.elements.len() as u64);
                report.count("level1_fixing_elements", fixing);
                report.count("sections_checked", sections);
                report.refute(
                    "word",
                    render_enumerated_word(aut, gens, word),
                    format!(
                        "fixes level 1 but its section at `{}` induces the odd permutation {}",
                        aut.alphabet().letter(x as u32),
                        aut.cycle_notation(&section)
                    ),
                );
                return Ok(report);
            }
        }
    }
    report.count("elements", all.elements.len() as u64);
    report.count("level1_fixing_elements", fixing);
    report.count("sections_checked", sections);
    Ok(report)
}

pub const MAX_STAB_EQUALITY_LEVEL: usize = 5;

/// For each level `n ≤ max_level`, compares inside the level-`n` quotient the pointwise
/// stabilizer of the whole level with the pointwise stabilizer of its square-free
/// vertices. The first is contained in the second, so equal orders mean equality.
pub fn check_stab_equality(aut: &MealyAutomaton, gens: &[GroupWord], max_level: usize, label: &str) -> Result<CertReport> {
    if max_level > MAX_STAB_EQUALITY_LEVEL {
        return Err(Error::SizeCap(format!(
            "stabilizer equality beyond level {MAX_STAB_EQUALITY_LEVEL}"
        )));
    }
    let mut report = CertReport::new(label, "stab-equality").param("max_level", max_level as u64);
    let d = aut.degree();
    let mut rows = Vec::new();
    for n in 0..=max_level {
        let full = LevelDomain::full(d, n)?;
        let group = build_group(aut, gens, &full)?;
        let squarefree: Vec<u32> = full
            .points()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.windows(2).all(|w| w[0] != w[1]))
            .map(|(i, _)| i as u32)
            .collect();
        let everything: Vec<u32> = (0..full.len() as u32).collect();
        let stab_full = group.chain(&everything)?.stabilizer_order(everything.len());
        let sf_chain = group.chain(&squarefree)?;
        let stab_sf = sf_chain.stabilizer_order(squarefree.len());
        rows.push(json!({
            "level": n,
            "quotient_order": sf_chain.order().to_string(),
            "stab_level": stab_full.to_string(),
            "stab_squarefree": stab_sf.to_string(),
        }));
        if stab_full != stab_sf {
            report.refute(
                "level",
                n.to_string(),
                format!("pointwise stabilizers differ: {stab_full} on the level, {stab_sf} on square-free vertices"),
            );
            break;
        }
    }
    report.count("levels_checked", rows.len() as u64);
    report.details = Some(json!({ "levels": rows }));
    Ok(report)
}
