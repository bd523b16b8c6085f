//! Action of group words on tree vertices, sections, portraits and the
//! switch-parity level-transitivity test.
//!
//! A [`GroupWord`] `g₁g₂⋯gₙ` acts with its first factor first:
//! `(g₁g₂)(v) = g₂(g₁(v))`.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::automaton::{MealyAutomaton, NO_ROW};
use crate::error::{Error, Result};
use crate::perm::Perm;

/// A vertex of the rooted tree: a word over the alphabet, as letter indices.
pub type Vertex = Vec<u32>;

/// A state or inverse state of an automaton: `2q` for `q`, `2q + 1` for `q⁻¹`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor(pub(crate) u32);

impl Factor {
    pub fn new(state: u32, inverse: bool) -> Self {
        Factor(2 * state + inverse as u32)
    }

    pub fn pos(state: u32) -> Self {
        Factor::new(state, false)
    }

    pub fn neg(state: u32) -> Self {
        Factor::new(state, true)
    }

    pub fn state(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Factor(self.0 ^ 1)
    }
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.state(), if self.is_inverse() { "⁻¹" } else { "" })
    }
}

/// A product of states and inverse states; the empty word is the identity.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroupWord(pub Vec<Factor>);

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord(Vec::new())
    }

    /// Word of positive factors.
    pub fn from_states(states: &[u32]) -> Self {
        GroupWord(states.iter().map(|&q| Factor::pos(q)).collect())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_inverses(&self) -> bool {
        self.0.iter().any(|f| f.is_inverse())
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &GroupWord) -> GroupWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        GroupWord(v)
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().rev().map(|f| f.inverse()).collect())
    }

    pub fn pow(&self, k: usize) -> GroupWord {
        GroupWord(self.0.repeat(k))
    }

    /// Checks that every factor refers to a state of `aut` and that inverses are only used
    /// with invertible automata.
    pub fn validate(&self, aut: &MealyAutomaton) -> Result<()> {
        for f in &self.0 {
            if f.state() as usize >= aut.num_states() {
                return Err(Error::UndefinedState(format!("#{}", f.state())));
            }
            if f.is_inverse() && !aut.is_invertible() {
                return Err(Error::NotInvertible(aut.state_name(f.state()).to_string()));
            }
        }
        Ok(())
    }

    /// Parses `name(^-1)?(*name(^-1)?)*`. The empty string, `1` (when no state has that
    /// name) and `ε` denote the identity. `O` is accepted for a state named `0` when the
    /// automaton has no state `O`.
    pub fn parse(aut: &MealyAutomaton, text: &str) -> Result<GroupWord> {
        let text = text.trim();
        if text.is_empty() || text == "ε" || (text == "1" && aut.state_index("1").is_none()) {
            return Ok(GroupWord::identity());
        }
        let mut factors = Vec::new();
        for piece in text.split('*') {
            let piece = piece.trim();
            let (name, inverse) = match piece.strip_suffix("^-1").or_else(|| piece.strip_suffix("⁻¹")) {
                Some(n) => (n.trim(), true),
                None => (piece, false),
            };
            let state = aut
                .state_index(name)
                .or_else(|| (name == "O").then(|| aut.state_index("0")).flatten())
                .ok_or_else(|| Error::UndefinedState(name.to_string()))?;
            factors.push(Factor::new(state, inverse));
        }
        let w = GroupWord(factors);
        w.validate(aut)?;
        Ok(w)
    }

    /// Renders in the `a*b^-1` literal syntax; the identity renders as `ε`.
    pub fn render(&self, aut: &MealyAutomaton) -> String {
        if self.0.is_empty() {
            return "ε".to_string();
        }
        self.0
            .iter()
            .map(|f| {
                let name = aut.state_name(f.state());
                if f.is_inverse() {
                    format!("{name}^-1")
                } else {
                    name.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl FromIterator<Factor> for GroupWord {
    fn from_iter<I: IntoIterator<Item = Factor>>(iter: I) -> Self {
        GroupWord(iter.into_iter().collect())
    }
}

fn check_vertex(aut: &MealyAutomaton, v: &[u32]) -> Result<()> {
    if let Some(&x) = v.iter().find(|&&x| x as usize >= aut.degree()) {
        return Err(Error::AlphabetMismatch(format!(
            "letter index {x} outside an alphabet of {} letters",
            aut.degree()
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn step(aut: &MealyAutomaton, row: u32, x: u32) -> (u32, u32) {
    let i = row as usize * aut.degree() + x as usize;
    debug_assert_ne!(aut.signed_out[i], NO_ROW);
    (aut.signed_out[i], aut.signed_next[i])
}

/// Image of `v` under one factor, in place; returns the state reached.
#[inline]
pub(crate) fn apply_factor_in_place(aut: &MealyAutomaton, f: Factor, v: &mut [u32]) -> Factor {
    let mut row = f.0;
    for x in v.iter_mut() {
        let (y, next) = step(aut, row, *x);
        *x = y;
        row = next;
    }
    Factor(row)
}

pub(crate) fn apply_unchecked(aut: &MealyAutomaton, w: &[Factor], v: &[u32]) -> Vertex {
    let mut out = v.to_vec();
    for &f in w {
        apply_factor_in_place(aut, f, &mut out);
    }
    out
}

/// Section of `w` at a single letter, written into `out`; returns the image letter.
#[inline]
pub(crate) fn section_at_letter(aut: &MealyAutomaton, w: &[Factor], x: u32, out: &mut Vec<Factor>) -> u32 {
    out.clear();
    let mut x = x;
    for &f in w {
        let (y, next) = step(aut, f.0, x);
        out.push(Factor(next));
        x = y;
    }
    x
}

/// Root permutation of a raw factor sequence, as an image list.
pub(crate) fn root_images(aut: &MealyAutomaton, w: &[Factor]) -> Vec<u32> {
    (0..aut.degree() as u32)
        .map(|x| w.iter().fold(x, |x, &f| step(aut, f.0, x).0))
        .collect()
}

#[inline]
pub(crate) fn acts_trivially_on_letters(aut: &MealyAutomaton, w: &[Factor]) -> bool {
    (0..aut.degree() as u32).all(|x| w.iter().fold(x, |x, &f| step(aut, f.0, x).0) == x)
}

/// Image of the vertex `v` under `w`.
pub fn apply(aut: &MealyAutomaton, w: &GroupWord, v: &[u32]) -> Result<Vertex> {
    w.validate(aut)?;
    check_vertex(aut, v)?;
    Ok(apply_unchecked(aut, &w.0, v))
}

/// Section `w|_v`: one factor per factor of `w`, the i-th being the state reached by the
/// i-th factor after reading the image of `v` under the preceding factors. The result is
/// not reduced.
pub fn section(aut: &MealyAutomaton, w: &GroupWord, v: &[u32]) -> Result<GroupWord> {
    w.validate(aut)?;
    check_vertex(aut, v)?;
    let mut current = v.to_vec();
    Ok(w.0
        .iter()
        .map(|&f| apply_factor_in_place(aut, f, &mut current))
        .collect())
}

/// Permutation induced by `w` on the first level.
pub fn root_permutation(aut: &MealyAutomaton, w: &GroupWord) -> Result<Perm> {
    w.validate(aut)?;
    Ok(Perm::from_images_unchecked(root_images(aut, &w.0)))
}

/// All vertices of length `< depth` in length-then-lexicographic order.
pub fn vertices_below(d: usize, depth: usize) -> Vec<Vertex> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 1..depth {
        let mut next = Vec::with_capacity(level.len() * d);
        for v in &level {
            for x in 0..d as u32 {
                let mut child: Vertex = v.clone();
                child.push(x);
                next.push(child);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    if depth == 0 {
        out.clear();
    }
    out
}

/// Root permutations of all sections of an element down to a fixed depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    pub depth: usize,
    /// Every vertex of length `< depth`, in length-then-lex order, with its label.
    pub labels: Vec<(Vertex, Perm)>,
}

pub const MAX_PORTRAIT_DEPTH: usize = 16;
const MAX_PORTRAIT_VERTICES: usize = 1 << 22;

#[derive(Serialize)]
struct PortraitJson {
    depth: usize,
    labels: Vec<PortraitLabelJson>,
}

#[derive(Serialize)]
struct PortraitLabelJson {
    vertex: String,
    perm: Vec<String>,
}

impl Portrait {
    pub fn label(&self, v: &[u32]) -> Option<&Perm> {
        self.labels.iter().find(|(u, _)| u == v).map(|(_, p)| p)
    }

    pub fn to_json(&self, aut: &MealyAutomaton) -> serde_json::Value {
        let alphabet = aut.alphabet();
        serde_json::to_value(PortraitJson {
            depth: self.depth,
            labels: self
                .labels
                .iter()
                .map(|(v, p)| PortraitLabelJson {
                    vertex: alphabet.render(v),
                    perm: p.images().iter().map(|&x| alphabet.letter(x).to_string()).collect(),
                })
                .collect(),
        })
        .expect("portrait serializes")
    }
}

pub fn portrait(aut: &MealyAutomaton, w: &GroupWord, depth: usize) -> Result<Portrait> {
    w.validate(aut)?;
    if depth > MAX_PORTRAIT_DEPTH {
        return Err(Error::SizeCap(format!(
            "portrait depth {depth} exceeds {MAX_PORTRAIT_DEPTH}"
        )));
    }
    let d = aut.degree();
    let count: f64 = (0..depth).map(|k| (d as f64).powi(k as i32)).sum();
    if count > MAX_PORTRAIT_VERTICES as f64 {
        return Err(Error::SizeCap(format!(
            "portrait of depth {depth} over {d} letters has too many vertices"
        )));
    }
    let labels = vertices_below(d, depth)
        .into_iter()
        .map(|v| {
            let s = section(aut, w, &v)?;
            let p = Perm::from_images_unchecked(root_images(aut, &s.0));
            Ok((v, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Portrait { depth, labels })
}

/// Outcome of the switch-parity test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SwitchParity {
    /// Every level `0..=depth` has an odd number of switches; the element is transitive on
    /// every level up to `depth + 1`.
    ConsistentUpTo { depth: usize },
    RefutedAtLevel { level: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwitchParityReport {
    pub verdict: SwitchParity,
    /// Number of switches (sections acting nontrivially on the first level) per level,
    /// up to the refuting level or `max_depth`.
    pub switches: Vec<u128>,
}

pub const MAX_SWITCH_DEPTH: usize = 120;

/// Counts, level by level, the vertices whose section acts nontrivially on the first
/// level, stopping at the first even count. Binary alphabets only.
pub fn switch_parity_transitive(
    aut: &MealyAutomaton,
    w: &GroupWord,
    max_depth: usize,
    budget: usize,
) -> Result<SwitchParityReport> {
    if aut.degree() != 2 {
        return Err(Error::NonBinaryAlphabet(aut.degree()));
    }
    w.validate(aut)?;
    if max_depth > MAX_SWITCH_DEPTH {
        return Err(Error::SizeCap(format!(
            "switch-parity depth {max_depth} exceeds {MAX_SWITCH_DEPTH}"
        )));
    }
    // multiset of sections at the current level, by literal factor sequence
    let mut level: HashMap<Vec<Factor>, u128> = HashMap::from([(w.0.clone(), 1)]);
    let mut switches = Vec::new();
    let mut scratch = Vec::new();
    for k in 0..=max_depth {
        let count: u128 = level
            .iter()
            .filter(|(s, _)| !acts_trivially_on_letters(aut, s))
            .map(|(_, &c)| c)
            .sum();
        switches.push(count);
        if count.is_multiple_of(2) {
            return Ok(SwitchParityReport {
                verdict: SwitchParity::RefutedAtLevel { level: k },
                switches,
            });
        }
        if k == max_depth {
            break;
        }
        let mut next: HashMap<Vec<Factor>, u128> = HashMap::with_capacity(level.len() * 2);
        for (s, c) in &level {
            for x in 0..2 {
                section_at_letter(aut, s, x, &mut scratch);
                *next.entry(scratch.clone()).or_insert(0) += c;
            }
        }
        if next.len() > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        level = next;
    }
    Ok(SwitchParityReport {
        verdict: SwitchParity::ConsistentUpTo { depth: max_depth },
        switches,
    })
}
