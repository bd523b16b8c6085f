//! Word problem for automaton groups by section closure, bounded order and
//! finiteness probes, and the bounded free-product certificate.
//!
//! An automorphism is trivial iff every one of its sections fixes the first level.
//! Sections of a fixed word all have the word's length and live in a finite set, so
//! the closure under single-letter sections is finite and decides triviality.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde_json::json;

use crate::action::{acts_trivially_on_letters, apply_unchecked, section_at_letter, Factor, GroupWord};
use crate::automaton::MealyAutomaton;
use crate::error::{Error, Result};
use crate::report::{CertReport, Verdict};

pub const DEFAULT_CLOSURE_BUDGET: usize = 1_000_000;
pub const DEFAULT_ELEMENT_BUDGET: usize = 10_000;

/// All sections of a seed word at vertices of the tree, deduplicated by literal factor
/// sequence.
#[derive(Clone, Debug)]
pub struct SectionClosure {
    pub seed: GroupWord,
    /// Members in discovery (breadth-first) order; `members[0]` is the seed.
    pub members: Vec<GroupWord>,
    /// `edges[i][x]` is the index of the section of `members[i]` at letter `x`.
    pub edges: Vec<Vec<usize>>,
}

impl SectionClosure {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: &GroupWord) -> bool {
        self.members.contains(w)
    }
}

pub fn section_closure(aut: &MealyAutomaton, w: &GroupWord, budget: usize) -> Result<SectionClosure> {
    w.validate(aut)?;
    let d = aut.degree();
    let mut index: HashMap<Vec<Factor>, usize> = HashMap::from([(w.0.clone(), 0)]);
    let mut members = vec![w.clone()];
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut scratch = Vec::with_capacity(w.len());
    let mut i = 0;
    while i < members.len() {
        let mut row = Vec::with_capacity(d);
        for x in 0..d as u32 {
            section_at_letter(aut, &members[i].0, x, &mut scratch);
            let next = match index.get(&scratch) {
                Some(&j) => j,
                None => {
                    if members.len() >= budget {
                        return Err(Error::BudgetExceeded { budget });
                    }
                    let j = members.len();
                    index.insert(scratch.clone(), j);
                    members.push(GroupWord(scratch.clone()));
                    j
                }
            };
            row.push(next);
        }
        edges.push(row);
        i += 1;
    }
    Ok(SectionClosure {
        seed: w.clone(),
        members,
        edges,
    })
}

/// Result of a triviality test, with the number of closure members explored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triviality {
    pub trivial: bool,
    pub explored: usize,
}

/// Breadth-first section closure that stops at the first section moving a letter.
pub(crate) fn triviality(aut: &MealyAutomaton, w: &[Factor], budget: usize) -> Result<Triviality> {
    if !acts_trivially_on_letters(aut, w) {
        return Ok(Triviality {
            trivial: false,
            explored: 1,
        });
    }
    let d = aut.degree() as u32;
    let mut seen: HashSet<Vec<Factor>> = HashSet::from([w.to_vec()]);
    let mut queue: VecDeque<Vec<Factor>> = VecDeque::from([w.to_vec()]);
    let mut scratch = Vec::with_capacity(w.len());
    while let Some(member) = queue.pop_front() {
        for x in 0..d {
            section_at_letter(aut, &member, x, &mut scratch);
            if seen.contains(&scratch) {
                continue;
            }
            if seen.len() >= budget {
                return Err(Error::BudgetExceeded { budget });
            }
            seen.insert(scratch.clone());
            if !acts_trivially_on_letters(aut, &scratch) {
                return Ok(Triviality {
                    trivial: false,
                    explored: seen.len(),
                });
            }
            queue.push_back(scratch.clone());
        }
    }
    Ok(Triviality {
        trivial: true,
        explored: seen.len(),
    })
}

/// Whether `w` acts as the identity on the whole tree.
pub fn is_trivial(aut: &MealyAutomaton, w: &GroupWord, budget: usize) -> Result<bool> {
    w.validate(aut)?;
    Ok(triviality(aut, &w.0, budget)?.trivial)
}

/// Whether `w1` and `w2` define the same automorphism (`w1·w2⁻¹` is trivial).
pub fn are_equal(aut: &MealyAutomaton, w1: &GroupWord, w2: &GroupWord, budget: usize) -> Result<bool> {
    is_trivial(aut, &w1.then(&w2.inverse()), budget)
}

/// Smallest `k ≤ max_order` with `w^k` trivial, or `None`.
pub fn order_bounded(aut: &MealyAutomaton, w: &GroupWord, max_order: usize, budget: usize) -> Result<Option<usize>> {
    w.validate(aut)?;
    for k in 1..=max_order {
        if triviality(aut, &w.pow(k).0, budget)?.trivial {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSize {
    Finite(usize),
    /// More than this many distinct elements were found.
    Exceeds(usize),
}

impl GroupSize {
    pub fn is_finite(&self) -> bool {
        matches!(self, GroupSize::Finite(_))
    }
}

/// Level used to bucket elements by their action before exact comparison.
fn fingerprint_level(d: usize) -> usize {
    if d <= 1 {
        return 1;
    }
    let mut k = 1;
    while d.pow(k as u32 + 1) <= 256 {
        k += 1;
    }
    k
}

/// Breadth-first enumeration of the group generated by the states (and their
/// inverses), stopping once more than `max_elements` distinct elements are known.
pub fn enumerate_group_bounded(aut: &MealyAutomaton, max_elements: usize, budget: usize) -> Result<GroupSize> {
    if !aut.is_invertible() {
        return Err(Error::NotInvertible("group enumeration needs an invertible automaton".into()));
    }
    let d = aut.degree();
    let level = fingerprint_level(d);
    let level_vertices: Vec<Vec<u32>> = {
        let mut vs = vec![Vec::new()];
        for _ in 0..level {
            vs = vs
                .into_iter()
                .flat_map(|v: Vec<u32>| {
                    (0..d as u32).map(move |x| {
                        let mut c = v.clone();
                        c.push(x);
                        c
                    })
                })
                .collect();
        }
        vs
    };
    let fingerprint = |w: &GroupWord| -> Vec<u32> {
        level_vertices
            .iter()
            .flat_map(|v| apply_unchecked(aut, &w.0, v))
            .collect()
    };
    let generators: Vec<Factor> = (0..aut.num_states() as u32)
        .flat_map(|q| [Factor::pos(q), Factor::neg(q)])
        .collect();

    let mut reps: Vec<GroupWord> = vec![GroupWord::identity()];
    let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    buckets.entry(fingerprint(&reps[0])).or_default().push(0);
    let mut frontier = 0;
    while frontier < reps.len() {
        let base = reps[frontier].clone();
        frontier += 1;
        for &g in &generators {
            let mut candidate = base.clone();
            candidate.0.push(g);
            let key = fingerprint(&candidate);
            let mut known = false;
            if let Some(bucket) = buckets.get(&key) {
                for &i in bucket {
                    if are_equal(aut, &candidate, &reps[i], budget)? {
                        known = true;
                        break;
                    }
                }
            }
            if !known {
                if reps.len() >= max_elements {
                    return Ok(GroupSize::Exceeds(max_elements));
                }
                buckets.entry(key).or_default().push(reps.len());
                reps.push(candidate);
            }
        }
    }
    Ok(GroupSize::Finite(reps.len()))
}

/// Number of words of length `len` over `m` letters with no letter repeated consecutively.
pub fn reduced_word_count(m: u64, len: u32) -> u64 {
    match (m, len) {
        (_, 0) => 1,
        (0, _) => 0,
        _ => m * (m - 1).pow(len - 1),
    }
}

/// The `rank`-th reduced word of length `len` over `m` letters, in lexicographic order.
pub fn unrank_reduced_word(m: u32, len: u32, mut rank: u64) -> Vec<u32> {
    let mut out = Vec::with_capacity(len as usize);
    if len == 0 {
        return out;
    }
    let tail = (m as u64 - 1).pow(len - 1);
    let first = (rank / tail) as u32;
    rank %= tail;
    out.push(first);
    let mut place = tail;
    for _ in 1..len {
        place /= (m - 1) as u64;
        let digit = (rank / place) as u32;
        rank %= place;
        let prev = *out.last().unwrap();
        out.push(if digit < prev { digit } else { digit + 1 });
    }
    out
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub max_length: u32,
    pub closure_budget: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Number of reduced words (in length-then-lex order) already checked by an earlier run.
    pub resume_from: u64,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_length: 10,
            closure_budget: DEFAULT_CLOSURE_BUDGET,
            jobs: None,
            resume_from: 0,
            seed: 0,
        }
    }
}

const CHUNK: u64 = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Event {
    Trivial,
    Budget,
}

#[derive(Clone, Copy, Debug, Default)]
struct ChunkStats {
    words: u64,
    closure_total: u64,
    closure_max: u64,
}

struct ChunkOutcome {
    stats: ChunkStats,
    /// Global index of the first event in the chunk, if any.
    event: Option<(u64, Event)>,
}

fn check_chunk(aut: &MealyAutomaton, len: u32, offset: u64, range: std::ops::Range<u64>, budget: usize) -> ChunkOutcome {
    let m = aut.num_states() as u32;
    let mut stats = ChunkStats::default();
    for rank in range {
        let states = unrank_reduced_word(m, len, rank);
        let word: Vec<Factor> = states.iter().map(|&q| Factor::pos(q)).collect();
        match triviality(aut, &word, budget) {
            Ok(t) => {
                stats.words += 1;
                stats.closure_total += t.explored as u64;
                stats.closure_max = stats.closure_max.max(t.explored as u64);
                if t.trivial {
                    return ChunkOutcome {
                        stats,
                        event: Some((offset + rank, Event::Trivial)),
                    };
                }
            }
            Err(_) => {
                return ChunkOutcome {
                    stats,
                    event: Some((offset + rank, Event::Budget)),
                }
            }
        }
    }
    ChunkOutcome { stats, event: None }
}

/// Bounded check that the states generate a free product of groups of order 2: every
/// state is an involution and no nonempty reduced word of length `≤ max_length` is
/// trivial. Results do not depend on the number of workers.
pub fn certify_free_product(aut: &MealyAutomaton, label: &str, opts: &CertifyOptions) -> Result<CertReport> {
    if !aut.is_invertible() {
        return Err(Error::NotInvertible("free-product certificate needs an invertible automaton".into()));
    }
    let m = aut.num_states() as u32;
    let mut report = CertReport::new(label, "free-product")
        .param("max_length", opts.max_length)
        .param("budget_closure", opts.closure_budget as u64)
        .param("resume_from", opts.resume_from);
    report.seed = opts.seed;

    for q in 0..m {
        let square = GroupWord::from_states(&[q, q]);
        match triviality(aut, &square.0, opts.closure_budget) {
            Ok(t) if t.trivial => {}
            Ok(_) => {
                report.count("involutions_checked", q as u64 + 1);
                report.refute("word", square.render(aut), "generator is not an involution");
                report.count("words_checked", 0);
                return Ok(report);
            }
            Err(_) => {
                report.verdict = Verdict::BudgetExceeded;
                report.details = Some(json!({ "budget_exceeded_at": square.render(aut) }));
                report.count("involutions_checked", q as u64);
                report.count("words_checked", 0);
                return Ok(report);
            }
        }
    }
    report.count("involutions_checked", m as u64);

    // Global rank space: lengths 1..=max_length concatenated.
    let mut segments = Vec::new();
    let mut offset = 0u64;
    for len in 1..=opts.max_length {
        let count = reduced_word_count(m as u64, len);
        segments.push((len, offset, count));
        offset += count;
    }
    let total = offset;
    let start = opts.resume_from.min(total);

    let mut chunks = Vec::new();
    for &(len, seg_offset, count) in &segments {
        let lo = start.saturating_sub(seg_offset).min(count);
        let mut r = lo;
        while r < count {
            let hi = (r + CHUNK).min(count);
            chunks.push((len, seg_offset, r..hi));
            r = hi;
        }
    }

    let best = AtomicU64::new(u64::MAX);
    let run = || -> Vec<Option<ChunkOutcome>> {
        chunks
            .par_iter()
            .map(|(len, seg_offset, range)| {
                if seg_offset + range.start > best.load(Ordering::Relaxed) {
                    return None;
                }
                let out = check_chunk(aut, *len, *seg_offset, range.clone(), opts.closure_budget);
                if let Some((idx, _)) = out.event {
                    best.fetch_min(idx, Ordering::Relaxed);
                }
                Some(out)
            })
            .collect()
    };
    let outcomes = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::VerificationFailed(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut words = start;
    let mut per_length = vec![0u64; opts.max_length as usize + 1];
    let mut closure_total = 0u64;
    let mut closure_max = 0u64;
    let mut first_event = None;
    for ((len, _, _), outcome) in chunks.iter().zip(outcomes) {
        let outcome = outcome.expect("chunks before the first event are never skipped");
        words += outcome.stats.words;
        per_length[*len as usize] += outcome.stats.words;
        closure_total += outcome.stats.closure_total;
        closure_max = closure_max.max(outcome.stats.closure_max);
        if let Some(e) = outcome.event {
            first_event = Some(e);
            break;
        }
    }
    report.count("words_checked", words);
    report.count("words_total", total);
    report.count("closure_members_total", closure_total);
    report.count("closure_members_max", closure_max);
    report.details = Some(json!({ "words_checked_by_length": &per_length[1..] }));

    if let Some((idx, event)) = first_event {
        let &(len, seg_offset, _) = segments
            .iter()
            .find(|(_, o, c)| idx >= *o && idx < o + c)
            .expect("event inside a segment");
        let word = GroupWord::from_states(&unrank_reduced_word(m, len, idx - seg_offset));
        match event {
            Event::Trivial => report.refute("word", word.render(aut), "reduced word acts trivially"),
            Event::Budget => {
                report.verdict = Verdict::BudgetExceeded;
                report.details = Some(json!({
                    "words_checked_by_length": &per_length[1..],
                    "budget_exceeded_at": word.render(aut),
                    "resume_from": idx,
                }));
            }
        }
    }
    Ok(report)
}
