//! Permutation group orders: breadth-first closure for small groups and a
//! deterministic Schreier–Sims stabilizer chain for everything else.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::perm::Perm;

const NOT_IN_ORBIT: u32 = u32::MAX;
const ROOT: u32 = u32::MAX - 1;

/// Upper bound on `levels × degree` entries held by a chain's Schreier vectors.
const MAX_CHAIN_ENTRIES: usize = 1 << 27;

struct Level {
    base: u32,
    /// Indices into the chain's generator pool.
    gens: Vec<usize>,
    orbit: Vec<u32>,
    /// Per point: pool index of the generator that first reached it, `ROOT` for the base
    /// point, `NOT_IN_ORBIT` otherwise.
    parent: Vec<u32>,
    tested: HashSet<(u32, usize)>,
}

/// Base and strong generating set for a permutation group.
pub struct StabChain {
    degree: usize,
    pool: Vec<Perm>,
    pool_inv: Vec<Perm>,
    levels: Vec<Level>,
}

impl StabChain {
    /// Builds a chain whose base starts with `base_prefix` (in order, duplicates skipped).
    pub fn new(degree: usize, generators: &[Perm], base_prefix: &[u32]) -> Result<StabChain> {
        let mut chain = StabChain {
            degree,
            pool: Vec::new(),
            pool_inv: Vec::new(),
            levels: Vec::new(),
        };
        let mut seen = HashSet::new();
        for &b in base_prefix {
            if seen.insert(b) {
                chain.push_level(b)?;
            }
        }
        for g in generators {
            if g.degree() != degree {
                return Err(Error::VerificationFailed("generator of the wrong degree".into()));
            }
            if g.is_identity() {
                continue;
            }
            if chain.levels.iter().all(|l| g.apply(l.base) == l.base) {
                let moved = first_moved_point(g);
                chain.push_level(moved)?;
            }
            let idx = chain.add_to_pool(g.clone());
            for i in 0..chain.levels.len() {
                chain.levels[i].gens.push(idx);
                if g.apply(chain.levels[i].base) != chain.levels[i].base {
                    break;
                }
            }
        }
        for i in 0..chain.levels.len() {
            chain.extend_orbit(i);
        }
        chain.complete()?;
        Ok(chain)
    }

    fn push_level(&mut self, base: u32) -> Result<()> {
        if (self.levels.len() + 1) * self.degree > MAX_CHAIN_ENTRIES {
            return Err(Error::SizeCap(format!(
                "stabilizer chain over {} points grew past {} levels",
                self.degree,
                self.levels.len()
            )));
        }
        let mut parent = vec![NOT_IN_ORBIT; self.degree];
        parent[base as usize] = ROOT;
        self.levels.push(Level {
            base,
            gens: Vec::new(),
            orbit: vec![base],
            parent,
            tested: HashSet::new(),
        });
        Ok(())
    }

    fn add_to_pool(&mut self, g: Perm) -> usize {
        self.pool_inv.push(g.inverse());
        self.pool.push(g);
        self.pool.len() - 1
    }

    fn extend_orbit(&mut self, i: usize) {
        let level = &mut self.levels[i];
        let mut k = 0;
        while k < level.orbit.len() {
            let p = level.orbit[k];
            for &g in &level.gens {
                let q = self.pool[g].apply(p);
                if level.parent[q as usize] == NOT_IN_ORBIT {
                    level.parent[q as usize] = g as u32;
                    level.orbit.push(q);
                }
            }
            k += 1;
        }
    }

    /// Coset representative of level `i` mapping the base point to `beta`.
    fn transversal(&self, i: usize, beta: u32) -> Perm {
        let level = &self.levels[i];
        let mut path = Vec::new();
        let mut p = beta;
        while level.parent[p as usize] != ROOT {
            let g = level.parent[p as usize] as usize;
            path.push(g);
            p = self.pool_inv[g].apply(p);
        }
        let mut u = Perm::identity(self.degree);
        for &g in path.iter().rev() {
            u = u.then(&self.pool[g]);
        }
        u
    }

    /// Replaces `h` (which maps the base of level `i` to `beta`) by `h·u_beta⁻¹`.
    fn strip_level(&self, i: usize, mut h: Perm, beta: u32) -> Perm {
        let level = &self.levels[i];
        let mut p = beta;
        while level.parent[p as usize] != ROOT {
            let g = level.parent[p as usize] as usize;
            h = h.then(&self.pool_inv[g]);
            p = self.pool_inv[g].apply(p);
        }
        h
    }

    /// Sifts `h` through levels `from..`; returns the residue and the level where it stopped.
    fn sift(&self, mut h: Perm, from: usize) -> (Perm, usize) {
        for i in from..self.levels.len() {
            let beta = h.apply(self.levels[i].base);
            if self.levels[i].parent[beta as usize] == NOT_IN_ORBIT {
                return (h, i);
            }
            h = self.strip_level(i, h, beta);
        }
        (h, self.levels.len())
    }

    fn failing_schreier_generator(&mut self, i: usize) -> Option<(Perm, usize)> {
        let mut k = 0;
        while k < self.levels[i].orbit.len() {
            let beta = self.levels[i].orbit[k];
            let gens = self.levels[i].gens.clone();
            for g in gens {
                if !self.levels[i].tested.insert((beta, g)) {
                    continue;
                }
                let u = self.transversal(i, beta).then(&self.pool[g]);
                let image = self.pool[g].apply(beta);
                let y = self.strip_level(i, u, image);
                let (h, j) = self.sift(y, i + 1);
                if !h.is_identity() {
                    return Some((h, j));
                }
            }
            k += 1;
        }
        None
    }

    fn complete(&mut self) -> Result<()> {
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            match self.failing_schreier_generator(i as usize) {
                Some((h, j)) => {
                    if j == self.levels.len() {
                        self.push_level(first_moved_point(&h))?;
                    }
                    let idx = self.add_to_pool(h);
                    for l in (i as usize + 1)..=j {
                        self.levels[l].gens.push(idx);
                        self.extend_orbit(l);
                    }
                    i = j as isize;
                }
                None => i -= 1,
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn basic_orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn order(&self) -> BigUint {
        self.stabilizer_order(0)
    }

    /// Order of the pointwise stabilizer of the first `k` base points.
    pub fn stabilizer_order(&self, k: usize) -> BigUint {
        self.levels[k.min(self.levels.len())..]
            .iter()
            .fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.degree && {
            let (h, j) = self.sift(g.clone(), 0);
            j == self.levels.len() && h.is_identity()
        }
    }
}

fn first_moved_point(g: &Perm) -> u32 {
    (0..g.degree() as u32)
        .find(|&p| g.apply(p) != p)
        .expect("non-identity permutation")
}

/// An element of a closure enumeration with the generator sequence producing it.
pub struct Enumerated {
    pub elements: Vec<Perm>,
    /// `words[i]` lists generator indices, first applied first.
    pub words: Vec<Vec<usize>>,
}

/// Breadth-first closure of `⟨generators⟩`; `None` once more than `cap` elements appear.
pub fn enumerate(degree: usize, generators: &[Perm], cap: usize) -> Option<Enumerated> {
    let id = Perm::identity(degree);
    let mut index: HashMap<Perm, usize> = HashMap::from([(id.clone(), 0)]);
    let mut elements = vec![id];
    let mut parents: Vec<(usize, usize)> = vec![(0, usize::MAX)];
    let mut k = 0;
    while k < elements.len() {
        for (gi, g) in generators.iter().enumerate() {
            let next = elements[k].then(g);
            if !index.contains_key(&next) {
                if elements.len() >= cap {
                    return None;
                }
                index.insert(next.clone(), elements.len());
                elements.push(next);
                parents.push((k, gi));
            }
        }
        k += 1;
    }
    let mut words: Vec<Vec<usize>> = Vec::with_capacity(elements.len());
    for (i, &(p, g)) in parents.iter().enumerate() {
        let word = if i == 0 {
            Vec::new()
        } else {
            let mut w = words[p].clone();
            w.push(g);
            w
        };
        words.push(word);
    }
    Some(Enumerated { elements, words })
}
