//! Finite automaton accepting exactly the canonical normal forms.
//!
//! A state is the set of letters that may not come next. Reading `y^d`
//! moves to
//!
//! ```text
//! F' = { y^-d }
//!    ∪ { x^e ∈ F : x commutes with y }
//!    ∪ { x^e : x commutes with y, x^e < y^d }
//! ```
//!
//! The first part blocks free cancellation, the second keeps blocks that
//! `y^d` does not interrupt, the third blocks letters that could be shuffled
//! to the left of `y^d` and would make the word lexicographically smaller.

use std::collections::HashMap;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, Letter, Raag};

const DEAD: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct GeodesicAutomaton {
    letter_count: usize,
    /// Forbidden-letter set of each state, as a bitmask over letter codes.
    forbidden: Vec<u128>,
    /// `next[state * letter_count + code]`, or `DEAD` for a forbidden letter.
    next: Vec<u32>,
}

impl GeodesicAutomaton {
    pub const START: u32 = 0;

    pub fn build(g: &Raag) -> GeodesicAutomaton {
        let lc = g.letter_count();
        // letters adjacent (commuting, distinct vertex) to each vertex
        let adj_letters: Vec<u128> = (0..g.rank())
            .map(|v| {
                g.letters()
                    .filter(|l| l.vertex() != v && g.commutes(v, l.vertex()))
                    .fold(0u128, |m, l| m | 1 << l.code())
            })
            .collect();
        let mut index: HashMap<u128, u32> = HashMap::new();
        let mut forbidden = vec![0u128];
        index.insert(0, 0);
        let mut next = Vec::new();
        let mut i = 0;
        while i < forbidden.len() {
            let f = forbidden[i];
            for l in g.letters() {
                if f >> l.code() & 1 == 1 {
                    next.push(DEAD);
                    continue;
                }
                let below = (1u128 << l.code()) - 1;
                let adj = adj_letters[l.vertex()];
                let f2 = 1u128 << l.inverse().code() | (f & adj) | (adj & below);
                let id = *index.entry(f2).or_insert_with(|| {
                    forbidden.push(f2);
                    (forbidden.len() - 1) as u32
                });
                next.push(id);
            }
            i += 1;
        }
        GeodesicAutomaton {
            letter_count: lc,
            forbidden,
            next,
        }
    }

    pub fn state_count(&self) -> usize {
        self.forbidden.len()
    }

    pub fn letter_count(&self) -> usize {
        self.letter_count
    }

    /// Forbidden letters of `state`, as a bitmask over letter codes.
    pub fn forbidden(&self, state: u32) -> u128 {
        self.forbidden[state as usize]
    }

    #[inline]
    pub fn step(&self, state: u32, l: Letter) -> Option<u32> {
        let s = self.next[state as usize * self.letter_count + l.code() as usize];
        (s != DEAD).then_some(s)
    }

    /// State reached after reading `w`, or `None` if `w` is rejected.
    pub fn run(&self, w: &[Letter]) -> Option<u32> {
        w.iter().try_fold(Self::START, |s, &l| {
            if (l.code() as usize) < self.letter_count {
                self.step(s, l)
            } else {
                None
            }
        })
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        self.run(w).is_some()
    }

    /// Path counts up to length `n_max`.
    pub fn path_table(&self, n_max: usize) -> PathTable {
        let k = self.state_count();
        let mut rows = vec![vec![BigUint::one(); k]];
        for len in 1..=n_max {
            let prev = &rows[len - 1];
            let row = (0..k)
                .map(|s| {
                    let mut acc = BigUint::zero();
                    for &t in &self.next[s * self.letter_count..(s + 1) * self.letter_count] {
                        if t != DEAD {
                            acc += &prev[t as usize];
                        }
                    }
                    acc
                })
                .collect();
            rows.push(row);
        }
        PathTable { rows }
    }

    /// `#S(n)`, the number of elements of length exactly `n`.
    pub fn sphere_count(&self, n: usize) -> BigUint {
        self.path_table(n).sphere(n).clone()
    }

    /// `#S(0), ..., #S(n_max)`.
    pub fn sphere_counts(&self, n_max: usize) -> Vec<BigUint> {
        let t = self.path_table(n_max);
        (0..=n_max).map(|n| t.sphere(n).clone()).collect()
    }

    /// `#B(n)`.
    pub fn ball_count(&self, n: usize) -> BigUint {
        self.sphere_counts(n).into_iter().sum()
    }
}

/// `rows[k][s]` = number of accepted words of length `k` readable from `s`.
#[derive(Clone, Debug)]
pub struct PathTable {
    rows: Vec<Vec<BigUint>>,
}

impl PathTable {
    pub fn max_len(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn count(&self, len: usize, state: u32) -> &BigUint {
        &self.rows[len][state as usize]
    }

    pub fn sphere(&self, n: usize) -> &BigUint {
        &self.rows[n][GeodesicAutomaton::START as usize]
    }
}

/// Draw `count` elements of the sphere `S(n)`, each exactly uniformly.
///
/// Sample `i` uses its own ChaCha stream (`seed`, stream `i`), so the output
/// does not depend on how the work is scheduled.
pub fn sample_sphere_uniform(
    g: &Raag,
    aut: &GeodesicAutomaton,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Element>> {
    let table = aut.path_table(n);
    if table.sphere(n).is_zero() {
        return Err(Error::usage(format!("sphere of radius {n} is empty")));
    }
    Ok((0..count).map(|i| sample_one(g, aut, &table, n, seed, i as u64)).collect())
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub(crate) fn sample_one(
    g: &Raag,
    aut: &GeodesicAutomaton,
    table: &PathTable,
    n: usize,
    seed: u64,
    index: u64,
) -> Element {
    walk(g, aut, table, n, &mut stream(seed, index))
}

/// Uniform element of length `n`, reading letters with probability
/// proportional to the number of completions.
pub(crate) fn walk(g: &Raag, aut: &GeodesicAutomaton, table: &PathTable, n: usize, rng: &mut ChaCha8Rng) -> Element {
    let mut state = GeodesicAutomaton::START;
    let mut word = Vec::with_capacity(n);
    for remaining in (1..=n).rev() {
        let mut r = rng.gen_biguint_below(table.count(remaining, state));
        for l in g.letters() {
            let Some(t) = aut.step(state, l) else { continue };
            let c = table.count(remaining - 1, t);
            if r < *c {
                word.push(l);
                state = t;
                break;
            }
            r -= c;
        }
    }
    g.element_unchecked(word)
}

/// Draw `count` elements of the ball `B(n)`, each exactly uniformly: a
/// radius with probability `#S(r) / #B(n)`, then a uniform point of `S(r)`.
pub fn sample_ball_uniform(
    g: &Raag,
    aut: &GeodesicAutomaton,
    n: usize,
    count: usize,
    seed: u64,
) -> Vec<Element> {
    let table = aut.path_table(n);
    let total: BigUint = (0..=n).map(|r| table.sphere(r)).sum();
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let mut x = rng.gen_biguint_below(&total);
            let mut r = 0;
            while x >= *table.sphere(r) {
                x -= table.sphere(r);
                r += 1;
            }
            walk(g, aut, &table, r, &mut rng)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub n_max: usize,
    pub sphere_sizes: Vec<BigUint>,
    pub ball_sizes: Vec<BigUint>,
    /// `#S(n) / #S(n-1)` for `n >= 2` (index 0 corresponds to `n = 2`).
    pub sphere_ratios: Vec<f64>,
    /// `exp` of the slope of `log #B(n)` over `n_max/2 ..= n_max`.
    pub lambda_hat: f64,
    /// Complete defining graph: polynomial growth, `lambda_hat` tends to 1.
    pub polynomial: bool,
}

pub fn growth_rate(g: &Raag, aut: &GeodesicAutomaton, n_max: usize) -> Result<GrowthReport> {
    if n_max < 4 {
        return Err(Error::usage("growth rate estimation needs n_max >= 4"));
    }
    let spheres = aut.sphere_counts(n_max);
    let mut balls = Vec::with_capacity(spheres.len());
    let mut acc = BigUint::zero();
    for s in &spheres {
        acc += s;
        balls.push(acc.clone());
    }
    let sphere_ratios = (2..=n_max)
        .map(|n| big_ln(&spheres[n]) - big_ln(&spheres[n - 1]))
        .map(f64::exp)
        .collect();
    let lo = n_max / 2;
    let slope = (big_ln(&balls[n_max]) - big_ln(&balls[lo])) / (n_max - lo) as f64;
    Ok(GrowthReport {
        n_max,
        sphere_sizes: spheres,
        ball_sizes: balls,
        sphere_ratios,
        lambda_hat: slope.exp(),
        polynomial: g.is_abelian(),
    })
}

/// Natural log of an arbitrarily large integer.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
