//! Coarse excursions into cosets of special subgroups.
//!
//! For a vertex set `Λ`, the special subgroup `H = H_Λ` is generated by the
//! letters over `Λ`. Every element `w` factors uniquely as `h·w'` with
//! `h ∈ H` and `w'` of minimal length in its coset `Hw'`; `h` consists of
//! the `Λ`-letters of the normal form that commute with every earlier letter
//! not taken. Hence `d(x, zH) = |w| - |h|` for `w = z^-1 x`, read from the
//! left, and the shortest element of `zH` is `z` with its maximal `Λ`-tail
//! removed.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::automaton::{sample_sphere_uniform, GeodesicAutomaton};
use crate::ball::enumerate_ball;
use crate::contraction::axis;
use crate::error::{Error, Result};
use crate::group::{Element, Letter, Raag};
use crate::metric::{self, enumerate_geodesics, PathKind, PathSegment};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialSubgroup {
    /// Bit `v` set iff vertex `v` is in `Λ`.
    mask: u64,
}

impl SpecialSubgroup {
    pub fn new(g: &Raag, vertices: &[usize]) -> Result<SpecialSubgroup> {
        if vertices.is_empty() {
            return Err(Error::usage("a special subgroup needs a nonempty vertex set"));
        }
        let mut mask = 0;
        for &v in vertices {
            if v >= g.rank() {
                return Err(Error::input(format!("vertex {v} out of range")));
            }
            mask |= 1 << v;
        }
        Ok(SpecialSubgroup { mask })
    }

    pub fn from_names(g: &Raag, names: &[&str]) -> Result<SpecialSubgroup> {
        let mut vs = Vec::new();
        for n in names {
            let v = g
                .names()
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::input(format!("unknown vertex {n:?}")))?;
            vs.push(v);
        }
        SpecialSubgroup::new(g, &vs)
    }

    /// Special subgroups are geodesically connected: `R_H = 0`.
    pub fn connectedness_radius(&self) -> usize {
        0
    }

    pub fn vertices(&self) -> Vec<usize> {
        crate::group::bits(self.mask).collect()
    }

    #[inline]
    pub fn contains_letter(&self, l: Letter) -> bool {
        self.mask >> l.vertex() & 1 == 1
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.letters().iter().all(|&l| self.contains_letter(l))
    }

    /// Length of the maximal `H`-prefix of a normal form.
    fn head_len(&self, g: &Raag, w: &[Letter]) -> usize {
        let full = if g.rank() == 64 { u64::MAX } else { (1u64 << g.rank()) - 1 };
        let mut blocked = 0u64;
        let mut head = 0;
        for &l in w {
            let v = l.vertex();
            if self.contains_letter(l) && blocked >> v & 1 == 0 {
                head += 1;
            } else {
                blocked |= full & !g.commute_mask(v);
            }
        }
        head
    }

    /// Shortest element of the coset `zH`.
    pub fn coset_rep(&self, g: &Raag, z: &Element) -> Element {
        let rev: Vec<Letter> = z.letters().iter().rev().copied().collect();
        let full = if g.rank() == 64 { u64::MAX } else { (1u64 << g.rank()) - 1 };
        let mut blocked = 0u64;
        let mut keep = vec![true; rev.len()];
        for (k, &l) in rev.iter().enumerate() {
            let v = l.vertex();
            if self.contains_letter(l) && blocked >> v & 1 == 0 {
                keep[k] = false;
            } else {
                blocked |= full & !g.commute_mask(v);
            }
        }
        let mut w = Vec::with_capacity(z.len());
        for (k, &l) in rev.iter().enumerate().rev() {
            if keep[k] {
                g.push_letter(&mut w, l);
            }
        }
        g.element_unchecked(w)
    }
}

/// `min_{h ∈ H} d(x, z h)`.
pub fn coset_distance_exact(g: &Raag, x: &Element, z: &Element, h: &SpecialSubgroup) -> usize {
    let w = g.mul(&g.invert(z), x);
    w.len() - h.head_len(g, w.letters())
}

/// `d(x, zH)` if it is at most `k`, `None` otherwise.
pub fn coset_distance(
    g: &Raag,
    x: &Element,
    z: &Element,
    h: &SpecialSubgroup,
    k: usize,
) -> Result<Option<usize>> {
    g.check_element(x)?;
    g.check_element(z)?;
    let d = coset_distance_exact(g, x, z, h);
    Ok((d <= k).then_some(d))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathExcursion {
    pub value: usize,
    /// Shortest element of the coset attaining the value.
    #[serde(skip)]
    pub coset_rep: Element,
    /// Path indices `i <= j` within `K` of the coset at distance `value`.
    pub i: usize,
    pub j: usize,
}

/// `max_t diam(γ ∩ N_K(tH))`.
pub fn excursion_of_path(g: &Raag, path: &PathSegment, h: &SpecialSubgroup, k: usize) -> Result<PathExcursion> {
    if path.is_empty() {
        return Err(Error::usage("excursion of an empty path"));
    }
    let aut = GeodesicAutomaton::build(g);
    let ball = enumerate_ball(g, &aut, k, None)?;
    let mut reps: Vec<Element> = Vec::new();
    let mut seen = HashSet::new();
    for p in path.points() {
        for u in ball.iter() {
            let r = h.coset_rep(g, &g.mul(p, u));
            if seen.insert(r.clone()) {
                reps.push(r);
            }
        }
    }
    reps.sort();
    let mut best: Option<PathExcursion> = None;
    for rep in reps {
        let near: Vec<usize> = (0..path.len())
            .filter(|&j| coset_distance_exact(g, &path.points()[j], &rep, h) <= k)
            .collect();
        if near.is_empty() {
            continue;
        }
        let (mut i, mut j, mut diam) = (near[0], near[0], 0);
        for (a, &p) in near.iter().enumerate() {
            for &q in &near[a..] {
                let d = path.point_distance(g, p, q);
                if d > diam {
                    (i, j, diam) = (p, q, d);
                }
            }
        }
        if best.as_ref().is_none_or(|b| diam > b.value) {
            best = Some(PathExcursion { value: diam, coset_rep: rep, i, j });
        }
    }
    Ok(best.expect("every path point lies in its own coset"))
}

/// `K = 0` on a geodesic: two points lie in one coset exactly when the
/// letters between them all belong to `Λ`, so the excursion is the longest
/// run of `Λ`-letters. Ties go to the least coset representative.
fn geodesic_excursion_k0(g: &Raag, start: &Element, labels: &[Letter], h: &SpecialSubgroup) -> PathExcursion {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i <= labels.len() {
        let mut j = i;
        while j < labels.len() && h.contains_letter(labels[j]) {
            j += 1;
        }
        runs.push((i, j));
        i = j + 1;
    }
    let longest = runs.iter().map(|(a, b)| b - a).max().unwrap();
    let mut prefix = start.letters().to_vec();
    let mut best: Option<PathExcursion> = None;
    let mut pos = 0;
    for (a, b) in runs {
        while pos < a {
            g.push_letter(&mut prefix, labels[pos]);
            pos += 1;
        }
        if b - a != longest {
            continue;
        }
        let rep = h.coset_rep(g, &g.element_unchecked(prefix.clone()));
        if best.as_ref().is_none_or(|x| rep < x.coset_rep) {
            best = Some(PathExcursion { value: longest, coset_rep: rep, i: a, j: b });
        }
    }
    best.unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcursionReport {
    pub g: Element,
    pub k: usize,
    pub excursion: usize,
    /// Coset representative `z`, path indices `i <= j`, and the geodesic
    /// (as a letter sequence from the identity) on which they lie.
    pub witness: (Element, usize, usize, Vec<Letter>),
    pub geodesics_examined: usize,
    /// More geodesics exist than were examined; `excursion` is a lower bound.
    pub truncated: bool,
}

impl ExcursionReport {
    /// Recompute the witness from raw coset distances.
    pub fn verify(&self, g: &Raag, h: &SpecialSubgroup) -> bool {
        let (z, i, j, word) = &self.witness;
        let path = PathSegment::from_word(g, &g.identity(), word, PathKind::Geodesic);
        path.last() == &self.g
            && coset_distance_exact(g, &path.points()[*i], z, h) <= self.k
            && coset_distance_exact(g, &path.points()[*j], z, h) <= self.k
            && g.dist(&path.points()[*i], &path.points()[*j]) == self.excursion
    }
}

/// Maximum excursion over the first `cap` geodesics from the identity to
/// `x` in lexicographic order (the first is the canonical one).
pub fn excursion_of_element(
    g: &Raag,
    x: &Element,
    h: &SpecialSubgroup,
    k: usize,
    cap: usize,
) -> Result<ExcursionReport> {
    g.check_element(x)?;
    if cap == 0 {
        return Err(Error::usage("geodesic cap must be positive"));
    }
    let e = g.identity();
    let en = enumerate_geodesics(g, &e, x, cap)?;
    let mut best: Option<(PathExcursion, Vec<Letter>)> = None;
    for path in &en.paths {
        let labels = path.labels(g);
        let ex = if k == 0 {
            geodesic_excursion_k0(g, &e, &labels, h)
        } else {
            excursion_of_path(g, path, h, k)?
        };
        if best.as_ref().is_none_or(|b| ex.value > b.0.value) {
            best = Some((ex, labels));
        }
    }
    let (ex, labels) = best.expect("at least one geodesic");
    Ok(ExcursionReport {
        g: x.clone(),
        k,
        excursion: ex.value,
        witness: (ex.coset_rep, ex.i, ex.j, labels),
        geodesics_examined: en.paths.len(),
        truncated: en.truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub r: usize,
    pub m: usize,
    /// `max_t diam π_{axis(f, m)}(tH ∩ B(r))` over `t ∈ B(r)`.
    pub value: usize,
    pub coset_rep: Element,
}

/// Largest projection of a coset slice `tH ∩ B(r)` onto the axis of `f`.
pub fn strong_independence_probe(
    g: &Raag,
    f: &Element,
    h: &SpecialSubgroup,
    r: usize,
    m: usize,
) -> Result<ProbeReport> {
    let ax = axis(g, f, m)?;
    if ax.elliptic {
        return Err(Error::usage("probe requires a non-elliptic element"));
    }
    let aut = GeodesicAutomaton::build(g);
    let ball = enumerate_ball(g, &aut, r, None)?;
    let mut cosets: BTreeMap<Element, Vec<Element>> = BTreeMap::new();
    for t in ball.iter() {
        cosets.entry(h.coset_rep(g, t)).or_default().push(t.clone());
    }
    let mut best: Option<ProbeReport> = None;
    for (rep, slice) in cosets {
        let d = metric::projection_diameter(g, &ax.path, &slice, &[])?;
        if best.as_ref().is_none_or(|b| d > b.value) {
            best = Some(ProbeReport { r, m, value: d, coset_rep: rep });
        }
    }
    Ok(best.unwrap())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLawRow {
    pub n: usize,
    pub samples: usize,
    pub min: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: usize,
    /// Samples whose geodesic count exceeded the cap.
    pub truncated: usize,
    /// Fraction of samples with `E / ln n` inside `[c1, c2]`.
    pub covered_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLawSample {
    pub n: usize,
    pub sample_index: usize,
    #[serde(skip)]
    pub g: Element,
    pub k: usize,
    pub excursion: usize,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLawReport {
    pub rows: Vec<LogLawRow>,
    pub c1: f64,
    pub c2: f64,
    /// The band was fitted from the data at the largest `n`.
    pub fitted: bool,
    pub seed: u64,
    pub cap: usize,
    pub k: usize,
    pub samples: Vec<LogLawSample>,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[usize], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] as f64 + (sorted[hi] as f64 - sorted[lo] as f64) * (pos - lo as f64)
}

/// Excursions of `count` uniform samples of `S(n)`.
#[allow(clippy::too_many_arguments)]
pub fn excursion_samples(
    g: &Raag,
    aut: &GeodesicAutomaton,
    n: usize,
    count: usize,
    h: &SpecialSubgroup,
    k: usize,
    seed: u64,
    cap: usize,
) -> Result<Vec<LogLawSample>> {
    use rayon::prelude::*;
    let xs = sample_sphere_uniform(g, aut, n, count, seed)?;
    let reports: Vec<ExcursionReport> = xs
        .par_iter()
        .map(|x| excursion_of_element(g, x, h, k, cap))
        .collect::<Result<_>>()?;
    Ok(reports
        .into_iter()
        .enumerate()
        .map(|(i, rep)| LogLawSample {
            n,
            sample_index: i,
            g: rep.g,
            k,
            excursion: rep.excursion,
            truncated: rep.truncated,
        })
        .collect())
}

/// Per-`n` quartiles and the coverage of the band `[c1, c2]` for `E / ln n`.
/// Without a band, `c1` is half the least and `c2` twice the largest ratio
/// at the largest `n`.
pub fn summarize_loglaw(
    samples: Vec<LogLawSample>,
    band: Option<(f64, f64)>,
    seed: u64,
    cap: usize,
    k: usize,
) -> Result<LogLawReport> {
    let mut ns: Vec<usize> = samples.iter().map(|s| s.n).collect();
    ns.dedup();
    if ns.is_empty() {
        return Err(Error::usage("no samples to summarize"));
    }
    if ns.iter().any(|&n| n < 2) {
        return Err(Error::usage("log-law radii must be at least 2"));
    }
    let ratio = |s: &LogLawSample| s.excursion as f64 / (s.n as f64).ln();
    let n_top = *ns.iter().max().unwrap();
    let (c1, c2, fitted) = match band {
        Some((c1, c2)) => (c1, c2, false),
        None => {
            let top: Vec<f64> = samples.iter().filter(|s| s.n == n_top).map(ratio).collect();
            let lo = top.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo / 2.0, hi * 2.0, true)
        }
    };
    let mut rows = Vec::new();
    for &n in &ns {
        let here: Vec<&LogLawSample> = samples.iter().filter(|s| s.n == n).collect();
        let mut vals: Vec<usize> = here.iter().map(|s| s.excursion).collect();
        vals.sort_unstable();
        let covered = here.iter().filter(|s| (c1..=c2).contains(&ratio(s))).count();
        rows.push(LogLawRow {
            n,
            samples: vals.len(),
            min: vals[0],
            q1: quantile(&vals, 0.25),
            median: quantile(&vals, 0.5),
            q3: quantile(&vals, 0.75),
            max: *vals.last().unwrap(),
            truncated: here.iter().filter(|s| s.truncated).count(),
            covered_fraction: covered as f64 / vals.len() as f64,
        });
    }
    Ok(LogLawReport {
        rows,
        c1,
        c2,
        fitted,
        seed,
        cap,
        k,
        samples,
    })
}

/// Excursions of uniform samples of `S(n)` for each `n`, summarized.
#[allow(clippy::too_many_arguments)]
pub fn loglaw_experiment(
    g: &Raag,
    aut: &GeodesicAutomaton,
    ns: &[usize],
    count: usize,
    h: &SpecialSubgroup,
    k: usize,
    seed: u64,
    cap: usize,
    band: Option<(f64, f64)>,
) -> Result<LogLawReport> {
    if ns.is_empty() || count == 0 {
        return Err(Error::usage("need at least one radius and one sample"));
    }
    if ns.iter().any(|&n| n < 2) {
        return Err(Error::usage("log-law radii must be at least 2"));
    }
    let mut samples = Vec::new();
    for &n in ns {
        samples.extend(excursion_samples(g, aut, n, count, h, k, seed, cap)?);
    }
    summarize_loglaw(samples, band, seed, cap, k)
}
