//! Empirical checks of the inequalities relating contracting segments,
//! projections, alignment and fellow travelling.
//!
//! Every check draws instances from a seeded generator whose segments pass
//! the finite-scale contraction test at the stated `D`, evaluates the
//! asserted inequality, and reports the largest observed constants together
//! with any violating instance. Checks whose constant has no explicit value
//! report observations without a bound.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::{walk, GeodesicAutomaton, PathTable};
use crate::contraction::{
    alignment_constant, empirical_contraction_constant, is_D_contracting_segment, ContractionParams, DEFAULT_GRID,
};
use crate::error::{Error, Result};
use crate::group::{Element, Raag};
use crate::metric::{
    canonical_geodesic, enumerate_geodesics, hausdorff_distance, point_set_distance, project_indices,
    GeodesicCounter, PathKind, PathSegment,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    /// Subsegment of `[x, y]` tracking `π_γ([x, y])`, with bounds `2D`, `4D`, `10D`.
    ContractingNbd,
    /// `d_γ(x, y) <= d(x, y) + 4D`.
    ProjectionLipschitz,
    /// Geodesics between points near `γ` stay near `γ` and contract.
    Nearby,
    /// Aligned contracting segments are fellow travelled by `[x, y]`.
    Concat,
    /// Fellow-travelled subsegments of `[x, y]` give an aligned tuple.
    ConcatConverse,
    /// Alignment of `(x', γ, y')` passes to `(x, γ, y)` further out on a geodesic.
    Hereditary,
    /// Bigons whose sides both contract are `10D`-thin.
    Bigon,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::ContractingNbd,
        LemmaId::ProjectionLipschitz,
        LemmaId::Nearby,
        LemmaId::Concat,
        LemmaId::ConcatConverse,
        LemmaId::Hereditary,
        LemmaId::Bigon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::ContractingNbd => "contracting-nbd",
            LemmaId::ProjectionLipschitz => "projection-lipschitz",
            LemmaId::Nearby => "nearby",
            LemmaId::Concat => "concat",
            LemmaId::ConcatConverse => "concat-converse",
            LemmaId::Hereditary => "hereditary",
            LemmaId::Bigon => "bigon",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<LemmaId> {
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown lemma {s:?}")))
    }
}

/// Parameters of the instance generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceGen {
    #[serde(rename = "D")]
    pub d: usize,
    /// Radius of the contraction test.
    #[serde(rename = "R")]
    pub r: usize,
    /// Inclusive range of segment lengths.
    pub segment_len: (usize, usize),
    /// Test points are drawn from `B(point_radius)` around points of a segment.
    pub point_radius: usize,
    /// Instances drawn per accepted segment, where the check allows reuse.
    pub points_per_segment: usize,
    /// Geodesics examined per pair of endpoints.
    pub cap: usize,
    /// Upper bound on generator attempts per requested instance.
    pub attempts_per_trial: usize,
}

impl InstanceGen {
    pub fn new(d: usize) -> InstanceGen {
        InstanceGen {
            d,
            r: d + 2,
            segment_len: (4, 8),
            point_radius: 3,
            points_per_segment: 25,
            cap: 10,
            attempts_per_trial: 20,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.r <= self.d {
            return Err(Error::usage("need 0 < D < R"));
        }
        if self.segment_len.0 == 0 || self.segment_len.0 > self.segment_len.1 {
            return Err(Error::usage("segment length range must be nonempty and positive"));
        }
        if self.cap == 0 || self.points_per_segment == 0 || self.attempts_per_trial == 0 {
            return Err(Error::usage("caps and counts must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub name: &'static str,
    /// Largest value over all instances.
    pub max_observed: Option<i64>,
    /// Largest value the inequality allows, when it has an explicit constant.
    pub bound: Option<i64>,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub observation: &'static str,
    pub value: i64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub generator: InstanceGen,
    pub seed: u64,
    pub trials: usize,
    /// Instances that met the hypotheses and were evaluated.
    pub instances: usize,
    pub attempts: usize,
    pub observations: Vec<Observation>,
    /// At most `MAX_VIOLATIONS` witnesses, in generation order.
    pub violations: Vec<Violation>,
}

impl LemmaReport {
    pub fn violation_count(&self) -> usize {
        self.observations.iter().map(|o| o.violations).sum()
    }

    pub fn observation(&self, name: &str) -> Option<&Observation> {
        self.observations.iter().find(|o| o.name == name)
    }
}

const MAX_VIOLATIONS: usize = 20;

struct Tally {
    observations: Vec<Observation>,
    violations: Vec<Violation>,
}

impl Tally {
    fn new(spec: &[(&'static str, Option<i64>)]) -> Tally {
        Tally {
            observations: spec
                .iter()
                .map(|&(name, bound)| Observation { name, max_observed: None, bound, violations: 0 })
                .collect(),
            violations: Vec::new(),
        }
    }

    fn record(&mut self, k: usize, instance: usize, value: i64, detail: impl FnOnce() -> String) {
        let o = &mut self.observations[k];
        o.max_observed = Some(o.max_observed.map_or(value, |m| m.max(value)));
        if o.bound.is_some_and(|b| value > b) {
            o.violations += 1;
            if self.violations.len() < MAX_VIOLATIONS {
                self.violations.push(Violation { instance, observation: o.name, value, detail: detail() });
            }
        }
    }
}

struct Sampler<'a> {
    g: &'a Raag,
    aut: GeodesicAutomaton,
    table: PathTable,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    /// Uniform element of `S(n)`.
    fn sphere(&mut self, n: usize) -> Element {
        walk(self.g, &self.aut, &self.table, n, &mut self.rng)
    }

    /// Element of `B(n)` with uniformly chosen length.
    fn near(&mut self, n: usize) -> Element {
        let len = self.rng.gen_range(0..=n);
        self.sphere(len)
    }

    fn len_in(&mut self, (lo, hi): (usize, usize)) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    fn index(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }
}

fn d_gamma(g: &Raag, gamma: &PathSegment, xs: &[&Element]) -> usize {
    let mut idx = Vec::new();
    for x in xs {
        idx.extend(project_indices(g, x, gamma).0);
    }
    index_diameter(g, gamma, &idx)
}

fn index_diameter(g: &Raag, gamma: &PathSegment, idx: &[usize]) -> usize {
    let mut best = 0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a..] {
            best = best.max(gamma.point_distance(g, i, j));
        }
    }
    best
}

fn set_hausdorff(g: &Raag, a: &[Element], b: &[Element]) -> usize {
    let one = |a: &[Element], b: &[Element]| a.iter().map(|x| point_set_distance(g, x, b)).max().unwrap_or(0);
    one(a, b).max(one(b, a))
}

fn passes(g: &Raag, gamma: &PathSegment, gen: &InstanceGen) -> Result<bool> {
    let p = ContractionParams::new(gen.d, gen.r, vec![gen.d])?;
    Ok(is_D_contracting_segment(g, gamma, &p)?.passed)
}

/// Smallest `E` such that `path` has subsegments, in order, each
/// `E`-fellow travelling the corresponding `κ_i` (strict inequalities).
pub fn fellow_travel_constant(g: &Raag, path: &PathSegment, kappas: &[PathSegment]) -> usize {
    let n = path.len();
    let mut reach = vec![0usize; n];
    for kappa in kappas {
        let m: Vec<Vec<usize>> =
            path.points().iter().map(|p| kappa.points().iter().map(|q| g.dist(p, q)).collect()).collect();
        let row_min: Vec<usize> = m.iter().map(|r| *r.iter().min().unwrap()).collect();
        let last = kappa.len() - 1;
        let mut next = vec![usize::MAX; n];
        for a in 0..n {
            let mut col_min = m[a].clone();
            let mut row_max = row_min[a];
            for b in a..n {
                if b > a {
                    row_max = row_max.max(row_min[b]);
                    for (c, v) in col_min.iter_mut().zip(&m[b]) {
                        *c = (*c).min(*v);
                    }
                }
                let haus = row_max.max(*col_min.iter().max().unwrap());
                let cost = 1 + m[a][0].max(m[b][last]).max(haus);
                next[b] = next[b].min(cost.max(reach[a]));
            }
        }
        for b in 1..n {
            next[b] = next[b].min(next[b - 1]);
        }
        reach = next;
    }
    reach[n - 1]
}

#[derive(Clone, Debug)]
pub struct BigonReport {
    /// Lexicographically first and last geodesics from `x` to `y`.
    pub first: PathSegment,
    pub last: PathSegment,
    pub width: usize,
    /// A point of one side at distance `width` from the other side.
    pub witness: Element,
}

/// Hausdorff distance between the two extreme geodesics from `x` to `y`.
pub fn bigon_check(g: &Raag, x: &Element, y: &Element) -> Result<BigonReport> {
    g.check_element(x)?;
    g.check_element(y)?;
    let u = g.mul(&g.invert(x), y);
    let mut counter = GeodesicCounter::new(g);
    let count = counter.count(u.letters());
    let last_word = counter.unrank(u.letters(), count - BigUint::one());
    let first = canonical_geodesic(g, x, y)?;
    let last = PathSegment::from_word(g, x, &last_word, PathKind::Geodesic);
    let width = hausdorff_distance(g, &first, &last)?;
    let witness = first
        .points()
        .iter()
        .chain(last.points())
        .find(|p| {
            point_set_distance(g, p, first.points()).max(point_set_distance(g, p, last.points())) == width
        })
        .cloned()
        .expect("the Hausdorff distance is attained");
    Ok(BigonReport { first, last, width, witness })
}

/// Run one check on `trials` generated instances.
pub fn lemma_check(g: &Raag, lemma: LemmaId, gen: &InstanceGen, trials: usize, seed: u64) -> Result<LemmaReport> {
    gen.validate()?;
    if trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    let aut = GeodesicAutomaton::build(g);
    let max_len = 2 * gen.segment_len.1 + 3 * gen.point_radius + 2;
    let table = aut.path_table(max_len);
    let mut s = Sampler { g, aut, table, rng: ChaCha8Rng::seed_from_u64(seed) };
    let budget = trials * gen.attempts_per_trial;
    let d = gen.d as i64;
    let (tally, instances, attempts) = match lemma {
        LemmaId::ProjectionLipschitz => {
            let mut t = Tally::new(&[("slack", Some(4 * d))]);
            let (n, a) = run_on_segments(g, gen, &mut s, trials, budget, |g, gamma, x, y, k| {
                let v = d_gamma(g, gamma, &[x, y]) as i64 - g.dist(x, y) as i64;
                t.record(0, k, v, || describe(g, gamma, &[x, y]));
                Ok(true)
            })?;
            (t, n, a)
        }
        LemmaId::ContractingNbd => {
            let mut t = Tally::new(&[
                ("subsegment_exists", Some(0)),
                ("endpoint_diameter", Some(2 * d - 1)),
                ("projection_hausdorff", Some(4 * d)),
                ("segment_hausdorff", Some(10 * d)),
            ]);
            let (n, a) = run_on_segments(g, gen, &mut s, trials, budget, |g, gamma, x, y, k| {
                if d_gamma(g, gamma, &[x, y]) < gen.d {
                    return Ok(false);
                }
                contracting_nbd(g, gamma, x, y, gen, k, &mut t)?;
                Ok(true)
            })?;
            (t, n, a)
        }
        LemmaId::Nearby => {
            let mut t = Tally::new(&[("neighborhood", None), ("contraction", None), ("no_grid_value", Some(0))]);
            let near = gen.d.min(gen.point_radius);
            let mut gen_near = gen.clone();
            gen_near.point_radius = near;
            let (n, a) = run_on_segments(g, &gen_near, &mut s, trials, budget, |g, gamma, x, y, k| {
                if point_set_distance(g, x, gamma.points()) > gen.d || point_set_distance(g, y, gamma.points()) > gen.d
                {
                    return Ok(false);
                }
                nearby(g, gamma, x, y, gen, k, &mut t)?;
                Ok(true)
            })?;
            (t, n, a)
        }
        LemmaId::Concat => {
            let mut t = Tally::new(&[("fellow_travel", None), ("alignment", Some(d - 1))]);
            let (n, a) = concat(g, gen, &mut s, trials, budget, &mut t)?;
            (t, n, a)
        }
        LemmaId::ConcatConverse => {
            let mut t = Tally::new(&[("alignment", None)]);
            let (n, a) = concat_converse(g, gen, &mut s, trials, budget, &mut t)?;
            (t, n, a)
        }
        LemmaId::Hereditary => {
            let mut t = Tally::new(&[("alignment", None)]);
            let (n, a) = hereditary(g, gen, &mut s, trials, budget, &mut t)?;
            (t, n, a)
        }
        LemmaId::Bigon => {
            let mut t = Tally::new(&[("width", Some(10 * d))]);
            let mut n = 0;
            let mut a = 0;
            while n < trials && a < budget {
                a += 1;
                let len = s.len_in(gen.segment_len);
                let x = s.sphere(len);
                let b = bigon_check(g, &g.identity(), &x)?;
                if !passes(g, &b.first, gen)? || !passes(g, &b.last, gen)? {
                    continue;
                }
                t.record(0, n, b.width as i64, || format!("x = {}", g.format(&x)));
                n += 1;
            }
            (t, n, a)
        }
    };
    Ok(LemmaReport {
        lemma,
        generator: gen.clone(),
        seed,
        trials,
        instances,
        attempts,
        observations: tally.observations,
        violations: tally.violations,
    })
}

fn describe(g: &Raag, gamma: &PathSegment, pts: &[&Element]) -> String {
    let mut s = format!("gamma = [{}, {}]", g.format(gamma.first()), g.format(gamma.last()));
    for (i, p) in pts.iter().enumerate() {
        s.push_str(&format!(", p{i} = {}", g.format(p)));
    }
    s
}

/// Draw contracting segments from the identity and, for each, up to
/// `points_per_segment` pairs near it. `f` returns whether the pair met the
/// hypotheses. Returns (instances, attempts).
fn run_on_segments(
    g: &Raag,
    gen: &InstanceGen,
    s: &mut Sampler<'_>,
    trials: usize,
    budget: usize,
    mut f: impl FnMut(&Raag, &PathSegment, &Element, &Element, usize) -> Result<bool>,
) -> Result<(usize, usize)> {
    let mut n = 0;
    let mut attempts = 0;
    while n < trials && attempts < budget {
        attempts += 1;
        let len = s.len_in(gen.segment_len);
        let w = s.sphere(len);
        let gamma = canonical_geodesic(g, &g.identity(), &w)?;
        if !passes(g, &gamma, gen)? {
            continue;
        }
        for _ in 0..gen.points_per_segment {
            if n == trials || attempts >= budget {
                break;
            }
            attempts += 1;
            let i = s.index(gamma.len());
            let j = s.index(gamma.len());
            let x = g.mul(&gamma.points()[i], &s.near(gen.point_radius));
            let y = g.mul(&gamma.points()[j], &s.near(gen.point_radius));
            if f(g, &gamma, &x, &y, n)? {
                n += 1;
            }
        }
    }
    Ok((n, attempts))
}

fn contracting_nbd(
    g: &Raag,
    gamma: &PathSegment,
    x: &Element,
    y: &Element,
    gen: &InstanceGen,
    k: usize,
    t: &mut Tally,
) -> Result<()> {
    let (px, _) = project_indices(g, x, gamma);
    let (py, _) = project_indices(g, y, gamma);
    let proj_pts = |idx: &[usize]| -> Vec<Element> { idx.iter().map(|&i| gamma.points()[i].clone()).collect() };
    for sigma in enumerate_geodesics(g, x, y, gen.cap)?.paths {
        let near: Vec<usize> = (0..sigma.len())
            .filter(|&i| point_set_distance(g, &sigma.points()[i], gamma.points()) <= gen.d)
            .collect();
        let detail = || describe(g, gamma, &[x, y]);
        let (Some(&i0), Some(&i1)) = (near.first(), near.last()) else {
            t.record(0, k, 1, detail);
            continue;
        };
        t.record(0, k, 0, detail);
        let sub = sigma.subpath(i0, i1);
        let mut with_x = proj_pts(&px);
        with_x.push(sigma.points()[i0].clone());
        let mut with_y = proj_pts(&py);
        with_y.push(sigma.points()[i1].clone());
        let ends = crate::metric::set_diameter(g, &with_x)?.max(crate::metric::set_diameter(g, &with_y)?);
        t.record(1, k, ends as i64, detail);
        let mut proj_sigma = Vec::new();
        for p in sigma.points() {
            proj_sigma.extend(project_indices(g, p, gamma).0);
        }
        proj_sigma.sort_unstable();
        proj_sigma.dedup();
        let h2 = set_hausdorff(g, &proj_pts(&proj_sigma), sub.points());
        t.record(2, k, h2 as i64, detail);
        let mut h3 = 0;
        for &a in &px {
            for &b in &py {
                let seg = gamma.subpath(a.min(b), a.max(b));
                h3 = h3.max(set_hausdorff(g, seg.points(), sub.points()));
            }
        }
        t.record(3, k, h3 as i64, detail);
    }
    Ok(())
}

fn nearby(
    g: &Raag,
    gamma: &PathSegment,
    x: &Element,
    y: &Element,
    gen: &InstanceGen,
    k: usize,
    t: &mut Tally,
) -> Result<()> {
    let grid: Vec<usize> = DEFAULT_GRID.iter().copied().filter(|&v| v < gen.r).collect();
    for sigma in enumerate_geodesics(g, x, y, gen.cap)?.paths {
        let dist = sigma.points().iter().map(|p| point_set_distance(g, p, gamma.points())).max().unwrap();
        t.record(0, k, dist as i64, || describe(g, gamma, &[x, y]));
        let rep = empirical_contraction_constant(g, &sigma, gen.r, &grid, gen.cap)?;
        match rep.d_star {
            Some(e) => t.record(1, k, e as i64, || describe(g, gamma, &[x, y])),
            None => t.record(2, k, 1, || describe(g, gamma, &[x, y])),
        }
    }
    Ok(())
}

fn point_path(x: &Element) -> PathSegment {
    PathSegment::point(x.clone())
}

/// `x = e`, then segments `κ_1`, `κ_2` separated by short gaps, then `y`.
fn concat(
    g: &Raag,
    gen: &InstanceGen,
    s: &mut Sampler<'_>,
    trials: usize,
    budget: usize,
    t: &mut Tally,
) -> Result<(usize, usize)> {
    let (mut n, mut attempts) = (0, 0);
    while n < trials && attempts < budget {
        attempts += 1;
        let mut cur = g.identity();
        let mut kappas = Vec::new();
        let mut ok = true;
        for _ in 0..2 {
            cur = g.mul(&cur, &s.near(gen.point_radius));
            let len = s.len_in(gen.segment_len);
            let w = s.sphere(len);
            let end = g.mul(&cur, &w);
            let kappa = canonical_geodesic(g, &cur, &end)?;
            if !passes(g, &kappa, gen)? {
                ok = false;
                break;
            }
            kappas.push(kappa);
            cur = end;
        }
        if !ok {
            continue;
        }
        let y = g.mul(&cur, &s.near(gen.point_radius));
        let x = g.identity();
        let mut tuple = vec![point_path(&x)];
        tuple.extend(kappas.iter().cloned());
        tuple.push(point_path(&y));
        let align = alignment_constant(g, &tuple)?;
        if align >= gen.d {
            continue;
        }
        t.record(1, n, align as i64, String::new);
        for sigma in enumerate_geodesics(g, &x, &y, gen.cap)?.paths {
            let e = fellow_travel_constant(g, &sigma, &kappas);
            t.record(0, n, e as i64, || format!("y = {}", g.format(&y)));
        }
        n += 1;
    }
    Ok((n, attempts))
}

/// Subsegments of a geodesic `[e, y]`, each replaced by a nearby geodesic.
fn concat_converse(
    g: &Raag,
    gen: &InstanceGen,
    s: &mut Sampler<'_>,
    trials: usize,
    budget: usize,
    t: &mut Tally,
) -> Result<(usize, usize)> {
    let (mut n, mut attempts) = (0, 0);
    while n < trials && attempts < budget {
        attempts += 1;
        let len = s.len_in((gen.segment_len.0 * 2, gen.segment_len.1 * 2));
        let y = s.sphere(len);
        let sigma = canonical_geodesic(g, &g.identity(), &y)?;
        let mut cuts: Vec<usize> = (0..4).map(|_| s.index(sigma.len())).collect();
        cuts.sort_unstable();
        let mut kappas = Vec::new();
        let mut ok = true;
        for (a, b) in [(cuts[0], cuts[1]), (cuts[2], cuts[3])] {
            let xa = g.mul(&sigma.points()[a], &s.near(gen.point_radius));
            let yb = g.mul(&sigma.points()[b], &s.near(gen.point_radius));
            let kappa = canonical_geodesic(g, &xa, &yb)?;
            if !crate::metric::fellow_travel(g, &sigma.subpath(a, b), &kappa, gen.d)? {
                ok = false;
                break;
            }
            kappas.push(kappa);
        }
        if !ok {
            continue;
        }
        let mut tuple = vec![point_path(&g.identity())];
        tuple.extend(kappas);
        tuple.push(point_path(&y));
        let c = alignment_constant(g, &tuple)?;
        t.record(0, n, c as i64, String::new);
        n += 1;
    }
    Ok((n, attempts))
}

/// Points `x, x', y', y` in order on a geodesic `κ` and a contracting `γ`
/// near the middle stretch with `(x', γ, y')` aligned.
fn hereditary(
    g: &Raag,
    gen: &InstanceGen,
    s: &mut Sampler<'_>,
    trials: usize,
    budget: usize,
    t: &mut Tally,
) -> Result<(usize, usize)> {
    let (mut n, mut attempts) = (0, 0);
    while n < trials && attempts < budget {
        attempts += 1;
        let len = s.len_in((gen.segment_len.0 + 2, gen.segment_len.1 + 2 * gen.point_radius));
        let w = s.sphere(len);
        let kappa = canonical_geodesic(g, &g.identity(), &w)?;
        let mut cuts: Vec<usize> = (0..4).map(|_| s.index(kappa.len())).collect();
        cuts.sort_unstable();
        let p = |i: usize| kappa.points()[cuts[i]].clone();
        let (x, x1, y1, y) = (p(0), p(1), p(2), p(3));
        let a = g.mul(&x1, &s.near(gen.point_radius));
        let b = g.mul(&y1, &s.near(gen.point_radius));
        if a == b {
            continue;
        }
        let gamma = canonical_geodesic(g, &a, &b)?;
        if !passes(g, &gamma, gen)? {
            continue;
        }
        let inner = alignment_constant(g, &[point_path(&x1), gamma.clone(), point_path(&y1)])?;
        if inner >= gen.d {
            continue;
        }
        let outer = alignment_constant(g, &[point_path(&x), gamma.clone(), point_path(&y)])?;
        t.record(0, n, outer as i64, || describe(g, &gamma, &[&x, &y]));
        n += 1;
    }
    Ok((n, attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Letter;

    fn el(g: &Raag, s: &str) -> Element {
        g.element(s).unwrap()
    }

    #[test]
    fn lemma_names_round_trip() {
        for l in LemmaId::ALL {
            assert_eq!(l.name().parse::<LemmaId>().unwrap(), l);
        }
        assert!("lemma-2.5".parse::<LemmaId>().is_err());
    }

    #[test]
    fn flat_bigon_has_linear_width() {
        let g = Raag::free_abelian(2);
        let b = bigon_check(&g, &g.identity(), &el(&g, "a^6 b^6")).unwrap();
        let (a, b_) = (Letter::pos(0), Letter::pos(1));
        assert_eq!(b.first.labels(&g), [[a; 6], [b_; 6]].concat());
        assert_eq!(b.last.labels(&g), [[b_; 6], [a; 6]].concat());
        assert_eq!(b.width, 6);
        let tree = Raag::free(2);
        assert_eq!(bigon_check(&tree, &tree.identity(), &el(&tree, "a^3 b^-2 a")).unwrap().width, 0);
    }

    #[test]
    fn fellow_travel_constant_examples() {
        let g = Raag::free_abelian(2);
        let e = g.identity();
        let sigma = canonical_geodesic(&g, &e, &el(&g, "a^6")).unwrap();
        let k = canonical_geodesic(&g, &el(&g, "a"), &el(&g, "a^3")).unwrap();
        assert_eq!(fellow_travel_constant(&g, &sigma, &[k.clone()]), 1);
        let shifted = canonical_geodesic(&g, &el(&g, "a b^2"), &el(&g, "a^3 b^2")).unwrap();
        assert_eq!(fellow_travel_constant(&g, &sigma, &[shifted.clone()]), 3);
        assert!(crate::metric::fellow_travel(&g, &sigma.subpath(1, 3), &shifted, 3).unwrap());
        assert!(!crate::metric::fellow_travel(&g, &sigma.subpath(1, 3), &shifted, 2).unwrap());
        // order is enforced
        let late = canonical_geodesic(&g, &el(&g, "a^4"), &el(&g, "a^5")).unwrap();
        assert_eq!(fellow_travel_constant(&g, &sigma, &[late.clone(), k.clone()]), 3);
        assert_eq!(fellow_travel_constant(&g, &sigma, &[k, late]), 1);
    }

    #[test]
    fn lipschitz_has_no_slack_in_a_tree() {
        let g = Raag::free(2);
        let gen = InstanceGen::new(1);
        let rep = lemma_check(&g, LemmaId::ProjectionLipschitz, &gen, 100, 3).unwrap();
        assert_eq!(rep.instances, 100);
        assert!(rep.observation("slack").unwrap().max_observed.unwrap() <= 0);
        assert_eq!(rep.violation_count(), 0);
    }

    #[test]
    fn contracting_nbd_in_a_tree() {
        let g = Raag::free(2);
        let rep = lemma_check(&g, LemmaId::ContractingNbd, &InstanceGen::new(1), 40, 5).unwrap();
        assert!(rep.instances > 0);
        assert_eq!(rep.violation_count(), 0);
        // x' may sit at distance D from the segment
        assert_eq!(rep.observation("segment_hausdorff").unwrap().max_observed, Some(1));
    }

    #[test]
    fn mixed_group_checks_run_clean() {
        let g = Raag::z2_free_z();
        let mut gen = InstanceGen::new(2);
        gen.segment_len = (3, 6);
        gen.point_radius = 2;
        for lemma in LemmaId::ALL {
            if lemma == LemmaId::Nearby {
                continue;
            }
            let rep = lemma_check(&g, lemma, &gen, 15, 11).unwrap();
            assert_eq!(rep.violation_count(), 0, "{lemma}: {:?}", rep.violations);
            assert!(rep.instances <= 15);
            assert_eq!(rep, lemma_check(&g, lemma, &gen, 15, 11).unwrap());
        }
    }

    #[test]
    fn nearby_reports_constants() {
        let g = Raag::free(2);
        let mut gen = InstanceGen::new(1);
        gen.cap = 2;
        let rep = lemma_check(&g, LemmaId::Nearby, &gen, 10, 1).unwrap();
        assert_eq!(rep.instances, 10);
        assert!(rep.observation("neighborhood").unwrap().max_observed.unwrap() <= 1);
        assert_eq!(rep.observation("contraction").unwrap().max_observed, Some(1));
    }

    #[test]
    fn rejects_bad_generators() {
        let g = Raag::free(2);
        let mut gen = InstanceGen::new(2);
        gen.r = 2;
        assert!(lemma_check(&g, LemmaId::Bigon, &gen, 5, 0).is_err());
        assert!(lemma_check(&g, LemmaId::Bigon, &InstanceGen::new(1), 0, 0).is_err());
    }
}
