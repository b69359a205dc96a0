//! Paths, geodesics and nearest-point projections in the Cayley graph.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, Letter, Raag};

/// Largest point set whose diameter is computed pairwise.
pub const DIAMETER_GUARD: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Geodesic,
    Concatenated,
}

/// Consecutive points at distance one. For `Geodesic` paths the index
/// difference of two points is also their distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSegment {
    points: Vec<Element>,
    kind: PathKind,
}

impl PathSegment {
    pub fn new(g: &Raag, points: Vec<Element>, kind: PathKind) -> Result<PathSegment> {
        if points.is_empty() {
            return Err(Error::usage("a path needs at least one point"));
        }
        for p in &points {
            g.check_element(p)?;
        }
        if points.windows(2).any(|w| g.dist(&w[0], &w[1]) != 1) {
            return Err(Error::input("consecutive path points must be adjacent"));
        }
        if kind == PathKind::Geodesic
            && g.dist(&points[0], points.last().unwrap()) != points.len() - 1
        {
            return Err(Error::input("path is not geodesic"));
        }
        Ok(PathSegment { points, kind })
    }

    pub(crate) fn from_parts(points: Vec<Element>, kind: PathKind) -> PathSegment {
        debug_assert!(!points.is_empty());
        PathSegment { points, kind }
    }

    pub fn point(x: Element) -> PathSegment {
        PathSegment {
            points: vec![x],
            kind: PathKind::Geodesic,
        }
    }

    /// Path starting at `start` and reading `w` letter by letter.
    pub fn from_word(g: &Raag, start: &Element, w: &[Letter], kind: PathKind) -> PathSegment {
        let mut points = Vec::with_capacity(w.len() + 1);
        points.push(start.clone());
        let mut cur = start.letters().to_vec();
        for &l in w {
            g.push_letter(&mut cur, l);
            points.push(g.element_unchecked(cur.clone()));
        }
        PathSegment { points, kind }
    }

    pub fn points(&self) -> &[Element] {
        &self.points
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &Element {
        &self.points[0]
    }

    pub fn last(&self) -> &Element {
        self.points.last().unwrap()
    }

    /// Sub-path of points `i..=j`.
    pub fn subpath(&self, i: usize, j: usize) -> PathSegment {
        PathSegment {
            points: self.points[i..=j].to_vec(),
            kind: self.kind,
        }
    }

    pub fn reversed(&self) -> PathSegment {
        PathSegment {
            points: self.points.iter().rev().cloned().collect(),
            kind: self.kind,
        }
    }

    /// Left translate `t * path`.
    pub fn translate(&self, g: &Raag, t: &Element) -> PathSegment {
        PathSegment {
            points: self.points.iter().map(|p| g.mul(t, p)).collect(),
            kind: self.kind,
        }
    }

    /// Letters read along the path.
    pub fn labels(&self, g: &Raag) -> Vec<Letter> {
        self.points
            .windows(2)
            .map(|w| {
                let step = g.mul(&g.invert(&w[0]), &w[1]);
                step.letters()[0]
            })
            .collect()
    }

    /// Distance between points `i` and `j`.
    pub fn point_distance(&self, g: &Raag, i: usize, j: usize) -> usize {
        match self.kind {
            PathKind::Geodesic => i.abs_diff(j),
            PathKind::Concatenated => g.dist(&self.points[i], &self.points[j]),
        }
    }
}

/// Join paths end to start; a shared junction point is kept once.
pub fn concatenate(g: &Raag, parts: &[PathSegment]) -> Result<PathSegment> {
    let mut points: Vec<Element> = Vec::new();
    for p in parts {
        let skip = usize::from(points.last() == Some(p.first()));
        if let Some(last) = points.last() {
            if skip == 0 && g.dist(last, p.first()) != 1 {
                return Err(Error::input("paths do not join"));
            }
        }
        points.extend(p.points[skip..].iter().cloned());
    }
    if points.is_empty() {
        return Err(Error::usage("nothing to concatenate"));
    }
    Ok(PathSegment {
        points,
        kind: PathKind::Concatenated,
    })
}

/// `d(x, y)`.
pub fn distance(g: &Raag, x: &Element, y: &Element) -> Result<usize> {
    g.distance(x, y)
}

/// The geodesic from `x` reading the normal form of `x^-1 y`.
pub fn canonical_geodesic(g: &Raag, x: &Element, y: &Element) -> Result<PathSegment> {
    g.check_element(x)?;
    g.check_element(y)?;
    let u = g.mul(&g.invert(x), y);
    Ok(PathSegment::from_word(g, x, u.letters(), PathKind::Geodesic))
}

/// Letters `s` with `|s^-1 u| = |u| - 1`: the letters of the normal form
/// that commute with everything before them (ascending, no duplicates).
pub fn first_letters(g: &Raag, u: &[Letter]) -> Vec<(Letter, usize)> {
    let mut out: Vec<(Letter, usize)> = Vec::new();
    let mut blocked = 0u64;
    for (i, &l) in u.iter().enumerate() {
        let v = l.vertex();
        if blocked >> v & 1 == 0 {
            out.push((l, i));
        }
        // a later letter on vertex w passes l only if w commutes with v
        let full = if g.rank() == 64 { u64::MAX } else { (1u64 << g.rank()) - 1 };
        blocked |= full & !g.commute_mask(v);
        if blocked == full {
            break;
        }
    }
    out.sort();
    out
}

/// `s^-1 u` for a first letter at position `i` of the normal form `u`.
fn strip(g: &Raag, u: &[Letter], i: usize) -> Vec<Letter> {
    let mut w = Vec::with_capacity(u.len() - 1);
    for (k, &l) in u.iter().enumerate() {
        if k != i {
            g.push_letter(&mut w, l);
        }
    }
    w
}

/// Counts geodesic spellings of elements by memoized first-letter recursion.
pub struct GeodesicCounter<'g> {
    g: &'g Raag,
    memo: HashMap<Vec<Letter>, BigUint>,
}

impl<'g> GeodesicCounter<'g> {
    pub fn new(g: &'g Raag) -> Self {
        GeodesicCounter { g, memo: HashMap::new() }
    }

    /// Number of geodesic words spelling the element with normal form `u`.
    pub fn count(&mut self, u: &[Letter]) -> BigUint {
        if u.len() <= 1 {
            return BigUint::one();
        }
        if let Some(c) = self.memo.get(u) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        for (_, i) in first_letters(self.g, u) {
            let rest = strip(self.g, u, i);
            total += self.count(&rest);
        }
        self.memo.insert(u.to_vec(), total.clone());
        total
    }

    /// The `rank`-th geodesic word (0-based, lexicographic) spelling `u`.
    pub fn unrank(&mut self, u: &[Letter], mut rank: BigUint) -> Vec<Letter> {
        let mut word = Vec::with_capacity(u.len());
        let mut cur = u.to_vec();
        while !cur.is_empty() {
            let mut chosen = None;
            for (l, i) in first_letters(self.g, &cur) {
                let rest = strip(self.g, &cur, i);
                let c = self.count(&rest);
                if rank < c {
                    chosen = Some((l, rest));
                    break;
                }
                rank -= c;
            }
            let (l, rest) = chosen.expect("rank below geodesic count");
            word.push(l);
            cur = rest;
        }
        word
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicEnumeration {
    /// Geodesics in lexicographic order of their letter sequences.
    pub paths: Vec<PathSegment>,
    /// Exact number of geodesics from `x` to `y`.
    pub count: BigUint,
    /// `count` exceeds the cap, so `paths` is a prefix of the full list.
    pub truncated: bool,
}

/// Geodesics from `x` to `y` in lexicographic order, at most `cap` of them.
pub fn enumerate_geodesics(
    g: &Raag,
    x: &Element,
    y: &Element,
    cap: usize,
) -> Result<GeodesicEnumeration> {
    g.check_element(x)?;
    g.check_element(y)?;
    let u = g.mul(&g.invert(x), y);
    let mut counter = GeodesicCounter::new(g);
    let count = counter.count(u.letters());
    let mut words = Vec::new();
    let mut prefix = Vec::new();
    lex_geodesics(g, u.letters(), &mut prefix, cap, &mut words);
    let truncated = count > BigUint::from(words.len());
    let paths = words
        .iter()
        .map(|w| PathSegment::from_word(g, x, w, PathKind::Geodesic))
        .collect();
    Ok(GeodesicEnumeration { paths, count, truncated })
}

fn lex_geodesics(
    g: &Raag,
    u: &[Letter],
    prefix: &mut Vec<Letter>,
    cap: usize,
    out: &mut Vec<Vec<Letter>>,
) {
    if out.len() >= cap {
        return;
    }
    if u.is_empty() {
        out.push(prefix.clone());
        return;
    }
    for (l, i) in first_letters(g, u) {
        let rest = strip(g, u, i);
        prefix.push(l);
        lex_geodesics(g, &rest, prefix, cap, out);
        prefix.pop();
        if out.len() >= cap {
            return;
        }
    }
}

/// `samples` geodesics spread evenly through the lexicographic list
/// (ranks `floor(k * count / samples)`), without duplicates.
pub fn spread_geodesics(
    g: &Raag,
    x: &Element,
    y: &Element,
    samples: usize,
) -> Result<Vec<PathSegment>> {
    g.check_element(x)?;
    g.check_element(y)?;
    let u = g.mul(&g.invert(x), y);
    let mut counter = GeodesicCounter::new(g);
    let count = counter.count(u.letters());
    let mut ranks: Vec<BigUint> = (0..samples)
        .map(|k| BigUint::from(k) * &count / BigUint::from(samples.max(1)))
        .collect();
    ranks.dedup();
    Ok(ranks
        .into_iter()
        .map(|r| {
            let w = counter.unrank(u.letters(), r);
            PathSegment::from_word(g, x, &w, PathKind::Geodesic)
        })
        .collect())
}

/// Nearest-point projection of `source` onto a path.
#[derive(Clone, Debug)]
pub struct ProjectionResult<'a> {
    pub source: Element,
    pub target: &'a PathSegment,
    /// Indices into `target` attaining the minimal distance, ascending.
    pub projections: Vec<usize>,
    pub distance: usize,
}

pub fn project<'a>(g: &Raag, x: &Element, path: &'a PathSegment) -> Result<ProjectionResult<'a>> {
    g.check_element(x)?;
    if path.is_empty() {
        return Err(Error::usage("cannot project onto an empty path"));
    }
    let (projections, distance) = project_indices(g, x, path);
    Ok(ProjectionResult {
        source: x.clone(),
        target: path,
        projections,
        distance,
    })
}

pub(crate) fn project_indices(g: &Raag, x: &Element, path: &PathSegment) -> (Vec<usize>, usize) {
    let mut best = usize::MAX;
    let mut idx = Vec::new();
    for (i, p) in path.points.iter().enumerate() {
        let d = g.dist(x, p);
        if d < best {
            best = d;
            idx.clear();
        }
        if d == best {
            idx.push(i);
        }
    }
    (idx, best)
}

/// Diameter of a set of indices into `path`.
pub(crate) fn index_set_diameter(g: &Raag, path: &PathSegment, idx: &[usize]) -> Result<usize> {
    if idx.is_empty() {
        return Ok(0);
    }
    match path.kind {
        PathKind::Geodesic => {
            let lo = idx.iter().min().unwrap();
            let hi = idx.iter().max().unwrap();
            Ok(hi - lo)
        }
        PathKind::Concatenated => {
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() > DIAMETER_GUARD {
                return Err(Error::Resource {
                    message: format!("point set of size {} exceeds the diameter guard", sorted.len()),
                    completed_radius: None,
                });
            }
            let mut best = 0;
            for (a, &i) in sorted.iter().enumerate() {
                for &j in &sorted[a + 1..] {
                    best = best.max(g.dist(&path.points[i], &path.points[j]));
                }
            }
            Ok(best)
        }
    }
}

/// `diam(π_γ(Y) ∪ π_γ(Y'))`.
pub fn projection_diameter(
    g: &Raag,
    path: &PathSegment,
    ys: &[Element],
    ys2: &[Element],
) -> Result<usize> {
    if ys.is_empty() && ys2.is_empty() {
        return Err(Error::usage("projection diameter of an empty set"));
    }
    if path.is_empty() {
        return Err(Error::usage("cannot project onto an empty path"));
    }
    let mut idx = Vec::new();
    for y in ys.iter().chain(ys2) {
        g.check_element(y)?;
        idx.extend(project_indices(g, y, path).0);
    }
    index_set_diameter(g, path, &idx)
}

/// Diameter of a finite set of elements.
pub fn set_diameter(g: &Raag, xs: &[Element]) -> Result<usize> {
    if xs.len() > DIAMETER_GUARD {
        return Err(Error::Resource {
            message: format!("point set of size {} exceeds the diameter guard", xs.len()),
            completed_radius: None,
        });
    }
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        for y in &xs[i + 1..] {
            best = best.max(g.dist(x, y));
        }
    }
    Ok(best)
}

/// `d(x, A) = min_{a ∈ A} d(x, a)`.
pub fn point_set_distance(g: &Raag, x: &Element, a: &[Element]) -> usize {
    a.iter().map(|p| g.dist(x, p)).min().unwrap_or(usize::MAX)
}

/// `min d(p, q)` over points of the two paths.
pub fn path_distance(g: &Raag, a: &PathSegment, b: &PathSegment) -> usize {
    a.points.iter().map(|p| point_set_distance(g, p, &b.points)).min().unwrap_or(usize::MAX)
}

/// Discrete Hausdorff distance between the point sets of two paths.
pub fn hausdorff_distance(g: &Raag, a: &PathSegment, b: &PathSegment) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::usage("Hausdorff distance of an empty path"));
    }
    let one_way = |p: &PathSegment, q: &PathSegment| {
        p.points.iter().map(|x| point_set_distance(g, x, &q.points)).max().unwrap()
    };
    Ok(one_way(a, b).max(one_way(b, a)))
}

/// Start points within `D`, end points within `D`, Hausdorff distance `< D`.
pub fn fellow_travel(g: &Raag, a: &PathSegment, b: &PathSegment, d: usize) -> Result<bool> {
    Ok(g.dist(a.first(), b.first()) < d
        && g.dist(a.last(), b.last()) < d
        && hausdorff_distance(g, a, b)? < d)
}

/// Exact geodesic count as `u64` when it fits.
pub fn geodesic_count_u64(g: &Raag, x: &Element, y: &Element) -> Option<u64> {
    let u = g.mul(&g.invert(x), y);
    GeodesicCounter::new(g).count(u.letters()).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::GeodesicAutomaton;
    use crate::ball::enumerate_ball;
    use crate::group::Word;

    fn el(g: &Raag, s: &str) -> Element {
        g.element(s).unwrap()
    }

    /// All words of length |u| that spell u, by brute force.
    fn brute_geodesics(g: &Raag, u: &Element) -> Vec<Vec<Letter>> {
        let mut words = vec![vec![]];
        for _ in 0..u.len() {
            words = words
                .into_iter()
                .flat_map(|w: Vec<Letter>| {
                    g.letters().map(move |l| {
                        let mut v = w.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
        }
        words.retain(|w| g.normalize(&Word::new(w.clone())).unwrap() == *u);
        words
    }

    #[test]
    fn distance_examples() {
        let z2 = Raag::free_abelian(2);
        let x = el(&z2, "a b^2");
        assert_eq!(distance(&z2, &x, &x).unwrap(), 0);
        assert_eq!(distance(&z2, &z2.identity(), &el(&z2, "a^3 b^5")).unwrap(), 8);
        let g = Raag::z2_free_z();
        assert_eq!(distance(&g, &el(&g, "c"), &el(&g, "a^2")).unwrap(), 3);
    }

    #[test]
    fn canonical_geodesic_examples() {
        let z2 = Raag::free_abelian(2);
        let e = z2.identity();
        let p = canonical_geodesic(&z2, &e, &e).unwrap();
        assert_eq!(p.len(), 1);
        let p = canonical_geodesic(&z2, &e, &el(&z2, "a^2 b")).unwrap();
        let pts: Vec<String> = p.points().iter().map(|x| z2.format(x)).collect();
        assert_eq!(pts, ["1", "a", "a^2", "a^2 b"]);
        let f2 = Raag::free(2);
        let p = canonical_geodesic(&f2, &f2.identity(), &el(&f2, "a b^-1")).unwrap();
        let pts: Vec<String> = p.points().iter().map(|x| f2.format(x)).collect();
        assert_eq!(pts, ["1", "a", "a b^-1"]);
    }

    #[test]
    fn first_letters_match_length_predicate() {
        for g in [Raag::z2_free_z(), Raag::free_abelian(3), Raag::free(2)] {
            let aut = GeodesicAutomaton::build(&g);
            let ball = enumerate_ball(&g, &aut, 4, None).unwrap();
            for u in ball.iter() {
                let fast: Vec<Letter> = first_letters(&g, u.letters()).into_iter().map(|p| p.0).collect();
                let slow: Vec<Letter> = g
                    .letters()
                    .filter(|&s| g.mul(&g.generator(s.inverse()), u).len() + 1 == u.len())
                    .collect();
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn geodesic_enumeration_matches_brute_force() {
        for g in [Raag::z2_free_z(), Raag::free_abelian(2), Raag::free_abelian(3)] {
            let aut = GeodesicAutomaton::build(&g);
            let ball = enumerate_ball(&g, &aut, 4, None).unwrap();
            for u in ball.iter() {
                let en = enumerate_geodesics(&g, &g.identity(), u, 1000).unwrap();
                let brute = brute_geodesics(&g, u);
                let got: Vec<Vec<Letter>> = en.paths.iter().map(|p| p.labels(&g)).collect();
                assert_eq!(got, brute);
                assert_eq!(en.count, BigUint::from(brute.len()));
                assert!(!en.truncated);
            }
        }
    }

    #[test]
    fn geodesic_enumeration_examples() {
        let f2 = Raag::free(2);
        let x = el(&f2, "a b^-1 a^2");
        assert_eq!(enumerate_geodesics(&f2, &f2.identity(), &x, 10).unwrap().paths.len(), 1);
        let z2 = Raag::free_abelian(2);
        let en = enumerate_geodesics(&z2, &z2.identity(), &el(&z2, "a^2 b^2"), 200).unwrap();
        assert_eq!(en.paths.len(), 6);
        let g = Raag::z2_free_z();
        let en = enumerate_geodesics(&g, &g.identity(), &el(&g, "c a c"), 200).unwrap();
        assert_eq!(en.paths.len(), 1);
        // truncation
        let en = enumerate_geodesics(&z2, &z2.identity(), &el(&z2, "a^6 b^6"), 10).unwrap();
        assert_eq!(en.paths.len(), 10);
        assert!(en.truncated);
        assert_eq!(en.count, BigUint::from(924u32));
        // translated endpoints
        let s = el(&z2, "b^-3");
        let en = enumerate_geodesics(&z2, &s, &z2.mul(&s, &el(&z2, "a b")), 10).unwrap();
        assert_eq!(en.paths.len(), 2);
        assert!(en.paths.iter().all(|p| p.first() == &s));
    }

    #[test]
    fn spread_geodesics_are_distinct_and_geodesic() {
        let z2 = Raag::free_abelian(2);
        let e = z2.identity();
        let y = el(&z2, "a^6 b^6");
        let spread = spread_geodesics(&z2, &e, &y, 5).unwrap();
        assert_eq!(spread.len(), 5);
        let all = enumerate_geodesics(&z2, &e, &y, 1000).unwrap();
        assert_eq!(spread[0], all.paths[0]);
        for p in &spread {
            assert!(PathSegment::new(&z2, p.points().to_vec(), PathKind::Geodesic).is_ok());
            assert_eq!(p.last(), &y);
        }
        for k in 0..5 {
            assert_eq!(spread[k], all.paths[k * 924 / 5]);
        }
    }

    #[test]
    fn projection_examples() {
        let z2 = Raag::free_abelian(2);
        let e = z2.identity();
        let gamma = canonical_geodesic(&z2, &e, &el(&z2, "a^10")).unwrap();
        let p = project(&z2, &el(&z2, "a^3 b^5"), &gamma).unwrap();
        assert_eq!((p.projections.clone(), p.distance), (vec![3], 5));
        let p = project(&z2, &el(&z2, "a^4"), &gamma).unwrap();
        assert_eq!((p.projections, p.distance), (vec![4], 0));
        let f2 = Raag::free(2);
        let gamma = canonical_geodesic(&f2, &f2.identity(), &el(&f2, "a^10")).unwrap();
        let p = project(&f2, &el(&f2, "b^5"), &gamma).unwrap();
        assert_eq!((p.projections, p.distance), (vec![0], 5));
    }

    #[test]
    fn projection_diameter_examples() {
        let z2 = Raag::free_abelian(2);
        let e = z2.identity();
        let gamma = canonical_geodesic(&z2, &e, &el(&z2, "a^6")).unwrap();
        let pt = el(&z2, "a^2");
        assert_eq!(projection_diameter(&z2, &gamma, &[pt.clone()], &[pt]).unwrap(), 0);
        let d = projection_diameter(&z2, &gamma, &[el(&z2, "b^6")], &[el(&z2, "a^6 b^6")]).unwrap();
        assert_eq!(d, 6);
        let f2 = Raag::free(2);
        let gamma = canonical_geodesic(&f2, &f2.identity(), &el(&f2, "a^6")).unwrap();
        let d = projection_diameter(&f2, &gamma, &[el(&f2, "b^6")], &[el(&f2, "b^3")]).unwrap();
        assert_eq!(d, 0);
        assert!(projection_diameter(&f2, &gamma, &[], &[]).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let z2 = Raag::free_abelian(2);
        let e = z2.identity();
        let y = el(&z2, "a^2 b^2");
        let g1 = canonical_geodesic(&z2, &e, &y).unwrap();
        assert_eq!(hausdorff_distance(&z2, &g1, &g1).unwrap(), 0);
        assert!(fellow_travel(&z2, &g1, &g1, 1).unwrap());
        let g2 = PathSegment::from_word(&z2, &e, &z2.parse_word("b b a a").unwrap(), PathKind::Geodesic);
        assert_eq!(hausdorff_distance(&z2, &g1, &g2).unwrap(), 2);
        let far = canonical_geodesic(&z2, &el(&z2, "b^3"), &el(&z2, "a^2 b^5")).unwrap();
        assert!(!fellow_travel(&z2, &g1, &far, 3).unwrap());
    }

    #[test]
    fn triangle_inequality_on_b3() {
        let g = Raag::z2_free_z();
        let ball = enumerate_ball(&g, &GeodesicAutomaton::build(&g), 3, None).unwrap();
        let pts: Vec<&Element> = ball.iter().collect();
        for x in &pts {
            for y in &pts {
                let dxy = g.dist(x, y);
                for z in pts.iter().step_by(3) {
                    assert!(dxy <= g.dist(x, z) + g.dist(z, y));
                }
            }
        }
    }

    #[test]
    fn trees_have_unique_geodesics() {
        let f3 = Raag::free(3);
        let ball = enumerate_ball(&f3, &GeodesicAutomaton::build(&f3), 4, None).unwrap();
        for x in ball.iter() {
            let en = enumerate_geodesics(&f3, &f3.identity(), x, 5).unwrap();
            assert_eq!(en.paths.len(), 1);
            assert_eq!(en.count, BigUint::one());
        }
    }

    #[test]
    fn path_validation() {
        let z2 = Raag::free_abelian(2);
        let pts = vec![z2.identity(), el(&z2, "a^2")];
        assert!(PathSegment::new(&z2, pts, PathKind::Concatenated).is_err());
        let pts = vec![z2.identity(), el(&z2, "a"), z2.identity()];
        assert!(PathSegment::new(&z2, pts.clone(), PathKind::Geodesic).is_err());
        assert!(PathSegment::new(&z2, pts, PathKind::Concatenated).is_ok());
        assert!(PathSegment::new(&z2, vec![], PathKind::Geodesic).is_err());
    }

    proptest::proptest! {
        #[test]
        fn projection_is_left_equivariant(t in proptest::collection::vec(0u8..6, 0..=3),
                                          x in proptest::collection::vec(0u8..6, 0..=6),
                                          y in proptest::collection::vec(0u8..6, 0..=6)) {
            let g = Raag::z2_free_z();
            let el = |v: Vec<u8>| g.normalize(&v.into_iter().map(Letter::from_code).collect()).unwrap();
            let (t, x, y) = (el(t), el(x), el(y));
            let gamma = canonical_geodesic(&g, &g.identity(), &y).unwrap();
            let moved = gamma.translate(&g, &t);
            let a = project(&g, &x, &gamma).unwrap();
            let b = project(&g, &g.mul(&t, &x), &moved).unwrap();
            proptest::prop_assert_eq!(a.projections, b.projections);
            proptest::prop_assert_eq!(a.distance, b.distance);
            proptest::prop_assert_eq!(
                canonical_geodesic(&g, &x, &y).unwrap().len(),
                g.dist(&x, &y) + 1
            );
        }
    }
}
