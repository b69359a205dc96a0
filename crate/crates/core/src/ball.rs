//! Balls `B(n)` enumerated sphere by sphere through the geodesic automaton,
//! and their on-disk cache format.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::automaton::GeodesicAutomaton;
use crate::error::{Error, Result};
use crate::group::{Element, Letter, Raag};

const CACHE_MAGIC: &str = "raagkit-ball v1";

/// Every element of length at most `radius`, grouped by length. Each sphere
/// is listed in lexicographic order of normal forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallIndex {
    spheres: Vec<Vec<Element>>,
}

impl BallIndex {
    pub fn radius(&self) -> usize {
        self.spheres.len() - 1
    }

    pub fn sphere(&self, r: usize) -> &[Element] {
        &self.spheres[r]
    }

    pub fn spheres(&self) -> &[Vec<Element>] {
        &self.spheres
    }

    pub fn len(&self) -> usize {
        self.spheres.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All elements in ShortLex order.
    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.spheres.iter().flatten()
    }

    /// The ball of radius `r <= radius`.
    pub fn truncated(&self, r: usize) -> BallIndex {
        BallIndex {
            spheres: self.spheres[..=r.min(self.radius())].to_vec(),
        }
    }

    /// Grow the ball to radius `n`. With `max_elements`, stops with a
    /// resource error naming the last radius that was completed; `self` then
    /// holds that smaller ball.
    pub fn extend_to(
        &mut self,
        g: &Raag,
        aut: &GeodesicAutomaton,
        n: usize,
        max_elements: Option<usize>,
    ) -> Result<()> {
        let last = self.radius();
        let mut states: Vec<u32> = self.spheres[last]
            .iter()
            .map(|x| aut.run(x.letters()).expect("ball element is a normal form"))
            .collect();
        let mut total = self.len();
        for r in last + 1..=n {
            let prev = &self.spheres[r - 1];
            let grown: Vec<(u32, Element)> = prev
                .par_iter()
                .zip(states.par_iter())
                .flat_map_iter(|(x, &s)| {
                    g.letters().filter_map(move |l| {
                        aut.step(s, l).map(|t| {
                            let mut w = x.letters().to_vec();
                            w.push(l);
                            (t, g.element_unchecked(w))
                        })
                    })
                })
                .collect();
            if let Some(max) = max_elements {
                if total + grown.len() > max {
                    return Err(Error::Resource {
                        message: format!(
                            "ball of radius {r} would exceed the limit of {max} elements"
                        ),
                        completed_radius: Some(r - 1),
                    });
                }
            }
            total += grown.len();
            let (st, els): (Vec<u32>, Vec<Element>) = grown.into_iter().unzip();
            states = st;
            self.spheres.push(els);
        }
        Ok(())
    }

    /// Serialize in the cache format:
    ///
    /// ```text
    /// raagkit-ball v1
    /// digest <group digest>
    /// radius <n>
    /// sphere <r> <count>
    /// <one normal form per line, letter codes in hex; `-` for the identity>
    /// ```
    pub fn to_cache_string(&self, g: &Raag) -> String {
        let mut out = format!("{CACHE_MAGIC}\ndigest {}\nradius {}\n", g.digest(), self.radius());
        for (r, sphere) in self.spheres.iter().enumerate() {
            writeln!(out, "sphere {r} {}", sphere.len()).unwrap();
            for x in sphere {
                if x.is_identity() {
                    out.push_str("-\n");
                } else {
                    for l in x.letters() {
                        write!(out, "{:02x}", l.code()).unwrap();
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn write_cache(&self, g: &Raag, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_cache_string(g))?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    /// Parse and fully validate a cache: digest, sphere sizes against the
    /// automaton counts, every record a normal form of the right length, and
    /// strictly increasing order within each sphere.
    pub fn from_cache_str(g: &Raag, aut: &GeodesicAutomaton, text: &str) -> Result<BallIndex> {
        let bad = |m: String| Error::Cache(m);
        let mut lines = text.lines();
        if lines.next() != Some(CACHE_MAGIC) {
            return Err(bad("missing header".into()));
        }
        let digest = lines
            .next()
            .and_then(|l| l.strip_prefix("digest "))
            .ok_or_else(|| bad("missing digest".into()))?;
        if digest != g.digest() {
            return Err(bad("group digest mismatch".into()));
        }
        let radius: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("radius "))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("missing radius".into()))?;
        let counts = aut.sphere_counts(radius);
        let mut spheres = Vec::with_capacity(radius + 1);
        for (r, expected) in counts.iter().enumerate() {
            let header = lines.next().ok_or_else(|| bad(format!("sphere {r} missing")))?;
            let count: usize = header
                .strip_prefix(&format!("sphere {r} "))
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("bad sphere header {header:?}")))?;
            if num_bigint::BigUint::from(count) != *expected {
                return Err(bad(format!("sphere {r} has {count} records, expected {expected}")));
            }
            let mut sphere: Vec<Element> = Vec::with_capacity(count);
            for _ in 0..count {
                let rec = lines.next().ok_or_else(|| bad(format!("sphere {r} truncated")))?;
                let w = decode_record(g, rec).ok_or_else(|| bad(format!("bad record {rec:?}")))?;
                if w.len() != r || !aut.accepts(&w) {
                    return Err(bad(format!("record {rec:?} is not a normal form of length {r}")));
                }
                if sphere.last().is_some_and(|p| p.letters() >= &w[..]) {
                    return Err(bad(format!("sphere {r} is not strictly sorted")));
                }
                sphere.push(g.element_unchecked(w));
            }
            spheres.push(sphere);
        }
        if lines.next().is_some() {
            return Err(bad("trailing data".into()));
        }
        Ok(BallIndex { spheres })
    }

    pub fn read_cache(g: &Raag, aut: &GeodesicAutomaton, path: &Path) -> Result<BallIndex> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Cache(format!("cannot read {}: {e}", path.display())))?;
        BallIndex::from_cache_str(g, aut, &text)
    }
}

fn decode_record(g: &Raag, rec: &str) -> Option<Vec<Letter>> {
    if rec == "-" {
        return Some(Vec::new());
    }
    let bytes = hex::decode(rec).ok()?;
    if bytes.is_empty() || bytes.iter().any(|&b| b as usize >= g.letter_count()) {
        return None;
    }
    Some(bytes.into_iter().map(Letter::from_code).collect())
}

/// Enumerate `B(n)`.
pub fn enumerate_ball(
    g: &Raag,
    aut: &GeodesicAutomaton,
    n: usize,
    max_elements: Option<usize>,
) -> Result<BallIndex> {
    let mut ball = BallIndex {
        spheres: vec![vec![g.identity()]],
    };
    ball.extend_to(g, aut, n, max_elements)?;
    Ok(ball)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bfs(g: &Raag, n: usize) -> Vec<HashSet<Element>> {
        let mut seen: HashSet<Element> = HashSet::new();
        seen.insert(g.identity());
        let mut spheres = vec![HashSet::from([g.identity()])];
        for _ in 0..n {
            let mut next = HashSet::new();
            for x in spheres.last().unwrap() {
                for l in g.letters() {
                    let y = g.mul_letter(x, l);
                    if seen.insert(y.clone()) {
                        next.insert(y);
                    }
                }
            }
            spheres.push(next);
        }
        spheres
    }

    #[test]
    fn matches_bfs_oracle() {
        for g in [Raag::free(2), Raag::free_abelian(2), Raag::free_abelian(3), Raag::z2_free_z()] {
            let aut = GeodesicAutomaton::build(&g);
            let ball = enumerate_ball(&g, &aut, 6, None).unwrap();
            let oracle = bfs(&g, 6);
            for r in 0..=6 {
                let got: HashSet<Element> = ball.sphere(r).iter().cloned().collect();
                assert_eq!(got.len(), ball.sphere(r).len());
                assert_eq!(got, oracle[r]);
                assert!(ball.sphere(r).windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn small_examples() {
        let g = Raag::free(2);
        let aut = GeodesicAutomaton::build(&g);
        let b0 = enumerate_ball(&g, &aut, 0, None).unwrap();
        assert_eq!(b0.len(), 1);
        let b = enumerate_ball(&g, &aut, 3, None).unwrap();
        let sizes: Vec<usize> = b.spheres().iter().map(Vec::len).collect();
        assert_eq!(sizes, [1, 4, 12, 36]);
        let z2 = Raag::free_abelian(2);
        let b = enumerate_ball(&z2, &GeodesicAutomaton::build(&z2), 3, None).unwrap();
        let sizes: Vec<usize> = b.spheres().iter().map(Vec::len).collect();
        assert_eq!(sizes, [1, 4, 8, 12]);
    }

    #[test]
    fn resource_guard_reports_completed_radius() {
        let g = Raag::free(2);
        let aut = GeodesicAutomaton::build(&g);
        match enumerate_ball(&g, &aut, 5, Some(100)) {
            Err(Error::Resource { completed_radius, .. }) => assert_eq!(completed_radius, Some(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resume_equals_fresh() {
        let g = Raag::z2_free_z();
        let aut = GeodesicAutomaton::build(&g);
        let mut small = enumerate_ball(&g, &aut, 3, None).unwrap();
        small.extend_to(&g, &aut, 5, None).unwrap();
        assert_eq!(small, enumerate_ball(&g, &aut, 5, None).unwrap());
    }

    #[test]
    fn cache_round_trip_and_rejection() {
        let g = Raag::z2_free_z();
        let aut = GeodesicAutomaton::build(&g);
        let ball = enumerate_ball(&g, &aut, 4, None).unwrap();
        let text = ball.to_cache_string(&g);
        assert_eq!(BallIndex::from_cache_str(&g, &aut, &text).unwrap(), ball);

        let other = Raag::free(3);
        assert!(BallIndex::from_cache_str(&other, &GeodesicAutomaton::build(&other), &text).is_err());
        // flip one record
        let corrupted = text.replacen("\n00\n", "\n01\n", 1);
        assert_ne!(corrupted, text);
        assert!(matches!(BallIndex::from_cache_str(&g, &aut, &corrupted), Err(Error::Cache(_))));
        let truncated = &text[..text.len() - 4];
        assert!(BallIndex::from_cache_str(&g, &aut, truncated).is_err());
    }
}
