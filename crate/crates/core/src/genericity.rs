//! Fractions of contracting elements in balls `B(n)`.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::automaton::{sample_ball_uniform, GeodesicAutomaton};
use crate::ball::{enumerate_ball, BallIndex};
use crate::contraction::{is_contracting_at_scale, ContractionParams};
use crate::error::{Error, Result};
use crate::group::{Element, Raag};

pub const DEFAULT_MAX_BALL: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mode {
    /// Classify every element of `B(n)`.
    Exhaustive,
    /// Classify `count` uniform samples of `B(n)`.
    Sampled { count: usize, seed: u64 },
    /// Exhaustive while `#B(n)` is within the ball limit, sampled above it.
    Auto { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenericityRow {
    pub n: usize,
    pub ball_size: BigUint,
    pub sampled: u64,
    pub contracting: u64,
    /// `contracting / sampled`, exact.
    pub fraction: Ratio<u64>,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub m: usize,
    pub cap: usize,
    pub seed: Option<u64>,
    pub exhaustive: bool,
}

impl GenericityRow {
    pub fn fraction_f64(&self) -> f64 {
        self.fraction.to_f64().unwrap_or(0.0)
    }
}

/// One row per `n`. The identity is counted in the denominator only.
pub fn genericity_experiment(
    g: &Raag,
    aut: &GeodesicAutomaton,
    ns: &[usize],
    p: &ContractionParams,
    m: usize,
    mode: Mode,
    max_ball: usize,
) -> Result<Vec<GenericityRow>> {
    genericity_experiment_with_ball(g, aut, ns, p, m, mode, max_ball, None)
}

/// As [`genericity_experiment`], reusing `ball` for exhaustive rows when it
/// is large enough.
#[allow(clippy::too_many_arguments)]
pub fn genericity_experiment_with_ball(
    g: &Raag,
    aut: &GeodesicAutomaton,
    ns: &[usize],
    p: &ContractionParams,
    m: usize,
    mode: Mode,
    max_ball: usize,
    ball: Option<&BallIndex>,
) -> Result<Vec<GenericityRow>> {
    p.validate()?;
    if ns.is_empty() {
        return Err(Error::usage("no radii given"));
    }
    let counts = aut.sphere_counts(*ns.iter().max().unwrap());
    let ball_size = |n: usize| -> BigUint { counts[..=n].iter().sum() };
    let exhaustive_ok = |n: usize| ball_size(n) <= BigUint::from(max_ball);
    let exhaustive_ns: Vec<usize> = ns
        .iter()
        .copied()
        .filter(|&n| match mode {
            Mode::Exhaustive => true,
            Mode::Sampled { .. } => false,
            Mode::Auto { .. } => exhaustive_ok(n),
        })
        .collect();
    if let Some(&n) = exhaustive_ns.iter().find(|&&n| !exhaustive_ok(n)) {
        return Err(Error::Resource {
            message: format!("#B({n}) = {} exceeds the exhaustive limit {max_ball}", ball_size(n)),
            completed_radius: None,
        });
    }
    // classify the largest exhaustive ball once; smaller balls are prefixes
    let mut per_sphere: Vec<u64> = Vec::new();
    if let Some(&top) = exhaustive_ns.iter().max() {
        let ball = match ball {
            Some(b) if b.radius() >= top => b.truncated(top),
            _ => enumerate_ball(g, aut, top, Some(max_ball))?,
        };
        for sphere in ball.spheres() {
            per_sphere.push(count_contracting(g, sphere, p, m)?);
        }
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let size = ball_size(n);
        let (sampled, contracting, seed, exhaustive) = if exhaustive_ns.contains(&n) {
            let c: u64 = per_sphere[..=n].iter().sum();
            (size.to_u64().expect("bounded by the ball limit"), c, None, true)
        } else {
            let (count, seed) = match mode {
                Mode::Sampled { count, seed } | Mode::Auto { count, seed } => (count, seed),
                Mode::Exhaustive => unreachable!(),
            };
            if count == 0 {
                return Err(Error::usage("sample count must be positive"));
            }
            let xs = sample_ball_uniform(g, aut, n, count, seed);
            (count as u64, count_contracting(g, &xs, p, m)?, Some(seed), false)
        };
        rows.push(GenericityRow {
            n,
            ball_size: size,
            sampled,
            contracting,
            fraction: Ratio::new(contracting, sampled),
            d: p.d,
            r: p.r,
            m,
            cap: p.geodesic_cap,
            seed,
            exhaustive,
        });
    }
    Ok(rows)
}

fn count_contracting(g: &Raag, xs: &[Element], p: &ContractionParams, m: usize) -> Result<u64> {
    let flags: Vec<bool> = xs
        .par_iter()
        .map(|x| is_contracting_at_scale(g, x, p, m))
        .collect::<Result<_>>()?;
    Ok(flags.into_iter().filter(|&b| b).count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_group_is_all_contracting() {
        let g = Raag::free(2);
        let aut = GeodesicAutomaton::build(&g);
        let p = ContractionParams::new(1, 3, vec![1, 2, 4]).unwrap();
        let rows = genericity_experiment(&g, &aut, &[2, 4], &p, 2, Mode::Exhaustive, DEFAULT_MAX_BALL).unwrap();
        for row in rows {
            assert_eq!(row.contracting + 1, row.sampled);
            assert_eq!(BigUint::from(row.sampled), row.ball_size);
        }
    }

    #[test]
    fn flat_group_has_no_contracting_elements() {
        let g = Raag::free_abelian(2);
        let aut = GeodesicAutomaton::build(&g);
        let p = ContractionParams::new(2, 5, vec![1, 2, 4]).unwrap();
        let rows = genericity_experiment(&g, &aut, &[1, 3], &p, 4, Mode::Exhaustive, DEFAULT_MAX_BALL).unwrap();
        assert!(rows.iter().all(|r| r.contracting == 0));
        let rows =
            genericity_experiment(&g, &aut, &[3], &p, 4, Mode::Sampled { count: 20, seed: 1 }, DEFAULT_MAX_BALL)
                .unwrap();
        assert_eq!(rows[0].fraction, Ratio::from_integer(0));
        assert_eq!(rows[0].sampled, 20);
    }

    #[test]
    fn limits_and_modes() {
        let g = Raag::z2_free_z();
        let aut = GeodesicAutomaton::build(&g);
        let p = ContractionParams::new(2, 3, vec![1, 2]).unwrap();
        let err = genericity_experiment(&g, &aut, &[4], &p, 2, Mode::Exhaustive, 100);
        assert!(matches!(err, Err(Error::Resource { .. })));
        let rows =
            genericity_experiment(&g, &aut, &[2, 4], &p, 2, Mode::Auto { count: 30, seed: 9 }, 100).unwrap();
        assert!(rows[0].exhaustive && !rows[1].exhaustive);
        assert_eq!(rows[1].sampled, 30);
        let again =
            genericity_experiment(&g, &aut, &[2, 4], &p, 2, Mode::Auto { count: 30, seed: 9 }, 100).unwrap();
        assert_eq!(rows, again);
        for r in &rows {
            assert!(r.fraction_f64() >= 0.0 && r.fraction_f64() <= 1.0);
        }
    }

    #[test]
    fn fractions_decrease_in_mixed_group() {
        let g = Raag::z2_free_z();
        let aut = GeodesicAutomaton::build(&g);
        let p = ContractionParams::new(2, 3, vec![1, 2]).unwrap();
        let rows = genericity_experiment(&g, &aut, &[4, 5, 6], &p, 2, Mode::Exhaustive, DEFAULT_MAX_BALL).unwrap();
        assert!(rows.windows(2).all(|w| w[0].fraction > w[1].fraction));
        let ball = enumerate_ball(&g, &aut, 7, None).unwrap();
        let again = genericity_experiment_with_ball(
            &g, &aut, &[4, 5, 6], &p, 2, Mode::Exhaustive, DEFAULT_MAX_BALL, Some(&ball),
        )
        .unwrap();
        assert_eq!(rows, again);
    }
}
