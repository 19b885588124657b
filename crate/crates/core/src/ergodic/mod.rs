//! Ratio ergodic averages along random Følner sequences.

mod oracle;
mod suspension;

pub use crate::cocycle::{diagonal_product, DiagonalProduct};
pub use oracle::{countable_oracle, poisson_expectation};
pub use suspension::{
    hopf_ergodicity_experiment, shifted_average, ErgodicityLevelRow, SuspensionErgodicityConfig,
    SuspensionErgodicityReport,
};

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::cocycle::{cond_exp_ratio, integrate_over, NonsingularAction};
use crate::error::{Error, Result};
use crate::filtration::{folner_stat, FiltrationStructure, RandomDyadicFiltration};
use crate::group::{Element, GroupKind, GroupModel, QuadratureScheme, Window};
use crate::region::Region;
use crate::scalar::Real;

/// `A_S f(x) = ∫_S ∇_g(x) f(g.x) dλ / ∫_S ∇_g(x) dλ` over a region of `G`.
pub fn ratio_average_region<T, S, F>(sys: &S, f: &F, x: &S::Point, s: &Region<T>, quad: &QuadratureScheme) -> Result<T>
where
    T: Real,
    S: NonsingularAction<T>,
    F: Fn(&S::Point) -> T + Sync,
{
    let den = integrate_over(sys, &|_: &S::Point| T::one(), x, s, quad)?;
    if !(den > T::zero()) {
        return Err(Error::DegenerateWindow("the averaging window has zero weight".into()));
    }
    Ok(integrate_over(sys, f, x, s, quad)? / den)
}

/// `ratio_average` over a window of `G`.
pub fn ratio_average<T, S, F>(sys: &S, f: &F, x: &S::Point, s: &Window<T>, quad: &QuadratureScheme) -> Result<T>
where
    T: Real,
    S: NonsingularAction<T>,
    F: Fn(&S::Point) -> T + Sync,
{
    ratio_average_region(sys, f, x, &Region::Box(*s), quad)
}

/// The random window `S_n` as a region of `G`: on lattices the half-open
/// dyadic interval `[lo, lo + 2ⁿ)` keeps exactly `2ⁿ` points per axis.
pub fn dyadic_region<T: Real>(filt: &RandomDyadicFiltration, model: &GroupModel<T>, n: usize) -> Result<Region<T>> {
    if filt.dim() != model.dim() {
        return Err(Error::ModelMismatch("filtration and group dimensions differ".into()));
    }
    let w: Window<T> = filt.window(n);
    match model.kind() {
        GroupKind::Lattice(_) => {
            let hi: Vec<T> = w.hi().iter().map(|&h| h - T::one()).collect();
            Ok(Region::Box(Window::new(w.lo(), &hi)?))
        }
        GroupKind::Euclidean(_) => Ok(Region::Box(w)),
        GroupKind::Affine => Err(Error::ModelMismatch("dyadic windows are defined on R^d and Z^d".into())),
    }
}

/// One level of a convergence run.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRow<T> {
    pub level: usize,
    pub mean_value: T,
    /// Mean of `|A_n f(x) − target|` over the samples.
    pub l1_error: T,
    pub sup_error: T,
    /// Følner statistic of `S_n` against `K = [−1, 1]ᵈ` (averaged over samples
    /// when `S_n` depends on `x`).
    pub folner_stat: T,
    /// Largest `|A_n f(x) − E(f | E_n)(x)|` over samples, for filtration runs.
    pub consistency: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport<T> {
    pub rows: Vec<LevelRow<T>>,
    /// `values[k][i]`: `A_n f` at the `k`-th level for sample `i`.
    pub values: Vec<Vec<T>>,
    pub target: T,
    pub seed: u64,
    pub sample_size: usize,
}

impl<T: Real> ConvergenceReport<T> {
    pub fn row(&self, level: usize) -> Option<&LevelRow<T>> {
        self.rows.iter().find(|r| r.level == level)
    }
}

fn summarize<T: Real>(level: usize, vals: &[T], target: T, folner: T, consistency: Option<T>) -> LevelRow<T> {
    let n = T::from_usize_lossy(vals.len().max(1));
    let errs: Vec<T> = vals.iter().map(|&v| (v - target).abs()).collect();
    LevelRow {
        level,
        mean_value: crate::numerics::pairwise_sum(vals) / n,
        l1_error: crate::numerics::pairwise_sum(&errs) / n,
        sup_error: errs.iter().copied().fold(T::zero(), T::max),
        folner_stat: folner,
        consistency,
    }
}

fn check_levels(levels: &RangeInclusive<usize>, max: usize) -> Result<()> {
    if levels.is_empty() || *levels.end() > max {
        return Err(Error::ExhaustedFiltration(format!("levels {levels:?} exceed the filtration depth {max}")));
    }
    Ok(())
}

/// Ratio averages along the random Følner sequence `S_n` of `filt` for
/// every sample, against a known target such as `∫ f dμ`.
pub fn random_ratio_run<T, S, F>(
    sys: &S,
    f: &F,
    filt: &RandomDyadicFiltration,
    samples: &[S::Point],
    levels: RangeInclusive<usize>,
    target: T,
    quad: &QuadratureScheme,
) -> Result<ConvergenceReport<T>>
where
    T: Real,
    S: NonsingularAction<T>,
    F: Fn(&S::Point) -> T + Sync,
{
    check_levels(&levels, filt.max_level())?;
    let model = sys.group();
    let k = Window::cube(model.dim(), -T::one(), T::one())?;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for n in levels {
        let s = dyadic_region(filt, model, n)?;
        let vals: Vec<T> = samples
            .par_iter()
            .map(|x| ratio_average_region(sys, f, x, &s, quad))
            .collect::<Result<_>>()?;
        let folner = folner_stat(&s, &k, model, quad)?;
        rows.push(summarize(n, &vals, target, folner, None));
        values.push(vals);
    }
    Ok(ConvergenceReport { rows, values, target, seed: filt.seed(), sample_size: samples.len() })
}

/// Ratio averages over the orbit windows `S_n(x) = G_{E_n}(x)` of a
/// filtration, each checked against the conditional-expectation ratio of
/// the level relation.
pub fn filtration_ratio_run<T, S, F>(
    sys: &S,
    f: &F,
    filt: &FiltrationStructure<T>,
    samples: &[Element<T>],
    levels: RangeInclusive<usize>,
    target: T,
    quad: &QuadratureScheme,
) -> Result<ConvergenceReport<T>>
where
    T: Real,
    S: NonsingularAction<T, Point = Element<T>>,
    F: Fn(&Element<T>) -> T + Sync,
{
    check_levels(&levels, filt.max_level())?;
    let model = sys.group();
    let k = Window::cube(model.dim(), -T::one(), T::one())?;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for n in levels {
        let level = filt.level(n);
        let per: Vec<(T, T, T)> = samples
            .par_iter()
            .map(|x| {
                let s = filt.displacement(n, x)?;
                let a = ratio_average_region(sys, f, x, &s, quad)?;
                let c = cond_exp_ratio(sys, f, x, &level, quad)?;
                Ok((a, (a - c).abs(), folner_stat(&s, &k, model, quad)?))
            })
            .collect::<Result<_>>()?;
        let vals: Vec<T> = per.iter().map(|p| p.0).collect();
        let gap = per.iter().map(|p| p.1).fold(T::zero(), T::max);
        let fol = per.iter().map(|p| p.2).fold(T::zero(), |a, b| a + b) / T::from_usize_lossy(per.len().max(1));
        rows.push(summarize(n, &vals, target, fol, Some(gap)));
        values.push(vals);
    }
    Ok(ConvergenceReport { rows, values, target, seed: 0, sample_size: samples.len() })
}
