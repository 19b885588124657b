use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::cocycle::{DensitySpec, HopfVerdict};
use crate::error::{Error, Result};
use crate::filtration::RandomDyadicFiltration;
use crate::group::{Element, GroupModel, QuadratureScheme, Window};
use crate::numerics::{integrate_piecewise, SampleStats};
use crate::poisson::{hopf_classify_suspension, pi_apply, rn_star, sample_config, Functional, PiTransform, PointConfiguration};
use crate::scalar::Real;

use super::oracle::poisson_expectation;

/// Exponent of `υ_π` in the sandwich bound.
pub const SANDWICH_EXPONENT: i32 = 16;

/// Offset separating the window stream from the configuration stream.
const FILTRATION_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq)]
pub struct SuspensionErgodicityConfig<T> {
    pub density: DensitySpec<T>,
    /// `φ`, a bounded function of one window count.
    pub functional: Functional<T>,
    pub pis: Vec<PiTransform<T>>,
    /// `0 < α < 1` with `α ≤ inf ∂ ≤ sup ∂ ≤ 1/α`.
    pub alpha: T,
    /// Levels `n` of the random windows `S_n`, `|S_n| = 2ⁿ`.
    pub levels: RangeInclusive<usize>,
    pub seeds: Vec<u64>,
    /// Nodes per unit length between breakpoints.
    pub quad: QuadratureScheme,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicityLevelRow {
    pub level: usize,
    /// Mean over seeds of `A_n φ(p)`.
    pub mean_average: f64,
    pub std_err: f64,
    /// Mean over seeds of `∫_{S_n} ∇*_g(p) dλ`.
    pub mean_denominator: f64,
    /// Smallest ratio of consecutive denominators over seeds.
    pub min_denominator_ratio: Option<f64>,
    /// Mean over seeds and `π` of the cross term
    /// `|∫∇*_g(p) φ(g.π.p) / ∫∇*_g(p) − A_n φ(p)|`.
    pub mean_cross_term: f64,
    pub sandwich_checks: usize,
    pub sandwich_passes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedLimit {
    pub mean: f64,
    /// Paired `|mean(A_N φ(π.p) − A_N φ(p))| / SE`.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuspensionErgodicityReport {
    pub rows: Vec<ErgodicityLevelRow>,
    pub hopf_verdict: HopfVerdict,
    /// `E[φ]` under the Poisson law.
    pub target: f64,
    pub final_mean: f64,
    pub final_std_err: f64,
    pub target_z: f64,
    pub perturbed: Vec<PerturbedLimit>,
    pub min_denominator_ratio: f64,
    pub cross_term_decreasing: bool,
    pub sandwich_checks: usize,
    pub sandwich_passes: usize,
    pub window: (f64, f64),
    pub ergodicity_consistent: bool,
}

fn phi_of_count<T: Real>(phi: &Functional<T>, n: usize) -> T {
    match phi {
        Functional::ExpNegCount(_) => (-T::from_usize_lossy(n)).exp(),
        Functional::MinCount(_, cap) => T::from_usize_lossy(n.min(*cap)),
        Functional::IndicatorEmpty(_) => {
            if n == 0 {
                T::one()
            } else {
                T::zero()
            }
        }
        Functional::Constant(c) => *c,
    }
}

/// `(∫_{[lo,hi]} ∇*_g(w) φ(g.q) dg, ∫_{[lo,hi]} ∇*_g(w) dg)` on the line,
/// split at every point where either integrand can jump.
pub fn shifted_average<T: Real>(
    w: &PointConfiguration<T>,
    q: &PointConfiguration<T>,
    phi: &Functional<T>,
    lo: T,
    hi: T,
    per_unit: T,
) -> Result<(T, T)> {
    let mut breaks = Vec::new();
    for b in w.density().breakpoints_1d() {
        breaks.extend(w.points().iter().map(|x| b - x.coord(0)));
    }
    if let Some(a) = phi.set() {
        for x in q.points() {
            breaks.push(a.lo()[0] - x.coord(0));
            breaks.push(a.hi()[0] - x.coord(0));
        }
        let need = Window::interval(a.lo()[0] - hi, a.hi()[0] - lo)?;
        if !q.window().contains_window(&need) {
            return Err(Error::Margin("count set leaves the window along S_n".into()));
        }
    }
    let weight = |g: T| rn_star(&Element::real(g), w).unwrap_or(T::nan());
    let value = |g: T| match phi.set() {
        Some(a) => phi_of_count(phi, q.points_in(&a.shift(&[-g])).len()),
        None => phi_of_count(phi, 0),
    };
    let num = integrate_piecewise(|g| weight(g) * value(g), lo, hi, &breaks, per_unit, 1);
    let den = integrate_piecewise(weight, lo, hi, &breaks, per_unit, 1);
    if !(num.is_finite() && den.is_finite()) {
        return Err(Error::Margin("suspension cocycle undefined on S_n".into()));
    }
    Ok((num, den))
}

struct SeedRun {
    /// Per level: `(A_n φ(p), denominator, cross terms per π, sandwich passes)`.
    levels: Vec<(f64, f64, Vec<f64>, usize)>,
    /// `A_N φ(π.p)` per π at the last level.
    perturbed_final: Vec<f64>,
}

/// Part 2–3 experiment on a line suspension: ratio averages of `φ` along
/// random dyadic windows, the sandwich bound for `π`-perturbed
/// configurations, the vanishing cross term, and the agreement of the
/// perturbed and unperturbed limits.
pub fn hopf_ergodicity_experiment<T: Real>(cfg: &SuspensionErgodicityConfig<T>) -> Result<SuspensionErgodicityReport> {
    let model = GroupModel::<T>::real_line();
    let dens = cfg.density.clone().validated()?;
    let alpha = cfg.alpha;
    if !(alpha > T::zero() && alpha < T::one()) || dens.inf() < alpha || dens.sup() > alpha.recip() {
        return Err(Error::Parameter("alpha must satisfy 0 < alpha <= inf density <= sup density <= 1/alpha < inf".into()));
    }
    if cfg.seeds.len() < 2 {
        return Err(Error::Parameter("need at least two seeds".into()));
    }
    let top = *cfg.levels.end();
    if cfg.levels.is_empty() || top < 3 || top > 40 {
        return Err(Error::Parameter("levels must end between 3 and 40".into()));
    }
    if matches!(dens, DensitySpec::Cauchy(_)) {
        return Err(Error::Margin("a Cauchy intensity has no finite-window product".into()));
    }
    let reach = T::from_i64(1i64 << top).unwrap();
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut cover = |a: T, b: T| {
        lo = lo.min(a);
        hi = hi.max(b);
    };
    if let Some(a) = cfg.functional.set() {
        cover(a.lo()[0], a.hi()[0]);
    }
    if let Some(b) = dens.bump() {
        let (s, t) = b.support();
        cover(s[0], t[0]);
    }
    for pi in &cfg.pis {
        if let Some(h) = pi.hull() {
            cover(h.lo()[0], h.hi()[0]);
        }
    }
    let window = Window::interval(lo - reach - T::one(), hi + reach + T::one())?;
    let per_unit = T::from_usize_lossy(cfg.quad.resolution);

    let first = sample_config(&model, &dens, &window, cfg.seeds[0])?;
    let radii: Vec<T> = (0..=top).map(|k| T::from_i64(1i64 << k).unwrap()).collect();
    let hopf = hopf_classify_suspension(&first, &radii, &cfg.quad)?;
    if hopf.verdict == HopfVerdict::Dissipative {
        return Err(Error::Rejected("the suspension is dissipative; the ergodicity experiment does not apply".into()));
    }

    let levels: Vec<usize> = cfg.levels.clone().collect();
    let runs: Vec<SeedRun> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let p = sample_config(&model, &dens, &window, seed)?;
            let filt = RandomDyadicFiltration::new(seed.wrapping_add(FILTRATION_SEED_OFFSET), top, 1)?;
            let moved: Vec<PointConfiguration<T>> = cfg.pis.iter().map(|pi| pi_apply(pi, &p)).collect::<Result<_>>()?;
            let ups: Vec<T> = cfg
                .pis
                .iter()
                .map(|pi| alpha.powi(p.points().iter().filter(|x| pi.in_support(x.coord(0))).count() as i32))
                .collect();
            let mut out = SeedRun { levels: Vec::new(), perturbed_final: Vec::new() };
            for &n in &levels {
                let (a, b) = filt.interval(0, n);
                let (a, b) = (T::from_i64(a).unwrap(), T::from_i64(b).unwrap());
                let (num, den) = shifted_average(&p, &p, &cfg.functional, a, b, per_unit)?;
                let avg = num / den;
                let mut cross = Vec::new();
                let mut passes = 0;
                for (k, q) in moved.iter().enumerate() {
                    let (cn, cd) = shifted_average(&p, q, &cfg.functional, a, b, per_unit)?;
                    let c = cn / cd;
                    let (pn, pd) = shifted_average(q, q, &cfg.functional, a, b, per_unit)?;
                    let ap = pn / pd;
                    let ups16 = ups[k].powi(SANDWICH_EXPONENT);
                    let slack = T::lit(1e-12);
                    if ups16 * c * (T::one() - slack) <= ap && ap <= c / ups16 * (T::one() + slack) {
                        passes += 1;
                    }
                    cross.push((c - avg).abs().as_f64());
                    if n == top {
                        out.perturbed_final.push(ap.as_f64());
                    }
                }
                out.levels.push((avg.as_f64(), den.as_f64(), cross, passes));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let npi = cfg.pis.len();
    let mut rows = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for (li, &n) in levels.iter().enumerate() {
        let avgs: Vec<f64> = runs.iter().map(|r| r.levels[li].0).collect();
        let dens_n: Vec<f64> = runs.iter().map(|r| r.levels[li].1).collect();
        let st = SampleStats::from_slice(&avgs);
        let ratio = (li > 0).then(|| {
            runs.iter().map(|r| r.levels[li].1 / r.levels[li - 1].1).fold(f64::INFINITY, f64::min)
        });
        if let Some(r) = ratio {
            min_ratio = min_ratio.min(r);
        }
        let crosses: Vec<f64> = runs.iter().flat_map(|r| r.levels[li].2.iter().copied()).collect();
        rows.push(ErgodicityLevelRow {
            level: n,
            mean_average: st.mean,
            std_err: st.std_err(),
            mean_denominator: dens_n.iter().sum::<f64>() / dens_n.len() as f64,
            min_denominator_ratio: ratio,
            mean_cross_term: if crosses.is_empty() { 0.0 } else { crosses.iter().sum::<f64>() / crosses.len() as f64 },
            sandwich_checks: runs.len() * npi,
            sandwich_passes: runs.iter().map(|r| r.levels[li].3).sum(),
        });
    }
    let last = rows.last().expect("nonempty levels");
    let first_row = &rows[0];
    let target = poisson_expectation(&cfg.functional, &dens)?;
    let finals: Vec<f64> = runs.iter().map(|r| r.levels[levels.len() - 1].0).collect();
    let fst = SampleStats::from_slice(&finals);
    let target_z = fst.z_score(target);
    let perturbed: Vec<PerturbedLimit> = (0..npi)
        .map(|k| {
            let vals: Vec<f64> = runs.iter().map(|r| r.perturbed_final[k]).collect();
            let diffs: Vec<f64> = runs.iter().map(|r| r.perturbed_final[k] - r.levels[levels.len() - 1].0).collect();
            PerturbedLimit { mean: SampleStats::from_slice(&vals).mean, z: SampleStats::from_slice(&diffs).z_score(0.0) }
        })
        .collect();
    let cross_term_decreasing = last.mean_cross_term <= first_row.mean_cross_term;
    let sandwich_checks: usize = rows.iter().map(|r| r.sandwich_checks).sum();
    let sandwich_passes: usize = rows.iter().map(|r| r.sandwich_passes).sum();
    let min_denominator_ratio = if min_ratio.is_finite() { min_ratio } else { f64::NAN };
    let ergodicity_consistent = sandwich_passes == sandwich_checks
        && perturbed.iter().all(|p| p.z <= 3.0)
        && target_z <= 3.0
        && cross_term_decreasing
        && !(min_denominator_ratio < 1.5);
    Ok(SuspensionErgodicityReport {
        window: (window.lo()[0].as_f64(), window.hi()[0].as_f64()),
        hopf_verdict: hopf.verdict,
        target,
        final_mean: fst.mean,
        final_std_err: fst.std_err(),
        target_z,
        perturbed,
        min_denominator_ratio,
        cross_term_decreasing,
        sandwich_checks,
        sandwich_passes,
        ergodicity_consistent,
        rows,
    })
}
