use rayon::prelude::*;

use crate::cocycle::{classify_partials, DensitySpec, HopfReport};
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupModel, QuadratureScheme, Window};
use crate::numerics::{integrate_piecewise, SampleStats};
use crate::scalar::Real;

use super::{act, rn_star, sample_config, PointConfiguration};

/// Bounded functionals of finitely many window counts.
#[derive(Clone, Debug, PartialEq)]
pub enum Functional<T> {
    /// `e^{−N_A}`.
    ExpNegCount(Window<T>),
    /// `min(N_A, cap)`.
    MinCount(Window<T>, usize),
    /// `1{N_A = 0}`.
    IndicatorEmpty(Window<T>),
    Constant(T),
}

impl<T: Real> Functional<T> {
    pub fn eval(&self, p: &PointConfiguration<T>) -> Result<T> {
        Ok(match self {
            Functional::ExpNegCount(a) => (-T::from_usize_lossy(p.count_in(a)?)).exp(),
            Functional::MinCount(a, cap) => T::from_usize_lossy(p.count_in(a)?.min(*cap)),
            Functional::IndicatorEmpty(a) => {
                if p.count_in(a)? == 0 {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Functional::Constant(c) => *c,
        })
    }

    /// The count set, if any.
    pub fn set(&self) -> Option<&Window<T>> {
        match self {
            Functional::ExpNegCount(a) | Functional::MinCount(a, _) | Functional::IndicatorEmpty(a) => Some(a),
            Functional::Constant(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::ExpNegCount(_) => "exp_neg_count",
            Functional::MinCount(..) => "min_count",
            Functional::IndicatorEmpty(_) => "indicator_empty",
            Functional::Constant(_) => "constant",
        }
    }
}

/// Monte Carlo estimates of `E[F(g.p) ∇*_g(p)]` and `E[F(p)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChangeOfVariables {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_se: f64,
    pub rhs_se: f64,
    /// `|mean(lhs_i − rhs_i)| / SE`, paired over seeds.
    pub z: f64,
    pub samples: usize,
}

impl ChangeOfVariables {
    pub fn passed(&self) -> bool {
        self.z <= 3.0
    }
}

/// Paired Monte Carlo restatement of the Radon–Nikodym property of `∇*`,
/// one configuration per seed.
pub fn change_of_variables_mc<T: Real>(
    model: &GroupModel<T>,
    density: &DensitySpec<T>,
    window: &Window<T>,
    g: &Element<T>,
    f: &Functional<T>,
    seeds: &[u64],
) -> Result<ChangeOfVariables> {
    if seeds.len() < 2 {
        return Err(Error::Parameter("need at least two seeds".into()));
    }
    let pairs: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&s| {
            let p = sample_config(model, density, window, s)?;
            let gp = act(g, &p)?;
            Ok(((f.eval(&gp)? * rn_star(g, &p)?).as_f64(), f.eval(&p)?.as_f64()))
        })
        .collect::<Result<_>>()?;
    let l: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    let r: Vec<f64> = pairs.iter().map(|x| x.1).collect();
    let d: Vec<f64> = pairs.iter().map(|x| x.0 - x.1).collect();
    let (ls, rs, ds) = (SampleStats::from_slice(&l), SampleStats::from_slice(&r), SampleStats::from_slice(&d));
    let z = ds.z_score(0.0);
    Ok(ChangeOfVariables {
        lhs: ls.mean,
        rhs: rs.mean,
        lhs_se: ls.std_err(),
        rhs_se: rs.std_err(),
        z,
        samples: seeds.len(),
    })
}

/// Partial integrals of `g ↦ ∇*_g(p)` over `[−r, r]` with the cocycle
/// verdict rule. Every radius must keep the moved support inside the window.
pub fn hopf_classify_suspension<T: Real>(
    p: &PointConfiguration<T>,
    radii: &[T],
    quad: &QuadratureScheme,
) -> Result<HopfReport<T>> {
    let model = p.model();
    if model.kind() != GroupKind::Euclidean(1) {
        return Err(Error::ModelMismatch("suspension Hopf partials run on the line".into()));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.first().is_some_and(|r| !(*r > T::zero())) {
        return Err(Error::Parameter("radii must be positive and increasing".into()));
    }
    let dens = p.density();
    let reach = match dens {
        DensitySpec::Constant(_) => None,
        DensitySpec::Cauchy(_) => {
            return Err(Error::Margin("a Cauchy intensity has no finite-window product".into()));
        }
        DensitySpec::Plateau(b) => Some(b.support()),
    };
    if let Some((lo, hi)) = &reach {
        let valid: Vec<T> = radii
            .iter()
            .copied()
            .take_while(|&r| p.window().lo()[0] <= lo[0] - r && p.window().hi()[0] >= hi[0] + r)
            .collect();
        if valid.len() < radii.len() {
            let largest = valid.last().map(|r| format!("{r}")).unwrap_or_else(|| "none".into());
            return Err(Error::Margin(format!("window too small for the radii; largest valid radius {largest}")));
        }
    }
    let mut breaks = Vec::new();
    for b in dens.breakpoints_1d() {
        for x in p.points() {
            breaks.push(b - x.coord(0));
        }
    }
    let per_unit = T::from_usize_lossy(quad.resolution);
    let integrand = |g: T| rn_star(&Element::real(g), p).unwrap_or(T::nan());
    let mut partials = Vec::with_capacity(radii.len());
    let (mut r_prev, mut acc) = (T::zero(), T::zero());
    for &r in radii {
        // integrate only the new shells
        let left = integrate_piecewise(integrand, -r, -r_prev, &breaks, per_unit, 1);
        let right = integrate_piecewise(integrand, r_prev, r, &breaks, per_unit, 1);
        let total = acc + left + right;
        if !total.is_finite() {
            return Err(Error::IntegrationDomain("suspension cocycle is not finite".into()));
        }
        partials.push(total);
        (r_prev, acc) = (r, total);
    }
    let volumes: Vec<T> = radii.iter().map(|&r| r + r).collect();
    let increments = partials
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == 0 { v } else { v - partials[i - 1] })
        .collect();
    let verdict = classify_partials(&partials, &volumes)?;
    Ok(HopfReport { radii: radii.to_vec(), partials, volumes, increments, verdict, compact_group: false })
}
