use crate::error::{Error, Result};
use crate::group::QuadratureScheme;
use crate::region::Region;
use crate::scalar::Real;

use super::{integrate_over, NonsingularAction};

/// Pointwise conservative/dissipative verdict from partial integrals of
/// `g ↦ ∇_g(x)` over growing balls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HopfVerdict {
    Conservative,
    Dissipative,
    Inconclusive,
}

impl HopfVerdict {
    pub fn name(self) -> &'static str {
        match self {
            HopfVerdict::Conservative => "conservative",
            HopfVerdict::Dissipative => "dissipative",
            HopfVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopfReport<T> {
    pub radii: Vec<T>,
    /// `∫_{B(e, r)} ∇_g(x) dλ(g)` per radius.
    pub partials: Vec<T>,
    /// Ball volumes `λ(B(e, r))`.
    pub volumes: Vec<T>,
    /// `partials[k] − partials[k−1]`, with the first entry equal to `partials[0]`.
    pub increments: Vec<T>,
    pub verdict: HopfVerdict,
    /// Set when the acting group is compact; the verdict is then
    /// conservative by convention.
    pub compact_group: bool,
}

/// Fraction of the running total below which a tail increment counts as
/// negligible.
pub const DISSIPATIVE_FRACTION: f64 = 0.01;

/// Allowed relative deviation between integral growth and volume growth.
pub const CONSERVATIVE_BAND: f64 = 0.1;

/// The verdict rule. Dissipative when each of the last three increments is
/// below 1% of the running total; conservative when each of the last three
/// growth ratios of the partial integrals is within 10% of the matching
/// growth ratio of the ball volumes.
pub fn classify_partials<T: Real>(partials: &[T], volumes: &[T]) -> Result<HopfVerdict> {
    let k = partials.len();
    if k < 4 || volumes.len() != k {
        return Err(Error::Parameter("the verdict needs at least four radii".into()));
    }
    let frac = T::lit(DISSIPATIVE_FRACTION);
    if (k - 3..k).all(|i| (partials[i] - partials[i - 1]).abs() < frac * partials[i].abs()) {
        return Ok(HopfVerdict::Dissipative);
    }
    let band = T::lit(CONSERVATIVE_BAND);
    let linear = (k - 3..k).all(|i| {
        let growth = (partials[i] / partials[i - 1]) / (volumes[i] / volumes[i - 1]);
        growth.is_finite() && (growth - T::one()).abs() <= band
    });
    Ok(if linear { HopfVerdict::Conservative } else { HopfVerdict::Inconclusive })
}

/// Partial integrals of the cocycle at `x` over the balls `B(e, r)` for
/// increasing `radii`, with the verdict.
pub fn hopf_classify<T, S>(sys: &S, x: &S::Point, radii: &[T], quad: &QuadratureScheme) -> Result<HopfReport<T>>
where
    T: Real,
    S: NonsingularAction<T>,
{
    if !sys.is_probability() {
        return Err(Error::CriterionInapplicable("the Hopf criterion needs a probability measure".into()));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.first().is_some_and(|r| !(*r > T::zero())) {
        return Err(Error::Parameter("radii must be positive and increasing".into()));
    }
    let model = sys.group();
    let mut partials = Vec::with_capacity(radii.len());
    let mut volumes = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = Region::Box(model.ball_window(r));
        partials.push(integrate_over(sys, &|_: &S::Point| T::one(), x, &ball, quad)?);
        volumes.push(ball.measure(model, quad)?);
    }
    let increments = partials
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == 0 { p } else { p - partials[i - 1] })
        .collect();
    let compact_group = sys.group_period().is_some();
    let verdict = if compact_group {
        HopfVerdict::Conservative
    } else {
        classify_partials(&partials, &volumes)?
    };
    Ok(HopfReport { radii: radii.to_vec(), partials, volumes, increments, verdict, compact_group })
}
