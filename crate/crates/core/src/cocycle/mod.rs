//! Densities, Radon–Nikodym cocycles and the conditional-expectation ratio.

mod density;
mod finite;
mod hopf;
mod system;

pub use density::{Bump, DensitySpec};
pub use finite::FiniteModel;
pub use hopf::{classify_partials, hopf_classify, HopfReport, HopfVerdict};
pub use system::{
    diagonal_product, CircleRotation, DiagonalProduct, NonsingularAction, TorusFlow, TranslationSystem,
    FREENESS_PROBE_RANGE,
};

use crate::cross_section::CompactOer;
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, QuadratureScheme};
use crate::numerics::integrate_piecewise;
use crate::region::Region;
use crate::scalar::Real;

/// `|∇_{gh}(x) − ∇_g(h.x) ∇_h(x)|`.
pub fn cocycle_residual<T, S>(sys: &S, g: &Element<T>, h: &Element<T>, x: &S::Point) -> Result<T>
where
    T: Real,
    S: NonsingularAction<T>,
{
    let gh = sys.group().mul(g, h)?;
    let hx = sys.act(h, x)?;
    Ok((sys.nabla(&gh, x)? - sys.nabla(g, &hx)? * sys.nabla(h, x)?).abs())
}

/// `∫_D ∇_g(x) f(g.x) dλ(g)` over a displacement region `D`.
pub fn integrate_over<T, S, F>(sys: &S, f: &F, x: &S::Point, d: &Region<T>, quad: &QuadratureScheme) -> Result<T>
where
    T: Real,
    S: NonsingularAction<T>,
    F: Fn(&S::Point) -> T + Sync,
{
    let breaks = sys.orbit_breaks(x);
    d.integrate(
        sys.group(),
        |g| match (sys.nabla(g, x), sys.act(g, x)) {
            (Ok(n), Ok(y)) => n * f(&y),
            _ => T::nan(),
        },
        quad,
        &breaks,
    )
}

/// `S_f^E(x) = ∫_{G_E(x)} ∇_g(x) f(g.x) dλ(g)`.
pub fn s_operator<T, S, E, F>(sys: &S, f: &F, x: &S::Point, e: &E, quad: &QuadratureScheme) -> Result<T>
where
    T: Real,
    S: NonsingularAction<T>,
    E: CompactOer<T, Point = S::Point>,
    F: Fn(&S::Point) -> T + Sync,
{
    let d = e.displacement(x)?;
    integrate_over(sys, f, x, &d, quad)
}

/// `E(f | E)(x) = S_f^E(x) / S_1^E(x)`.
pub fn cond_exp_ratio<T, S, E, F>(sys: &S, f: &F, x: &S::Point, e: &E, quad: &QuadratureScheme) -> Result<T>
where
    T: Real,
    S: NonsingularAction<T>,
    E: CompactOer<T, Point = S::Point>,
    F: Fn(&S::Point) -> T + Sync,
{
    let d = e.displacement(x)?;
    let den = integrate_over(sys, &|_: &S::Point| T::one(), x, &d, quad)?;
    if !(den > T::lit(crate::filtration::POSITIVITY_THRESHOLD)) {
        return Err(Error::Positivity("the class of x has null displacement set".into()));
    }
    Ok(integrate_over(sys, f, x, &d, quad)? / den)
}

/// Both sides of the transformation identity
/// `S_f(g.x) = Δ(g⁻¹) ∇_g(x)⁻¹ S_f(x)` and their relative residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformationReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
}

pub fn transformation_check<T, S, E, F>(
    sys: &S,
    f: &F,
    x: &S::Point,
    g: &Element<T>,
    e: &E,
    quad: &QuadratureScheme,
) -> Result<TransformationReport<T>>
where
    T: Real,
    S: NonsingularAction<T>,
    E: CompactOer<T, Point = S::Point>,
    F: Fn(&S::Point) -> T + Sync,
{
    let model = sys.group();
    let d = e.displacement(x)?;
    if !d.contains(g) {
        return Err(Error::Precondition("g is not in the displacement set of x".into()));
    }
    let gx = sys.act(g, x)?;
    let lhs = s_operator(sys, f, &gx, e, quad)?;
    let sx = integrate_over(sys, f, x, &d, quad)?;
    let rhs = model.modular(&model.inv(g)?)? * sx / sys.nabla(g, x)?;
    let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(T::min_positive_value());
    Ok(TransformationReport { lhs, rhs, residual })
}

/// Bounded compactly supported test function on the line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFunction<T> {
    Zero,
    Indicator { lo: T, hi: T },
    /// `(1 + cos(π (t − c)/r)) / 2` on `|t − c| < r`.
    CosineBump { center: T, radius: T },
    /// Not compactly supported.
    Constant(T),
    /// `t ↦ slope · t`, unbounded.
    Ramp { slope: T },
}

impl<T: Real> TestFunction<T> {
    fn validated(&self) -> Result<()> {
        match *self {
            TestFunction::Zero => Ok(()),
            TestFunction::Indicator { lo, hi } if lo < hi && lo.is_finite() && hi.is_finite() => Ok(()),
            TestFunction::CosineBump { center, radius } if radius > T::zero() && center.is_finite() => Ok(()),
            TestFunction::Indicator { .. } | TestFunction::CosineBump { .. } => {
                Err(Error::Parameter("test function has an empty or infinite support".into()))
            }
            TestFunction::Constant(_) => Err(Error::Rejected("constant test functions are not compactly supported".into())),
            TestFunction::Ramp { .. } => Err(Error::Rejected("ramp test functions are unbounded".into())),
        }
    }

    pub fn eval(&self, t: T) -> T {
        match *self {
            TestFunction::Zero => T::zero(),
            TestFunction::Indicator { lo, hi } => {
                if t >= lo && t < hi {
                    T::one()
                } else {
                    T::zero()
                }
            }
            TestFunction::CosineBump { center, radius } => {
                let u = (t - center) / radius;
                if u.abs() >= T::one() {
                    T::zero()
                } else {
                    (T::one() + (T::PI() * u).cos()) * T::lit(0.5)
                }
            }
            TestFunction::Constant(c) => c,
            TestFunction::Ramp { slope } => slope * t,
        }
    }

    /// Closed support, `None` for the zero function.
    pub fn support(&self) -> Option<(T, T)> {
        match *self {
            TestFunction::Indicator { lo, hi } => Some((lo, hi)),
            TestFunction::CosineBump { center, radius } => Some((center - radius, center + radius)),
            _ => None,
        }
    }

    fn breaks(&self) -> Vec<T> {
        match *self {
            TestFunction::Indicator { lo, hi } => vec![lo, hi],
            TestFunction::CosineBump { center, radius } => vec![center - radius, center, center + radius],
            _ => Vec::new(),
        }
    }
}

/// Both sides of the Fubini identity
/// `∫∫ ∇_g(x) f₀(g.x) f₁(x) φ(g) dμ(x) dλ(g) = ∫∫ f₀(x) f₁(g⁻¹.x) φ(g) dμ(x) dλ(g)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FubiniReport<T> {
    pub lhs: T,
    pub rhs: T,
    /// `|lhs − rhs| / max(lhs, 1)`.
    pub residual: T,
}

/// Evaluates both sides of the Fubini identity on the line by nested
/// piecewise quadrature with `quad.resolution` nodes per unit length.
pub fn fubini_check<T: Real>(
    sys: &TranslationSystem<T>,
    f0: &TestFunction<T>,
    f1: &TestFunction<T>,
    phi: &TestFunction<T>,
    quad: &QuadratureScheme,
) -> Result<FubiniReport<T>> {
    if sys.group().kind() != GroupKind::Euclidean(1) {
        return Err(Error::ModelMismatch("the Fubini check runs on the real line".into()));
    }
    for t in [f0, f1, phi] {
        t.validated()?;
    }
    let (s0, s1, sp) = match (f0.support(), f1.support(), phi.support()) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            let zero = FubiniReport { lhs: T::zero(), rhs: T::zero(), residual: T::zero() };
            return Ok(zero);
        }
    };
    let dens = sys.density();
    let mut pts = f0.breaks();
    pts.extend(f1.breaks());
    pts.extend(dens.breakpoints_1d());
    let mut g_breaks = phi.breaks();
    for &a in &pts {
        for &b in &pts {
            g_breaks.push(a - b);
        }
    }
    let per_unit = T::from_usize_lossy(quad.resolution);
    let d = |t: T| dens.eval(&[t]);

    let lhs = integrate_piecewise(
        |g| {
            let p = phi.eval(g);
            if p == T::zero() {
                return T::zero();
            }
            let (a, b) = (s1.0.max(s0.0 - g), s1.1.min(s0.1 - g));
            let mut br: Vec<T> = f1.breaks();
            br.extend(f0.breaks().into_iter().map(|t| t - g));
            br.extend(dens.breakpoints_1d());
            br.extend(dens.breakpoints_1d().into_iter().map(|t| t - g));
            let inner = integrate_piecewise(
                |x| d(g + x) / d(x) * f0.eval(g + x) * f1.eval(x) * d(x),
                a,
                b,
                &br,
                per_unit,
                8,
            );
            inner * p
        },
        sp.0,
        sp.1,
        &g_breaks,
        per_unit,
        8,
    );
    let rhs = integrate_piecewise(
        |g| {
            let p = phi.eval(g);
            if p == T::zero() {
                return T::zero();
            }
            let (a, b) = (s0.0.max(s1.0 + g), s0.1.min(s1.1 + g));
            let mut br: Vec<T> = f0.breaks();
            br.extend(f1.breaks().into_iter().map(|t| t + g));
            br.extend(dens.breakpoints_1d());
            let inner = integrate_piecewise(|x| f0.eval(x) * f1.eval(x - g) * d(x), a, b, &br, per_unit, 8);
            inner * p
        },
        sp.0,
        sp.1,
        &g_breaks,
        per_unit,
        8,
    );
    if !(lhs.is_finite() && rhs.is_finite()) {
        return Err(Error::IntegrationDomain("Fubini integrand is not finite".into()));
    }
    let residual = (lhs - rhs).abs() / lhs.max(T::one());
    Ok(FubiniReport { lhs, rhs, residual })
}
