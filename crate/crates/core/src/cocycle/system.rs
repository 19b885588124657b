use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupModel};
use crate::scalar::Real;

use super::density::DensitySpec;

/// A nonsingular action of a group on a measure space, with its
/// Radon–Nikodym cocycle `∇_g(x) = d(μ∘g)/dμ (x)`.
pub trait NonsingularAction<T: Real>: Sync {
    type Point: Clone + Debug + Send + Sync;

    fn group(&self) -> &GroupModel<T>;

    fn act(&self, g: &Element<T>, x: &Self::Point) -> Result<Self::Point>;

    fn nabla(&self, g: &Element<T>, x: &Self::Point) -> Result<T>;

    /// Whether `μ` is a probability measure.
    fn is_probability(&self) -> bool;

    /// Whether `∇ ≡ 1`.
    fn preserves_measure(&self) -> bool;

    /// Whether only the identity fixes a point (probed on a test window).
    fn is_free(&self) -> bool {
        false
    }

    /// Period of the acting parameter when the effective acting group is
    /// the compact circle `ℝ / P ℤ`.
    fn group_period(&self) -> Option<T> {
        None
    }

    /// On the line: points `g` where `g ↦ ∇_g(x)` may jump or kink.
    fn orbit_breaks(&self, _x: &Self::Point) -> Vec<T> {
        Vec::new()
    }
}

/// A group acting on itself by left translation, `μ = ∂·λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationSystem<T> {
    model: GroupModel<T>,
    density: DensitySpec<T>,
}

impl<T: Real> TranslationSystem<T> {
    pub fn new(model: GroupModel<T>, density: DensitySpec<T>) -> Result<Self> {
        let density = density.validated()?;
        if let Some(d) = density.dim() {
            if d != model.dim() {
                return Err(Error::ModelMismatch(format!(
                    "density of dimension {d} on {}",
                    model.kind().name()
                )));
            }
        }
        if matches!(density, DensitySpec::Cauchy(_)) && model.kind() != GroupKind::Euclidean(1) {
            return Err(Error::ModelMismatch("the Cauchy density lives on the real line".into()));
        }
        Ok(Self { model, density })
    }

    pub fn density(&self) -> &DensitySpec<T> {
        &self.density
    }

    /// `∂(x)`.
    pub fn density_at(&self, x: &Element<T>) -> T {
        self.density.eval(&x.chart())
    }
}

impl<T: Real> NonsingularAction<T> for TranslationSystem<T> {
    type Point = Element<T>;

    fn group(&self) -> &GroupModel<T> {
        &self.model
    }

    fn act(&self, g: &Element<T>, x: &Element<T>) -> Result<Element<T>> {
        self.model.mul(g, x)
    }

    fn nabla(&self, g: &Element<T>, x: &Element<T>) -> Result<T> {
        self.model.check(x)?;
        let gx = self.model.mul(g, x)?;
        Ok(self.density.eval(&gx.chart()) / self.density.eval(&x.chart()))
    }

    fn is_probability(&self) -> bool {
        !self.model.is_discrete() && self.density.is_probability()
    }

    fn preserves_measure(&self) -> bool {
        self.density.is_constant()
    }

    fn orbit_breaks(&self, x: &Element<T>) -> Vec<T> {
        if self.model.kind() != GroupKind::Euclidean(1) {
            return Vec::new();
        }
        self.density.breakpoints_1d().into_iter().map(|b| b - x.coord(0)).collect()
    }
}

fn wrap<T: Real>(t: T) -> T {
    let w = t - t.floor();
    if w >= T::one() {
        T::zero()
    } else {
        w
    }
}

/// Linear flow `y ↦ y + g·α (mod 1)` on the torus `𝕋ᵏ`, `k ∈ {1, 2}`, for
/// `ℝ` or `ℤ` acting; Lebesgue measure is preserved.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusFlow<T> {
    model: GroupModel<T>,
    slopes: Vec<T>,
}

/// Range of group elements searched by the freeness probe.
pub const FREENESS_PROBE_RANGE: f64 = 1000.0;

impl<T: Real> TorusFlow<T> {
    pub fn new(model: GroupModel<T>, slopes: Vec<T>) -> Result<Self> {
        if !matches!(model.kind(), GroupKind::Euclidean(1) | GroupKind::Lattice(1)) {
            return Err(Error::ModelMismatch("torus flows are driven by R or Z".into()));
        }
        if !(1..=2).contains(&slopes.len()) || slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::Parameter("torus flow needs one or two finite slopes".into()));
        }
        Ok(Self { model, slopes })
    }

    pub fn dim(&self) -> usize {
        self.slopes.len()
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    fn torus_dist(a: T, b: T) -> T {
        let d = wrap(a - b);
        d.min(T::one() - d)
    }

    /// Whether some nonzero `g` with `|g| ≤ range` returns the origin to
    /// within `tol` of itself.
    pub fn has_period_within(&self, range: T, tol: T) -> bool {
        let first = self.slopes[0].abs();
        if self.model.is_discrete() {
            let n = range.to_i64().unwrap_or(0);
            return (1..=n).any(|k| {
                let g = T::from_i64(k).unwrap();
                self.slopes.iter().all(|&s| Self::torus_dist(g * s, T::zero()) <= tol)
            });
        }
        if first == T::zero() {
            return match self.slopes.get(1) {
                Some(s) if s.abs() > T::zero() => s.abs().recip() <= range,
                _ => true,
            };
        }
        // g·α₁ must be an integer k
        let kmax = (range * first).floor().to_i64().unwrap_or(0);
        (1..=kmax).any(|k| {
            let g = T::from_i64(k).unwrap() / first;
            self.slopes.iter().all(|&s| Self::torus_dist(g * s, T::zero()) <= tol)
        })
    }
}

impl<T: Real> NonsingularAction<T> for TorusFlow<T> {
    type Point = [T; 2];

    fn group(&self) -> &GroupModel<T> {
        &self.model
    }

    fn act(&self, g: &Element<T>, y: &[T; 2]) -> Result<[T; 2]> {
        self.model.check(g)?;
        let mut out = *y;
        for (i, s) in self.slopes.iter().enumerate() {
            out[i] = wrap(y[i] + g.coord(0) * *s);
        }
        Ok(out)
    }

    fn nabla(&self, g: &Element<T>, _y: &[T; 2]) -> Result<T> {
        self.model.check(g)?;
        Ok(T::one())
    }

    fn is_probability(&self) -> bool {
        true
    }

    fn preserves_measure(&self) -> bool {
        true
    }

    fn is_free(&self) -> bool {
        !self.has_period_within(T::lit(FREENESS_PROBE_RANGE), T::lit(1e-9))
    }
}

/// The circle `ℝ/ℤ` rotating itself, with a probability density
/// proportional to `∂` restricted to `[0, 1)`. The acting group is compact.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleRotation<T> {
    model: GroupModel<T>,
    density: DensitySpec<T>,
    norm: T,
}

impl<T: Real> CircleRotation<T> {
    pub fn new(density: DensitySpec<T>) -> Result<Self> {
        let density = density.validated()?;
        if density.dim().is_some_and(|d| d != 1) {
            return Err(Error::ModelMismatch("circle densities are one-dimensional".into()));
        }
        let norm = density.mass_between(T::zero(), T::one());
        Ok(Self { model: GroupModel::real_line(), density, norm })
    }

    /// Normalized density at `y ∈ [0, 1)`.
    pub fn density_at(&self, y: T) -> T {
        self.density.eval(&[wrap(y)]) / self.norm
    }
}

impl<T: Real> NonsingularAction<T> for CircleRotation<T> {
    type Point = T;

    fn group(&self) -> &GroupModel<T> {
        &self.model
    }

    fn act(&self, g: &Element<T>, y: &T) -> Result<T> {
        self.model.check(g)?;
        Ok(wrap(*y + g.coord(0)))
    }

    fn nabla(&self, g: &Element<T>, y: &T) -> Result<T> {
        let gy = self.act(g, y)?;
        Ok(self.density_at(gy) / self.density_at(*y))
    }

    fn is_probability(&self) -> bool {
        true
    }

    fn preserves_measure(&self) -> bool {
        self.density.is_constant()
    }

    fn group_period(&self) -> Option<T> {
        Some(T::one())
    }

    fn orbit_breaks(&self, y: &T) -> Vec<T> {
        let mut out = Vec::new();
        for b in self.density.breakpoints_1d() {
            let base = wrap(b) - *y;
            for k in -1..=1 {
                out.push(base + T::from_i32(k).unwrap());
            }
        }
        out
    }
}

/// Diagonal action `g.(x, y) = (g.x, g.y)` of a system with a free
/// probability-preserving auxiliary system. The cocycle is that of the
/// first factor.
#[derive(Clone, Debug)]
pub struct DiagonalProduct<X, Y> {
    base: X,
    aux: Y,
}

/// `diagonal_product`.
pub fn diagonal_product<T, X, Y>(base: X, aux: Y) -> Result<DiagonalProduct<X, Y>>
where
    T: Real,
    X: NonsingularAction<T>,
    Y: NonsingularAction<T>,
{
    if base.group().kind() != aux.group().kind() {
        return Err(Error::ModelMismatch("factors are acted on by different groups".into()));
    }
    if !(aux.is_probability() && aux.preserves_measure()) {
        return Err(Error::Rejected("auxiliary system must be probability preserving".into()));
    }
    if !aux.is_free() {
        return Err(Error::Rejected("auxiliary system must be free".into()));
    }
    Ok(DiagonalProduct { base, aux })
}

impl<X, Y> DiagonalProduct<X, Y> {
    pub fn base(&self) -> &X {
        &self.base
    }

    pub fn aux(&self) -> &Y {
        &self.aux
    }
}

impl<T, X, Y> NonsingularAction<T> for DiagonalProduct<X, Y>
where
    T: Real,
    X: NonsingularAction<T>,
    Y: NonsingularAction<T>,
{
    type Point = (X::Point, Y::Point);

    fn group(&self) -> &GroupModel<T> {
        self.base.group()
    }

    fn act(&self, g: &Element<T>, p: &Self::Point) -> Result<Self::Point> {
        Ok((self.base.act(g, &p.0)?, self.aux.act(g, &p.1)?))
    }

    fn nabla(&self, g: &Element<T>, p: &Self::Point) -> Result<T> {
        self.base.nabla(g, &p.0)
    }

    fn is_probability(&self) -> bool {
        self.base.is_probability()
    }

    fn preserves_measure(&self) -> bool {
        self.base.preserves_measure()
    }

    fn is_free(&self) -> bool {
        true
    }

    fn orbit_breaks(&self, p: &Self::Point) -> Vec<T> {
        self.base.orbit_breaks(&p.0)
    }
}
