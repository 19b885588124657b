use crate::error::{Error, Result};
use crate::scalar::Real;

/// Compactly supported perturbation `ψ` of a plateau density `1 + ψ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Bump<T> {
    /// `height` on the chart box `[lo, hi)`.
    Box { lo: Vec<T>, hi: Vec<T>, height: T },
    /// `height · ∏ᵢ (1 + cos(π (xᵢ − cᵢ)/r)) / 2` on `|xᵢ − cᵢ| < r`.
    Cosine { center: Vec<T>, radius: T, height: T },
}

/// Closed-form density `∂ = dμ/dλ`, evaluated on chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum DensitySpec<T> {
    Constant(T),
    /// `1 + ψ` with `ψ > −1`.
    Plateau(Bump<T>),
    /// `c / (1 + x²)` on the line.
    Cauchy(T),
}

impl<T: Real> Bump<T> {
    pub fn dim(&self) -> usize {
        match self {
            Bump::Box { lo, .. } => lo.len(),
            Bump::Cosine { center, .. } => center.len(),
        }
    }

    pub fn height(&self) -> T {
        match self {
            Bump::Box { height, .. } | Bump::Cosine { height, .. } => *height,
        }
    }

    /// Closed chart box containing the support.
    pub fn support(&self) -> (Vec<T>, Vec<T>) {
        match self {
            Bump::Box { lo, hi, .. } => (lo.clone(), hi.clone()),
            Bump::Cosine { center, radius, .. } => (
                center.iter().map(|&c| c - *radius).collect(),
                center.iter().map(|&c| c + *radius).collect(),
            ),
        }
    }

    pub fn eval(&self, x: &[T]) -> T {
        match self {
            Bump::Box { lo, hi, height } => {
                if (0..lo.len()).all(|i| x[i] >= lo[i] && x[i] < hi[i]) {
                    *height
                } else {
                    T::zero()
                }
            }
            Bump::Cosine { center, radius, height } => {
                let mut v = *height;
                for i in 0..center.len() {
                    let t = (x[i] - center[i]) / *radius;
                    if t.abs() >= T::one() {
                        return T::zero();
                    }
                    v = v * (T::one() + (T::PI() * t).cos()) * T::lit(0.5);
                }
                v
            }
        }
    }

    /// Primitive of the unit-height profile along `axis`, vanishing left of
    /// the support.
    fn axis_primitive(&self, axis: usize, x: T) -> T {
        match self {
            Bump::Box { lo, hi, .. } => (x.min(hi[axis]) - lo[axis]).max(T::zero()),
            Bump::Cosine { center, radius, .. } => {
                let y = ((x - center[axis]) / *radius).max(-T::one()).min(T::one());
                *radius * T::lit(0.5) * (y + T::one() + (T::PI() * y).sin() / T::PI())
            }
        }
    }

    fn primitive_1d(&self, x: T) -> T {
        self.height() * self.axis_primitive(0, x)
    }

    /// `∫ ψ` over the chart box `[lo, hi]`.
    pub fn mass_in_box(&self, lo: &[T], hi: &[T]) -> T {
        (0..self.dim()).fold(self.height(), |acc, i| {
            acc * (self.axis_primitive(i, hi[i]) - self.axis_primitive(i, lo[i])).max(T::zero())
        })
    }

    /// `∫ ψ dx` over the whole chart space.
    pub fn mass(&self) -> T {
        match self {
            Bump::Box { lo, hi, height } => (0..lo.len()).fold(*height, |acc, i| acc * (hi[i] - lo[i])),
            Bump::Cosine { center, radius, height } => *height * radius.powi(center.len() as i32),
        }
    }
}

impl<T: Real> DensitySpec<T> {
    /// `1 + height` on `[lo, hi)` of the line.
    pub fn plateau_box_1d(lo: T, hi: T, height: T) -> Result<Self> {
        Self::Plateau(Bump::Box { lo: vec![lo], hi: vec![hi], height }).validated()
    }

    /// Cauchy density normalized to a probability.
    pub fn standard_cauchy() -> Self {
        Self::Cauchy(T::FRAC_1_PI())
    }

    /// Checks positivity and well-formedness.
    pub fn validated(self) -> Result<Self> {
        match &self {
            DensitySpec::Constant(c) if !(*c > T::zero()) || !c.is_finite() => {
                Err(Error::Parameter("constant density must be positive".into()))
            }
            DensitySpec::Cauchy(c) if !(*c > T::zero()) || !c.is_finite() => {
                Err(Error::Parameter("Cauchy scale must be positive".into()))
            }
            DensitySpec::Plateau(b) => {
                let h = b.height();
                if !(h > -T::one()) || !h.is_finite() {
                    return Err(Error::Parameter("plateau needs height > -1".into()));
                }
                if !(1..=3).contains(&b.dim()) {
                    return Err(Error::Parameter("bump dimension must be 1..=3".into()));
                }
                match b {
                    Bump::Box { lo, hi, .. } => {
                        if lo.len() != hi.len() || (0..lo.len()).any(|i| !(lo[i] < hi[i])) {
                            return Err(Error::Parameter("plateau box needs lo < hi on every axis".into()));
                        }
                    }
                    Bump::Cosine { radius, .. } => {
                        if !(*radius > T::zero()) {
                            return Err(Error::Parameter("cosine bump radius must be positive".into()));
                        }
                    }
                }
                Ok(self)
            }
            _ => Ok(self),
        }
    }

    /// Dimension the density is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            DensitySpec::Constant(_) => None,
            DensitySpec::Plateau(b) => Some(b.dim()),
            DensitySpec::Cauchy(_) => Some(1),
        }
    }

    pub fn eval(&self, x: &[T]) -> T {
        match self {
            DensitySpec::Constant(c) => *c,
            DensitySpec::Plateau(b) => T::one() + b.eval(x),
            DensitySpec::Cauchy(c) => *c / (T::one() + x[0] * x[0]),
        }
    }

    pub fn inf(&self) -> T {
        match self {
            DensitySpec::Constant(c) => *c,
            DensitySpec::Plateau(b) => T::one() + b.height().min(T::zero()),
            DensitySpec::Cauchy(_) => T::zero(),
        }
    }

    pub fn sup(&self) -> T {
        match self {
            DensitySpec::Constant(c) => *c,
            DensitySpec::Plateau(b) => T::one() + b.height().max(T::zero()),
            DensitySpec::Cauchy(c) => *c,
        }
    }

    /// Total Lebesgue mass on the chart space; `None` when infinite.
    pub fn mass(&self) -> Option<T> {
        match self {
            DensitySpec::Cauchy(c) => Some(*c * T::PI()),
            _ => None,
        }
    }

    pub fn is_probability(&self) -> bool {
        self.mass().is_some_and(|m| (m - T::one()).abs() <= T::lit(1e-9))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DensitySpec::Constant(_))
    }

    /// The perturbation of a plateau density.
    pub fn bump(&self) -> Option<&Bump<T>> {
        match self {
            DensitySpec::Plateau(b) => Some(b),
            _ => None,
        }
    }

    /// Points of the line where the density or its derivative jumps.
    pub fn breakpoints_1d(&self) -> Vec<T> {
        match self {
            DensitySpec::Plateau(Bump::Box { lo, hi, .. }) if lo.len() == 1 => vec![lo[0], hi[0]],
            DensitySpec::Plateau(Bump::Cosine { center, radius, .. }) if center.len() == 1 => {
                vec![center[0] - *radius, center[0], center[0] + *radius]
            }
            _ => Vec::new(),
        }
    }

    /// `μ([a, b])` on the line in closed form.
    pub fn mass_between(&self, a: T, b: T) -> T {
        match self {
            DensitySpec::Constant(c) => *c * (b - a),
            DensitySpec::Plateau(bump) => (b - a) + bump.primitive_1d(b) - bump.primitive_1d(a),
            DensitySpec::Cauchy(c) => *c * (b.atan() - a.atan()),
        }
    }

    /// `μ` of the chart box `[lo, hi]`; `None` when the dimensions differ.
    pub fn mass_in_box(&self, lo: &[T], hi: &[T]) -> Option<T> {
        if self.dim().is_some_and(|d| d != lo.len()) {
            return None;
        }
        let vol = (0..lo.len()).fold(T::one(), |acc, i| acc * (hi[i] - lo[i]).max(T::zero()));
        Some(match self {
            DensitySpec::Constant(c) => *c * vol,
            DensitySpec::Plateau(b) => vol + b.mass_in_box(lo, hi),
            DensitySpec::Cauchy(_) => self.mass_between(lo[0], hi[0]),
        })
    }

    /// Inverse of `t ↦ μ([a, t])`: the `t ≥ a` with `μ([a, t]) = m`, by
    /// bisection inside `[a, b_max]`.
    pub fn quantile_from(&self, a: T, m: T, b_max: T) -> T {
        let (mut lo, mut hi) = (a, b_max);
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if self.mass_between(a, mid) < m {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * (T::one() + hi.abs()) {
                break;
            }
        }
        (lo + hi) * T::lit(0.5)
    }
}
