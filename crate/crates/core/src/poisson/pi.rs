use crate::cocycle::DensitySpec;
use crate::error::{Error, Result};
use crate::group::{Element, Window};
use crate::scalar::Real;

use super::{rn_star, PointConfiguration};

/// Relative tolerance on the `μ`-masses of paired pieces.
pub const MASS_TOL: f64 = 1e-10;

/// A `μ`-preserving interval exchange of the line: piece `i` (a half-open
/// interval `[a, b)`) is carried onto piece `perm[i]` by conjugating with
/// the `μ`-distribution function. Identity off the pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct PiTransform<T> {
    density: DensitySpec<T>,
    pieces: Vec<(T, T)>,
    perm: Vec<usize>,
}

impl<T: Real> PiTransform<T> {
    pub fn identity(density: DensitySpec<T>) -> Self {
        Self { density, pieces: Vec::new(), perm: Vec::new() }
    }

    /// Pieces must be disjoint and listed left to right; paired pieces must
    /// carry the same mass.
    pub fn from_pieces(density: DensitySpec<T>, pieces: Vec<(T, T)>, perm: Vec<usize>) -> Result<Self> {
        if density.dim().is_some_and(|d| d != 1) {
            return Err(Error::ModelMismatch("interval exchanges live on the line".into()));
        }
        if perm.len() != pieces.len() {
            return Err(Error::Parameter("one target per piece".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &j in &perm {
            if j >= perm.len() || seen[j] {
                return Err(Error::Parameter("pairing is not a permutation".into()));
            }
            seen[j] = true;
        }
        if pieces.iter().any(|&(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Parameter("pieces must be bounded with a < b".into()));
        }
        if pieces.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::Parameter("pieces must be disjoint and sorted".into()));
        }
        let mass: Vec<T> = pieces.iter().map(|&(a, b)| density.mass_between(a, b)).collect();
        for (i, &j) in perm.iter().enumerate() {
            let scale = mass[i].abs().max(T::one());
            if (mass[i] - mass[j]).abs() > T::lit(MASS_TOL) * scale {
                return Err(Error::Parameter(format!("pieces {i} and {j} differ in mass")));
            }
        }
        Ok(Self { density, pieces, perm })
    }

    /// Splits `[lo, hi)` into `k` pieces of equal mass, exchanged by `perm`.
    pub fn equal_mass(density: DensitySpec<T>, lo: T, hi: T, perm: Vec<usize>) -> Result<Self> {
        let k = perm.len();
        if k == 0 || !(lo < hi) {
            return Err(Error::Parameter("need a nonempty support and at least one piece".into()));
        }
        let total = density.mass_between(lo, hi);
        let step = total / T::from_usize_lossy(k);
        let mut cuts = vec![lo];
        for i in 1..k {
            cuts.push(density.quantile_from(lo, step * T::from_usize_lossy(i), hi));
        }
        cuts.push(hi);
        let pieces = cuts.windows(2).map(|w| (w[0], w[1])).collect();
        Self::from_pieces(density, pieces, perm)
    }

    pub fn pieces(&self) -> &[(T, T)] {
        &self.pieces
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        Self { density: self.density.clone(), pieces: self.pieces.clone(), perm: inv }
    }

    /// Whether `x` lies in `Supp π`.
    pub fn in_support(&self, x: T) -> bool {
        self.piece_of(x).is_some()
    }

    fn piece_of(&self, x: T) -> Option<usize> {
        self.pieces.iter().position(|&(a, b)| x >= a && x < b)
    }

    /// Closed hull of the support, `None` for the empty exchange.
    pub fn hull(&self) -> Option<Window<T>> {
        let lo = self.pieces.first()?.0;
        let hi = self.pieces.last()?.1;
        Window::interval(lo, hi).ok()
    }

    pub fn map(&self, x: T) -> T {
        let Some(i) = self.piece_of(x) else { return x };
        let j = self.perm[i];
        if i == j {
            return x;
        }
        let (a, _) = self.pieces[i];
        let (c, d) = self.pieces[j];
        if let DensitySpec::Constant(_) = self.density {
            return (c + (x - a)).min(d);
        }
        let m = self.density.mass_between(a, x);
        self.density.quantile_from(c, m, d)
    }
}

/// `π.p`: support points inside `Supp π` are moved by `π`.
pub fn pi_apply<T: Real>(pi: &PiTransform<T>, p: &PointConfiguration<T>) -> Result<PointConfiguration<T>> {
    if p.model().dim() != 1 {
        return Err(Error::ModelMismatch("interval exchanges act on line configurations".into()));
    }
    if let Some(h) = pi.hull() {
        if !p.window().contains_window(&h) {
            return Err(Error::Margin("support of the exchange leaves the configuration window".into()));
        }
    }
    let points = p.points().iter().map(|x| Element::real(pi.map(x.coord(0)))).collect();
    PointConfiguration::new(*p.model(), *p.window(), points, p.seed(), p.density().clone())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpsilonReport<T> {
    /// `υ_π(p) = α^{N_{Supp π}(p)}`.
    pub upsilon: T,
    /// `∇*_g(π.p) / ∇*_g(p)`.
    pub ratio: T,
    pub count: usize,
    pub pass: bool,
}

/// Checks `∇*_g(π.p) / ∇*_g(p) ∈ [υ⁴, υ⁻⁴]` for `α ≤ inf ∂ ≤ sup ∂ ≤ 1/α`.
pub fn upsilon_bound_check<T: Real>(
    pi: &PiTransform<T>,
    p: &PointConfiguration<T>,
    g: &Element<T>,
    alpha: T,
) -> Result<UpsilonReport<T>> {
    let dens = p.density();
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Parameter("alpha must lie in (0, 1)".into()));
    }
    if dens.inf() < alpha || dens.sup() > alpha.recip() {
        return Err(Error::Parameter("alpha must satisfy alpha <= inf density <= sup density <= 1/alpha".into()));
    }
    let moved = pi_apply(pi, p)?;
    let ratio = rn_star(g, &moved)? / rn_star(g, p)?;
    let count = p.points().iter().filter(|x| pi.in_support(x.coord(0))).count();
    let upsilon = alpha.powi(count as i32);
    let (lo, hi) = (upsilon.powi(4), upsilon.powi(-4));
    let slack = T::lit(1e-12);
    let pass = ratio >= lo * (T::one() - slack) && ratio <= hi * (T::one() + slack);
    Ok(UpsilonReport { upsilon, ratio, count, pass })
}
