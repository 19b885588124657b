//! Poisson suspensions of translation actions on `ℝᵈ`.

mod mc;
mod pi;

pub use mc::{change_of_variables_mc, hopf_classify_suspension, ChangeOfVariables, Functional};
pub use pi::{pi_apply, upsilon_bound_check, PiTransform, UpsilonReport};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::cocycle::{Bump, DensitySpec};
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupModel, QuadratureScheme, Window};
use crate::numerics::{integrate_piecewise, stream_rng};
use crate::scalar::Real;

/// Two sampled points closer than this are treated as a repetition.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// A finite simple configuration, known exactly inside its window.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration<T> {
    model: GroupModel<T>,
    window: Window<T>,
    points: Vec<Element<T>>,
    seed: u64,
    density: DensitySpec<T>,
}

fn euclidean<T: Real>(model: &GroupModel<T>) -> Result<()> {
    match model.kind() {
        GroupKind::Euclidean(_) => Ok(()),
        k => Err(Error::SamplerInapplicable(format!("suspensions are built over R^d, not {}", k.name()))),
    }
}

impl<T: Real> PointConfiguration<T> {
    /// Builds a configuration from explicit points (sorted here).
    pub fn new(
        model: GroupModel<T>,
        window: Window<T>,
        mut points: Vec<Element<T>>,
        seed: u64,
        density: DensitySpec<T>,
    ) -> Result<Self> {
        euclidean(&model)?;
        if window.dim() != model.dim() {
            return Err(Error::ModelMismatch("window dimension differs from the group".into()));
        }
        for p in &points {
            model.check(p)?;
            if !window.contains(p) {
                return Err(Error::Domain(format!("point {:?} outside the window", p.coords())));
            }
        }
        points.sort_by(|a, b| a.lex_cmp(b));
        let tol = T::lit(DUPLICATE_TOL);
        if points.windows(2).any(|w| model.metric_unchecked(&w[0], &w[1]) <= tol) {
            return Err(Error::Domain("configuration has a repeated point".into()));
        }
        Ok(Self { model, window, points, seed, density })
    }

    pub fn model(&self) -> &GroupModel<T> {
        &self.model
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn points(&self) -> &[Element<T>] {
        &self.points
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn density(&self) -> &DensitySpec<T> {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points inside the closed box `a`, without the window check.
    pub fn points_in(&self, a: &Window<T>) -> Vec<&Element<T>> {
        if self.model.dim() == 1 {
            let (lo, hi) = (a.lo()[0], a.hi()[0]);
            let i = self.points.partition_point(|p| p.coord(0) < lo);
            let j = self.points.partition_point(|p| p.coord(0) <= hi);
            return self.points[i..j.max(i)].iter().collect();
        }
        self.points.iter().filter(|p| a.contains(p)).collect()
    }

    /// `N_A(p)` for a closed box `A` inside the window.
    pub fn count_in(&self, a: &Window<T>) -> Result<usize> {
        if !self.window.contains_window(a) {
            return Err(Error::Margin("count set is not inside the configuration window".into()));
        }
        Ok(self.points_in(a).len())
    }

    /// The support as chart coordinates, one row per point.
    pub fn coordinates(&self) -> Vec<Vec<T>> {
        self.points.iter().map(|p| p.coords().to_vec()).collect()
    }
}

/// `sample_config`: a Poisson configuration of intensity `∂` on `W`.
///
/// The count is Poisson with mean `μ(W)`; points are drawn from
/// `∂·1_W / μ(W)` by rejection against `sup ∂`, and a point closer than
/// [`DUPLICATE_TOL`] to an earlier one is redrawn.
pub fn sample_config<T: Real>(
    model: &GroupModel<T>,
    density: &DensitySpec<T>,
    window: &Window<T>,
    seed: u64,
) -> Result<PointConfiguration<T>> {
    euclidean(model)?;
    let density = density.clone().validated()?;
    let d = model.dim();
    if window.dim() != d {
        return Err(Error::ModelMismatch("window dimension differs from the group".into()));
    }
    let mass = density
        .mass_in_box(window.lo(), window.hi())
        .ok_or_else(|| Error::ModelMismatch("density dimension differs from the group".into()))?;
    let sup = density.sup();
    if !mass.is_finite() || !sup.is_finite() || !(sup > T::zero()) {
        return Err(Error::SamplerInapplicable("intensity mass or supremum is not finite on the window".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let n = if mass > T::zero() {
        let pois = Poisson::new(mass.as_f64()).map_err(|e| Error::SamplerInapplicable(e.to_string()))?;
        pois.sample(&mut rng) as usize
    } else {
        0
    };
    let tol = T::lit(DUPLICATE_TOL);
    let mut points: Vec<Element<T>> = Vec::with_capacity(n);
    while points.len() < n {
        let mut c = [T::zero(); 3];
        for (i, ci) in c.iter_mut().enumerate().take(d) {
            *ci = window.lo()[i] + T::lit(rng.random::<f64>()) * window.extent(i);
        }
        if T::lit(rng.random::<f64>()) * sup >= density.eval(&c) {
            continue;
        }
        let e = model.from_chart(&c[..d]);
        if points.iter().any(|q| model.metric_unchecked(q, &e) <= tol) {
            continue;
        }
        points.push(e);
    }
    PointConfiguration::new(*model, *window, points, seed, density)
}

/// `g.p`: every support point moves to `g·x` and the window to `g·W`.
pub fn act<T: Real>(g: &Element<T>, p: &PointConfiguration<T>) -> Result<PointConfiguration<T>> {
    let m = &p.model;
    m.check(g)?;
    let points = p.points.iter().map(|x| m.mul_unchecked(g, x)).collect();
    let window = p.window.shift(g.coords());
    PointConfiguration::new(*m, window, points, p.seed, p.density.clone())
}

/// The configuration with counts `A ↦ p(gA)`: support points move to `g⁻¹·x`.
pub fn pull_back<T: Real>(g: &Element<T>, p: &PointConfiguration<T>) -> Result<PointConfiguration<T>> {
    act(&p.model.inv(g)?, p)
}

/// Chart box `supp ψ ∪ (supp ψ − g)` where `∂(g + x) ≠ ∂(x)` can occur.
fn moved_box<T: Real>(bump: &Bump<T>, g: &Element<T>) -> Window<T> {
    let (lo, hi) = bump.support();
    let s = Window::new(&lo, &hi).expect("validated bump support");
    let back: Vec<T> = g.coords().iter().map(|&c| -c).collect();
    s.hull(&s.shift(&back))
}

/// `∇*_g(p) = exp(−∫(g.∂ − ∂) dλ) · ∏_{x ∈ Supp p} ∂(g x)/∂(x)`.
///
/// For translations on `ℝᵈ` the exponent vanishes for every menu density.
/// With a plateau density only points of `supp ψ ∪ (supp ψ − g)` contribute,
/// and that set must lie in the window.
pub fn rn_star<T: Real>(g: &Element<T>, p: &PointConfiguration<T>) -> Result<T> {
    p.model.check(g)?;
    match &p.density {
        DensitySpec::Constant(_) => Ok(T::one()),
        DensitySpec::Cauchy(_) => Err(Error::Margin(
            "a Cauchy intensity moves every point; no finite window carries the product".into(),
        )),
        DensitySpec::Plateau(bump) => {
            let need = moved_box(bump, g);
            if !p.window.contains_window(&need) {
                return Err(Error::Margin("window does not cover supp(psi) and its translate".into()));
            }
            let dens = &p.density;
            let gc = g.coords();
            let mut prod = T::one();
            for x in p.points_in(&need) {
                let mut y = [T::zero(); 3];
                for (i, yi) in y.iter_mut().enumerate().take(gc.len()) {
                    *yi = x.coord(i) + gc[i];
                }
                prod = prod * dens.eval(&y) / dens.eval(x.coords());
            }
            Ok(prod)
        }
    }
}

/// `∫ |g.∂ − ∂| dλ` and whether it is finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KakutaniReport<T> {
    pub value: T,
    pub pass: bool,
}

/// Integrability of `g.∂ − ∂`. Plateau densities integrate over
/// `supp ψ ∪ (supp ψ − g)` (piecewise on the line); the Cauchy density uses
/// the substitution `x = tan θ`, which leaves a bounded integrand.
pub fn kakutani_check<T: Real>(
    model: &GroupModel<T>,
    density: &DensitySpec<T>,
    g: &Element<T>,
    quad: &QuadratureScheme,
) -> Result<KakutaniReport<T>> {
    euclidean(model)?;
    model.check(g)?;
    let per_unit = T::from_usize_lossy(quad.resolution);
    let value = match density {
        DensitySpec::Constant(_) => T::zero(),
        DensitySpec::Cauchy(c) => {
            let s = g.coord(0);
            let f = |th: T| {
                let x = th.tan();
                *c * ((T::one() + x * x) / (T::one() + (x + s) * (x + s)) - T::one()).abs()
            };
            let h = T::FRAC_PI_2();
            integrate_piecewise(f, -h, h, &[(-s * T::lit(0.5)).atan()], per_unit, 64)
        }
        DensitySpec::Plateau(bump) => {
            if bump.dim() != model.dim() {
                return Err(Error::ModelMismatch("density dimension differs from the group".into()));
            }
            let need = moved_box(bump, g);
            let diff = |x: &Element<T>| {
                let mut y = x.chart();
                for (i, yi) in y.iter_mut().enumerate().take(model.dim()) {
                    *yi = *yi + g.coord(i);
                }
                (bump.eval(&y) - bump.eval(&x.chart())).abs()
            };
            if model.dim() == 1 {
                let s = g.coord(0);
                let mut br = density.breakpoints_1d();
                br.extend(density.breakpoints_1d().into_iter().map(|b| b - s));
                integrate_piecewise(|t| diff(&Element::real(t)), need.lo()[0], need.hi()[0], &br, per_unit, 8)
            } else {
                model.haar_integrate(diff, &need, quad)?
            }
        }
    };
    Ok(KakutaniReport { value, pass: value.is_finite() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> DensitySpec<f64> {
        DensitySpec::plateau_box_1d(0.0, 1.0, 1.0).unwrap()
    }

    fn config(points: &[f64], d: DensitySpec<f64>) -> PointConfiguration<f64> {
        let pts = points.iter().map(|&x| Element::real(x)).collect();
        PointConfiguration::new(GroupModel::real_line(), Window::interval(-10.0, 10.0).unwrap(), pts, 0, d).unwrap()
    }

    #[test]
    fn action_examples() {
        let p = config(&[0.5, 3.2], DensitySpec::Constant(1.0));
        let q = pull_back(&Element::real(2.0), &p).unwrap();
        let xs: Vec<f64> = q.points().iter().map(|e| e.coord(0)).collect();
        assert!((xs[0] + 1.5).abs() < 1e-15 && (xs[1] - 1.2).abs() < 1e-15);
        let a = Window::interval(0.0, 1.0).unwrap();
        let b = Window::interval(2.0, 3.0).unwrap();
        assert_eq!(q.count_in(&a).unwrap(), p.count_in(&b).unwrap());
        assert_eq!(act(&Element::real(0.0), &p).unwrap(), p);
        assert!(matches!(p.count_in(&Window::interval(5.0, 11.0).unwrap()), Err(Error::Margin(_))));
    }

    #[test]
    fn rn_star_examples() {
        let p = config(&[0.5, 3.2], step());
        assert!((rn_star(&Element::real(0.6), &p).unwrap() - 0.5).abs() < 1e-12);
        assert!((rn_star(&Element::real(0.4), &p).unwrap() - 1.0).abs() < 1e-12);
        let flat = config(&[0.5, 3.2], DensitySpec::Constant(1.0));
        assert_eq!(rn_star(&Element::real(123.0), &flat).unwrap(), 1.0);
        assert!(matches!(rn_star(&Element::real(10.5), &p), Err(Error::Margin(_))));
    }

    #[test]
    fn kakutani_examples() {
        let m = GroupModel::real_line();
        let q = QuadratureScheme::grid(1000);
        let k = kakutani_check(&m, &step(), &Element::real(0.5), &q).unwrap();
        assert!((k.value - 1.0).abs() < 1e-12 && k.pass);
        let c = DensitySpec::standard_cauchy();
        let exact = 4.0 / std::f64::consts::PI * 0.5f64.atan();
        let k1 = kakutani_check(&m, &c, &Element::real(1.0), &q).unwrap();
        let k2 = kakutani_check(&m, &c, &Element::real(1.0), &q.doubled()).unwrap();
        assert!((k1.value - exact).abs() < 1e-6, "{k1:?}");
        assert!((k1.value - k2.value).abs() < 1e-6);
        let z = kakutani_check(&m, &DensitySpec::Constant(1.0), &Element::real(3.0), &q).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn sampler_basics() {
        let m = GroupModel::real_line();
        let w = Window::interval(0.0, 10.0).unwrap();
        let p = sample_config(&m, &step(), &w, 7).unwrap();
        assert_eq!(p, sample_config(&m, &step(), &w, 7).unwrap());
        assert!(p.points().iter().all(|x| w.contains(x)));
        let empty = sample_config(&m, &step(), &Window::interval(3.0, 3.0).unwrap(), 1).unwrap();
        assert!(empty.is_empty());
        let lat = GroupModel::<f64>::lattice(1).unwrap();
        assert!(matches!(sample_config(&lat, &step(), &w, 1), Err(Error::SamplerInapplicable(_))));
    }
}
