//! Concrete locally compact second countable groups: the real line and
//! Euclidean spaces of dimension at most three, the integer lattices, and
//! the affine group `{(a, b) : a > 0}` of the line.
//!
//! Elements carry their native coordinates. Windows, quadrature and the
//! metric work in *chart* coordinates, which coincide with the native ones
//! except on the affine group where the chart is `(ln a, b)`. In that chart
//! the left Haar measure `a⁻² da db` reads `e^{-u} du db`.

use std::cmp::Ordering;
use std::marker::PhantomData;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{det_chunk_sum, det_sum, stream_rng};
use crate::scalar::Real;

/// The group menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// `ℝᵈ`, `1 ≤ d ≤ 3`.
    Euclidean(u8),
    /// `ℤᵈ`, `1 ≤ d ≤ 3`.
    Lattice(u8),
    /// The `ax + b` group, `(a, b)·(a', b') = (aa', ab' + b)`.
    Affine,
}

impl GroupKind {
    pub fn dim(self) -> usize {
        match self {
            GroupKind::Euclidean(d) | GroupKind::Lattice(d) => d as usize,
            GroupKind::Affine => 2,
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, GroupKind::Lattice(_))
    }

    pub fn is_abelian(self) -> bool {
        !matches!(self, GroupKind::Affine)
    }

    pub fn name(self) -> String {
        match self {
            GroupKind::Euclidean(1) => "R".into(),
            GroupKind::Euclidean(d) => format!("R{d}"),
            GroupKind::Lattice(d) => format!("Z{d}"),
            GroupKind::Affine => "affine".into(),
        }
    }
}

/// A group element in native coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element<T> {
    kind: GroupKind,
    coords: [T; 3],
}

impl<T: Real> Element<T> {
    fn raw(kind: GroupKind, src: &[T]) -> Self {
        let mut coords = [T::zero(); 3];
        coords[..src.len()].copy_from_slice(src);
        Self { kind, coords }
    }

    /// A point of the real line.
    pub fn real(x: T) -> Self {
        Self::raw(GroupKind::Euclidean(1), &[x])
    }

    /// A point of `ℝᵈ`; panics unless `1 ≤ d ≤ 3`.
    pub fn vector(xs: &[T]) -> Self {
        assert!((1..=3).contains(&xs.len()), "dimension must be 1..=3");
        Self::raw(GroupKind::Euclidean(xs.len() as u8), xs)
    }

    /// A point of `ℤᵈ`; panics unless `1 ≤ d ≤ 3`.
    pub fn lattice(ks: &[i64]) -> Self {
        assert!((1..=3).contains(&ks.len()), "dimension must be 1..=3");
        let xs: Vec<T> = ks.iter().map(|&k| T::from_i64(k).expect("lattice coordinate")).collect();
        Self::raw(GroupKind::Lattice(ks.len() as u8), &xs)
    }

    /// The affine map `t ↦ a t + b`. Positivity of `a` is checked by
    /// [`GroupModel::check`].
    pub fn affine(a: T, b: T) -> Self {
        Self::raw(GroupKind::Affine, &[a, b])
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords[..self.dim()]
    }

    pub fn coord(&self, i: usize) -> T {
        self.coords[i]
    }

    /// Chart coordinates, padded with zeros.
    pub fn chart(&self) -> [T; 3] {
        match self.kind {
            GroupKind::Affine => [self.coords[0].ln(), self.coords[1], T::zero()],
            _ => self.coords,
        }
    }

    /// The total order `≺`: lexicographic on chart coordinates (equivalently
    /// on native coordinates, the chart being monotone).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for i in 0..self.dim() {
            match self.coords[i].partial_cmp(&other.coords[i]) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        Ordering::Equal
    }
}

/// An axis-parallel box in chart coordinates.
///
/// Degenerate (zero width) boxes are allowed; they carry zero Haar measure
/// on continuous groups and are how empty sampling domains are expressed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<T> {
    dim: usize,
    lo: [T; 3],
    hi: [T; 3],
}

impl<T: Real> Window<T> {
    pub fn new(lo: &[T], hi: &[T]) -> Result<Self> {
        if lo.len() != hi.len() || !(1..=3).contains(&lo.len()) {
            return Err(Error::Parameter(format!(
                "window bounds must have equal length 1..=3, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        let mut w = Self { dim: lo.len(), lo: [T::zero(); 3], hi: [T::zero(); 3] };
        for i in 0..lo.len() {
            if !lo[i].is_finite() || !hi[i].is_finite() || lo[i] > hi[i] {
                return Err(Error::Parameter(format!("window axis {i} must satisfy finite lo <= hi")));
            }
            w.lo[i] = lo[i];
            w.hi[i] = hi[i];
        }
        Ok(w)
    }

    pub fn interval(a: T, b: T) -> Result<Self> {
        Self::new(&[a], &[b])
    }

    /// `[a, b]ᵈ`.
    pub fn cube(dim: usize, a: T, b: T) -> Result<Self> {
        Self::new(&vec![a; dim], &vec![b; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> &[T] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[T] {
        &self.hi[..self.dim]
    }

    pub fn extent(&self, axis: usize) -> T {
        self.hi[axis] - self.lo[axis]
    }

    pub fn max_extent(&self) -> T {
        (0..self.dim).map(|i| self.extent(i)).fold(T::zero(), T::max)
    }

    /// Lebesgue volume of the chart box.
    pub fn chart_volume(&self) -> T {
        (0..self.dim).map(|i| self.extent(i)).fold(T::one(), |a, b| a * b)
    }

    pub fn center(&self) -> [T; 3] {
        let mut c = [T::zero(); 3];
        for (i, ci) in c.iter_mut().enumerate().take(self.dim) {
            *ci = (self.lo[i] + self.hi[i]) * T::lit(0.5);
        }
        c
    }

    pub fn contains_chart(&self, p: &[T]) -> bool {
        (0..self.dim).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }

    pub fn contains(&self, g: &Element<T>) -> bool {
        g.dim() == self.dim && self.contains_chart(&g.chart())
    }

    pub fn contains_window(&self, other: &Window<T>) -> bool {
        other.dim == self.dim && (0..self.dim).all(|i| other.lo[i] >= self.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Shrinks every side by `r`; `None` when nothing is left.
    pub fn erode(&self, r: T) -> Option<Self> {
        let mut w = *self;
        for i in 0..self.dim {
            w.lo[i] = self.lo[i] + r;
            w.hi[i] = self.hi[i] - r;
            if w.lo[i] > w.hi[i] {
                return None;
            }
        }
        Some(w)
    }

    pub fn dilate(&self, r: T) -> Self {
        let mut w = *self;
        for i in 0..self.dim {
            w.lo[i] = self.lo[i] - r;
            w.hi[i] = self.hi[i] + r;
        }
        w
    }

    pub fn hull(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut w = *self;
        for i in 0..self.dim {
            w.lo[i] = self.lo[i].min(other.lo[i]);
            w.hi[i] = self.hi[i].max(other.hi[i]);
        }
        w
    }

    /// Shift by a chart vector.
    pub fn shift(&self, by: &[T]) -> Self {
        let mut w = *self;
        for i in 0..self.dim {
            w.lo[i] = self.lo[i] + by[i];
            w.hi[i] = self.hi[i] + by[i];
        }
        w
    }

    /// Integer points of the box, lexicographically ordered.
    pub fn lattice_points(&self) -> Vec<[i64; 3]> {
        let mut ranges = [(0i64, 0i64); 3];
        for (i, r) in ranges.iter_mut().enumerate().take(self.dim) {
            let lo = self.lo[i].ceil().to_i64().unwrap_or(0);
            let hi = self.hi[i].floor().to_i64().unwrap_or(-1);
            *r = (lo, hi);
        }
        let mut out = Vec::new();
        if ranges[..self.dim].iter().any(|&(lo, hi)| lo > hi) {
            return out;
        }
        let mut cur = [ranges[0].0, ranges[1].0, ranges[2].0];
        loop {
            out.push(cur);
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < ranges[axis].1 {
                    cur[axis] += 1;
                    for (j, c) in cur.iter_mut().enumerate().take(self.dim).skip(axis + 1) {
                        *c = ranges[j].0;
                    }
                    break;
                }
            }
        }
    }
}

/// Quadrature method for Haar integrals over windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadMethod {
    /// Midpoint rule on a uniform chart grid.
    Grid,
    /// Uniform chart sampling with Haar density weights.
    MonteCarlo,
}

/// Quadrature settings. Output is a deterministic function of all three
/// fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureScheme {
    pub method: QuadMethod,
    /// Nodes per axis (grid) or total sample count (Monte Carlo).
    pub resolution: usize,
    pub seed: u64,
}

impl QuadratureScheme {
    pub fn new(method: QuadMethod, resolution: usize, seed: u64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Parameter(format!("quadrature resolution must be >= 2, got {resolution}")));
        }
        Ok(Self { method, resolution, seed })
    }

    pub fn grid(resolution: usize) -> Self {
        Self::new(QuadMethod::Grid, resolution, 0).expect("resolution >= 2")
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self::new(QuadMethod::MonteCarlo, samples, seed).expect("samples >= 2")
    }

    /// Same scheme at twice the resolution.
    pub fn doubled(&self) -> Self {
        Self { resolution: self.resolution * 2, ..*self }
    }
}

/// One of the concrete groups, with its Haar measure, modular function and
/// proper metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupModel<T> {
    kind: GroupKind,
    _scalar: PhantomData<T>,
}

impl<T: Real> GroupModel<T> {
    pub fn new(kind: GroupKind) -> Result<Self> {
        match kind {
            GroupKind::Euclidean(d) | GroupKind::Lattice(d) if !(1..=3).contains(&d) => {
                Err(Error::Parameter(format!("dimension must be 1..=3, got {d}")))
            }
            _ => Ok(Self { kind, _scalar: PhantomData }),
        }
    }

    pub fn real_line() -> Self {
        Self { kind: GroupKind::Euclidean(1), _scalar: PhantomData }
    }

    pub fn euclidean(d: u8) -> Result<Self> {
        Self::new(GroupKind::Euclidean(d))
    }

    pub fn lattice(d: u8) -> Result<Self> {
        Self::new(GroupKind::Lattice(d))
    }

    pub fn affine() -> Self {
        Self { kind: GroupKind::Affine, _scalar: PhantomData }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn is_discrete(&self) -> bool {
        self.kind.is_discrete()
    }

    /// Validates that `g` is an element of this group.
    pub fn check(&self, g: &Element<T>) -> Result<()> {
        if g.kind != self.kind {
            return Err(Error::ModelMismatch(format!(
                "element of {} used with group {}",
                g.kind.name(),
                self.kind.name()
            )));
        }
        let c = g.coords();
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        match self.kind {
            GroupKind::Affine if c[0] <= T::zero() => Err(Error::Domain("affine element needs a > 0".into())),
            GroupKind::Lattice(_) if c.iter().any(|x| x.fract() != T::zero()) => {
                Err(Error::Domain("lattice element needs integer coordinates".into()))
            }
            _ => Ok(()),
        }
    }

    /// Builds a checked element from native coordinates.
    pub fn element(&self, coords: &[T]) -> Result<Element<T>> {
        if coords.len() != self.dim() {
            return Err(Error::ModelMismatch(format!(
                "{} needs {} coordinates, got {}",
                self.kind.name(),
                self.dim(),
                coords.len()
            )));
        }
        let g = Element::raw(self.kind, coords);
        self.check(&g)?;
        Ok(g)
    }

    /// Element with the given chart coordinates (no lattice rounding).
    pub fn from_chart(&self, chart: &[T]) -> Element<T> {
        match self.kind {
            GroupKind::Affine => Element::raw(self.kind, &[chart[0].exp(), chart[1]]),
            _ => Element::raw(self.kind, &chart[..self.dim()]),
        }
    }

    pub fn identity(&self) -> Element<T> {
        match self.kind {
            GroupKind::Affine => Element::raw(self.kind, &[T::one(), T::zero()]),
            _ => Element::raw(self.kind, &[T::zero(); 3][..self.dim()]),
        }
    }

    fn same(&self, g: &Element<T>, h: &Element<T>) -> Result<()> {
        if g.kind != self.kind || h.kind != self.kind {
            return Err(Error::ModelMismatch(format!(
                "operands {} and {} in group {}",
                g.kind.name(),
                h.kind.name(),
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Group law.
    pub fn mul(&self, g: &Element<T>, h: &Element<T>) -> Result<Element<T>> {
        self.same(g, h)?;
        Ok(self.mul_unchecked(g, h))
    }

    pub(crate) fn mul_unchecked(&self, g: &Element<T>, h: &Element<T>) -> Element<T> {
        match self.kind {
            GroupKind::Affine => {
                let (a, b) = (g.coords[0], g.coords[1]);
                let (a2, b2) = (h.coords[0], h.coords[1]);
                Element::raw(self.kind, &[a * a2, a * b2 + b])
            }
            _ => {
                let mut c = [T::zero(); 3];
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci = g.coords[i] + h.coords[i];
                }
                Element { kind: self.kind, coords: c }
            }
        }
    }

    pub fn inv(&self, g: &Element<T>) -> Result<Element<T>> {
        self.check(g)?;
        Ok(self.inv_unchecked(g))
    }

    pub(crate) fn inv_unchecked(&self, g: &Element<T>) -> Element<T> {
        match self.kind {
            GroupKind::Affine => {
                let (a, b) = (g.coords[0], g.coords[1]);
                Element::raw(self.kind, &[a.recip(), -b / a])
            }
            _ => {
                let mut c = g.coords;
                for ci in c.iter_mut() {
                    *ci = -*ci;
                }
                Element { kind: self.kind, coords: c }
            }
        }
    }

    /// The proper compatible metric: Euclidean on `ℝᵈ`/`ℤᵈ`, and
    /// `|ln a − ln a'| + |b − b'|` on the affine group.
    pub fn metric(&self, g: &Element<T>, h: &Element<T>) -> Result<T> {
        self.same(g, h)?;
        Ok(self.metric_unchecked(g, h))
    }

    pub(crate) fn metric_unchecked(&self, g: &Element<T>, h: &Element<T>) -> T {
        match self.kind {
            GroupKind::Affine => (g.coords[0].ln() - h.coords[0].ln()).abs() + (g.coords[1] - h.coords[1]).abs(),
            _ => {
                let mut s = T::zero();
                for i in 0..self.dim() {
                    let d = g.coords[i] - h.coords[i];
                    s = s + d * d;
                }
                s.sqrt()
            }
        }
    }

    /// Orbit distance for the translation action on the group itself:
    /// `d_o(x, w) = d(e, g)` where `g·x = w`, i.e. `d(e, w x⁻¹)`.
    /// Equals `metric(x, w)` on the abelian groups.
    pub fn orbit_distance(&self, x: &Element<T>, w: &Element<T>) -> T {
        match self.kind {
            GroupKind::Affine => {
                let g = self.mul_unchecked(w, &self.inv_unchecked(x));
                self.metric_unchecked(&self.identity(), &g)
            }
            _ => self.metric_unchecked(x, w),
        }
    }

    /// Modular function with `λ(Sg) = Δ(g) λ(S)`: identically one except on
    /// the affine group, where `Δ(a, b) = 1/a`.
    pub fn modular(&self, g: &Element<T>) -> Result<T> {
        self.check(g)?;
        Ok(match self.kind {
            GroupKind::Affine => g.coords[0].recip(),
            _ => T::one(),
        })
    }

    /// Density of left Haar measure with respect to Lebesgue measure in the
    /// chart (counting measure on lattices).
    pub fn haar_density_chart(&self, chart: &[T]) -> T {
        match self.kind {
            GroupKind::Affine => (-chart[0]).exp(),
            _ => T::one(),
        }
    }

    /// Chart box circumscribing the closed ball `B(e, r)`.
    pub fn ball_window(&self, r: T) -> Window<T> {
        let r = match self.kind {
            GroupKind::Lattice(_) => r.floor(),
            _ => r,
        };
        Window::cube(self.dim(), -r, r).expect("radius is nonnegative")
    }

    /// `B(e, 2⁰), …, B(e, 2^{n_max})` as windows.
    pub fn ball_filtration(&self, n_max: usize) -> Vec<Window<T>> {
        (0..=n_max).map(|k| self.ball_window(T::lit(2f64.powi(k as i32)))).collect()
    }

    /// Native-coordinate bounds `(lo, hi)` satisfied by every point of
    /// `B(e, r)`; the witness of properness.
    pub fn coordinate_bound(&self, r: T) -> (Vec<T>, Vec<T>) {
        match self.kind {
            GroupKind::Affine => (vec![(-r).exp(), -r], vec![r.exp(), r]),
            _ => (vec![-r; self.dim()], vec![r; self.dim()]),
        }
    }

    /// Chart box containing every `w` with `d_o(x, w) ≤ r`.
    pub fn orbit_ball_box(&self, x: &Element<T>, r: T) -> Window<T> {
        let c = x.chart();
        match self.kind {
            GroupKind::Affine => {
                let b = c[1];
                let (blo, bhi) = if b >= T::zero() {
                    ((-r).exp() * b - r, r.exp() * b + r)
                } else {
                    (r.exp() * b - r, (-r).exp() * b + r)
                };
                Window::new(&[c[0] - r, blo], &[c[0] + r, bhi]).expect("finite box")
            }
            _ => Window::new(&c[..self.dim()], &c[..self.dim()]).expect("finite box").dilate(r),
        }
    }

    /// Chart bounding box of the right translate `{y·h : y ∈ w}`.
    pub fn right_translate_box(&self, w: &Window<T>, h: &Element<T>) -> Window<T> {
        match self.kind {
            GroupKind::Affine => {
                let hc = h.chart();
                let (u0, u1) = (w.lo[0], w.hi[0]);
                let s0 = u0.exp() * hc[1];
                let s1 = u1.exp() * hc[1];
                Window::new(&[u0 + hc[0], s0.min(s1) + w.lo[1]], &[u1 + hc[0], s0.max(s1) + w.hi[1]])
                    .expect("finite box")
            }
            _ => w.shift(h.coords()),
        }
    }

    /// Approximates `∫_w f dλ` (exact counting sum on lattices).
    ///
    /// Grid error is `O(1/resolution)` for Lipschitz integrands and
    /// `O(1/resolution²)` for smooth ones.
    pub fn haar_integrate<F>(&self, f: F, w: &Window<T>, q: &QuadratureScheme) -> Result<T>
    where
        F: Fn(&Element<T>) -> T + Sync,
    {
        if w.dim() != self.dim() {
            return Err(Error::ModelMismatch(format!(
                "window of dimension {} for group {}",
                w.dim(),
                self.kind.name()
            )));
        }
        let total = if self.is_discrete() {
            let pts = w.lattice_points();
            det_sum(pts.len(), |i| {
                let c: Vec<T> = pts[i][..self.dim()].iter().map(|&k| T::from_i64(k).unwrap()).collect();
                f(&self.from_chart(&c))
            })
        } else {
            let d = self.dim();
            if (0..d).any(|i| w.extent(i) == T::zero()) {
                return Ok(T::zero());
            }
            match q.method {
                QuadMethod::Grid => {
                    let n = q.resolution;
                    let nt = T::from_usize_lossy(n);
                    let h: Vec<T> = (0..d).map(|i| w.extent(i) / nt).collect();
                    let cell = h.iter().fold(T::one(), |a, &b| a * b);
                    let cells = n.pow(d as u32);
                    det_sum(cells, |mut idx| {
                        let mut c = [T::zero(); 3];
                        for i in (0..d).rev() {
                            let k = idx % n;
                            idx /= n;
                            c[i] = w.lo[i] + (T::from_usize_lossy(k) + T::lit(0.5)) * h[i];
                        }
                        f(&self.from_chart(&c)) * self.haar_density_chart(&c) * cell
                    })
                }
                QuadMethod::MonteCarlo => {
                    let n = q.resolution;
                    let scale = w.chart_volume() / T::from_usize_lossy(n);
                    det_chunk_sum(n, |range, chunk| {
                        let mut rng = stream_rng(q.seed, chunk);
                        let vals: Vec<T> = range
                            .map(|_| {
                                let mut c = [T::zero(); 3];
                                for (i, ci) in c.iter_mut().enumerate().take(d) {
                                    let u: f64 = rng.random();
                                    *ci = w.lo[i] + T::lit(u) * w.extent(i);
                                }
                                f(&self.from_chart(&c)) * self.haar_density_chart(&c)
                            })
                            .collect();
                        crate::numerics::pairwise_sum(&vals)
                    }) * scale
                }
            }
        };
        if !total.is_finite() {
            return Err(Error::IntegrationDomain("integrand is not finite on the window".into()));
        }
        Ok(total)
    }

    /// `λ(w)`.
    pub fn haar_measure(&self, w: &Window<T>, q: &QuadratureScheme) -> Result<T> {
        if self.kind == GroupKind::Affine && w.dim() == 2 {
            // closed form of ∫ e^{-u} du db
            return Ok(((-w.lo[0]).exp() - (-w.hi[0]).exp()) * w.extent(1));
        }
        if !self.is_discrete() && w.dim() == self.dim() {
            return Ok(w.chart_volume());
        }
        self.haar_integrate(|_| T::one(), w, q)
    }

    /// A point drawn uniformly in chart coordinates from `w` (rounded to the
    /// lattice on discrete groups).
    pub fn sample_chart<R: Rng + ?Sized>(&self, w: &Window<T>, rng: &mut R) -> Element<T> {
        let mut c = [T::zero(); 3];
        for (i, ci) in c.iter_mut().enumerate().take(self.dim()) {
            let u: f64 = rng.random();
            *ci = w.lo[i] + T::lit(u) * w.extent(i);
            if self.is_discrete() {
                *ci = ci.round().max(w.lo[i].ceil()).min(w.hi[i].floor());
            }
        }
        self.from_chart(&c)
    }
}
