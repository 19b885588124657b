//! Compact subsets of a group: boxes, unions of half-open intervals of the
//! line, finite lattice sets, and fibered sets whose sections along the last
//! chart axis are resolved to machine precision.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupModel, QuadratureScheme, Window};
use crate::numerics::{integrate_piecewise, pairwise_sum};
use crate::scalar::Real;

/// Bisection steps used to locate fiber endpoints.
const BISECT_STEPS: usize = 60;

/// A compact region of a group, in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Region<T> {
    Box(Window<T>),
    /// Sorted disjoint intervals `(a, b]` of the line.
    Intervals(Vec<(T, T)>),
    /// Sorted distinct lattice points.
    Points { dim: usize, points: Vec<[i64; 3]> },
    /// A set resolved column by column.
    Fibered(Fibered<T>),
}

/// A set described by its sections along the last chart axis over a grid of
/// columns covering the remaining axes.
///
/// Each column is sampled at its center; inside a column the set is taken to
/// be the product of the column cell with the section found there. Section
/// endpoints are located by bisection, so the only discretization error is
/// the column width.
#[derive(Clone, Debug, PartialEq)]
pub struct Fibered<T> {
    bbox: Window<T>,
    cols: usize,
    fibers: Vec<Vec<(T, T)>>,
}

impl<T: Real> Fibered<T> {
    /// Resolves `{c ∈ bbox : member(c)}` with `cols` columns per base axis
    /// and `scan` probes per column. Components thinner than the probe
    /// spacing may be missed.
    pub fn from_predicate<P>(bbox: Window<T>, cols: usize, scan: usize, member: P) -> Self
    where
        P: Fn(&[T; 3]) -> bool + Sync,
    {
        let d = bbox.dim();
        let cols = cols.max(1);
        let scan = scan.max(2);
        let ncols = cols.pow((d - 1) as u32);
        let last = d - 1;
        let fibers: Vec<Vec<(T, T)>> = (0..ncols)
            .into_par_iter()
            .map(|ci| {
                let mut c = column_center(&bbox, cols, ci);
                let lo = bbox.lo()[last];
                let hi = bbox.hi()[last];
                let at = |t: T, c: &mut [T; 3]| {
                    c[last] = t;
                    member(c)
                };
                let step = (hi - lo) / T::from_usize_lossy(scan);
                let mut out = Vec::new();
                let mut prev_t = lo;
                let mut prev_in = at(lo, &mut c);
                let mut start = if prev_in { Some(lo) } else { None };
                for k in 1..=scan {
                    let t = if k == scan { hi } else { lo + T::from_usize_lossy(k) * step };
                    let now_in = at(t, &mut c);
                    if now_in != prev_in {
                        let (mut a, mut b) = (prev_t, t);
                        for _ in 0..BISECT_STEPS {
                            let m = (a + b) * T::lit(0.5);
                            if at(m, &mut c) == prev_in {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        let edge = (a + b) * T::lit(0.5);
                        if now_in {
                            start = Some(edge);
                        } else if let Some(s) = start.take() {
                            out.push((s, edge));
                        }
                    }
                    prev_t = t;
                    prev_in = now_in;
                }
                if let Some(s) = start {
                    out.push((s, hi));
                }
                out
            })
            .collect();
        Self { bbox, cols, fibers }
    }

    pub fn bbox(&self) -> &Window<T> {
        &self.bbox
    }

    pub fn columns(&self) -> usize {
        self.fibers.len()
    }

    /// Section of column `ci`.
    pub fn fiber(&self, ci: usize) -> &[(T, T)] {
        &self.fibers[ci]
    }

    fn column_of(&self, c: &[T]) -> Option<usize> {
        let d = self.bbox.dim();
        let mut idx = 0usize;
        for i in 0..d - 1 {
            let w = self.bbox.extent(i);
            if c[i] < self.bbox.lo()[i] || c[i] > self.bbox.hi()[i] {
                return None;
            }
            let k = if w > T::zero() {
                ((c[i] - self.bbox.lo()[i]) / w * T::from_usize_lossy(self.cols)).floor().to_usize().unwrap_or(0)
            } else {
                0
            };
            idx = idx * self.cols + k.min(self.cols - 1);
        }
        Some(idx)
    }

    pub fn contains_chart(&self, c: &[T]) -> bool {
        let last = self.bbox.dim() - 1;
        match self.column_of(c) {
            Some(ci) => self.fibers[ci].iter().any(|&(a, b)| c[last] > a && c[last] <= b),
            None => false,
        }
    }

    fn base_cell_volume(&self) -> T {
        let d = self.bbox.dim();
        let n = T::from_usize_lossy(self.cols);
        (0..d - 1).map(|i| self.bbox.extent(i) / n).fold(T::one(), |a, b| a * b)
    }
}

fn column_center<T: Real>(bbox: &Window<T>, cols: usize, mut ci: usize) -> [T; 3] {
    let d = bbox.dim();
    let mut c = [T::zero(); 3];
    let n = T::from_usize_lossy(cols);
    for i in (0..d - 1).rev() {
        let k = ci % cols;
        ci /= cols;
        c[i] = bbox.lo()[i] + (T::from_usize_lossy(k) + T::lit(0.5)) * bbox.extent(i) / n;
    }
    c
}

/// Sorts and merges `(a, b]` intervals, dropping empty ones.
pub fn merge_intervals<T: Real>(mut iv: Vec<(T, T)>) -> Vec<(T, T)> {
    iv.retain(|&(a, b)| b > a);
    iv.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite interval endpoints"));
    let mut out: Vec<(T, T)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

impl<T: Real> Region<T> {
    /// Union of `(a, b]` intervals.
    pub fn intervals(iv: Vec<(T, T)>) -> Self {
        Region::Intervals(merge_intervals(iv))
    }

    pub fn points(dim: usize, mut points: Vec<[i64; 3]>) -> Self {
        points.sort_unstable();
        points.dedup();
        Region::Points { dim, points }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box(w) => w.dim(),
            Region::Intervals(_) => 1,
            Region::Points { dim, .. } => *dim,
            Region::Fibered(f) => f.bbox.dim(),
        }
    }

    pub fn contains_chart(&self, c: &[T]) -> bool {
        match self {
            Region::Box(w) => w.contains_chart(c),
            Region::Intervals(iv) => iv.iter().any(|&(a, b)| c[0] > a && c[0] <= b),
            Region::Points { dim, points } => {
                let mut key = [0i64; 3];
                for i in 0..*dim {
                    if c[i].fract() != T::zero() {
                        return false;
                    }
                    key[i] = c[i].to_i64().unwrap_or(i64::MIN);
                }
                points.binary_search(&key).is_ok()
            }
            Region::Fibered(f) => f.contains_chart(c),
        }
    }

    pub fn contains(&self, g: &Element<T>) -> bool {
        g.dim() == self.dim() && self.contains_chart(&g.chart())
    }

    /// Chart bounding box; `None` for an empty region.
    pub fn bounding_box(&self) -> Option<Window<T>> {
        match self {
            Region::Box(w) => Some(*w),
            Region::Intervals(iv) => {
                let (a, b) = (iv.first()?.0, iv.last()?.1);
                Window::interval(a, b).ok()
            }
            Region::Points { dim, points } => {
                let first = points.first()?;
                let mut lo = *first;
                let mut hi = *first;
                for p in points {
                    for i in 0..*dim {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                let lo: Vec<T> = lo[..*dim].iter().map(|&k| T::from_i64(k).unwrap()).collect();
                let hi: Vec<T> = hi[..*dim].iter().map(|&k| T::from_i64(k).unwrap()).collect();
                Window::new(&lo, &hi).ok()
            }
            Region::Fibered(f) => {
                let last = f.bbox.dim() - 1;
                let mut lo = T::infinity();
                let mut hi = T::neg_infinity();
                for fib in &f.fibers {
                    for &(a, b) in fib {
                        lo = lo.min(a);
                        hi = hi.max(b);
                    }
                }
                if lo > hi {
                    return None;
                }
                let mut wlo = f.bbox.lo().to_vec();
                let mut whi = f.bbox.hi().to_vec();
                wlo[last] = lo;
                whi[last] = hi;
                Window::new(&wlo, &whi).ok()
            }
        }
    }

    fn check_model(&self, model: &GroupModel<T>) -> Result<()> {
        let ok = match (self, model.kind()) {
            (Region::Intervals(_), GroupKind::Euclidean(1)) => true,
            (Region::Intervals(_), _) => false,
            (Region::Points { .. }, GroupKind::Lattice(_)) => true,
            (Region::Points { .. }, _) => false,
            _ => true,
        };
        if !ok || self.dim() != model.dim() {
            return Err(Error::ModelMismatch(format!("region does not live in {}", model.kind().name())));
        }
        Ok(())
    }

    /// `λ(self)`.
    pub fn measure(&self, model: &GroupModel<T>, q: &QuadratureScheme) -> Result<T> {
        self.check_model(model)?;
        match self {
            Region::Box(w) => model.haar_measure(w, q),
            Region::Intervals(iv) => {
                let lens: Vec<T> = iv.iter().map(|&(a, b)| b - a).collect();
                Ok(pairwise_sum(&lens))
            }
            Region::Points { points, .. } => Ok(T::from_usize_lossy(points.len())),
            Region::Fibered(f) => {
                let d = f.bbox.dim();
                let last = d - 1;
                let cell = f.base_cell_volume();
                let parts: Vec<T> = (0..f.fibers.len())
                    .map(|ci| {
                        let c = column_center(&f.bbox, f.cols, ci);
                        let len: T = f.fibers[ci].iter().map(|&(a, b)| b - a).fold(T::zero(), |x, y| x + y);
                        let mut cc = c;
                        cc[last] = T::zero();
                        len * model.haar_density_chart(&cc) * cell
                    })
                    .collect();
                Ok(pairwise_sum(&parts))
            }
        }
    }

    /// `∫_self f dλ`. On the line `breaks` lists the points where `f` may
    /// jump; one-dimensional pieces use `q.resolution` nodes per unit length.
    pub fn integrate<F>(&self, model: &GroupModel<T>, f: F, q: &QuadratureScheme, breaks: &[T]) -> Result<T>
    where
        F: Fn(&Element<T>) -> T + Sync,
    {
        self.check_model(model)?;
        let per_unit = T::from_usize_lossy(q.resolution);
        let total = match self {
            Region::Box(w) if model.kind() == GroupKind::Euclidean(1) => {
                integrate_piecewise(|t| f(&Element::real(t)), w.lo()[0], w.hi()[0], breaks, per_unit, 8)
            }
            Region::Box(w) => return model.haar_integrate(f, w, q),
            Region::Intervals(iv) => {
                let parts: Vec<T> = iv
                    .iter()
                    .map(|&(a, b)| integrate_piecewise(|t| f(&Element::real(t)), a, b, breaks, per_unit, 8))
                    .collect();
                pairwise_sum(&parts)
            }
            Region::Points { dim, points } => {
                let vals: Vec<T> = points
                    .iter()
                    .map(|p| {
                        let c: Vec<T> = p[..*dim].iter().map(|&k| T::from_i64(k).unwrap()).collect();
                        f(&model.from_chart(&c))
                    })
                    .collect();
                pairwise_sum(&vals)
            }
            Region::Fibered(fb) => {
                let last = fb.bbox.dim() - 1;
                let cell = fb.base_cell_volume();
                let parts: Vec<T> = (0..fb.fibers.len())
                    .into_par_iter()
                    .map(|ci| {
                        let c0 = column_center(&fb.bbox, fb.cols, ci);
                        let pieces: Vec<T> = fb.fibers[ci]
                            .iter()
                            .map(|&(a, b)| {
                                integrate_piecewise(
                                    |t| {
                                        let mut c = c0;
                                        c[last] = t;
                                        f(&model.from_chart(&c)) * model.haar_density_chart(&c)
                                    },
                                    a,
                                    b,
                                    &[],
                                    per_unit,
                                    8,
                                )
                            })
                            .collect();
                        pairwise_sum(&pieces) * cell
                    })
                    .collect();
                pairwise_sum(&parts)
            }
        };
        if !total.is_finite() {
            return Err(Error::IntegrationDomain("integrand is not finite on the region".into()));
        }
        Ok(total)
    }

    /// Translate of a one-dimensional region by `t`.
    pub fn shifted(&self, t: T) -> Option<Self> {
        match self {
            Region::Intervals(iv) => Some(Region::Intervals(iv.iter().map(|&(a, b)| (a + t, b + t)).collect())),
            Region::Box(w) if w.dim() == 1 => Some(Region::Box(w.shift(&[t]))),
            _ => None,
        }
    }
}
