//! Lacunary cocompact nets for the translation action of a group on itself,
//! the orbit Voronoi tessellation they induce, and the compact orbit
//! equivalence relation whose classes are the tiles.
//!
//! Distances to net points are orbit distances `d_o(x, w) = d(e, w x⁻¹)`
//! (the size of the group element carrying `x` to `w`). On the abelian
//! groups this is the metric itself.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupModel, QuadratureScheme, Window};
use crate::region::{Fibered, Region};
use crate::scalar::Real;

/// Relative tolerance under which two orbit distances count as a tie.
pub const TIE_TOL: f64 = 1e-9;

/// Relative slack when accepting a scan candidate at exactly `r_pack`.
const PACK_SLACK: f64 = 1e-12;

/// A compact orbit equivalence relation, queried through class labels and
/// displacement sets `G_E(x) = {g : (x, g.x) ∈ E}`.
pub trait CompactOer<T: Real> {
    type Point;

    /// Label of the class of `x`; equal labels mean equivalent points.
    fn class_of(&self, x: &Self::Point) -> Result<u64>;

    /// The displacement set of `x`.
    fn displacement(&self, x: &Self::Point) -> Result<Region<T>>;
}

/// A finite net inside a window, sorted by `≺`.
#[derive(Clone, Debug)]
pub struct Net<T> {
    model: GroupModel<T>,
    window: Window<T>,
    points: Vec<Element<T>>,
    r_pack: T,
    r_cover: T,
    cell: T,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

/// Nearest-net-point allocation of a query point.
#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiAllocation<T> {
    pub x: Element<T>,
    /// `r_o(x)`, the orbit distance to the net.
    pub radius: T,
    /// Indices of all minimizers within the tie tolerance, ascending.
    pub candidates: Vec<usize>,
    /// Index of the `≺`-least minimizer, `τ_o(x)`.
    pub owner: usize,
}

fn bucket_key<T: Real>(c: &[T], cell: T, dim: usize) -> [i64; 3] {
    let mut k = [0i64; 3];
    for i in 0..dim {
        k[i] = (c[i] / cell).floor().to_i64().unwrap_or(0);
    }
    k
}

/// Upper bound on `d(e, h⁻¹)` given `d(e, h) ≤ r`.
pub fn inverse_radius<T: Real>(model: &GroupModel<T>, r: T) -> T {
    match model.kind() {
        GroupKind::Affine => r * r.exp(),
        _ => r,
    }
}

impl<T: Real> Net<T> {
    fn empty(model: GroupModel<T>, window: Window<T>, r_pack: T) -> Self {
        let cell = if r_pack > T::zero() { r_pack } else { T::one() };
        Self { model, window, points: Vec::new(), r_pack, r_cover: T::zero(), cell, buckets: HashMap::new() }
    }

    fn insert(&mut self, g: Element<T>) {
        let key = bucket_key(&g.chart(), self.cell, self.model.dim());
        self.buckets.entry(key).or_default().push(self.points.len());
        self.points.push(g);
    }

    /// Indices of net points whose chart coordinates fall in `b`.
    fn query_box(&self, b: &Window<T>) -> Vec<usize> {
        let d = self.model.dim();
        let lo = bucket_key(b.lo(), self.cell, d);
        let hi = bucket_key(b.hi(), self.cell, d);
        let cells = (0..d).fold(1f64, |acc, i| acc * (hi[i] - lo[i] + 1) as f64);
        if cells > self.points.len() as f64 {
            return (0..self.points.len()).filter(|&i| b.contains(&self.points[i])).collect();
        }
        let mut out = Vec::new();
        let mut k = lo;
        loop {
            if let Some(v) = self.buckets.get(&k) {
                for &i in v {
                    if b.contains(&self.points[i]) {
                        out.push(i);
                    }
                }
            }
            let mut axis = d;
            loop {
                if axis == 0 {
                    out.sort_unstable();
                    return out;
                }
                axis -= 1;
                if k[axis] < hi[axis] {
                    k[axis] += 1;
                    for (j, kj) in k.iter_mut().enumerate().take(d).skip(axis + 1) {
                        *kj = lo[j];
                    }
                    break;
                }
            }
        }
    }

    fn rebuild_sorted(mut self) -> Self {
        let mut pts = std::mem::take(&mut self.points);
        pts.sort_by(|a, b| a.lex_cmp(b));
        self.buckets.clear();
        for p in pts {
            self.insert(p);
        }
        self
    }

    /// A net from explicit points; checks the packing condition and
    /// computes the covering radius over the window.
    pub fn from_points(model: GroupModel<T>, window: Window<T>, points: Vec<Element<T>>, r_pack: T) -> Result<Self> {
        if !(r_pack > T::zero()) {
            return Err(Error::Parameter("r_pack must be positive".into()));
        }
        let mut net = Self::empty(model, window, r_pack);
        for p in points {
            model.check(&p)?;
            if !window.contains(&p) {
                return Err(Error::Domain("net point outside its window".into()));
            }
            if !net.separated(&p) {
                return Err(Error::Domain("net points closer than r_pack".into()));
            }
            net.insert(p);
        }
        if net.points.is_empty() {
            return Err(Error::Domain("a net needs at least one point".into()));
        }
        let mut net = net.rebuild_sorted();
        net.r_cover = net.covering_bound(None)?;
        Ok(net)
    }

    fn separated(&self, c: &Element<T>) -> bool {
        let r = self.r_pack * (T::one() - T::lit(PACK_SLACK));
        let reach = inverse_radius(&self.model, self.r_pack).max(self.r_pack);
        let b = self.model.orbit_ball_box(c, reach);
        self.query_box(&b).into_iter().all(|i| {
            let w = &self.points[i];
            self.model.orbit_distance(c, w) >= r && self.model.orbit_distance(w, c) >= r
        })
    }

    /// Covering radius: exact on one-dimensional groups, a certified bound
    /// from the scan step otherwise.
    fn covering_bound(&self, scan_step: Option<T>) -> Result<T> {
        let kind = self.model.kind();
        if matches!(kind, GroupKind::Euclidean(1) | GroupKind::Lattice(1)) {
            let xs: Vec<T> = self.points.iter().map(|p| p.coord(0)).collect();
            let lo = self.window.lo()[0];
            let hi = self.window.hi()[0];
            let mut r = (xs[0] - lo).max(hi - xs[xs.len() - 1]);
            for w in xs.windows(2) {
                let gap = (w[1] - w[0]) * T::lit(0.5);
                r = r.max(if kind.is_discrete() { gap.floor() } else { gap });
            }
            return Ok(r);
        }
        let step = match scan_step {
            Some(s) => s,
            None => {
                return Err(Error::Parameter(
                    "explicit nets are only supported on one-dimensional groups".into(),
                ))
            }
        };
        let d = T::from_usize_lossy(self.model.dim());
        Ok(match kind {
            GroupKind::Lattice(_) => self.r_pack,
            GroupKind::Euclidean(_) => self.r_pack + step * d.sqrt(),
            GroupKind::Affine => {
                let r1 = inverse_radius(&self.model, self.r_pack);
                let bmax = self.window.lo()[1].abs().max(self.window.hi()[1].abs());
                let eps = step + step + (step.exp() - T::one()) * bmax;
                r1 + r1.exp() * eps
            }
        })
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

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn r_pack(&self) -> T {
        self.r_pack
    }

    pub fn r_cover(&self) -> T {
        self.r_cover
    }

    /// Radius `ρ` such that the map `(u, w) ↦ u·w` on `B(e, ρ) × net` is
    /// injective: `r_pack/2` on abelian groups, the largest `ρ` with
    /// `2ρ e^ρ ≤ r_pack` on the affine group.
    pub fn lacunarity_radius(&self) -> T {
        match self.model.kind() {
            GroupKind::Affine => {
                let (mut a, mut b) = (T::zero(), self.r_pack);
                for _ in 0..100 {
                    let m = (a + b) * T::lit(0.5);
                    if T::lit(2.0) * m * m.exp() <= self.r_pack {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                a
            }
            _ => self.r_pack * T::lit(0.5),
        }
    }

    /// Smallest orbit distance, in either direction, between two distinct
    /// net points that are within `2·r_pack` of each other; `+∞` when no
    /// pair is that close.
    pub fn min_separation(&self) -> T {
        let two = self.r_pack * T::lit(2.0);
        let reach = inverse_radius(&self.model, two).max(two);
        let mut best = T::infinity();
        for (i, p) in self.points.iter().enumerate() {
            for j in self.query_box(&self.model.orbit_ball_box(p, reach)) {
                if j != i {
                    let w = &self.points[j];
                    best = best.min(self.model.orbit_distance(p, w)).min(self.model.orbit_distance(w, p));
                }
            }
        }
        best
    }

    /// Whether every point within `r_cover` of `x` lies in the window, so
    /// that the allocation of `x` cannot be changed by net points outside.
    pub fn is_certain(&self, x: &Element<T>) -> bool {
        self.window.contains_window(&self.model.orbit_ball_box(x, self.r_cover))
    }

    fn box_certain(&self, b: &Window<T>) -> bool {
        let d = b.dim();
        (0..1usize << d).all(|mask| {
            let mut c = [T::zero(); 3];
            for (i, ci) in c.iter_mut().enumerate().take(d) {
                *ci = if mask >> i & 1 == 1 { b.hi()[i] } else { b.lo()[i] };
            }
            self.is_certain(&self.model.from_chart(&c))
        })
    }

    /// Nearest net point without the boundary check; `None` when no net
    /// point is within `r_cover`.
    pub(crate) fn owner_unchecked(&self, x: &Element<T>) -> Option<(usize, T, Vec<usize>)> {
        let b = self.model.orbit_ball_box(x, self.r_cover * (T::one() + T::lit(1e-9)));
        let cands = self.query_box(&b);
        let dists: Vec<(usize, T)> = cands.into_iter().map(|i| (i, self.model.orbit_distance(x, &self.points[i]))).collect();
        let r = dists.iter().map(|&(_, d)| d).fold(T::infinity(), T::min);
        if !r.is_finite() {
            return None;
        }
        let tol = T::lit(TIE_TOL) * r.max(T::one());
        let ties: Vec<usize> = dists.iter().filter(|&&(_, d)| d - r <= tol).map(|&(i, _)| i).collect();
        Some((ties[0], r, ties))
    }

    /// `τ_o(x)` with `r_o(x)` and the tie set `𝔠(x)`.
    pub fn allocate(&self, x: &Element<T>) -> Result<VoronoiAllocation<T>> {
        self.model.check(x)?;
        if !self.is_certain(x) {
            return Err(Error::BoundaryUncertainty(
                "query point is not in the net window eroded by r_cover".into(),
            ));
        }
        let (owner, radius, candidates) = self
            .owner_unchecked(x)
            .ok_or_else(|| Error::BoundaryUncertainty("no net point within r_cover".into()))?;
        Ok(VoronoiAllocation { x: *x, radius, candidates, owner })
    }

    /// Chart box containing the tile of net point `i`.
    pub fn tile_bbox(&self, i: usize) -> Window<T> {
        let r = inverse_radius(&self.model, self.r_cover);
        self.model.orbit_ball_box(&self.points[i], r)
    }

    /// The tile `T_w` of net point `i`, clipped to the window.
    pub fn tile(&self, i: usize, q: &QuadratureScheme) -> Result<Region<T>> {
        let w = self.points[i];
        match self.model.kind() {
            GroupKind::Euclidean(1) => {
                let lo = if i > 0 {
                    (self.points[i - 1].coord(0) + w.coord(0)) * T::lit(0.5)
                } else {
                    self.window.lo()[0]
                };
                let hi = if i + 1 < self.points.len() {
                    (self.points[i + 1].coord(0) + w.coord(0)) * T::lit(0.5)
                } else {
                    self.window.hi()[0]
                };
                Ok(Region::Intervals(vec![(lo, hi)]))
            }
            GroupKind::Lattice(d) => {
                let pts = self
                    .tile_bbox(i)
                    .lattice_points()
                    .into_iter()
                    .filter(|p| {
                        let c: Vec<T> = p[..d as usize].iter().map(|&k| T::from_i64(k).unwrap()).collect();
                        let g = self.model.from_chart(&c);
                        self.window.contains(&g) && self.owner_unchecked(&g).map(|o| o.0) == Some(i)
                    })
                    .collect();
                Ok(Region::points(d as usize, pts))
            }
            _ => {
                let bbox = self.tile_bbox(i);
                let fb = Fibered::from_predicate(bbox, q.resolution, q.resolution.max(64), |c| {
                    let g = self.model.from_chart(c);
                    self.window.contains(&g) && self.owner_unchecked(&g).map(|o| o.0) == Some(i)
                });
                Ok(Region::Fibered(fb))
            }
        }
    }
}

/// Greedy packing over the chart grid `lo + k·scan_step` of the window, in
/// lexicographic order. A candidate is accepted iff its orbit distance to
/// and from every accepted point is at least `r_pack`.
pub fn greedy_net<T: Real>(model: &GroupModel<T>, w: &Window<T>, r_pack: T, scan_step: T) -> Result<Net<T>> {
    if !(r_pack > T::zero()) || !(scan_step > T::zero()) {
        return Err(Error::Parameter("r_pack and scan_step must be positive".into()));
    }
    if w.dim() != model.dim() {
        return Err(Error::ModelMismatch("window dimension differs from the group".into()));
    }
    let d = model.dim();
    let extents: Vec<T> = (0..d).map(|i| w.extent(i)).collect();
    let point_window = extents.iter().all(|&e| e == T::zero());
    if !point_window && extents.iter().all(|&e| e < r_pack) {
        return Err(Error::DegenerateWindow(format!(
            "every window side is shorter than r_pack = {r_pack}"
        )));
    }
    let step = if model.is_discrete() { scan_step.round().max(T::one()) } else { scan_step };
    let counts: Vec<usize> = (0..d)
        .map(|i| ((extents[i] / step) * (T::one() + T::lit(1e-12))).floor().to_usize().unwrap_or(0) + 1)
        .collect();
    let mut net = Net::empty(*model, *w, r_pack);
    let mut origin = w.lo().to_vec();
    if model.is_discrete() {
        for o in origin.iter_mut() {
            *o = o.ceil();
        }
    }
    let total: usize = counts.iter().product();
    for mut idx in 0..total {
        let mut c = [T::zero(); 3];
        for i in (0..d).rev() {
            let k = idx % counts[i];
            idx /= counts[i];
            c[i] = (origin[i] + T::from_usize_lossy(k) * step).min(w.hi()[i]);
        }
        let g = model.from_chart(&c);
        if net.separated(&g) {
            net.insert(g);
        }
    }
    let mut net = net.rebuild_sorted();
    net.r_cover = net.covering_bound(Some(step))?;
    Ok(net)
}

/// `voronoi_allocate`.
pub fn voronoi_allocate<T: Real>(x: &Element<T>, net: &Net<T>) -> Result<VoronoiAllocation<T>> {
    net.allocate(x)
}

/// The relation `E_U` whose classes are the tiles of a net, for the
/// translation action of the group on itself.
#[derive(Clone, Debug)]
pub struct TessellationOer<T> {
    net: Net<T>,
    quad: QuadratureScheme,
}

/// `build_E_U`: the tile relation of `net`. `quad.resolution` sets the
/// column count of sampled displacement sets on groups of dimension ≥ 2.
pub fn build_e_u<T: Real>(net: &Net<T>, quad: QuadratureScheme) -> TessellationOer<T> {
    TessellationOer { net: net.clone(), quad }
}

impl<T: Real> TessellationOer<T> {
    pub fn net(&self) -> &Net<T> {
        &self.net
    }

    /// Net index owning `x`, with the check that the whole tile of that
    /// owner is certain.
    pub fn owner_certain(&self, x: &Element<T>) -> Result<usize> {
        let owner = self.net.allocate(x)?.owner;
        if !self.net.box_certain(&self.net.tile_bbox(owner)) {
            return Err(Error::BoundaryUncertainty("the class of the query point reaches the window edge".into()));
        }
        Ok(owner)
    }

    /// `{g : τ_o(g·x) = τ_o(x)}`, the right translate of a union of tiles
    /// selected by `same(owner)`.
    pub(crate) fn displacement_of_union<F>(&self, x: &Element<T>, members: &[usize], same: F) -> Result<Region<T>>
    where
        F: Fn(usize) -> bool + Sync,
    {
        let net = &self.net;
        let model = net.model;
        for &m in members {
            if !net.box_certain(&net.tile_bbox(m)) {
                return Err(Error::BoundaryUncertainty("a class tile reaches the window edge".into()));
            }
        }
        let xinv = model.inv_unchecked(x);
        match model.kind() {
            GroupKind::Euclidean(1) => {
                let mut iv = Vec::new();
                for &m in members {
                    if let Region::Intervals(t) = net.tile(m, &self.quad)? {
                        iv.extend(t.into_iter().map(|(a, b)| (a - x.coord(0), b - x.coord(0))));
                    }
                }
                Ok(Region::intervals(iv))
            }
            GroupKind::Lattice(d) => {
                let mut pts = Vec::new();
                let shift: Vec<i64> = x.coords().iter().map(|c| c.to_i64().unwrap()).collect();
                for &m in members {
                    if let Region::Points { points, .. } = net.tile(m, &self.quad)? {
                        for p in points {
                            let mut q = p;
                            for i in 0..d as usize {
                                q[i] -= shift[i];
                            }
                            pts.push(q);
                        }
                    }
                }
                Ok(Region::points(d as usize, pts))
            }
            _ => {
                let mut bbox: Option<Window<T>> = None;
                for &m in members {
                    let b = model.right_translate_box(&net.tile_bbox(m), &xinv);
                    bbox = Some(match bbox {
                        Some(acc) => acc.hull(&b),
                        None => b,
                    });
                }
                let bbox = bbox.ok_or_else(|| Error::Domain("empty class".into()))?;
                let fb = Fibered::from_predicate(bbox, self.quad.resolution, self.quad.resolution.max(64), |c| {
                    let g = model.from_chart(c);
                    let y = model.mul_unchecked(&g, x);
                    net.window.contains(&y) && net.owner_unchecked(&y).map(|o| same(o.0)).unwrap_or(false)
                });
                Ok(Region::Fibered(fb))
            }
        }
    }
}

impl<T: Real> CompactOer<T> for TessellationOer<T> {
    type Point = Element<T>;

    fn class_of(&self, x: &Element<T>) -> Result<u64> {
        Ok(self.net.allocate(x)?.owner as u64)
    }

    fn displacement(&self, x: &Element<T>) -> Result<Region<T>> {
        let owner = self.owner_certain(x)?;
        self.displacement_of_union(x, &[owner], |o| o == owner)
    }
}

/// Outcome of [`selector_check`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelectorReport {
    pub checked: usize,
    /// Samples whose owner is allocated to itself.
    pub selector_ok: usize,
    /// Consecutive sample pairs where "same displacement class" agrees with
    /// "same owner".
    pub pairs_checked: usize,
    pub pairs_consistent: usize,
}

impl SelectorReport {
    pub fn passed(&self) -> bool {
        self.selector_ok == self.checked && self.pairs_consistent == self.pairs_checked
    }
}

/// Checks that `τ_o` is a selector for the tile relation on the samples.
pub fn selector_check<T: Real>(oer: &TessellationOer<T>, samples: &[Element<T>]) -> Result<SelectorReport> {
    let net = oer.net();
    let model = net.model();
    let mut rep = SelectorReport::default();
    let mut owners = Vec::with_capacity(samples.len());
    for x in samples {
        let a = net.allocate(x)?;
        let w = net.points()[a.owner];
        rep.checked += 1;
        if net.allocate(&w)?.owner == a.owner {
            rep.selector_ok += 1;
        }
        owners.push(a.owner);
    }
    for k in 1..samples.len() {
        let (x, y) = (&samples[k - 1], &samples[k]);
        let disp = oer.displacement(x)?;
        let g = model.mul(y, &model.inv(x)?)?;
        let same_class = disp.contains(&g);
        rep.pairs_checked += 1;
        if same_class == (owners[k - 1] == owners[k]) {
            rep.pairs_consistent += 1;
        }
    }
    Ok(rep)
}

/// Orders net indices by distance from the identity, then by `≺`.
pub fn enumeration_order<T: Real>(net: &Net<T>) -> Vec<usize> {
    let model = net.model();
    let e = model.identity();
    let mut idx: Vec<usize> = (0..net.len()).collect();
    idx.sort_by(|&a, &b| {
        let da = model.metric_unchecked(&e, &net.points()[a]);
        let db = model.metric_unchecked(&e, &net.points()[b]);
        match da.partial_cmp(&db) {
            Some(Ordering::Equal) | None => a.cmp(&b),
            Some(o) => o,
        }
    });
    idx
}
