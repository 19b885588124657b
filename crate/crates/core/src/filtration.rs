//! Nested compact orbit equivalence relations built from a net: dyadic
//! groupings of tiles, lifts of nested partitions of the net and their
//! restrictions back, positivization, `[K, ε]`-invariance statistics, and
//! random dyadic filtrations of `ℝᵈ`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::cross_section::{build_e_u, enumeration_order, CompactOer, Net, TessellationOer};
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, GroupModel, QuadratureScheme, Window};
use crate::numerics::stream_rng;
use crate::region::Region;
use crate::scalar::Real;

/// Measure below which a displacement set counts as null.
pub const POSITIVITY_THRESHOLD: f64 = 1e-9;

/// A sequence of partitions of `{0, …, size-1}`, each refining the next.
/// Labels are canonical: classes are numbered in order of their smallest
/// member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedPartition {
    labels: Vec<Vec<usize>>,
}

fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

impl NestedPartition {
    /// Builds from per-level labels, checking that every level refines the
    /// next.
    pub fn new(labels: Vec<Vec<usize>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Parameter("a filtration needs at least one level".into()));
        }
        let size = labels[0].len();
        if labels.iter().any(|l| l.len() != size) {
            return Err(Error::Parameter("all levels must label the same index set".into()));
        }
        let labels: Vec<Vec<usize>> = labels.iter().map(|l| canonical(l)).collect();
        for n in 0..labels.len() - 1 {
            let mut up: HashMap<usize, usize> = HashMap::new();
            for i in 0..size {
                let coarse = labels[n + 1][i];
                if *up.entry(labels[n][i]).or_insert(coarse) != coarse {
                    return Err(Error::NestingViolation(format!(
                        "level {n} class of index {i} is split at level {}",
                        n + 1
                    )));
                }
            }
        }
        Ok(Self { labels })
    }

    /// Level `n` groups `order[k·2ⁿ .. (k+1)·2ⁿ]` for every `k`.
    pub fn dyadic_blocks(order: &[usize], max_level: usize) -> Result<Self> {
        let size = order.len();
        let mut seen = vec![false; size];
        for &i in order {
            if i >= size || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Parameter("enumeration must be a permutation of the net indices".into()));
            }
        }
        let labels = (0..=max_level)
            .map(|n| {
                let mut l = vec![0; size];
                for (pos, &i) in order.iter().enumerate() {
                    l[i] = pos >> n;
                }
                l
            })
            .collect();
        Self::new(labels)
    }

    pub fn levels(&self) -> usize {
        self.labels.len()
    }

    pub fn size(&self) -> usize {
        self.labels[0].len()
    }

    pub fn label(&self, level: usize, index: usize) -> usize {
        self.labels[level][index]
    }

    /// Members of the level-`n` class of `index`, ascending.
    pub fn class_members(&self, level: usize, index: usize) -> Vec<usize> {
        let l = self.labels[level][index];
        (0..self.size()).filter(|&i| self.labels[level][i] == l).collect()
    }

    /// All level-`n` classes, ordered by label.
    pub fn classes(&self, level: usize) -> Vec<Vec<usize>> {
        let count = self.labels[level].iter().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); count];
        for (i, &l) in self.labels[level].iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Access to the displacement sets of a nested family of compact OERs.
pub trait OrbitFiltration<T: Real> {
    type Point;

    /// Number of levels.
    fn levels(&self) -> usize;

    /// `G_{E_n}(x)`.
    fn level_displacement(&self, n: usize, x: &Self::Point) -> Result<Region<T>>;
}

/// Filtration of the translation action of a group on itself whose level-`n`
/// classes are unions of net tiles grouped by a nested partition of the net.
#[derive(Clone, Debug)]
pub struct FiltrationStructure<T> {
    tiles: TessellationOer<T>,
    partition: NestedPartition,
}

/// `dyadic_filtration` with the default enumeration (distance from the
/// identity, then `≺`).
pub fn dyadic_filtration<T: Real>(net: &Net<T>, max_level: usize, quad: QuadratureScheme) -> Result<FiltrationStructure<T>> {
    dyadic_filtration_with_order(net, max_level, &enumeration_order(net), quad)
}

/// Dyadic blocks along an explicit enumeration of the net.
pub fn dyadic_filtration_with_order<T: Real>(
    net: &Net<T>,
    max_level: usize,
    order: &[usize],
    quad: QuadratureScheme,
) -> Result<FiltrationStructure<T>> {
    if order.len() != net.len() {
        return Err(Error::Parameter("enumeration length differs from the net".into()));
    }
    lift_filtration(&NestedPartition::dyadic_blocks(order, max_level)?, net, quad)
}

/// `lift_filtration`: `x ~ₙ y` iff `τ_o(x)` and `τ_o(y)` are `Fₙ`-equivalent.
pub fn lift_filtration<T: Real>(f: &NestedPartition, net: &Net<T>, quad: QuadratureScheme) -> Result<FiltrationStructure<T>> {
    if f.size() != net.len() {
        return Err(Error::Parameter(format!(
            "partition of {} indices for a net of {} points",
            f.size(),
            net.len()
        )));
    }
    Ok(FiltrationStructure { tiles: build_e_u(net, quad), partition: f.clone() })
}

/// `restrict_filtration`: the partition of the net induced by each level,
/// read off by querying the class of every net point.
pub fn restrict_filtration<T: Real>(filt: &FiltrationStructure<T>) -> Result<NestedPartition> {
    let net = filt.net();
    let labels = (0..filt.levels())
        .map(|n| {
            net.points()
                .iter()
                .map(|w| {
                    let owner = net.owner_unchecked(w).map(|o| o.0).ok_or_else(|| {
                        Error::BoundaryUncertainty("net point without an owner".into())
                    })?;
                    Ok(filt.partition.label(n, owner))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    NestedPartition::new(labels)
}

impl<T: Real> FiltrationStructure<T> {
    pub fn net(&self) -> &Net<T> {
        self.tiles.net()
    }

    pub fn model(&self) -> &GroupModel<T> {
        self.tiles.net().model()
    }

    pub fn partition(&self) -> &NestedPartition {
        &self.partition
    }

    pub fn max_level(&self) -> usize {
        self.partition.levels() - 1
    }

    /// Level-`n` class label of `x`.
    pub fn class_of(&self, n: usize, x: &Element<T>) -> Result<u64> {
        self.check_level(n)?;
        let owner = self.tiles.net().allocate(x)?.owner;
        Ok(self.partition.label(n, owner) as u64)
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n > self.max_level() {
            return Err(Error::Parameter(format!("level {n} exceeds max level {}", self.max_level())));
        }
        Ok(())
    }

    /// `G_{E_n}(x)`.
    pub fn displacement(&self, n: usize, x: &Element<T>) -> Result<Region<T>> {
        self.check_level(n)?;
        let owner = self.tiles.net().allocate(x)?.owner;
        let members = self.partition.class_members(n, owner);
        let label = self.partition.label(n, owner);
        self.tiles.displacement_of_union(x, &members, |o| self.partition.label(n, o) == label)
    }

    /// Level `n` as a compact OER.
    pub fn level(&self, n: usize) -> FiltrationLevel<'_, T> {
        FiltrationLevel { filt: self, n }
    }
}

/// One level of a [`FiltrationStructure`].
#[derive(Clone, Copy, Debug)]
pub struct FiltrationLevel<'a, T> {
    filt: &'a FiltrationStructure<T>,
    n: usize,
}

impl<T: Real> CompactOer<T> for FiltrationLevel<'_, T> {
    type Point = Element<T>;

    fn class_of(&self, x: &Element<T>) -> Result<u64> {
        self.filt.class_of(self.n, x)
    }

    fn displacement(&self, x: &Element<T>) -> Result<Region<T>> {
        self.filt.displacement(self.n, x)
    }
}

impl<T: Real> OrbitFiltration<T> for FiltrationStructure<T> {
    type Point = Element<T>;

    fn levels(&self) -> usize {
        self.partition.levels()
    }

    fn level_displacement(&self, n: usize, x: &Element<T>) -> Result<Region<T>> {
        self.displacement(n, x)
    }
}

/// `positivize`: the increasing list of levels whose displacement set at `x`
/// has measure above [`POSITIVITY_THRESHOLD`].
pub fn positivize<T, F>(filt: &F, model: &GroupModel<T>, x: &F::Point, quad: &QuadratureScheme) -> Result<Vec<usize>>
where
    T: Real,
    F: OrbitFiltration<T>,
{
    let mut phi = Vec::new();
    for n in 0..filt.levels() {
        let m = filt.level_displacement(n, x)?.measure(model, quad)?;
        if m > T::lit(POSITIVITY_THRESHOLD) {
            phi.push(n);
        }
    }
    if phi.is_empty() {
        return Err(Error::ExhaustedFiltration(format!(
            "no level among {} has a displacement set of positive measure",
            filt.levels()
        )));
    }
    Ok(phi)
}

/// `λ(g ∈ S : Kg ⊂ S) / λ(S)`.
///
/// Exact for unions of intervals, Euclidean boxes and lattice sets; other
/// regions are handled by quadrature over `S` with `Kg ⊂ S` tested on a grid
/// of `K`.
pub fn folner_stat<T: Real>(s: &Region<T>, k: &Window<T>, model: &GroupModel<T>, quad: &QuadratureScheme) -> Result<T> {
    let lam = s.measure(model, quad)?;
    if !(lam > T::zero()) {
        return Err(Error::Degenerate("λ(S) = 0".into()));
    }
    if k.dim() != model.dim() {
        return Err(Error::ModelMismatch("K has the wrong dimension".into()));
    }
    let kind = model.kind();
    let good = match (s, kind) {
        (Region::Intervals(iv), GroupKind::Euclidean(1)) => {
            let lens: Vec<T> = iv
                .iter()
                .map(|&(a, b)| ((b - k.hi()[0]) - (a - k.lo()[0])).max(T::zero()))
                .collect();
            crate::numerics::pairwise_sum(&lens)
        }
        (Region::Box(w), GroupKind::Euclidean(_)) => {
            (0..w.dim()).map(|i| (w.extent(i) - k.extent(i)).max(T::zero())).fold(T::one(), |a, b| a * b)
        }
        (Region::Box(w), GroupKind::Lattice(d)) => {
            let pts = Region::<T>::points(d as usize, w.lattice_points());
            return folner_stat(&pts, k, model, quad);
        }
        (Region::Points { dim, points }, GroupKind::Lattice(_)) => {
            let set: HashSet<[i64; 3]> = points.iter().copied().collect();
            let ks = k.lattice_points();
            let count = points
                .iter()
                .filter(|g| {
                    ks.iter().all(|kk| {
                        let mut p = [0i64; 3];
                        for i in 0..*dim {
                            p[i] = kk[i] + g[i];
                        }
                        set.contains(&p)
                    })
                })
                .count();
            T::from_usize_lossy(count)
        }
        _ => {
            const K_RES: usize = 5;
            let d = model.dim();
            let kpts: Vec<Element<T>> = (0..K_RES.pow(d as u32))
                .map(|mut idx| {
                    let mut c = [T::zero(); 3];
                    for i in (0..d).rev() {
                        let j = idx % K_RES;
                        idx /= K_RES;
                        c[i] = k.lo()[i] + k.extent(i) * T::from_usize_lossy(j) / T::from_usize_lossy(K_RES - 1);
                    }
                    model.from_chart(&c)
                })
                .collect();
            s.integrate(
                model,
                |g| {
                    let inside = kpts.iter().all(|kk| s.contains(&model.mul_unchecked(kk, g)));
                    if inside {
                        T::one()
                    } else {
                        T::zero()
                    }
                },
                quad,
                &[],
            )?
        }
    };
    Ok((good / lam).min(T::one()).max(T::zero()))
}

/// Whether `B(e, r)` (as its circumscribing window) lies in `region`.
pub fn ball_absorbed<T: Real>(region: &Region<T>, model: &GroupModel<T>, r: T) -> bool {
    let ball = model.ball_window(r);
    match region {
        Region::Intervals(iv) => iv.iter().any(|&(a, b)| a < ball.lo()[0] && ball.hi()[0] <= b),
        Region::Box(w) => w.contains_window(&ball),
        Region::Points { .. } => ball.lattice_points().iter().all(|p| {
            let c: Vec<T> = p[..model.dim()].iter().map(|&k| T::from_i64(k).unwrap()).collect();
            region.contains_chart(&c)
        }),
        Region::Fibered(_) => {
            const RES: usize = 9;
            let d = model.dim();
            (0..RES.pow(d as u32)).all(|mut idx| {
                let mut c = [T::zero(); 3];
                for i in (0..d).rev() {
                    let j = idx % RES;
                    idx /= RES;
                    c[i] = ball.lo()[i] + ball.extent(i) * T::from_usize_lossy(j) / T::from_usize_lossy(RES - 1);
                }
                region.contains_chart(&c)
            })
        }
    }
}

/// Nested random intervals `I_0 ⊂ I_1 ⊂ …` per axis with `|I_n| = 2ⁿ` and
/// `0 ∈ I_n`. Bit `b_{n+1} = 0` puts `I_n` in the left half of `I_{n+1}`,
/// bit `1` in the right half.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomDyadicFiltration {
    seed: u64,
    bits: Vec<Vec<bool>>,
    lo: Vec<Vec<i64>>,
}

impl RandomDyadicFiltration {
    /// Fair-coin bits from stream `axis` of `seed`.
    pub fn new(seed: u64, max_level: usize, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Parameter(format!("dimension must be 1..=3, got {dim}")));
        }
        let bits = (0..dim)
            .map(|axis| {
                let mut rng = stream_rng(seed, axis as u64);
                (0..max_level).map(|_| rand::Rng::random::<bool>(&mut rng)).collect()
            })
            .collect();
        Self::from_bits(seed, bits)
    }

    /// Explicit bits; `bits[axis][n]` positions `I_n` inside `I_{n+1}`.
    pub fn from_bits(seed: u64, bits: Vec<Vec<bool>>) -> Result<Self> {
        if bits.is_empty() || bits.len() > 3 || bits.iter().any(|b| b.len() != bits[0].len()) {
            return Err(Error::Parameter("need 1..=3 axes with equally many bits".into()));
        }
        if bits[0].len() > 60 {
            return Err(Error::Parameter("at most 60 levels".into()));
        }
        let lo = bits
            .iter()
            .map(|axis| {
                let mut lo = vec![0i64];
                for (n, &b) in axis.iter().enumerate() {
                    let prev = lo[n];
                    lo.push(if b { prev - (1i64 << n) } else { prev });
                }
                lo
            })
            .collect();
        Ok(Self { seed, bits, lo })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn max_level(&self) -> usize {
        self.bits[0].len()
    }

    pub fn bits(&self, axis: usize) -> &[bool] {
        &self.bits[axis]
    }

    /// `I_n` on `axis` as `[lo, lo + 2ⁿ)`.
    pub fn interval(&self, axis: usize, n: usize) -> (i64, i64) {
        let lo = self.lo[axis][n];
        (lo, lo + (1i64 << n))
    }

    /// `S_n`, the product of the per-axis intervals.
    pub fn window<T: Real>(&self, n: usize) -> Window<T> {
        let lo: Vec<T> = (0..self.dim()).map(|a| T::from_i64(self.interval(a, n).0).unwrap()).collect();
        let hi: Vec<T> = (0..self.dim()).map(|a| T::from_i64(self.interval(a, n).1).unwrap()).collect();
        Window::new(&lo, &hi).expect("finite intervals")
    }

    pub fn levels(&self) -> usize {
        self.max_level() + 1
    }
}

/// `random_dyadic`.
pub fn random_dyadic(seed: u64, max_level: usize, dim: usize) -> Result<RandomDyadicFiltration> {
    RandomDyadicFiltration::new(seed, max_level, dim)
}

/// One row of an asymptotic invariance experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceRow {
    pub n: usize,
    pub fraction_invariant: f64,
    pub mean_stat: f64,
    pub sample_size: usize,
}

/// For each level, the fraction of samples whose displacement set is
/// `[K, ε]`-invariant, with the mean Følner statistic.
pub fn asymptotic_invariance_experiment<T, F>(
    filt: &F,
    model: &GroupModel<T>,
    k: &Window<T>,
    eps: T,
    samples: &[F::Point],
    levels: std::ops::RangeInclusive<usize>,
    quad: &QuadratureScheme,
) -> Result<Vec<InvarianceRow>>
where
    T: Real,
    F: OrbitFiltration<T> + Sync,
    F::Point: Sync,
{
    levels
        .map(|n| {
            let stats: Vec<T> = samples
                .par_iter()
                .map(|x| folner_stat(&filt.level_displacement(n, x)?, k, model, quad))
                .collect::<Result<_>>()?;
            let pass = stats.iter().filter(|&&s| s > T::one() - eps).count();
            let mean = stats.iter().map(|s| s.as_f64()).sum::<f64>() / stats.len().max(1) as f64;
            Ok(InvarianceRow {
                n,
                fraction_invariant: pass as f64 / samples.len().max(1) as f64,
                mean_stat: mean,
                sample_size: samples.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross_section::greedy_net;

    fn even_net(half: f64) -> Net<f64> {
        greedy_net(&GroupModel::real_line(), &Window::interval(-half, half).unwrap(), 2.0, 0.1).unwrap()
    }

    fn index_of(net: &Net<f64>, x: f64) -> usize {
        net.points().iter().position(|p| (p.coord(0) - x).abs() < 1e-9).unwrap()
    }

    fn interval(r: &Region<f64>) -> (f64, f64) {
        match r {
            Region::Intervals(iv) if iv.len() == 1 => iv[0],
            other => panic!("not a single interval: {other:?}"),
        }
    }

    #[test]
    fn nesting_violation_is_detected() {
        let err = NestedPartition::new(vec![vec![0, 0, 1, 1], vec![0, 1, 1, 1]]).unwrap_err();
        assert!(matches!(err, Error::NestingViolation(_)));
    }

    #[test]
    fn dyadic_examples_with_explicit_order() {
        let net = even_net(8.0);
        let order: Vec<usize> = [0.0, 2.0, -2.0, 4.0, -4.0, 6.0, -6.0, 8.0, -8.0].iter().map(|&x| index_of(&net, x)).collect();
        let q = QuadratureScheme::grid(64);
        let filt = dyadic_filtration_with_order(&net, 2, &order, q).unwrap();
        let (a, b) = interval(&filt.displacement(1, &Element::real(0.5)).unwrap());
        assert!((a + 1.5).abs() < 1e-9 && (b - 2.5).abs() < 1e-9);
        let (a, b) = interval(&filt.displacement(0, &Element::real(0.5)).unwrap());
        assert!((a + 1.5).abs() < 1e-9 && (b - 0.5).abs() < 1e-9);

        let restricted = restrict_filtration(&filt).unwrap();
        let pairs: Vec<Vec<i64>> = restricted
            .classes(1)
            .iter()
            .map(|c| {
                let mut v: Vec<i64> = c.iter().map(|&i| net.points()[i].coord(0).round() as i64).collect();
                v.sort();
                v
            })
            .collect();
        assert!(pairs.contains(&vec![0, 2]));
        assert!(pairs.contains(&vec![-2, 4]));
        assert_eq!(restricted, *filt.partition());
    }

    #[test]
    fn lift_of_custom_pairing() {
        let net = even_net(8.0);
        let n = net.len();
        let mut level1 = vec![0; n];
        for (i, p) in net.points().iter().enumerate() {
            let x = p.coord(0).round() as i64;
            level1[i] = match x {
                0 | 2 => 100,
                -2 | 4 => 101,
                _ => i,
            };
        }
        let f = NestedPartition::new(vec![(0..n).collect(), level1]).unwrap();
        let filt = lift_filtration(&f, &net, QuadratureScheme::grid(64)).unwrap();
        let (a, b) = interval(&filt.displacement(1, &Element::real(0.5)).unwrap());
        assert!((a + 1.5).abs() < 1e-9 && (b - 2.5).abs() < 1e-9);
        assert_eq!(restrict_filtration(&filt).unwrap(), f);
    }

    #[test]
    fn positivize_examples() {
        let net = even_net(16.0);
        let q = QuadratureScheme::grid(64);
        let m = GroupModel::real_line();
        let filt = dyadic_filtration(&net, 3, q).unwrap();
        assert_eq!(positivize(&filt, &m, &Element::real(0.5), &q).unwrap(), vec![0, 1, 2, 3]);

        struct PointsFirst;
        impl OrbitFiltration<f64> for PointsFirst {
            type Point = Element<f64>;
            fn levels(&self) -> usize {
                3
            }
            fn level_displacement(&self, n: usize, _x: &Element<f64>) -> Result<Region<f64>> {
                Ok(if n == 0 {
                    Region::Box(Window::interval(0.0, 0.0).unwrap())
                } else {
                    Region::intervals(vec![(-(n as f64), n as f64)])
                })
            }
        }
        let phi = positivize(&PointsFirst, &m, &Element::real(0.0), &q).unwrap();
        assert_eq!(phi[0], 1);

        struct AllNull;
        impl OrbitFiltration<f64> for AllNull {
            type Point = Element<f64>;
            fn levels(&self) -> usize {
                2
            }
            fn level_displacement(&self, _n: usize, _x: &Element<f64>) -> Result<Region<f64>> {
                Ok(Region::Box(Window::interval(0.0, 0.0).unwrap()))
            }
        }
        assert!(matches!(positivize(&AllNull, &m, &Element::real(0.0), &q), Err(Error::ExhaustedFiltration(_))));
    }

    #[test]
    fn folner_examples() {
        let q = QuadratureScheme::grid(64);
        let r = GroupModel::<f64>::real_line();
        let s = Region::Box(Window::interval(0.0, 8.0).unwrap());
        let k = Window::interval(-1.0, 1.0).unwrap();
        assert!((folner_stat(&s, &k, &r, &q).unwrap() - 0.75).abs() < 1e-12);
        let e = Window::interval(0.0, 0.0).unwrap();
        assert_eq!(folner_stat(&s, &e, &r, &q).unwrap(), 1.0);

        let z = GroupModel::<f64>::lattice(1).unwrap();
        let s = Region::Box(Window::interval(0.0, 7.0).unwrap());
        assert_eq!(folner_stat(&s, &k, &z, &q).unwrap(), 0.75);

        let empty = Region::Box(Window::interval(1.0, 1.0).unwrap());
        assert!(matches!(folner_stat(&empty, &k, &r, &q), Err(Error::Degenerate(_))));
    }

    #[test]
    fn random_dyadic_examples() {
        let zero = RandomDyadicFiltration::from_bits(0, vec![vec![false; 4]]).unwrap();
        for n in 0..=4 {
            assert_eq!(zero.interval(0, n), (0, 1 << n));
        }
        let ones = RandomDyadicFiltration::from_bits(0, vec![vec![true; 2]]).unwrap();
        assert_eq!(ones.interval(0, 1), (-1, 1));
        assert_eq!(ones.interval(0, 2), (-3, 1));
        let r = random_dyadic(42, 20, 2).unwrap();
        for a in 0..2 {
            for n in 0..=20 {
                let (lo, hi) = r.interval(a, n);
                assert_eq!(hi - lo, 1 << n);
                assert!(lo <= 0 && 0 < hi);
            }
        }
        assert_eq!(r, random_dyadic(42, 20, 2).unwrap());
    }
}
