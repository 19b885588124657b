//! Deterministic reductions, seeded random streams and one-dimensional
//! piecewise quadrature.
//!
//! Every parallel sum in the crate goes through [`det_sum`] or
//! [`det_chunk_sum`]: work is cut into chunks of a fixed size that does not
//! depend on the number of worker threads, each chunk is reduced with
//! pairwise summation and the chunk partials are reduced pairwise again.
//! Results are therefore bit-identical between serial and parallel runs.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scalar::Real;

/// Fixed work unit for deterministic reductions.
pub const CHUNK: usize = 4096;

/// Pairwise (cascade) summation.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut acc = T::zero();
        for &x in xs {
            acc = acc + x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sums `f(0) + … + f(n-1)` in parallel with a thread-count independent
/// reduction tree.
pub fn det_sum<T, F>(n: usize, f: F) -> T
where
    T: Real,
    F: Fn(usize) -> T + Sync,
{
    det_chunk_sum(n, |range, _| {
        let vals: Vec<T> = range.map(&f).collect();
        pairwise_sum(&vals)
    })
}

/// Like [`det_sum`] but hands each chunk its index range and chunk number,
/// so the closure can derive a per-chunk random stream.
pub fn det_chunk_sum<T, F>(n: usize, chunk: F) -> T
where
    T: Real,
    F: Fn(Range<usize>, u64) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            chunk(lo..hi, c as u64)
        })
        .collect();
    pairwise_sum(&partials)
}

/// Random stream number `stream` of the generator seeded with `seed`.
///
/// Distinct `(seed, stream)` pairs give independent ChaCha streams, which is
/// how parallel tasks get reproducible randomness.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Midpoint rule on `[a, b]` with the interval first split at every
/// breakpoint inside it. `per_unit` sets the number of nodes per unit
/// length, with at least `min_nodes` nodes per piece.
///
/// Splitting at the discontinuities of the integrand makes the rule exact
/// for piecewise constant integrands and second order for piecewise smooth
/// ones.
pub fn integrate_piecewise<T, F>(f: F, a: T, b: T, breaks: &[T], per_unit: T, min_nodes: usize) -> T
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(b > a) {
        return T::zero();
    }
    let mut cuts: Vec<T> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();
    let mut parts = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let len = hi - lo;
        let n = ((len * per_unit).ceil().to_usize().unwrap_or(min_nodes)).max(min_nodes).max(1);
        let h = len / T::from_usize_lossy(n);
        let half = T::lit(0.5);
        let vals: Vec<T> = (0..n).map(|i| f(lo + (T::from_usize_lossy(i) + half) * h)).collect();
        parts.push(pairwise_sum(&vals) * h);
    }
    pairwise_sum(&parts)
}

/// Running mean and variance (sample statistics over seeds or points).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
}

impl SampleStats {
    pub fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::default();
        }
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        Self { n, mean, var }
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.var / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance, assuming a finite fourth
    /// moment estimated from the same data.
    pub fn var_std_err(xs: &[f64]) -> f64 {
        let s = Self::from_slice(xs);
        let n = xs.len() as f64;
        let m4: Vec<f64> = xs.iter().map(|x| (x - s.mean).powi(4)).collect();
        let m4 = pairwise_sum(&m4) / n;
        ((m4 - s.var * s.var * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }

    /// `|mean - target| / std_err`; zero when both the spread and the
    /// deviation vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = (self.mean - target).abs();
        let se = self.std_err();
        if se == 0.0 {
            if dev == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            dev / se
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 49_995_000.0);
    }

    #[test]
    fn det_sum_is_thread_count_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| det_sum(100_000, f));
        let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| det_sum(100_000, f));
        assert_eq!(serial.to_bits(), parallel.to_bits());
    }

    #[test]
    fn piecewise_midpoint_is_exact_for_step_functions() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let v = integrate_piecewise(step, 0.0, 1.0, &[0.3], 3.0, 1);
        assert!((v - (0.3 + 1.4)).abs() < 1e-14);
    }

    #[test]
    fn z_score_degenerate_cases() {
        let s = SampleStats::from_slice(&[1.0, 1.0, 1.0]);
        assert_eq!(s.z_score(1.0), 0.0);
        assert!(s.z_score(2.0).is_infinite());
    }
}
