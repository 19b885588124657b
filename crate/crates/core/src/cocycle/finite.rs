use num_traits::Num;

use crate::error::{Error, Result};

/// A finite set `{0, …, n−1}` with positive weights, acted on by the cyclic
/// group `ℤ/m` through powers of a permutation `σ` (`m` is the order of
/// `σ`), together with an equivalence relation refining the orbits.
///
/// Arithmetic is generic so that the model can run on exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteModel<F> {
    perm: Vec<usize>,
    order: usize,
    weights: Vec<F>,
    classes: Vec<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl<F: Clone + Num + PartialOrd> FiniteModel<F> {
    /// `classes[i]` labels the class of point `i`; classes must lie inside
    /// orbits of `σ`.
    pub fn new(perm: Vec<usize>, weights: Vec<F>, classes: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n == 0 || weights.len() != n || classes.len() != n {
            return Err(Error::Parameter("permutation, weights and classes must share a nonzero length".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::Parameter("not a permutation".into()));
            }
            seen[p] = true;
        }
        if weights.iter().any(|w| !(*w > F::zero())) {
            return Err(Error::Nonsingularity("weights must be positive".into()));
        }
        let mut order = 1;
        let mut orbit_id = vec![usize::MAX; n];
        for start in 0..n {
            if orbit_id[start] != usize::MAX {
                continue;
            }
            let (mut x, mut len) = (start, 0);
            loop {
                orbit_id[x] = start;
                x = perm[x];
                len += 1;
                if x == start {
                    break;
                }
            }
            order = order / gcd(order, len) * len;
        }
        for i in 0..n {
            for j in 0..n {
                if classes[i] == classes[j] && orbit_id[i] != orbit_id[j] {
                    return Err(Error::Parameter(format!("points {i} and {j} share a class but not an orbit")));
                }
            }
        }
        Ok(Self { perm, order, weights, classes })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Order of the acting cyclic group.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn class(&self, x: usize) -> usize {
        self.classes[x]
    }

    fn check(&self, x: usize) -> Result<()> {
        if x >= self.len() {
            return Err(Error::Domain(format!("point {x} outside the carrier")));
        }
        Ok(())
    }

    /// `σᵏ(x)`.
    pub fn act(&self, k: usize, x: usize) -> Result<usize> {
        self.check(x)?;
        Ok((0..k % self.order).fold(x, |y, _| self.perm[y]))
    }

    /// `∇_k(x) = w(σᵏ x) / w(x)`.
    pub fn nabla(&self, k: usize, x: usize) -> Result<F> {
        let y = self.act(k, x)?;
        Ok(self.weights[y].clone() / self.weights[x].clone())
    }

    /// Group elements `k` with `σᵏ(x)` in the class of `x`.
    pub fn displacement(&self, x: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        let mut out = Vec::new();
        let mut y = x;
        for k in 0..self.order {
            if self.classes[y] == self.classes[x] {
                out.push(k);
            }
            y = self.perm[y];
        }
        Ok(out)
    }

    /// `Σ_{k ∈ G_E(x)} ∇_k(x) f(σᵏ x) / Σ_{k ∈ G_E(x)} ∇_k(x)`.
    pub fn cond_exp_ratio(&self, f: &[F], x: usize) -> Result<F> {
        if f.len() != self.len() {
            return Err(Error::Parameter("function length does not match the carrier".into()));
        }
        let (mut num, mut den) = (F::zero(), F::zero());
        for k in self.displacement(x)? {
            let nab = self.nabla(k, x)?;
            let y = self.act(k, x)?;
            num = num + nab.clone() * f[y].clone();
            den = den + nab;
        }
        Ok(num / den)
    }

    /// The conditional expectation as a function on the carrier.
    pub fn cond_exp(&self, f: &[F]) -> Result<Vec<F>> {
        (0..self.len()).map(|x| self.cond_exp_ratio(f, x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::FromPrimitive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn two_point_weighted_average() {
        let m = FiniteModel::new(vec![1, 0], vec![q(1, 3), q(2, 3)], vec![0, 0]).unwrap();
        let f = vec![q(3, 1), q(0, 1)];
        assert_eq!(m.cond_exp_ratio(&f, 0).unwrap(), q(1, 1));
        assert_eq!(m.cond_exp_ratio(&f, 1).unwrap(), q(1, 1));
    }

    #[test]
    fn order_is_lcm_of_cycles() {
        let m = FiniteModel::new(vec![1, 0, 3, 4, 2], vec![1.0; 5], vec![0, 0, 1, 1, 1]).unwrap();
        assert_eq!(m.order(), 6);
        assert_eq!(m.act(6, 3).unwrap(), 3);
        assert_eq!(m.displacement(0).unwrap().len(), 6);
    }

    #[test]
    fn classes_must_refine_orbits() {
        let r = FiniteModel::new(vec![0, 1], vec![1.0, 1.0], vec![0, 0]);
        assert!(matches!(r, Err(Error::Parameter(_))));
        let r = FiniteModel::new(vec![0], vec![-1.0], vec![0]);
        assert!(matches!(r, Err(Error::Nonsingularity(_))));
        let m = FiniteModel::new(vec![0], vec![BigRational::from_i64(2).unwrap()], vec![0]).unwrap();
        assert!(matches!(m.act(0, 3), Err(Error::Domain(_))));
    }
}
