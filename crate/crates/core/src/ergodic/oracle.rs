use num_rational::BigRational;
use num_traits::Zero;

use crate::cocycle::{DensitySpec, NonsingularAction, TranslationSystem};
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind};
use crate::poisson::Functional;
use crate::scalar::Real;

fn exact<T: Real>(v: T) -> Result<BigRational> {
    BigRational::from_float(v.as_f64()).ok_or_else(|| Error::Domain(format!("{v} is not finite")))
}

/// Exact ratio average `Σ_{k∈S} ∇_k(x) f(x+k) / Σ_{k∈S} ∇_k(x)` on a `ℤ`
/// carrier. Density values and `f` values enter as the exact rationals of
/// their floating point representations; all arithmetic is rational.
pub fn countable_oracle<T, F>(sys: &TranslationSystem<T>, f: F, x: i64, s: &[i64]) -> Result<BigRational>
where
    T: Real,
    F: Fn(i64) -> T,
{
    if sys.group().kind() != GroupKind::Lattice(1) {
        return Err(Error::ModelMismatch("the countable oracle runs on Z".into()));
    }
    if s.is_empty() {
        return Err(Error::DegenerateWindow("empty averaging set".into()));
    }
    let dens = |k: i64| exact(sys.density_at(&Element::lattice(&[k])));
    let base = dens(x)?;
    let (mut num, mut den) = (BigRational::zero(), BigRational::zero());
    for &k in s {
        let nab = dens(x + k)? / base.clone();
        num += nab.clone() * exact(f(x + k))?;
        den += nab;
    }
    Ok(num / den)
}

/// `E[φ]` under the Poisson law of intensity `∂`, in closed form.
pub fn poisson_expectation<T: Real>(phi: &Functional<T>, density: &DensitySpec<T>) -> Result<f64> {
    let m = match phi.set() {
        Some(a) => density
            .mass_in_box(a.lo(), a.hi())
            .ok_or_else(|| Error::ModelMismatch("count set and density dimensions differ".into()))?
            .as_f64(),
        None => 0.0,
    };
    Ok(match phi {
        Functional::ExpNegCount(_) => (m * ((-1f64).exp() - 1.0)).exp(),
        Functional::IndicatorEmpty(_) => (-m).exp(),
        Functional::MinCount(_, cap) => {
            let mut pmf = (-m).exp();
            let (mut below, mut mean) = (0.0, 0.0);
            for k in 0..*cap {
                below += pmf;
                mean += k as f64 * pmf;
                pmf *= m / (k + 1) as f64;
            }
            mean + *cap as f64 * (1.0 - below)
        }
        Functional::Constant(c) => c.as_f64(),
    })
}
