use std::path::{Path, PathBuf};

use ergolab::cocycle::{Bump, DensitySpec, TestFunction};
use ergolab::poisson::{Functional, PiTransform};
use ergolab::{Element, GroupModel, QuadMethod, QuadratureScheme, Window};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::Failure;

pub const EXPERIMENTS: &[&str] = &[
    "net",
    "voronoi",
    "filtration",
    "folner",
    "cocycle",
    "condexp",
    "hopf",
    "poisson",
    "rnstar",
    "upsilon",
    "ergodic",
    "suspension-ergodicity",
];

/// The top-level config file. Blocks an experiment does not use must be
/// absent; blocks it needs must be present.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub output: PathBuf,
    pub workers: Option<usize>,
    pub seeds: Option<Seeds>,
    pub group: Option<GroupBlock>,
    pub density: Option<DensityBlock>,
    pub window: Option<WindowBlock>,
    pub levels: Option<[usize; 2]>,
    pub quadrature: Option<QuadBlock>,
    pub params: Option<serde_json::Value>,
}

/// An explicit list, or `{"first": a, "count": n}` for `a, a+1, …, a+n−1`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range(SeedRange),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub first: u64,
    pub count: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum GroupKindName {
    Real,
    Euclidean,
    Lattice,
    Affine,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupBlock {
    pub kind: GroupKindName,
    pub dim: u8,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum DensityBlock {
    Constant { value: f64 },
    PlateauBox { lo: Vec<f64>, hi: Vec<f64>, height: f64 },
    PlateauCosine { center: Vec<f64>, radius: f64, height: f64 },
    Cauchy { scale: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowBlock {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum QuadMethodName {
    Grid,
    MonteCarlo,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadBlock {
    pub method: QuadMethodName,
    pub resolution: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum FunctionalBlock {
    ExpNegCount { set: WindowBlock },
    MinCount { set: WindowBlock, cap: usize },
    IndicatorEmpty { set: WindowBlock },
    Constant { value: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionBlock {
    Indicator { lo: f64, hi: f64 },
    CosineBump { center: f64, radius: f64 },
    Cosine { frequency: f64 },
}

/// Interval exchange of `perm.len()` equal-mass pieces of `[lo, hi)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiBlock {
    pub lo: f64,
    pub hi: f64,
    pub perm: Vec<usize>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read config {}: {e}", path.display()), None))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Failure::from_serde(&e, ""))?;
    if !EXPERIMENTS.contains(&cfg.experiment.as_str()) {
        return Err(Failure::validation(
            format!("unknown experiment `{}`; see `ergolab list`", cfg.experiment),
            Some("experiment".into()),
        ));
    }
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn params<P: DeserializeOwned>(&self) -> Result<P, Failure> {
        let v = self.params.clone().ok_or_else(|| Failure::missing("params"))?;
        serde_json::from_value(v).map_err(|e| Failure::from_serde(&e, "params."))
    }

    pub fn seeds(&self) -> Result<Vec<u64>, Failure> {
        let s: Vec<u64> = match &self.seeds {
            Some(Seeds::List(v)) => v.clone(),
            Some(Seeds::Range(r)) => (r.first..r.first.saturating_add(r.count)).collect(),
            None => return Err(Failure::missing("seeds")),
        };
        if s.is_empty() {
            return Err(Failure::validation("seeds must be nonempty".into(), Some("seeds".into())));
        }
        Ok(s)
    }

    pub fn group(&self) -> Result<GroupModel<f64>, Failure> {
        let g = self.group.as_ref().ok_or_else(|| Failure::missing("group"))?;
        let m = match g.kind {
            GroupKindName::Real if g.dim == 1 => Ok(GroupModel::real_line()),
            GroupKindName::Real => Err(ergolab::Error::Parameter("the real line has dim 1".into())),
            GroupKindName::Euclidean => GroupModel::euclidean(g.dim),
            GroupKindName::Lattice => GroupModel::lattice(g.dim),
            GroupKindName::Affine if g.dim == 2 => Ok(GroupModel::affine()),
            GroupKindName::Affine => Err(ergolab::Error::Parameter("the affine group has dim 2".into())),
        };
        m.map_err(|e| Failure::core(e).with_key("group"))
    }

    pub fn density(&self) -> Result<DensitySpec<f64>, Failure> {
        let d = self.density.as_ref().ok_or_else(|| Failure::missing("density"))?;
        let spec = match d {
            DensityBlock::Constant { value } => DensitySpec::Constant(*value),
            DensityBlock::PlateauBox { lo, hi, height } => {
                DensitySpec::Plateau(Bump::Box { lo: lo.clone(), hi: hi.clone(), height: *height })
            }
            DensityBlock::PlateauCosine { center, radius, height } => {
                DensitySpec::Plateau(Bump::Cosine { center: center.clone(), radius: *radius, height: *height })
            }
            DensityBlock::Cauchy { scale } => DensitySpec::Cauchy(*scale),
        };
        spec.validated().map_err(|e| Failure::core(e).with_key("density"))
    }

    pub fn window(&self) -> Result<Window<f64>, Failure> {
        let w = self.window.as_ref().ok_or_else(|| Failure::missing("window"))?;
        w.build("window")
    }

    pub fn levels(&self) -> Result<std::ops::RangeInclusive<usize>, Failure> {
        let [a, b] = self.levels.ok_or_else(|| Failure::missing("levels"))?;
        if a > b {
            return Err(Failure::validation("levels must be [first, last] with first <= last".into(), Some("levels".into())));
        }
        Ok(a..=b)
    }

    pub fn quadrature(&self) -> Result<QuadratureScheme, Failure> {
        let q = self.quadrature.as_ref().ok_or_else(|| Failure::missing("quadrature"))?;
        let method = match q.method {
            QuadMethodName::Grid => QuadMethod::Grid,
            QuadMethodName::MonteCarlo => QuadMethod::MonteCarlo,
        };
        QuadratureScheme::new(method, q.resolution, q.seed).map_err(|e| Failure::core(e).with_key("quadrature"))
    }
}

impl WindowBlock {
    pub fn build(&self, key: &str) -> Result<Window<f64>, Failure> {
        Window::new(&self.lo, &self.hi).map_err(|e| Failure::core(e).with_key(key))
    }
}

impl FunctionalBlock {
    pub fn build(&self) -> Result<Functional<f64>, Failure> {
        let w = |s: &WindowBlock| s.build("params.functional.set");
        Ok(match self {
            FunctionalBlock::ExpNegCount { set } => Functional::ExpNegCount(w(set)?),
            FunctionalBlock::MinCount { set, cap } => Functional::MinCount(w(set)?, *cap),
            FunctionalBlock::IndicatorEmpty { set } => Functional::IndicatorEmpty(w(set)?),
            FunctionalBlock::Constant { value } => Functional::Constant(*value),
        })
    }
}

impl TestFunctionBlock {
    /// The function on the first chart coordinate.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunctionBlock::Indicator { lo, hi } => TestFunction::Indicator { lo, hi }.eval(x),
            TestFunctionBlock::CosineBump { center, radius } => TestFunction::CosineBump { center, radius }.eval(x),
            TestFunctionBlock::Cosine { frequency } => (frequency * x).cos(),
        }
    }

    pub fn on_element(&self) -> impl Fn(&Element<f64>) -> f64 + Sync + '_ {
        move |g: &Element<f64>| self.eval(g.chart()[0])
    }
}

impl PiBlock {
    pub fn build(&self, density: &DensitySpec<f64>) -> Result<PiTransform<f64>, Failure> {
        PiTransform::equal_mass(density.clone(), self.lo, self.hi, self.perm.clone())
            .map_err(|e| Failure::core(e).with_key("params.pis"))
    }
}
