//! Map-spec files and the choice of model a map is studied through.

use std::path::Path;

use anyhow::{bail, Context};
use ratdyn_core::models::{CircleModel, IntervalModel, QuasicircleModel};
use ratdyn_core::{Complex64, RationalMap};
use serde::{Deserialize, Serialize};

/// `{"num": [[re, im], …], "den": [[re, im], …]}`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

fn to_complex(c: &[[f64; 2]]) -> Vec<Complex64> {
    c.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

impl MapSpec {
    pub fn from_map(f: &RationalMap) -> Self {
        let pairs = |c: &[Complex64]| c.iter().map(|z| [z.re, z.im]).collect();
        MapSpec { num: pairs(f.num()), den: pairs(f.den()) }
    }

    pub fn to_map(&self) -> ratdyn_core::Result<RationalMap> {
        RationalMap::new(to_complex(&self.num), to_complex(&self.den))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing map spec {}", path.display()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pairs = |c: &[[f64; 2]]| serde_json::Value::Array(c.iter().map(|p| crate::formats::num_array(p)).collect());
        serde_json::json!({ "num": pairs(&self.num), "den": pairs(&self.den) })
    }

    /// `Some((d, c))` when the map is `z^d + c` (denominator a nonzero constant).
    pub fn as_unicritical(&self) -> Option<(u32, Complex64)> {
        let num = to_complex(&self.num);
        let den = to_complex(&self.den);
        let scale = *den.first()?;
        if scale.norm() == 0.0 || den[1..].iter().any(|z| z.norm() != 0.0) {
            return None;
        }
        let d = num.iter().rposition(|z| z.norm() != 0.0)?;
        if d < 2 || (num[d] / scale - 1.0).norm() > 1e-12 || num[1..d].iter().any(|z| z.norm() != 0.0) {
            return None;
        }
        Some((d as u32, num[0] / scale))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// `z^d` on the unit circle, coded by angle multiplication.
    Circle,
    /// A real quadratic polynomial on its invariant segment, coded by the tent map.
    Tent,
    /// `z^d + c` on its Julia quasicircle, coded through the conjugacy with `z^d`.
    Disk,
}

/// A map together with the model it is studied through.
pub enum Model {
    Circle(CircleModel),
    Tent(IntervalModel),
    Disk(QuasicircleModel),
    Sphere(RationalMap),
}

impl Model {
    pub fn new(spec: &MapSpec, kind: Option<ModelKind>) -> anyhow::Result<Self> {
        let f = spec.to_map()?;
        Ok(match kind {
            None => Model::Sphere(f),
            Some(ModelKind::Circle) => match spec.as_unicritical() {
                Some((d, c)) if c.norm() == 0.0 => Model::Circle(CircleModel::new(d)?),
                _ => bail!("--model circle needs a map z^d"),
            },
            Some(ModelKind::Tent) => Model::Tent(IntervalModel::from_map(&f)?),
            Some(ModelKind::Disk) => match spec.as_unicritical() {
                Some((d, c)) => Model::Disk(QuasicircleModel::new(d, c)?),
                None => bail!("--model disk needs a map z^d + c"),
            },
        })
    }

    /// The most specific model that accepts the map: `z^d` on the circle, a
    /// quadratic conjugate to `z^2 - 2` on its segment, `z^d + c` on its
    /// quasicircle, and the whole sphere otherwise.
    pub fn detect(spec: &MapSpec) -> anyhow::Result<Self> {
        for kind in [ModelKind::Circle, ModelKind::Tent, ModelKind::Disk] {
            if let Ok(model) = Model::new(spec, Some(kind)) {
                return Ok(model);
            }
        }
        Model::new(spec, None)
    }

    pub fn degree(&self) -> usize {
        match self {
            Model::Circle(m) => ratdyn_core::models::Dynamics::degree(m),
            Model::Tent(m) => ratdyn_core::models::Dynamics::degree(m),
            Model::Disk(m) => m.map().degree(),
            Model::Sphere(f) => f.degree(),
        }
    }

    pub fn kind(&self) -> Option<ModelKind> {
        match self {
            Model::Circle(_) => Some(ModelKind::Circle),
            Model::Tent(_) => Some(ModelKind::Tent),
            Model::Disk(_) => Some(ModelKind::Disk),
            Model::Sphere(_) => None,
        }
    }
}

/// Runs `$sym` with `$m` bound to the symbolic model, or `$sphere` with `$f`
/// bound to the rational map.
#[macro_export]
macro_rules! with_model {
    ($model:expr, $m:ident => $sym:expr, $f:ident => $sphere:expr) => {
        match $model {
            $crate::model::Model::Circle($m) => $sym,
            $crate::model::Model::Tent($m) => $sym,
            $crate::model::Model::Disk($m) => $sym,
            $crate::model::Model::Sphere($f) => $sphere,
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection_matches_the_registry() {
        for case in crate::registry::cases() {
            assert_eq!(Model::detect(&case.spec).unwrap().kind(), case.model, "{}", case.name);
        }
    }

    #[test]
    fn unicritical_detection() {
        let z2 = MapSpec { num: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], den: vec![[1.0, 0.0]] };
        assert_eq!(z2.as_unicritical(), Some((2, Complex64::new(0.0, 0.0))));
        let c = MapSpec { num: vec![[0.1, 0.0], [0.0, 0.0], [2.0, 0.0]], den: vec![[2.0, 0.0]] };
        assert_eq!(c.as_unicritical(), Some((2, Complex64::new(0.05, 0.0))));
        let cheb = MapSpec { num: vec![[0.0, 0.0], [4.0, 0.0], [-4.0, 0.0]], den: vec![[1.0, 0.0]] };
        assert_eq!(cheb.as_unicritical(), None);
        assert!(matches!(Model::new(&cheb, Some(ModelKind::Tent)).unwrap(), Model::Tent(_)));
        assert!(Model::new(&cheb, Some(ModelKind::Circle)).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let f = RationalMap::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)],
        )
        .unwrap();
        let spec = MapSpec::from_map(&f);
        let text = serde_json::to_string(&spec.to_json()).unwrap();
        let back: MapSpec = serde_json::from_str(&text).unwrap();
        for (a, b) in spec.num.iter().chain(&spec.den).zip(back.num.iter().chain(&back.den)) {
            assert!((a[0] - b[0]).abs() <= 1e-15 * a[0].abs() && (a[1] - b[1]).abs() <= 1e-15 * a[1].abs());
        }
    }
}
