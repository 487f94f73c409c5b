//! Benchmark maps with known quantities, each traced to where it comes from.

use anyhow::bail;
use ratdyn_core::models::Interval;

use crate::model::{MapSpec, ModelKind};

/// A known value and the reason it is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub provenance: &'static str,
}

const fn q(value: f64, provenance: &'static str) -> Option<Quantity> {
    Some(Quantity { value, provenance })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Known {
    pub chi: Option<Quantity>,
    pub entropy: Option<Quantity>,
    /// Conformal pair `(t, φ)` of the reference measure.
    pub t: Option<Quantity>,
    pub phi_const: Option<Quantity>,
    /// Dimension of the invariant measure.
    pub hd: Option<Quantity>,
    /// Closed form of `P(t)` and its provenance.
    pub pressure_closed_form: Option<(&'static str, &'static str)>,
}

impl Known {
    fn quantities(&self) -> impl Iterator<Item = &Quantity> {
        [&self.chi, &self.entropy, &self.t, &self.phi_const, &self.hd].into_iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub spec: MapSpec,
    pub model: Option<ModelKind>,
    /// Base of the induced map, in the symbolic coordinate.
    pub base: Option<Interval>,
    pub known: Known,
    /// Largest radius of dimension scans.
    pub scan_r0: f64,
    pub caution: Option<&'static str>,
    pub provenance: &'static str,
}

fn real(coeffs: &[f64]) -> Vec<[f64; 2]> {
    coeffs.iter().map(|c| [*c, 0.0]).collect()
}

/// Checks that every case and every known quantity says where it comes from.
pub fn validate(cases: &[BenchmarkCase]) -> anyhow::Result<()> {
    for c in cases {
        if c.provenance.trim().is_empty() {
            bail!("case {} has no provenance note", c.name);
        }
        if c.known.quantities().any(|q| q.provenance.trim().is_empty())
            || c.known.pressure_closed_form.is_some_and(|(_, p)| p.trim().is_empty())
        {
            bail!("case {} has a known quantity without provenance", c.name);
        }
    }
    Ok(())
}

const LN2: f64 = std::f64::consts::LN_2;

pub fn cases() -> Vec<BenchmarkCase> {
    let unit_doubling = Known {
        chi: q(LN2, "|Df| = 2 at every point of the unit circle"),
        entropy: q(LN2, "arc length is the Bernoulli(1/2, 1/2) measure in binary digits"),
        t: q(1.0, "arc length has Jacobian |Df| under z^2 on the circle"),
        phi_const: q(0.0, "arc length has Jacobian |Df| under z^2 on the circle"),
        hd: q(1.0, "arc length on a circle"),
        pressure_closed_form: Some(("(1 - t) log 2", "|Df| is constant and the topological entropy is log 2")),
    };
    let tent = Known {
        chi: q(LN2, "conjugacy to the tent map, whose slope is 2 everywhere"),
        entropy: q(LN2, "the arcsine measure is the maximal-entropy measure of a degree-2 interval map"),
        t: q(1.0, "Lebesgue measure on the segment has Jacobian |Df|"),
        phi_const: q(0.0, "Lebesgue measure on the segment has Jacobian |Df|"),
        hd: q(1.0, "the arcsine density is integrable and positive"),
        pressure_closed_form: None,
    };
    vec![
        BenchmarkCase {
            name: "z2",
            spec: MapSpec { num: real(&[0.0, 0.0, 1.0]), den: real(&[1.0]) },
            model: Some(ModelKind::Circle),
            base: Some(Interval::from_ratios((0, 1), (1, 2))),
            known: unit_doubling,
            scan_r0: 0.2,
            caution: None,
            provenance: "squaring on the unit circle, coded by angle doubling",
        },
        BenchmarkCase {
            name: "z3",
            spec: MapSpec { num: real(&[0.0, 0.0, 0.0, 1.0]), den: real(&[1.0]) },
            model: Some(ModelKind::Circle),
            base: Some(Interval::from_ratios((0, 1), (2, 3))),
            known: Known {
                chi: q(3f64.ln(), "|Df| = 3 on the unit circle"),
                entropy: q(3f64.ln(), "arc length is the uniform Bernoulli measure on three symbols"),
                t: q(1.0, "arc length has Jacobian |Df| under z^3 on the circle"),
                phi_const: q(0.0, "arc length has Jacobian |Df| under z^3 on the circle"),
                hd: q(1.0, "arc length on a circle"),
                pressure_closed_form: Some(("(1 - t) log 3", "|Df| is constant and the topological entropy is log 3")),
            },
            scan_r0: 0.2,
            caution: None,
            provenance: "cubing on the unit circle, coded by angle tripling",
        },
        BenchmarkCase {
            name: "chebyshev",
            spec: MapSpec { num: real(&[0.0, 4.0, -4.0]), den: real(&[1.0]) },
            model: Some(ModelKind::Tent),
            base: Some(Interval::from_ratios((1, 4), (1, 2))),
            known: tent.clone(),
            scan_r0: 0.02,
            caution: None,
            provenance: "x -> 4x(1-x) on [0, 1], conjugate to the tent map by x = sin^2(pi theta / 2)",
        },
        BenchmarkCase {
            name: "z2-2",
            spec: MapSpec { num: real(&[-2.0, 0.0, 1.0]), den: real(&[1.0]) },
            model: Some(ModelKind::Tent),
            base: Some(Interval::from_ratios((1, 4), (1, 2))),
            known: tent,
            scan_r0: 0.08,
            caution: None,
            provenance: "z^2 - 2 on [-2, 2], affinely conjugate to the Chebyshev map",
        },
        BenchmarkCase {
            name: "z2+0.1",
            spec: MapSpec { num: real(&[0.1, 0.0, 1.0]), den: real(&[1.0]) },
            model: Some(ModelKind::Disk),
            base: Some(Interval::from_ratios((0, 1), (1, 2))),
            known: Known {
                entropy: q(LN2, "maximal-entropy measure of a degree-2 map"),
                t: q(0.0, "the maximal-entropy measure has constant Jacobian d"),
                phi_const: q(LN2, "the maximal-entropy measure has constant Jacobian d"),
                chi: q(LN2, "log d plus Green's function at the critical points, which vanishes for a connected Julia set"),
                hd: q(1.0, "for a polynomial the maximal-entropy measure is harmonic measure, of dimension 1"),
                ..Known::default()
            },
            scan_r0: 0.25,
            caution: None,
            provenance: "hyperbolic quadratic with an attracting fixed point; Julia set a quasicircle conjugate to the unit circle",
        },
        BenchmarkCase {
            name: "lattes",
            spec: MapSpec { num: real(&[1.0, 0.0, 1.0]), den: vec![[0.0, 0.0], [0.0, 2.0]] },
            model: None,
            base: None,
            known: Known {
                chi: q(0.5 * LN2, "Lattes map of the doubling on a square torus: |Df| = sqrt 2 in the flat metric"),
                entropy: q(LN2, "the Lebesgue-equivalent acip is the maximal-entropy measure"),
                t: q(2.0, "spherical Lebesgue measure has Jacobian |Df|^2"),
                phi_const: q(0.0, "spherical Lebesgue measure has Jacobian |Df|^2"),
                hd: q(2.0, "the acip is equivalent to Lebesgue measure on the sphere"),
                pressure_closed_form: None,
            },
            scan_r0: 0.2,
            caution: Some("exceptional-measure caution: Julia set is the whole sphere; only h = 2 chi is checked"),
            provenance: "(z^2 + 1) / (2iz), a degree-2 Lattes map with critical points 1 and -1",
        },
    ]
}

pub fn find(name: &str) -> Option<BenchmarkCase> {
    cases().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    #[test]
    fn registry_is_valid_and_builds() {
        let all = cases();
        validate(&all).unwrap();
        for c in &all {
            let m = Model::new(&c.spec, c.model).unwrap();
            assert_eq!(m.degree(), if c.name == "z3" { 3 } else { 2 }, "{}", c.name);
        }
    }

    #[test]
    fn entries_without_provenance_are_rejected() {
        let mut c = find("z2").unwrap();
        c.known.chi = Some(Quantity { value: 1.0, provenance: " " });
        assert!(validate(&[c]).is_err());
        let mut c = find("z2").unwrap();
        c.provenance = "";
        assert!(validate(&[c]).is_err());
    }
}
