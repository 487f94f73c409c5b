//! Potentials `φ` evaluated on the points of a model.

/// A bounded potential on the points `P` of a model.
pub trait Potential<P> {
    fn value(&self, x: &P) -> f64;

    /// `Some(c)` when the potential is the constant `c`.
    fn as_constant(&self) -> Option<f64> {
        None
    }
}

/// `φ ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstPotential(pub f64);

impl<P> Potential<P> for ConstPotential {
    fn value(&self, _x: &P) -> f64 {
        self.0
    }

    fn as_constant(&self) -> Option<f64> {
        Some(self.0)
    }
}

/// Wraps any closure as a potential.
pub struct FnPotential<F>(pub F);

impl<P, F: Fn(&P) -> f64> Potential<P> for FnPotential<F> {
    fn value(&self, x: &P) -> f64 {
        (self.0)(x)
    }
}

/// Hölder data `|φ(x) − φ(x′)| ≤ constant · σ(x, x′)^exponent` declared by the
/// caller of the cocycle machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderData {
    pub constant: f64,
    pub exponent: f64,
}

impl HolderData {
    /// Data for a constant potential.
    pub const CONSTANT: HolderData = HolderData { constant: 0.0, exponent: 1.0 };
}
