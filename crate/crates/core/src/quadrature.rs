//! Eight-point Gauss–Legendre rule on a finite interval.

const NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];

const WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `∫_a^b g(x) dx`, exact for polynomials of degree ≤ 15.
pub fn integrate<G: FnMut(f64) -> f64>(a: f64, b: f64, mut g: G) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    NODES
        .iter()
        .zip(WEIGHTS.iter())
        .map(|(x, w)| w * g(mid + half * x))
        .sum::<f64>()
        * half
}

/// Mapped nodes and weights on `[a, b]`.
pub fn nodes(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    NODES.iter().zip(WEIGHTS.iter()).map(move |(x, w)| (mid + half * x, w * half))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(0.0, 2.0, |x| x * x * x * x * x * x * x);
        assert!((v - 32.0).abs() < 1e-12);
        let w: f64 = nodes(-1.0, 3.0).map(|(_, w)| w).sum();
        assert!((w - 4.0).abs() < 1e-14);
    }
}
