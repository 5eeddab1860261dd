//! Five-point Gauss–Legendre rule for cell averages.

const NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Average of `f` over `[a, b]`.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let s: f64 = NODES
        .iter()
        .zip(WEIGHTS.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum();
    0.5 * s
}

/// Average of `f` over `[a, b]`, integrating piecewise between `breaks`
/// that fall inside the interval (kinks or jumps of `f`).
pub fn piecewise_average(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut lo = a;
    let mut acc = 0.0;
    for x in pts.into_iter().chain(std::iter::once(b)) {
        if x > lo {
            acc += (x - lo) * gauss_legendre(&f, lo, x);
        }
        lo = x;
    }
    acc / (b - a)
}
