//! Small dense-vector helpers shared across the crate.

/// Dot product. Lengths must match.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn l2_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// l-infinity distance between two vectors.
pub fn linf_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Clamps every coordinate into the unit interval, the input domain Ω.
pub fn clamp_unit(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// True when every coordinate lies in [0, 1].
pub fn in_unit_box(x: &[f64]) -> bool {
    x.iter().all(|&v| (0.0..=1.0).contains(&v))
}

/// Sign with `sign(0) = 0`, so zero-gradient coordinates stay put.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
