//! Quintic Hermite interpolation from values and first two derivatives.

/// Value and first derivative at `x` of the quintic matching
/// `(p, p', p'')` at both ends of `[x0, x1]`.
pub(crate) fn hermite5(x0: f64, x1: f64, p0: [f64; 3], p1: [f64; 3], x: f64) -> (f64, f64) {
    let dx = x1 - x0;
    let s = (x - x0) / dx;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let h3 = 0.5 * s3 - s4 + 0.5 * s5;
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let value = h0 * p0[0]
        + dx * (h1 * p0[1] + h4 * p1[1])
        + dx * dx * (h2 * p0[2] + h3 * p1[2])
        + h5 * p1[0];

    let g0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let g1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let g2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let g3 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    let g4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let g5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    let slope = (g0 * p0[0]
        + dx * (g1 * p0[1] + g4 * p1[1])
        + dx * dx * (g2 * p0[2] + g3 * p1[2])
        + g5 * p1[0])
        / dx;
    (value, slope)
}

/// Index `i` with `xs[i] <= x <= xs[i + 1]`, clamped to the valid range.
pub(crate) fn interval_index(xs: &[f64], x: f64) -> usize {
    let i = xs.partition_point(|&v| v <= x);
    i.saturating_sub(1).min(xs.len().saturating_sub(2))
}
