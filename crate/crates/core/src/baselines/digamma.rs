use crate::scalar::Scalar;

/// Digamma `Psi(x)` for `x > 0`: the recurrence `Psi(x) = Psi(x+1) - 1/x`
/// lifts the argument to `x >= 6`, where the asymptotic series is summed.
pub fn digamma<T: Scalar>(x: T) -> T {
    let mut x = x.to_f64_lossy();
    if x.is_nan() || x <= 0.0 {
        return T::nan();
    }
    let mut acc = 0.0;
    while x < 6.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // B_{2k} / (2k) for k = 1..7, summed as a polynomial in 1/x^2
    const COEFFS: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let series = inv2 * COEFFS.iter().rev().fold(0.0, |acc, &c| acc * inv2 + c);
    T::lit(acc + x.ln() - 0.5 * inv - series)
}
