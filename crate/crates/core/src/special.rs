//! Scalar special functions on top of `libm`.

/// Gaussian tail `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// `ln Q(x)`, accurate where `Q(x)` itself underflows.
pub fn ln_q_function(x: f64) -> f64 {
    if x < 30.0 {
        return libm::log(q_function(x));
    }
    // Q(x) = φ(x)/x · (1 - 1/x² + 3/x⁴ - 15/x⁶ + ...)
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    -x2 / 2.0 - libm::log(x) - 0.5 * libm::log(2.0 * core::f64::consts::PI) + libm::log(series)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Volume of the unit ball in `dim` real dimensions.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    libm::exp(half * libm::log(core::f64::consts::PI) - ln_gamma(half + 1.0))
}
