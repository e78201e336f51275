// libm keeps results identical with and without std.

pub(crate) const LN_10: f64 = core::f64::consts::LN_10;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn log10(x: f64) -> f64 {
    libm::log10(x)
}

/// `10^(2x)`.
#[inline]
pub(crate) fn exp10_2x(x: f64) -> f64 {
    libm::pow(10.0, 2.0 * x)
}
