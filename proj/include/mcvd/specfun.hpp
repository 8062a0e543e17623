#pragma once

/// Scalar special functions used by the closed-form channel expressions.
///
/// These are implemented in-repo (Chebyshev fit of the scaled complementary
/// error function plus a small-argument series) so the accuracy contracts do
/// not depend on what the platform libm happens to provide.  In particular,
/// erfcx is needed to evaluate e^{b^2}*erfc(b) products that overflow in
/// their naive form once b exceeds ~27.
///
/// Accuracy (verified against 40-digit references in the test suite):
///   erf    absolute error  <= 1e-14 for all finite x
///   erfc   relative error  <= 1e-12 for x in [0, 26]
///   erfcx  relative error  <= 1e-10 for x in [0, 1e6], no overflow

namespace mcvd::specfun {

/// Error function. Odd, erf(0) == 0 exactly, saturates to +-1.
double erf(double x);

/// Complementary error function, 1 - erf(x), without cancellation for
/// large positive x.
double erfc(double x);

/// Scaled complementary error function exp(x^2)*erfc(x) for x >= 0.
/// Throws std::invalid_argument for x < 0.
double erfcx(double x);

}  // namespace mcvd::specfun
