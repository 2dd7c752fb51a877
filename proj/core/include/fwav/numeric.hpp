#pragma once

#include <cmath>

namespace fwav {

/// Signum with sgn(0) = 0.
inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

/// sgn(x) * x^2, the signed quadratic used by every drag and torque law.
inline double signed_square(double x) { return x * std::abs(x); }

}  // namespace fwav
