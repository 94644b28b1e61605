#pragma once

#include "repdyn/mdp.hpp"

namespace repdyn {

/// exp(t A) by Pade scaling and squaring. Throws NumericalError if the
/// result overflows.
Matrix matrix_exponential(const Matrix& a, double t = 1.0);

}  // namespace repdyn
