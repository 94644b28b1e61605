#include "repdyn/linalg.hpp"

#include "repdyn/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace repdyn {

Matrix matrix_exponential(const Matrix& a, double t) {
  if (a.rows() != a.cols()) throw ConfigurationError("matrix_exponential: matrix must be square");
  if (!a.allFinite() || !std::isfinite(t)) throw ConfigurationError("matrix_exponential: non-finite input");
  Matrix out = (t * a).exp();
  if (!out.allFinite()) throw NumericalError("matrix_exponential: overflow (|tA|_1 too large)");
  return out;
}

}  // namespace repdyn
