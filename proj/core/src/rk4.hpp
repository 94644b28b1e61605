#pragma once

#include "repdyn/errors.hpp"
#include "repdyn/mdp.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace repdyn::detail {

void validate_times(const std::vector<double>& times, const char* who);

inline void axpy(Matrix& out, const Matrix& x, double h, const Matrix& k) { out.noalias() = x + h * k; }

inline double divergence_norm(const Matrix& x) { return x.norm(); }

// Advances x from t = 0 through every requested time, calling
// record(t, x) at each. f(x) returns dx/dt. State must provide axpy and
// divergence_norm overloads.
template <class State, class Rhs, class Record>
void rk4_run(State x, const Rhs& f, const std::vector<double>& times, double step, double limit, Record record) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigurationError("rk4: step must be positive");
  double t = 0.0;
  State k1, k2, k3, k4, tmp;
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const long substeps = static_cast<long>(std::ceil(span / step - 1e-9));
      const double h = span / static_cast<double>(substeps);
      for (long s = 0; s < substeps; ++s) {
        k1 = f(x);
        axpy(tmp, x, 0.5 * h, k1);
        k2 = f(tmp);
        axpy(tmp, x, 0.5 * h, k2);
        k3 = f(tmp);
        axpy(tmp, x, h, k3);
        k4 = f(tmp);
        k1 += 2.0 * k2;
        k1 += 2.0 * k3;
        k1 += k4;
        axpy(tmp, x, h / 6.0, k1);
        std::swap(x, tmp);
        const double current = (s + 1 == substeps) ? target : t + (s + 1) * h;
        const double norm = divergence_norm(x);
        if (!(norm <= limit)) {
          throw DivergenceError("flow diverged: |Phi|_F = " + std::to_string(norm) + " at t = " +
                                    std::to_string(current),
                                current);
        }
      }
    }
    t = target;
    record(t, x);
  }
}

}  // namespace repdyn::detail
