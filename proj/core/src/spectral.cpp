#include "repdyn/spectral.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace repdyn {
namespace {

constexpr double kImagTolerance = 1e-10;
// Eigenvalues closer than this are treated as one cluster when checking for
// missing eigenvectors.
constexpr double kClusterTolerance = 1e-6;

std::string fmt(double v) { return format_double(v); }

std::string fmt(std::complex<double> z) {
  std::ostringstream os;
  os << fmt(z.real());
  if (z.imag() != 0.0) os << (z.imag() < 0 ? "-" : "+") << fmt(std::abs(z.imag())) << "i";
  return os.str();
}

// Rotate so the first entry of non-negligible magnitude is real positive.
template <class Vec>
void fix_phase(Vec& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto entry = v(i);
    if (std::abs(entry) > 1e-8 * scale) {
      v *= std::conj(entry) / std::abs(entry);
      return;
    }
  }
}

void fix_sign(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8 * scale) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

// Orthonormal columns spanning the candidates, taken in order; candidates
// that are numerically dependent on earlier ones are skipped. Two passes of
// Gram-Schmidt per column.
Matrix greedy_orthonormal_columns(const Matrix& candidates, Eigen::Index max_cols, double rel_tol) {
  Matrix q(candidates.rows(), max_cols);
  Eigen::Index taken = 0;
  for (Eigen::Index c = 0; c < candidates.cols() && taken < max_cols; ++c) {
    Vector v = candidates.col(c);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      v -= q.leftCols(taken) * (q.leftCols(taken).transpose() * v);
    }
    const double norm = v.norm();
    if (norm <= rel_tol * norm0) continue;
    q.col(taken++) = v / norm;
  }
  return q.leftCols(taken);
}

// Orthonormal basis of null((P - lambda I)^m), used when an eigenvalue
// cluster is short of eigenvectors (P not diagonalisable).
ComplexMatrix generalized_eigenspace(const Matrix& p, std::complex<double> lambda, Eigen::Index multiplicity) {
  const Eigen::Index n = p.rows();
  ComplexMatrix shifted = p.cast<std::complex<double>>();
  shifted.diagonal().array() -= lambda;
  ComplexMatrix power = ComplexMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i < multiplicity; ++i) power = power * shifted;
  Eigen::JacobiSVD<ComplexMatrix> svd(power, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(multiplicity);
}

bool lexicographically_less(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) return a.dim() < b.dim();
  const auto& x = a.basis();
  const auto& y = b.basis();
  return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
}

}  // namespace

Subspace::Subspace(Matrix basis, double tol) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.rows() < basis_.cols()) {
    throw ConfigurationError("Subspace: basis must be n x K with 1 <= K <= n");
  }
  const double err =
      (basis_.transpose() * basis_ - Matrix::Identity(basis_.cols(), basis_.cols())).cwiseAbs().maxCoeff();
  if (!(err <= tol)) throw ConfigurationError("Subspace: basis is not orthonormal (error " + fmt(err) + ")");
}

SpectralDecomposition eigen_decompose(const Matrix& p, double gap_tol) {
  if (p.rows() != p.cols() || p.rows() == 0) throw ConfigurationError("eigen_decompose: matrix must be square");
  if (!p.allFinite()) throw ConfigurationError("eigen_decompose: non-finite entry");
  const Eigen::Index n = p.rows();

  Eigen::EigenSolver<Matrix> solver(p, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen_decompose: eigensolver did not converge");
  const Eigen::VectorXcd values = solver.eigenvalues();
  const ComplexMatrix vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const double ai = std::abs(values(i));
    const double aj = std::abs(values(j));
    if (ai != aj) return ai > aj;
    if (values(i).real() != values(j).real()) return values(i).real() > values(j).real();
    return values(i).imag() > values(j).imag();
  });

  SpectralDecomposition out;
  out.right_vectors.resize(n, n);
  const double residual_tol = 1e-8 * std::max(1.0, p.cwiseAbs().rowwise().sum().maxCoeff());
  const ComplexMatrix pc = p.cast<std::complex<double>>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = order[static_cast<std::size_t>(k)];
    std::complex<double> lambda = values(i);
    if (std::abs(lambda.imag()) <= kImagTolerance) lambda = {lambda.real(), 0.0};
    Eigen::VectorXcd v = vectors.col(i);
    v.normalize();
    fix_phase(v);
    const double residual = (pc * v - lambda * v).norm();
    if (!(residual <= residual_tol)) {
      throw NumericalError("eigen_decompose: residual " + fmt(residual) + " for eigenvalue " + fmt(lambda) +
                           " exceeds " + fmt(residual_tol));
    }
    out.eigenvalues.push_back(lambda);
    out.right_vectors.col(k) = v;
  }

  bool real = true;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& z = out.eigenvalues[static_cast<std::size_t>(k)];
    if (z.imag() > 0) {
      real = false;
      out.diagnostics.push_back("complex eigenvalue pair " + fmt(z) + " at index " + std::to_string(k));
    }
  }
  bool distinct = true;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double gap = std::abs(out.eigenvalues[static_cast<std::size_t>(k)]) -
                       std::abs(out.eigenvalues[static_cast<std::size_t>(k + 1)]);
    if (gap <= gap_tol) {
      distinct = false;
      out.diagnostics.push_back("repeated eigenvalue magnitude " +
                                fmt(std::abs(out.eigenvalues[static_cast<std::size_t>(k)])) + " at indices " +
                                std::to_string(k) + "," + std::to_string(k + 1));
    }
  }
  Eigen::BDCSVD<ComplexMatrix> svd(out.right_vectors);
  const auto& sv = svd.singularValues();
  const double smallest = sv(n - 1);
  const double cond = smallest > 0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  if (!(cond < 1e8)) {
    distinct = false;
    out.diagnostics.push_back("eigenvector matrix is ill-conditioned (cond " + fmt(cond) +
                              "); P may not be diagonalisable");
  }
  out.assumption_ok = real && distinct;
  return out;
}

Subspace ebf(const Matrix& p, Eigen::Index k, std::vector<std::string>* warnings, EbfOrder order, double gap_tol) {
  if (p.rows() != p.cols()) throw ConfigurationError("ebf: matrix must be square");
  const Eigen::Index n = p.rows();
  if (k < 1 || k > n) {
    throw ConfigurationError("ebf: K=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const SpectralDecomposition dec = eigen_decompose(p, gap_tol);
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  if (!dec.assumption_ok) {
    warn("ebf: P is not real-diagonalisable with distinct eigenvalue magnitudes");
    for (const auto& d : dec.diagnostics) warn("ebf: " + d);
  }

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  if (order == EbfOrder::kDominantReal) {
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) {
      const auto& a = dec.eigenvalues[static_cast<std::size_t>(i)];
      const auto& b = dec.eigenvalues[static_cast<std::size_t>(j)];
      if (a.real() != b.real()) return a.real() > b.real();
      return a.imag() > b.imag();
    });
  }
  auto key = [&](Eigen::Index i) {
    const auto& z = dec.eigenvalues[static_cast<std::size_t>(i)];
    return order == EbfOrder::kDominantReal ? z.real() : std::abs(z);
  };

  // Walk clusters of (numerically) equal eigenvalues in order, collecting
  // real candidate directions; conjugates of already-used pairs are skipped.
  Matrix candidates(n, 0);
  auto append = [&](const Vector& v) {
    candidates.conservativeResize(Eigen::NoChange, candidates.cols() + 1);
    candidates.col(candidates.cols() - 1) = v;
  };
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Eigen::Index dims_before_cut = -1;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Eigen::Index i = idx[a];
    if (used[static_cast<std::size_t>(i)]) continue;
    const std::complex<double> lambda = dec.eigenvalues[static_cast<std::size_t>(i)];
    std::vector<Eigen::Index> cluster;
    for (std::size_t b = a; b < idx.size(); ++b) {
      const Eigen::Index j = idx[b];
      if (!used[static_cast<std::size_t>(j)] &&
          std::abs(dec.eigenvalues[static_cast<std::size_t>(j)] - lambda) <= kClusterTolerance) {
        cluster.push_back(j);
      }
    }
    ComplexMatrix vecs(n, static_cast<Eigen::Index>(cluster.size()));
    for (std::size_t c = 0; c < cluster.size(); ++c) {
      vecs.col(static_cast<Eigen::Index>(c)) = dec.right_vectors.col(cluster[c]);
      used[static_cast<std::size_t>(cluster[c])] = true;
    }
    const auto multiplicity = static_cast<Eigen::Index>(cluster.size());
    if (multiplicity > 1) {
      Eigen::FullPivLU<ComplexMatrix> lu(vecs);
      lu.setThreshold(1e-8);
      if (lu.rank() < multiplicity) {
        warn("ebf: eigenvalue " + fmt(lambda) + " has algebraic multiplicity " + std::to_string(multiplicity) +
             " but only " + std::to_string(lu.rank()) + " eigenvectors; using its generalized eigenspace");
        vecs = generalized_eigenspace(p, lambda, multiplicity);
      }
    }
    const bool complex_pair = std::abs(lambda.imag()) > kImagTolerance;
    if (complex_pair) {
      // Mark the conjugate cluster as consumed.
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const Eigen::Index j = idx[b];
        if (std::abs(dec.eigenvalues[static_cast<std::size_t>(j)] - std::conj(lambda)) <= kClusterTolerance) {
          used[static_cast<std::size_t>(j)] = true;
        }
      }
    }
    const Eigen::Index before = candidates.cols();
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
      append(vecs.col(c).real());
      if (complex_pair) append(vecs.col(c).imag());
    }
    if (before < k && candidates.cols() > k) {
      dims_before_cut = before;
      if (complex_pair) warn("ebf: complex pair " + fmt(lambda) + " split at K=" + std::to_string(k));
    }
    if (candidates.cols() >= k) {
      // A tie between the last included and the next eigenvalue makes the
      // subspace non-unique.
      if (dims_before_cut < 0) {
        for (std::size_t b = 0; b < idx.size(); ++b) {
          const Eigen::Index j = idx[b];
          if (!used[static_cast<std::size_t>(j)]) {
            if (std::abs(key(j) - key(i)) <= gap_tol) {
              warn("ebf: eigenvalue tie at the K=" + std::to_string(k) + " boundary; subspace is not unique");
            }
            break;
          }
        }
      } else if (!complex_pair) {
        warn("ebf: eigenvalue cluster " + fmt(lambda) + " straddles K=" + std::to_string(k) +
             "; subspace is not unique");
      }
      break;
    }
  }

  Matrix basis = greedy_orthonormal_columns(candidates, k, 1e-8);
  if (basis.cols() < k) {
    throw NumericalError("ebf: could only extract " + std::to_string(basis.cols()) + " independent directions");
  }
  return Subspace(std::move(basis));
}

Matrix resolvent(const Matrix& p, double gamma) {
  if (p.rows() != p.cols()) throw ConfigurationError("resolvent: matrix must be square");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigurationError("resolvent: gamma must lie in [0, 1)");
  const Eigen::Index n = p.rows();
  const Matrix system = Matrix::Identity(n, n) - gamma * p;
  Eigen::PartialPivLU<Matrix> lu(system);
  Matrix psi = lu.inverse();
  if (!psi.allFinite()) throw NumericalError("resolvent: inversion produced non-finite values");
  const double err = (psi * system - Matrix::Identity(n, n)).norm();
  if (!(err <= 1e-10 * std::max(1.0, psi.norm()))) {
    throw NumericalError("resolvent: |Psi (I - gamma P) - I|_F = " + fmt(err));
  }
  return psi;
}

Matrix psd_sqrt(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw ConfigurationError("psd_sqrt: covariance must be square");
  if (!sigma.allFinite()) throw ConfigurationError("psd_sqrt: non-finite covariance");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigurationError("psd_sqrt: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigensolver failed");
  const Vector ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -1e-10 * scale) {
    throw ConfigurationError("psd_sqrt: covariance is not positive semi-definite (eigenvalue " +
                             fmt(ev.minCoeff()) + ")");
  }
  const Vector root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Subspace rsbf(const Matrix& p, double gamma, Eigen::Index k, const Matrix& sigma, std::vector<std::string>* warnings,
              double gap_tol) {
  const Eigen::Index n = p.rows();
  if (k < 1 || k > n) {
    throw ConfigurationError("rsbf: K=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (sigma.rows() != n || sigma.cols() != n) throw ConfigurationError("rsbf: covariance must be |X| x |X|");
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  const Matrix factor = resolvent(p, gamma) * psd_sqrt(sigma);
  Eigen::JacobiSVD<Matrix> svd(factor, Eigen::ComputeFullU);
  const Vector sv = svd.singularValues();
  const double top = sv(0);
  const double tie_tol = gap_tol * std::max(1.0, top);

  if (top - sv(n - 1) <= tie_tol) {
    warn("rsbf: all singular values coincide; returning the first K canonical directions");
    return Subspace(Matrix::Identity(n, k));
  }

  Matrix u = svd.matrixU();
  for (Eigen::Index c = 0; c < n; ++c) fix_sign(u.col(c));
  // Within groups of tied singular values, order vectors lexicographically.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) {
    if (std::abs(sv(i) - sv(j)) > tie_tol) return sv(i) > sv(j);
    return std::lexicographical_compare(u.col(j).data(), u.col(j).data() + n, u.col(i).data(),
                                        u.col(i).data() + n);
  });
  if (k < n && sv(idx[static_cast<std::size_t>(k - 1)]) - sv(idx[static_cast<std::size_t>(k)]) <= tie_tol) {
    warn("rsbf: singular value tie at the K=" + std::to_string(k) + " boundary; subspace is not unique");
  }
  Matrix basis(n, k);
  for (Eigen::Index c = 0; c < k; ++c) basis.col(c) = u.col(idx[static_cast<std::size_t>(c)]);
  return Subspace(std::move(basis));
}

PrincipalAngles principal_angles(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw ConfigurationError("principal_angles: subspaces live in R^" + std::to_string(a.ambient_dim()) +
                             " and R^" + std::to_string(b.ambient_dim()));
  }
  // Fixed argument order makes the result exactly symmetric.
  const bool swap = lexicographically_less(b, a);
  const Matrix& x = swap ? b.basis() : a.basis();  // dim(x) <= dim(y)
  const Matrix& y = swap ? a.basis() : b.basis();
  const Eigen::Index k = x.cols();

  const Matrix cross = y.transpose() * x;
  const Vector cosines = Eigen::JacobiSVD<Matrix>(cross).singularValues().cwiseMax(0.0).cwiseMin(1.0);
  const Matrix residual = x - y * cross;
  Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues().cwiseMax(0.0).cwiseMin(1.0);
  sines.reverseInPlace();

  PrincipalAngles out;
  out.angles.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    // Cosines resolve large angles well, sines resolve small ones.
    out.angles(i) = cosines(i) * cosines(i) < 0.5 ? std::acos(cosines(i)) : std::asin(sines(i));
  }
  std::sort(out.angles.data(), out.angles.data() + k);
  out.distance = out.angles.norm();
  return out;
}

PrincipalAngles grassmann_distance(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) {
    throw ConfigurationError("grassmann_distance: dimensions " + std::to_string(a.dim()) + " and " +
                             std::to_string(b.dim()) + " differ; use principal_angles");
  }
  return principal_angles(a, b);
}

double vector_subspace_angle(const Vector& v, const Subspace& s) {
  if (v.size() != s.ambient_dim()) throw ConfigurationError("vector_subspace_angle: dimension mismatch");
  const double norm = v.norm();
  if (!(norm > 0.0)) throw DomainError("vector_subspace_angle: zero vector");
  const Vector u = v / norm;
  Vector coeffs = s.basis().transpose() * u;
  Vector residual = u - s.basis() * coeffs;
  const Vector correction = s.basis().transpose() * residual;
  coeffs += correction;
  residual -= s.basis() * correction;
  return std::atan2(residual.norm(), coeffs.norm());
}

Subspace orthonormalize(const Matrix& m, double rank_tol) {
  if (m.cols() < 1) throw ConfigurationError("orthonormalize: matrix has no columns");
  if (!m.allFinite()) throw ConfigurationError("orthonormalize: non-finite entry");
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(rank_tol);
  const Eigen::Index rank = qr.rank();
  if (rank < m.cols()) {
    throw RankError("orthonormalize: numerical rank " + std::to_string(rank) + " < " + std::to_string(m.cols()) +
                        " columns",
                    rank);
  }
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  return Subspace(std::move(q));
}

std::string decomposition_to_json(const SpectralDecomposition& d) {
  nlohmann::ordered_json doc;
  auto values = nlohmann::json::array();
  for (const auto& z : d.eigenvalues) values.push_back({z.real(), z.imag()});
  doc["eigenvalues"] = std::move(values);
  auto rows = nlohmann::json::array();
  auto imag_rows = nlohmann::json::array();
  bool any_imag = false;
  for (Eigen::Index r = 0; r < d.right_vectors.rows(); ++r) {
    auto row = nlohmann::json::array();
    auto imag_row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < d.right_vectors.cols(); ++c) {
      row.push_back(d.right_vectors(r, c).real());
      imag_row.push_back(d.right_vectors(r, c).imag());
      any_imag = any_imag || d.right_vectors(r, c).imag() != 0.0;
    }
    rows.push_back(std::move(row));
    imag_rows.push_back(std::move(imag_row));
  }
  doc["vectors"] = std::move(rows);
  if (any_imag) doc["vectors_imag"] = std::move(imag_rows);
  doc["assumption_ok"] = d.assumption_ok;
  doc["warnings"] = d.diagnostics;
  return doc.dump(2);
}

std::string subspace_to_csv(const Subspace& s) {
  std::vector<std::string> header;
  for (Eigen::Index c = 0; c < s.dim(); ++c) header.push_back("b" + std::to_string(c));
  return matrix_to_csv(s.basis(), header);
}

Subspace subspace_from_csv(std::string_view text) { return Subspace(matrix_from_csv(text, true), 1e-10); }

}  // namespace repdyn
