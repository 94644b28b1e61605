#pragma once

#include "repdyn/mdp.hpp"

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace repdyn {

using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kDefaultGapTolerance = 1e-8;

/// Right eigenpairs of a square matrix, sorted by descending |lambda|
/// (ties: larger real part first, then larger imaginary part).
struct SpectralDecomposition {
  std::vector<std::complex<double>> eigenvalues;
  /// Column i is the unit-norm eigenvector of eigenvalues[i]; the first
  /// entry of non-negligible magnitude is real and positive.
  ComplexMatrix right_vectors;
  /// Real spectrum with strictly decreasing magnitudes.
  bool assumption_ok = false;
  std::vector<std::string> diagnostics;
};

/// K-dimensional subspace of R^n held as an orthonormal basis.
class Subspace {
 public:
  /// Throws ConfigurationError unless basis^T basis = I within `tol`.
  explicit Subspace(Matrix basis, double tol = 1e-10);

  const Matrix& basis() const noexcept { return basis_; }
  Eigen::Index dim() const noexcept { return basis_.cols(); }
  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }

  Vector project(const Vector& v) const { return basis_ * (basis_.transpose() * v); }
  Matrix projector() const { return basis_ * basis_.transpose(); }

 private:
  Matrix basis_;
};

struct PrincipalAngles {
  Vector angles;  // ascending, each in [0, pi/2]
  double distance = 0.0;
};

SpectralDecomposition eigen_decompose(const Matrix& p, double gap_tol = kDefaultGapTolerance);

enum class EbfOrder {
  /// Largest real part first: the directions that survive longest under
  /// exp(t(gamma P - I)), which is what the TD value and feature flows track.
  kDominantReal,
  /// Largest |lambda| first.
  kMagnitude,
};

/// Span of the top-K right eigenvectors. A complex pair contributes its real
/// and imaginary parts jointly. Warnings (assumption violations, pairs split
/// at the K boundary, ties at the cut) are appended to `warnings` if given.
Subspace ebf(const Matrix& p, Eigen::Index k, std::vector<std::string>* warnings = nullptr,
             EbfOrder order = EbfOrder::kDominantReal, double gap_tol = kDefaultGapTolerance);

/// Psi = (I - gamma P)^{-1}.
Matrix resolvent(const Matrix& p, double gamma);

/// Top-K eigenvectors of Psi Sigma Psi^T, i.e. left singular vectors of
/// Psi Sigma^{1/2}. For Sigma = I these are the left singular vectors of Psi.
Subspace rsbf(const Matrix& p, double gamma, Eigen::Index k, const Matrix& sigma,
              std::vector<std::string>* warnings = nullptr, double gap_tol = kDefaultGapTolerance);

/// Principal angles and Grassmann distance between equal-dimension subspaces.
PrincipalAngles grassmann_distance(const Subspace& a, const Subspace& b);

/// The min(dim a, dim b) principal angles between subspaces of any dimensions.
PrincipalAngles principal_angles(const Subspace& a, const Subspace& b);

/// Acute angle between v and S, arccos(|P_S v| / |v|).
double vector_subspace_angle(const Vector& v, const Subspace& s);

/// Orthonormal basis of the column space of m; throws RankError if the
/// columns are numerically dependent (relative tolerance rank_tol).
Subspace orthonormalize(const Matrix& m, double rank_tol = 1e-10);

/// Symmetric PSD square root; throws ConfigurationError if sigma is not
/// symmetric PSD.
Matrix psd_sqrt(const Matrix& sigma);

/// {eigenvalues: [[re, im], ...], vectors: row-major real parts, warnings}.
/// Imaginary parts of the vectors are written as "vectors_imag" when present.
std::string decomposition_to_json(const SpectralDecomposition& d);

/// One basis column per CSV column, header b0,b1,...
std::string subspace_to_csv(const Subspace& s);
Subspace subspace_from_csv(std::string_view text);

}  // namespace repdyn
