#include "oracles.hpp"

#include "repdyn/errors.hpp"
#include "repdyn/linalg.hpp"
#include "repdyn/mdp.hpp"
#include "repdyn/spectral.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace repdyn;

namespace {

Matrix uniform_walk() {
  const Mdp mdp = build_reference_chain();
  return induce(mdp, Policy::uniform(30, 2), 0.9).transition();
}

// 3-cycle permutation: eigenvalues 1 and exp(+-2 pi i / 3).
Matrix cycle3() {
  Matrix p = Matrix::Zero(3, 3);
  p(0, 1) = p(1, 2) = p(2, 0) = 1.0;
  return p;
}

}  // namespace

TEST(MatrixExponential, MatchesTaylorSeries) {
  std::mt19937_64 rng(1);
  const Matrix a = 0.3 * oracle::gaussian(rng, 8, 8);
  EXPECT_LT((matrix_exponential(a) - oracle::taylor_expm(a)).norm(), 1e-12);
  const Matrix g = 0.9 * uniform_walk() - Matrix::Identity(30, 30);
  EXPECT_LT((matrix_exponential(g, 2.0) - oracle::taylor_expm(2.0 * g)).norm(), 1e-12);
}

TEST(MatrixExponential, ZeroTimeIsIdentityAndErrors) {
  std::mt19937_64 rng(2);
  const Matrix a = oracle::gaussian(rng, 5, 5);
  EXPECT_LT((matrix_exponential(a, 0.0) - Matrix::Identity(5, 5)).norm(), 1e-15);
  EXPECT_THROW(matrix_exponential(Matrix::Zero(2, 3)), ConfigurationError);
  EXPECT_THROW(matrix_exponential(Matrix::Constant(2, 2, std::nan(""))), ConfigurationError);
  EXPECT_THROW(matrix_exponential(Matrix::Identity(2, 2), 1e4), NumericalError);
}

TEST(Resolvent, MatchesNeumannSeries) {
  const Matrix p = uniform_walk();
  const Matrix psi = resolvent(p, 0.9);
  EXPECT_LT((psi - oracle::neumann_resolvent(p, 0.9, 600)).cwiseAbs().maxCoeff(), 1e-10);
  // Rows of a discounted occupancy sum to 1 / (1 - gamma).
  EXPECT_LT((psi.rowwise().sum().array() - 10.0).abs().maxCoeff(), 1e-10);
  EXPECT_THROW(resolvent(p, 1.0), ConfigurationError);
}

TEST(EigenDecompose, SortedAndAccurate) {
  const Matrix p = uniform_walk();
  const SpectralDecomposition d = eigen_decompose(p);
  ASSERT_EQ(d.eigenvalues.size(), 30u);
  for (std::size_t i = 1; i < d.eigenvalues.size(); ++i) {
    EXPECT_GE(std::abs(d.eigenvalues[i - 1]) + 1e-12, std::abs(d.eigenvalues[i]));
  }
  for (Eigen::Index i = 0; i < 30; ++i) {
    const auto lambda = d.eigenvalues[static_cast<std::size_t>(i)];
    const Eigen::VectorXcd v = d.right_vectors.col(i);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_LT((p.cast<std::complex<double>>() * v - lambda * v).norm(), 1e-10);
  }
  // The walk has the symmetric spectrum cos(j pi / 30), so |lambda| repeats.
  EXPECT_FALSE(d.assumption_ok);
  EXPECT_FALSE(d.diagnostics.empty());
}

TEST(EigenDecompose, ReportsComplexPairs) {
  const SpectralDecomposition d = eigen_decompose(cycle3());
  EXPECT_FALSE(d.assumption_ok);
  int complex_count = 0;
  for (const auto& z : d.eigenvalues) complex_count += std::abs(z.imag()) > 1e-9 ? 1 : 0;
  EXPECT_EQ(complex_count, 2);
}

TEST(Ebf, SymmetricWalkMatchesSelfAdjointSolver) {
  const Matrix p = uniform_walk();
  for (int k : {1, 2, 4, 7}) {
    const Subspace s = ebf(p, k);
    const Subspace ref(oracle::symmetric_top_eigenvectors(p, k));
    EXPECT_LT(grassmann_distance(s, ref).distance, 1e-9) << "K=" << k;
  }
}

TEST(Ebf, TopDirectionOfStochasticMatrixIsConstant) {
  const Matrix p = uniform_walk();
  const Subspace s = ebf(p, 1);
  const Vector ones = Vector::Ones(30);
  EXPECT_LT(vector_subspace_angle(ones, s), 1e-12);
}

TEST(Ebf, ComplexPairContributesRealAndImaginaryParts) {
  std::vector<std::string> warnings;
  const Subspace s = ebf(cycle3(), 3, &warnings);
  EXPECT_EQ(s.dim(), 3);
  // Splitting the pair at K=2 keeps the real part and warns.
  warnings.clear();
  const Subspace s2 = ebf(cycle3(), 2, &warnings);
  EXPECT_EQ(s2.dim(), 2);
  bool split = false;
  for (const auto& w : warnings) split = split || w.find("split") != std::string::npos;
  EXPECT_TRUE(split);
}

TEST(Ebf, DefectiveMatrixUsesGeneralizedEigenspace) {
  // Jordan block for eigenvalue 0.5 plus a simple eigenvalue 0.1.
  Matrix j = Matrix::Zero(3, 3);
  j << 0.5, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.1;
  std::vector<std::string> warnings;
  const Subspace s = ebf(j, 2, &warnings);
  Matrix expected = Matrix::Zero(3, 2);
  expected(0, 0) = expected(1, 1) = 1.0;
  EXPECT_LT(grassmann_distance(s, Subspace(expected)).distance, 1e-6);
  EXPECT_FALSE(warnings.empty());
}

TEST(Ebf, MagnitudeOrderingDiffersOnSignedSpectrum) {
  // diag(1, -0.95, 0.9): magnitude picks -0.95, real part picks 0.9.
  const Matrix d = Eigen::Vector3d(1.0, -0.95, 0.9).asDiagonal();
  const Subspace by_real = ebf(d, 2);
  const Subspace by_mag = ebf(d, 2, nullptr, EbfOrder::kMagnitude);
  EXPECT_NEAR(std::abs(by_real.basis()(2, 1)) + std::abs(by_real.basis()(2, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(by_mag.basis()(1, 1)) + std::abs(by_mag.basis()(1, 0)), 1.0, 1e-12);
  EXPECT_THROW(ebf(d, 0), ConfigurationError);
  EXPECT_THROW(ebf(d, 4), ConfigurationError);
}

TEST(Rsbf, IdentityCovarianceGivesLeftSingularVectorsOfResolvent) {
  const Matrix p = uniform_walk();
  const Matrix psi = oracle::neumann_resolvent(p, 0.9, 600);
  const Subspace s = rsbf(p, 0.9, 4, Matrix::Identity(30, 30));
  // Eigenvectors of Psi Psi^T via the symmetric solver.
  const Subspace ref(oracle::symmetric_top_eigenvectors(psi * psi.transpose(), 4));
  EXPECT_LT(grassmann_distance(s, ref).distance, 1e-8);
}

TEST(Rsbf, GeneralCovarianceUsesPsiSigmaPsiT) {
  const Matrix p = uniform_walk();
  std::mt19937_64 rng(5);
  const Matrix l = oracle::gaussian(rng, 30, 30);
  const Matrix sigma = l * l.transpose() / 30.0;
  const Matrix psi = oracle::neumann_resolvent(p, 0.9, 600);
  const Subspace s = rsbf(p, 0.9, 3, sigma);
  const Subspace ref(oracle::symmetric_top_eigenvectors(psi * sigma * psi.transpose(), 3));
  EXPECT_LT(grassmann_distance(s, ref).distance, 1e-7);
}

TEST(Rsbf, FlatSpectrumReturnsCanonicalDirections) {
  std::vector<std::string> warnings;
  const Subspace s = rsbf(Matrix::Identity(4, 4), 0.5, 2, Matrix::Identity(4, 4), &warnings);
  EXPECT_EQ(s.basis(), Matrix(Matrix::Identity(4, 2)));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(PsdSqrt, SquaresBackAndRejectsIndefinite) {
  std::mt19937_64 rng(6);
  const Matrix l = oracle::gaussian(rng, 6, 6);
  const Matrix sigma = l * l.transpose();
  const Matrix r = psd_sqrt(sigma);
  EXPECT_LT((r * r - sigma).norm() / sigma.norm(), 1e-12);
  EXPECT_LT((r - r.transpose()).norm(), 1e-12);
  EXPECT_THROW(psd_sqrt(Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix()), ConfigurationError);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_THROW(psd_sqrt(asym), ConfigurationError);
}

TEST(Orthonormalize, ProjectorMatchesNormalEquations) {
  std::mt19937_64 rng(7);
  const Matrix m = oracle::gaussian(rng, 12, 4);
  const Subspace s = orthonormalize(m);
  EXPECT_LT((s.projector() - oracle::normal_equations_projector(m)).norm(), 1e-12);
  EXPECT_LT((s.basis().transpose() * s.basis() - Matrix::Identity(4, 4)).norm(), 1e-13);
}

TEST(Orthonormalize, RankDeficientThrowsWithRank) {
  Matrix m(4, 3);
  m << 1, 2, 3, 0, 1, 1, 1, 0, 1, 2, 1, 3;  // col2 = col0 + col1
  try {
    orthonormalize(m);
    FAIL() << "expected RankError";
  } catch (const RankError& e) {
    EXPECT_EQ(e.numerical_rank(), 2);
  }
}

TEST(PrincipalAngles, KnownAnglesInThePlane) {
  Matrix a(3, 1), b(3, 1);
  a << 1, 0, 0;
  b << std::cos(0.3), std::sin(0.3), 0;
  const auto r = grassmann_distance(Subspace(a), Subspace(b));
  EXPECT_NEAR(r.angles(0), 0.3, 1e-15);
  EXPECT_NEAR(r.distance, 0.3, 1e-15);
}

TEST(PrincipalAngles, SmallAnglesResolvedBeyondArccos) {
  Matrix a(3, 1), b(3, 1);
  a << 1, 0, 0;
  b << std::cos(1e-9), std::sin(1e-9), 0;
  const double d = grassmann_distance(Subspace(a), Subspace(b)).distance;
  EXPECT_NEAR(d, 1e-9, 1e-20);
  // Plain arccos cannot see an angle this small.
  EXPECT_GT(std::abs(oracle::arccos_distance(a, b) - 1e-9), 1e-10);
}

TEST(PrincipalAngles, AgreeWithArccosForModerateAngles) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const Matrix a = oracle::random_orthonormal(rng, 10, 3);
    const Matrix b = oracle::random_orthonormal(rng, 10, 3);
    EXPECT_NEAR(grassmann_distance(Subspace(a), Subspace(b)).distance, oracle::arccos_distance(a, b), 1e-7);
  }
}

TEST(PrincipalAngles, OrthogonalSubspacesAndMixedDimensions) {
  const Matrix e = Matrix::Identity(4, 4);
  const auto r = grassmann_distance(Subspace(e.leftCols(2)), Subspace(e.rightCols(2)));
  EXPECT_NEAR(r.distance, std::numbers::pi / 2 * std::sqrt(2.0), 1e-15);
  const auto mixed = principal_angles(Subspace(e.leftCols(1)), Subspace(e.leftCols(3)));
  ASSERT_EQ(mixed.angles.size(), 1);
  EXPECT_EQ(mixed.angles(0), 0.0);
  EXPECT_THROW(grassmann_distance(Subspace(e.leftCols(1)), Subspace(e.leftCols(2))), ConfigurationError);
}

TEST(VectorSubspaceAngle, ZeroVectorIsDomainError) {
  const Subspace s(Matrix::Identity(3, 1));
  EXPECT_THROW(vector_subspace_angle(Vector::Zero(3), s), DomainError);
  EXPECT_NEAR(vector_subspace_angle(Eigen::Vector3d(1, 1, 0), s), std::numbers::pi / 4, 1e-15);
}

TEST(Subspace, RejectsNonOrthonormalBasis) {
  EXPECT_THROW(Subspace(Matrix::Constant(3, 2, 1.0)), ConfigurationError);
  EXPECT_THROW(Subspace(Matrix::Identity(2, 3)), ConfigurationError);
}

TEST(SpectralIo, SubspaceCsvRoundTripAndJson) {
  std::mt19937_64 rng(9);
  const Subspace s(oracle::random_orthonormal(rng, 7, 3));
  const Subspace back = subspace_from_csv(subspace_to_csv(s));
  EXPECT_EQ(back.basis(), s.basis());
  const std::string json = decomposition_to_json(eigen_decompose(cycle3()));
  EXPECT_NE(json.find("\"eigenvalues\""), std::string::npos);
  EXPECT_NE(json.find("vectors_imag"), std::string::npos);
}
