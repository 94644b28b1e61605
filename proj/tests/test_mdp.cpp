#include "oracles.hpp"

#include "repdyn/errors.hpp"
#include "repdyn/gridworld.hpp"
#include "repdyn/mdp.hpp"

#include <gtest/gtest.h>

using namespace repdyn;

TEST(Mdp, RejectsMalformedKernels) {
  Matrix p(2, 2);
  p << 0.5, 0.6, 0.0, 1.0;
  EXPECT_THROW(Mdp({p}, Matrix::Zero(2, 1)), ConfigurationError);
  p << 1.5, -0.5, 0.0, 1.0;
  EXPECT_THROW(Mdp({p}, Matrix::Zero(2, 1)), ConfigurationError);
  p << 1.0, 0.0, 0.0, 1.0;
  EXPECT_THROW(Mdp({p, p}, Matrix::Zero(2, 1)), ConfigurationError);
  EXPECT_THROW(Mdp({p}, Matrix::Constant(2, 1, std::nan(""))), ConfigurationError);
}

TEST(Mdp, ChainSlipSemantics) {
  const Mdp mdp = build_chain_mdp(5, 0.2, 2.0, 1.0);
  // Interior right: intended move with prob 0.8 + 0.1, left with 0.1.
  EXPECT_DOUBLE_EQ(mdp.probability(2, kRight, 3), 0.9);
  EXPECT_DOUBLE_EQ(mdp.probability(2, kRight, 1), 0.1);
  // Bumping into the left end keeps the agent in place.
  EXPECT_DOUBLE_EQ(mdp.probability(0, kLeft, 0), 0.9);
  EXPECT_DOUBLE_EQ(mdp.reward()(0, kLeft), 2.0);
  EXPECT_DOUBLE_EQ(mdp.reward()(4, kRight), 1.0);
  EXPECT_DOUBLE_EQ(mdp.reward().sum(), 3.0);
  EXPECT_THROW(build_chain_mdp(1, 0.0, 0, 0), ConfigurationError);
  EXPECT_THROW(build_chain_mdp(5, 1.5, 0, 0), ConfigurationError);
}

TEST(Mdp, InducedChainIsPolicyMixture) {
  const Mdp mdp = build_reference_chain();
  Matrix probs(30, 2);
  probs.col(0).setConstant(0.3);
  probs.col(1).setConstant(0.7);
  const MarkovChain c = induce(mdp, Policy(probs), 0.9);
  const Matrix expected = 0.3 * mdp.transition(kLeft) + 0.7 * mdp.transition(kRight);
  EXPECT_LT((c.transition() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(c.reward()(0), 0.3 * 2.0);
  EXPECT_DOUBLE_EQ(c.reward()(29), 0.7 * 1.0);
  EXPECT_THROW(induce(mdp, Policy::uniform(29, 2), 0.9), ConfigurationError);
}

TEST(Mdp, ExactValueMatchesValueIteration) {
  const Mdp mdp = build_reference_chain();
  const MarkovChain c = induce(mdp, Policy::uniform(30, 2), 0.9);
  const Vector ref = oracle::value_iteration(c.transition(), c.reward(), 0.9, 2000);
  EXPECT_LT((exact_value(c) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mdp, GammaOutsideRangeRejected) {
  const Matrix p = Matrix::Identity(2, 2);
  EXPECT_THROW(MarkovChain(p, Vector::Zero(2), 1.0), ConfigurationError);
  EXPECT_THROW(MarkovChain(p, Vector::Zero(2), -0.1), ConfigurationError);
  EXPECT_NO_THROW(MarkovChain(p, Vector::Zero(2), 0.0));
}

TEST(Mdp, GreedyTiesGoToLowestAction) {
  const Mdp mdp = build_chain_mdp(4, 0.0, 0.0, 0.0);
  const Policy p = greedy_policy(mdp, Vector::Zero(4), 0.9);
  for (int x = 0; x < 4; ++x) EXPECT_EQ(p.action(x), kLeft);
}

TEST(Mdp, PolicyIterationConvergesToOptimalValue) {
  const Mdp mdp = build_reference_chain();
  const auto trace = policy_iteration(mdp, 0.9, 100, Policy::uniform(30, 2));
  ASSERT_TRUE(trace.converged);
  // Optimal value by value iteration on the Bellman optimality operator.
  Vector v = Vector::Zero(30);
  for (int i = 0; i < 3000; ++i) {
    Vector next = (mdp.reward().col(0) + 0.9 * mdp.transition(0) * v)
                      .cwiseMax(mdp.reward().col(1) + 0.9 * mdp.transition(1) * v);
    v = next;
  }
  EXPECT_LT((trace.values.back() - v).cwiseAbs().maxCoeff(), 1e-9);
  // Values improve monotonically along the path.
  for (std::size_t j = 1; j < trace.values.size(); ++j) {
    EXPECT_TRUE(((trace.values[j] - trace.values[j - 1]).array() >= -1e-10).all());
  }
}

TEST(Mdp, JsonRoundTrip) {
  const Mdp mdp = build_chain_mdp(6, 0.1, 2.0, 1.0);
  const Mdp back = mdp_from_json(mdp_to_json(mdp));
  ASSERT_EQ(back.n_states(), 6);
  ASSERT_EQ(back.n_actions(), 2);
  for (int a = 0; a < 2; ++a) EXPECT_EQ(back.transition(a), mdp.transition(a));
  EXPECT_EQ(back.reward(), mdp.reward());
  EXPECT_THROW(mdp_from_json("{\"n_states\": 2}"), ConfigurationError);
  EXPECT_THROW(mdp_from_json("not json"), ConfigurationError);
}

TEST(Gridworld, ParseAndIndexRowMajor) {
  const GridMap m = GridMap::parse("###\n#..\n#.#\n");
  EXPECT_EQ(m.rows(), 3);
  EXPECT_EQ(m.cols(), 3);
  ASSERT_EQ(m.n_open(), 3);
  EXPECT_EQ(m.cell(0), std::make_pair(1, 1));
  EXPECT_EQ(m.cell(1), std::make_pair(1, 2));
  EXPECT_EQ(m.cell(2), std::make_pair(2, 1));
  EXPECT_FALSE(m.is_open(0, 0));
  EXPECT_EQ(*m.state_at(2, 1), 2);
  EXPECT_EQ(GridMap::parse(m.to_text()).to_text(), m.to_text());
  EXPECT_THROW(GridMap::parse("#x#\n"), ConfigurationError);
}

TEST(Gridworld, WallsBlockMoves) {
  const GridMap m = GridMap::parse("###\n#..\n#.#\n");
  const Mdp mdp = build_gridworld(m);
  EXPECT_DOUBLE_EQ(mdp.probability(0, kUp, 0), 1.0);
  EXPECT_DOUBLE_EQ(mdp.probability(0, kEast, 1), 1.0);
  EXPECT_DOUBLE_EQ(mdp.probability(0, kDown, 2), 1.0);
  EXPECT_DOUBLE_EQ(mdp.probability(1, kDown, 1), 1.0);
  EXPECT_DOUBLE_EQ(mdp.reward().cwiseAbs().sum(), 0.0);
}

TEST(Gridworld, FourRoomsHas105CellsAndSymmetricWalk) {
  const auto [mdp, policy] = build_four_rooms();
  EXPECT_EQ(mdp.n_states(), 105);
  EXPECT_EQ(four_rooms_map().n_open(), 105);
  const MarkovChain c = induce(mdp, policy, 0.9);
  EXPECT_LT((c.transition() - c.transition().transpose()).cwiseAbs().maxCoeff(), 1e-15);
  // Connected: the stationary eigenvalue 1 is simple.
  Eigen::SelfAdjointEigenSolver<Matrix> es(c.transition());
  const auto& ev = es.eigenvalues();
  EXPECT_NEAR(ev(104), 1.0, 1e-12);
  EXPECT_LT(ev(103), 1.0 - 1e-6);
}
