#pragma once

#include "repdyn/mdp.hpp"

#include <cstdint>
#include <random>

namespace repdyn {

using Rng = std::mt19937_64;

/// Independent stream for task `index` under a master seed. Streams depend
/// only on (seed, index), so parallel sweeps are schedule-independent.
Rng make_stream(std::uint64_t seed, std::uint64_t index = 0);

/// Seed for sub-task `index` (e.g. one Monte Carlo replicate) of a run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// rows x cols matrix of i.i.d. N(0, stddev^2), filled column by column.
Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev = 1.0);

}  // namespace repdyn
