#pragma once

#include "mvocc/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mvocc {

struct SynthSpec {
  Index n_target = 60;
  Index n_outlier = 20;
  std::vector<Index> dims{6, 6}; ///< one entry per view
  double separation = 6.0;
  std::uint64_t seed = 7;
  std::string target_label = "target";
  std::string outlier_label = "outlier";
};

/// Targets are standard Gaussian in every view. Each outlier is either a
/// standard Gaussian draw shifted by `separation` along a random unit direction
/// in every view, or, for outlier i with r = i mod 2V < V, hidden in view r
/// (drawn from the target distribution there) and displaced in the others. With two views a quarter
/// of the outliers sit inside the target cloud of each single view while the
/// views jointly expose all of them. Samples are ordered targets first.
MultiViewDataset gen_two_view(const SynthSpec& spec);

struct BruteforceResult {
  VectorXd alphas;
  double objective = 0.0;
  long evaluated = 0;
};

/// Exhaustive minimization of 0.5 a^T Q a + p^T a over the grid points of
/// { sum a = 1, 0 <= a_i <= upper } with spacing `step`. N <= 6.
BruteforceResult simplex_bruteforce(const MatrixXd& q, const VectorXd& p, double upper, double step);

/// Maximizes the SVDD dual sum a_i K_ii - a^T K a over the grid; `objective`
/// is the dual value.
BruteforceResult svdd_bruteforce(const MatrixXd& gram, double c, double step);

/// Grid spacing used when none is given: 1e-3 for N <= 3, 1e-2 for N in 4-6.
double default_oracle_step(Index n);

} // namespace mvocc
