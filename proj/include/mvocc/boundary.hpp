#pragma once

#include "mvocc/kernels.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mvocc {

inline constexpr double kAlphaTol = 1e-8;

struct SmoOptions {
  double tolerance = 1e-7; ///< stop when the maximal KKT violation drops below this
  long max_iterations = 100000;
  /// Starting point; used when it is feasible for the problem, otherwise the
  /// solver starts from the uniform point.
  VectorXd warm_start;
};

/// Result of minimizing 0.5 a^T Q a + p^T a over { sum(a) = 1, 0 <= a_i <= upper }.
struct SimplexQpSolution {
  VectorXd alphas;
  VectorXd gradient; ///< Q a + p at the returned point
  double objective = 0.0;
  double max_violation = 0.0;
  long iterations = 0;
  bool converged = false;
};

/// SMO with second-order working-pair selection. Starts from options.warm_start
/// when feasible, else from the uniform point, which is feasible whenever
/// upper * N >= 1.
SimplexQpSolution solve_simplex_qp(const MatrixXd& q, const VectorXd& p, double upper, const SmoOptions& options = {});

/// Trained hypersphere boundary.
///
/// Decision values are R^2 - |z - a|^2, non-negative for targets. With the
/// linear kernel the center is held explicitly; otherwise decisions use the
/// kernel expansion over the stored support vectors.
struct SvddModel {
  KernelSpec kernel;
  double c = 1.0;
  VectorXd alphas;                 ///< one per training sample, on the simplex, <= C
  double radius_sq = 0.0;
  VectorXd center_coords;          ///< explicit center, linear kernel only
  std::vector<Index> support_index;
  VectorXd slacks;                 ///< max(0, |z_i - a|^2 - R^2) per training sample
  MatrixXd support_vectors;        ///< training columns with alpha > kAlphaTol
  VectorXd support_alphas;
  double alpha_k_alpha = 0.0;      ///< a^T K a = |center|^2 in feature space
  double objective = 0.0;          ///< dual objective sum a_i K_ii - a^T K a
  double kkt_violation = 0.0;      ///< largest KKT residual over the training set
  bool radius_from_free_sv = true; ///< false when R^2 came from the bound midpoint

  [[nodiscard]] Index dim() const noexcept { return support_vectors.rows(); }
  /// Squared feature-space distance of each column of z to the center.
  [[nodiscard]] VectorXd sq_distances(const MatrixXd& z) const;
  [[nodiscard]] VectorXd decisions(const MatrixXd& z) const;
  [[nodiscard]] double decision(const Eigen::Ref<const VectorXd>& z) const;
  /// Decision from precomputed kernel values: k_zz = K(z, z) and k_row(i) = K(z, z_i)
  /// against every training sample.
  [[nodiscard]] double decision_from_kernel(double k_zz, const Eigen::Ref<const VectorXd>& k_row) const;
  /// Primal objective R^2 + C * sum(slacks).
  [[nodiscard]] double primal_objective() const { return radius_sq + c * slacks.sum(); }
};

/// Dual-only SVDD solution from a gram matrix.
struct SvddDual {
  VectorXd alphas;
  double radius_sq = 0.0;
  double alpha_k_alpha = 0.0;
  double objective = 0.0;
  VectorXd sq_distances; ///< training-sample squared distances to the center
  double kkt_violation = 0.0;
  bool radius_from_free_sv = true;
  bool converged = false;
};

/// max sum a_i K_ii - a^T K a  s.t. sum a = 1, 0 <= a_i <= C.
/// Throws InfeasibleError when C < 1/N.
SvddDual solve_svdd(const MatrixXd& gram, double c, const SmoOptions& options = {});

/// Solves the dual for the columns of `z` and packages the boundary.
SvddModel fit_svdd(const MatrixXd& z, double c, const KernelSpec& kernel = KernelSpec::linear(),
                   const SmoOptions& options = {});

/// nu-parameterized one-class SVM with unit-sum duals.
struct OcsvmModel {
  KernelSpec kernel;
  double nu = 0.5;
  VectorXd alphas; ///< on the simplex, each <= 1 / (nu N)
  double rho = 0.0;
  std::vector<Index> support_index;
  MatrixXd support_vectors;
  VectorXd support_alphas;
  double objective = 0.0;     ///< 0.5 a^T K a
  double kkt_violation = 0.0;

  [[nodiscard]] VectorXd decisions(const MatrixXd& z) const;
  [[nodiscard]] double decision_from_kernel(const Eigen::Ref<const VectorXd>& k_row) const;
};

struct OcsvmDual {
  VectorXd alphas;
  double rho = 0.0;
  double objective = 0.0;
  VectorXd train_decisions;
  double kkt_violation = 0.0;
  bool converged = false;
};

/// min 0.5 a^T K a  s.t. sum a = 1, 0 <= a_i <= 1/(nu N). Decision f(z) = sum a_i K(z, z_i) - rho.
OcsvmDual solve_ocsvm(const MatrixXd& gram, double nu, const SmoOptions& options = {});

OcsvmModel fit_ocsvm(const MatrixXd& x, double nu, const KernelSpec& kernel = KernelSpec::linear(),
                     const SmoOptions& options = {});

/// Maps an SVDD-style C to nu = 1 / (N C), clamped into (0, 1].
double nu_from_c(double c, Index n);

} // namespace mvocc
