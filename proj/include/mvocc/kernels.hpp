#pragma once

#include <Eigen/Dense>

#include <string>

namespace mvocc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class KernelKind { linear, rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double sigma = 1.0; ///< RBF width; ignored for the linear kernel

  static KernelSpec linear() noexcept { return {KernelKind::linear, 1.0}; }
  static KernelSpec rbf(double sigma) noexcept { return {KernelKind::rbf, sigma}; }

  /// Throws ParameterError when sigma <= 0 for an RBF kernel.
  void validate() const;
  [[nodiscard]] double operator()(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& y) const;
};

const char* to_string(KernelKind kind) noexcept;
KernelKind kernel_kind_from_string(const std::string& name);

/// K(i, j) = k(a_i, b_j) for columns a_i of `a` and b_j of `b`.
/// Linear: a^T b. RBF: exp(-|a_i - b_j|^2 / (2 sigma^2)).
MatrixXd gram_matrix(const MatrixXd& a, const MatrixXd& b, const KernelSpec& spec);

/// Explicit kernel-space coordinates for a training set (nonlinear projection
/// trick). The centered training kernel C = (I - J/N) K (I - J/N) is
/// eigendecomposed; eigenpairs above rank_tol * lambda_max are kept and the
/// training embedding is Phi = Lambda^{1/2} V^T, so Phi^T Phi ~ C.
struct NptEmbedding {
  KernelSpec kernel;
  MatrixXd train_refs; ///< training columns; empty when built from a bare gram matrix
  MatrixXd eigvecs;    ///< N x m
  VectorXd eigvals;    ///< m, descending
  VectorXd row_means;  ///< row means of the uncentered training kernel
  double grand_mean = 0.0;

  [[nodiscard]] Index rank() const noexcept { return eigvals.size(); }
  [[nodiscard]] Index train_size() const noexcept { return eigvecs.rows(); }
  /// m x N training coordinates.
  [[nodiscard]] MatrixXd training_embedding() const;
};

inline constexpr double kDefaultRankTol = 1e-9;

NptEmbedding npt_embed(const MatrixXd& k_train, double rank_tol = kDefaultRankTol);

/// Builds the gram matrix of `train` under `spec` and embeds it, keeping the
/// training columns so new samples can be mapped with npt_transform.
NptEmbedding npt_fit(const MatrixXd& train, const KernelSpec& spec, double rank_tol = kDefaultRankTol);

/// Maps an N x M block of kernel values against the training columns to m x M
/// coordinates: Lambda^{-1/2} V^T k_hat, with k_hat centered by the training
/// statistics.
MatrixXd npt_map(const NptEmbedding& emb, const MatrixXd& k_test);

/// npt_map of the kernel block between the stored training columns and `samples`.
MatrixXd npt_transform(const NptEmbedding& emb, const MatrixXd& samples);

} // namespace mvocc
