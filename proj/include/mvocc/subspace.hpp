#pragma once

#include "mvocc/boundary.hpp"
#include "mvocc/params.hpp"
#include "mvocc/prng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mvocc {

/// d x D_v map of one modality into the shared subspace. Rows are orthonormal.
struct ProjectionMatrix {
  MatrixXd q;
  int modality_id = 1;
};

struct RegTerm {
  double value = 0.0;
  std::vector<MatrixXd> gradients; ///< d/dP_v of value, one per modality
};

/// Regularizer value and gradients for projections P_v applied to feature
/// matrices F_v (D_v x N) with per-modality dual weights alpha_v.
RegTerm reg_term(std::span<const MatrixXd> projections, std::span<const MatrixXd> features,
                 std::span<const VectorXd> alphas, const RegularizationSpec& spec);

/// Lagrangian of the pooled hypersphere problem after substituting the center:
///
///   L = sum_v sum_i alpha_vi |P_v f_vi|^2 - |sum_v P_v F_v alpha_v|^2 + beta * reg
///
/// with P_v = W_v Q_v when whiteners are given (W_v held fixed), else P_v = Q_v.
/// The alphas over all modalities must sum to one.
double lagrangian_value(std::span<const MatrixXd> projections, std::span<const MatrixXd> features,
                        std::span<const VectorXd> alphas, const RegularizationSpec& reg,
                        std::span<const MatrixXd> whiteners = {});

/// dL/dQ_v for every modality:
///
///   2 P_v F_v diag(alpha_v) F_v^T - 2 s (F_v alpha_v)^T + beta dreg/dP_v,  s = sum_u P_u F_u alpha_u
///
/// premultiplied by W_v^T when whiteners are given.
std::vector<MatrixXd> lagrangian_gradient(std::span<const MatrixXd> projections, std::span<const MatrixXd> features,
                                          std::span<const VectorXd> alphas, const RegularizationSpec& reg,
                                          std::span<const MatrixXd> whiteners = {});

/// Orthonormalizes the rows of q (QR of q^T, signs fixed so the triangular
/// factor has a positive diagonal).
MatrixXd orthonormalize_rows(const MatrixXd& q);

/// Top-d principal directions of the columns of f as rows. Falls back to an
/// orthonormalized Gaussian matrix drawn from `rng` when f has fewer than d
/// directions of non-negligible variance.
MatrixXd pca_basis(const MatrixXd& f, int d, Rng& rng);

/// Symmetric (Cov + floor)^{-1/2} for the columns of y, where eigenvalues of the
/// covariance below 1e-6 * trace / d are raised to that floor.
MatrixXd whitening_matrix(const MatrixXd& y);

/// Combines per-modality accept decisions: 1 = AND, 2 = OR, 3 = first modality, 4 = second.
bool combine_decisions(int ds, std::span<const bool> accepted);

struct SubspaceModel {
  Method method = Method::s_svdd;
  HyperParams hparams;
  std::vector<ProjectionMatrix> projections;
  std::optional<MatrixXd> whitener; ///< ES-SVDD only
  SvddModel inner;                  ///< trained on the projected (and whitened) training targets
  std::vector<double> loss_trace;   ///< objective at the start and after each accepted step
  int accepted_steps = 0;
  int rejected_steps = 0;
  double final_eta = 0.0;

  [[nodiscard]] std::size_t view_count() const noexcept { return projections.size(); }
  /// Coordinates of modality v samples in the space the inner boundary lives in.
  [[nodiscard]] MatrixXd embed(std::size_t v, const MatrixXd& f) const;
  /// V x M matrix of per-modality decision values R^2 - |P_v f_v - a|^2.
  [[nodiscard]] MatrixXd modality_decisions(std::span<const MatrixXd> views) const;
  /// Uni-modal decision values (first row of modality_decisions).
  [[nodiscard]] VectorXd decisions(std::span<const MatrixXd> views) const;
  /// Accept/reject per sample; multi-modal models combine with strategy `ds`
  /// (the trained strategy when ds = 0).
  [[nodiscard]] std::vector<bool> accept(std::span<const MatrixXd> views, int ds = 0) const;
  /// Single sample given as one vector per modality.
  [[nodiscard]] bool ms_svdd_decide(std::span<const VectorXd> sample, int ds = 0) const;
};

struct TrainOptions {
  std::vector<MatrixXd> initial_q;  ///< overrides the PCA start when non-empty
  std::uint64_t seed = 0;           ///< for the Gaussian fallback start
  SmoOptions smo;
  double accept_tol = 1e-6;         ///< a step is accepted when the loss rises by at most this
  int max_halvings = 5;
};

/// Alternates an inner SVDD solve on the pooled projected columns with a
/// gradient step Q_v <- orth(Q_v - eta dL/dQ_v). A step that raises the loss by
/// more than accept_tol is retried with eta halved, up to max_halvings times;
/// when every retry fails, training stops at the current projections.
///
/// `views` are the per-modality training matrices (target class only). The
/// uni-modal methods expect exactly one view.
SubspaceModel train_subspace(Method method, std::span<const MatrixXd> views, const HyperParams& hp,
                             const TrainOptions& options = {});

} // namespace mvocc
