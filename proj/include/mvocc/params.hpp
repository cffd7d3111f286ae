#pragma once

#include "mvocc/kernels.hpp"

#include <string>

namespace mvocc {

enum class Method { svdd, ocsvm, s_svdd, es_svdd, ms_svdd };

const char* to_string(Method m) noexcept;
/// Table-style display name, e.g. "MS-SVDD".
const char* display_name(Method m) noexcept;
Method method_from_string(const std::string& name);

[[nodiscard]] constexpr bool is_subspace(Method m) noexcept {
  return m == Method::s_svdd || m == Method::es_svdd || m == Method::ms_svdd;
}
[[nodiscard]] constexpr bool is_multimodal(Method m) noexcept { return m == Method::ms_svdd; }

/// psi: uni-modal subspace regularizers (indices 0-3).
/// omega: multi-modal regularizers (indices 0-6).
enum class RegFamily { psi, omega };

/// Covariance-style regularizer. Each variant picks a per-sample selector
/// lambda_v and penalizes either sum_v |P_v F_v lambda_v|^2 (indices 1-3) or the
/// coupled |sum_v P_v F_v lambda_v|^2 (omega 4-6, which reuse the selectors of
/// 1-3). Selectors: 1 -> all ones, 2 -> alpha on support vectors, 3 -> alpha.
/// Index 0 disables the term.
struct RegularizationSpec {
  RegFamily family = RegFamily::psi;
  int index = 0;
  double beta = 0.0;

  void validate() const;
  [[nodiscard]] bool active() const noexcept { return index != 0; }
  [[nodiscard]] bool coupled() const noexcept { return family == RegFamily::omega && index >= 4; }
  /// 1, 2 or 3 for an active term.
  [[nodiscard]] int selector() const noexcept { return index == 0 ? 0 : (index - 1) % 3 + 1; }
  [[nodiscard]] std::string label() const; ///< "psi2", "omega5", ...
};

/// One grid point.
struct HyperParams {
  double eta = 1e-3;
  double beta = 0.0;
  double c = 0.1;
  double sigma = 1.0;
  int d = 1;
  int reg = 0; ///< regularizer index within the method's family
  int ds = 1;  ///< decision strategy 1-4, multi-modal only
  KernelKind kernel = KernelKind::linear;
  int max_iters = 100;

  [[nodiscard]] KernelSpec kernel_spec() const noexcept { return {kernel, sigma}; }
  [[nodiscard]] RegularizationSpec regularization(Method m) const noexcept {
    return {is_multimodal(m) ? RegFamily::omega : RegFamily::psi, reg, beta};
  }
};

/// Strict weak order (eta, beta, C, sigma, d, r, ds) used for grid tie-breaking.
bool canonical_less(const HyperParams& a, const HyperParams& b) noexcept;
bool same_point(const HyperParams& a, const HyperParams& b) noexcept;

} // namespace mvocc
