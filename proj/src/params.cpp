#include "mvocc/params.hpp"

#include "mvocc/error.hpp"

#include <tuple>

namespace mvocc {

const char* to_string(Method m) noexcept {
  switch (m) {
  case Method::svdd: return "svdd";
  case Method::ocsvm: return "ocsvm";
  case Method::s_svdd: return "s_svdd";
  case Method::es_svdd: return "es_svdd";
  case Method::ms_svdd: return "ms_svdd";
  }
  return "?";
}

const char* display_name(Method m) noexcept {
  switch (m) {
  case Method::svdd: return "SVDD";
  case Method::ocsvm: return "OC-SVM";
  case Method::s_svdd: return "S-SVDD";
  case Method::es_svdd: return "ES-SVDD";
  case Method::ms_svdd: return "MS-SVDD";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "svdd") return Method::svdd;
  if (name == "ocsvm" || name == "oc_svm" || name == "oc-svm") return Method::ocsvm;
  if (name == "s_svdd" || name == "s-svdd") return Method::s_svdd;
  if (name == "es_svdd" || name == "es-svdd") return Method::es_svdd;
  if (name == "ms_svdd" || name == "ms-svdd") return Method::ms_svdd;
  throw ConfigError("unknown method '" + name + "' (expected svdd, ocsvm, s_svdd, es_svdd or ms_svdd)");
}

void RegularizationSpec::validate() const {
  const int hi = family == RegFamily::psi ? 3 : 6;
  if (index < 0 || index > hi)
    throw ParameterError("regularizer index " + std::to_string(index) + " out of range 0-" + std::to_string(hi) +
                         " for " + (family == RegFamily::psi ? "psi" : "omega"));
  if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative");
}

std::string RegularizationSpec::label() const {
  return (family == RegFamily::psi ? "psi" : "omega") + std::to_string(index);
}

bool canonical_less(const HyperParams& a, const HyperParams& b) noexcept {
  return std::tie(a.eta, a.beta, a.c, a.sigma, a.d, a.reg, a.ds) <
         std::tie(b.eta, b.beta, b.c, b.sigma, b.d, b.reg, b.ds);
}

bool same_point(const HyperParams& a, const HyperParams& b) noexcept {
  return !canonical_less(a, b) && !canonical_less(b, a) && a.kernel == b.kernel && a.max_iters == b.max_iters;
}

} // namespace mvocc
