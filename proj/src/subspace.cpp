#include "mvocc/subspace.hpp"

#include "mvocc/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace mvocc {

namespace {

void check_shapes(std::span<const MatrixXd> projections, std::span<const MatrixXd> features,
                  std::span<const VectorXd> alphas, std::span<const MatrixXd> whiteners) {
  const std::size_t v_count = projections.size();
  if (v_count == 0) throw ShapeError("no projections given");
  if (features.size() != v_count || alphas.size() != v_count)
    throw ShapeError("projections, features and alphas must have one entry per modality");
  if (!whiteners.empty() && whiteners.size() != v_count) throw ShapeError("need one whitener per modality");
  const Index d = projections[0].rows();
  double total = 0.0;
  for (std::size_t v = 0; v < v_count; ++v) {
    if (projections[v].rows() != d) throw ShapeError("projections disagree on subspace dimension");
    if (projections[v].cols() != features[v].rows())
      throw ShapeError("projection " + std::to_string(v + 1) + " does not match feature dimension");
    if (alphas[v].size() != features[v].cols())
      throw ShapeError("alpha count for modality " + std::to_string(v + 1) + " does not match sample count");
    if (!whiteners.empty() && (whiteners[v].rows() != d || whiteners[v].cols() != d))
      throw ShapeError("whitener must be d x d");
    if (alphas[v].size() > 0 && alphas[v].minCoeff() < -1e-12) throw ContractError("alphas must be non-negative");
    total += alphas[v].sum();
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("alphas must sum to one (sum = " + std::to_string(total) + ")");
}

std::vector<MatrixXd> effective_projections(std::span<const MatrixXd> projections, std::span<const MatrixXd> whiteners) {
  std::vector<MatrixXd> p(projections.begin(), projections.end());
  if (!whiteners.empty()) {
    for (std::size_t v = 0; v < p.size(); ++v) p[v] = whiteners[v] * projections[v];
  }
  return p;
}

VectorXd selector(const VectorXd& alpha, int kind) {
  switch (kind) {
  case 1: return VectorXd::Ones(alpha.size());
  case 2: return (alpha.array() > kAlphaTol).select(alpha, 0.0);
  default: return alpha;
  }
}

} // namespace

RegTerm reg_term(std::span<const MatrixXd> projections, std::span<const MatrixXd> features,
                 std::span<const VectorXd> alphas, const RegularizationSpec& spec) {
  spec.validate();
  RegTerm out;
  for (const auto& p : projections) out.gradients.push_back(MatrixXd::Zero(p.rows(), p.cols()));
  if (!spec.active()) return out;

  const int kind = spec.selector();
  std::vector<VectorXd> weighted; // F_v lambda_v
  for (std::size_t v = 0; v < projections.size(); ++v) weighted.push_back(features[v] * selector(alphas[v], kind));

  if (spec.coupled()) {
    VectorXd t = VectorXd::Zero(projections[0].rows());
    for (std::size_t v = 0; v < projections.size(); ++v) t += projections[v] * weighted[v];
    out.value = t.squaredNorm();
    for (std::size_t v = 0; v < projections.size(); ++v) out.gradients[v] = 2.0 * t * weighted[v].transpose();
  } else {
    for (std::size_t v = 0; v < projections.size(); ++v) {
      const VectorXd t = projections[v] * weighted[v];
      out.value += t.squaredNorm();
      out.gradients[v] = 2.0 * t * weighted[v].transpose();
    }
  }
  return out;
}

double lagrangian_value(std::span<const MatrixXd> projections, std::span<const MatrixXd> features,
                        std::span<const VectorXd> alphas, const RegularizationSpec& reg,
                        std::span<const MatrixXd> whiteners) {
  check_shapes(projections, features, alphas, whiteners);
  const auto p = effective_projections(projections, whiteners);
  double value = 0.0;
  VectorXd s = VectorXd::Zero(p[0].rows());
  for (std::size_t v = 0; v < p.size(); ++v) {
    const MatrixXd y = p[v] * features[v];
    value += y.colwise().squaredNorm().dot(alphas[v]);
    s += y * alphas[v];
  }
  value -= s.squaredNorm();
  if (reg.active()) value += reg.beta * reg_term(p, features, alphas, reg).value;
  return value;
}

std::vector<MatrixXd> lagrangian_gradient(std::span<const MatrixXd> projections, std::span<const MatrixXd> features,
                                          std::span<const VectorXd> alphas, const RegularizationSpec& reg,
                                          std::span<const MatrixXd> whiteners) {
  check_shapes(projections, features, alphas, whiteners);
  const auto p = effective_projections(projections, whiteners);
  VectorXd s = VectorXd::Zero(p[0].rows());
  for (std::size_t v = 0; v < p.size(); ++v) s += p[v] * (features[v] * alphas[v]);

  std::vector<MatrixXd> grads;
  grads.reserve(p.size());
  const RegTerm r = reg.active() ? reg_term(p, features, alphas, reg) : RegTerm{};
  for (std::size_t v = 0; v < p.size(); ++v) {
    const MatrixXd& f = features[v];
    MatrixXd g = 2.0 * (p[v] * f) * alphas[v].asDiagonal() * f.transpose();
    g -= 2.0 * s * (f * alphas[v]).transpose();
    if (reg.active()) g += reg.beta * r.gradients[v];
    if (!whiteners.empty()) g = whiteners[v].transpose() * g;
    grads.push_back(std::move(g));
  }
  return grads;
}

MatrixXd orthonormalize_rows(const MatrixXd& q) {
  const Index d = q.rows();
  const Index dim = q.cols();
  if (d > dim) throw ParameterError("cannot orthonormalize " + std::to_string(d) + " rows in dimension " + std::to_string(dim));
  if (d == 0) return q;
  Eigen::HouseholderQR<MatrixXd> qr(q.transpose());
  MatrixXd basis = qr.householderQ() * MatrixXd::Identity(dim, d);
  const auto& packed = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    if (packed(j, j) < 0.0) basis.col(j) = -basis.col(j);
  }
  return basis.transpose();
}

MatrixXd pca_basis(const MatrixXd& f, int d, Rng& rng) {
  const Index dim = f.rows();
  if (d < 1 || d > dim)
    throw ParameterError("subspace dimension d=" + std::to_string(d) + " must lie in [1, " + std::to_string(dim) + "]");
  const MatrixXd centered = f.colwise() - f.rowwise().mean();
  const MatrixXd cov = centered * centered.transpose() / static_cast<double>(std::max<Index>(f.cols(), 1));
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  const VectorXd& values = eig.eigenvalues();
  const double top = values(dim - 1);
  Index usable = 0;
  for (Index i = dim - 1; i >= 0 && top > 1e-300 && values(i) > 1e-10 * top; --i) ++usable;

  MatrixXd basis(d, dim);
  if (usable >= d) {
    for (Index r = 0; r < d; ++r) {
      VectorXd v = eig.eigenvectors().col(dim - 1 - r);
      Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      basis.row(r) = v.transpose();
    }
  } else {
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < dim; ++c) basis(r, c) = rng.normal();
    }
  }
  return orthonormalize_rows(basis);
}

MatrixXd whitening_matrix(const MatrixXd& y) {
  const Index d = y.rows();
  if (d == 0 || y.cols() == 0) throw ShapeError("whitening_matrix: empty input");
  const MatrixXd centered = y.colwise() - y.rowwise().mean();
  const MatrixXd cov = centered * centered.transpose() / static_cast<double>(y.cols());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  double floor = 1e-6 * cov.trace() / static_cast<double>(d);
  if (!(floor > 0.0)) floor = 1e-12;
  const VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

bool combine_decisions(int ds, std::span<const bool> accepted) {
  if (accepted.empty()) throw ShapeError("no modality decisions to combine");
  switch (ds) {
  case 1: return std::all_of(accepted.begin(), accepted.end(), [](bool b) { return b; });
  case 2: return std::any_of(accepted.begin(), accepted.end(), [](bool b) { return b; });
  case 3: return accepted[0];
  case 4:
    if (accepted.size() < 2) throw ShapeError("decision strategy 4 needs a second modality");
    return accepted[1];
  default: throw ParameterError("decision strategy must be 1-4, got " + std::to_string(ds));
  }
}

MatrixXd SubspaceModel::embed(std::size_t v, const MatrixXd& f) const {
  const auto& q = projections.at(v).q;
  if (f.rows() != q.cols())
    throw ShapeError("modality " + std::to_string(v + 1) + " has " + std::to_string(f.rows()) +
                     " features, projection expects " + std::to_string(q.cols()));
  MatrixXd y = q * f;
  if (whitener) y = (*whitener) * y;
  return y;
}

MatrixXd SubspaceModel::modality_decisions(std::span<const MatrixXd> views) const {
  if (views.size() != projections.size())
    throw ShapeError("model needs " + std::to_string(projections.size()) + " modalities, got " +
                     std::to_string(views.size()));
  const Index m = views.empty() ? 0 : views[0].cols();
  MatrixXd out(static_cast<Index>(views.size()), m);
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].cols() != m) throw ShapeError("modalities disagree on sample count");
    out.row(static_cast<Index>(v)) = inner.decisions(embed(v, views[v])).transpose();
  }
  return out;
}

VectorXd SubspaceModel::decisions(std::span<const MatrixXd> views) const {
  return modality_decisions(views).row(0).transpose();
}

std::vector<bool> SubspaceModel::accept(std::span<const MatrixXd> views, int ds) const {
  const MatrixXd dec = modality_decisions(views);
  std::vector<bool> out(static_cast<std::size_t>(dec.cols()));
  if (method != Method::ms_svdd) {
    for (Index j = 0; j < dec.cols(); ++j) out[static_cast<std::size_t>(j)] = dec(0, j) >= 0.0;
    return out;
  }
  const int strategy = ds == 0 ? hparams.ds : ds;
  const auto v_count = static_cast<std::size_t>(dec.rows());
  auto per = std::make_unique<bool[]>(v_count);
  for (Index j = 0; j < dec.cols(); ++j) {
    for (std::size_t v = 0; v < v_count; ++v) per[v] = dec(static_cast<Index>(v), j) >= 0.0;
    out[static_cast<std::size_t>(j)] = combine_decisions(strategy, std::span<const bool>(per.get(), v_count));
  }
  return out;
}

bool SubspaceModel::ms_svdd_decide(std::span<const VectorXd> sample, int ds) const {
  if (sample.size() != projections.size())
    throw ShapeError("sample has " + std::to_string(sample.size()) + " modalities, model needs " +
                     std::to_string(projections.size()));
  std::vector<MatrixXd> views;
  for (const auto& s : sample) views.emplace_back(s);
  return accept(views, ds).at(0);
}

namespace {

struct TrainingState {
  std::vector<MatrixXd> q;
  std::optional<MatrixXd> whitener;
  SvddModel inner;
  std::vector<VectorXd> alphas;
  double loss = 0.0;
};

TrainingState evaluate_state(Method method, std::vector<MatrixXd> q, std::span<const MatrixXd> views,
                             const HyperParams& hp, const SmoOptions& smo) {
  TrainingState st;
  st.q = std::move(q);
  const Index n = views[0].cols();
  const Index d = st.q[0].rows();
  std::vector<MatrixXd> p = st.q;
  if (method == Method::es_svdd) {
    st.whitener = whitening_matrix(st.q[0] * views[0]);
    p[0] = (*st.whitener) * st.q[0];
  }
  MatrixXd pooled(d, n * static_cast<Index>(views.size()));
  for (std::size_t v = 0; v < views.size(); ++v) pooled.middleCols(static_cast<Index>(v) * n, n) = p[v] * views[v];
  st.inner = fit_svdd(pooled, hp.c, KernelSpec::linear(), smo);
  for (std::size_t v = 0; v < views.size(); ++v) st.alphas.push_back(st.inner.alphas.segment(static_cast<Index>(v) * n, n));
  st.loss = st.inner.primal_objective();
  const RegularizationSpec reg = hp.regularization(method);
  if (reg.active() && reg.beta != 0.0) st.loss += reg.beta * reg_term(p, views, st.alphas, reg).value;
  return st;
}

bool all_finite(const std::vector<MatrixXd>& ms) {
  return std::all_of(ms.begin(), ms.end(), [](const MatrixXd& m) { return m.allFinite(); });
}

} // namespace

SubspaceModel train_subspace(Method method, std::span<const MatrixXd> views, const HyperParams& hp,
                             const TrainOptions& options) {
  if (!is_subspace(method)) throw ConfigError(std::string(to_string(method)) + " is not a subspace method");
  if (views.empty()) throw ShapeError("no training views");
  if (method == Method::ms_svdd && views.size() < 2) throw ConfigError("ms_svdd requires ≥2 views");
  if (method != Method::ms_svdd && views.size() != 1)
    throw ConfigError(std::string(to_string(method)) + " expects a single (concatenated) view");
  const Index n = views[0].cols();
  if (n < 1) throw ShapeError("no training samples");
  Index min_dim = views[0].rows();
  for (const auto& f : views) {
    if (f.cols() != n) throw ShapeError("training views disagree on sample count");
    if (!f.allFinite()) throw NumericError("non-finite training features");
    min_dim = std::min(min_dim, f.rows());
  }
  if (hp.d < 1 || hp.d > min_dim)
    throw ParameterError("subspace dimension d=" + std::to_string(hp.d) + " must lie in [1, " +
                         std::to_string(min_dim) + "]");
  if (!(hp.eta >= 0.0)) throw ParameterError("learning rate must be non-negative");
  const RegularizationSpec reg = hp.regularization(method);
  reg.validate();
  const auto pooled_n = static_cast<double>(n) * static_cast<double>(views.size());
  if (!(hp.c > 0.0) || hp.c * pooled_n < 1.0 - 1e-12)
    throw InfeasibleError("C = " + std::to_string(hp.c) + " is below 1/N for " + std::to_string(static_cast<long>(pooled_n)) +
                          " pooled training columns");

  std::vector<MatrixXd> q;
  Rng rng(options.seed);
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (!options.initial_q.empty()) {
      const MatrixXd& init = options.initial_q.at(v);
      if (init.rows() != hp.d || init.cols() != views[v].rows()) throw ShapeError("initial projection has the wrong shape");
      q.push_back(orthonormalize_rows(init));
    } else {
      Rng stream = rng.split(v);
      q.push_back(pca_basis(views[v], hp.d, stream));
    }
  }

  TrainingState cur = evaluate_state(method, std::move(q), views, hp, options.smo);
  SubspaceModel model;
  model.method = method;
  model.hparams = hp;
  model.loss_trace.push_back(cur.loss);

  double eta = hp.eta;
  if (eta > 0.0) {
    for (int it = 0; it < hp.max_iters; ++it) {
      std::vector<MatrixXd> whiteners;
      if (cur.whitener) whiteners.push_back(*cur.whitener);
      const auto grads = lagrangian_gradient(cur.q, views, cur.alphas, reg, whiteners);
      if (!all_finite(grads))
        throw DivergenceError("non-finite gradient at iteration " + std::to_string(it) + " (eta = " + std::to_string(eta) + ")");
      double gnorm = 0.0;
      for (const auto& g : grads) gnorm += g.squaredNorm();
      if (gnorm < 1e-28) break;

      SmoOptions warm = options.smo;
      warm.warm_start = cur.inner.alphas;
      bool accepted = false;
      double step = eta;
      for (int attempt = 0; attempt <= options.max_halvings; ++attempt) {
        std::vector<MatrixXd> cand;
        for (std::size_t v = 0; v < cur.q.size(); ++v) cand.push_back(orthonormalize_rows(cur.q[v] - step * grads[v]));
        if (!all_finite(cand))
          throw DivergenceError("projection diverged at iteration " + std::to_string(it) + " (eta = " + std::to_string(step) + ")");
        TrainingState next = evaluate_state(method, std::move(cand), views, hp, warm);
        if (!std::isfinite(next.loss))
          throw DivergenceError("loss diverged at iteration " + std::to_string(it) + " (eta = " + std::to_string(step) + ")");
        if (next.loss <= cur.loss + options.accept_tol) {
          cur = std::move(next);
          accepted = true;
          break;
        }
        ++model.rejected_steps;
        step *= 0.5;
      }
      if (!accepted) break;
      eta = step;
      ++model.accepted_steps;
      model.loss_trace.push_back(cur.loss);
    }
  }

  model.final_eta = eta;
  for (std::size_t v = 0; v < cur.q.size(); ++v) model.projections.push_back({cur.q[v], static_cast<int>(v + 1)});
  model.whitener = cur.whitener;
  model.inner = std::move(cur.inner);
  return model;
}

} // namespace mvocc
