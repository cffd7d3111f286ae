#include "mvocc/boundary.hpp"

#include "mvocc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mvocc {

namespace {

constexpr double kTau = 1e-12;
constexpr long kRefinePeriod = 100;
constexpr int kMaxRefines = 16;

// Position of alpha_i relative to its box.
enum class Bound { lower, free, upper };

Bound classify(double a, double upper) {
  if (a <= kAlphaTol) return Bound::lower;
  if (a >= upper - kAlphaTol) return Bound::upper;
  return Bound::free;
}

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite input");
}

void require_square(const MatrixXd& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw ShapeError(std::string(what) + ": gram matrix must be square and non-empty");
}

// Offset b of a boundary defined by score_i <= b for lower-bound alphas,
// score_i >= b for upper-bound alphas, score_i = b for free ones. Returns the
// mean over free samples when any exist, else the midpoint of the feasible
// interval; `from_free` reports which case applied.
double boundary_offset(const VectorXd& alphas, const VectorXd& score, double upper, bool& from_free) {
  double sum = 0.0;
  long count = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < alphas.size(); ++i) {
    switch (classify(alphas(i), upper)) {
    case Bound::free:
      sum += score(i);
      ++count;
      break;
    case Bound::lower:
      lo = std::max(lo, score(i));
      break;
    case Bound::upper:
      hi = std::min(hi, score(i));
      break;
    }
  }
  from_free = count > 0;
  if (count > 0) return sum / static_cast<double>(count);
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  return std::isfinite(lo) ? lo : hi;
}

// Largest KKT residual for a boundary whose "inside" margin is
// margin_i = b - score_i (>= 0 expected at the lower bound, <= 0 at the upper).
double kkt_residual(const VectorXd& alphas, const VectorXd& margin, double upper) {
  double worst = 0.0;
  for (Index i = 0; i < alphas.size(); ++i) {
    switch (classify(alphas(i), upper)) {
    case Bound::lower:
      worst = std::max(worst, -margin(i));
      break;
    case Bound::free:
      worst = std::max(worst, std::abs(margin(i)));
      break;
    case Bound::upper:
      worst = std::max(worst, margin(i));
      break;
    }
  }
  return worst;
}

std::vector<Index> support_of(const VectorXd& alphas) {
  std::vector<Index> idx;
  for (Index i = 0; i < alphas.size(); ++i) {
    if (alphas(i) > kAlphaTol) idx.push_back(i);
  }
  return idx;
}


// Active-set refinement for SMO. Pairwise steps crawl when the free variables
// span a (near) singular face of the QP. This takes one Newton step on the free
// variables within the sum-zero subspace, or, when the reduced Hessian has a
// null direction along which the objective still decreases, moves along that
// ray to the nearest bound. The move is kept only if the objective drops.
// Recomputes the gradient from scratch either way.
bool refine_free_set(const MatrixXd& q, const VectorXd& p, double upper, VectorXd& a, VectorXd& g) {
  std::vector<Index> free;
  for (Index t = 0; t < a.size(); ++t) {
    if (a(t) > 0.0 && a(t) < upper) free.push_back(t);
  }
  const auto m = static_cast<Index>(free.size());
  if (m < 2) return false;
  MatrixXd q_ff(m, m);
  VectorXd g_f(m);
  for (Index r = 0; r < m; ++r) {
    g_f(r) = g(free[r]);
    for (Index c = 0; c < m; ++c) q_ff(r, c) = q(free[r], free[c]);
  }
  const Eigen::HouseholderQR<MatrixXd> qr(VectorXd::Ones(m));
  const MatrixXd basis = MatrixXd(qr.householderQ()).rightCols(m - 1); // orthonormal, sums to zero
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(basis.transpose() * q_ff * basis);
  const VectorXd r = basis.transpose() * g_f;
  const double lam_max = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  VectorXd newton = VectorXd::Zero(m - 1);
  VectorXd ray = VectorXd::Zero(m - 1);
  for (Index k = 0; k < m - 1; ++k) {
    const double lam = eig.eigenvalues()(k);
    const double coef = eig.eigenvectors().col(k).dot(r);
    if (lam > 1e-10 * lam_max) newton -= (coef / lam) * eig.eigenvectors().col(k);
    else ray -= coef * eig.eigenvectors().col(k);
  }
  const bool use_ray = ray.norm() > 1e-9 * std::max(r.norm(), 1e-300);
  const VectorXd delta = basis * (use_ray ? ray : newton);
  if (!(delta.norm() > 0.0) || !delta.allFinite()) return false;

  double t_max = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < m; ++k) {
    const double ak = a(free[k]);
    if (delta(k) > 0.0) t_max = std::min(t_max, (upper - ak) / delta(k));
    else if (delta(k) < 0.0) t_max = std::min(t_max, ak / -delta(k));
  }
  const double t = use_ray ? t_max : std::min(1.0, t_max);
  if (!(t > 0.0) || !std::isfinite(t)) return false;

  VectorXd trial = a;
  for (Index k = 0; k < m; ++k) {
    double v = a(free[k]) + t * delta(k);
    if (v < 1e-15) v = 0.0;
    if (v > upper - 1e-15) v = upper;
    trial(free[k]) = v;
  }
  // restore the unit sum lost to snapping on the largest interior variable
  Index fix = -1;
  for (const Index k : free) {
    if (trial(k) > 0.0 && trial(k) < upper && (fix < 0 || trial(k) > trial(fix))) fix = k;
  }
  if (fix < 0) return false;
  trial(fix) += 1.0 - trial.sum();
  if (trial(fix) < 0.0 || trial(fix) > upper) return false;
  const VectorXd g_trial = q * trial + p;
  const double before = 0.5 * a.dot(g + p);
  const double after = 0.5 * trial.dot(g_trial + p);
  if (after < before) {
    a = std::move(trial);
    g = g_trial;
    return true;
  }
  g = q * a + p;
  return false;
}
} // namespace

SimplexQpSolution solve_simplex_qp(const MatrixXd& q, const VectorXd& p, double upper, const SmoOptions& options) {
  const Index n = q.rows();
  require_square(q, "solve_simplex_qp");
  if (p.size() != n) throw ShapeError("solve_simplex_qp: linear term size mismatch");
  if (!(upper * static_cast<double>(n) >= 1.0 - 1e-12))
    throw InfeasibleError("box bound " + std::to_string(upper) + " is below 1/N = " +
                          std::to_string(1.0 / static_cast<double>(n)) + "; the unit-sum constraint is infeasible");

  SimplexQpSolution sol;
  // a bound below 1/N by rounding only
  upper = std::max(upper, 1.0 / static_cast<double>(n));
  const VectorXd& w = options.warm_start;
  const bool warm = w.size() == n && w.allFinite() && w.minCoeff() >= 0.0 && w.maxCoeff() <= upper &&
                    std::abs(w.sum() - 1.0) <= 1e-12;
  sol.alphas = warm ? w : VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  VectorXd& a = sol.alphas;
  VectorXd g = q * a + p;

  for (sol.iterations = 0; sol.iterations < options.max_iterations; ++sol.iterations) {
    if (sol.iterations > 0 && sol.iterations % kRefinePeriod == 0) {
      for (int r = 0; r < kMaxRefines && refine_free_set(q, p, upper, a, g); ++r) {
      }
    }
    // i: most attractive index to increase, j: to decrease
    Index i = -1;
    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    for (Index t = 0; t < n; ++t) {
      if (a(t) < upper && g(t) < g_min) {
        g_min = g(t);
        i = t;
      }
      if (a(t) > 0.0 && g(t) > g_max) g_max = g(t);
    }
    sol.max_violation = std::max(0.0, g_max - g_min);
    if (i < 0 || sol.max_violation < options.tolerance) {
      sol.converged = true;
      break;
    }
    Index j = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Index t = 0; t < n; ++t) {
      if (a(t) <= 0.0) continue;
      const double b = g(t) - g_min;
      if (b <= 0.0) continue;
      double curv = q(i, i) + q(t, t) - 2.0 * q(i, t);
      if (curv <= kTau) curv = kTau;
      const double gain = b * b / curv;
      if (gain > best) {
        best = gain;
        j = t;
      }
    }
    if (j < 0) {
      sol.converged = true;
      break;
    }
    double curv = q(i, i) + q(j, j) - 2.0 * q(i, j);
    if (curv <= kTau) curv = kTau;
    double step = (g(j) - g(i)) / curv;
    step = std::min({step, upper - a(i), a(j)});
    if (step <= 0.0) {
      sol.converged = true;
      break;
    }
    a(i) += step;
    a(j) -= step;
    if (a(i) > upper - 1e-15) a(i) = upper;
    if (a(j) < 1e-15) a(j) = 0.0;
    g += step * (q.col(i) - q.col(j));
  }

  sol.gradient = q * a + p;
  sol.objective = 0.5 * a.dot(q * a) + p.dot(a);
  return sol;
}

VectorXd SvddModel::sq_distances(const MatrixXd& z) const {
  if (z.rows() != dim())
    throw ShapeError("svdd: sample dimension " + std::to_string(z.rows()) + " does not match model dimension " +
                     std::to_string(dim()));
  VectorXd out(z.cols());
  if (kernel.kind == KernelKind::linear && center_coords.size() == z.rows()) {
    for (Index j = 0; j < z.cols(); ++j) out(j) = (z.col(j) - center_coords).squaredNorm();
    return out;
  }
  const MatrixXd k = gram_matrix(support_vectors, z, kernel); // |S| x M
  for (Index j = 0; j < z.cols(); ++j) {
    out(j) = kernel(z.col(j), z.col(j)) - 2.0 * support_alphas.dot(k.col(j)) + alpha_k_alpha;
  }
  return out;
}

VectorXd SvddModel::decisions(const MatrixXd& z) const {
  return (radius_sq - sq_distances(z).array()).matrix();
}

double SvddModel::decision(const Eigen::Ref<const VectorXd>& z) const {
  return decisions(MatrixXd(z))(0);
}

double SvddModel::decision_from_kernel(double k_zz, const Eigen::Ref<const VectorXd>& k_row) const {
  if (k_row.size() != alphas.size())
    throw ShapeError("svdd: kernel row has " + std::to_string(k_row.size()) + " entries, model has " +
                     std::to_string(alphas.size()) + " training samples");
  return radius_sq - (k_zz - 2.0 * alphas.dot(k_row) + alpha_k_alpha);
}

SvddDual solve_svdd(const MatrixXd& gram, double c, const SmoOptions& options) {
  require_square(gram, "solve_svdd");
  require_finite(gram, "solve_svdd");
  const Index n = gram.rows();
  if (!(c > 0.0) || c * static_cast<double>(n) < 1.0 - 1e-12)
    throw InfeasibleError("SVDD needs C >= 1/N (C = " + std::to_string(c) + ", N = " + std::to_string(n) + ")");

  const VectorXd diag = gram.diagonal();
  const SimplexQpSolution qp = solve_simplex_qp(2.0 * gram, -diag, c, options);

  SvddDual out;
  out.alphas = qp.alphas;
  out.converged = qp.converged;
  const VectorXd k_alpha = gram * out.alphas;
  out.alpha_k_alpha = out.alphas.dot(k_alpha);
  out.sq_distances = (diag - 2.0 * k_alpha).array() + out.alpha_k_alpha;
  out.sq_distances = out.sq_distances.cwiseMax(0.0);
  out.objective = out.alphas.dot(diag) - out.alpha_k_alpha;

  // dist_i <= R^2 at the lower bound, >= R^2 at C, = R^2 for free SVs
  const double upper = std::max(c, 1.0 / static_cast<double>(n));
  out.radius_sq = std::max(0.0, boundary_offset(out.alphas, out.sq_distances, upper, out.radius_from_free_sv));
  const VectorXd margin = (out.radius_sq - out.sq_distances.array()).matrix();
  out.kkt_violation = kkt_residual(out.alphas, margin, upper);
  return out;
}

SvddModel fit_svdd(const MatrixXd& z, double c, const KernelSpec& kernel, const SmoOptions& options) {
  kernel.validate();
  require_finite(z, "fit_svdd");
  const SvddDual dual = solve_svdd(gram_matrix(z, z, kernel), c, options);

  SvddModel m;
  m.kernel = kernel;
  m.c = c;
  m.alphas = dual.alphas;
  m.radius_sq = dual.radius_sq;
  m.alpha_k_alpha = dual.alpha_k_alpha;
  m.objective = dual.objective;
  m.kkt_violation = dual.kkt_violation;
  m.radius_from_free_sv = dual.radius_from_free_sv;
  m.support_index = support_of(dual.alphas);
  m.support_vectors.resize(z.rows(), static_cast<Index>(m.support_index.size()));
  m.support_alphas.resize(static_cast<Index>(m.support_index.size()));
  for (std::size_t s = 0; s < m.support_index.size(); ++s) {
    m.support_vectors.col(static_cast<Index>(s)) = z.col(m.support_index[s]);
    m.support_alphas(static_cast<Index>(s)) = dual.alphas(m.support_index[s]);
  }
  if (kernel.kind == KernelKind::linear) m.center_coords = z * dual.alphas;
  m.slacks = (dual.sq_distances.array() - m.radius_sq).cwiseMax(0.0).matrix();
  return m;
}

VectorXd OcsvmModel::decisions(const MatrixXd& z) const {
  if (z.rows() != support_vectors.rows())
    throw ShapeError("ocsvm: sample dimension " + std::to_string(z.rows()) + " does not match model dimension " +
                     std::to_string(support_vectors.rows()));
  const MatrixXd k = gram_matrix(support_vectors, z, kernel);
  return ((k.transpose() * support_alphas).array() - rho).matrix();
}

double OcsvmModel::decision_from_kernel(const Eigen::Ref<const VectorXd>& k_row) const {
  if (k_row.size() != alphas.size()) throw ShapeError("ocsvm: kernel row size mismatch");
  return alphas.dot(k_row) - rho;
}

OcsvmDual solve_ocsvm(const MatrixXd& gram, double nu, const SmoOptions& options) {
  require_square(gram, "solve_ocsvm");
  require_finite(gram, "solve_ocsvm");
  if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("nu must lie in (0, 1], got " + std::to_string(nu));
  const Index n = gram.rows();
  const double upper = 1.0 / (nu * static_cast<double>(n));
  const SimplexQpSolution qp = solve_simplex_qp(gram, VectorXd::Zero(n), upper, options);

  OcsvmDual out;
  out.alphas = qp.alphas;
  out.converged = qp.converged;
  out.objective = qp.objective;
  const VectorXd score = gram * out.alphas;
  // score_i >= rho at the lower bound, <= rho at the upper bound
  bool from_free = true;
  const VectorXd neg = -score;
  out.rho = -boundary_offset(out.alphas, neg, upper, from_free);
  out.train_decisions = (score.array() - out.rho).matrix();
  out.kkt_violation = kkt_residual(out.alphas, out.train_decisions, upper);
  return out;
}

OcsvmModel fit_ocsvm(const MatrixXd& x, double nu, const KernelSpec& kernel, const SmoOptions& options) {
  kernel.validate();
  require_finite(x, "fit_ocsvm");
  const OcsvmDual dual = solve_ocsvm(gram_matrix(x, x, kernel), nu, options);
  OcsvmModel m;
  m.kernel = kernel;
  m.nu = nu;
  m.alphas = dual.alphas;
  m.rho = dual.rho;
  m.objective = dual.objective;
  m.kkt_violation = dual.kkt_violation;
  m.support_index = support_of(dual.alphas);
  m.support_vectors.resize(x.rows(), static_cast<Index>(m.support_index.size()));
  m.support_alphas.resize(static_cast<Index>(m.support_index.size()));
  for (std::size_t s = 0; s < m.support_index.size(); ++s) {
    m.support_vectors.col(static_cast<Index>(s)) = x.col(m.support_index[s]);
    m.support_alphas(static_cast<Index>(s)) = dual.alphas(m.support_index[s]);
  }
  return m;
}

double nu_from_c(double c, Index n) {
  if (!(c > 0.0) || n < 1) throw ParameterError("nu_from_c: C and N must be positive");
  return std::clamp(1.0 / (static_cast<double>(n) * c), std::numeric_limits<double>::min(), 1.0);
}

} // namespace mvocc
