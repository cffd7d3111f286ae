#include "mvocc/synthetic.hpp"

#include "mvocc/error.hpp"
#include "mvocc/prng.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace mvocc {

MultiViewDataset gen_two_view(const SynthSpec& spec) {
  if (spec.n_target < 1 || spec.n_outlier < 1) throw ParameterError("synthetic counts must be at least 1");
  if (spec.dims.empty()) throw ParameterError("synthetic data needs at least one view");
  if (!(spec.separation >= 0.0)) throw ParameterError("separation must be non-negative");
  const Index n = spec.n_target + spec.n_outlier;
  const auto v_count = static_cast<Index>(spec.dims.size());
  const Rng root(spec.seed);

  std::vector<ModalityView> views;
  for (Index v = 0; v < v_count; ++v) {
    const Index dim = spec.dims[static_cast<std::size_t>(v)];
    if (dim < 1) throw ParameterError("view dimensions must be at least 1");
    Rng rng = root.split(static_cast<std::uint64_t>(v));
    MatrixXd f(dim, n);
    for (Index j = 0; j < n; ++j) {
      const Index outlier = j - spec.n_target;
      bool displaced = outlier >= 0;
      if (displaced && v_count >= 2) {
        const Index r = outlier % (2 * v_count);
        if (r == v) displaced = false;
      }
      VectorXd x(dim);
      for (Index r = 0; r < dim; ++r) x(r) = rng.normal();
      if (displaced) {
        VectorXd u(dim);
        for (Index r = 0; r < dim; ++r) u(r) = rng.normal();
        const double norm = u.norm();
        if (norm > 0) u /= norm;
        else u = VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
        x += spec.separation * u;
      }
      f.col(j) = x;
    }
    views.push_back({static_cast<int>(v + 1), std::move(f)});
  }

  std::vector<std::string> labels;
  std::vector<std::string> ids;
  const int width = static_cast<int>(std::to_string(n).size());
  char buf[32];
  for (Index j = 0; j < n; ++j) {
    labels.push_back(j < spec.n_target ? spec.target_label : spec.outlier_label);
    std::snprintf(buf, sizeof buf, "s%0*ld", width, static_cast<long>(j + 1));
    ids.emplace_back(buf);
  }
  return {std::move(views), std::move(labels), std::move(ids), spec.target_label};
}

namespace {

struct Enumerator {
  const MatrixXd& q;
  const VectorXd& p;
  Index n;
  long total_units;
  long max_units;
  double step;
  VectorXd alpha;
  VectorXd q_alpha; // Q * alpha over the indices fixed so far
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_alpha;
  long evaluated = 0;

  // objective of the partial assignment is tracked as
  // 0.5 a^T Q a + p^T a accumulated index by index
  void recurse(Index i, long remaining, double partial) {
    if (i == n - 1) {
      if (remaining > max_units) return;
      const double a = static_cast<double>(remaining) * step;
      const double value = partial + a * q_alpha(i) + 0.5 * a * a * q(i, i) + p(i) * a;
      ++evaluated;
      if (value < best) {
        best = value;
        alpha(i) = a;
        best_alpha = alpha;
      }
      return;
    }
    const long slots_after = static_cast<long>(n - 1 - i);
    const long lo = std::max(0L, remaining - slots_after * max_units);
    const long hi = std::min(remaining, max_units);
    for (long units = lo; units <= hi; ++units) {
      const double a = static_cast<double>(units) * step;
      const double value = partial + a * q_alpha(i) + 0.5 * a * a * q(i, i) + p(i) * a;
      alpha(i) = a;
      if (a != 0.0) q_alpha += a * q.col(i);
      recurse(i + 1, remaining - units, value);
      if (a != 0.0) q_alpha -= a * q.col(i);
    }
    alpha(i) = 0.0;
  }
};

} // namespace

BruteforceResult simplex_bruteforce(const MatrixXd& q, const VectorXd& p, double upper, double step) {
  const Index n = q.rows();
  if (n < 1 || q.cols() != n || p.size() != n) throw ShapeError("simplex_bruteforce: inconsistent shapes");
  if (n > 6) throw OracleScaleError("simplex_bruteforce supports N <= 6, got N = " + std::to_string(n));
  if (!(step > 0.0 && step <= 1.0)) throw ParameterError("grid step must lie in (0, 1]");
  const long total = std::lround(1.0 / step);
  if (std::abs(static_cast<double>(total) * step - 1.0) > 1e-9) throw ParameterError("grid step must divide 1");
  const long max_units = std::min(total, static_cast<long>(std::floor(upper / step + 1e-9)));
  if (max_units * static_cast<long>(n) < total)
    throw InfeasibleError("no grid point satisfies the box bound");

  Enumerator e{q, p, n, total, max_units, step, VectorXd::Zero(n), VectorXd::Zero(n),
               std::numeric_limits<double>::infinity(), VectorXd::Zero(n), 0};
  e.recurse(0, total, 0.0);
  return {e.best_alpha, e.best, e.evaluated};
}

BruteforceResult svdd_bruteforce(const MatrixXd& gram, double c, double step) {
  BruteforceResult r = simplex_bruteforce(2.0 * gram, -gram.diagonal(), c, step);
  r.objective = -r.objective;
  return r;
}

double default_oracle_step(Index n) { return n <= 3 ? 1e-3 : 1e-2; }

} // namespace mvocc
