#include "test_support.hpp"

#include "mvocc/error.hpp"
#include "mvocc/evaluation.hpp"
#include "mvocc/report.hpp"
#include "mvocc/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace mvocc;

namespace {

ConfusionMatrix counts(long tp, long fn, long fp, long tn) { return {tp, fn, fp, tn, "MI"}; }

double round2(double x) { return std::round(x * 100.0) / 100.0; }

// Two tight target clusters and outliers on a far ring; a vanishing RBF width
// rejects everything, a unit width separates cleanly.
MultiViewDataset dominance_fixture() {
  Rng rng(99);
  const Index pos = 30;
  const Index neg = 20;
  MatrixXd x(2, pos + neg);
  std::vector<std::string> labels;
  std::vector<std::string> ids;
  for (Index i = 0; i < pos + neg; ++i) {
    if (i < pos) {
      x(0, i) = 0.3 * rng.normal();
      x(1, i) = 0.3 * rng.normal();
    } else {
      const double t = 2.0 * 3.141592653589793 * rng.uniform();
      x(0, i) = 6.0 * std::cos(t);
      x(1, i) = 6.0 * std::sin(t);
    }
    labels.emplace_back(i < pos ? "T" : "O");
    ids.push_back("s" + std::to_string(i));
  }
  return {{{1, x}}, labels, ids, "T"};
}

HyperParams rbf_point(double c, double sigma) {
  HyperParams hp;
  hp.kernel = KernelKind::rbf;
  hp.c = c;
  hp.sigma = sigma;
  return hp;
}

// Mean inner GM recomputed fold by fold from the public building blocks.
double oracle_inner_gm(const MultiViewDataset& data, Method method, const HyperParams& hp, int k, std::uint64_t seed) {
  const FoldPlan plan = stratified_folds(data, k, seed);
  double sum = 0.0;
  for (int f = 0; f < k; ++f) {
    std::vector<Index> train_idx;
    std::vector<Index> test_idx;
    for (Index i = 0; i < data.size(); ++i) {
      if (plan.assignments[static_cast<std::size_t>(i)] == f)
        test_idx.push_back(i);
      else if (data.is_target(i))
        train_idx.push_back(i);
    }
    const MultiViewDataset test = data.subset(test_idx);
    const OccModel m = fit_occ(method, data.subset(train_idx), hp);
    const std::vector<bool> pred = m.predict(test);
    long tp = 0, fn = 0, fp = 0, tn = 0;
    for (Index i = 0; i < test.size(); ++i) {
      const bool acc = pred[static_cast<std::size_t>(i)];
      if (test.is_target(i)) (acc ? tp : fn)++;
      else (acc ? fp : tn)++;
    }
    const double sen = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double spe = static_cast<double>(tn) / static_cast<double>(fp + tn);
    sum += 100.0 * std::sqrt(sen * spe);
  }
  return sum / k;
}

} // namespace

TEST_SUITE("metrics") {
  TEST_CASE("linear SVDD reference counts") {
    const MetricsReport m = compute_metrics(counts(76, 12, 28, 14));
    CHECK(round2(m.sen) == doctest::Approx(86.36));
    CHECK(round2(m.spe) == doctest::Approx(33.33));
    CHECK(round2(m.pre) == doctest::Approx(73.08));
    CHECK(round2(m.f1) == doctest::Approx(79.17));
    CHECK(round2(m.acc) == doctest::Approx(69.23));
    CHECK(round2(m.gm) == doctest::Approx(53.65));
  }

  TEST_CASE("MS-SVDD ds4 reference counts") {
    const MetricsReport m = compute_metrics(counts(75, 13, 24, 18));
    CHECK(round2(m.sen) == doctest::Approx(85.23));
    CHECK(round2(m.spe) == doctest::Approx(42.86));
    CHECK(round2(m.pre) == doctest::Approx(75.76));
    CHECK(round2(m.f1) == doctest::Approx(80.21));
    CHECK(round2(m.acc) == doctest::Approx(71.54));
    CHECK(round2(m.gm) == doctest::Approx(60.44));
  }

  TEST_CASE("degenerate denominators") {
    const MetricsReport none = compute_metrics(counts(0, 5, 0, 5));
    CHECK(none.undefined_precision);
    CHECK(none.undefined_f1);
    CHECK(none.gm == 0.0);
    CHECK(none.spe == doctest::Approx(100.0));
    CHECK_THROWS_AS((void)compute_metrics(counts(3, 1, 0, 0)), ParameterError);
    CHECK_THROWS_AS((void)compute_metrics(counts(0, 0, 2, 2)), ParameterError);
    CHECK_THROWS_AS((void)compute_metrics(counts(-1, 1, 1, 1)), ParameterError);
  }

  TEST_CASE("perfect classifier") {
    const MetricsReport m = compute_metrics(counts(10, 0, 0, 4));
    for (double v : {m.sen, m.spe, m.pre, m.f1, m.acc, m.gm}) CHECK(v == doctest::Approx(100.0));
  }

  TEST_CASE("macro average is the unweighted mean") {
    const std::vector<MetricsReport> r{compute_metrics(counts(76, 12, 28, 14)), compute_metrics(counts(75, 13, 24, 18))};
    const MetricsReport m = macro_average(r);
    CHECK(m.gm == doctest::Approx((r[0].gm + r[1].gm) / 2.0));
    CHECK(m.f1 == doctest::Approx((r[0].f1 + r[1].f1) / 2.0));
  }

  TEST_CASE("tally counts against the target class") {
    const MultiViewDataset ds = testing::labeled(3, 2);
    const ConfusionMatrix cm = tally(ds, {true, false, true, true, false});
    CHECK(cm == ConfusionMatrix{2, 1, 1, 1, "P"});
    CHECK_THROWS((void)tally(ds, {true}));
  }

  TEST_CASE("report table renders two decimals") {
    ReportRow row{"SVDD", "MI", "linear", "-", compute_metrics(counts(76, 12, 28, 14))};
    const std::string t = render_table(std::span<const ReportRow>(&row, 1));
    CHECK(t.find("86.36") != std::string::npos);
    CHECK(t.find("53.65") != std::string::npos);
    CHECK(t.find("GM") != std::string::npos);
    CHECK(std::count(t.begin(), t.end(), '\n') == 2);
    const std::string header = render_table({});
    CHECK(std::count(header.begin(), header.end(), '\n') == 1);
  }
}

TEST_SUITE("grids") {
  TEST_CASE("default grid sizes") {
    auto size = [](Method m, KernelKind k) { return grid_expand(m, k, default_grid(m, k)).size(); };
    CHECK(size(Method::svdd, KernelKind::linear) == 8);
    CHECK(size(Method::svdd, KernelKind::rbf) == 48);
    CHECK(size(Method::ocsvm, KernelKind::rbf) == 48);
    CHECK(size(Method::s_svdd, KernelKind::linear) == 5u * 9 * 8 * 11 * 4);
    CHECK(size(Method::es_svdd, KernelKind::rbf) == 5u * 9 * 8 * 6 * 11 * 4);
    CHECK(size(Method::ms_svdd, KernelKind::linear) == 5u * 9 * 8 * 5 * 7 * 4);
  }

  TEST_CASE("expansion is in canonical order and complete") {
    GridSpec g;
    g.eta = {0.1, 0.01};
    g.beta = {1.0};
    g.c = {0.5, 0.1};
    g.d = {2, 1};
    g.reg = {0, 3};
    g.ds = {4, 1};
    const auto grid = grid_expand(Method::ms_svdd, KernelKind::linear, g);
    CHECK(grid.size() == 32);
    CHECK(std::is_sorted(grid.begin(), grid.end(), canonical_less));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(!same_point(grid[i - 1], grid[i]));
    CHECK(grid.front().eta == 0.01);
    CHECK(grid.front().ds == 1);
  }

  TEST_CASE("empty relevant axes and populated irrelevant axes are rejected") {
    GridSpec g = default_grid(Method::s_svdd, KernelKind::linear);
    g.beta.clear();
    CHECK_THROWS_AS((void)grid_expand(Method::s_svdd, KernelKind::linear, g), ConfigError);
    GridSpec h = default_grid(Method::svdd, KernelKind::linear);
    h.sigma = {1.0};
    CHECK_THROWS_AS((void)grid_expand(Method::svdd, KernelKind::linear, h), ConfigError);
    GridSpec e;
    CHECK_THROWS_AS((void)grid_expand(Method::svdd, KernelKind::linear, e), ConfigError);
  }
}

TEST_SUITE("model selection") {
  TEST_CASE("two-point dominance fixture selects the separating point") {
    const MultiViewDataset data = dominance_fixture();
    const std::vector<HyperParams> grid{rbf_point(0.1, 1e-3), rbf_point(0.1, 1.0)};
    const double bad = oracle_inner_gm(data, Method::svdd, grid[0], 5, 11);
    const double good = oracle_inner_gm(data, Method::svdd, grid[1], 5, 11);
    REQUIRE(good > bad);

    const SelectionResult sel = select_by_inner_cv(data, Method::svdd, grid, 5, 11, {});
    CHECK(sel.best == 1);
    CHECK(sel.scores[0].mean_gm == doctest::Approx(bad).epsilon(1e-12));
    CHECK(sel.scores[1].mean_gm == doctest::Approx(good).epsilon(1e-12));

    const std::vector<HyperParams> reversed{grid[1], grid[0]};
    const SelectionResult rev = select_by_inner_cv(data, Method::svdd, reversed, 5, 11, {});
    CHECK(rev.best == 0);
    CHECK(same_point(reversed[rev.best], grid[sel.best]));
  }

  TEST_CASE("selection is the first maximum of the oracle scores") {
    const MultiViewDataset data = gen_two_view({40, 15, {3, 3}, 2.5, 5});
    const MultiViewDataset flat = concatenate_views(data);
    GridSpec g;
    g.c = {0.05, 0.1, 0.3, 0.6};
    g.sigma = {0.5, 2.0, 8.0};
    const auto grid = grid_expand(Method::svdd, KernelKind::rbf, g);
    const SelectionResult sel = select_by_inner_cv(flat, Method::svdd, grid, 5, 3, {});
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double o = oracle_inner_gm(flat, Method::svdd, grid[i], 5, 3);
      CHECK(sel.scores[i].mean_gm == doctest::Approx(o).epsilon(1e-12));
      if (o > best) {
        best = o;
        arg = i;
      }
    }
    CHECK(sel.best == arg);
  }

  TEST_CASE("infeasible points are skipped with a warning") {
    const MultiViewDataset data = dominance_fixture();
    std::vector<HyperParams> grid{rbf_point(0.001, 1.0), rbf_point(0.2, 1.0)};
    const SelectionResult sel = select_by_inner_cv(data, Method::svdd, grid, 5, 1, {});
    CHECK_FALSE(sel.scores[0].valid);
    CHECK(sel.scores[1].valid);
    CHECK(sel.best == 1);
    CHECK(!sel.warnings.empty());
    CHECK_THROWS_AS((void)select_by_inner_cv(data, Method::svdd, {}, 5, 1, {}), ConfigError);
  }

  TEST_CASE("thread count does not change scores") {
    const MultiViewDataset data = dominance_fixture();
    GridSpec g;
    g.c = {0.05, 0.2};
    g.sigma = {0.5, 1.0, 4.0};
    const auto grid = grid_expand(Method::svdd, KernelKind::rbf, g);
    const SelectionResult a = select_by_inner_cv(data, Method::svdd, grid, 5, 2, {}, 1);
    const SelectionResult b = select_by_inner_cv(data, Method::svdd, grid, 5, 2, {}, 3);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a.scores[i].mean_gm == b.scores[i].mean_gm);
  }
}

TEST_SUITE("cross validation") {
  TEST_CASE("pooled counts cover every sample once") {
    const MultiViewDataset data = gen_two_view({44, 21, {3, 2}, 4.0, 8});
    GridSpec g;
    g.c = {0.1, 0.5};
    const auto grid = grid_expand(Method::svdd, KernelKind::linear, g);
    CvOptions opts;
    opts.k_inner = 4;
    opts.seed = 12;
    const CvResult r = cross_validate(concatenate_views(data), Method::svdd, grid, opts);
    CHECK(r.pooled.positives() == 44);
    CHECK(r.pooled.negatives() == 21);
    ConfusionMatrix sum;
    for (const auto& f : r.folds) sum += f.confusion;
    CHECK(sum.tp == r.pooled.tp);
    CHECK(sum.tn == r.pooled.tn);
    CHECK(r.folds.size() == 5);
    const MetricsReport pooled = compute_metrics(r.pooled);
    CHECK(pooled.gm == r.pooled_metrics.gm);
  }

  TEST_CASE("cross validation on the MI class counts") {
    Rng rng(3);
    std::vector<std::string> labels;
    std::vector<std::string> ids;
    for (int i = 0; i < 130; ++i) {
      labels.emplace_back(i < 88 ? "MI" : "nonMI");
      ids.push_back("p" + std::to_string(i));
    }
    MatrixXd x = testing::gaussian(3, 130, rng);
    x.rightCols(42).array() += 3.0;
    const MultiViewDataset data({{1, x}}, labels, ids, "MI");
    GridSpec g;
    g.c = {0.1};
    CvOptions opts;
    opts.k_inner = 3;
    for (const std::string target : {"MI", "nonMI"}) {
      const CvResult r = cross_validate(data.with_target(target), Method::svdd, grid_expand(Method::svdd, KernelKind::linear, g), opts);
      CHECK(r.pooled.positives() == (target == "MI" ? 88 : 42));
      CHECK(r.pooled.negatives() == (target == "MI" ? 42 : 88));
    }
  }

  TEST_CASE("multi-modal runs need two views") {
    const MultiViewDataset one = testing::labeled(20, 10);
    const auto grid = grid_expand(Method::ms_svdd, KernelKind::linear, {{0.01}, {0.1}, {0.1}, {}, {1}, {0}, {1}});
    CHECK_THROWS_WITH_AS((void)cross_validate(one, Method::ms_svdd, grid, {}), doctest::Contains("requires ≥2 views"), ConfigError);
  }

  TEST_CASE("same seed, same result") {
    const MultiViewDataset data = gen_two_view({30, 12, {2, 2}, 3.0, 4});
    const auto grid = grid_expand(Method::ms_svdd, KernelKind::linear, {{0.01}, {0.01}, {0.2}, {}, {1}, {0, 1}, {1, 3}});
    CvOptions opts;
    opts.k_inner = 3;
    opts.seed = 77;
    const CvResult a = cross_validate(data, Method::ms_svdd, grid, opts);
    opts.jobs = 2;
    const CvResult b = cross_validate(data, Method::ms_svdd, grid, opts);
    CHECK(a.pooled == b.pooled);
    CHECK(a.outer_plan.assignments == b.outer_plan.assignments);
    for (std::size_t f = 0; f < a.folds.size(); ++f) CHECK(a.folds[f].chosen_index == b.folds[f].chosen_index);
  }
}
