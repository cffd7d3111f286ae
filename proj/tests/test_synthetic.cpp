#include "test_support.hpp"

#include "mvocc/error.hpp"
#include "mvocc/evaluation.hpp"
#include "mvocc/synthetic.hpp"

#include <doctest.h>

using namespace mvocc;

namespace {

// Outliers whose norm in view v does not exceed the largest target norm there.
Index hidden_in_view(const MultiViewDataset& ds, std::size_t v) {
  const MatrixXd& f = ds.view(v).features;
  double reach = 0.0;
  for (Index j = 0; j < ds.size(); ++j)
    if (ds.is_target(j)) reach = std::max(reach, f.col(j).norm());
  Index hidden = 0;
  for (Index j = 0; j < ds.size(); ++j)
    if (!ds.is_target(j) && f.col(j).norm() <= reach) ++hidden;
  return hidden;
}

double svdd_cv_gm(const MultiViewDataset& ds) {
  GridSpec g;
  g.c = {0.05, 0.1, 0.2, 0.5};
  CvOptions opts;
  opts.k_inner = 5;
  opts.seed = 1;
  return cross_validate(concatenate_views(ds), Method::svdd, grid_expand(Method::svdd, KernelKind::linear, g), opts)
      .pooled_metrics.gm;
}

} // namespace

TEST_SUITE("synthetic") {
  TEST_CASE("shape contract") {
    const MultiViewDataset ds = gen_two_view({60, 20, {6, 6}, 6.0, 7});
    CHECK(ds.size() == 80);
    CHECK(ds.view_count() == 2);
    CHECK(ds.view(0).feature_dim() == 6);
    CHECK(ds.target_count() == 60);
    CHECK(ds.target_class() == "target");
    CHECK(ds.negative_class() == std::optional<std::string>("outlier"));
    CHECK(ds.subject_ids().front() == "s01");
  }

  TEST_CASE("same seed gives identical data, another seed does not") {
    const SynthSpec spec{30, 10, {3, 5}, 4.0, 11};
    const MultiViewDataset a = gen_two_view(spec);
    const MultiViewDataset b = gen_two_view(spec);
    for (std::size_t v = 0; v < 2; ++v) CHECK(a.view(v).features == b.view(v).features);
    SynthSpec other = spec;
    other.seed = 12;
    CHECK(gen_two_view(other).view(0).features != a.view(0).features);
  }

  TEST_CASE("each view hides some outliers, the views together hide none") {
    const MultiViewDataset ds = gen_two_view({60, 20, {6, 6}, 6.0, 7});
    for (std::size_t v = 0; v < 2; ++v) CHECK(hidden_in_view(ds, v) >= 2); // at least 10% of 20
    // an outlier is exposed when some view places it beyond every target
    std::vector<double> reach(2, 0.0);
    for (std::size_t v = 0; v < 2; ++v)
      for (Index j = 0; j < 60; ++j) reach[v] = std::max(reach[v], ds.view(v).features.col(j).norm());
    for (Index j = 60; j < 80; ++j) {
      bool exposed = false;
      for (std::size_t v = 0; v < 2; ++v) exposed = exposed || ds.view(v).features.col(j).norm() > reach[v];
      CHECK(exposed);
    }
  }

  TEST_CASE("single view and three views") {
    CHECK(gen_two_view({5, 3, {2}, 3.0, 1}).view_count() == 1);
    const MultiViewDataset three = gen_two_view({20, 12, {2, 3, 4}, 6.0, 2});
    CHECK(three.view_count() == 3);
    CHECK(three.view(2).feature_dim() == 4);
  }

  TEST_CASE("invalid specifications") {
    CHECK_THROWS_AS((void)gen_two_view({0, 3, {2, 2}, 3.0, 1}), ParameterError);
    CHECK_THROWS_AS((void)gen_two_view({3, 0, {2, 2}, 3.0, 1}), ParameterError);
    CHECK_THROWS_AS((void)gen_two_view({3, 3, {}, 3.0, 1}), ParameterError);
    CHECK_THROWS_AS((void)gen_two_view({3, 3, {2, 0}, 3.0, 1}), ParameterError);
    CHECK_THROWS_AS((void)gen_two_view({3, 3, {2, 2}, -1.0, 1}), ParameterError);
  }

  TEST_CASE("separated data is learnable, overlapping data is not") {
    CHECK(svdd_cv_gm(gen_two_view({60, 20, {6, 6}, 6.0, 7})) >= 90.0);
    CHECK(svdd_cv_gm(gen_two_view({60, 20, {6, 6}, 1e-6, 7})) < 70.0);
  }
}
