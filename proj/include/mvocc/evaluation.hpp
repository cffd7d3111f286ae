#pragma once

#include "mvocc/dataset.hpp"
#include "mvocc/model.hpp"
#include "mvocc/params.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mvocc {

/// Binary confusion counts with the OCC target as the positive class.
struct ConfusionMatrix {
  long tp = 0;
  long fn = 0;
  long fp = 0;
  long tn = 0;
  std::string positive_class;

  [[nodiscard]] long total() const noexcept { return tp + fn + fp + tn; }
  [[nodiscard]] long positives() const noexcept { return tp + fn; }
  [[nodiscard]] long negatives() const noexcept { return fp + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
    tp += o.tp;
    fn += o.fn;
    fp += o.fp;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Counts predictions (true = accepted as target) against the labels of `truth`.
ConfusionMatrix tally(const MultiViewDataset& truth, const std::vector<bool>& predicted);

/// The six metrics, as percentages. A metric whose denominator is zero is
/// reported as 0 and flagged.
struct MetricsReport {
  double sen = 0.0;
  double spe = 0.0;
  double pre = 0.0;
  double f1 = 0.0;
  double acc = 0.0;
  double gm = 0.0;
  bool undefined_precision = false;
  bool undefined_f1 = false;
};

/// Requires at least one positive and one negative ground-truth sample.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// Unweighted mean of each metric.
MetricsReport macro_average(std::span<const MetricsReport> reports);

/// Values per hyperparameter axis. An empty axis means "not used by the method".
struct GridSpec {
  std::vector<double> eta;
  std::vector<double> beta;
  std::vector<double> c;
  std::vector<double> sigma;
  std::vector<int> d;
  std::vector<int> reg;
  std::vector<int> ds;
};

/// Default search grids. Subspace dimension d runs over 1-5 for the
/// multi-modal method and 1-11 for the uni-modal ones; reg covers psi0-psi3 or
/// omega0-omega6.
GridSpec default_grid(Method method, KernelKind kernel);

/// Names of the axes a method searches over.
std::vector<std::string> relevant_axes(Method method, KernelKind kernel);

/// Cartesian product of the relevant axes in canonical order
/// (eta, beta, C, sigma, d, r, ds ascending). Throws ConfigError when a
/// relevant axis is empty or an irrelevant one is populated.
std::vector<HyperParams> grid_expand(Method method, KernelKind kernel, const GridSpec& grid, int max_iters = 100);

/// Sorts a grid into canonical order (stable).
std::vector<HyperParams> canonical_order(std::span<const HyperParams> grid);

struct CvOptions {
  int k_outer = 5;
  int k_inner = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  FitOptions fit;
};

/// Seed of the inner fold plan used inside outer fold `fold`.
std::uint64_t inner_seed(std::uint64_t seed, int fold) noexcept;

struct GridScore {
  double mean_gm = 0.0;
  bool valid = false;
};

struct SelectionResult {
  std::size_t best = 0;
  std::vector<GridScore> scores;
  std::vector<std::string> warnings;
};

/// Scores every grid point by mean GM over a stratified k-fold split of `data`
/// (training on the target samples outside each fold, testing on the whole
/// fold) and returns the first point, in the given order, with the highest
/// score. Points that cannot be trained on some fold (C below 1/N, subspace
/// dimension above the available rank, divergence) are skipped with a warning.
SelectionResult select_by_inner_cv(const MultiViewDataset& data, Method method, std::span<const HyperParams> grid,
                                   int k, std::uint64_t seed, const FitOptions& fit, int jobs = 1);

struct FoldResult {
  int fold = 0;
  std::size_t chosen_index = 0;
  HyperParams chosen;
  double inner_gm = 0.0;
  ConfusionMatrix confusion;
  MetricsReport metrics;
  bool metrics_defined = true; ///< false when the test fold lacks one of the classes
};

struct CvResult {
  Method method = Method::svdd;
  KernelKind kernel = KernelKind::linear;
  std::string target;
  std::vector<HyperParams> grid; ///< canonical order
  FoldPlan outer_plan;
  std::vector<FoldResult> folds;
  ConfusionMatrix pooled;
  MetricsReport pooled_metrics;
  MetricsReport macro_metrics;
  std::vector<std::string> warnings;
};

/// Outer k-fold evaluation with an inner grid search on each outer training
/// portion. The selected point is refit on all outer-training targets and
/// scored on the outer test fold; confusion counts are pooled over folds.
CvResult cross_validate(const MultiViewDataset& ds, Method method, std::span<const HyperParams> grid,
                        const CvOptions& options);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

} // namespace mvocc
