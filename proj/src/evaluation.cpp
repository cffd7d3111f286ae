#include "mvocc/evaluation.hpp"

#include "mvocc/error.hpp"
#include "mvocc/prng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace mvocc {

ConfusionMatrix tally(const MultiViewDataset& truth, const std::vector<bool>& predicted) {
  if (predicted.size() != static_cast<std::size_t>(truth.size()))
    throw ShapeError("prediction count does not match sample count");
  ConfusionMatrix cm;
  cm.positive_class = truth.target_class();
  for (Index i = 0; i < truth.size(); ++i) {
    const bool pos = truth.is_target(i);
    const bool acc = predicted[static_cast<std::size_t>(i)];
    if (pos && acc) ++cm.tp;
    else if (pos) ++cm.fn;
    else if (acc) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fn < 0 || cm.fp < 0 || cm.tn < 0) throw ParameterError("confusion counts must be non-negative");
  if (cm.positives() == 0 || cm.negatives() == 0)
    throw ParameterError("metrics need at least one positive and one negative ground-truth sample");
  const auto tp = static_cast<double>(cm.tp);
  const auto tn = static_cast<double>(cm.tn);
  MetricsReport r;
  const double sen = tp / static_cast<double>(cm.positives());
  const double spe = tn / static_cast<double>(cm.negatives());
  double pre = 0.0;
  if (cm.tp + cm.fp == 0) r.undefined_precision = true;
  else pre = tp / static_cast<double>(cm.tp + cm.fp);
  double f1 = 0.0;
  if (r.undefined_precision || pre + sen == 0.0) r.undefined_f1 = true;
  else f1 = 2.0 * pre * sen / (pre + sen);
  r.sen = 100.0 * sen;
  r.spe = 100.0 * spe;
  r.pre = 100.0 * pre;
  r.f1 = 100.0 * f1;
  r.acc = 100.0 * (tp + tn) / static_cast<double>(cm.total());
  r.gm = 100.0 * std::sqrt(sen * spe);
  return r;
}

MetricsReport macro_average(std::span<const MetricsReport> reports) {
  MetricsReport out;
  if (reports.empty()) return out;
  for (const auto& r : reports) {
    out.sen += r.sen;
    out.spe += r.spe;
    out.pre += r.pre;
    out.f1 += r.f1;
    out.acc += r.acc;
    out.gm += r.gm;
    out.undefined_precision = out.undefined_precision || r.undefined_precision;
    out.undefined_f1 = out.undefined_f1 || r.undefined_f1;
  }
  const auto n = static_cast<double>(reports.size());
  out.sen /= n;
  out.spe /= n;
  out.pre /= n;
  out.f1 /= n;
  out.acc /= n;
  out.gm /= n;
  return out;
}

GridSpec default_grid(Method method, KernelKind kernel) {
  GridSpec g;
  g.c = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  if (kernel == KernelKind::rbf) g.sigma = {1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3};
  if (is_subspace(method)) {
    g.eta = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    g.beta = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4};
    const int d_max = is_multimodal(method) ? 5 : 11;
    for (int d = 1; d <= d_max; ++d) g.d.push_back(d);
    const int r_max = is_multimodal(method) ? 6 : 3;
    for (int r = 0; r <= r_max; ++r) g.reg.push_back(r);
  }
  if (is_multimodal(method)) g.ds = {1, 2, 3, 4};
  return g;
}

std::vector<std::string> relevant_axes(Method method, KernelKind kernel) {
  std::vector<std::string> axes;
  if (is_subspace(method)) axes.insert(axes.end(), {"eta", "beta"});
  axes.emplace_back("c");
  if (kernel == KernelKind::rbf) axes.emplace_back("sigma");
  if (is_subspace(method)) axes.insert(axes.end(), {"d", "reg"});
  if (is_multimodal(method)) axes.emplace_back("ds");
  return axes;
}

std::vector<HyperParams> grid_expand(Method method, KernelKind kernel, const GridSpec& grid, int max_iters) {
  const auto axes = relevant_axes(method, kernel);
  auto uses = [&](const char* name) { return std::find(axes.begin(), axes.end(), name) != axes.end(); };
  auto check = [&](const char* name, bool empty) {
    if (uses(name) && empty)
      throw ConfigError(std::string("grid axis '") + name + "' is required by " + to_string(method) + " but empty");
    if (!uses(name) && !empty)
      throw ConfigError(std::string("grid axis '") + name + "' is not used by " + to_string(method) + " with the " +
                        to_string(kernel) + " kernel");
  };
  check("eta", grid.eta.empty());
  check("beta", grid.beta.empty());
  check("c", grid.c.empty());
  check("sigma", grid.sigma.empty());
  check("d", grid.d.empty());
  check("reg", grid.reg.empty());
  check("ds", grid.ds.empty());
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");

  for (double v : grid.eta) {
    if (!(v >= 0.0)) throw ConfigError("eta values must be non-negative");
  }
  for (double v : grid.beta) {
    if (!(v >= 0.0)) throw ConfigError("beta values must be non-negative");
  }
  for (double v : grid.c) {
    if (!(v > 0.0)) throw ConfigError("C values must be positive");
  }
  for (double v : grid.sigma) {
    if (!(v > 0.0)) throw ConfigError("sigma values must be positive");
  }
  for (int v : grid.d) {
    if (v < 1) throw ConfigError("d values must be at least 1");
  }
  const int r_max = is_multimodal(method) ? 6 : 3;
  for (int v : grid.reg) {
    if (v < 0 || v > r_max) throw ConfigError("reg index " + std::to_string(v) + " outside 0-" + std::to_string(r_max));
  }
  for (int v : grid.ds) {
    if (v < 1 || v > 4) throw ConfigError("ds values must be 1-4");
  }

  auto or_one = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  auto or_one_i = [](const std::vector<int>& v, int fallback) { return v.empty() ? std::vector<int>{fallback} : v; };
  auto sorted = [](auto v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto etas = sorted(or_one(grid.eta, 0.0));
  const auto betas = sorted(or_one(grid.beta, 0.0));
  const auto cs = sorted(grid.c);
  const auto sigmas = sorted(or_one(grid.sigma, 1.0));
  const auto ds_ = sorted(or_one_i(grid.d, 1));
  const auto regs = sorted(or_one_i(grid.reg, 0));
  const auto strategies = sorted(or_one_i(grid.ds, 1));

  std::vector<HyperParams> out;
  for (double eta : etas)
    for (double beta : betas)
      for (double c : cs)
        for (double sigma : sigmas)
          for (int d : ds_)
            for (int reg : regs)
              for (int s : strategies) {
                HyperParams hp;
                hp.eta = eta;
                hp.beta = beta;
                hp.c = c;
                hp.sigma = sigma;
                hp.d = d;
                hp.reg = reg;
                hp.ds = s;
                hp.kernel = kernel;
                hp.max_iters = max_iters;
                out.push_back(hp);
              }
  return out;
}

std::vector<HyperParams> canonical_order(std::span<const HyperParams> grid) {
  std::vector<HyperParams> out(grid.begin(), grid.end());
  std::stable_sort(out.begin(), out.end(), canonical_less);
  return out;
}

std::uint64_t inner_seed(std::uint64_t seed, int fold) noexcept {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(fold) + 1));
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::string describe(const HyperParams& hp, Method method) {
  std::ostringstream os;
  os << "C=" << hp.c;
  if (hp.kernel == KernelKind::rbf) os << " sigma=" << hp.sigma;
  if (is_subspace(method)) os << " eta=" << hp.eta << " beta=" << hp.beta << " d=" << hp.d << " r=" << hp.reg;
  if (is_multimodal(method)) os << " ds=" << hp.ds;
  return os.str();
}

// Grid points that differ only in decision strategy share one trained model.
struct TrainGroup {
  HyperParams train_hp;
  std::vector<std::size_t> members;
};

std::vector<TrainGroup> group_for_training(Method method, std::span<const HyperParams> grid) {
  std::vector<TrainGroup> groups;
  std::map<HyperParams, std::size_t, bool (*)(const HyperParams&, const HyperParams&) noexcept> index(canonical_less);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    HyperParams key = grid[i];
    if (is_multimodal(method)) key.ds = 1;
    const auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.push_back({key, {i}});
    else groups[it->second].members.push_back(i);
  }
  return groups;
}

} // namespace

SelectionResult select_by_inner_cv(const MultiViewDataset& data, Method method, std::span<const HyperParams> grid,
                                   int k, std::uint64_t seed, const FitOptions& fit, int jobs) {
  if (grid.empty()) throw ConfigError("hyperparameter grid is empty");
  SelectionResult result;
  result.scores.assign(grid.size(), {});

  const FoldPlan plan = stratified_folds(data, k, seed);
  std::vector<std::pair<MultiViewDataset, MultiViewDataset>> splits;
  for (int f = 0; f < k; ++f) splits.push_back(split_target_only(data, plan, f));

  const auto groups = group_for_training(method, grid);
  const std::size_t tasks = groups.size() * static_cast<std::size_t>(k);
  // gm[point][fold]; NaN marks a point that could not be trained on that fold
  std::vector<std::vector<double>> gm(grid.size(), std::vector<double>(static_cast<std::size_t>(k), 0.0));
  std::vector<std::string> task_warning(tasks);
  auto skip = [&](std::size_t t, const TrainGroup& group, const Error& e) {
    for (const std::size_t member : group.members) gm[member][t % static_cast<std::size_t>(k)] = std::nan("");
    task_warning[t] = "grid point skipped (" + describe(group.train_hp, method) + "): " + e.what();
  };

  parallel_for(tasks, jobs, [&](std::size_t t) {
    const auto& group = groups[t / static_cast<std::size_t>(k)];
    const auto fold = t % static_cast<std::size_t>(k);
    const auto& [train, test] = splits[fold];
    try {
      const OccModel model = fit_occ(method, train, group.train_hp, fit);
      for (const std::size_t member : group.members) {
        const int ds = is_multimodal(method) ? grid[member].ds : 0;
        const ConfusionMatrix cm = tally(test, model.predict(test, ds));
        gm[member][fold] = compute_metrics(cm).gm;
      }
    } catch (const InfeasibleError& e) {
      skip(t, group, e);
    } catch (const DivergenceError& e) {
      skip(t, group, e);
    } catch (const DegenerateKernelError& e) {
      skip(t, group, e);
    } catch (const ParameterError& e) {
      skip(t, group, e);
    }
  });

  std::set<std::string> seen;
  for (auto& w : task_warning) {
    if (!w.empty() && seen.insert(w).second) result.warnings.push_back(std::move(w));
  }

  bool any = false;
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& row = gm[i];
    const bool valid = std::none_of(row.begin(), row.end(), [](double g) { return std::isnan(g); });
    result.scores[i].valid = valid;
    if (!valid) continue;
    result.scores[i].mean_gm = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(k);
    if (!any || result.scores[i].mean_gm > best) {
      best = result.scores[i].mean_gm;
      result.best = i;
      any = true;
    }
  }
  if (!any) throw ProtocolError("no grid point could be trained on every inner fold");
  return result;
}

CvResult cross_validate(const MultiViewDataset& ds, Method method, std::span<const HyperParams> grid,
                        const CvOptions& options) {
  if (grid.empty()) throw ConfigError("hyperparameter grid is empty");
  if (is_multimodal(method) && ds.view_count() < 2) throw ConfigError("ms_svdd requires ≥2 views");

  CvResult result;
  result.method = method;
  result.kernel = grid.front().kernel;
  result.target = ds.target_class();
  result.grid = canonical_order(grid);
  result.outer_plan = stratified_folds(ds, options.k_outer, options.seed);
  result.pooled.positive_class = ds.target_class();

  std::set<std::string> seen;
  std::vector<MetricsReport> per_fold;
  for (int fold = 0; fold < options.k_outer; ++fold) {
    std::vector<Index> outer_train_idx;
    std::vector<Index> test_idx;
    for (Index i = 0; i < ds.size(); ++i) {
      (result.outer_plan.assignments[static_cast<std::size_t>(i)] == fold ? test_idx : outer_train_idx).push_back(i);
    }
    const MultiViewDataset outer_train = ds.subset(outer_train_idx);
    const MultiViewDataset test = ds.subset(test_idx);

    FoldResult fr;
    fr.fold = fold;
    if (result.grid.size() == 1) {
      fr.chosen_index = 0;
    } else {
      SelectionResult sel = select_by_inner_cv(outer_train, method, result.grid, options.k_inner,
                                               inner_seed(options.seed, fold), options.fit, options.jobs);
      fr.chosen_index = sel.best;
      fr.inner_gm = sel.scores[sel.best].mean_gm;
      for (auto& w : sel.warnings) {
        if (seen.insert(w).second) result.warnings.push_back(std::move(w));
      }
    }
    fr.chosen = result.grid[fr.chosen_index];

    const OccModel model = fit_occ(method, outer_train, fr.chosen, options.fit);
    fr.confusion = tally(test, model.predict(test, 0));
    fr.metrics_defined = fr.confusion.positives() > 0 && fr.confusion.negatives() > 0;
    if (fr.metrics_defined) {
      fr.metrics = compute_metrics(fr.confusion);
      per_fold.push_back(fr.metrics);
    }
    result.pooled += fr.confusion;
    result.folds.push_back(std::move(fr));
  }
  result.pooled_metrics = compute_metrics(result.pooled);
  result.macro_metrics = macro_average(per_fold);
  return result;
}

} // namespace mvocc
