#include "mvocc/report.hpp"

#include "mvocc/error.hpp"

#include <cstdio>
#include <map>

namespace mvocc {

namespace {

template <class T> T mode_of(const std::vector<T>& values) {
  std::map<T, int> counts;
  for (const auto& v : values) ++counts[v];
  T best{};
  int best_count = -1;
  for (const auto& [v, c] : counts) { // ascending key, first max wins
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

} // namespace

ReportRow report_row(const CvResult& result) {
  ReportRow row;
  row.method = display_name(result.method);
  row.target = result.target;
  row.kernel = to_string(result.kernel);
  row.metrics = result.pooled_metrics;
  row.reg = "-";
  if (result.folds.empty()) return row;
  if (is_subspace(result.method)) {
    std::vector<int> regs;
    std::vector<int> strategies;
    for (const auto& f : result.folds) {
      regs.push_back(f.chosen.reg);
      strategies.push_back(f.chosen.ds);
    }
    row.reg = result.folds.front().chosen.regularization(result.method).label();
    RegularizationSpec spec = result.folds.front().chosen.regularization(result.method);
    spec.index = mode_of(regs);
    row.reg = spec.label();
    if (is_multimodal(result.method)) row.method += "_ds" + std::to_string(mode_of(strategies));
  }
  return row;
}

std::string render_table(std::span<const ReportRow> rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %-10s %-7s %-8s %7s %7s %7s %7s %7s %7s\n", "method", "target", "kernel", "r",
                "Sen", "Spe", "Pre", "F1", "Acc", "GM");
  out += line;
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::snprintf(line, sizeof line, "%-14s %-10s %-7s %-8s %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f\n", r.method.c_str(),
                  r.target.c_str(), r.kernel.c_str(), r.reg.c_str(), m.sen, m.spe, m.pre, m.f1, m.acc, m.gm);
    out += line;
  }
  return out;
}

Json to_json(const HyperParams& hp, Method method) {
  Json j;
  j["kernel"] = to_string(hp.kernel);
  j["c"] = hp.c;
  if (hp.kernel == KernelKind::rbf) j["sigma"] = hp.sigma;
  if (is_subspace(method)) {
    j["eta"] = hp.eta;
    j["beta"] = hp.beta;
    j["d"] = hp.d;
    j["reg"] = hp.reg;
    j["reg_label"] = hp.regularization(method).label();
    j["max_iters"] = hp.max_iters;
  }
  if (is_multimodal(method)) j["ds"] = hp.ds;
  if (method == Method::ocsvm) j["nu_mapping"] = "nu = 1/(N*C) clamped to (0, 1]";
  return j;
}

HyperParams hyperparams_from_json(const Json& j) {
  HyperParams hp;
  hp.kernel = kernel_kind_from_string(j.at("kernel").get<std::string>());
  hp.c = j.at("c").get<double>();
  hp.sigma = j.value("sigma", 1.0);
  hp.eta = j.value("eta", 0.0);
  hp.beta = j.value("beta", 0.0);
  hp.d = j.value("d", 1);
  hp.reg = j.value("reg", 0);
  hp.ds = j.value("ds", 1);
  hp.max_iters = j.value("max_iters", 100);
  return hp;
}

Json to_json(const ConfusionMatrix& cm) {
  return Json{{"positive_class", cm.positive_class}, {"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

Json to_json(const MetricsReport& m) {
  Json j{{"sen", m.sen}, {"spe", m.spe}, {"pre", m.pre}, {"f1", m.f1}, {"acc", m.acc}, {"gm", m.gm}};
  if (m.undefined_precision) j["undefined_precision"] = true;
  if (m.undefined_f1) j["undefined_f1"] = true;
  return j;
}

Json results_document(const CvResult& result, const Json& config) {
  Json doc;
  doc["format"] = "mvocc-results/1";
  doc["method"] = to_string(result.method);
  doc["target"] = result.target;
  doc["kernel"] = to_string(result.kernel);
  doc["seed"] = result.outer_plan.seed;
  doc["outer_folds"] = result.outer_plan.k;
  doc["regularization_catalog"] = kRegularizationCatalog;
  doc["radius_rule"] = "R^2 averaged over unbounded support vectors";
  doc["aggregation"] = "pooled counts over outer test folds (primary); per-fold macro average also given";
  doc["config"] = config;
  doc["grid_size"] = result.grid.size();

  Json folds = Json::array();
  for (const auto& f : result.folds) {
    Json jf;
    jf["fold"] = f.fold;
    jf["chosen"] = to_json(f.chosen, result.method);
    jf["chosen_index"] = f.chosen_index;
    jf["inner_mean_gm"] = f.inner_gm;
    jf["confusion"] = to_json(f.confusion);
    if (f.metrics_defined) jf["metrics"] = to_json(f.metrics);
    folds.push_back(std::move(jf));
  }
  doc["folds"] = std::move(folds);
  doc["pooled"] = {{"confusion", to_json(result.pooled)}, {"metrics", to_json(result.pooled_metrics)}};
  doc["macro"] = to_json(result.macro_metrics);
  doc["warnings"] = result.warnings;
  const ReportRow row = report_row(result);
  doc["row"] = {{"method", row.method}, {"target", row.target}, {"kernel", row.kernel}, {"r", row.reg}};
  return doc;
}

Json folds_document(const CvResult& result, const MultiViewDataset& ds) {
  Json doc;
  doc["k"] = result.outer_plan.k;
  doc["seed"] = result.outer_plan.seed;
  doc["prng"] = "xorshift64* seeded by splitmix64; per-class Fisher-Yates, round-robin dealing";
  Json assignments = Json::object();
  for (Index i = 0; i < ds.size(); ++i)
    assignments[ds.subject_ids()[static_cast<std::size_t>(i)]] = result.outer_plan.assignments[static_cast<std::size_t>(i)];
  doc["assignments"] = std::move(assignments);
  return doc;
}

} // namespace mvocc
