#pragma once

#include "mvocc/evaluation.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace mvocc {

using Json = nlohmann::ordered_json;

/// Identifies the regularizer formulas in result documents.
inline constexpr const char* kRegularizationCatalog =
    "reg-catalog/1: selectors 1=ones 2=alpha-on-SVs 3=alpha; omega4-6 coupled across modalities; "
    "kernelized subspace methods use NPT embeddings";

/// One line of a results table.
struct ReportRow {
  std::string method; ///< e.g. "SVDD", "MS-SVDD_ds4"
  std::string target;
  std::string kernel;
  std::string reg;    ///< most frequently chosen regularizer, "-" when not applicable
  MetricsReport metrics;
};

ReportRow report_row(const CvResult& result);

/// Fixed-width table, metrics to two decimals. Header only for no rows.
std::string render_table(std::span<const ReportRow> rows);

Json to_json(const HyperParams& hp, Method method);
HyperParams hyperparams_from_json(const Json& j);
Json to_json(const ConfusionMatrix& cm);
Json to_json(const MetricsReport& m);

/// Structured results: run metadata, embedded configuration, per-fold choices
/// and confusion counts, pooled and per-fold metrics.
Json results_document(const CvResult& result, const Json& config);

/// Outer fold plan with subject ids.
Json folds_document(const CvResult& result, const MultiViewDataset& ds);

} // namespace mvocc
