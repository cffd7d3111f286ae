#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mvocc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One modality of a dataset: a D_v x N feature matrix whose columns are samples.
struct ModalityView {
  int modality_id = 1;
  MatrixXd features;

  [[nodiscard]] Index feature_dim() const noexcept { return features.rows(); }
  [[nodiscard]] Index sample_count() const noexcept { return features.cols(); }
};

/// Labeled multi-view samples with a designated target (positive) class.
///
/// Immutable after construction. All views share the same column order; column i
/// of every view belongs to subject_ids()[i]. The class list holds one or two
/// distinct names and survives subsetting, so a target-only training split still
/// knows what the negative class is called.
class MultiViewDataset {
public:
  MultiViewDataset(std::vector<ModalityView> views, std::vector<std::string> labels,
                   std::vector<std::string> subject_ids, std::string target_class,
                   std::vector<std::string> classes = {});

  [[nodiscard]] const std::vector<ModalityView>& views() const noexcept { return views_; }
  [[nodiscard]] const ModalityView& view(std::size_t v) const { return views_.at(v); }
  [[nodiscard]] std::size_t view_count() const noexcept { return views_.size(); }
  [[nodiscard]] Index size() const noexcept { return static_cast<Index>(labels_.size()); }

  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
  [[nodiscard]] const std::vector<std::string>& subject_ids() const noexcept { return subject_ids_; }
  [[nodiscard]] const std::string& target_class() const noexcept { return target_; }
  /// Sorted distinct class names (one or two entries).
  [[nodiscard]] const std::vector<std::string>& classes() const noexcept { return classes_; }
  [[nodiscard]] std::optional<std::string> negative_class() const;

  [[nodiscard]] bool is_target(Index i) const { return labels_.at(static_cast<std::size_t>(i)) == target_; }
  [[nodiscard]] Index target_count() const;

  /// Columns picked by `indices`, in that order.
  [[nodiscard]] MultiViewDataset subset(std::span<const Index> indices) const;
  /// Same samples with a different target class (must be one of classes()).
  [[nodiscard]] MultiViewDataset with_target(const std::string& target) const;
  /// Same labels and ids, replaced feature views.
  [[nodiscard]] MultiViewDataset with_views(std::vector<ModalityView> views) const;

private:
  std::vector<ModalityView> views_;
  std::vector<std::string> labels_;
  std::vector<std::string> subject_ids_;
  std::string target_;
  std::vector<std::string> classes_;
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
  std::uint64_t seed = 0;

  [[nodiscard]] std::vector<Index> members(int fold) const;
};

struct CsvOptions {
  std::string label_column = "label";
  std::string id_column = "subject_id";
};

/// Reads one CSV per modality and aligns rows by subject id, in the row order of
/// the first file. Every column other than the id and label columns is a feature.
MultiViewDataset load_multiview_csv(std::span<const std::filesystem::path> paths,
                                    const std::string& target, const CsvOptions& options = {});

/// Writes view v to paths[v] with columns subject_id, label, f1..fD.
void write_multiview_csv(const MultiViewDataset& ds, std::span<const std::filesystem::path> paths,
                         const CsvOptions& options = {});

/// Stacks all modality blocks, in modality order, into a single view.
MultiViewDataset concatenate_views(const MultiViewDataset& ds);

/// Stratified assignment of samples to k folds.
///
/// Samples of each class (classes in sorted order) are shuffled with
/// Rng(seed), then the concatenated shuffled lists are dealt round-robin over
/// folds 0, 1, 2, ... continuing across class boundaries. Per-class fold counts
/// therefore differ by at most one, and overall fold sizes do too.
FoldPlan stratified_folds(const MultiViewDataset& ds, int k, std::uint64_t seed);

/// Training split holds only target-class samples outside `test_fold`; the test
/// split holds every sample inside it.
std::pair<MultiViewDataset, MultiViewDataset> split_target_only(const MultiViewDataset& ds,
                                                                const FoldPlan& plan, int test_fold);

/// Per-feature standardization fitted on one dataset, applied to others.
struct Standardizer {
  std::vector<VectorXd> mean;
  std::vector<VectorXd> scale;

  static Standardizer fit(const MultiViewDataset& ds);
  [[nodiscard]] MultiViewDataset apply(const MultiViewDataset& ds) const;
};

} // namespace mvocc
