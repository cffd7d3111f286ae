#pragma once

#include "mvocc/boundary.hpp"
#include "mvocc/dataset.hpp"
#include "mvocc/kernels.hpp"
#include "mvocc/params.hpp"
#include "mvocc/subspace.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mvocc {

struct FitOptions {
  bool standardize = false; ///< z-score features with statistics of the training targets
  TrainOptions train;
};

/// A trained one-class model together with the preprocessing it was trained
/// behind: optional standardization, view concatenation for uni-modal methods,
/// and NPT embeddings for kernelized subspace methods.
///
/// SVDD and OC-SVM use their kernel directly. The subspace methods run on
/// explicit coordinates, so under the RBF kernel each (concatenated or
/// per-modality) view is first mapped through its own NPT embedding.
struct OccModel {
  Method method = Method::svdd;
  HyperParams hparams;
  std::string target_class;
  std::vector<std::string> classes;
  std::vector<Index> input_dims; ///< feature count of every raw input view
  std::optional<Standardizer> standardizer;
  std::vector<NptEmbedding> embeddings; ///< empty unless kernelized subspace method
  std::variant<SvddModel, OcsvmModel, SubspaceModel> core;

  /// Representation views the core model consumes.
  [[nodiscard]] std::vector<MatrixXd> represent(const MultiViewDataset& ds) const;
  /// Decision values, one row per modality for MS-SVDD and a single row otherwise.
  [[nodiscard]] MatrixXd decision_values(const MultiViewDataset& ds) const;
  /// True where a sample is accepted as target. `ds_override` replaces the
  /// trained decision strategy of an MS-SVDD model when non-zero.
  [[nodiscard]] std::vector<bool> predict(const MultiViewDataset& ds, int ds_override = 0) const;
};

/// Trains `method` on the target-class samples of `train`. Non-target samples,
/// if present, are dropped.
OccModel fit_occ(Method method, const MultiViewDataset& train, const HyperParams& hp, const FitOptions& options = {});

} // namespace mvocc
