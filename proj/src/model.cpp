#include "mvocc/model.hpp"

#include "mvocc/error.hpp"

#include <string>

namespace mvocc {

namespace {

MultiViewDataset targets_only(const MultiViewDataset& ds) {
  std::vector<Index> idx;
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.is_target(i)) idx.push_back(i);
  }
  if (idx.size() == static_cast<std::size_t>(ds.size())) return ds;
  return ds.subset(idx);
}

std::vector<MatrixXd> raw_views(const MultiViewDataset& ds, Method method) {
  std::vector<MatrixXd> out;
  if (is_multimodal(method)) {
    for (const auto& v : ds.views()) out.push_back(v.features);
  } else {
    out.push_back(concatenate_views(ds).view(0).features);
  }
  return out;
}

} // namespace

std::vector<MatrixXd> OccModel::represent(const MultiViewDataset& ds) const {
  if (ds.view_count() != input_dims.size())
    throw ShapeError("model expects " + std::to_string(input_dims.size()) + " views, data has " +
                     std::to_string(ds.view_count()));
  for (std::size_t v = 0; v < input_dims.size(); ++v) {
    if (ds.view(v).feature_dim() != input_dims[v])
      throw ShapeError("view " + std::to_string(v + 1) + " has " + std::to_string(ds.view(v).feature_dim()) +
                       " features, model expects " + std::to_string(input_dims[v]));
  }
  const MultiViewDataset prepared = standardizer ? standardizer->apply(ds) : ds;
  std::vector<MatrixXd> views = raw_views(prepared, method);
  if (!embeddings.empty()) {
    for (std::size_t v = 0; v < views.size(); ++v) views[v] = npt_transform(embeddings[v], views[v]);
  }
  return views;
}

MatrixXd OccModel::decision_values(const MultiViewDataset& ds) const {
  const auto views = represent(ds);
  return std::visit(
      [&](const auto& m) -> MatrixXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SubspaceModel>) {
          return m.modality_decisions(views);
        } else {
          return m.decisions(views[0]).transpose();
        }
      },
      core);
}

std::vector<bool> OccModel::predict(const MultiViewDataset& ds, int ds_override) const {
  if (const auto* sub = std::get_if<SubspaceModel>(&core)) return sub->accept(represent(ds), ds_override);
  const MatrixXd dec = decision_values(ds);
  std::vector<bool> out(static_cast<std::size_t>(dec.cols()));
  for (Index j = 0; j < dec.cols(); ++j) out[static_cast<std::size_t>(j)] = dec(0, j) >= 0.0;
  return out;
}

OccModel fit_occ(Method method, const MultiViewDataset& train, const HyperParams& hp, const FitOptions& options) {
  if (is_multimodal(method) && train.view_count() < 2) throw ConfigError("ms_svdd requires ≥2 views");
  const KernelSpec kernel = hp.kernel_spec();
  kernel.validate();

  OccModel model;
  model.method = method;
  model.hparams = hp;
  model.target_class = train.target_class();
  model.classes = train.classes();
  for (const auto& v : train.views()) model.input_dims.push_back(v.feature_dim());

  MultiViewDataset targets = targets_only(train);
  if (targets.size() == 0) throw SplitError("no target-class samples to train on");
  if (options.standardize) {
    model.standardizer = Standardizer::fit(targets);
    targets = model.standardizer->apply(targets);
  }
  std::vector<MatrixXd> views = raw_views(targets, method);

  switch (method) {
  case Method::svdd:
    model.core = fit_svdd(views[0], hp.c, kernel, options.train.smo);
    break;
  case Method::ocsvm:
    model.core = fit_ocsvm(views[0], nu_from_c(hp.c, views[0].cols()), kernel, options.train.smo);
    break;
  case Method::s_svdd:
  case Method::es_svdd:
  case Method::ms_svdd:
    if (kernel.kind == KernelKind::rbf) {
      for (auto& v : views) {
        model.embeddings.push_back(npt_fit(v, kernel));
        v = model.embeddings.back().training_embedding();
      }
    }
    model.core = train_subspace(method, views, hp, options.train);
    break;
  }
  return model;
}

} // namespace mvocc
