#include "mvocc/serialization.hpp"

#include "mvocc/error.hpp"

#include <fstream>

namespace mvocc {

Json matrix_to_json(const MatrixXd& m) {
  Json data = Json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
    throw ParseError("matrix payload does not match its declared shape");
  MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  return m;
}

namespace {

Json vec(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vec_from(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

Json kernel_json(const KernelSpec& k) { return Json{{"kind", to_string(k.kind)}, {"sigma", k.sigma}}; }

KernelSpec kernel_from(const Json& j) {
  return {kernel_kind_from_string(j.at("kind").get<std::string>()), j.at("sigma").get<double>()};
}

Json svdd_json(const SvddModel& m) {
  Json j;
  j["kernel"] = kernel_json(m.kernel);
  j["c"] = m.c;
  j["alphas"] = vec(m.alphas);
  j["radius_sq"] = m.radius_sq;
  j["center"] = vec(m.center_coords);
  j["support_index"] = m.support_index;
  j["slacks"] = vec(m.slacks);
  j["support_vectors"] = matrix_to_json(m.support_vectors);
  j["support_alphas"] = vec(m.support_alphas);
  j["alpha_k_alpha"] = m.alpha_k_alpha;
  j["objective"] = m.objective;
  j["kkt_violation"] = m.kkt_violation;
  j["radius_from_free_sv"] = m.radius_from_free_sv;
  return j;
}

SvddModel svdd_from(const Json& j) {
  SvddModel m;
  m.kernel = kernel_from(j.at("kernel"));
  m.c = j.at("c").get<double>();
  m.alphas = vec_from(j.at("alphas"));
  m.radius_sq = j.at("radius_sq").get<double>();
  m.center_coords = vec_from(j.at("center"));
  m.support_index = j.at("support_index").get<std::vector<Index>>();
  m.slacks = vec_from(j.at("slacks"));
  m.support_vectors = matrix_from_json(j.at("support_vectors"));
  m.support_alphas = vec_from(j.at("support_alphas"));
  m.alpha_k_alpha = j.at("alpha_k_alpha").get<double>();
  m.objective = j.at("objective").get<double>();
  m.kkt_violation = j.at("kkt_violation").get<double>();
  m.radius_from_free_sv = j.at("radius_from_free_sv").get<bool>();
  return m;
}

Json ocsvm_json(const OcsvmModel& m) {
  Json j;
  j["kernel"] = kernel_json(m.kernel);
  j["nu"] = m.nu;
  j["alphas"] = vec(m.alphas);
  j["rho"] = m.rho;
  j["support_index"] = m.support_index;
  j["support_vectors"] = matrix_to_json(m.support_vectors);
  j["support_alphas"] = vec(m.support_alphas);
  j["objective"] = m.objective;
  j["kkt_violation"] = m.kkt_violation;
  return j;
}

OcsvmModel ocsvm_from(const Json& j) {
  OcsvmModel m;
  m.kernel = kernel_from(j.at("kernel"));
  m.nu = j.at("nu").get<double>();
  m.alphas = vec_from(j.at("alphas"));
  m.rho = j.at("rho").get<double>();
  m.support_index = j.at("support_index").get<std::vector<Index>>();
  m.support_vectors = matrix_from_json(j.at("support_vectors"));
  m.support_alphas = vec_from(j.at("support_alphas"));
  m.objective = j.at("objective").get<double>();
  m.kkt_violation = j.at("kkt_violation").get<double>();
  return m;
}

Json subspace_json(const SubspaceModel& m) {
  Json j;
  j["method"] = to_string(m.method);
  Json proj = Json::array();
  for (const auto& p : m.projections) proj.push_back({{"modality_id", p.modality_id}, {"q", matrix_to_json(p.q)}});
  j["projections"] = std::move(proj);
  if (m.whitener) j["whitener"] = matrix_to_json(*m.whitener);
  j["inner"] = svdd_json(m.inner);
  j["loss_trace"] = m.loss_trace;
  j["accepted_steps"] = m.accepted_steps;
  j["rejected_steps"] = m.rejected_steps;
  j["final_eta"] = m.final_eta;
  return j;
}

SubspaceModel subspace_from(const Json& j, const HyperParams& hp) {
  SubspaceModel m;
  m.method = method_from_string(j.at("method").get<std::string>());
  m.hparams = hp;
  for (const auto& p : j.at("projections"))
    m.projections.push_back({matrix_from_json(p.at("q")), p.at("modality_id").get<int>()});
  if (j.contains("whitener")) m.whitener = matrix_from_json(j.at("whitener"));
  m.inner = svdd_from(j.at("inner"));
  m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  m.accepted_steps = j.at("accepted_steps").get<int>();
  m.rejected_steps = j.at("rejected_steps").get<int>();
  m.final_eta = j.at("final_eta").get<double>();
  return m;
}

Json embedding_json(const NptEmbedding& e) {
  return Json{{"kernel", kernel_json(e.kernel)},     {"train_refs", matrix_to_json(e.train_refs)},
              {"eigvecs", matrix_to_json(e.eigvecs)}, {"eigvals", vec(e.eigvals)},
              {"row_means", vec(e.row_means)},        {"grand_mean", e.grand_mean}};
}

NptEmbedding embedding_from(const Json& j) {
  NptEmbedding e;
  e.kernel = kernel_from(j.at("kernel"));
  e.train_refs = matrix_from_json(j.at("train_refs"));
  e.eigvecs = matrix_from_json(j.at("eigvecs"));
  e.eigvals = vec_from(j.at("eigvals"));
  e.row_means = vec_from(j.at("row_means"));
  e.grand_mean = j.at("grand_mean").get<double>();
  return e;
}

} // namespace

Json model_to_json(const OccModel& model) {
  Json j;
  j["format"] = "mvocc-model";
  j["version"] = kModelFormatVersion;
  j["method"] = to_string(model.method);
  j["hyperparameters"] = to_json(model.hparams, model.method);
  j["target_class"] = model.target_class;
  j["classes"] = model.classes;
  j["input_dims"] = model.input_dims;
  if (model.standardizer) {
    Json s = Json::array();
    for (std::size_t v = 0; v < model.standardizer->mean.size(); ++v)
      s.push_back({{"mean", vec(model.standardizer->mean[v])}, {"scale", vec(model.standardizer->scale[v])}});
    j["standardizer"] = std::move(s);
  }
  Json emb = Json::array();
  for (const auto& e : model.embeddings) emb.push_back(embedding_json(e));
  j["embeddings"] = std::move(emb);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvddModel>) {
          j["core"] = {{"type", "svdd"}, {"model", svdd_json(m)}};
        } else if constexpr (std::is_same_v<T, OcsvmModel>) {
          j["core"] = {{"type", "ocsvm"}, {"model", ocsvm_json(m)}};
        } else {
          j["core"] = {{"type", "subspace"}, {"model", subspace_json(m)}};
        }
      },
      model.core);
  return j;
}

OccModel model_from_json(const Json& j) {
  try {
    if (j.value("format", std::string{}) != "mvocc-model") throw ParseError("not an mvocc model document");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ParseError("unsupported model format version " + std::to_string(version));
    OccModel m;
    m.method = method_from_string(j.at("method").get<std::string>());
    m.hparams = hyperparams_from_json(j.at("hyperparameters"));
    m.target_class = j.at("target_class").get<std::string>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.input_dims = j.at("input_dims").get<std::vector<Index>>();
    if (j.contains("standardizer")) {
      Standardizer s;
      for (const auto& v : j.at("standardizer")) {
        s.mean.push_back(vec_from(v.at("mean")));
        s.scale.push_back(vec_from(v.at("scale")));
      }
      m.standardizer = std::move(s);
    }
    for (const auto& e : j.at("embeddings")) m.embeddings.push_back(embedding_from(e));
    const auto& core = j.at("core");
    const auto type = core.at("type").get<std::string>();
    if (type == "svdd") m.core = svdd_from(core.at("model"));
    else if (type == "ocsvm") m.core = ocsvm_from(core.at("model"));
    else if (type == "subspace") m.core = subspace_from(core.at("model"), m.hparams);
    else throw ParseError("unknown model core type '" + type + "'");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const OccModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

OccModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

} // namespace mvocc
