#include "mvocc/config.hpp"

#include "mvocc/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace mvocc {

namespace {

using Fields = std::map<std::string, std::vector<std::string>>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Fields parse_key_values(const std::string& text) {
  Fields fields;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (fields.contains(key)) throw ConfigError("config key '" + key + "' given twice");
    fields[key] = split_list(line.substr(eq + 1));
  }
  return fields;
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ConfigError("config value " + v.dump() + " is not a scalar");
}

Fields parse_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.at("config").is_object()) doc = doc.at("config");
  if (!doc.is_object()) throw ConfigError("JSON config must be an object");
  Fields fields;
  for (const auto& [key, value] : doc.items()) {
    auto& slot = fields[key];
    if (value.is_null()) continue;
    if (value.is_array()) {
      for (const auto& item : value) slot.push_back(scalar_text(item));
    } else {
      slot.push_back(scalar_text(value));
    }
  }
  return fields;
}

template <class T> T parse_number(const std::string& key, const std::string& token) {
  T value{};
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError("config key '" + key + "': cannot parse '" + token + "'");
  return value;
}

std::vector<double> doubles(const std::string& key, const std::vector<std::string>& tokens) {
  std::vector<double> out;
  for (const auto& t : tokens) out.push_back(parse_number<double>(key, t));
  return out;
}

std::vector<int> ints(const std::string& key, const std::vector<std::string>& tokens) {
  std::vector<int> out;
  for (const auto& t : tokens) {
    const auto dash = t.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(parse_number<int>(key, t));
      continue;
    }
    const int lo = parse_number<int>(key, trim(t.substr(0, dash)));
    const int hi = parse_number<int>(key, trim(t.substr(dash + 1)));
    if (hi < lo) throw ConfigError("config key '" + key + "': empty range '" + t + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

const std::string& single(const std::string& key, const std::vector<std::string>& tokens) {
  if (tokens.size() != 1) throw ConfigError("config key '" + key + "' takes exactly one value");
  return tokens.front();
}

bool boolean(const std::string& key, const std::vector<std::string>& tokens) {
  std::string v = single(key, tokens);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return std::filesystem::absolute(path).lexically_normal();
}

} // namespace

void RunConfig::validate() const {
  if (target.empty()) throw ConfigError("config: 'target' is required");
  if (inputs.empty()) throw ConfigError("config: 'inputs' is required");
  if (is_multimodal(method) && inputs.size() < 2)
    throw ConfigError("ms_svdd requires ≥2 views (config lists " + std::to_string(inputs.size()) + " input file)");
  if (outer_folds < 2) throw ConfigError("outer_folds must be at least 2");
  if (inner_folds < 2) throw ConfigError("inner_folds must be at least 2");
  if (max_iters < 0) throw ConfigError("max_iters must be non-negative");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  (void)expanded_grid();
}

std::vector<HyperParams> RunConfig::expanded_grid() const {
  try {
    return grid_expand(method, kernel, grid, max_iters);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

CvOptions RunConfig::cv_options() const {
  CvOptions o;
  o.k_outer = outer_folds;
  o.k_inner = inner_folds;
  o.seed = seed;
  o.jobs = jobs;
  o.fit.standardize = standardize;
  o.fit.train.seed = seed;
  return o;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  const auto first = text.find_first_not_of(" \t\r\n");
  Fields fields = (first != std::string::npos && text[first] == '{') ? parse_json(text) : parse_key_values(text);

  RunConfig cfg;
  auto take = [&](const char* key) -> const std::vector<std::string>* {
    const auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  };

  const auto* method = take("method");
  if (!method) throw ConfigError("config: 'method' is required");
  try {
    cfg.method = method_from_string(single("method", *method));
    if (const auto* k = take("kernel")) cfg.kernel = kernel_kind_from_string(single("kernel", *k));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  const GridSpec defaults = default_grid(cfg.method, cfg.kernel);
  cfg.grid = defaults;
  static const std::vector<std::string> known{"method",      "target",      "kernel", "eta",          "beta",
                                              "c",           "sigma",       "d",      "reg",          "ds",
                                              "outer_folds", "inner_folds", "seed",   "max_iters",    "standardize",
                                              "inputs",      "label_column", "id_column", "out",       "jobs"};
  for (const auto& [key, tokens] : fields) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("config: unknown key '" + key + "'");
    if (key == "target") cfg.target = single(key, tokens);
    else if (key == "eta") cfg.grid.eta = doubles(key, tokens);
    else if (key == "beta") cfg.grid.beta = doubles(key, tokens);
    else if (key == "c") cfg.grid.c = doubles(key, tokens);
    else if (key == "sigma") cfg.grid.sigma = doubles(key, tokens);
    else if (key == "d") cfg.grid.d = ints(key, tokens);
    else if (key == "reg") cfg.grid.reg = ints(key, tokens);
    else if (key == "ds") cfg.grid.ds = ints(key, tokens);
    else if (key == "outer_folds") cfg.outer_folds = parse_number<int>(key, single(key, tokens));
    else if (key == "inner_folds") cfg.inner_folds = parse_number<int>(key, single(key, tokens));
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, single(key, tokens));
    else if (key == "max_iters") cfg.max_iters = parse_number<int>(key, single(key, tokens));
    else if (key == "standardize") cfg.standardize = boolean(key, tokens);
    else if (key == "jobs") cfg.jobs = parse_number<int>(key, single(key, tokens));
    else if (key == "label_column") cfg.label_column = single(key, tokens);
    else if (key == "id_column") cfg.id_column = single(key, tokens);
    else if (key == "out") cfg.out_dir = resolve(base_dir, single(key, tokens));
    else if (key == "inputs")
      for (const auto& t : tokens) cfg.inputs.push_back(resolve(base_dir, t));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path).parent_path());
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["method"] = to_string(cfg.method);
  j["target"] = cfg.target;
  j["kernel"] = to_string(cfg.kernel);
  const auto axes = relevant_axes(cfg.method, cfg.kernel);
  auto uses = [&](const char* a) { return std::find(axes.begin(), axes.end(), a) != axes.end(); };
  if (uses("eta")) j["eta"] = cfg.grid.eta;
  if (uses("beta")) j["beta"] = cfg.grid.beta;
  j["c"] = cfg.grid.c;
  if (uses("sigma")) j["sigma"] = cfg.grid.sigma;
  if (uses("d")) j["d"] = cfg.grid.d;
  if (uses("reg")) j["reg"] = cfg.grid.reg;
  if (uses("ds")) j["ds"] = cfg.grid.ds;
  j["outer_folds"] = cfg.outer_folds;
  j["inner_folds"] = cfg.inner_folds;
  j["seed"] = cfg.seed;
  j["max_iters"] = cfg.max_iters;
  j["standardize"] = cfg.standardize;
  Json inputs = Json::array();
  for (const auto& p : cfg.inputs) inputs.push_back(p.string());
  j["inputs"] = std::move(inputs);
  j["label_column"] = cfg.label_column;
  j["id_column"] = cfg.id_column;
  return j;
}

} // namespace mvocc
