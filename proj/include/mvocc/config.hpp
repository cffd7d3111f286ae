#pragma once

#include "mvocc/evaluation.hpp"
#include "mvocc/report.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mvocc {

/// Everything a batch run needs. Grid axes left unset in the config file
/// default to the built-in search grids of the chosen method and kernel.
struct RunConfig {
  Method method = Method::svdd;
  std::string target;
  KernelKind kernel = KernelKind::linear;
  GridSpec grid;
  int outer_folds = 5;
  int inner_folds = 10;
  std::uint64_t seed = 0;
  int max_iters = 100;
  bool standardize = false;
  std::vector<std::filesystem::path> inputs; ///< one CSV per view, absolute after loading
  std::string label_column = "label";
  std::string id_column = "subject_id";
  std::filesystem::path out_dir;
  int jobs = 1;

  /// Axis rules and value ranges; throws ConfigError.
  void validate() const;
  [[nodiscard]] std::vector<HyperParams> expanded_grid() const;
  [[nodiscard]] CvOptions cv_options() const;
};

/// Parses a config document.
///
/// Two syntaxes are accepted. Key-value text, one `key = value` per line with
/// `#` comments, lists separated by commas and integer ranges written `a-b`:
///
///     method = ms_svdd
///     target = MI
///     inputs = a4c.csv, a2c.csv
///     d = 1-3
///
/// Or a JSON object with the same keys; a results document is accepted too and
/// its embedded "config" section is used. Relative input and output paths are
/// resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, every grid axis spelled out.
Json config_to_json(const RunConfig& cfg);

} // namespace mvocc
