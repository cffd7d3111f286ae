#include "mvocc/cli.hpp"

#include "mvocc/config.hpp"
#include "mvocc/error.hpp"
#include "mvocc/serialization.hpp"
#include "mvocc/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mvocc {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
};

RunConfig resolve_config(const CommonFlags& flags) {
  if (flags.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_config(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  if (!flags.out.empty()) cfg.out_dir = fs::absolute(flags.out);
  if (cfg.out_dir.empty()) cfg.out_dir = fs::current_path();
  cfg.validate();
  return cfg;
}

MultiViewDataset load_inputs(const std::vector<fs::path>& paths, const std::string& target, const std::string& label,
                             const std::string& id) {
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw ConfigError("input file not found: " + p.string());
  }
  return load_multiview_csv(paths, target, CsvOptions{label, id});
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string confusion_text(const ConfusionMatrix& cm) {
  std::ostringstream s;
  s << "confusion (positive = " << cm.positive_class << "): tp=" << cm.tp << " fn=" << cm.fn << " fp=" << cm.fp
    << " tn=" << cm.tn << '\n';
  return s.str();
}

std::string metrics_text(const ConfusionMatrix& cm) {
  char buf[160];
  std::string s;
  if (cm.positives() > 0 && cm.negatives() > 0) {
    const MetricsReport m = compute_metrics(cm);
    std::snprintf(buf, sizeof buf, "Sen %.2f  Spe %.2f  Pre %.2f  F1 %.2f  Acc %.2f  GM %.2f\n", m.sen, m.spe, m.pre,
                  m.f1, m.acc, m.gm);
    s = buf;
    if (m.undefined_precision) s += "note: no sample was accepted; precision and F1 are undefined (reported as 0)\n";
    return s;
  }
  if (cm.positives() > 0) {
    std::snprintf(buf, sizeof buf, "Sen %.2f  (no negative samples: Spe, Pre, F1, GM undefined)\n",
                  100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.positives()));
  } else {
    std::snprintf(buf, sizeof buf, "Spe %.2f  (no target samples: Sen, Pre, F1, GM undefined)\n",
                  100.0 * static_cast<double>(cm.tn) / static_cast<double>(cm.negatives()));
  }
  return buf;
}

int cmd_cv(const CommonFlags& flags, std::ostream& out) {
  const RunConfig cfg = resolve_config(flags);
  const auto grid = cfg.expanded_grid();
  const MultiViewDataset ds = load_inputs(cfg.inputs, cfg.target, cfg.label_column, cfg.id_column);
  if (is_multimodal(cfg.method) && ds.view_count() < 2) throw ConfigError("ms_svdd requires ≥2 views");

  const CvResult result = cross_validate(ds, cfg.method, grid, cfg.cv_options());

  const ReportRow row = report_row(result);
  std::string report = render_table(std::span<const ReportRow>(&row, 1));
  report += "\n" + confusion_text(result.pooled);
  const Json doc = results_document(result, config_to_json(cfg));
  const Json folds = folds_document(result, ds);

  make_dir(cfg.out_dir);
  write_text(cfg.out_dir / "report.txt", report);
  write_text(cfg.out_dir / "results.json", doc.dump(2) + "\n");
  write_text(cfg.out_dir / "folds.json", folds.dump(2) + "\n");
  out << report;
  for (const auto& w : result.warnings) out << "warning: " << w << '\n';
  out << "wrote " << (cfg.out_dir / "report.txt").string() << ", results.json, folds.json\n";
  return 0;
}

int cmd_train(const CommonFlags& flags, std::ostream& out) {
  const RunConfig cfg = resolve_config(flags);
  const auto grid = cfg.expanded_grid();
  const MultiViewDataset ds = load_inputs(cfg.inputs, cfg.target, cfg.label_column, cfg.id_column);
  if (is_multimodal(cfg.method) && ds.view_count() < 2) throw ConfigError("ms_svdd requires ≥2 views");
  const CvOptions opts = cfg.cv_options();

  std::size_t best = 0;
  Json selection = Json::object();
  if (grid.size() > 1) {
    const SelectionResult sel = select_by_inner_cv(ds, cfg.method, grid, cfg.inner_folds, cfg.seed, opts.fit, cfg.jobs);
    best = sel.best;
    selection["inner_mean_gm"] = sel.scores[best].mean_gm;
    selection["warnings"] = sel.warnings;
    for (const auto& w : sel.warnings) out << "warning: " << w << '\n';
  }
  const OccModel model = fit_occ(cfg.method, ds, grid[best], opts.fit);

  Json doc = model_to_json(model);
  selection["grid_size"] = grid.size();
  selection["chosen_index"] = best;
  doc["selection"] = std::move(selection);
  doc["config"] = config_to_json(cfg);
  make_dir(cfg.out_dir);
  write_text(cfg.out_dir / "model.json", doc.dump(1) + "\n");
  out << "trained " << display_name(cfg.method) << " on " << ds.target_count() << " target samples\n"
      << "chosen: " << to_json(grid[best], cfg.method).dump() << '\n'
      << "wrote " << (cfg.out_dir / "model.json").string() << '\n';
  return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(0, 1);
    cells.push_back(cell);
  }
  return cells;
}

// Each row carries a ground-truth label and a predicted class name.
ConfusionMatrix tally_predictions(const fs::path& path, const std::string& target, const std::string& label_col,
                                  const std::string& pred_col) {
  if (!fs::exists(path)) throw ConfigError("input file not found: " + path.string());
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t li = column(label_col);
  const std::size_t pi = column(pred_col);
  ConfusionMatrix cm;
  cm.positive_class = target;
  bool target_seen = false;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(header.size()));
    const bool pos = cells[li] == target;
    const bool acc = cells[pi] == target;
    target_seen = target_seen || pos || acc;
    if (pos && acc) ++cm.tp;
    else if (pos) ++cm.fn;
    else if (acc) ++cm.fp;
    else ++cm.tn;
  }
  if (cm.total() == 0) throw ParseError(path.string() + ": no data rows");
  if (!target_seen) throw ConfigError("target class '" + target + "' does not occur in " + path.string());
  return cm;
}

struct EvalFlags {
  std::string model;
  std::vector<std::string> data;
  std::string method;
  std::string predictions;
  std::string target;
  std::string label_column = "label";
  std::string id_column = "subject_id";
  std::string prediction_column = "predicted";
  int ds = 0;
  std::string out;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  ConfusionMatrix cm;
  Json doc;
  if (!f.predictions.empty()) {
    if (!f.model.empty() || !f.data.empty()) throw ConfigError("--predictions cannot be combined with --model/--data");
    if (f.target.empty()) throw ConfigError("--predictions needs --target");
    cm = tally_predictions(f.predictions, f.target, f.label_column, f.prediction_column);
  } else {
    if (f.model.empty()) throw ConfigError("eval needs --model and --data, or --predictions");
    if (f.data.empty()) throw ConfigError("eval needs at least one --data file");
    if (!fs::exists(f.model)) throw ConfigError("model file not found: " + f.model);
    const OccModel model = load_model(f.model);
    if (!f.method.empty() && method_from_string(f.method) != model.method)
      throw ConfigError("model artifact holds a " + std::string(to_string(model.method)) + " model, not " + f.method);
    if (!f.target.empty() && f.target != model.target_class)
      throw ConfigError("model was trained for target '" + model.target_class + "', not '" + f.target + "'");
    if (f.ds != 0 && !is_multimodal(model.method)) throw ConfigError("--ds applies to ms_svdd models only");
    std::vector<fs::path> paths(f.data.begin(), f.data.end());
    const MultiViewDataset ds = load_inputs(paths, model.target_class, f.label_column, f.id_column);
    if (ds.view_count() != model.input_dims.size())
      throw ConfigError("model expects " + std::to_string(model.input_dims.size()) + " view file(s), got " +
                        std::to_string(ds.view_count()));
    cm = tally(ds, model.predict(ds, f.ds));
    doc["method"] = to_string(model.method);
  }
  out << confusion_text(cm) << metrics_text(cm);
  if (!f.out.empty()) {
    doc["confusion"] = to_json(cm);
    if (cm.positives() > 0 && cm.negatives() > 0) doc["metrics"] = to_json(compute_metrics(cm));
    make_dir(f.out);
    write_text(fs::path(f.out) / "eval.json", doc.dump(2) + "\n");
  }
  return 0;
}

struct SynthFlags {
  SynthSpec spec;
  int views = 2;
  std::vector<long> dims{6};
  std::string out = ".";
};

int cmd_synth(SynthFlags f, std::optional<std::uint64_t> seed, std::ostream& out) {
  if (f.views < 1) throw ConfigError("--views must be at least 1");
  if (f.dims.size() != 1 && f.dims.size() != static_cast<std::size_t>(f.views))
    throw ConfigError("--dims takes one value or one per view");
  f.spec.dims.clear();
  for (int v = 0; v < f.views; ++v) f.spec.dims.push_back(f.dims.size() == 1 ? f.dims[0] : f.dims[static_cast<std::size_t>(v)]);
  if (seed) f.spec.seed = *seed;
  MultiViewDataset ds = [&] {
    try {
      return gen_two_view(f.spec);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }();
  make_dir(f.out);
  std::vector<fs::path> paths;
  for (int v = 1; v <= f.views; ++v) paths.push_back(fs::path(f.out) / ("view" + std::to_string(v) + ".csv"));
  write_multiview_csv(ds, paths);
  out << "wrote " << ds.size() << " samples (" << f.spec.n_target << " " << f.spec.target_label << ", "
      << f.spec.n_outlier << " " << f.spec.outlier_label << ") to";
  for (const auto& p : paths) out << ' ' << p.string();
  out << '\n';
  return 0;
}

bool is_validation_error(const Error& e) {
  return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
         dynamic_cast<const AlignmentError*>(&e) || dynamic_cast<const StratificationError*>(&e) ||
         dynamic_cast<const SplitError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
         dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const ContractError*>(&e) ||
         dynamic_cast<const OracleScaleError*>(&e);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view one-class classification toolkit"};
  app.require_subcommand(1);

  CommonFlags common;
  std::uint64_t seed_value = 0;
  int jobs_value = 1;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "Run configuration file")->required();
    sub->add_option("--seed", seed_value, "Override the seed");
    sub->add_option("--jobs", jobs_value, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", common.out, "Output directory");
  };

  CLI::App* cv = app.add_subcommand("cv", "Nested cross-validation with grid search");
  add_common(cv, true);
  CLI::App* train = app.add_subcommand("train", "Select hyperparameters on all data and train one model");
  add_common(train, true);

  EvalFlags ev;
  CLI::App* eval = app.add_subcommand("eval", "Score a trained model or a predictions file");
  eval->add_option("--model", ev.model, "Model artifact (model.json)");
  eval->add_option("--data", ev.data, "Feature CSV, one per view, in training order");
  eval->add_option("--method", ev.method, "Expected method of the artifact");
  eval->add_option("--ds", ev.ds, "Decision strategy override for ms_svdd (1-4)")->check(CLI::Range(1, 4));
  eval->add_option("--predictions", ev.predictions, "CSV with ground-truth and predicted class columns");
  eval->add_option("--target", ev.target, "Target class");
  eval->add_option("--label-column", ev.label_column, "Ground-truth label column");
  eval->add_option("--id-column", ev.id_column, "Subject id column");
  eval->add_option("--prediction-column", ev.prediction_column, "Predicted class column");
  eval->add_option("--out", ev.out, "Directory for eval.json");
  eval->add_option("--config", common.config, "Ignored; accepted for symmetry");
  eval->add_option("--seed", seed_value, "Ignored; evaluation is deterministic");
  eval->add_option("--jobs", jobs_value, "Ignored");

  SynthFlags sy;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic multi-view dataset");
  synth->add_option("--n-target", sy.spec.n_target, "Target samples")->check(CLI::PositiveNumber);
  synth->add_option("--n-outlier", sy.spec.n_outlier, "Outlier samples")->check(CLI::PositiveNumber);
  synth->add_option("--views", sy.views, "Number of views")->check(CLI::PositiveNumber);
  synth->add_option("--dims", sy.dims, "Features per view (one value or one per view)")->delimiter(',');
  synth->add_option("--separation", sy.spec.separation, "Outlier distance from the origin")->check(CLI::NonNegativeNumber);
  synth->add_option("--target-label", sy.spec.target_label, "Target class name");
  synth->add_option("--outlier-label", sy.spec.outlier_label, "Outlier class name");
  synth->add_option("--seed", seed_value, "Generator seed (default 7)");
  synth->add_option("--out", sy.out, "Output directory");
  synth->add_option("--jobs", jobs_value, "Ignored");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  try {
    if (cv->parsed() || train->parsed()) {
      CLI::App* sub = cv->parsed() ? cv : train;
      if (given(sub, "--seed")) common.seed = seed_value;
      if (given(sub, "--jobs")) common.jobs = jobs_value;
      return cv->parsed() ? cmd_cv(common, out) : cmd_train(common, out);
    }
    if (eval->parsed()) return cmd_eval(ev, out);
    return cmd_synth(sy, given(synth, "--seed") ? std::optional<std::uint64_t>(seed_value) : std::nullopt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_validation_error(e) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace mvocc
