#include "mvocc/dataset.hpp"

#include "mvocc/error.hpp"
#include "mvocc/prng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mvocc {

namespace {

std::string join(const std::vector<std::string>& items, std::size_t limit = 5) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  if (items.size() > limit) out += ", ... (" + std::to_string(items.size()) + " total)";
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file: " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      // UTF-8 byte order mark
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      first = false;
      table.header = split_csv_line(line);
      continue;
    }
    if (trim(line).empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty()))
    throw ParseError(path.string() + ": missing header row");
  return table;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t row,
                  const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(path.string() + ": row " + std::to_string(row) + ", column '" + column +
                     "': expected a finite number, got '" + cell + "'");
  }
  return value;
}

} // namespace

MultiViewDataset::MultiViewDataset(std::vector<ModalityView> views, std::vector<std::string> labels,
                                   std::vector<std::string> subject_ids, std::string target_class,
                                   std::vector<std::string> classes)
    : views_(std::move(views)), labels_(std::move(labels)), subject_ids_(std::move(subject_ids)),
      target_(std::move(target_class)), classes_(std::move(classes)) {
  if (views_.empty()) throw ShapeError("dataset needs at least one view");
  const auto n = static_cast<Index>(labels_.size());
  if (subject_ids_.size() != labels_.size())
    throw ShapeError("subject id count does not match label count");
  for (std::size_t v = 0; v < views_.size(); ++v) {
    const auto& view = views_[v];
    if (view.features.cols() != n)
      throw ShapeError("view " + std::to_string(v + 1) + " has " + std::to_string(view.features.cols()) +
                       " samples, expected " + std::to_string(n));
    if (view.features.rows() < 1) throw ShapeError("view " + std::to_string(v + 1) + " has no features");
    if (!view.features.allFinite()) throw NumericError("view " + std::to_string(v + 1) + " has non-finite entries");
  }
  std::set<std::string> seen_ids;
  for (const auto& id : subject_ids_) {
    if (!seen_ids.insert(id).second) throw ConfigError("duplicate subject id '" + id + "'");
  }
  std::set<std::string> distinct(labels_.begin(), labels_.end());
  if (classes_.empty()) {
    classes_.assign(distinct.begin(), distinct.end());
    if (classes_.empty()) classes_.push_back(target_);
  } else {
    std::sort(classes_.begin(), classes_.end());
    classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
    for (const auto& l : distinct) {
      if (!std::binary_search(classes_.begin(), classes_.end(), l))
        throw ConfigError("label '" + l + "' is not one of the dataset classes");
    }
  }
  if (classes_.size() > 2)
    throw ConfigError("expected at most two classes, found " + std::to_string(classes_.size()) + ": " + join(classes_));
  if (!std::binary_search(classes_.begin(), classes_.end(), target_))
    throw ConfigError("target class '" + target_ + "' does not occur in labels (" + join(classes_) + ")");
}

std::optional<std::string> MultiViewDataset::negative_class() const {
  for (const auto& c : classes_) {
    if (c != target_) return c;
  }
  return std::nullopt;
}

Index MultiViewDataset::target_count() const {
  return static_cast<Index>(std::count(labels_.begin(), labels_.end(), target_));
}

MultiViewDataset MultiViewDataset::subset(std::span<const Index> indices) const {
  std::vector<ModalityView> views;
  views.reserve(views_.size());
  for (const auto& view : views_) {
    MatrixXd f(view.features.rows(), static_cast<Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) f.col(static_cast<Index>(j)) = view.features.col(indices[j]);
    views.push_back({view.modality_id, std::move(f)});
  }
  std::vector<std::string> labels;
  std::vector<std::string> ids;
  labels.reserve(indices.size());
  ids.reserve(indices.size());
  for (const Index i : indices) {
    labels.push_back(labels_.at(static_cast<std::size_t>(i)));
    ids.push_back(subject_ids_.at(static_cast<std::size_t>(i)));
  }
  return {std::move(views), std::move(labels), std::move(ids), target_, classes_};
}

MultiViewDataset MultiViewDataset::with_target(const std::string& target) const {
  return {views_, labels_, subject_ids_, target, classes_};
}

MultiViewDataset MultiViewDataset::with_views(std::vector<ModalityView> views) const {
  return {std::move(views), labels_, subject_ids_, target_, classes_};
}

std::vector<Index> FoldPlan::members(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

MultiViewDataset load_multiview_csv(std::span<const std::filesystem::path> paths, const std::string& target,
                                    const CsvOptions& options) {
  if (paths.empty()) throw ConfigError("no input files given");

  std::vector<std::string> order;                       // subject ids in first-file order
  std::optional<std::map<std::string, std::string>> label_of;
  std::vector<ModalityView> views;

  for (std::size_t v = 0; v < paths.size(); ++v) {
    const auto& path = paths[v];
    const CsvTable table = read_csv(path);
    const auto& header = table.header;

    std::optional<std::size_t> id_col;
    std::optional<std::size_t> label_col;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == options.id_column) id_col = c;
      else if (header[c] == options.label_column) label_col = c;
      else feature_cols.push_back(c);
    }
    if (!id_col) throw ParseError(path.string() + ": missing required column '" + options.id_column + "'");
    if (feature_cols.empty()) throw ParseError(path.string() + ": no feature columns");
    if (table.rows.empty()) throw ParseError(path.string() + ": no data rows");

    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      if (row.size() != header.size())
        throw ParseError(path.string() + ": row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                         " cells, header has " + std::to_string(header.size()));
      if (!row_of.emplace(row[*id_col], r).second)
        throw ParseError(path.string() + ": duplicate subject id '" + row[*id_col] + "'");
    }

    if (v == 0) {
      for (const auto& row : table.rows) order.push_back(row[*id_col]);
    } else {
      std::vector<std::string> missing;
      std::vector<std::string> extra;
      for (const auto& id : order) {
        if (!row_of.contains(id)) missing.push_back(id);
      }
      std::set<std::string> known(order.begin(), order.end());
      for (const auto& row : table.rows) {
        if (!known.contains(row[*id_col])) extra.push_back(row[*id_col]);
      }
      if (!missing.empty() || !extra.empty()) {
        std::string msg = "subject ids of " + path.string() + " do not match " + paths[0].string();
        if (!missing.empty()) msg += "; missing: " + join(missing);
        if (!extra.empty()) msg += "; unexpected: " + join(extra);
        throw AlignmentError(msg);
      }
    }

    MatrixXd features(static_cast<Index>(feature_cols.size()), static_cast<Index>(order.size()));
    std::map<std::string, std::string> labels_here;
    for (std::size_t j = 0; j < order.size(); ++j) {
      const std::size_t r = row_of.at(order[j]);
      const auto& row = table.rows[r];
      for (std::size_t f = 0; f < feature_cols.size(); ++f) {
        features(static_cast<Index>(f), static_cast<Index>(j)) =
            parse_cell(row[feature_cols[f]], path, r + 1, header[feature_cols[f]]);
      }
      if (label_col) labels_here[order[j]] = row[*label_col];
    }
    if (label_col) {
      if (!label_of) {
        label_of = std::move(labels_here);
      } else {
        for (const auto& [id, l] : labels_here) {
          if (label_of->at(id) != l)
            throw ParseError(path.string() + ": label of subject '" + id + "' disagrees with an earlier file");
        }
      }
    }
    views.push_back({static_cast<int>(v + 1), std::move(features)});
  }

  if (!label_of)
    throw ParseError("label column '" + options.label_column + "' not found in any input file");

  std::vector<std::string> labels;
  labels.reserve(order.size());
  for (const auto& id : order) labels.push_back(label_of->at(id));
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (!distinct.contains(target)) {
    std::vector<std::string> names(distinct.begin(), distinct.end());
    throw ConfigError("unknown target class '" + target + "'; labels are: " + join(names));
  }
  return {std::move(views), std::move(labels), std::move(order), target};
}

void write_multiview_csv(const MultiViewDataset& ds, std::span<const std::filesystem::path> paths,
                         const CsvOptions& options) {
  if (paths.size() != ds.view_count())
    throw ConfigError("need one output path per view (" + std::to_string(ds.view_count()) + ")");
  for (std::size_t v = 0; v < paths.size(); ++v) {
    std::ofstream out(paths[v], std::ios::binary);
    if (!out) throw IoError("cannot write " + paths[v].string());
    const auto& f = ds.view(v).features;
    out << options.id_column << ',' << options.label_column;
    for (Index r = 0; r < f.rows(); ++r) out << ",f" << (r + 1);
    out << '\n';
    char buf[32];
    for (Index j = 0; j < f.cols(); ++j) {
      out << ds.subject_ids()[static_cast<std::size_t>(j)] << ',' << ds.labels()[static_cast<std::size_t>(j)];
      for (Index r = 0; r < f.rows(); ++r) {
        std::snprintf(buf, sizeof buf, "%.17g", f(r, j));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

MultiViewDataset concatenate_views(const MultiViewDataset& ds) {
  if (ds.view_count() == 1) return ds;
  Index rows = 0;
  for (const auto& v : ds.views()) rows += v.feature_dim();
  MatrixXd stacked(rows, ds.size());
  Index offset = 0;
  for (const auto& v : ds.views()) {
    stacked.middleRows(offset, v.feature_dim()) = v.features;
    offset += v.feature_dim();
  }
  std::vector<ModalityView> views;
  views.push_back({1, std::move(stacked)});
  return ds.with_views(std::move(views));
}

FoldPlan stratified_folds(const MultiViewDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw StratificationError("fold count must be at least 2, got " + std::to_string(k));
  const auto& classes = ds.classes();
  std::vector<std::vector<Index>> members(classes.size());
  for (Index i = 0; i < ds.size(); ++i) {
    const auto& l = ds.labels()[static_cast<std::size_t>(i)];
    const auto pos = std::lower_bound(classes.begin(), classes.end(), l) - classes.begin();
    members[static_cast<std::size_t>(pos)].push_back(i);
  }
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (members[c].empty()) continue;
    ++present;
    if (members[c].size() < static_cast<std::size_t>(k))
      throw StratificationError("class '" + classes[c] + "' has " + std::to_string(members[c].size()) +
                                " samples, fewer than k=" + std::to_string(k));
  }
  if (present < 2) throw StratificationError("stratified folds need two classes");

  FoldPlan plan{k, std::vector<int>(static_cast<std::size_t>(ds.size()), -1), seed};
  Rng rng(seed);
  std::size_t position = 0;
  for (auto& m : members) {
    rng.shuffle(std::span<Index>(m));
    for (const Index i : m) {
      plan.assignments[static_cast<std::size_t>(i)] = static_cast<int>(position % static_cast<std::size_t>(k));
      ++position;
    }
  }
  return plan;
}

std::pair<MultiViewDataset, MultiViewDataset> split_target_only(const MultiViewDataset& ds, const FoldPlan& plan,
                                                                int test_fold) {
  if (test_fold < 0 || test_fold >= plan.k)
    throw SplitError("test fold " + std::to_string(test_fold) + " out of range for k=" + std::to_string(plan.k));
  if (plan.assignments.size() != static_cast<std::size_t>(ds.size()))
    throw SplitError("fold plan does not match dataset size");
  std::vector<Index> train;
  std::vector<Index> test;
  for (Index i = 0; i < ds.size(); ++i) {
    if (plan.assignments[static_cast<std::size_t>(i)] == test_fold) test.push_back(i);
    else if (ds.is_target(i)) train.push_back(i);
  }
  if (train.empty()) throw SplitError("no target-class samples left for training");
  return {ds.subset(train), ds.subset(test)};
}

Standardizer Standardizer::fit(const MultiViewDataset& ds) {
  Standardizer s;
  for (const auto& view : ds.views()) {
    const auto& f = view.features;
    VectorXd mean = f.rowwise().mean();
    VectorXd scale(f.rows());
    for (Index r = 0; r < f.rows(); ++r) {
      const double var = (f.row(r).array() - mean(r)).square().mean();
      scale(r) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    s.mean.push_back(std::move(mean));
    s.scale.push_back(std::move(scale));
  }
  return s;
}

MultiViewDataset Standardizer::apply(const MultiViewDataset& ds) const {
  if (ds.view_count() != mean.size()) throw ShapeError("standardizer view count mismatch");
  std::vector<ModalityView> views;
  for (std::size_t v = 0; v < ds.view_count(); ++v) {
    const auto& f = ds.view(v).features;
    if (f.rows() != mean[v].size()) throw ShapeError("standardizer feature count mismatch");
    MatrixXd g = (f.colwise() - mean[v]).array().colwise() / scale[v].array();
    views.push_back({ds.view(v).modality_id, std::move(g)});
  }
  return ds.with_views(std::move(views));
}

} // namespace mvocc
