#pragma once

#include "mvocc/model.hpp"
#include "mvocc/report.hpp"

#include <filesystem>

namespace mvocc {

inline constexpr int kModelFormatVersion = 1;

/// Matrices are stored as {"rows", "cols", "data"} with data in row-major order.
Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);

/// Full model artifact: preprocessing, embeddings and the trained core, enough
/// to reproduce decision values bit-for-bit after a round trip.
Json model_to_json(const OccModel& model);
/// Throws ParseError on a malformed or unsupported document.
OccModel model_from_json(const Json& j);

void save_model(const OccModel& model, const std::filesystem::path& path);
OccModel load_model(const std::filesystem::path& path);

} // namespace mvocc
