#pragma once

#include <filesystem>
#include <iosfwd>

#include "abmal/model.hpp"

namespace abmal {

inline constexpr int kModelFormatVersion = 1;

/// JSON document {format_version, model_kind, d, theta, reg_lambda,
/// trained_rounds[, platt]}. Numbers are written with 17 significant digits.
void write_model(const ModelParams& m, std::ostream& out);
ModelParams read_model(std::istream& in);
void save_model(const ModelParams& m, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace abmal
