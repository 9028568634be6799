#pragma once

#include <filesystem>
#include <iosfwd>

#include "nmkl/trainers.hpp"

namespace nmkl {

// Self-describing JSON model file: format tag and version, variant and
// hyperparameters, kernel specs, the embedded training rows, the nonzero
// coefficient columns and the optional input scaler. Doubles are written in
// shortest round-trip form, so a loaded model predicts bit for bit like the
// original.
void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::filesystem::path& path);

Model load_model(std::istream& in);
Model load_model(const std::filesystem::path& path);

}  // namespace nmkl
