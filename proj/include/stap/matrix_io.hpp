#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stap/types.hpp"

namespace stap {

// Text interchange format for complex matrices: optional '#' comment lines,
// then a header "<rows> <cols> complex128", then one line per matrix row of
// row-major "re im" pairs printed with %.17g. Diffable, byte-stable, and
// trivially parseable from any language.
void write_matrix(const std::filesystem::path& path, const CMat& m,
                  const std::vector<std::pair<std::string, std::string>>&
                      metadata = {});

// Reads the format above; '#' lines are skipped. Throws IoError on missing
// files, malformed headers, or truncated data.
CMat read_matrix(const std::filesystem::path& path);

// Training sets are stored as their N x K snapshot matrix.
void write_training(const std::filesystem::path& path, const TrainingSet& z);
TrainingSet read_training(const std::filesystem::path& path);

}  // namespace stap
