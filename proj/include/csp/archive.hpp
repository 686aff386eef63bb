#pragma once

#include <filesystem>

#include "csp/sample.hpp"

namespace csp {

// On-disk sample archive: a directory with manifest.json plus one
// little-endian float32 blob per sample per channel at
// <sample_id>/<channel>.f32, row-major (t, h, w).
Dataset load_archive(const std::filesystem::path& dir);
void write_archive(const Dataset& dataset, const std::filesystem::path& dir);

// Raw blob helpers, shared with the external-forecaster exchange protocol.
std::vector<float> read_f32_blob(const std::filesystem::path& path, std::size_t expected_count);
void write_f32_blob(const std::filesystem::path& path, const float* data, std::size_t count);

}  // namespace csp
