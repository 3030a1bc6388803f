#pragma once

// File formats: raw symbol bytes + JSON sidecar, newline-delimited occurrence
// positions, and plot-ready CSV/JSON. CSV is locale-free with LF endings.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "symdyn/densities.hpp"
#include "symdyn/estimators.hpp"
#include "symdyn/symbolic.hpp"

namespace symdyn::io {

// Shortest round-trip decimal form, '.' separator.
std::string format_double(double v);

// `path` gets one byte per symbol; `path` + ".json" gets the sidecar.
void write_sequence(const std::filesystem::path& path, const SymbolicSequence& x);
SymbolicSequence read_sequence(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& path);

void write_occurrences(const std::filesystem::path& path, const OccurrenceIndex& index);
std::vector<std::size_t> read_occurrences(const std::filesystem::path& path);

nlohmann::json to_json(const density::DensityEstimate& est);
// kind,n,value
std::string density_csv(const density::DensityEstimate& est);
// i,diam
std::string diam_series_csv(const est::DiamSeries& series);

// Writes atomically enough for a single writer: temp file then rename.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace symdyn::io
