#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "kam/torus_series.hpp"

namespace kam {

using json = nlohmann::json;

/// {n, K, coeffs: [{k, re, im}]}; coefficients with |c| ≤ prune are omitted.
json to_json(const TorusSeries& f, double prune = 0.0);
TorusSeries series_from_json(const json& j);

/// {n, K, N, entries: [{i, j, coeffs: [{k, re, im}]}]}; zero entries are omitted.
json to_json(const OperatorSeries& op, double prune = 0.0);
OperatorSeries operator_from_json(const json& j);

std::string checksum_hex(const std::string& text);

/// Writes {"payload": ..., "checksum": ...}; the checksum covers the payload dump.
void write_artifact(const std::filesystem::path& path, const json& payload);
/// Reads an artifact written by write_artifact; throws ChecksumError on mismatch.
json read_artifact(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace kam
