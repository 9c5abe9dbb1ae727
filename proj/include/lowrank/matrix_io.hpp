#pragma once

// Matrix persistence. Binary "SMAT" container: 4 magic bytes, rows and cols
// as little-endian uint64, then rows*cols little-endian IEEE-754 doubles in
// row-major order. JSON alternative: {"rows": r, "cols": c, "data": [...]}.

#include "lowrank/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace lowrank::io {

/// Generic row-major block; SMAT is also used for non-square payloads.
using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void write_smat(std::ostream& out, const Block& M);
Block read_smat(std::istream& in);

nlohmann::json to_json(const Block& M);
Block from_json(const nlohmann::json& j);

/// Picks the format from the extension: ".json" is JSON, anything else SMAT.
void save_matrix(const std::filesystem::path& path, const Block& M);
Block load_matrix(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace lowrank::io
