#include "lowrank/matrix_io.hpp"

#include "lowrank/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace lowrank::io {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'M', 'A', 'T'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw InputError("SMAT: truncated header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

void write_smat(std::ostream& out, const Block& M) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, static_cast<std::uint64_t>(M.rows()));
  put_u64(out, static_cast<std::uint64_t>(M.cols()));
  for (Eigen::Index i = 0; i < M.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(M.data()[i]));
  if (!out) throw InputError("SMAT: write failed");
}

Block read_smat(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InputError("SMAT: bad magic bytes");
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (rows == 0 || cols == 0 || rows > (1ULL << 20) || cols > (1ULL << 24)) {
    throw InputError("SMAT: implausible dimensions");
  }
  Block M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = std::bit_cast<double>(get_u64(in));
  if (!M.allFinite()) throw InputError("SMAT: non-finite entries");
  return M;
}

nlohmann::json to_json(const Block& M) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.size(); ++i) data.push_back(M.data()[i]);
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

Block from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw InputError("matrix JSON needs rows, cols and data");
  }
  const auto rows = j.at("rows").get<std::int64_t>();
  const auto cols = j.at("cols").get<std::int64_t>();
  const auto& data = j.at("data");
  if (rows <= 0 || cols <= 0 || !data.is_array() ||
      data.size() != static_cast<std::size_t>(rows * cols)) {
    throw InputError("matrix JSON: data length does not match rows*cols");
  }
  Block M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) {
    if (!data[i].is_number()) throw InputError("matrix JSON: non-numeric entry");
    M.data()[i] = data[i].get<double>();
  }
  if (!M.allFinite()) throw InputError("matrix JSON: non-finite entries");
  return M;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw InputError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void save_matrix(const std::filesystem::path& path, const Block& M) {
  if (path.extension() == ".json") {
    write_atomic(path, to_json(M).dump() + "\n");
    return;
  }
  std::ostringstream out(std::ios::binary);
  write_smat(out, M);
  write_atomic(path, out.str());
}

Block load_matrix(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  if (path.extension() == ".json") {
    try {
      return from_json(nlohmann::json::parse(raw));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  std::istringstream in(raw, std::ios::binary);
  return read_smat(in);
}

}  // namespace lowrank::io
