#include "xlqa/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "xlqa/errors.hpp"

namespace xlqa::checkpoint {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'X', 'L', 'Q', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw format_error("checkpoint " + path + ": truncated file");
  return v;
}

}  // namespace

void write_container(const std::string& path, const std::string& kind, const json& meta,
                     const std::vector<std::pair<std::string, const Matrix*>>& tensors) {
  json header;
  header["kind"] = kind;
  header["meta"] = meta;
  json manifest = json::array();
  for (const auto& [name, m] : tensors) {
    manifest.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  }
  header["tensors"] = std::move(manifest);
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write checkpoint file: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint64_t>(header_str.size()));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& [name, m] : tensors) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        write_raw(out, (*m)(r, c));
      }
    }
  }
  if (!out) throw input_error("short write on checkpoint file: " + path);
}

const Matrix& Container::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw format_error("checkpoint is missing tensor '" + name + "'");
}

Container read_container(const std::string& path, const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open checkpoint file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw format_error("checkpoint " + path + ": bad magic");
  }
  const auto version = read_raw<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw format_error("checkpoint " + path + ": unsupported version " + std::to_string(version));
  }
  const auto header_len = read_raw<std::uint64_t>(in, path);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw format_error("checkpoint " + path + ": truncated header");
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw format_error("checkpoint " + path + ": " + e.what());
  }
  if (header.at("kind").get<std::string>() != expected_kind) {
    throw format_error("checkpoint " + path + ": kind is '" +
                       header.at("kind").get<std::string>() + "', expected '" + expected_kind +
                       "'");
  }
  Container c;
  c.meta = header.at("meta");
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index col = 0; col < cols; ++col) {
        m(r, col) = read_raw<double>(in, path);
      }
    }
    c.tensors.emplace_back(name, std::move(m));
  }
  return c;
}

}  // namespace xlqa::checkpoint
