#ifndef XLQA_CHECKPOINT_HPP
#define XLQA_CHECKPOINT_HPP

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xlqa/autodiff.hpp"

namespace xlqa::checkpoint {

using autodiff::Matrix;

// Binary named-tensor container: 8-byte magic, u32 version, u64 JSON header
// length, UTF-8 JSON header, then row-major little-endian doubles per tensor
// in manifest order. Write followed by read is bit-exact.
void write_container(const std::string& path, const std::string& kind,
                     const nlohmann::json& meta,
                     const std::vector<std::pair<std::string, const Matrix*>>& tensors);

struct Container {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& tensor(const std::string& name) const;
};

Container read_container(const std::string& path, const std::string& expected_kind);

}  // namespace xlqa::checkpoint

#endif  // XLQA_CHECKPOINT_HPP
