// Copyright 2026 The topicreply Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// TPAM container: "TPAM" | u32 version | u64 metadata length | JSON metadata
// | payload. All integers little-endian. The payload layout is owned by the
// writer (topic model counts + vocabulary, or predictor weight matrices).

#ifndef TOPICREPLY_CONTAINER_H_
#define TOPICREPLY_CONTAINER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

namespace topicreply {

inline constexpr char kContainerMagic[4] = {'T', 'P', 'A', 'M'};
inline constexpr uint32_t kContainerVersion = 1;

struct Container {
  nlohmann::json meta;
  std::string payload;
};

std::string encode_container(const nlohmann::json& meta, std::string_view payload);
Container decode_container(std::string_view bytes);

// Little-endian payload writer.
class ByteWriter {
 public:
  void put_u32(uint32_t v);
  void put_u64(uint64_t v);
  void put_f64(double v);
  void put_string(std::string_view s);  // u32 length prefix + bytes
  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  uint32_t get_u32();
  uint64_t get_u64();
  double get_f64();
  std::string get_string();
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(size_t n) const;
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace topicreply

#endif  // TOPICREPLY_CONTAINER_H_
