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

#include "topicreply/container.h"

#include <bit>
#include <cstring>

#include "topicreply/common.h"

namespace topicreply {

void ByteWriter::put_u32(uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::put_u64(uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::put_string(std::string_view s) {
  put_u32(static_cast<uint32_t>(s.size()));
  buf_.append(s);
}

void ByteReader::need(size_t n) const {
  if (bytes_.size() - pos_ < n) throw Error("container: truncated payload");
}

uint32_t ByteReader::get_u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 4;
  return v;
}

uint64_t ByteReader::get_u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  return v;
}

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::string ByteReader::get_string() {
  const uint32_t n = get_u32();
  need(n);
  std::string s(bytes_.substr(pos_, n));
  pos_ += n;
  return s;
}

std::string encode_container(const nlohmann::json& meta, std::string_view payload) {
  const std::string meta_text = meta.dump();
  ByteWriter w;
  w.put_u32(kContainerVersion);
  w.put_u64(meta_text.size());
  std::string out(kContainerMagic, 4);
  out += w.bytes();
  out += meta_text;
  out.append(payload);
  return out;
}

Container decode_container(std::string_view bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
    throw Error("container: bad magic");
  }
  ByteReader header(bytes.substr(4, 12));
  const uint32_t version = header.get_u32();
  if (version != kContainerVersion) {
    throw Error("container: unsupported version " + std::to_string(version));
  }
  const uint64_t meta_len = header.get_u64();
  if (meta_len > bytes.size() - 16) throw Error("container: truncated metadata");
  Container c;
  try {
    c.meta = nlohmann::json::parse(bytes.substr(16, meta_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("container: bad metadata JSON: ") + e.what());
  }
  c.payload = std::string(bytes.substr(16 + meta_len));
  return c;
}

}  // namespace topicreply
