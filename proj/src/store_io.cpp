//
// Copyright (C) 2026 The rfiqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// manifest.json + vectors.bin persistence.
//
// vectors.bin layout:
//   bytes 0..7   magic "RFIQAFS1"
//   bytes 8..11  format version, uint32 little-endian
//   then, per record in canonical order, the semantic vector followed by the
//   distortion vector as packed little-endian IEEE-754 binary32.
// manifest.json repeats the byte offset of every vector; load rejects any
// mismatch between the offsets, the dimensions and the file length.

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <json.hpp>

#include "rfiqa/feature_store.hpp"

namespace rfiqa {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kHeaderBytes = 12;

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_floats(std::string& out, std::span<const float> values) {
  for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, fmt::format("read failed for '{}'", path.string()));
  return data;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}'", path.string()));
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write failed for '{}'", path.string()));
}

template <typename T>
T field(const Json& obj, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::CorruptManifest, fmt::format("field '{}': {}", key, e.what()));
  }
}

template <typename T>
std::optional<T> optional_field(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::CorruptManifest, fmt::format("field '{}': {}", key, e.what()));
  }
}

}  // namespace

void save_store(const FeatureStore& store, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  const StoreManifest& m = store.manifest();
  std::string blob(kVectorsMagic);
  put_u32(blob, m.format_version);

  Json records = Json::array();
  for (const auto& r : store.records()) {
    Json rec;
    rec["record_id"] = r.record_id;
    rec["group_id"] = r.group_id;
    rec["role"] = to_string(r.role);
    rec["mos"] = r.mos ? Json(*r.mos) : Json(nullptr);
    rec["distortion_type"] = r.distortion_type ? Json(*r.distortion_type) : Json(nullptr);
    rec["distortion_level"] = r.distortion_level ? Json(*r.distortion_level) : Json(nullptr);
    rec["semantic_offset"] = blob.size();
    put_floats(blob, r.semantic);
    rec["distortion_offset"] = blob.size();
    rec["distortion_length"] = r.distortion.size();
    put_floats(blob, r.distortion);
    records.push_back(std::move(rec));
  }

  Json doc;
  doc["format_version"] = m.format_version;
  doc["dataset_name"] = m.dataset_name;
  doc["mode"] = to_string(m.mode);
  doc["score_polarity"] = to_string(m.score_polarity);
  doc["semantic_dim"] = m.semantic_dim;
  doc["distortion_dim"] = m.distortion_dim;
  doc["reduction_factor"] = m.reduction_factor;
  doc["extractor"] = m.extractor;
  doc["vectors_bytes"] = blob.size();
  doc["records"] = std::move(records);

  write_file(dir / kVectorsFileName, blob);
  write_file(dir / kManifestFileName, doc.dump(2) + "\n");
}

FeatureStore load_store(const std::filesystem::path& dir) {
  return load_store(dir / kManifestFileName, dir / kVectorsFileName);
}

FeatureStore load_store(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& vectors_path) {
  const std::string manifest_text = read_file(manifest_path);
  const std::string blob = read_file(vectors_path);

  if (blob.size() < kVectorsMagic.size() ||
      std::memcmp(blob.data(), kVectorsMagic.data(), kVectorsMagic.size()) != 0) {
    throw Error(ErrorCode::BadMagic, fmt::format("'{}' is not a feature vector file", vectors_path.string()));
  }
  if (blob.size() < kHeaderBytes) throw Error(ErrorCode::CorruptManifest, "vectors file header truncated");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint32_t blob_version = get_u32(bytes + 8);
  if (blob_version != StoreManifest::kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, fmt::format("vectors file version {}", blob_version));
  }

  Json doc;
  try {
    doc = Json::parse(manifest_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::CorruptManifest, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::CorruptManifest, "manifest is not an object");

  StoreManifest m;
  m.format_version = field<std::uint32_t>(doc, "format_version");
  if (m.format_version != StoreManifest::kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, fmt::format("manifest version {}", m.format_version));
  }
  m.dataset_name = field<std::string>(doc, "dataset_name");
  m.mode = parse_store_mode(field<std::string>(doc, "mode"));
  m.score_polarity = parse_score_polarity(field<std::string>(doc, "score_polarity"));
  m.semantic_dim = field<std::size_t>(doc, "semantic_dim");
  m.distortion_dim = field<std::size_t>(doc, "distortion_dim");
  m.reduction_factor = field<std::size_t>(doc, "reduction_factor");
  m.extractor = optional_field<std::string>(doc, "extractor").value_or("");
  if (auto declared = optional_field<std::size_t>(doc, "vectors_bytes"); declared && *declared != blob.size()) {
    throw Error(ErrorCode::CorruptManifest,
                fmt::format("manifest declares {} vector bytes, file has {}", *declared, blob.size()));
  }

  const auto read_vector = [&](std::size_t offset, std::size_t length, const std::string& id) {
    const std::size_t end = offset + length * sizeof(float);
    if (end > blob.size()) {
      throw Error(ErrorCode::CorruptManifest,
                  fmt::format("record '{}' vector runs past end of vectors file", id));
    }
    std::vector<float> values(length);
    for (std::size_t i = 0; i < length; ++i) {
      values[i] = std::bit_cast<float>(get_u32(bytes + offset + i * sizeof(float)));
    }
    return values;
  };

  const auto it = doc.find("records");
  if (it == doc.end() || !it->is_array()) throw Error(ErrorCode::CorruptManifest, "missing records array");

  std::vector<FeatureRecord> records;
  records.reserve(it->size());
  std::size_t cursor = kHeaderBytes;
  for (const auto& rec : *it) {
    FeatureRecord r;
    r.record_id = field<std::string>(rec, "record_id");
    r.group_id = field<std::string>(rec, "group_id");
    r.role = parse_role(field<std::string>(rec, "role"));
    r.mos = optional_field<double>(rec, "mos");
    r.distortion_type = optional_field<std::string>(rec, "distortion_type");
    r.distortion_level = optional_field<int>(rec, "distortion_level");

    const auto semantic_offset = field<std::size_t>(rec, "semantic_offset");
    if (semantic_offset != cursor) {
      throw Error(ErrorCode::CorruptManifest,
                  fmt::format("record '{}' semantic_offset {} (expected {})", r.record_id,
                              semantic_offset, cursor));
    }
    r.semantic = read_vector(semantic_offset, m.semantic_dim, r.record_id);
    cursor += m.semantic_dim * sizeof(float);

    const auto distortion_offset = field<std::size_t>(rec, "distortion_offset");
    const auto distortion_length = field<std::size_t>(rec, "distortion_length");
    if (distortion_offset != cursor) {
      throw Error(ErrorCode::CorruptManifest,
                  fmt::format("record '{}' distortion_offset {} (expected {})", r.record_id,
                              distortion_offset, cursor));
    }
    if (distortion_length != 0 && distortion_length != m.distortion_dim) {
      throw Error(ErrorCode::CorruptManifest,
                  fmt::format("record '{}' distortion_length {} (store dim {})", r.record_id,
                              distortion_length, m.distortion_dim));
    }
    r.distortion = read_vector(distortion_offset, distortion_length, r.record_id);
    cursor += distortion_length * sizeof(float);
    records.push_back(std::move(r));
  }
  if (cursor != blob.size()) {
    throw Error(ErrorCode::CorruptManifest,
                fmt::format("vectors file has {} bytes, manifest accounts for {}", blob.size(), cursor));
  }
  return build_store(std::move(records), std::move(m));
}

}  // namespace rfiqa
