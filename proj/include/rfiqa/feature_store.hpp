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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rfiqa/error.hpp"

namespace rfiqa {

enum class Role { Pristine, Distorted };
enum class StoreMode { Synthetic, Authentic };
enum class ScorePolarity { HigherBetter, LowerBetter };

std::string_view to_string(Role role) noexcept;
std::string_view to_string(StoreMode mode) noexcept;
std::string_view to_string(ScorePolarity polarity) noexcept;

Role parse_role(std::string_view text);
StoreMode parse_store_mode(std::string_view text);
ScorePolarity parse_score_polarity(std::string_view text);

/// One annotated image: identity, pristine-group membership and its exported
/// features. Pristine records carry no opinion score and may omit the
/// distortion vector.
struct FeatureRecord {
  std::string record_id;
  std::string group_id;
  Role role = Role::Distorted;
  std::vector<float> semantic;
  std::vector<float> distortion;
  std::optional<double> mos;
  std::optional<std::string> distortion_type;
  std::optional<int> distortion_level;

  bool operator==(const FeatureRecord&) const = default;
};

struct StoreManifest {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string dataset_name;
  StoreMode mode = StoreMode::Synthetic;
  ScorePolarity score_polarity = ScorePolarity::HigherBetter;
  std::size_t semantic_dim = 0;
  std::size_t distortion_dim = 0;
  std::size_t reduction_factor = 1;
  std::uint32_t format_version = kFormatVersion;
  // Name of the feature extractor that produced the vectors, when known.
  std::string extractor;

  bool operator==(const StoreManifest&) const = default;
};

/// A pristine parent and the distorted records derived from it. Indices point
/// into FeatureStore::records(). In authentic stores every group is a single
/// distorted record with group_id == record_id and no pristine.
struct Group {
  std::string group_id;
  std::optional<std::size_t> pristine;
  std::vector<std::size_t> distorted;
};

/// Immutable, indexed collection of feature records. Record order is the
/// insertion order and is the canonical order used for every tie-break.
class FeatureStore {
 public:
  std::span<const FeatureRecord> records() const noexcept { return records_; }
  std::span<const Group> groups() const noexcept { return groups_; }
  const StoreManifest& manifest() const noexcept { return manifest_; }

  const FeatureRecord& record(std::size_t index) const { return records_.at(index); }
  const Group* find_group(std::string_view group_id) const;
  std::optional<std::size_t> find_record(std::string_view record_id) const;

  std::size_t distorted_count() const noexcept;

  /// New validated store holding the records whose mask entry is true, in
  /// canonical order, with the same manifest.
  FeatureStore subset(const std::vector<bool>& keep) const;

  bool operator==(const FeatureStore& other) const {
    return manifest_ == other.manifest_ && records_ == other.records_;
  }

 private:
  friend FeatureStore build_store(std::vector<FeatureRecord> records, StoreManifest manifest);

  FeatureStore(std::vector<FeatureRecord> records, StoreManifest manifest);

  std::vector<FeatureRecord> records_;
  std::vector<Group> groups_;
  StoreManifest manifest_;
  std::unordered_map<std::string, std::size_t> record_index_;
  std::unordered_map<std::string, std::size_t> group_index_;
};

/// Validates records against the manifest and indexes them by group.
/// Throws Error with DuplicateRecordId, DimensionMismatch,
/// OrphanDistortedRecord, MissingMos, NonFiniteValue or InvalidManifest.
FeatureStore build_store(std::vector<FeatureRecord> records, StoreManifest manifest);

// On-disk layout: a directory holding manifest.json and vectors.bin.
inline constexpr std::string_view kManifestFileName = "manifest.json";
inline constexpr std::string_view kVectorsFileName = "vectors.bin";
inline constexpr std::string_view kVectorsMagic = "RFIQAFS1";

void save_store(const FeatureStore& store, const std::filesystem::path& dir);
FeatureStore load_store(const std::filesystem::path& dir);
FeatureStore load_store(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& vectors_path);

/// 1-D max pooling with window and stride `factor`; a trailing partial window
/// is kept, so a vector of length D becomes ceil(D / factor).
std::vector<float> max_pool(std::span<const float> values, std::size_t factor);

FeatureStore reduce_features(const FeatureStore& store, std::size_t factor);

struct SplitResult {
  std::vector<std::string> train_ids;  // distorted record ids
  std::vector<std::string> test_ids;
  std::vector<std::string> train_groups;
  std::vector<std::string> test_groups;
};

/// Seeded train/test partition. Synthetic stores are split by pristine group
/// so no content leaks across sides; authentic stores are split record-wise.
/// The shuffle is Fisher-Yates driven by SplitMix64 (see rfiqa/rng.hpp).
SplitResult split_dataset(const FeatureStore& store, double train_fraction, std::uint64_t seed);

/// Keeps round(fraction * n) units of the store, chosen by the same seeded
/// shuffle as split_dataset: whole groups for synthetic stores, single
/// records for authentic ones. fraction = 1 returns the store unchanged.
FeatureStore subsample_pool(const FeatureStore& store, double fraction, std::uint64_t seed);

}  // namespace rfiqa
