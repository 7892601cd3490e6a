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

#include "rfiqa/feature_store.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rfiqa/rng.hpp"

namespace rfiqa {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateRecordId: return "DuplicateRecordId";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OrphanDistortedRecord: return "OrphanDistortedRecord";
    case ErrorCode::MissingMos: return "MissingMos";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptManifest: return "CorruptManifest";
    case ErrorCode::InvalidFactor: return "InvalidFactor";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoEligibleGroups: return "NoEligibleGroups";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::UnknownRecord: return "UnknownRecord";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyInstanceList: return "EmptyInstanceList";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::InsufficientGroups: return "InsufficientGroups";
    case ErrorCode::InsufficientAlignment: return "InsufficientAlignment";
    case ErrorCode::MissingAlignment: return "MissingAlignment";
  }
  return "UnknownError";
}

std::string_view to_string(Role role) noexcept {
  return role == Role::Pristine ? "pristine" : "distorted";
}

std::string_view to_string(StoreMode mode) noexcept {
  return mode == StoreMode::Synthetic ? "synthetic" : "authentic";
}

std::string_view to_string(ScorePolarity polarity) noexcept {
  return polarity == ScorePolarity::HigherBetter ? "higher_better" : "lower_better";
}

Role parse_role(std::string_view text) {
  if (text == "pristine") return Role::Pristine;
  if (text == "distorted") return Role::Distorted;
  throw Error(ErrorCode::InvalidManifest, fmt::format("unknown role '{}'", text));
}

StoreMode parse_store_mode(std::string_view text) {
  if (text == "synthetic") return StoreMode::Synthetic;
  if (text == "authentic") return StoreMode::Authentic;
  throw Error(ErrorCode::InvalidManifest, fmt::format("unknown store mode '{}'", text));
}

ScorePolarity parse_score_polarity(std::string_view text) {
  if (text == "higher_better") return ScorePolarity::HigherBetter;
  if (text == "lower_better") return ScorePolarity::LowerBetter;
  throw Error(ErrorCode::InvalidManifest, fmt::format("unknown score polarity '{}'", text));
}

namespace {

bool all_finite(std::span<const float> values) {
  return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

void validate_manifest(const StoreManifest& manifest) {
  if (manifest.semantic_dim < 1 || manifest.distortion_dim < 1) {
    throw Error(ErrorCode::InvalidManifest, "semantic_dim and distortion_dim must be >= 1");
  }
  if (manifest.reduction_factor < 1) {
    throw Error(ErrorCode::InvalidManifest, "reduction_factor must be >= 1");
  }
  if (manifest.format_version != StoreManifest::kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                fmt::format("format_version {} (expected {})", manifest.format_version,
                            StoreManifest::kFormatVersion));
  }
}

void validate_record(const FeatureRecord& r, const StoreManifest& manifest) {
  if (r.record_id.empty()) throw Error(ErrorCode::InvalidManifest, "empty record_id");
  if (r.group_id.empty()) {
    throw Error(ErrorCode::InvalidManifest, fmt::format("record '{}' has no group_id", r.record_id));
  }
  if (r.semantic.size() != manifest.semantic_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("record '{}' semantic length {} != {}", r.record_id, r.semantic.size(),
                            manifest.semantic_dim));
  }
  const bool distortion_optional = r.role == Role::Pristine && r.distortion.empty();
  if (!distortion_optional && r.distortion.size() != manifest.distortion_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("record '{}' distortion length {} != {}", r.record_id,
                            r.distortion.size(), manifest.distortion_dim));
  }
  if (!all_finite(r.semantic) || !all_finite(r.distortion)) {
    throw Error(ErrorCode::NonFiniteValue,
                fmt::format("record '{}' has a NaN or Inf feature", r.record_id));
  }
  if (r.role == Role::Distorted && (!r.mos || !std::isfinite(*r.mos))) {
    throw Error(ErrorCode::MissingMos,
                fmt::format("distorted record '{}' has no finite mos", r.record_id));
  }
  if (r.distortion_level && *r.distortion_level < 1) {
    throw Error(ErrorCode::InvalidManifest,
                fmt::format("record '{}' distortion_level must be >= 1", r.record_id));
  }
}

}  // namespace

FeatureStore build_store(std::vector<FeatureRecord> records, StoreManifest manifest) {
  if (records.empty()) throw Error(ErrorCode::InvalidManifest, "store has no records");
  validate_manifest(manifest);
  for (auto& r : records) {
    if (manifest.mode == StoreMode::Authentic && r.group_id.empty()) r.group_id = r.record_id;
    validate_record(r, manifest);
  }
  return FeatureStore(std::move(records), std::move(manifest));
}

FeatureStore::FeatureStore(std::vector<FeatureRecord> records, StoreManifest manifest)
    : records_(std::move(records)), manifest_(std::move(manifest)) {
  record_index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!record_index_.emplace(r.record_id, i).second) {
      throw Error(ErrorCode::DuplicateRecordId, fmt::format("record_id '{}'", r.record_id));
    }
    auto [it, inserted] = group_index_.emplace(r.group_id, groups_.size());
    if (inserted) groups_.push_back(Group{r.group_id, std::nullopt, {}});
    Group& g = groups_[it->second];
    if (r.role == Role::Pristine) {
      if (g.pristine) {
        throw Error(ErrorCode::InvalidManifest,
                    fmt::format("group '{}' has more than one pristine record", g.group_id));
      }
      g.pristine = i;
    } else {
      g.distorted.push_back(i);
    }
  }
  if (manifest_.mode == StoreMode::Synthetic) {
    for (const auto& g : groups_) {
      if (!g.pristine) {
        throw Error(ErrorCode::OrphanDistortedRecord,
                    fmt::format("group '{}' has distorted records but no pristine", g.group_id));
      }
    }
  }
}

const Group* FeatureStore::find_group(std::string_view group_id) const {
  auto it = group_index_.find(std::string(group_id));
  return it == group_index_.end() ? nullptr : &groups_[it->second];
}

std::optional<std::size_t> FeatureStore::find_record(std::string_view record_id) const {
  auto it = record_index_.find(std::string(record_id));
  if (it == record_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureStore::distorted_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [](const auto& r) { return r.role == Role::Distorted; }));
}

FeatureStore FeatureStore::subset(const std::vector<bool>& keep) const {
  if (keep.size() != records_.size()) {
    throw Error(ErrorCode::LengthMismatch, "subset mask length differs from record count");
  }
  std::vector<FeatureRecord> kept;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (keep[i]) kept.push_back(records_[i]);
  }
  return build_store(std::move(kept), manifest_);
}

std::vector<float> max_pool(std::span<const float> values, std::size_t factor) {
  if (factor == 0) throw Error(ErrorCode::InvalidFactor, "reduction factor must be >= 1");
  std::vector<float> pooled;
  pooled.reserve((values.size() + factor - 1) / factor);
  for (std::size_t start = 0; start < values.size(); start += factor) {
    const auto stop = std::min(start + factor, values.size());
    pooled.push_back(*std::max_element(values.begin() + start, values.begin() + stop));
  }
  return pooled;
}

FeatureStore reduce_features(const FeatureStore& store, std::size_t factor) {
  if (factor == 0) throw Error(ErrorCode::InvalidFactor, "reduction factor must be >= 1");
  StoreManifest manifest = store.manifest();
  manifest.semantic_dim = (manifest.semantic_dim + factor - 1) / factor;
  manifest.distortion_dim = (manifest.distortion_dim + factor - 1) / factor;
  manifest.reduction_factor *= factor;

  std::vector<FeatureRecord> records(store.records().begin(), store.records().end());
  if (factor > 1) {
    for (auto& r : records) {
      r.semantic = max_pool(r.semantic, factor);
      r.distortion = max_pool(r.distortion, factor);
    }
  }
  return build_store(std::move(records), std::move(manifest));
}

namespace {

// Shared unit selection for split_dataset and subsample_pool: shuffled group
// indices (synthetic) or distorted record indices (authentic).
std::vector<std::size_t> shuffled_units(const FeatureStore& store, std::uint64_t seed) {
  std::vector<std::size_t> units;
  if (store.manifest().mode == StoreMode::Synthetic) {
    units.resize(store.groups().size());
    for (std::size_t i = 0; i < units.size(); ++i) units[i] = i;
  } else {
    for (std::size_t i = 0; i < store.records().size(); ++i) {
      if (store.records()[i].role == Role::Distorted) units.push_back(i);
    }
  }
  // Shuffle from id order so the split does not depend on record order.
  const auto id_of = [&](std::size_t u) -> const std::string& {
    return store.manifest().mode == StoreMode::Synthetic ? store.groups()[u].group_id
                                                         : store.records()[u].record_id;
  };
  std::sort(units.begin(), units.end(), [&](std::size_t a, std::size_t b) { return id_of(a) < id_of(b); });
  seeded_shuffle(units, seed);
  return units;
}

std::size_t rounded_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

SplitResult split_dataset(const FeatureStore& store, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("train_fraction {} outside (0, 1)", train_fraction));
  }
  const auto units = shuffled_units(store, seed);
  const auto n_train = std::min(rounded_count(train_fraction, units.size()), units.size());

  SplitResult split;
  const auto records = store.records();
  if (store.manifest().mode == StoreMode::Synthetic) {
    for (std::size_t u = 0; u < units.size(); ++u) {
      const Group& g = store.groups()[units[u]];
      const bool train = u < n_train;
      (train ? split.train_groups : split.test_groups).push_back(g.group_id);
      auto& ids = train ? split.train_ids : split.test_ids;
      for (auto idx : g.distorted) ids.push_back(records[idx].record_id);
    }
  } else {
    for (std::size_t u = 0; u < units.size(); ++u) {
      const auto& r = records[units[u]];
      const bool train = u < n_train;
      (train ? split.train_ids : split.test_ids).push_back(r.record_id);
      (train ? split.train_groups : split.test_groups).push_back(r.group_id);
    }
  }
  if (split.train_ids.empty() || split.test_ids.empty()) {
    throw Error(ErrorCode::EmptySplit,
                fmt::format("fraction {} over {} units leaves {} train / {} test records",
                            train_fraction, units.size(), split.train_ids.size(),
                            split.test_ids.size()));
  }
  return split;
}

FeatureStore subsample_pool(const FeatureStore& store, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("pool fraction {} outside (0, 1]", fraction));
  }
  if (fraction == 1.0) return store;
  const auto units = shuffled_units(store, seed);
  const auto n_keep = std::max<std::size_t>(1, rounded_count(fraction, units.size()));

  std::vector<bool> keep(store.records().size(), false);
  for (std::size_t u = 0; u < n_keep && u < units.size(); ++u) {
    if (store.manifest().mode == StoreMode::Synthetic) {
      const Group& g = store.groups()[units[u]];
      if (g.pristine) keep[*g.pristine] = true;
      for (auto idx : g.distorted) keep[idx] = true;
    } else {
      keep[units[u]] = true;
    }
  }
  return store.subset(keep);
}

}  // namespace rfiqa
