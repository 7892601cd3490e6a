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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfiqa/distance.hpp"
#include "rfiqa/feature_store.hpp"

namespace rfiqa {

enum class RetrievalMode { Hierarchical, FlatConcat };

std::string_view to_string(RetrievalMode mode) noexcept;
/// Accepts the CLI names: hierarchical, flat.
RetrievalMode parse_retrieval_mode(std::string_view name);

struct RetrievalConfig {
  std::size_t k_prime = 10;
  std::size_t k_double_prime = 1;
  DistanceMetric metric = DistanceMetric::Cosine;
  RetrievalMode mode = RetrievalMode::Hierarchical;
  // Records of this group are never returned. In authentic stores the group
  // id of a record is its record id, so this doubles as self-exclusion.
  std::optional<std::string> exclude_group;
};

/// Throws InvalidConfig unless k_prime and k_double_prime are >= 1.
void validate(const RetrievalConfig& config);

struct PristineMatch {
  std::string group_id;
  std::size_t group_index = 0;
  double d_s = 0.0;
};

struct RetrievedInstance {
  std::string record_id;
  std::string group_id;
  std::size_t record_index = 0;
  double mos = 0.0;
  // Semantic distance to the instance's pristine parent; in flat mode the
  // single concatenated-feature distance.
  double d_s = 0.0;
  // Distortion distance; always 0 in flat mode.
  double d_d = 0.0;
};

/// Semantic stage: the k_prime nearest pristine groups, ascending by distance
/// with ties resolved by canonical record order. Only groups that own at least
/// one distorted record are eligible. Returns fewer when fewer are eligible.
std::vector<PristineMatch> retrieve_pristine(const FeatureStore& store,
                                             std::span<const float> query_semantic,
                                             std::size_t k_prime, DistanceMetric metric,
                                             const std::optional<std::string>& exclude_group);

/// Distortion stage inside one group: the k_double_prime nearest distorted
/// records. The returned instances carry d_s = 0; the caller fills it in.
std::vector<RetrievedInstance> retrieve_distorted(const FeatureStore& store, std::string_view group_id,
                                                  std::span<const float> query_distortion,
                                                  std::size_t k_double_prime, DistanceMetric metric);

std::vector<RetrievedInstance> retrieve_hierarchical(const FeatureStore& store,
                                                     std::span<const float> query_semantic,
                                                     std::span<const float> query_distortion,
                                                     const RetrievalConfig& config);

/// Single-stage search over concatenated (semantic || distortion) features of
/// every distorted record; returns the k_prime * k_double_prime nearest.
std::vector<RetrievedInstance> retrieve_flat_concat(const FeatureStore& store,
                                                    std::span<const float> query_semantic,
                                                    std::span<const float> query_distortion,
                                                    const RetrievalConfig& config);

/// Dispatches on config.mode.
std::vector<RetrievedInstance> retrieve(const FeatureStore& store, std::span<const float> query_semantic,
                                        std::span<const float> query_distortion,
                                        const RetrievalConfig& config);

}  // namespace rfiqa
