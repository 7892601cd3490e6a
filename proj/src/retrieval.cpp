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

#include "rfiqa/retrieval.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

namespace rfiqa {

std::string_view to_string(RetrievalMode mode) noexcept {
  return mode == RetrievalMode::Hierarchical ? "hierarchical" : "flat";
}

RetrievalMode parse_retrieval_mode(std::string_view name) {
  if (name == "hierarchical") return RetrievalMode::Hierarchical;
  if (name == "flat") return RetrievalMode::FlatConcat;
  throw Error(ErrorCode::InvalidConfig, fmt::format("unknown retrieval mode '{}'", name));
}

void validate(const RetrievalConfig& config) {
  if (config.k_prime < 1 || config.k_double_prime < 1) {
    throw Error(ErrorCode::InvalidConfig, "k_prime and k_double_prime must be >= 1");
  }
}

namespace {

// (distance, canonical record index)
using Candidate = std::pair<double, std::size_t>;

void keep_nearest(std::vector<Candidate>& candidates, std::size_t k) {
  k = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end());
  candidates.resize(k);
}

void check_dim(std::span<const float> query, std::size_t expected, const char* what) {
  if (query.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} query has length {}, store expects {}", what, query.size(), expected));
  }
}

}  // namespace

std::vector<PristineMatch> retrieve_pristine(const FeatureStore& store,
                                             std::span<const float> query_semantic,
                                             std::size_t k_prime, DistanceMetric metric,
                                             const std::optional<std::string>& exclude_group) {
  if (store.manifest().mode != StoreMode::Synthetic) {
    throw Error(ErrorCode::WrongMode, "semantic stage needs a synthetic store with pristine groups");
  }
  check_dim(query_semantic, store.manifest().semantic_dim, "semantic");

  const auto groups = store.groups();
  std::vector<Candidate> candidates;
  std::vector<std::size_t> group_of_pristine(store.records().size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    if (!group.pristine || group.distorted.empty()) continue;
    if (exclude_group && group.group_id == *exclude_group) continue;
    const auto idx = *group.pristine;
    group_of_pristine[idx] = g;
    candidates.emplace_back(distance(metric, query_semantic, store.record(idx).semantic), idx);
  }
  if (candidates.empty()) throw Error(ErrorCode::NoEligibleGroups, "no pristine group is eligible");
  keep_nearest(candidates, k_prime);

  std::vector<PristineMatch> matches;
  matches.reserve(candidates.size());
  for (const auto& [d, idx] : candidates) {
    const auto g = group_of_pristine[idx];
    matches.push_back(PristineMatch{groups[g].group_id, g, d});
  }
  return matches;
}

std::vector<RetrievedInstance> retrieve_distorted(const FeatureStore& store, std::string_view group_id,
                                                  std::span<const float> query_distortion,
                                                  std::size_t k_double_prime, DistanceMetric metric) {
  const Group* group = store.find_group(group_id);
  if (!group) throw Error(ErrorCode::UnknownGroup, fmt::format("group '{}'", group_id));
  check_dim(query_distortion, store.manifest().distortion_dim, "distortion");

  std::vector<Candidate> candidates;
  candidates.reserve(group->distorted.size());
  for (auto idx : group->distorted) {
    candidates.emplace_back(distance(metric, query_distortion, store.record(idx).distortion), idx);
  }
  keep_nearest(candidates, k_double_prime);

  std::vector<RetrievedInstance> out;
  out.reserve(candidates.size());
  for (const auto& [d, idx] : candidates) {
    const auto& r = store.record(idx);
    out.push_back(RetrievedInstance{r.record_id, r.group_id, idx, *r.mos, 0.0, d});
  }
  return out;
}

std::vector<RetrievedInstance> retrieve_hierarchical(const FeatureStore& store,
                                                     std::span<const float> query_semantic,
                                                     std::span<const float> query_distortion,
                                                     const RetrievalConfig& config) {
  validate(config);
  check_dim(query_distortion, store.manifest().distortion_dim, "distortion");
  const auto groups =
      retrieve_pristine(store, query_semantic, config.k_prime, config.metric, config.exclude_group);

  std::vector<RetrievedInstance> out;
  out.reserve(groups.size() * config.k_double_prime);
  for (const auto& match : groups) {
    for (auto& inst :
         retrieve_distorted(store, match.group_id, query_distortion, config.k_double_prime, config.metric)) {
      inst.d_s = match.d_s;
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::vector<RetrievedInstance> retrieve_flat_concat(const FeatureStore& store,
                                                    std::span<const float> query_semantic,
                                                    std::span<const float> query_distortion,
                                                    const RetrievalConfig& config) {
  validate(config);
  const auto& m = store.manifest();
  check_dim(query_semantic, m.semantic_dim, "semantic");
  check_dim(query_distortion, m.distortion_dim, "distortion");

  std::vector<float> query(query_semantic.begin(), query_semantic.end());
  query.insert(query.end(), query_distortion.begin(), query_distortion.end());
  std::vector<float> joined(query.size());

  const auto records = store.records();
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.role != Role::Distorted) continue;
    if (config.exclude_group && r.group_id == *config.exclude_group) continue;
    std::copy(r.semantic.begin(), r.semantic.end(), joined.begin());
    std::copy(r.distortion.begin(), r.distortion.end(), joined.begin() + static_cast<std::ptrdiff_t>(m.semantic_dim));
    candidates.emplace_back(distance(config.metric, query, joined), i);
  }
  keep_nearest(candidates, config.k_prime * config.k_double_prime);

  std::vector<RetrievedInstance> out;
  out.reserve(candidates.size());
  for (const auto& [d, idx] : candidates) {
    const auto& r = records[idx];
    out.push_back(RetrievedInstance{r.record_id, r.group_id, idx, *r.mos, d, 0.0});
  }
  return out;
}

std::vector<RetrievedInstance> retrieve(const FeatureStore& store, std::span<const float> query_semantic,
                                        std::span<const float> query_distortion,
                                        const RetrievalConfig& config) {
  return config.mode == RetrievalMode::Hierarchical
             ? retrieve_hierarchical(store, query_semantic, query_distortion, config)
             : retrieve_flat_concat(store, query_semantic, query_distortion, config);
}

}  // namespace rfiqa
