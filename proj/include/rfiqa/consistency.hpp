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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfiqa/feature_store.hpp"

namespace rfiqa {

struct SimilarityPair {
  std::string group_a;
  std::string group_b;
  double similarity = 0.0;  // cosine similarity of the pristine semantic vectors
  // 1-based position of b in a's top-n list and of a in b's, when present.
  std::optional<std::size_t> rank_in_a;
  std::optional<std::size_t> rank_in_b;
};

/// For every pristine group, its top_n most similar other groups. A pair that
/// appears in both groups' lists is emitted once, with both ranks filled in.
/// Order: groups in canonical order, each group's list by descending similarity.
std::vector<SimilarityPair> pristine_similarity_pairs(const FeatureStore& store, std::size_t top_n);

struct AlignedCorrelation {
  double srocc = 0.0;
  std::size_t n_aligned = 0;
};

/// SROCC between the opinion scores of two groups' distorted records matched
/// on (distortion_type, distortion_level). When a group holds several records
/// with the same tags the first in canonical order is used.
AlignedCorrelation aligned_quality_correlation(const FeatureStore& store, std::string_view group_a,
                                               std::string_view group_b);

struct ConsistencyPoint {
  std::string group_a;
  std::string group_b;
  double semantic_similarity = 0.0;
  double aligned_srocc = 0.0;
  std::size_t n_aligned = 0;

  bool operator==(const ConsistencyPoint&) const = default;
};

struct ConsistencyScatter {
  std::vector<ConsistencyPoint> points;
  // Pairs dropped because their alignment was too small or constant.
  std::size_t skipped = 0;
};

/// pristine_similarity_pairs joined with aligned_quality_correlation.
ConsistencyScatter consistency_scatter(const FeatureStore& store, std::size_t top_n);

struct SiEvaluation {
  double srocc = 0.0;
  double plcc = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
  // false when the logistic fit diverged and raw PLCC / RMSE are reported.
  bool fitted = true;
};

/// Similar-instance predictor: every distorted record of a paired group is
/// predicted by the opinion score of its partner group's record with the same
/// tags. SROCC is raw; PLCC and RMSE follow a five-parameter logistic fit.
SiEvaluation si_predictor_eval(const FeatureStore& store,
                               const std::map<std::string, std::string>& pairing);

/// Reads "group,partner" lines; '#' lines and an optional header are skipped.
std::map<std::string, std::string> load_pairing(const std::filesystem::path& path);

/// Writes columns group_a,group_b,semantic_similarity,aligned_srocc,n_aligned
/// sorted by similarity, descending. `preamble`, when given, is written first
/// as '#'-prefixed comment lines.
void emit_scatter(std::vector<ConsistencyPoint> points, const std::filesystem::path& path,
                  std::string_view preamble = {});

std::vector<ConsistencyPoint> parse_scatter(const std::filesystem::path& path);

}  // namespace rfiqa
