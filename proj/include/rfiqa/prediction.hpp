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

#include <span>
#include <string_view>
#include <vector>

#include "rfiqa/retrieval.hpp"

namespace rfiqa {

enum class Aggregation { Simple, Weighted };

std::string_view to_string(Aggregation aggregation) noexcept;
/// Accepts the CLI names: simple, weighted.
Aggregation parse_aggregation(std::string_view name);

// Added to each instance's total distance before inversion so an exact
// duplicate gets a huge but finite weight.
inline constexpr double kWeightEpsilon = 1e-12;

struct PredictionResult {
  double score = 0.0;
  std::vector<RetrievedInstance> instances;
  Aggregation aggregation = Aggregation::Simple;
};

/// Mean opinion score of the instances; the divisor is the number actually
/// retrieved, which can be below k' * k'' on small pools.
double aggregate_simple(std::span<const RetrievedInstance> instances);

/// Inverse-distance weighted mean with w = 1 / (d_s + d_d + eps).
double aggregate_weighted(std::span<const RetrievedInstance> instances);

double aggregate(Aggregation aggregation, std::span<const RetrievedInstance> instances);

/// Retrieval followed by aggregation. An empty retrieval surfaces as
/// EmptyInstanceList.
PredictionResult predict(const FeatureStore& store, std::span<const float> query_semantic,
                         std::span<const float> query_distortion, const RetrievalConfig& config,
                         Aggregation aggregation);

}  // namespace rfiqa
