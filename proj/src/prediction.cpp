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

#include "rfiqa/prediction.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace rfiqa {

std::string_view to_string(Aggregation aggregation) noexcept {
  return aggregation == Aggregation::Simple ? "simple" : "weighted";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "simple") return Aggregation::Simple;
  if (name == "weighted") return Aggregation::Weighted;
  throw Error(ErrorCode::InvalidConfig, fmt::format("unknown aggregation '{}'", name));
}

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void require_instances(std::span<const RetrievedInstance> instances) {
  if (instances.empty()) throw Error(ErrorCode::EmptyInstanceList, "no instances to aggregate");
}

// Keeps the result inside the convex hull of the scores despite rounding.
double clamp_to_scores(double value, std::span<const RetrievedInstance> instances) {
  const auto [lo, hi] = std::minmax_element(
      instances.begin(), instances.end(), [](const auto& a, const auto& b) { return a.mos < b.mos; });
  return std::clamp(value, lo->mos, hi->mos);
}

}  // namespace

double aggregate_simple(std::span<const RetrievedInstance> instances) {
  require_instances(instances);
  CompensatedSum total;
  for (const auto& inst : instances) total.add(inst.mos);
  return clamp_to_scores(total.value() / static_cast<double>(instances.size()), instances);
}

double aggregate_weighted(std::span<const RetrievedInstance> instances) {
  require_instances(instances);
  CompensatedSum weighted, weights;
  for (const auto& inst : instances) {
    const double w = 1.0 / (inst.d_s + inst.d_d + kWeightEpsilon);
    weighted.add(w * inst.mos);
    weights.add(w);
  }
  return clamp_to_scores(weighted.value() / weights.value(), instances);
}

double aggregate(Aggregation aggregation, std::span<const RetrievedInstance> instances) {
  return aggregation == Aggregation::Simple ? aggregate_simple(instances) : aggregate_weighted(instances);
}

PredictionResult predict(const FeatureStore& store, std::span<const float> query_semantic,
                         std::span<const float> query_distortion, const RetrievalConfig& config,
                         Aggregation aggregation) {
  PredictionResult result;
  result.aggregation = aggregation;
  try {
    result.instances = retrieve(store, query_semantic, query_distortion, config);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoEligibleGroups) throw;
    throw Error(ErrorCode::EmptyInstanceList, "retrieval pool is empty");
  }
  result.score = aggregate(aggregation, result.instances);
  return result;
}

}  // namespace rfiqa
