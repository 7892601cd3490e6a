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

namespace rfiqa {

enum class DistanceMetric { Cosine, Euclidean, Manhattan, JsDivergence };

std::string_view to_string(DistanceMetric metric) noexcept;
/// Accepts the CLI names: cosine, euclidean, manhattan, js.
DistanceMetric parse_distance_metric(std::string_view name);

// Norms below this are treated as a zero vector by cosine_distance.
inline constexpr double kZeroNormEpsilon = 1e-12;

/// 1 - u.v / (|u||v|), clamped to [0, 2]. A (near-)zero vector on either side
/// yields 2.0 so it can never be anybody's nearest neighbour.
double cosine_distance(std::span<const float> u, std::span<const float> v);
double euclidean_distance(std::span<const float> u, std::span<const float> v);
double manhattan_distance(std::span<const float> u, std::span<const float> v);

/// Jensen-Shannon divergence, in bits, between softmax(u) and softmax(v).
/// Both arguments are treated as logits. Result lies in [0, 1].
double js_divergence(std::span<const float> u_logits, std::span<const float> v_logits);

double distance(DistanceMetric metric, std::span<const float> u, std::span<const float> v);

}  // namespace rfiqa
