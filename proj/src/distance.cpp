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

#include "rfiqa/distance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "rfiqa/error.hpp"

namespace rfiqa {

std::string_view to_string(DistanceMetric metric) noexcept {
  switch (metric) {
    case DistanceMetric::Cosine: return "cosine";
    case DistanceMetric::Euclidean: return "euclidean";
    case DistanceMetric::Manhattan: return "manhattan";
    case DistanceMetric::JsDivergence: return "js";
  }
  return "unknown";
}

DistanceMetric parse_distance_metric(std::string_view name) {
  if (name == "cosine") return DistanceMetric::Cosine;
  if (name == "euclidean") return DistanceMetric::Euclidean;
  if (name == "manhattan") return DistanceMetric::Manhattan;
  if (name == "js") return DistanceMetric::JsDivergence;
  throw Error(ErrorCode::InvalidConfig, fmt::format("unknown distance metric '{}'", name));
}

namespace {

void check_lengths(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::LengthMismatch, fmt::format("vector lengths {} and {}", u.size(), v.size()));
  }
}

std::vector<double> softmax(std::span<const float> logits) {
  std::vector<double> p(logits.size());
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - peak);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

// Sum of p * log2(p / m) with 0 log 0 = 0.
double kl_to_mixture(const std::vector<double>& p, const std::vector<double>& m) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log2(p[i] / m[i]);
  }
  return kl;
}

}  // namespace

double cosine_distance(std::span<const float> u, std::span<const float> v) {
  check_lengths(u, v);
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  if (nu < kZeroNormEpsilon || nv < kZeroNormEpsilon) return 2.0;
  return std::clamp(1.0 - dot / (nu * nv), 0.0, 2.0);
}

double euclidean_distance(std::span<const float> u, std::span<const float> v) {
  check_lengths(u, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double manhattan_distance(std::span<const float> u, std::span<const float> v) {
  check_lengths(u, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sum += std::abs(static_cast<double>(u[i]) - static_cast<double>(v[i]));
  }
  return sum;
}

double js_divergence(std::span<const float> u_logits, std::span<const float> v_logits) {
  check_lengths(u_logits, v_logits);
  if (u_logits.empty()) throw Error(ErrorCode::LengthMismatch, "js_divergence of empty vectors");
  const auto p = softmax(u_logits);
  const auto q = softmax(v_logits);
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return std::clamp(0.5 * kl_to_mixture(p, m) + 0.5 * kl_to_mixture(q, m), 0.0, 1.0);
}

double distance(DistanceMetric metric, std::span<const float> u, std::span<const float> v) {
  switch (metric) {
    case DistanceMetric::Cosine: return cosine_distance(u, v);
    case DistanceMetric::Euclidean: return euclidean_distance(u, v);
    case DistanceMetric::Manhattan: return manhattan_distance(u, v);
    case DistanceMetric::JsDivergence: return js_divergence(u, v);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown distance metric");
}

}  // namespace rfiqa
