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

#include "rfiqa/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "rfiqa/error.hpp"

namespace rfiqa {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, fmt::format("lists of length {} and {}", a.size(), b.size()));
  }
  if (a.size() < min_len) {
    throw Error(ErrorCode::DegenerateInput, fmt::format("need at least {} values, got {}", min_len, a.size()));
  }
}

double mean(std::span<const double> x) {
  // Neumaier-compensated.
  double sum = 0.0, carry = 0.0;
  for (double v : x) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + carry) / static_cast<double>(x.size());
}

bool is_constant(std::span<const double> x) {
  return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t stop = start + 1;
    while (stop < order.size() && values[order[stop]] == values[order[start]]) ++stop;
    // positions start..stop-1 hold ranks start+1..stop
    const double shared = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t i = start; i < stop; ++i) ranks[order[i]] = shared;
    start = stop;
  }
  return ranks;
}

double plcc(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, 2);
  if (is_constant(pred) || is_constant(truth)) {
    throw Error(ErrorCode::DegenerateInput, "constant input list");
  }
  const double mp = mean(pred), mt = mean(truth);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i] - mp, dy = truth[i] - mt;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::DegenerateInput, "constant input list");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double srocc(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, 2);
  const auto rp = average_ranks(pred);
  const auto rt = average_ranks(truth);
  return plcc(rp, rt);
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::DegenerateInput, "median of an empty list");
  const auto n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace rfiqa
