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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfiqa/distance.hpp"

using namespace rfiqa;
using V = std::vector<float>;

TEST_SUITE("distance") {

TEST_CASE("cosine distance examples") {
  CHECK(cosine_distance(V{3, 4}, V{3, 4}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(cosine_distance(V{1, 0}, V{0, 1}) == doctest::Approx(1.0));
  // 1 - 32 / (sqrt(14) sqrt(77)), evaluated at 30 digits
  CHECK(std::abs(cosine_distance(V{1, 2, 3}, V{4, 5, 6}) - 0.0253681538029237289) < 1e-15);
  CHECK(std::abs(oracle::cosine(V{1, 2, 3}, V{4, 5, 6}) - 0.0253681538029237289) < 1e-15);
  CHECK(cosine_distance(V{0, 0}, V{1, 1}) == 2.0);
  CHECK(cosine_distance(V{1, 1}, V{0, 0}) == 2.0);
  CHECK(cosine_distance(V{1, 1}, V{-1, -1}) == doctest::Approx(2.0));
}

TEST_CASE("euclidean and manhattan examples") {
  CHECK(euclidean_distance(V{0, 0}, V{3, 4}) == 5.0);
  CHECK(manhattan_distance(V{0, 0}, V{3, 4}) == 7.0);
  CHECK(euclidean_distance(V{1.5f, -2}, V{1.5f, -2}) == 0.0);
  CHECK(manhattan_distance(V{1.5f, -2}, V{1.5f, -2}) == 0.0);
}

TEST_CASE("JS divergence examples") {
  CHECK(js_divergence(V{0.3f, -1, 2}, V{0.3f, -1, 2}) == 0.0);
  // (0.5, 0.5) vs (0.75, 0.25), evaluated at 30 digits
  const float ln3 = static_cast<float>(std::log(3.0));
  const double expected = 0.0487949406953985326;
  // ln 3 is rounded to float; its effect on the softmax is below 1e-7
  CHECK(std::abs(js_divergence(V{0, 0}, V{ln3, 0}) - expected) < 1e-7);
  CHECK(js_divergence(V{20, -20}, V{-20, 20}) > 0.999);
  CHECK(js_divergence(V{20, -20}, V{-20, 20}) <= 1.0);
}

TEST_CASE("length mismatch") {
  CHECK_THROWS_AS(cosine_distance(V{1, 2}, V{1}), Error);
  CHECK_THROWS_AS(euclidean_distance(V{1, 2}, V{1}), Error);
  CHECK_THROWS_AS(manhattan_distance(V{1, 2}, V{1}), Error);
  CHECK_THROWS_AS(js_divergence(V{1, 2}, V{1}), Error);
  CHECK_THROWS_AS(js_divergence(V{}, V{}), Error);
}

TEST_CASE("metric names") {
  for (auto m : {DistanceMetric::Cosine, DistanceMetric::Euclidean, DistanceMetric::Manhattan,
                 DistanceMetric::JsDivergence}) {
    CHECK(parse_distance_metric(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_distance_metric("hamming"), Error);
}

TEST_CASE("512-dim pairs match naive loops") {
  oracle::Gen gen(99);
  for (int i = 0; i < 200; ++i) {
    const auto u = gen.vec(512, -3, 3), v = gen.vec(512, -3, 3);
    CHECK(euclidean_distance(u, v) == doctest::Approx(oracle::euclidean(u, v)).epsilon(1e-9));
    CHECK(manhattan_distance(u, v) == doctest::Approx(oracle::manhattan(u, v)).epsilon(1e-9));
    CHECK(cosine_distance(u, v) == doctest::Approx(oracle::cosine(u, v)).epsilon(1e-9));
    CHECK(std::abs(js_divergence(u, v) - oracle::js(u, v)) < 1e-12);
  }
}

}  // TEST_SUITE
