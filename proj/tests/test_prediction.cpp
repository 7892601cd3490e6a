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

#include <algorithm>

#include "oracles.hpp"
#include "rfiqa/prediction.hpp"

using namespace rfiqa;

namespace {

RetrievedInstance inst(double mos, double d_s, double d_d = 0.0) {
  RetrievedInstance r;
  r.mos = mos;
  r.d_s = d_s;
  r.d_d = d_d;
  return r;
}

std::vector<RetrievedInstance> random_instances(oracle::Gen& gen, std::size_t n) {
  std::vector<RetrievedInstance> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(inst(gen.uniform(0, 100), gen.uniform(0, 2), gen.uniform(0, 2)));
  return out;
}

}  // namespace

TEST_SUITE("prediction") {

TEST_CASE("simple mean") {
  const std::vector<RetrievedInstance> one{inst(4.2, 0.3)};
  CHECK(aggregate_simple(one) == 4.2);
  const std::vector<RetrievedInstance> three{inst(2, 0.1), inst(4, 0.5), inst(6, 0.9)};
  CHECK(aggregate_simple(three) == doctest::Approx(4.0).epsilon(1e-15));

  oracle::Gen gen(11);
  const auto xs = random_instances(gen, 10);
  std::vector<double> mos;
  for (const auto& x : xs) mos.push_back(x.mos);
  CHECK(std::abs(aggregate_simple(xs) - oracle::mean(mos)) < 1e-12);
}

TEST_CASE("weighted average") {
  const std::vector<RetrievedInstance> two{inst(1, 1.0), inst(3, 0.5, 1.5)};
  CHECK(std::abs(aggregate_weighted(two) - 5.0 / 3.0) < 1e-12);

  std::vector<RetrievedInstance> exact{inst(7.5, 0.0, 0.0), inst(1, 1.0), inst(2, 0.5, 0.5), inst(9, 1.0)};
  CHECK(std::abs(aggregate_weighted(exact) - 7.5) < 1e-6);

  oracle::Gen gen(12);
  for (int t = 0; t < 100; ++t) {
    auto xs = random_instances(gen, 1 + gen.index(20));
    double num = 0, den = 0;
    for (const auto& x : xs) {
      const double w = 1.0 / (x.d_s + x.d_d + 1e-12);
      num += w * x.mos;
      den += w;
    }
    CHECK(std::abs(aggregate_weighted(xs) - num / den) < 1e-10);
  }
}

TEST_CASE("weighted collapses to simple at equal distances") {
  oracle::Gen gen(13);
  for (int t = 0; t < 200; ++t) {
    const double d = gen.uniform(0, 2);
    const double split = gen.uniform(0, 1);
    std::vector<RetrievedInstance> xs;
    for (std::size_t i = 0, n = 1 + gen.index(30); i < n; ++i) xs.push_back(inst(gen.uniform(-5, 5), d * split, d * (1 - split)));
    // split d the same way for every instance so d_s + d_d rounds identically
    CHECK(std::abs(aggregate_weighted(xs) - aggregate_simple(xs)) < 1e-9);
  }
}

TEST_CASE("boundedness and permutation invariance") {
  oracle::Gen gen(14);
  for (int t = 0; t < 300; ++t) {
    auto xs = random_instances(gen, 1 + gen.index(25));
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end(), [](auto& a, auto& b) { return a.mos < b.mos; });
    const double mn = lo->mos, mx = hi->mos;
    const double s = aggregate_simple(xs), w = aggregate_weighted(xs);
    CHECK(s >= mn);
    CHECK(s <= mx);
    CHECK(w >= mn);
    CHECK(w <= mx);
    auto shuffled = xs;
    seeded_shuffle(shuffled, static_cast<std::uint64_t>(t));
    CHECK(std::abs(aggregate_simple(shuffled) - s) <= 1e-12);
    CHECK(std::abs(aggregate_weighted(shuffled) - w) <= 1e-12);
  }
}

TEST_CASE("nearer instance pulls harder") {
  const std::vector<RetrievedInstance> near_low{inst(0, 0.1), inst(10, 0.2)};
  const std::vector<RetrievedInstance> near_high{inst(0, 0.2), inst(10, 0.1)};
  CHECK(aggregate_weighted(near_low) < 5.0);
  CHECK(aggregate_weighted(near_high) > 5.0);
}

TEST_CASE("empty instance list") {
  const std::vector<RetrievedInstance> none;
  CHECK_THROWS_AS(aggregate_simple(none), Error);
  try {
    aggregate_weighted(none);
    FAIL("expected EmptyInstanceList");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInstanceList);
  }
}

TEST_CASE("predict: self retrieval returns own mos") {
  oracle::Gen gen(15);
  const auto store = oracle::random_store(gen, 20, 8, 16, 16);
  RetrievalConfig c;
  c.k_prime = 1;
  c.k_double_prime = 1;
  for (std::size_t i = 0; i < store.records().size(); ++i) {
    const auto& r = store.record(i);
    if (r.role != Role::Distorted) continue;
    const auto& p = store.record(*store.find_group(r.group_id)->pristine);
    for (auto agg : {Aggregation::Simple, Aggregation::Weighted}) {
      const auto res = predict(store, p.semantic, r.distortion, c, agg);
      REQUIRE(res.instances.size() == 1);
      CHECK(res.instances[0].record_id == r.record_id);
      CHECK(res.score == *r.mos);
      CHECK(res.aggregation == agg);
    }
  }

  const auto authentic = oracle::random_store(gen, 30, 1, 8, 8, StoreMode::Authentic);
  c.mode = RetrievalMode::FlatConcat;
  const auto& r = authentic.record(17);
  CHECK(predict(authentic, r.semantic, r.distortion, c, Aggregation::Weighted).score == *r.mos);
}

TEST_CASE("predict: empty pool") {
  oracle::Gen gen(16);
  const auto store = oracle::random_store(gen, 1, 3, 4, 4);
  RetrievalConfig c;
  c.exclude_group = "G0";
  try {
    predict(store, gen.vec(4), gen.vec(4), c, Aggregation::Simple);
    FAIL("expected EmptyInstanceList");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInstanceList);
  }
  c.mode = RetrievalMode::FlatConcat;
  CHECK_THROWS_AS(predict(store, gen.vec(4), gen.vec(4), c, Aggregation::Simple), Error);
}

TEST_CASE("aggregation names") {
  CHECK(parse_aggregation("simple") == Aggregation::Simple);
  CHECK(parse_aggregation("weighted") == Aggregation::Weighted);
  CHECK_THROWS_AS(parse_aggregation("median"), Error);
}

}  // TEST_SUITE
