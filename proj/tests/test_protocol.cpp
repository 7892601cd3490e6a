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
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "oracles.hpp"
#include "rfiqa/planted.hpp"
#include "rfiqa/protocol.hpp"
#include "rfiqa/statistics.hpp"

using namespace rfiqa;

namespace {

planted::PlantedOptions small_planted() {
  planted::PlantedOptions o;
  o.n_groups = 20;
  o.semantic_dim = 48;
  o.distortion_dim = 40;
  return o;
}

// Every group shares semantics and a one-hot distortion code per (type, level).
// Type A scores are level everywhere; type B scores are level in train groups
// and -level in the groups listed in `flipped`. Type C has a single record in
// group `lonely`.
FeatureStore two_type_store(std::size_t n_groups, const std::set<std::string>& flipped, const std::string& lonely) {
  constexpr std::size_t levels = 5;
  std::vector<FeatureRecord> recs;
  const auto code = [&](std::size_t slot) {
    std::vector<float> v(2 * levels + 1, 0.0f);
    v[slot] = 1.0f;
    return v;
  };
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::string gid = fmt::format("grp{:02}", g);
    FeatureRecord p;
    p.record_id = gid;
    p.group_id = gid;
    p.role = Role::Pristine;
    p.semantic = {1.0f, 0.5f, 0.25f};
    recs.push_back(p);
    for (std::size_t l = 1; l <= levels; ++l) {
      for (int t = 0; t < 2; ++t) {
        FeatureRecord d;
        d.record_id = fmt::format("{}_{}{}", gid, t == 0 ? "A" : "B", l);
        d.group_id = gid;
        d.semantic = p.semantic;
        d.distortion = code(t * levels + l - 1);
        d.distortion_type = t == 0 ? "A" : "B";
        d.distortion_level = static_cast<int>(l);
        d.mos = (t == 1 && flipped.contains(gid)) ? -double(l) : double(l);
        recs.push_back(d);
      }
    }
    if (gid == lonely) {
      FeatureRecord d;
      d.record_id = gid + "_C";
      d.group_id = gid;
      d.semantic = p.semantic;
      d.distortion = code(2 * levels);
      d.distortion_type = "C";
      d.distortion_level = 1;
      d.mos = 0.0;
      recs.push_back(d);
    }
  }
  StoreManifest m;
  m.dataset_name = "two-type";
  m.semantic_dim = 3;
  m.distortion_dim = 2 * levels + 1;
  return build_store(std::move(recs), m);
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("perfectly retrievable store scores 1") {
  auto o = small_planted();
  o.n_archetypes = 1;
  o.content_jitter = 0.0;
  o.feature_noise = 0.0;
  o.noise_fraction = 0.0;
  const auto ps = planted::make_planted_store(o);
  RetrievalConfig c;
  c.k_prime = 3;
  ProtocolOptions po;
  po.n_repeats = 5;
  const auto rep = run_protocol(ps.store, c, Aggregation::Weighted, po);
  CHECK(rep.failed_repeats == 0);
  CHECK(rep.median_srocc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.median_plcc == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.median_rmse < 1e-6);
}

TEST_CASE("medians and repeat seeds") {
  const auto ps = planted::make_planted_store(small_planted());
  RetrievalConfig c;
  c.k_prime = 4;
  ProtocolOptions po;
  po.n_repeats = 6;
  po.base_seed = 40;
  po.fit_logistic = true;
  const auto rep = run_protocol(ps.store, c, Aggregation::Simple, po);
  REQUIRE(rep.repeats.size() == 6);
  std::vector<double> s, p, e, pf;
  for (std::size_t r = 0; r < 6; ++r) {
    const auto& rr = rep.repeats[r];
    CHECK(rr.repeat == r);
    CHECK(rr.seed == 40 + r);
    CHECK(rr.n_test == 4 * 20);
    CHECK(rr.plcc_fitted.has_value());
    s.push_back(rr.srocc);
    p.push_back(rr.plcc);
    e.push_back(rr.rmse);
    pf.push_back(*rr.plcc_fitted);
  }
  std::sort(s.begin(), s.end());
  CHECK(rep.median_srocc == (s[2] + s[3]) / 2);
  CHECK(rep.median_plcc == median(p));
  CHECK(rep.median_rmse == median(e));
  CHECK(*rep.median_plcc_fitted == median(pf));

  // each repeat is the split for its own seed
  const auto split = split_dataset(ps.store, 0.8, 43);
  const auto scored = score_split(ps.store, split, c, Aggregation::Simple);
  std::vector<double> pred, truth;
  for (const auto& q : scored) {
    pred.push_back(q.predicted);
    truth.push_back(q.truth);
    CHECK(std::find(split.test_ids.begin(), split.test_ids.end(), ps.store.record(q.record_index).record_id) !=
          split.test_ids.end());
  }
  CHECK(rep.repeats[3].srocc == srocc(pred, truth));
}

TEST_CASE("reports are deterministic and independent of worker count") {
  const auto ps = planted::make_planted_store(small_planted());
  RetrievalConfig c;
  c.k_prime = 5;
  c.k_double_prime = 2;
  ProtocolOptions po;
  po.n_repeats = 7;
  po.base_seed = 3;
  po.pool_fraction = 0.7;
  po.fit_logistic = true;
  po.workers = 1;
  const auto a = format_report_csv(run_protocol(ps.store, c, Aggregation::Weighted, po));
  const auto b = format_report_csv(run_protocol(ps.store, c, Aggregation::Weighted, po));
  po.workers = 4;
  const auto d = format_report_csv(run_protocol(ps.store, c, Aggregation::Weighted, po));
  CHECK(a == b);
  CHECK(a == d);
  po.n_repeats = 1;
  CHECK(format_report_csv(run_protocol(ps.store, c, Aggregation::Weighted, po)) ==
        format_report_csv(run_protocol(ps.store, c, Aggregation::Weighted, po)));
}

TEST_CASE("record order does not change the report") {
  oracle::Gen gen(51);
  for (auto mode : {StoreMode::Synthetic, StoreMode::Authentic}) {
    const auto store = oracle::random_store(gen, 30, 6, 12, 10, mode);
    std::vector<FeatureRecord> recs(store.records().begin(), store.records().end());
    seeded_shuffle(recs, 99);
    const auto shuffled = build_store(recs, store.manifest());
    RetrievalConfig c;
    c.k_prime = 4;
    c.mode = mode == StoreMode::Synthetic ? RetrievalMode::Hierarchical : RetrievalMode::FlatConcat;
    ProtocolOptions po;
    po.n_repeats = 4;
    CHECK(format_report_csv(run_protocol(store, c, Aggregation::Weighted, po)) ==
          format_report_csv(run_protocol(shuffled, c, Aggregation::Weighted, po)));
  }
}

TEST_CASE("authentic stores exclude the query itself") {
  planted::PlantedOptions o = small_planted();
  o.mode = StoreMode::Authentic;
  const auto ps = planted::make_planted_store(o);
  RetrievalConfig c;
  c.mode = RetrievalMode::FlatConcat;
  c.k_prime = 1;
  const auto split = split_dataset(ps.store, 0.8, 5);
  const std::set<std::string> test(split.test_ids.begin(), split.test_ids.end());
  for (const auto& q : score_split(ps.store, split, c, Aggregation::Simple)) {
    CHECK(test.contains(ps.store.record(q.record_index).record_id));
  }
  ProtocolOptions po;
  po.n_repeats = 3;
  const auto rep = run_protocol(ps.store, c, Aggregation::Simple, po);
  CHECK(rep.repeats[0].n_test == split.test_ids.size());
}

TEST_CASE("per-distortion breakdown isolates types") {
  const std::uint64_t seed = 17;
  const auto skeleton = two_type_store(10, {}, "");
  const auto split = split_dataset(skeleton, 0.8, seed);
  REQUIRE(split.test_groups.size() == 2);
  const std::set<std::string> flipped(split.test_groups.begin(), split.test_groups.end());
  const auto store = two_type_store(10, flipped, split.test_groups.front());
  RetrievalConfig c;
  c.k_prime = 3;
  for (auto agg : {Aggregation::Simple, Aggregation::Weighted}) {
    const auto map = per_distortion_breakdown(store, c, agg, seed);
    REQUIRE(map.size() == 2);
    CHECK(map.at("A") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(map.at("B") == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_FALSE(map.contains("C"));
  }
}

TEST_CASE("noise on one type gives that type the lowest srocc") {
  auto o = small_planted();
  o.n_groups = 40;
  o.noise_fraction = 0.02;
  o.noisy_type = 2;
  o.noisy_type_fraction = 0.4;
  const auto ps = planted::make_planted_store(o);
  RetrievalConfig c;
  c.k_prime = 6;
  const auto map = per_distortion_breakdown(ps.store, c, Aggregation::Weighted, 0);
  REQUIRE(map.contains("type2"));
  for (const auto& [type, s] : map) {
    if (type != "type2") CHECK(s > map.at("type2"));
  }
}

TEST_CASE("failed repeats are counted and excluded") {
  // g0 has a single distorted record: whenever it is the only test group the
  // repeat has one test score and no correlation.
  std::vector<FeatureRecord> recs;
  oracle::Gen gen(61);
  for (int g = 0; g < 3; ++g) {
    FeatureRecord p;
    p.record_id = p.group_id = "g" + std::to_string(g);
    p.role = Role::Pristine;
    p.semantic = gen.vec(6);
    recs.push_back(p);
    for (int j = 0; j < (g == 0 ? 1 : 6); ++j) {
      FeatureRecord d;
      d.record_id = p.group_id + "_" + std::to_string(j);
      d.group_id = p.group_id;
      d.semantic = gen.vec(6);
      d.distortion = gen.vec(6);
      d.mos = gen.uniform(0, 10);
      recs.push_back(d);
    }
  }
  StoreManifest m;
  m.semantic_dim = m.distortion_dim = 6;
  const auto store = build_store(recs, m);
  RetrievalConfig c;
  c.k_prime = 2;
  ProtocolOptions po;
  po.n_repeats = 12;
  const auto rep = run_protocol(store, c, Aggregation::Weighted, po);
  std::vector<double> ok;
  std::size_t failed = 0;
  for (const auto& r : rep.repeats) {
    if (r.ok) {
      ok.push_back(r.srocc);
    } else {
      ++failed;
      CHECK(r.n_test == 1);
      CHECK(r.failure.find("DegenerateInput") != std::string::npos);
    }
  }
  REQUIRE(failed > 0);
  REQUIRE(!ok.empty());
  CHECK(rep.failed_repeats == failed);
  CHECK(rep.median_srocc == median(ok));
  const auto csv = format_report_csv(rep);
  CHECK(csv.find(fmt::format("failed={}", failed)) != std::string::npos);

  // every repeat degenerate
  for (auto& r : recs) {
    if (r.role == Role::Distorted) r.mos = 5.0;
  }
  const auto flat = build_store(recs, m);
  try {
    run_protocol(flat, c, Aggregation::Weighted, po);
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
}

TEST_CASE("report csv layout") {
  const auto ps = planted::make_planted_store(small_planted());
  RetrievalConfig c;
  ProtocolOptions po;
  po.n_repeats = 3;
  auto rep = run_protocol(ps.store, c, Aggregation::Weighted, po);
  rep.per_distortion = per_distortion_breakdown(ps.store, c, Aggregation::Weighted, 0);
  rep.per_distortion_seed = 0;
  const auto csv = format_report_csv(rep);
  std::vector<std::string> lines;
  for (std::size_t pos = 0, next; pos < csv.size(); pos = next + 1) {
    next = csv.find('\n', pos);
    lines.push_back(csv.substr(pos, next - pos));
  }
  REQUIRE(lines.size() == 3 + 1 + 3 + 1 + rep.per_distortion.size());
  CHECK(lines[0].rfind("# rfiqa ", 0) == 0);
  CHECK(lines[3] == "row,seed,n_test,srocc,plcc,rmse,status");
  CHECK(lines[4].rfind("0,0,", 0) == 0);
  CHECK(lines[7].rfind("median,,", 0) == 0);
  CHECK(lines[8].rfind("distortion:type0,0,", 0) == 0);
}

TEST_CASE("invalid options") {
  const auto ps = planted::make_planted_store(small_planted());
  RetrievalConfig c;
  ProtocolOptions po;
  po.n_repeats = 0;
  CHECK_THROWS_AS(run_protocol(ps.store, c, Aggregation::Weighted, po), Error);
  po.n_repeats = 1;
  po.train_fraction = 1.0;
  CHECK_THROWS_AS(run_protocol(ps.store, c, Aggregation::Weighted, po), Error);
}

TEST_CASE("fnv1a64") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

}  // TEST_SUITE
