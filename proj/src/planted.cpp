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

#include "rfiqa/planted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "rfiqa/rng.hpp"

namespace rfiqa::planted {

NormalSource::NormalSource(std::uint64_t seed) : rng_(seed) {}

double NormalSource::next() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = 1.0 - rng_.uniform();  // (0, 1]
  const double u2 = rng_.uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
  return radius * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Sparse non-negative activation pattern, roughly what a pooled CNN layer
// produces.
std::vector<double> sparse_pattern(std::size_t dim, double density, SplitMix64& rng) {
  std::vector<double> v(dim, 0.0);
  for (auto& x : v) {
    if (rng.uniform() < density) x = 0.5 + 1.5 * rng.uniform();
  }
  return v;
}

std::vector<float> relu_noisy(const std::vector<double>& base, double sigma, NormalSource& normal) {
  std::vector<float> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    out[i] = static_cast<float>(std::max(0.0, base[i] + sigma * normal.next()));
  }
  return out;
}

}  // namespace

PlantedStore make_planted_store(const PlantedOptions& o) {
  SplitMix64 rng(o.seed);
  NormalSource normal(o.seed ^ 0xa5a5a5a5a5a5a5a5ULL);

  std::vector<std::vector<double>> archetypes;
  for (std::size_t a = 0; a < o.n_archetypes; ++a) archetypes.push_back(sparse_pattern(o.semantic_dim, 0.15, rng));

  // Distortion features: a type pattern plus a level-dependent second pattern,
  // so both type and severity change the direction of the vector.
  std::vector<std::vector<double>> type_patterns, level_patterns;
  for (std::size_t t = 0; t < o.n_types; ++t) {
    type_patterns.push_back(sparse_pattern(o.distortion_dim, 0.15, rng));
    level_patterns.push_back(sparse_pattern(o.distortion_dim, 0.15, rng));
  }

  // Clean quality: each type has its own base and severity slope, and each
  // archetype its own sensitivity to each type plus an offset.
  std::vector<double> type_base(o.n_types), type_slope(o.n_types), archetype_offset(o.n_archetypes);
  std::vector<std::vector<double>> sensitivity(o.n_archetypes, std::vector<double>(o.n_types));
  for (std::size_t t = 0; t < o.n_types; ++t) {
    type_base[t] = 4.2 + 0.6 * rng.uniform();
    type_slope[t] = 0.5 + 0.5 * rng.uniform();
  }
  for (std::size_t a = 0; a < o.n_archetypes; ++a) {
    archetype_offset[a] = -0.4 + 0.8 * rng.uniform();
    for (auto& s : sensitivity[a]) s = 0.7 + 0.6 * rng.uniform();
  }
  const auto quality = [&](std::size_t a, std::size_t t, std::size_t level) {
    return type_base[t] + archetype_offset[a] - type_slope[t] * sensitivity[a][t] * static_cast<double>(level - 1);
  };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t a = 0; a < o.n_archetypes; ++a) {
    for (std::size_t t = 0; t < o.n_types; ++t) {
      for (std::size_t l = 1; l <= o.n_levels; ++l) {
        lo = std::min(lo, quality(a, t, l));
        hi = std::max(hi, quality(a, t, l));
      }
    }
  }
  const double range = hi - lo;

  std::vector<FeatureRecord> records;
  std::vector<double> clean;
  for (std::size_t g = 0; g < o.n_groups; ++g) {
    const std::size_t a = g % o.n_archetypes;
    const std::string group_id = fmt::format("g{:03d}", g);
    std::vector<double> content = archetypes[a];
    for (auto& x : content) x = std::max(0.0, x + o.content_jitter * normal.next() * (x > 0.0 ? 1.0 : 0.2));

    if (o.mode == StoreMode::Synthetic) {
      FeatureRecord pristine;
      pristine.record_id = group_id + "_ref";
      pristine.group_id = group_id;
      pristine.role = Role::Pristine;
      pristine.semantic = relu_noisy(content, 0.0, normal);
      records.push_back(std::move(pristine));
      clean.push_back(std::numeric_limits<double>::quiet_NaN());
    }

    for (std::size_t t = 0; t < o.n_types; ++t) {
      for (std::size_t l = 1; l <= o.n_levels; ++l) {
        std::vector<double> dist(o.distortion_dim);
        const double severity = static_cast<double>(l) / static_cast<double>(o.n_levels);
        for (std::size_t i = 0; i < dist.size(); ++i) {
          dist[i] = type_patterns[t][i] + 2.0 * severity * level_patterns[t][i];
        }
        const double q = quality(a, t, l);
        double sigma = o.noise_fraction * range;
        if (o.noisy_type && *o.noisy_type == t) sigma = std::hypot(sigma, o.noisy_type_fraction * range);

        FeatureRecord r;
        r.record_id = fmt::format("{}_t{}_l{}", group_id, t, l);
        r.group_id = o.mode == StoreMode::Synthetic ? group_id : r.record_id;
        r.role = Role::Distorted;
        r.semantic = relu_noisy(content, o.feature_noise, normal);
        r.distortion = relu_noisy(dist, o.feature_noise, normal);
        r.mos = q + sigma * normal.next();
        r.distortion_type = fmt::format("type{}", t);
        r.distortion_level = static_cast<int>(l);
        records.push_back(std::move(r));
        clean.push_back(q);
      }
    }
  }

  StoreManifest m;
  m.dataset_name = o.dataset_name;
  m.mode = o.mode;
  m.semantic_dim = o.semantic_dim;
  m.distortion_dim = o.distortion_dim;
  m.extractor = "planted";
  return PlantedStore{build_store(std::move(records), std::move(m)), std::move(clean), range};
}

FeatureStore make_consistency_store(const ConsistencyOptions& o) {
  SplitMix64 rng(o.seed);
  NormalSource normal(o.seed ^ 0x5bd1e9955bd1e995ULL);

  const std::size_t cells = o.n_types * o.n_levels;
  std::vector<double> base_a(cells), base_b(cells);
  for (auto& x : base_a) x = 1.0 + 4.0 * rng.uniform();
  for (auto& x : base_b) x = 1.0 + 4.0 * rng.uniform();

  std::vector<FeatureRecord> records;
  for (std::size_t g = 0; g < o.n_groups; ++g) {
    const double weight = rng.uniform();
    const double angle = weight * std::numbers::pi / 2.0;
    const std::string group_id = fmt::format("c{:03d}", g);

    FeatureRecord pristine;
    pristine.record_id = group_id + "_ref";
    pristine.group_id = group_id;
    pristine.role = Role::Pristine;
    pristine.semantic.assign(o.semantic_dim, 0.0f);
    pristine.semantic[0] = static_cast<float>(std::cos(angle));
    pristine.semantic[1] = static_cast<float>(std::sin(angle));
    for (std::size_t i = 2; i < o.semantic_dim; ++i) pristine.semantic[i] = static_cast<float>(0.02 * rng.uniform());
    records.push_back(pristine);

    for (std::size_t t = 0; t < o.n_types; ++t) {
      for (std::size_t l = 1; l <= o.n_levels; ++l) {
        const std::size_t c = t * o.n_levels + (l - 1);
        FeatureRecord r;
        r.record_id = fmt::format("{}_t{}_l{}", group_id, t, l);
        r.group_id = group_id;
        r.role = Role::Distorted;
        r.semantic = pristine.semantic;
        r.distortion.assign(o.distortion_dim, 0.0f);
        r.distortion[t % o.distortion_dim] = 1.0f;
        r.distortion[(o.n_types + l) % o.distortion_dim] += 0.5f;
        r.mos = (1.0 - weight) * base_a[c] + weight * base_b[c] + o.noise_sigma * normal.next();
        r.distortion_type = fmt::format("type{}", t);
        r.distortion_level = static_cast<int>(l);
        records.push_back(std::move(r));
      }
    }
  }

  StoreManifest m;
  m.dataset_name = "planted-consistency";
  m.semantic_dim = o.semantic_dim;
  m.distortion_dim = o.distortion_dim;
  m.extractor = "planted";
  return build_store(std::move(records), std::move(m));
}

}  // namespace rfiqa::planted
