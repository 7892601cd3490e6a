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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfiqa/feature_store.hpp"
#include "rfiqa/rng.hpp"

/// Synthetic stores with a known quality function, for tests, the acceptance
/// suite and the bundled toy fixture. Everything is driven by SplitMix64, so a
/// given options struct yields the same store on every platform.
namespace rfiqa::planted {

struct PlantedOptions {
  std::size_t n_groups = 50;
  std::size_t n_archetypes = 5;   // content clusters; group g belongs to g % n_archetypes
  std::size_t n_types = 5;
  std::size_t n_levels = 4;       // records per group = n_types * n_levels
  std::size_t semantic_dim = 512;
  std::size_t distortion_dim = 512;
  // Opinion-score noise sigma as a fraction of the clean score range.
  double noise_fraction = 0.1;
  // Per-group deviation from the archetype centre, and per-record feature noise.
  double content_jitter = 0.25;
  double feature_noise = 0.05;
  // Extra noise sigma (fraction of range) on one distortion type only.
  std::optional<std::size_t> noisy_type;
  double noisy_type_fraction = 0.0;
  StoreMode mode = StoreMode::Synthetic;
  std::string dataset_name = "planted";
  std::uint64_t seed = 1;
};

struct PlantedStore {
  FeatureStore store;
  // Noise-free score per record index; NaN for pristine records.
  std::vector<double> clean_mos;
  double score_range = 0.0;
};

PlantedStore make_planted_store(const PlantedOptions& options);

struct ConsistencyOptions {
  std::size_t n_groups = 30;
  std::size_t n_types = 5;
  std::size_t n_levels = 5;
  std::size_t semantic_dim = 64;
  std::size_t distortion_dim = 16;
  double noise_sigma = 0.15;
  std::uint64_t seed = 7;
};

/// Groups sit on a quarter circle in semantic space. Each group's opinion
/// scores interpolate between two fixed per-cell quality functions with a
/// weight equal to its angular position, so semantically close groups have
/// correlated scores over aligned (type, level) cells.
FeatureStore make_consistency_store(const ConsistencyOptions& options);

/// Standard normal draws from SplitMix64 via Box-Muller.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed);
  double next();

 private:
  SplitMix64 rng_;
  std::optional<double> spare_;
};

}  // namespace rfiqa::planted
