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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfiqa/feature_store.hpp"
#include "rfiqa/prediction.hpp"

namespace rfiqa {

struct ProtocolOptions {
  double train_fraction = 0.8;
  std::size_t n_repeats = 15;
  std::uint64_t base_seed = 0;
  // Fraction of the training side kept as retrieval pool (whole groups for
  // synthetic stores). 1 keeps everything.
  double pool_fraction = 1.0;
  // Also report PLCC and RMSE after a five-parameter logistic mapping.
  bool fit_logistic = false;
  // 0 picks default_worker_count().
  std::size_t workers = 0;
};

struct RepeatResult {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::size_t n_test = 0;
  bool ok = true;
  std::string failure;
  double srocc = 0.0;
  double plcc = 0.0;
  double rmse = 0.0;
  std::optional<double> plcc_fitted;
  std::optional<double> rmse_fitted;
};

struct EvalReport {
  std::vector<RepeatResult> repeats;
  double median_srocc = 0.0;
  double median_plcc = 0.0;
  double median_rmse = 0.0;
  std::optional<double> median_plcc_fitted;
  std::optional<double> median_rmse_fitted;
  std::size_t failed_repeats = 0;
  std::map<std::string, double> per_distortion;
  std::optional<std::uint64_t> per_distortion_seed;

  ProtocolOptions protocol;
  RetrievalConfig config;
  Aggregation aggregation = Aggregation::Simple;
  StoreManifest manifest;
  std::size_t store_records = 0;
};

/// One scored test record of a split.
struct ScoredQuery {
  std::size_t record_index = 0;  // index in the full store
  double predicted = 0.0;
  double truth = 0.0;
};

/// Predicts every test-side distorted record using only the train side as the
/// retrieval pool. Output follows the order of split.test_ids.
std::vector<ScoredQuery> score_split(const FeatureStore& store, const SplitResult& split,
                                     const RetrievalConfig& config, Aggregation aggregation,
                                     double pool_fraction = 1.0, std::uint64_t pool_seed = 0);

/// Split-repeat protocol: repeat r splits with seed base_seed + r and scores
/// the test side. Repeats whose statistics are undefined (DegenerateInput) are
/// marked failed and left out of the medians. Output does not depend on the
/// worker count.
EvalReport run_protocol(const FeatureStore& store, const RetrievalConfig& config,
                        Aggregation aggregation, const ProtocolOptions& options);

/// SROCC within each distortion_type on the test side of one split. Types
/// with fewer than two distinct predicted or true values are omitted.
std::map<std::string, double> per_distortion_breakdown(const FeatureStore& store,
                                                       const RetrievalConfig& config,
                                                       Aggregation aggregation, std::uint64_t seed,
                                                       double train_fraction = 0.8);

/// Workers for run_protocol: $RFIQA_WORKERS when set to a positive integer,
/// otherwise the hardware concurrency.
std::size_t default_worker_count();

/// Stable 64-bit FNV-1a digest used to tag outputs with their configuration.
std::uint64_t fnv1a64(std::string_view text);

/// Report as CSV: comment rows (tool version, seed, config hash, config and
/// store snapshot), a header, one row per repeat, a median row and optional
/// per-distortion rows. Byte-identical for identical inputs.
std::string format_report_csv(const EvalReport& report);

}  // namespace rfiqa
