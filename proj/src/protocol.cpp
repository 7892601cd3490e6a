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

#include "rfiqa/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "rfiqa/logistic.hpp"
#include "rfiqa/statistics.hpp"

namespace rfiqa {

namespace {

// Offset separating the pool-subsampling stream from the split stream of the
// same repeat.
constexpr std::uint64_t kPoolSeedOffset = 0x9e3779b97f4a7c15ULL;

FeatureStore train_pool(const FeatureStore& store, const SplitResult& split) {
  const auto records = store.records();
  std::vector<bool> keep(records.size(), false);
  if (store.manifest().mode == StoreMode::Synthetic) {
    const std::unordered_set<std::string> groups(split.train_groups.begin(), split.train_groups.end());
    for (std::size_t i = 0; i < records.size(); ++i) keep[i] = groups.contains(records[i].group_id);
  } else {
    const std::unordered_set<std::string> ids(split.train_ids.begin(), split.train_ids.end());
    for (std::size_t i = 0; i < records.size(); ++i) keep[i] = ids.contains(records[i].record_id);
  }
  return store.subset(keep);
}

RepeatResult evaluate_repeat(const FeatureStore& store, const RetrievalConfig& config,
                             Aggregation aggregation, const ProtocolOptions& options, std::size_t r) {
  RepeatResult out;
  out.repeat = r;
  out.seed = options.base_seed + r;
  const auto split = split_dataset(store, options.train_fraction, out.seed);
  const auto scored =
      score_split(store, split, config, aggregation, options.pool_fraction, out.seed + kPoolSeedOffset);
  std::vector<double> pred, truth;
  pred.reserve(scored.size());
  truth.reserve(scored.size());
  for (const auto& q : scored) {
    pred.push_back(q.predicted);
    truth.push_back(q.truth);
  }
  out.n_test = scored.size();
  try {
    out.srocc = srocc(pred, truth);
    out.plcc = plcc(pred, truth);
    out.rmse = rmse(pred, truth);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateInput) throw;
    out.ok = false;
    out.failure = e.what();
    return out;
  }
  if (options.fit_logistic) {
    try {
      const auto fit = fit_logistic5(pred, truth);
      out.plcc_fitted = plcc(fit.mapped, truth);
      out.rmse_fitted = rmse(fit.mapped, truth);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FitDiverged && e.code() != ErrorCode::DegenerateInput) throw;
      // fall back to the raw statistics
      out.plcc_fitted = out.plcc;
      out.rmse_fitted = out.rmse;
    }
  }
  return out;
}

}  // namespace

std::vector<ScoredQuery> score_split(const FeatureStore& store, const SplitResult& split,
                                     const RetrievalConfig& config, Aggregation aggregation,
                                     double pool_fraction, std::uint64_t pool_seed) {
  FeatureStore pool = train_pool(store, split);
  if (pool_fraction < 1.0) pool = subsample_pool(pool, pool_fraction, pool_seed);

  std::vector<ScoredQuery> scored;
  scored.reserve(split.test_ids.size());
  RetrievalConfig query_config = config;
  for (const auto& id : split.test_ids) {
    const auto idx = store.find_record(id);
    if (!idx) throw Error(ErrorCode::UnknownRecord, fmt::format("record '{}'", id));
    const auto& r = store.record(*idx);
    query_config.exclude_group = r.group_id;
    const auto result = predict(pool, r.semantic, r.distortion, query_config, aggregation);
    scored.push_back(ScoredQuery{*idx, result.score, *r.mos});
  }
  return scored;
}

std::size_t default_worker_count() {
  if (const char* env = std::getenv("RFIQA_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EvalReport run_protocol(const FeatureStore& store, const RetrievalConfig& config,
                        Aggregation aggregation, const ProtocolOptions& options) {
  validate(config);
  if (options.n_repeats < 1) throw Error(ErrorCode::InvalidConfig, "n_repeats must be >= 1");

  EvalReport report;
  report.protocol = options;
  report.config = config;
  report.aggregation = aggregation;
  report.manifest = store.manifest();
  report.store_records = store.records().size();
  report.repeats.resize(options.n_repeats);

  std::vector<std::exception_ptr> errors(options.n_repeats);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t r = next++; r < options.n_repeats; r = next++) {
      try {
        report.repeats[r] = evaluate_repeat(store, config, aggregation, options, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const auto workers =
      std::min(options.workers == 0 ? default_worker_count() : options.workers, options.n_repeats);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> s, p, e, pf, ef;
  for (const auto& rep : report.repeats) {
    if (!rep.ok) {
      ++report.failed_repeats;
      continue;
    }
    s.push_back(rep.srocc);
    p.push_back(rep.plcc);
    e.push_back(rep.rmse);
    if (rep.plcc_fitted) pf.push_back(*rep.plcc_fitted);
    if (rep.rmse_fitted) ef.push_back(*rep.rmse_fitted);
  }
  if (s.empty()) throw Error(ErrorCode::DegenerateInput, "every repeat failed");
  report.median_srocc = median(s);
  report.median_plcc = median(p);
  report.median_rmse = median(e);
  if (!pf.empty()) report.median_plcc_fitted = median(pf);
  if (!ef.empty()) report.median_rmse_fitted = median(ef);
  return report;
}

std::map<std::string, double> per_distortion_breakdown(const FeatureStore& store,
                                                       const RetrievalConfig& config,
                                                       Aggregation aggregation, std::uint64_t seed,
                                                       double train_fraction) {
  validate(config);
  const auto split = split_dataset(store, train_fraction, seed);
  const auto scored = score_split(store, split, config, aggregation);

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_type;
  for (const auto& q : scored) {
    const auto& type = store.record(q.record_index).distortion_type;
    if (!type) continue;
    auto& [pred, truth] = by_type[*type];
    pred.push_back(q.predicted);
    truth.push_back(q.truth);
  }
  std::map<std::string, double> out;
  for (const auto& [type, lists] : by_type) {
    try {
      out.emplace(type, srocc(lists.first, lists.second));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateInput) throw;
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string number(double v) { return fmt::format("{:.10f}", v); }

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

}  // namespace

std::string format_report_csv(const EvalReport& report) {
  const auto& c = report.config;
  const auto& o = report.protocol;
  const auto& m = report.manifest;
  const std::string config_line = fmt::format(
      "k_prime={} k_double_prime={} metric={} mode={} aggregate={} train_fraction={} repeats={} "
      "pool_fraction={} fit_logistic={} per_distortion={}",
      c.k_prime, c.k_double_prime, to_string(c.metric), to_string(c.mode), to_string(report.aggregation),
      o.train_fraction, o.n_repeats, o.pool_fraction, o.fit_logistic ? 1 : 0,
      report.per_distortion_seed ? 1 : 0);
  const std::string store_line = fmt::format(
      "dataset={} mode={} score_polarity={} semantic_dim={} distortion_dim={} reduction_factor={} "
      "records={} format_version={} extractor={}",
      m.dataset_name, to_string(m.mode), to_string(m.score_polarity), m.semantic_dim, m.distortion_dim,
      m.reduction_factor, report.store_records, m.format_version, m.extractor.empty() ? "-" : m.extractor);

  std::string out;
  out += fmt::format("# rfiqa {} evaluate base_seed={} config_hash={:016x}\n", RFIQA_VERSION, o.base_seed,
                     fnv1a64(config_line + "\n" + store_line));
  out += "# config: " + config_line + "\n";
  out += "# store: " + store_line + "\n";
  out += o.fit_logistic ? "row,seed,n_test,srocc,plcc,rmse,plcc_fitted,rmse_fitted,status\n"
                        : "row,seed,n_test,srocc,plcc,rmse,status\n";

  for (const auto& rep : report.repeats) {
    out += fmt::format("{},{},{},", rep.repeat, rep.seed, rep.n_test);
    if (rep.ok) {
      out += fmt::format("{},{},{}", number(rep.srocc), number(rep.plcc), number(rep.rmse));
      if (o.fit_logistic) out += "," + optional_number(rep.plcc_fitted) + "," + optional_number(rep.rmse_fitted);
      out += ",ok\n";
    } else {
      out += o.fit_logistic ? ",,,," : ",,";
      out += ",failed\n";
    }
  }
  out += fmt::format("median,,{},{},{},{}", report.repeats.size() - report.failed_repeats,
                     number(report.median_srocc), number(report.median_plcc), number(report.median_rmse));
  if (o.fit_logistic) {
    out += "," + optional_number(report.median_plcc_fitted) + "," + optional_number(report.median_rmse_fitted);
  }
  out += fmt::format(",failed={}\n", report.failed_repeats);

  if (report.per_distortion_seed) {
    const std::string blanks = o.fit_logistic ? ",,,," : ",,";
    for (const auto& [type, value] : report.per_distortion) {
      out += fmt::format("distortion:{},{},,{}{},ok\n", type, *report.per_distortion_seed, number(value), blanks);
    }
  }
  return out;
}

}  // namespace rfiqa
