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

#include "rfiqa/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rfiqa/consistency.hpp"
#include "rfiqa/feature_store.hpp"
#include "rfiqa/prediction.hpp"
#include "rfiqa/protocol.hpp"

namespace rfiqa::cli {

namespace {

namespace fs = std::filesystem;

// Raised for flag combinations that CLI11 cannot express; maps to exit 64.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kMetrics{"cosine", "euclidean", "manhattan", "js"};
const std::vector<std::string> kModes{"auto", "hierarchical", "flat"};
const std::vector<std::string> kAggregations{"simple", "weighted"};

struct RetrievalFlags {
  std::size_t k_prime = 0;
  std::size_t k_double_prime = 1;
  std::string metric = "cosine";
  std::string mode = "auto";
  std::string aggregate = "weighted";

  void attach(CLI::App& cmd) {
    cmd.add_option("--k-prime", k_prime,
                   "Pristine groups retrieved in the semantic stage (flat mode: instances per k'')."
                   " 0 = 10 for synthetic stores, 15 for authentic ones")
        ->capture_default_str();
    cmd.add_option("--k-double-prime", k_double_prime, "Distorted records kept per retrieved group")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--metric", metric, "Feature distance")->capture_default_str()->check(CLI::IsMember(kMetrics));
    cmd.add_option("--mode", mode, "Retrieval mode; auto = hierarchical for synthetic stores, flat for authentic")
        ->capture_default_str()
        ->check(CLI::IsMember(kModes));
    cmd.add_option("--aggregate", aggregate, "Score aggregation")
        ->capture_default_str()
        ->check(CLI::IsMember(kAggregations));
  }

  RetrievalConfig resolve(const FeatureStore& store) const {
    const bool synthetic = store.manifest().mode == StoreMode::Synthetic;
    RetrievalConfig config;
    config.k_prime = k_prime != 0 ? k_prime : (synthetic ? 10 : 15);
    config.k_double_prime = k_double_prime;
    config.metric = parse_distance_metric(metric);
    config.mode = mode == "auto" ? (synthetic ? RetrievalMode::Hierarchical : RetrievalMode::FlatConcat)
                                 : parse_retrieval_mode(mode);
    return config;
  }
};

std::string config_summary(const RetrievalConfig& c, Aggregation aggregation) {
  return fmt::format("k_prime={} k_double_prime={} metric={} mode={} aggregate={} exclude_group={}", c.k_prime,
                     c.k_double_prime, to_string(c.metric), to_string(c.mode), to_string(aggregation),
                     c.exclude_group ? *c.exclude_group : "-");
}

std::string store_summary(const FeatureStore& store) {
  const auto& m = store.manifest();
  return fmt::format(
      "dataset={} mode={} score_polarity={} semantic_dim={} distortion_dim={} reduction_factor={} records={} "
      "format_version={}",
      m.dataset_name, to_string(m.mode), to_string(m.score_polarity), m.semantic_dim, m.distortion_dim,
      m.reduction_factor, store.records().size(), m.format_version);
}

std::string header_comment(std::string_view command, std::string_view seed, std::string_view config) {
  return fmt::format("# rfiqa {} {} seed={} config_hash={:016x}\n", RFIQA_VERSION, command, seed,
                     fnv1a64(config));
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}'", path));
  file << text;
  if (!file) throw Error(ErrorCode::IoError, fmt::format("write failed for '{}'", path));
}

void refuse_in_place(const fs::path& input_dir, const fs::path& out_dir) {
  std::error_code ec;
  if (fs::exists(out_dir, ec) && fs::equivalent(input_dir, out_dir, ec)) {
    throw UsageError("output directory must differ from the input store");
  }
}

std::string store_counts(const FeatureStore& store) {
  return fmt::format("records={} groups={} distorted={} semantic_dim={} distortion_dim={} mode={}\n",
                     store.records().size(), store.groups().size(), store.distorted_count(),
                     store.manifest().semantic_dim, store.manifest().distortion_dim,
                     to_string(store.manifest().mode));
}

struct Query {
  std::string id;
  std::vector<float> semantic;
  std::vector<float> distortion;
};

Query load_query_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
  try {
    const auto doc = nlohmann::json::parse(in);
    Query q;
    q.id = doc.value("query_id", fs::path(path).stem().string());
    q.semantic = doc.at("semantic").get<std::vector<float>>();
    q.distortion = doc.at("distortion").get<std::vector<float>>();
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("query features '{}': {}", path, e.what()));
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rfiqa: blind image quality prediction by retrieval of content- and distortion-similar instances"};
  app.name("rfiqa");
  app.require_subcommand(1);
  app.footer(fmt::format(
      "Store layout: <dir>/{} (records, offsets, manifest fields) and <dir>/{} (magic {}, uint32 LE version,"
      " packed float32 LE vectors). Store format version {}.\n"
      "Exit codes: 0 ok, 2 data error, 64 usage error. RFIQA_WORKERS sets evaluate's default worker count.",
      kManifestFileName, kVectorsFileName, kVectorsMagic, StoreManifest::kFormatVersion));
  app.set_version_flag("--version", fmt::format("rfiqa {} (store format {})", RFIQA_VERSION,
                                                StoreManifest::kFormatVersion));
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log loaded stores to stderr");

  // ingest
  std::string ingest_manifest, ingest_vectors, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Validate a manifest/vectors pair and write it as a canonical store");
  ingest->add_option("--manifest", ingest_manifest, "Input manifest.json")->required();
  ingest->add_option("--vectors", ingest_vectors, "Input vectors.bin")->required();
  ingest->add_option("--out", ingest_out, "Output store directory")->required();

  // reduce
  std::string reduce_store, reduce_out;
  std::size_t reduce_factor = 1;
  auto* reduce = app.add_subcommand("reduce", "Max-pool every feature vector into a new store");
  reduce->add_option("--store", reduce_store, "Input store directory")->required();
  reduce->add_option("--factor", reduce_factor, "Pooling window and stride")->required();
  reduce->add_option("--out", reduce_out, "Output store directory")->required();

  // predict
  std::string predict_store, query_id, query_features, predict_exclude, predict_out;
  RetrievalFlags predict_flags;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the quality of one query");
  predict_cmd->add_option("--store", predict_store, "Store directory")->required();
  auto* qid = predict_cmd->add_option("--query-id", query_id, "Use the features of this store record");
  auto* qfeat = predict_cmd->add_option("--query-features", query_features,
                                        "JSON file {\"query_id\": str, \"semantic\": [..], \"distortion\": [..]}");
  qid->excludes(qfeat);
  predict_flags.attach(*predict_cmd);
  predict_cmd->add_option("--exclude-group", predict_exclude, "Never retrieve records of this group");
  predict_cmd->add_option("--out", predict_out, "Output CSV (default stdout)");

  // evaluate
  std::string eval_store, eval_out;
  RetrievalFlags eval_flags;
  ProtocolOptions protocol;
  bool per_distortion = false;
  auto* evaluate = app.add_subcommand("evaluate", "Run the seeded split-repeat evaluation protocol");
  evaluate->add_option("--store", eval_store, "Store directory")->required();
  eval_flags.attach(*evaluate);
  evaluate->add_option("--repeats", protocol.n_repeats, "Number of random splits")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", protocol.base_seed, "Base seed; repeat r uses seed + r")->capture_default_str();
  evaluate->add_option("--train-fraction", protocol.train_fraction, "Training share of each split")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--pool-fraction", protocol.pool_fraction,
                       "Share of the training side used as retrieval pool (whole groups when synthetic)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_flag("--fit-logistic", protocol.fit_logistic, "Add PLCC/RMSE after a 5-parameter logistic fit");
  evaluate->add_flag("--per-distortion", per_distortion, "Append per-distortion-type SROCC for split --seed");
  evaluate->add_option("--workers", protocol.workers, "Parallel repeats (0 = $RFIQA_WORKERS or all cores)")
      ->capture_default_str();
  evaluate->add_option("--out", eval_out, "Output CSV (default stdout)");

  // analyze
  std::string analyze_store, analyze_out, si_pairing;
  std::size_t top_n = 10;
  auto* analyze = app.add_subcommand("analyze", "Content-distortion consistency scatter and similar-instance check");
  analyze->add_option("--store", analyze_store, "Store directory")->required();
  analyze->add_option("--top-n", top_n, "Most similar groups per pristine group")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze->add_option("--out", analyze_out, "Scatter CSV")->required();
  analyze->add_option("--si-pairing", si_pairing, "CSV of group,partner lines for the similar-instance predictor");

  std::vector<std::string> argv_storage{"rfiqa"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const auto open_store = [&](const std::string& dir) {
    auto store = load_store(dir);
    if (verbose) err << "loaded " << dir << ": " << store_counts(store);
    return store;
  };

  try {
    if (*ingest) {
      refuse_in_place(fs::path(ingest_manifest).parent_path(), ingest_out);
      const auto store = load_store(ingest_manifest, ingest_vectors);
      save_store(store, ingest_out);
      out << store_counts(store);
    } else if (*reduce) {
      if (reduce_factor == 0) throw UsageError("--factor must be >= 1");
      refuse_in_place(reduce_store, reduce_out);
      const auto reduced = reduce_features(open_store(reduce_store), reduce_factor);
      save_store(reduced, reduce_out);
      out << store_counts(reduced);
    } else if (*predict_cmd) {
      if (query_id.empty() == query_features.empty()) {
        throw UsageError("predict needs exactly one of --query-id or --query-features");
      }
      const auto store = open_store(predict_store);
      auto config = predict_flags.resolve(store);
      if (!predict_exclude.empty()) config.exclude_group = predict_exclude;
      const auto aggregation = parse_aggregation(predict_flags.aggregate);

      Query q;
      if (!query_id.empty()) {
        const auto idx = store.find_record(query_id);
        if (!idx) throw Error(ErrorCode::UnknownRecord, fmt::format("record '{}'", query_id));
        const auto& r = store.record(*idx);
        q = Query{r.record_id, r.semantic, r.distortion};
      } else {
        q = load_query_features(query_features);
      }
      const auto result = predict(store, q.semantic, q.distortion, config, aggregation);

      const auto config_line = config_summary(config, aggregation);
      const auto store_line = store_summary(store);
      std::string text = header_comment("predict", "none", config_line + "\n" + store_line);
      text += "# config: " + config_line + "\n# store: " + store_line + "\n";
      text += "kind,query_id,record_id,group_id,d_s,d_d,mos,score\n";
      text += fmt::format("prediction,{},,,,,,{:.10f}\n", q.id, result.score);
      for (const auto& inst : result.instances) {
        text += fmt::format("instance,{},{},{},{:.10f},{:.10f},{:.10f},\n", q.id, inst.record_id, inst.group_id,
                            inst.d_s, inst.d_d, inst.mos);
      }
      write_output(text, predict_out, out);
    } else if (*evaluate) {
      if (!(protocol.train_fraction > 0.0 && protocol.train_fraction < 1.0)) {
        throw UsageError("--train-fraction must lie strictly between 0 and 1");
      }
      if (!(protocol.pool_fraction > 0.0)) throw UsageError("--pool-fraction must be > 0");
      const auto store = open_store(eval_store);
      const auto config = eval_flags.resolve(store);
      const auto aggregation = parse_aggregation(eval_flags.aggregate);
      auto report = run_protocol(store, config, aggregation, protocol);
      if (per_distortion) {
        report.per_distortion =
            per_distortion_breakdown(store, config, aggregation, protocol.base_seed, protocol.train_fraction);
        report.per_distortion_seed = protocol.base_seed;
      }
      write_output(format_report_csv(report), eval_out, out);
    } else if (*analyze) {
      const auto store = open_store(analyze_store);
      const auto scatter = consistency_scatter(store, top_n);
      const std::string config_line = fmt::format("top_n={} si_pairing={}", top_n, si_pairing.empty() ? "-" : si_pairing);
      const std::string store_line = store_summary(store);
      std::string preamble = header_comment("analyze", "none", config_line + "\n" + store_line).substr(2);
      preamble += "config: " + config_line + "\nstore: " + store_line +
                  fmt::format(" extractor={}\n", store.manifest().extractor.empty() ? "-" : store.manifest().extractor);
      emit_scatter(scatter.points, analyze_out, preamble);
      out << fmt::format("points={} skipped_pairs={}\n", scatter.points.size(), scatter.skipped);
      if (!si_pairing.empty()) {
        const auto si = si_predictor_eval(store, load_pairing(si_pairing));
        out << fmt::format("si_n={} si_srocc={:.10f} si_plcc={:.10f} si_rmse={:.10f} logistic_fit={}\n", si.n,
                           si.srocc, si.plcc, si.rmse, si.fitted ? "yes" : "diverged");
      }
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace rfiqa::cli
