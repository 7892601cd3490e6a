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

#include "rfiqa/consistency.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "rfiqa/distance.hpp"
#include "rfiqa/logistic.hpp"
#include "rfiqa/statistics.hpp"

namespace rfiqa {

namespace {

using CellKey = std::pair<std::string, int>;

// First distorted record per (type, level) cell, ordered by cell.
std::map<CellKey, std::size_t> cells_of(const FeatureStore& store, std::string_view group_id) {
  const Group* g = store.find_group(group_id);
  if (!g) throw Error(ErrorCode::UnknownGroup, fmt::format("group '{}'", group_id));
  std::map<CellKey, std::size_t> cells;
  for (auto idx : g->distorted) {
    const auto& r = store.record(idx);
    if (r.distortion_type && r.distortion_level) {
      cells.emplace(CellKey{*r.distortion_type, *r.distortion_level}, idx);
    }
  }
  return cells;
}

void check_csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") != std::string_view::npos) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("'{}' cannot be written as a plain CSV field", s));
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<SimilarityPair> pristine_similarity_pairs(const FeatureStore& store, std::size_t top_n) {
  if (store.manifest().mode != StoreMode::Synthetic) {
    throw Error(ErrorCode::WrongMode, "similarity pairs need pristine groups");
  }
  std::vector<std::size_t> pristine_groups;
  for (std::size_t g = 0; g < store.groups().size(); ++g) {
    if (store.groups()[g].pristine) pristine_groups.push_back(g);
  }
  if (pristine_groups.size() < 2) {
    throw Error(ErrorCode::InsufficientGroups, "need at least two pristine groups");
  }

  const auto semantic = [&](std::size_t g) -> std::span<const float> {
    return store.record(*store.groups()[g].pristine).semantic;
  };

  std::vector<SimilarityPair> pairs;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  for (auto a : pristine_groups) {
    std::vector<std::pair<double, std::size_t>> ranked;  // (-similarity, group)
    for (auto b : pristine_groups) {
      if (b != a) ranked.emplace_back(-(1.0 - cosine_distance(semantic(a), semantic(b))), b);
    }
    const auto n = std::min(top_n, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end());
    for (std::size_t k = 0; k < n; ++k) {
      const auto b = ranked[k].second;
      const auto key = std::minmax(a, b);
      if (auto it = seen.find(key); it != seen.end()) {
        pairs[it->second].rank_in_b = k + 1;
        continue;
      }
      seen.emplace(key, pairs.size());
      SimilarityPair p;
      p.group_a = store.groups()[a].group_id;
      p.group_b = store.groups()[b].group_id;
      p.similarity = -ranked[k].first;
      p.rank_in_a = k + 1;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

AlignedCorrelation aligned_quality_correlation(const FeatureStore& store, std::string_view group_a,
                                               std::string_view group_b) {
  const auto cells_a = cells_of(store, group_a);
  const auto cells_b = cells_of(store, group_b);
  std::vector<double> mos_a, mos_b;
  for (const auto& [key, idx] : cells_a) {
    auto it = cells_b.find(key);
    if (it == cells_b.end()) continue;
    mos_a.push_back(*store.record(idx).mos);
    mos_b.push_back(*store.record(it->second).mos);
  }
  if (mos_a.size() < 2) {
    throw Error(ErrorCode::InsufficientAlignment,
                fmt::format("groups '{}' and '{}' share {} tagged cells", group_a, group_b, mos_a.size()));
  }
  return AlignedCorrelation{srocc(mos_a, mos_b), mos_a.size()};
}

ConsistencyScatter consistency_scatter(const FeatureStore& store, std::size_t top_n) {
  ConsistencyScatter out;
  for (const auto& pair : pristine_similarity_pairs(store, top_n)) {
    try {
      const auto corr = aligned_quality_correlation(store, pair.group_a, pair.group_b);
      out.points.push_back(
          ConsistencyPoint{pair.group_a, pair.group_b, pair.similarity, corr.srocc, corr.n_aligned});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientAlignment && e.code() != ErrorCode::DegenerateInput) throw;
      ++out.skipped;
    }
  }
  return out;
}

SiEvaluation si_predictor_eval(const FeatureStore& store,
                               const std::map<std::string, std::string>& pairing) {
  std::vector<double> pred, truth;
  for (const auto& [group, partner] : pairing) {
    const Group* g = store.find_group(group);
    if (!g) throw Error(ErrorCode::UnknownGroup, fmt::format("group '{}'", group));
    const auto partner_cells = cells_of(store, partner);
    for (auto idx : g->distorted) {
      const auto& r = store.record(idx);
      if (!r.distortion_type || !r.distortion_level) {
        throw Error(ErrorCode::MissingAlignment, fmt::format("record '{}' has no distortion tags", r.record_id));
      }
      auto it = partner_cells.find(CellKey{*r.distortion_type, *r.distortion_level});
      if (it == partner_cells.end()) {
        throw Error(ErrorCode::MissingAlignment,
                    fmt::format("group '{}' has no ({}, {}) record for '{}'", partner, *r.distortion_type,
                                *r.distortion_level, r.record_id));
      }
      pred.push_back(*store.record(it->second).mos);
      truth.push_back(*r.mos);
    }
  }

  SiEvaluation out;
  out.n = pred.size();
  out.srocc = srocc(pred, truth);
  try {
    const auto fit = fit_logistic5(pred, truth);
    out.plcc = plcc(fit.mapped, truth);
    out.rmse = rmse(fit.mapped, truth);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::FitDiverged) throw;
    out.fitted = false;
    out.plcc = plcc(pred, truth);
    out.rmse = rmse(pred, truth);
  }
  return out;
}

std::map<std::string, std::string> load_pairing(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
  std::map<std::string, std::string> pairing;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv_line(line);
    if (first && fields.size() == 2 && fields[0] == "group" && fields[1] == "partner") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("bad pairing line '{}'", line));
    }
    pairing[fields[0]] = fields[1];
  }
  return pairing;
}

void emit_scatter(std::vector<ConsistencyPoint> points, const std::filesystem::path& path,
                  std::string_view preamble) {
  if (points.empty()) throw Error(ErrorCode::InvalidConfig, "no scatter points to write");
  std::stable_sort(points.begin(), points.end(), [](const auto& x, const auto& y) {
    if (x.semantic_similarity != y.semantic_similarity) return x.semantic_similarity > y.semantic_similarity;
    return std::tie(x.group_a, x.group_b) < std::tie(y.group_a, y.group_b);
  });

  std::string out;
  if (!preamble.empty()) {
    std::stringstream ss{std::string(preamble)};
    std::string line;
    while (std::getline(ss, line)) out += "# " + line + "\n";
  }
  out += "group_a,group_b,semantic_similarity,aligned_srocc,n_aligned\n";
  for (const auto& p : points) {
    check_csv_field(p.group_a);
    check_csv_field(p.group_b);
    out += fmt::format("{},{},{:.17g},{:.17g},{}\n", p.group_a, p.group_b, p.semantic_similarity,
                       p.aligned_srocc, p.n_aligned);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}'", path.string()));
  file << out;
  if (!file) throw Error(ErrorCode::IoError, fmt::format("write failed for '{}'", path.string()));
}

std::vector<ConsistencyPoint> parse_scatter(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
  std::vector<ConsistencyPoint> points;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw Error(ErrorCode::InvalidConfig, fmt::format("bad scatter line '{}'", line));
    try {
      points.push_back(ConsistencyPoint{f[0], f[1], std::stod(f[2]), std::stod(f[3]),
                                        static_cast<std::size_t>(std::stoull(f[4]))});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("bad scatter line '{}'", line));
    }
  }
  return points;
}

}  // namespace rfiqa
