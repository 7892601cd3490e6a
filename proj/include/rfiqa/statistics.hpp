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

#include <span>
#include <vector>

namespace rfiqa {

/// 1-based ranks with ties sharing the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank-order correlation: Pearson correlation of average ranks, so
/// ties are handled; on tie-free data this is exactly 1 - 6 sum d^2 / (K (K^2 - 1)).
/// Throws LengthMismatch, or DegenerateInput for K < 2 or a constant list.
double srocc(std::span<const double> pred, std::span<const double> truth);

/// Pearson linear correlation. Same preconditions as srocc.
double plcc(std::span<const double> pred, std::span<const double> truth);

/// Root-mean-square error; needs equal, non-zero lengths.
double rmse(std::span<const double> pred, std::span<const double> truth);

/// Exact median; an even count gives the mean of the two central values.
double median(std::vector<double> values);

}  // namespace rfiqa
