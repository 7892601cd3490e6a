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

#include <array>
#include <span>
#include <vector>

namespace rfiqa {

/// q(s) = b1 * (1/2 - 1 / (1 + exp(b2 * (s - b3)))) + b4 * s + b5
struct Logistic5Params {
  double b1 = 0.0;
  double b2 = 1.0;
  double b3 = 0.0;
  double b4 = 0.0;
  double b5 = 0.0;

  double operator()(double s) const;
  std::array<double, 5> as_array() const { return {b1, b2, b3, b4, b5}; }
  static Logistic5Params from_array(const std::array<double, 5>& b) { return {b[0], b[1], b[2], b[3], b[4]}; }
};

struct Logistic5Fit {
  Logistic5Params params;
  std::vector<double> mapped;  // params applied to every prediction
  double sse = 0.0;
  int iterations = 0;
};

struct Logistic5Options {
  int max_iterations = 500;
  // Stop once an accepted step improves the SSE by less than this fraction.
  double relative_tolerance = 1e-10;
};

/// Least-squares fit of the five-parameter logistic mapping predictions onto
/// ground truth, by Levenberg-Marquardt damped Gauss-Newton.
///
/// Two starts are run and the lower SSE kept: the conventional one
/// (b1 = range(truth), b2 = 1/std(pred), b3 = mean(pred), b4 = 0,
/// b5 = mean(truth)) and the ordinary linear regression embedded as b1 = 0.
/// Since every accepted step lowers the SSE, the result is never worse than
/// the best straight line.
///
/// Throws DegenerateInput for fewer than 5 points or constant predictions and
/// FitDiverged if no finite solution is found.
Logistic5Fit fit_logistic5(std::span<const double> pred, std::span<const double> truth,
                           const Logistic5Options& options = {});

}  // namespace rfiqa
