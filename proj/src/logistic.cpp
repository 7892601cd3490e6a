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

#include "rfiqa/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "rfiqa/error.hpp"

namespace rfiqa {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// 1 / (1 + exp(z)) without overflow.
double falling_sigmoid(double z) {
  if (z > 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double evaluate(const Vec5& b, double s) {
  return b[0] * (0.5 - falling_sigmoid(b[1] * (s - b[2]))) + b[3] * s + b[4];
}

double sum_squared_error(const Vec5& b, std::span<const double> pred, std::span<const double> truth) {
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = truth[i] - evaluate(b, pred[i]);
    sse += r * r;
  }
  return sse;
}

struct Run {
  Vec5 params;
  double sse;
  int iterations;
};

Run levenberg_marquardt(Vec5 b, std::span<const double> pred, std::span<const double> truth,
                        const Logistic5Options& options) {
  double sse = sum_squared_error(b, pred, truth);
  double lambda = 1e-3;
  int iter = 0;
  for (; iter < options.max_iterations && std::isfinite(sse) && sse > 0.0; ++iter) {
    Mat5 normal = Mat5::Zero();
    Vec5 gradient = Vec5::Zero();
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double s = pred[i];
      const double g = falling_sigmoid(b[1] * (s - b[2]));
      const double slope = g * (1.0 - g);
      Vec5 row;
      row << 0.5 - g, b[0] * slope * (s - b[2]), -b[0] * b[1] * slope, s, 1.0;
      const double r = truth[i] - evaluate(b, s);
      normal.noalias() += row * row.transpose();
      gradient += row * r;
    }
    const double diag_floor = 1e-12 * normal.diagonal().maxCoeff();
    const Vec5 scale = normal.diagonal().cwiseMax(diag_floor);

    bool accepted = false;
    double improvement = 0.0;
    while (lambda < 1e16) {
      Mat5 damped = normal;
      damped.diagonal() += lambda * scale;
      const Vec5 step = damped.ldlt().solve(gradient);
      const Vec5 candidate = b + step;
      const double candidate_sse = step.allFinite() ? sum_squared_error(candidate, pred, truth)
                                                    : std::numeric_limits<double>::infinity();
      if (std::isfinite(candidate_sse) && candidate_sse < sse) {
        improvement = (sse - candidate_sse) / sse;
        b = candidate;
        sse = candidate_sse;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || improvement < options.relative_tolerance) {
      ++iter;
      break;
    }
  }
  return Run{b, sse, iter};
}

}  // namespace

double Logistic5Params::operator()(double s) const {
  Vec5 b;
  b << b1, b2, b3, b4, b5;
  return evaluate(b, s);
}

Logistic5Fit fit_logistic5(std::span<const double> pred, std::span<const double> truth,
                           const Logistic5Options& options) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, fmt::format("lists of length {} and {}", pred.size(), truth.size()));
  }
  if (pred.size() < 5) throw Error(ErrorCode::DegenerateInput, "logistic fit needs at least 5 points");

  const auto n = static_cast<double>(pred.size());
  double mean_pred = 0.0, mean_truth = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mean_pred += pred[i];
    mean_truth += truth[i];
  }
  mean_pred /= n;
  mean_truth /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sxx += (pred[i] - mean_pred) * (pred[i] - mean_pred);
    sxy += (pred[i] - mean_pred) * (truth[i] - mean_truth);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateInput, "predictions are constant");
  const double std_pred = std::sqrt(sxx / n);
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());

  Vec5 conventional;
  conventional << *hi - *lo, 1.0 / std_pred, mean_pred, 0.0, mean_truth;
  const double slope = sxy / sxx;
  Vec5 linear;
  linear << 0.0, 1.0 / std_pred, mean_pred, slope, mean_truth - slope * mean_pred;

  Run best = levenberg_marquardt(conventional, pred, truth, options);
  const Run from_linear = levenberg_marquardt(linear, pred, truth, options);
  if (!std::isfinite(best.sse) || from_linear.sse < best.sse) best = from_linear;
  if (!best.params.allFinite() || !std::isfinite(best.sse)) {
    throw Error(ErrorCode::FitDiverged, "logistic fit produced non-finite parameters");
  }

  Logistic5Fit fit;
  fit.params = Logistic5Params{best.params[0], best.params[1], best.params[2], best.params[3], best.params[4]};
  fit.sse = best.sse;
  fit.iterations = best.iterations;
  fit.mapped.reserve(pred.size());
  for (double s : pred) fit.mapped.push_back(evaluate(best.params, s));
  return fit;
}

}  // namespace rfiqa
