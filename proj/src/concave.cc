// Copyright 2026 The dexchange Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dexchange/concave.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dexchange {

ConcaveSpec ConcaveSpec::Sqrt() { return ConcaveSpec(Kind::kSqrt, 0.5); }

ConcaveSpec ConcaveSpec::Power(double c) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw std::invalid_argument("power exponent must lie in (0, 1]");
  }
  return ConcaveSpec(Kind::kPower, c);
}

ConcaveSpec ConcaveSpec::CappedLinear(double cap) {
  if (!(cap > 0.0) || !std::isfinite(cap)) {
    throw std::invalid_argument("capped-linear cap must be positive");
  }
  return ConcaveSpec(Kind::kCappedLinear, cap);
}

ConcaveSpec ConcaveSpec::VarianceReduction(double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("variance must be non-negative");
  }
  return ConcaveSpec(Kind::kVarianceReduction, sigma2);
}

ConcaveSpec ConcaveSpec::PiecewiseLinear(
    std::vector<std::pair<double, double>> breakpoints) {
  if (breakpoints.empty()) {
    throw std::invalid_argument("piecewise-linear needs at least one breakpoint");
  }
  double px = 0.0, py = 0.0;
  double prev_slope = INFINITY;
  for (const auto& [x, y] : breakpoints) {
    if (!(x > px) || !std::isfinite(y)) {
      throw std::invalid_argument("breakpoints must have increasing x > 0");
    }
    const double slope = (y - py) / (x - px);
    if (slope < 0.0) {
      throw std::invalid_argument("piecewise-linear function is decreasing");
    }
    if (slope > prev_slope * (1 + 1e-12) + 1e-15) {
      throw std::invalid_argument("piecewise-linear function is not concave");
    }
    prev_slope = slope;
    px = x;
    py = y;
  }
  ConcaveSpec spec(Kind::kPiecewiseLinear, 0.0);
  spec.breakpoints_ = std::move(breakpoints);
  return spec;
}

double ConcaveSpec::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::kSqrt:
      return std::sqrt(x);
    case Kind::kPower:
      return std::pow(x, param_);
    case Kind::kCappedLinear:
      return std::min(x, param_);
    case Kind::kVarianceReduction:
      return param_ * x / (1.0 + x);
    case Kind::kPiecewiseLinear: {
      double px = 0.0, py = 0.0;
      for (const auto& [bx, by] : breakpoints_) {
        if (x <= bx) return py + (by - py) * (x - px) / (bx - px);
        px = bx;
        py = by;
      }
      return py;
    }
  }
  return 0.0;
}

double ConcaveSpec::Slope(double x) const {
  x = std::max(x, 0.0);
  switch (kind_) {
    case Kind::kSqrt:
      return x == 0.0 ? INFINITY : 0.5 / std::sqrt(x);
    case Kind::kPower:
      if (param_ == 1.0) return 1.0;
      return x == 0.0 ? INFINITY : param_ * std::pow(x, param_ - 1.0);
    case Kind::kCappedLinear:
      return x < param_ ? 1.0 : 0.0;
    case Kind::kVarianceReduction:
      return param_ / ((1.0 + x) * (1.0 + x));
    case Kind::kPiecewiseLinear: {
      double px = 0.0, py = 0.0;
      for (const auto& [bx, by] : breakpoints_) {
        if (x < bx) return (by - py) / (bx - px);
        px = bx;
        py = by;
      }
      return 0.0;
    }
  }
  return 0.0;
}

std::string ConcaveSpec::KindName() const {
  switch (kind_) {
    case Kind::kSqrt:
      return "sqrt";
    case Kind::kPower:
      return "power";
    case Kind::kCappedLinear:
      return "capped_linear";
    case Kind::kVarianceReduction:
      return "variance_reduction";
    case Kind::kPiecewiseLinear:
      return "piecewise_linear";
  }
  return "";
}

}  // namespace dexchange
