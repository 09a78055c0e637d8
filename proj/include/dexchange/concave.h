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

#ifndef DEXCHANGE_CONCAVE_H_
#define DEXCHANGE_CONCAVE_H_

#include <string>
#include <utility>
#include <vector>

namespace dexchange {

// A non-decreasing concave function f on [0, inf) with f(0) = 0. These are
// the per-agent transforms of total received data size.
class ConcaveSpec {
 public:
  enum class Kind { kSqrt, kPower, kCappedLinear, kVarianceReduction,
                    kPiecewiseLinear };

  static ConcaveSpec Sqrt();
  // x^c, c in (0, 1].
  static ConcaveSpec Power(double c);
  // min(x, cap).
  static ConcaveSpec CappedLinear(double cap);
  // sigma2 * (1 - 1 / (1 + x)): variance removed from a sample mean when x
  // extra unit-variance samples join one own sample.
  static ConcaveSpec VarianceReduction(double sigma2);
  // Linear interpolation through (0,0) and the given breakpoints, flat after
  // the last one. Slopes must be non-negative and non-increasing.
  static ConcaveSpec PiecewiseLinear(
      std::vector<std::pair<double, double>> breakpoints);

  double operator()(double x) const;
  // Right derivative; used by tests and the continuous oracle bisection.
  double Slope(double x) const;

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  const std::vector<std::pair<double, double>>& breakpoints() const {
    return breakpoints_;
  }
  std::string KindName() const;

 private:
  ConcaveSpec(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_ = 0.0;
  std::vector<std::pair<double, double>> breakpoints_;
};

}  // namespace dexchange

#endif  // DEXCHANGE_CONCAVE_H_
