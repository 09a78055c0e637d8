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

// Dense two-phase primal simplex for the small exact LPs of this library:
// maximize c.x subject to row constraints and x >= 0. The final basis is
// re-solved with an LU factorization so reported values are accurate to
// roughly machine precision at the sizes used here (a few hundred rows).

#ifndef DEXCHANGE_LP_H_
#define DEXCHANGE_LP_H_

#include <string>
#include <utility>
#include <vector>

namespace dexchange {

struct LinearProgram {
  enum class Sense { kLessEqual, kGreaterEqual, kEqual };
  struct Row {
    std::vector<std::pair<int, double>> coefficients;
    Sense sense = Sense::kLessEqual;
    double rhs = 0.0;
  };

  int num_vars = 0;
  std::vector<double> objective;  // maximized; size num_vars
  std::vector<Row> rows;

  int AddVariable(double cost);
  void AddRow(std::vector<std::pair<int, double>> coefficients, Sense sense,
              double rhs);
};

struct LpResult {
  enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  int pivots = 0;

  bool ok() const { return status == Status::kOptimal; }
};

std::string StatusName(LpResult::Status status);

LpResult SolveLp(const LinearProgram& lp);

// Largest violation of any row or sign constraint by `x`.
double MaxViolation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace dexchange

#endif  // DEXCHANGE_LP_H_
