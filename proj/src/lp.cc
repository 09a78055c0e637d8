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

#include "dexchange/lp.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dexchange {
namespace {

constexpr double kCostTol = 1e-10;
constexpr double kPivotTol = 1e-9;
constexpr int kDegenerateSwitch = 200;

class Tableau {
 public:
  Tableau(int rows, int cols)
      : m_(rows), n_(cols), a_(static_cast<std::size_t>(rows) * (cols + 1), 0.0),
        obj_(cols + 1, 0.0), basis_(rows, -1) {}

  double& at(int r, int c) { return a_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  double at(int r, int c) const { return a_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  double& rhs(int r) { return at(r, n_); }
  double rhs(int r) const { return at(r, n_); }
  int rows() const { return m_; }
  int cols() const { return n_; }
  std::vector<int>& basis() { return basis_; }
  double objective_value() const { return obj_[n_]; }

  // Reduced costs for maximizing cost.x at the current basis.
  void SetCost(const std::vector<double>& cost) {
    for (int j = 0; j <= n_; ++j) obj_[j] = j < n_ ? -cost[j] : 0.0;
    for (int r = 0; r < m_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (int j = 0; j <= n_; ++j) obj_[j] += cb * at(r, j);
    }
  }

  void Pivot(int r, int e) {
    const double piv = at(r, e);
    double* row = &a_[static_cast<std::size_t>(r) * (n_ + 1)];
    for (int j = 0; j <= n_; ++j) row[j] /= piv;
    row[e] = 1.0;
    auto eliminate = [&](double* target) {
      const double f = target[e];
      if (f == 0.0) return;
      for (int j = 0; j <= n_; ++j) {
        if (row[j] != 0.0) target[j] -= f * row[j];
      }
      target[e] = 0.0;
    };
    for (int k = 0; k < m_; ++k) {
      if (k != r) eliminate(&a_[static_cast<std::size_t>(k) * (n_ + 1)]);
    }
    eliminate(obj_.data());
    basis_[r] = e;
  }

  // Primal simplex over columns with allowed[j]. Returns kOptimal,
  // kUnbounded or kIterationLimit.
  LpResult::Status Run(const std::vector<char>& allowed, int max_pivots, int* pivots) {
    bool bland = false;
    int degenerate = 0;
    while (true) {
      if (*pivots >= max_pivots) return LpResult::Status::kIterationLimit;
      int e = -1;
      double best = -kCostTol;
      for (int j = 0; j < n_; ++j) {
        if (!allowed[j] || obj_[j] >= -kCostTol) continue;
        if (bland) { e = j; break; }
        if (obj_[j] < best) { best = obj_[j]; e = j; }
      }
      if (e < 0) return LpResult::Status::kOptimal;
      int r = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int k = 0; k < m_; ++k) {
        const double a = at(k, e);
        if (a <= kPivotTol) continue;
        const double q = std::max(0.0, rhs(k)) / a;
        if (r < 0 || q < ratio - 1e-12) {
          r = k;
          ratio = q;
        } else if (q <= ratio + 1e-12) {
          const bool better = bland ? basis_[k] < basis_[r] : a > at(r, e);
          if (better) { r = k; ratio = std::min(ratio, q); }
        }
      }
      if (r < 0) return LpResult::Status::kUnbounded;
      degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
      if (degenerate > kDegenerateSwitch) bland = true;
      Pivot(r, e);
      ++*pivots;
    }
  }

 private:
  int m_;
  int n_;
  std::vector<double> a_;
  std::vector<double> obj_;
  std::vector<int> basis_;
};

}  // namespace

int LinearProgram::AddVariable(double cost) {
  objective.push_back(cost);
  return num_vars++;
}

void LinearProgram::AddRow(std::vector<std::pair<int, double>> coefficients,
                           Sense sense, double rhs) {
  rows.push_back(Row{std::move(coefficients), sense, rhs});
}

std::string StatusName(LpResult::Status status) {
  switch (status) {
    case LpResult::Status::kOptimal: return "optimal";
    case LpResult::Status::kInfeasible: return "infeasible";
    case LpResult::Status::kUnbounded: return "unbounded";
    case LpResult::Status::kIterationLimit: return "iteration limit";
  }
  return "unknown";
}

LpResult SolveLp(const LinearProgram& lp) {
  if (static_cast<int>(lp.objective.size()) != lp.num_vars) {
    throw std::invalid_argument("objective size must equal the variable count");
  }
  const int m = static_cast<int>(lp.rows.size());
  const int nv = lp.num_vars;
  // Sign-normalize rows so every rhs is non-negative.
  std::vector<LinearProgram::Sense> sense(m);
  std::vector<double> sign(m, 1.0);
  int extra = 0, artificial = 0;
  for (int r = 0; r < m; ++r) {
    sense[r] = lp.rows[r].sense;
    if (lp.rows[r].rhs < 0.0) {
      sign[r] = -1.0;
      if (sense[r] == LinearProgram::Sense::kLessEqual) {
        sense[r] = LinearProgram::Sense::kGreaterEqual;
      } else if (sense[r] == LinearProgram::Sense::kGreaterEqual) {
        sense[r] = LinearProgram::Sense::kLessEqual;
      }
    }
    if (sense[r] != LinearProgram::Sense::kEqual) ++extra;
    if (sense[r] != LinearProgram::Sense::kLessEqual) ++artificial;
  }
  const int total = nv + extra + artificial;
  const int first_art = nv + extra;
  Tableau t(m, total);
  Eigen::MatrixXd original = Eigen::MatrixXd::Zero(m, total);
  Eigen::VectorXd b(m);
  int next_extra = nv, next_art = first_art;
  for (int r = 0; r < m; ++r) {
    for (const auto& [j, v] : lp.rows[r].coefficients) {
      if (j < 0 || j >= nv) throw std::invalid_argument("row references an unknown variable");
      t.at(r, j) += sign[r] * v;
    }
    t.rhs(r) = sign[r] * lp.rows[r].rhs;
    if (sense[r] == LinearProgram::Sense::kLessEqual) {
      t.at(r, next_extra) = 1.0;
      t.basis()[r] = next_extra++;
    } else {
      if (sense[r] == LinearProgram::Sense::kGreaterEqual) t.at(r, next_extra++) = -1.0;
      t.at(r, next_art) = 1.0;
      t.basis()[r] = next_art++;
    }
    for (int j = 0; j < total; ++j) original(r, j) = t.at(r, j);
    b(r) = t.rhs(r);
  }

  LpResult result;
  const int max_pivots = 50000 + 20 * (m + total);
  std::vector<char> allowed(total, 1);
  if (artificial > 0) {
    std::vector<double> phase1(total, 0.0);
    for (int j = first_art; j < total; ++j) phase1[j] = -1.0;
    t.SetCost(phase1);
    const auto status = t.Run(allowed, max_pivots, &result.pivots);
    if (status == LpResult::Status::kIterationLimit) {
      result.status = status;
      return result;
    }
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (-t.objective_value() > 1e-7 * scale) {
      result.status = LpResult::Status::kInfeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
      if (t.basis()[r] < first_art) continue;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(t.at(r, j)) > kPivotTol) {
          t.Pivot(r, j);
          break;
        }
      }
    }
    for (int j = first_art; j < total; ++j) allowed[j] = 0;
  }
  std::vector<double> cost(total, 0.0);
  for (int j = 0; j < nv; ++j) cost[j] = lp.objective[j];
  t.SetCost(cost);
  result.status = t.Run(allowed, max_pivots, &result.pivots);
  if (result.status != LpResult::Status::kOptimal) return result;

  std::vector<double> full(total, 0.0);
  for (int r = 0; r < m; ++r) full[t.basis()[r]] = t.rhs(r);
  // Re-solve the final basis for accuracy; keep the tableau values if the
  // factorization disagrees in sign.
  if (m > 0) {
    Eigen::MatrixXd basis_matrix(m, m);
    for (int r = 0; r < m; ++r) basis_matrix.col(r) = original.col(t.basis()[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    const Eigen::VectorXd xb = lu.solve(b);
    const double residual = (basis_matrix * xb - b).cwiseAbs().maxCoeff();
    if (xb.allFinite() && xb.minCoeff() > -1e-9 && residual < 1e-9) {
      for (int r = 0; r < m; ++r) full[t.basis()[r]] = std::max(0.0, xb(r));
    }
  }
  result.x.assign(full.begin(), full.begin() + nv);
  for (double& v : result.x) v = std::max(0.0, v);
  result.objective = 0.0;
  for (int j = 0; j < nv; ++j) result.objective += lp.objective[j] * result.x[j];
  return result;
}

double MaxViolation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, -v);
  for (const auto& row : lp.rows) {
    double act = 0.0;
    for (const auto& [j, v] : row.coefficients) act += v * x[j];
    switch (row.sense) {
      case LinearProgram::Sense::kLessEqual: worst = std::max(worst, act - row.rhs); break;
      case LinearProgram::Sense::kGreaterEqual: worst = std::max(worst, row.rhs - act); break;
      case LinearProgram::Sense::kEqual: worst = std::max(worst, std::abs(act - row.rhs)); break;
    }
  }
  return worst;
}

}  // namespace dexchange
