#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace chaosmeter {

struct AssignmentResult {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

/// Exact minimum-cost perfect matching on a dense square cost matrix
/// (row-major, size n*n) via shortest augmenting paths with dual potentials,
/// O(n^3) worst case.
inline AssignmentResult solve_assignment(std::span<const double> cost, int n) {
  if (n < 1) throw std::invalid_argument("solve_assignment: n must be >= 1");
  if (cost.size() != std::size_t(n) * std::size_t(n))
    throw std::invalid_argument("solve_assignment: cost matrix size mismatch");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based columns with a virtual column 0; p[j] = row currently matched to j.
  std::vector<double> u(std::size_t(n) + 1, 0.0), v(std::size_t(n) + 1, 0.0);
  std::vector<int> p(std::size_t(n) + 1, 0), way(std::size_t(n) + 1, 0);
  std::vector<double> minv(std::size_t(n) + 1);
  std::vector<char> used(std::size_t(n) + 1);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), char(0));
    do {
      used[std::size_t(j0)] = 1;
      const int i0 = p[std::size_t(j0)];
      int j1 = 0;
      double delta = kInf;
      const double* row = cost.data() + std::size_t(i0 - 1) * std::size_t(n);
      for (int j = 1; j <= n; ++j) {
        if (used[std::size_t(j)]) continue;
        const double cur = row[j - 1] - u[std::size_t(i0)] - v[std::size_t(j)];
        if (cur < minv[std::size_t(j)]) {
          minv[std::size_t(j)] = cur;
          way[std::size_t(j)] = j0;
        }
        if (minv[std::size_t(j)] < delta) {
          delta = minv[std::size_t(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[std::size_t(j)]) {
          u[std::size_t(p[std::size_t(j)])] += delta;
          v[std::size_t(j)] -= delta;
        } else {
          minv[std::size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[std::size_t(j0)] != 0);
    do {
      const int j1 = way[std::size_t(j0)];
      p[std::size_t(j0)] = p[std::size_t(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult result;
  result.row_to_col.assign(std::size_t(n), -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[std::size_t(j)];
    result.row_to_col[std::size_t(i - 1)] = j - 1;
    result.cost += cost[std::size_t(i - 1) * std::size_t(n) + std::size_t(j - 1)];
  }
  return result;
}

}  // namespace chaosmeter
