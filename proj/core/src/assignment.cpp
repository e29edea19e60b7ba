#include "safeimm/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace safeimm {

namespace {

// Dense rectangular LAP with rows <= cols, every entry finite. Returns the
// column assigned to each row.
std::vector<int> shortest_augmenting_path(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> row_of(static_cast<std::size_t>(m) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);
  std::vector<double> minv(static_cast<std::size_t>(m) + 1);
  std::vector<char> used(static_cast<std::size_t>(m) + 1);

  for (int i = 1; i <= n; ++i) {
    row_of[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = row_of[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (used[ju]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[ju];
        if (cur < minv[ju]) {
          minv[ju] = cur;
          way[ju] = j0;
        }
        if (minv[ju] < delta) {
          delta = minv[ju];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (used[ju]) {
          u[static_cast<std::size_t>(row_of[ju])] += delta;
          v[ju] -= delta;
        } else {
          minv[ju] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      row_of[static_cast<std::size_t>(j0)] = row_of[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> col_of(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    const int r = row_of[static_cast<std::size_t>(j)];
    if (r > 0) col_of[static_cast<std::size_t>(r - 1)] = j - 1;
  }
  return col_of;
}

}  // namespace

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  Assignment out;
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) {
    for (int r = 0; r < rows; ++r) out.unassigned_rows.push_back(r);
    for (int c = 0; c < cols; ++c) out.unassigned_cols.push_back(c);
    return out;
  }

  // Forbidden entries become a penalty larger than any complete set of
  // permitted costs, so cardinality is maximized before cost is minimized.
  double span = 0.0;
  double lo = 0.0;
  bool any_permitted = false;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = cost(r, c);
      if (std::isfinite(x)) {
        any_permitted = true;
        lo = std::min(lo, x);
        span = std::max(span, std::abs(x));
      }
    }
  }
  const double big = (span - lo + 1.0) * static_cast<double>(std::max(rows, cols) + 1);

  const bool transpose = rows > cols;
  Eigen::MatrixXd a = transpose ? Eigen::MatrixXd(cost.transpose()) : cost;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      a(r, c) = std::isfinite(a(r, c)) ? a(r, c) - lo : big;
    }
  }

  std::vector<int> match;
  if (any_permitted) match = shortest_augmenting_path(a);

  std::vector<char> row_used(static_cast<std::size_t>(rows), 0);
  std::vector<char> col_used(static_cast<std::size_t>(cols), 0);
  for (std::size_t k = 0; k < match.size(); ++k) {
    if (match[k] < 0) continue;
    const int r = transpose ? match[k] : static_cast<int>(k);
    const int c = transpose ? static_cast<int>(k) : match[k];
    if (!std::isfinite(cost(r, c))) continue;
    out.pairs.emplace_back(r, c);
    out.total_cost += cost(r, c);
    row_used[static_cast<std::size_t>(r)] = 1;
    col_used[static_cast<std::size_t>(c)] = 1;
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (int r = 0; r < rows; ++r) {
    if (!row_used[static_cast<std::size_t>(r)]) out.unassigned_rows.push_back(r);
  }
  for (int c = 0; c < cols; ++c) {
    if (!col_used[static_cast<std::size_t>(c)]) out.unassigned_cols.push_back(c);
  }
  return out;
}

}  // namespace safeimm
