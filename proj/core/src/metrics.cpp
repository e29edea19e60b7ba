#include "safeimm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "safeimm/assignment.hpp"

namespace safeimm {

RmseResult rmse(std::span<const Eigen::Vector3d> truth,
                std::span<const std::optional<Eigen::Vector3d>> est, int axis) {
  if (truth.size() != est.size()) {
    throw std::invalid_argument("rmse: truth and estimate lengths differ");
  }
  if (axis < 0 || axis > 2) {
    throw std::invalid_argument("rmse: axis must be 0, 1 or 2");
  }
  RmseResult out;
  double sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (!est[k]) {
      ++out.gaps;
      continue;
    }
    const double e = (*est[k])(axis) - truth[k](axis);
    sum += e * e;
    ++out.matched;
  }
  out.value = out.matched > 0 ? std::sqrt(sum / out.matched) : 0.0;
  return out;
}

OspaResult ospa(std::span<const Eigen::Vector3d> x, std::span<const Eigen::Vector3d> y,
                double c, double p) {
  if (!(c > 0.0) || !(p >= 1.0)) {
    throw std::invalid_argument("ospa: need c > 0 and p >= 1");
  }
  // Work with |small| <= |large|; the metric is symmetric.
  const bool swap = x.size() > y.size();
  const auto small = swap ? y : x;
  const auto large = swap ? x : y;
  const auto m = static_cast<Eigen::Index>(small.size());
  const auto n = static_cast<Eigen::Index>(large.size());

  OspaResult out;
  if (n == 0) {
    return out;
  }

  double loc_sum = 0.0;
  if (m > 0) {
    Eigen::MatrixXd cost(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d = (small[static_cast<std::size_t>(i)] - large[static_cast<std::size_t>(j)]).norm();
        cost(i, j) = std::pow(std::min(d, c), p);
      }
    }
    // Summing in sorted order makes the result independent of argument order.
    std::vector<double> terms;
    for (const auto& [i, j] : solve_assignment(cost).pairs) terms.push_back(cost(i, j));
    std::sort(terms.begin(), terms.end());
    for (double t : terms) loc_sum += t;
  }
  const double card_sum = std::pow(c, p) * static_cast<double>(n - m);
  const double inv_n = 1.0 / static_cast<double>(n);
  out.total = std::pow(inv_n * (loc_sum + card_sum), 1.0 / p);
  out.loc = std::pow(inv_n * loc_sum, 1.0 / p);
  out.card = std::pow(inv_n * card_sum, 1.0 / p);
  return out;
}

}  // namespace safeimm
