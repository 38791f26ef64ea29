#include "nhl/assignment.hpp"

#include <limits>
#include <set>

#include "nhl/errors.hpp"

namespace nhl {

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw NumericalError("assignment needs rows <= cols");
  const double inf = std::numeric_limits<double>::infinity();
  // potentials u (rows), v (cols); p[j] = row matched to column j, 1-based with 0 as sentinel
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> ans(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) ans[p[j] - 1] = j - 1;
  return ans;
}

std::vector<int> greedy_then_hungarian(const Eigen::MatrixXd& cost) {
  std::vector<int> pick(cost.rows());
  std::set<int> seen;
  bool clash = false;
  for (Eigen::Index r = 0; r < cost.rows(); ++r) {
    Eigen::Index c;
    cost.row(r).minCoeff(&c);
    pick[r] = static_cast<int>(c);
    if (!seen.insert(pick[r]).second) clash = true;
  }
  return clash ? hungarian(cost) : pick;
}

}  // namespace nhl
