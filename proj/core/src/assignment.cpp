#include "szloca/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "szloca/error.hpp"

namespace szloca {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  if (n > m) {
    throw Error(ErrorCode::InvalidArgument, "hungarian expects rows <= cols");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual start column.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> min_slack(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) row_to_col[owner[j] - 1] = j - 1;
  }
  return row_to_col;
}

Assignment solve_gated_assignment(const Eigen::MatrixXd& cost, double gate) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  auto admissible = [&](std::size_t r, std::size_t c) {
    return cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) <= gate;
  };

  // Rows are nodes [0, n), columns [n, n + m).
  DisjointSets sets(n + m);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      if (admissible(r, c)) sets.unite(r, n + c);
    }
  }
  std::vector<std::vector<std::size_t>> comp_rows(n + m);
  std::vector<std::vector<std::size_t>> comp_cols(n + m);
  for (std::size_t r = 0; r < n; ++r) comp_rows[sets.find(r)].push_back(r);
  for (std::size_t c = 0; c < m; ++c) comp_cols[sets.find(n + c)].push_back(c);

  Assignment out;
  std::vector<bool> row_used(n, false);
  std::vector<bool> col_used(m, false);
  for (std::size_t root = 0; root < n + m; ++root) {
    const auto& rows = comp_rows[root];
    const auto& cols = comp_cols[root];
    if (rows.empty() || cols.empty()) continue;

    const bool transpose = rows.size() > cols.size();
    const auto& small = transpose ? cols : rows;
    const auto& large = transpose ? rows : cols;
    // Any inadmissible entry costs more than a full set of admissible ones.
    const double penalty = (gate + 1.0) * static_cast<double>(small.size() + 1);
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(small.size()),
                        static_cast<Eigen::Index>(large.size()));
    for (std::size_t a = 0; a < small.size(); ++a) {
      for (std::size_t b = 0; b < large.size(); ++b) {
        const std::size_t r = transpose ? large[b] : small[a];
        const std::size_t c = transpose ? small[a] : large[b];
        sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            admissible(r, c) ? cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))
                             : penalty;
      }
    }
    const auto picks = hungarian(sub);
    for (std::size_t a = 0; a < small.size(); ++a) {
      const std::size_t r = transpose ? large[picks[a]] : small[a];
      const std::size_t c = transpose ? small[a] : large[picks[a]];
      if (!admissible(r, c)) continue;
      out.pairs.emplace_back(r, c);
      out.total_cost += cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      row_used[r] = true;
      col_used[c] = true;
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (std::size_t r = 0; r < n; ++r) {
    if (!row_used[r]) out.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

}  // namespace szloca
