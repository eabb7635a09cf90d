#include "hta/hungarian.hpp"

#include <algorithm>
#include <limits>

#include "hta/error.hpp"

namespace hta {
namespace {

// Requires rows <= cols. Returns row -> col.
std::vector<Eigen::Index> solve_wide(const Eigen::Ref<const Eigen::MatrixXd>& a) {
    const Eigen::Index n = a.rows();
    const Eigen::Index m = a.cols();
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; p[j] is the row assigned to column j (0 = none).
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
    std::vector<Eigen::Index> p(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
    std::vector<double> minv(static_cast<std::size_t>(m + 1));
    std::vector<char> used(static_cast<std::size_t>(m + 1));

    for (Eigen::Index i = 1; i <= n; ++i) {
        p[0] = i;
        Eigen::Index j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Eigen::Index i0 = p[static_cast<std::size_t>(j0)];
            double delta = inf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= m; ++j) {
                const auto sj = static_cast<std::size_t>(j);
                if (used[sj]) continue;
                const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
                if (cur < minv[sj]) {
                    minv[sj] = cur;
                    way[sj] = j0;
                }
                if (minv[sj] < delta) {
                    delta = minv[sj];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= m; ++j) {
                const auto sj = static_cast<std::size_t>(j);
                if (used[sj]) {
                    u[static_cast<std::size_t>(p[sj])] += delta;
                    v[sj] -= delta;
                } else {
                    minv[sj] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<Eigen::Index> row_to_col(static_cast<std::size_t>(n), kUnassigned);
    for (Eigen::Index j = 1; j <= m; ++j)
        if (p[static_cast<std::size_t>(j)] != 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

}  // namespace

std::vector<Eigen::Index> min_cost_assignment(const Eigen::Ref<const Eigen::MatrixXd>& cost) {
    if (!cost.allFinite()) throw DomainError("min_cost_assignment: costs must be finite");
    const Eigen::Index rows = cost.rows();
    const Eigen::Index cols = cost.cols();
    if (rows == 0 || cols == 0) return std::vector<Eigen::Index>(static_cast<std::size_t>(rows), kUnassigned);
    if (rows <= cols) return solve_wide(cost);

    const Eigen::MatrixXd transposed = cost.transpose();
    const auto col_to_row = solve_wide(transposed);
    std::vector<Eigen::Index> row_to_col(static_cast<std::size_t>(rows), kUnassigned);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const Eigen::Index r = col_to_row[static_cast<std::size_t>(c)];
        if (r != kUnassigned) row_to_col[static_cast<std::size_t>(r)] = c;
    }
    return row_to_col;
}

}  // namespace hta
