#pragma once

// Independent reference implementations used as test oracles. Deliberately
// written without Eigen and without touching the library's solver path:
// plain normal equations, Gauss-Jordan inversion, explicit cluster loops,
// and iterative within-demeaning.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracles {

using Matrix = std::vector<std::vector<double>>;

inline Matrix make_matrix(std::size_t r, std::size_t c) { return Matrix(r, std::vector<double>(c, 0.0)); }

// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
    const std::size_t n = a.size();
    Matrix inv = make_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-300) throw std::runtime_error("oracle: singular matrix");
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);

        const double d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

// Least squares through the explicit pseudoinverse (X'X)^-1 X'y.
inline std::vector<double> least_squares(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const std::size_t k = x[0].size();
    Matrix xtx = make_matrix(k, k);
    std::vector<double> xty(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < k; ++a) {
            xty[a] += x[i][a] * y[i];
            for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][a] * x[i][b];
        }
    }
    Matrix inv = invert(xtx);
    std::vector<double> beta(k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) beta[a] += inv[a][b] * xty[b];
    return beta;
}

// CR1 cluster sandwich by direct summation:
//   c * (X'X)^-1 (sum_g s_g s_g') (X'X)^-1,  s_g = sum_{i in g} e_i x_i,
//   c = G/(G-1) * (N-1)/(N-K).
inline Matrix cluster_sandwich(const Matrix& x, const std::vector<double>& residuals,
                               const std::vector<int>& cluster_ids) {
    const std::size_t n = x.size();
    const std::size_t k = x[0].size();
    int g = 0;
    for (int c : cluster_ids) g = std::max(g, c + 1);

    Matrix xtx = make_matrix(k, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][a] * x[i][b];
    Matrix bread = invert(xtx);

    Matrix scores = make_matrix(static_cast<std::size_t>(g), k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < k; ++a)
            scores[static_cast<std::size_t>(cluster_ids[i])][a] += residuals[i] * x[i][a];

    Matrix meat = make_matrix(k, k);
    for (int gg = 0; gg < g; ++gg)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                meat[a][b] += scores[static_cast<std::size_t>(gg)][a] * scores[static_cast<std::size_t>(gg)][b];

    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double scale = (static_cast<double>(g) / (g - 1.0)) * ((nn - 1.0) / (nn - kk));

    Matrix tmp = make_matrix(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            for (std::size_t c = 0; c < k; ++c) tmp[a][b] += bread[a][c] * meat[c][b];
    Matrix out = make_matrix(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            for (std::size_t c = 0; c < k; ++c) out[a][b] += tmp[a][c] * bread[c][b];
            out[a][b] *= scale;
        }
    return out;
}

// Two-way within-transformation OLS: iteratively demean y and the non-dummy
// regressors by unit then period, regress without intercept. Recovers the
// treatment and control coefficients of the dummy-encoded fit.
inline std::vector<double> within_ols(const Matrix& slopes,  // N x M: treatment dummies + controls
                                      std::vector<double> y, const std::vector<int>& unit_of_row,
                                      const std::vector<int>& period_of_row, int n_units, int n_periods,
                                      double tol = 1e-13, int max_iters = 200) {
    const std::size_t n = y.size();
    const std::size_t m = slopes[0].size();

    std::vector<std::vector<double>> cols(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) cols[j][i] = slopes[i][j];

    auto demean_by = [&](std::vector<double>& v, const std::vector<int>& groups, int n_groups) {
        std::vector<double> sum(static_cast<std::size_t>(n_groups), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(n_groups), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[static_cast<std::size_t>(groups[i])] += v[i];
            ++cnt[static_cast<std::size_t>(groups[i])];
        }
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mean = sum[static_cast<std::size_t>(groups[i])] / cnt[static_cast<std::size_t>(groups[i])];
            v[i] -= mean;
            moved = std::max(moved, std::fabs(mean));
        }
        return moved;
    };

    auto sweep = [&](std::vector<double>& v) {
        double moved = 0.0;
        for (int it = 0; it < max_iters; ++it) {
            moved = demean_by(v, unit_of_row, n_units);
            moved = std::max(moved, demean_by(v, period_of_row, n_periods));
            if (moved < tol) break;
        }
    };

    sweep(y);
    for (auto& c : cols) sweep(c);

    Matrix x = make_matrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x[i][j] = cols[j][i];
    return least_squares(x, y);
}

}  // namespace oracles
