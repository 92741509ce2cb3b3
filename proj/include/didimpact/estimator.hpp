#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "didimpact/core.hpp"
#include "didimpact/model_spec.hpp"
#include "didimpact/panel.hpp"

namespace didimpact {

// Dummy-encoded two-way fixed-effects design. Column layout is deterministic:
// intercept, one dummy per treatment phase, controls, unit dummies (first
// unit in sorted order dropped), period dummies (first period dropped).
struct DesignMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> column_names;
    std::vector<int> cluster_ids;   // per row: unit index
    std::vector<int> row_units;     // per row: unit index into `units`
    std::vector<int> row_periods;   // per row: period index into `periods`
    std::vector<std::string> units;
    std::vector<Period> periods;
    std::vector<int> treatment_columns;  // aligned with `phase_labels`
    std::vector<std::string> phase_labels;

    long n_rows() const { return static_cast<long>(X.rows()); }
    long n_cols() const { return static_cast<long>(X.cols()); }

    int n_clusters() const {
        int g = 0;
        for (int c : cluster_ids) g = std::max(g, c + 1);
        return g;
    }

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < column_names.size(); ++i)
            if (column_names[i] == name) return static_cast<int>(i);
        return -1;
    }

    int phase_column(const std::string& label) const {
        for (std::size_t i = 0; i < phase_labels.size(); ++i)
            if (phase_labels[i] == label) return treatment_columns[i];
        return -1;
    }
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;      // cluster-robust, CR1-scaled
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;        // two-sided, t(G-1)
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    double r_squared = 0.0;
    long n_obs = 0;
    long n_params = 0;
    long n_clusters = 0;

    int index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    double coef(const std::string& name) const {
        int i = index(name);
        if (i < 0) throw EstimatorError("no coefficient named '" + name + "'");
        return coefficients[i];
    }
    double se(const std::string& name) const {
        int i = index(name);
        if (i < 0) throw EstimatorError("no coefficient named '" + name + "'");
        return standard_errors[i];
    }
    double p_value(const std::string& name) const {
        int i = index(name);
        if (i < 0) throw EstimatorError("no coefficient named '" + name + "'");
        return p_values[i];
    }
};

namespace detail {

// Column names past the numerical rank, in pivot order; what the
// rank-deficiency error reports.
inline std::string dependent_columns(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                                     const std::vector<std::string>& names) {
    std::string out;
    const auto& perm = qr.colsPermutation().indices();
    for (long i = qr.rank(); i < static_cast<long>(names.size()); ++i) {
        if (!out.empty()) out += ", ";
        out += names[static_cast<std::size_t>(perm[i])];
    }
    return out;
}

}  // namespace detail

inline DesignMatrix build_design(const PanelDataset& data, const ModelSpec& spec) {
    spec.validate();

    const std::size_t n_units = data.n_units();
    const std::size_t n_periods = data.n_periods();
    const long n = static_cast<long>(data.n_rows());

    DesignMatrix d;
    d.units = data.units();
    d.periods = data.periods();
    d.phase_labels = spec.phase_labels();

    const std::size_t n_phases = d.phase_labels.size();
    const std::size_t n_controls = spec.controls.size();
    const long k = static_cast<long>(1 + n_phases + n_controls + (n_units - 1) + (n_periods - 1));

    d.column_names.reserve(static_cast<std::size_t>(k));
    d.column_names.push_back("const");
    for (const auto& label : d.phase_labels) {
        d.column_names.push_back("treatment[" + label + "]");
        d.treatment_columns.push_back(static_cast<int>(d.column_names.size()) - 1);
    }
    for (const auto& c : spec.controls) {
        if (data.control_index(c.column) < 0) {
            throw EstimatorError("model references unknown control column '" + c.column + "'");
        }
        d.column_names.push_back(c.design_name());
    }
    const long unit_block = static_cast<long>(d.column_names.size());
    for (std::size_t u = 1; u < n_units; ++u) d.column_names.push_back("unit[" + data.units()[u] + "]");
    const long period_block = static_cast<long>(d.column_names.size());
    for (std::size_t t = 1; t < n_periods; ++t)
        d.column_names.push_back("period[" + data.periods()[t].label + "]");

    d.X = Eigen::MatrixXd::Zero(n, k);
    d.cluster_ids.resize(static_cast<std::size_t>(n));
    d.row_units.resize(static_cast<std::size_t>(n));
    d.row_periods.resize(static_cast<std::size_t>(n));

    // phase windows per (unit index, phase index)
    std::vector<std::vector<const PhaseWindow*>> windows(n_units);
    for (const auto& a : spec.treatment) {
        int u = data.unit_index(a.unit);
        if (u < 0) throw EstimatorError("treatment assigned to unknown unit '" + a.unit + "'");
        for (const auto& w : a.phases) windows[static_cast<std::size_t>(u)].push_back(&w);
    }

    long r = 0;
    for (std::size_t u = 0; u < n_units; ++u) {
        for (std::size_t t = 0; t < n_periods; ++t, ++r) {
            d.cluster_ids[static_cast<std::size_t>(r)] = static_cast<int>(u);
            d.row_units[static_cast<std::size_t>(r)] = static_cast<int>(u);
            d.row_periods[static_cast<std::size_t>(r)] = static_cast<int>(t);

            d.X(r, 0) = 1.0;
            const long long ord = data.periods()[t].ordinal;
            for (const PhaseWindow* w : windows[u]) {
                if (in_window(*w, ord)) {
                    for (std::size_t pi = 0; pi < n_phases; ++pi) {
                        if (d.phase_labels[pi] == w->label) d.X(r, d.treatment_columns[pi]) = 1.0;
                    }
                }
            }
            for (std::size_t c = 0; c < n_controls; ++c) {
                const auto& term = spec.controls[c];
                double v = data.control(u, t, static_cast<std::size_t>(data.control_index(term.column)));
                if (term.log) {
                    if (!(v > 0.0)) {
                        throw EstimatorError("log transform of control '" + term.column +
                                             "' undefined for value " + csv::format_double(v, "%g") +
                                             " at (unit=" + data.units()[u] + ", time=" +
                                             data.periods()[t].label + ")");
                    }
                    v = std::log(v);
                }
                d.X(r, static_cast<long>(1 + n_phases + c)) = v;
            }
            if (u > 0) d.X(r, unit_block + static_cast<long>(u) - 1) = 1.0;
            if (t > 0) d.X(r, period_block + static_cast<long>(t) - 1) = 1.0;
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    if (qr.rank() < k) {
        throw EstimatorError("design matrix is rank deficient; linearly dependent columns: " +
                             detail::dependent_columns(qr, d.column_names));
    }
    return d;
}

namespace detail {

// (X'X)^-1 from the pivoted QR factors: X P = Q R  =>  (X'X)^-1 = P R^-1 R^-T P'.
inline Eigen::MatrixXd xtx_inverse(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
    const long k = qr.matrixQR().cols();
    Eigen::MatrixXd rinv = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd a = rinv * rinv.transpose();
    return qr.colsPermutation() * a * qr.colsPermutation().transpose();
}

inline Eigen::MatrixXd cluster_covariance_impl(const DesignMatrix& d,
                                               const Eigen::VectorXd& residuals,
                                               const Eigen::MatrixXd& xtx_inv) {
    const long n = d.n_rows();
    const long k = d.n_cols();
    const int g = d.n_clusters();
    if (g < 2) throw EstimatorError("cluster-robust covariance needs at least 2 clusters, got " +
                                    std::to_string(g));
    if (k >= n) throw EstimatorError("covariance undefined: parameters (" + std::to_string(k) +
                                     ") >= observations (" + std::to_string(n) + ")");
    if (residuals.size() != n) throw EstimatorError("residual vector length does not match design");

    // meat: sum over clusters of (X_g' e_g)(X_g' e_g)'
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(g, k);
    for (long i = 0; i < n; ++i) {
        scores.row(d.cluster_ids[static_cast<std::size_t>(i)]) += residuals[i] * d.X.row(i);
    }
    Eigen::MatrixXd meat = scores.transpose() * scores;

    const double c = (static_cast<double>(g) / (g - 1.0)) *
                     ((static_cast<double>(n) - 1.0) / (static_cast<double>(n) - static_cast<double>(k)));
    Eigen::MatrixXd v = c * (xtx_inv * meat * xtx_inv);
    return 0.5 * (v + v.transpose());  // enforce exact symmetry
}

}  // namespace detail

// CR1 sandwich: (X'X)^-1 (sum_g X_g'e_g e_g'X_g) (X'X)^-1 scaled by
// G/(G-1) * (N-1)/(N-K). Inference downstream uses t with G-1 df.
inline Eigen::MatrixXd cluster_robust_covariance(const DesignMatrix& d,
                                                 const Eigen::VectorXd& residuals) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    if (qr.rank() < d.n_cols()) {
        throw EstimatorError("design matrix is rank deficient; linearly dependent columns: " +
                             detail::dependent_columns(qr, d.column_names));
    }
    return detail::cluster_covariance_impl(d, residuals, detail::xtx_inverse(qr));
}

inline double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& residuals) {
    if (y.size() != residuals.size()) throw EstimatorError("r_squared: length mismatch");
    if (y.size() < 2) throw EstimatorError("r_squared needs at least 2 observations");
    const double mean = y.mean();
    const double sst = (y.array() - mean).square().sum();
    if (!(sst > 0.0)) throw EstimatorError("r_squared undefined: outcome has zero variance");
    const double ssr = residuals.squaredNorm();
    return 1.0 - ssr / sst;
}

// OLS via column-pivoted Householder QR (the dummy-heavy design is too
// ill-conditioned for normal equations), plus cluster-robust inference.
inline FitResult fit_ols(const DesignMatrix& d, const Eigen::VectorXd& y) {
    const long n = d.n_rows();
    const long k = d.n_cols();
    if (y.size() != n) throw EstimatorError("outcome vector length " + std::to_string(y.size()) +
                                            " does not match design rows " + std::to_string(n));
    if (n <= k) throw EstimatorError("underdetermined fit: N=" + std::to_string(n) +
                                     " <= K=" + std::to_string(k));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    if (qr.rank() < k) {
        throw EstimatorError("design matrix is rank deficient; linearly dependent columns: " +
                             detail::dependent_columns(qr, d.column_names));
    }

    FitResult fit;
    fit.names = d.column_names;
    fit.coefficients = qr.solve(y);
    fit.fitted = d.X * fit.coefficients;
    fit.residuals = y - fit.fitted;
    fit.n_obs = n;
    fit.n_params = k;
    fit.n_clusters = d.n_clusters();
    fit.r_squared = r_squared(y, fit.residuals);

    fit.covariance = detail::cluster_covariance_impl(d, fit.residuals, detail::xtx_inverse(qr));
    fit.standard_errors.resize(k);
    fit.t_stats.resize(k);
    fit.p_values.resize(k);
    const boost::math::students_t t_dist(static_cast<double>(fit.n_clusters - 1));
    for (long i = 0; i < k; ++i) {
        const double var = std::max(0.0, fit.covariance(i, i));
        const double se = std::sqrt(var);
        fit.standard_errors[i] = se;
        if (se > 0.0) {
            const double t = fit.coefficients[i] / se;
            fit.t_stats[i] = t;
            fit.p_values[i] = 2.0 * boost::math::cdf(t_dist, -std::abs(t));
        } else {
            // degenerate (perfect-fit) limit
            const bool zero = fit.coefficients[i] == 0.0;
            fit.t_stats[i] = zero ? 0.0 : std::numeric_limits<double>::infinity() *
                                              (fit.coefficients[i] > 0 ? 1.0 : -1.0);
            fit.p_values[i] = zero ? 1.0 : 0.0;
        }
    }
    return fit;
}

inline std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

}  // namespace didimpact
