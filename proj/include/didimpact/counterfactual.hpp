#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "didimpact/did.hpp"

namespace didimpact {

// Observed vs. expected-without-treatment outcome of one treated unit over a
// window, everything in levels. The gap's minuend is the observed value, not
// the fitted one.
struct CounterfactualSeries {
    std::string unit;
    std::vector<Period> window;
    std::vector<double> observed;
    std::vector<double> expected;
    std::vector<double> gap_per_period;  // observed - expected
    double cumulative_gap = 0.0;
    bool smearing_applied = false;
};

// expected_t = exp(x_t'beta with every treatment dummy zeroed), controls at
// their observed values. Requires a log-outcome fit. The optional Duan
// smearing factor mean(exp(residual)) rescales expected *and* the fitted
// side consistently; it is off by default and reported when used.
inline CounterfactualSeries predict_counterfactual(const FitResult& fit, const DesignMatrix& d,
                                                   const std::string& unit,
                                                   long long window_start, long long window_end,
                                                   bool smearing = false) {
    if (fit.coefficients.size() != d.n_cols()) {
        throw CounterfactualError("fit and design have different column counts");
    }
    int u = -1;
    for (std::size_t i = 0; i < d.units.size(); ++i)
        if (d.units[i] == unit) u = static_cast<int>(i);
    if (u < 0) throw CounterfactualError("unknown unit '" + unit + "'");
    if (window_end < window_start) throw CounterfactualError("empty counterfactual window");
    if (window_start < d.periods.front().ordinal || window_end > d.periods.back().ordinal) {
        throw CounterfactualError("counterfactual window lies outside the panel periods");
    }

    double smear = 1.0;
    if (smearing) {
        smear = fit.residuals.array().exp().mean();
    }

    CounterfactualSeries s;
    s.unit = unit;
    s.smearing_applied = smearing;

    // rows of this unit inside the window, ordered by period
    std::vector<std::pair<int, long>> rows;  // (period index, row)
    for (long r = 0; r < d.n_rows(); ++r) {
        if (d.row_units[static_cast<std::size_t>(r)] != u) continue;
        const int t = d.row_periods[static_cast<std::size_t>(r)];
        const long long ord = d.periods[static_cast<std::size_t>(t)].ordinal;
        if (ord >= window_start && ord <= window_end) rows.emplace_back(t, r);
    }
    std::sort(rows.begin(), rows.end());

    for (const auto& [t, r] : rows) {
        bool treated_here = false;
        for (int col : d.treatment_columns) treated_here = treated_here || (d.X(r, col) != 0.0);
        if (!treated_here) {
            throw CounterfactualError("unit " + unit + " is untreated at " +
                                      d.periods[static_cast<std::size_t>(t)].label +
                                      "; counterfactual window must cover treated periods only");
        }

        double lp = 0.0;
        double lp_no_treat = 0.0;
        for (long c = 0; c < d.n_cols(); ++c) {
            const double xv = d.X(r, c);
            lp += xv * fit.coefficients[c];
            bool is_treat = false;
            for (int tc : d.treatment_columns) is_treat = is_treat || (tc == c);
            if (!is_treat) lp_no_treat += xv * fit.coefficients[c];
        }
        s.window.push_back(d.periods[static_cast<std::size_t>(t)]);
        s.observed.push_back(std::exp(lp + fit.residuals[r]));
        s.expected.push_back(std::exp(lp_no_treat) * smear);
        s.gap_per_period.push_back(s.observed.back() - s.expected.back());
        s.cumulative_gap += s.gap_per_period.back();
    }
    if (s.window.empty()) throw CounterfactualError("no treated rows of unit " + unit + " in the window");
    return s;
}

// Per-period group means in levels (observed and model-fitted), treated group
// vs. control group; the data behind the observed/estimated series chart.
struct GroupSeries {
    std::vector<Period> periods;
    std::vector<double> treated_observed;
    std::vector<double> treated_fitted;
    std::vector<double> control_observed;
    std::vector<double> control_fitted;
};

inline GroupSeries compute_group_series(const FitResult& fit, const DesignMatrix& d,
                                        bool log_scale = true) {
    // a unit belongs to the treated group if any of its rows carries a phase dummy
    std::vector<bool> treated_unit(d.units.size(), false);
    for (long r = 0; r < d.n_rows(); ++r) {
        for (int col : d.treatment_columns) {
            if (d.X(r, col) != 0.0) treated_unit[static_cast<std::size_t>(d.row_units[static_cast<std::size_t>(r)])] = true;
        }
    }

    const std::size_t np = d.periods.size();
    GroupSeries g;
    g.periods = d.periods;
    g.treated_observed.assign(np, 0.0);
    g.treated_fitted.assign(np, 0.0);
    g.control_observed.assign(np, 0.0);
    g.control_fitted.assign(np, 0.0);
    std::vector<long> n_treated(np, 0), n_control(np, 0);

    for (long r = 0; r < d.n_rows(); ++r) {
        const auto t = static_cast<std::size_t>(d.row_periods[static_cast<std::size_t>(r)]);
        const double fitted_level = log_scale ? std::exp(fit.fitted[r]) : fit.fitted[r];
        const double observed_level =
            log_scale ? std::exp(fit.fitted[r] + fit.residuals[r]) : fit.fitted[r] + fit.residuals[r];
        if (treated_unit[static_cast<std::size_t>(d.row_units[static_cast<std::size_t>(r)])]) {
            g.treated_observed[t] += observed_level;
            g.treated_fitted[t] += fitted_level;
            ++n_treated[t];
        } else {
            g.control_observed[t] += observed_level;
            g.control_fitted[t] += fitted_level;
            ++n_control[t];
        }
    }
    for (std::size_t t = 0; t < np; ++t) {
        if (n_treated[t] > 0) {
            g.treated_observed[t] /= static_cast<double>(n_treated[t]);
            g.treated_fitted[t] /= static_cast<double>(n_treated[t]);
        }
        if (n_control[t] > 0) {
            g.control_observed[t] /= static_cast<double>(n_control[t]);
            g.control_fitted[t] /= static_cast<double>(n_control[t]);
        }
    }
    return g;
}

}  // namespace didimpact
