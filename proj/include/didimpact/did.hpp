#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "didimpact/estimator.hpp"

namespace didimpact {

struct DidModel {
    DesignMatrix design;
    Eigen::VectorXd y;
    ModelSpec spec;
};

struct AteEstimate {
    std::string phase;
    double delta = 0.0;
    double se = 0.0;
    double p_value = 1.0;
    double pct_change = 0.0;  // 100 * (exp(delta) - 1)
};

namespace detail {

// The union of a unit's phase windows must reproduce its treatment column
// exactly; anything else silently mislabels treated cells as control.
inline void check_window_consistency(const PanelDataset& data, const ModelSpec& spec) {
    std::vector<std::vector<const PhaseWindow*>> windows(data.n_units());
    for (const auto& a : spec.treatment) {
        int u = data.unit_index(a.unit);
        if (u < 0) throw DidError("treatment assigned to unknown unit '" + a.unit + "'");
        const long long first = data.periods().front().ordinal;
        const long long last = data.periods().back().ordinal;
        for (const auto& w : a.phases) {
            if (w.start.ordinal < first || w.start.ordinal > last) {
                throw DidError("phase '" + w.label + "' of unit " + a.unit + " starts at " +
                               w.start.label + ", outside the panel range [" +
                               data.periods().front().label + ", " + data.periods().back().label + "]");
            }
            if (w.end && (w.end->ordinal > last || w.end->ordinal < first)) {
                throw DidError("phase '" + w.label + "' of unit " + a.unit + " ends at " +
                               w.end->label + ", outside the panel range");
            }
            windows[static_cast<std::size_t>(u)].push_back(&w);
        }
    }
    for (std::size_t u = 0; u < data.n_units(); ++u) {
        for (std::size_t t = 0; t < data.n_periods(); ++t) {
            const long long ord = data.periods()[t].ordinal;
            bool covered = false;
            for (const PhaseWindow* w : windows[u]) covered = covered || in_window(*w, ord);
            const bool treated = data.treatment(u, t) == 1;
            if (covered != treated) {
                throw DidError("treatment windows disagree with the panel's treatment column at (unit=" +
                               data.units()[u] + ", time=" + data.periods()[t].label + "): column says " +
                               (treated ? "treated" : "untreated") + ", windows say " +
                               (covered ? "treated" : "untreated"));
            }
        }
    }
}

}  // namespace detail

// Assembles the two-way fixed-effects DiD design and outcome vector. One
// dummy column per phase label; controls log-transformed where flagged.
inline DidModel build_did_model(const PanelDataset& data, const ModelSpec& spec) {
    spec.validate();
    if (spec.treatment.empty()) {
        throw DidError("model degenerate: no treated unit (no treatment windows declared)");
    }
    if (data.n_units() < 2) throw DidError("need at least 2 units to identify a treatment effect");
    detail::check_window_consistency(data, spec);

    DidModel m;
    m.spec = spec;
    m.design = build_design(data, spec);

    for (int col : m.design.treatment_columns) {
        if (m.design.X.col(col).sum() == 0.0) {
            throw DidError("model degenerate: phase dummy '" + m.design.column_names[static_cast<std::size_t>(col)] +
                           "' is zero everywhere");
        }
    }

    const PanelDataset working = spec.log_outcome ? log_transform(data, "outcome") : data;
    m.y.resize(static_cast<long>(working.n_rows()));
    for (long r = 0; r < m.y.size(); ++r) {
        const auto u = static_cast<std::size_t>(m.design.row_units[static_cast<std::size_t>(r)]);
        const auto t = static_cast<std::size_t>(m.design.row_periods[static_cast<std::size_t>(r)]);
        m.y[r] = working.outcome(u, t);
    }
    return m;
}

inline FitResult fit_did(const PanelDataset& data, const ModelSpec& spec) {
    DidModel m = build_did_model(data, spec);
    return fit_ols(m.design, m.y);
}

inline double pct_change_from_log_coef(double delta) { return 100.0 * (std::exp(delta) - 1.0); }

inline AteEstimate extract_ate(const FitResult& fit, const std::string& phase) {
    const std::string name = "treatment[" + phase + "]";
    int i = fit.index(name);
    if (i < 0) throw DidError("unknown treatment phase '" + phase + "'");
    AteEstimate e;
    e.phase = phase;
    e.delta = fit.coefficients[i];
    e.se = fit.standard_errors[i];
    e.p_value = fit.p_values[i];
    e.pct_change = pct_change_from_log_coef(e.delta);
    return e;
}

}  // namespace didimpact
