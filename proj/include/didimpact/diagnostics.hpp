#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "didimpact/did.hpp"

namespace didimpact {

struct TrendTestResult {
    double interaction_coef = 0.0;
    double se = 0.0;
    double p_value = 1.0;
    bool passed = true;  // p >= alpha: no significant pre-trend divergence
    int pre_periods = 0;
};

struct PlaceboEstimate {
    std::string pseudo_unit;
    std::string phase;
    double delta = 0.0;
    double se = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

struct DiagnosticsReport {
    std::optional<TrendTestResult> parallel_trends;
    std::vector<PlaceboEstimate> placebo;
    bool placebo_passed = true;  // no pseudo effect significant at alpha
    double alpha = 0.1;
};

namespace detail {

inline long long earliest_onset(const ModelSpec& spec) {
    long long onset = (1LL << 62);
    for (const auto& a : spec.treatment)
        for (const auto& w : a.phases) onset = std::min(onset, w.start.ordinal);
    return onset;
}

inline bool is_treated_unit(const ModelSpec& spec, const std::string& unit) {
    for (const auto& a : spec.treatment)
        if (a.unit == unit) return true;
    return false;
}

}  // namespace detail

// Pre-treatment auxiliary regression
//   ln Y = a + g*GROUP + gamma*t + eta*(GROUP x t) + controls + e
// on the periods strictly before the earliest onset. A significant eta means
// the two groups trended apart before treatment. Cluster-robust inference on
// units; t is the raw period ordinal (centered for conditioning only, which
// leaves eta and its t-statistic unchanged).
inline TrendTestResult parallel_trends_test(const PanelDataset& data, const ModelSpec& spec,
                                            bool include_controls = true) {
    spec.validate();
    if (spec.treatment.empty()) throw DiagnosticsError("parallel trends test needs a treated group");

    const long long onset = detail::earliest_onset(spec);
    std::vector<int> pre_idx;
    for (std::size_t t = 0; t < data.n_periods(); ++t)
        if (data.periods()[t].ordinal < onset) pre_idx.push_back(static_cast<int>(t));
    if (pre_idx.size() < 2) {
        throw DiagnosticsError("parallel trends test needs at least 2 pre-treatment periods, found " +
                               std::to_string(pre_idx.size()));
    }

    int n_treated = 0;
    for (const auto& u : data.units()) n_treated += detail::is_treated_unit(spec, u) ? 1 : 0;
    if (n_treated == 0 || n_treated == static_cast<int>(data.n_units())) {
        throw DiagnosticsError("parallel trends test needs both a treated and a control group");
    }

    const PanelDataset working = spec.log_outcome ? log_transform(data, "outcome") : data;

    double t_mean = 0.0;
    for (int t : pre_idx) t_mean += static_cast<double>(data.periods()[static_cast<std::size_t>(t)].ordinal);
    t_mean /= static_cast<double>(pre_idx.size());

    const long n = static_cast<long>(data.n_units() * pre_idx.size());
    const long k = 4 + static_cast<long>(include_controls ? spec.controls.size() : 0);

    DesignMatrix d;
    d.units = data.units();
    for (int t : pre_idx) d.periods.push_back(data.periods()[static_cast<std::size_t>(t)]);
    d.column_names = {"const", "group", "trend", "group:trend"};
    if (include_controls)
        for (const auto& c : spec.controls) d.column_names.push_back(c.design_name());
    d.X = Eigen::MatrixXd::Zero(n, k);
    d.cluster_ids.resize(static_cast<std::size_t>(n));
    d.row_units.resize(static_cast<std::size_t>(n));
    d.row_periods.resize(static_cast<std::size_t>(n));
    Eigen::VectorXd y(n);

    long r = 0;
    for (std::size_t u = 0; u < data.n_units(); ++u) {
        const double group = detail::is_treated_unit(spec, data.units()[u]) ? 1.0 : 0.0;
        for (std::size_t pi = 0; pi < pre_idx.size(); ++pi, ++r) {
            const auto t = static_cast<std::size_t>(pre_idx[pi]);
            const double trend = static_cast<double>(data.periods()[t].ordinal) - t_mean;
            d.cluster_ids[static_cast<std::size_t>(r)] = static_cast<int>(u);
            d.row_units[static_cast<std::size_t>(r)] = static_cast<int>(u);
            d.row_periods[static_cast<std::size_t>(r)] = static_cast<int>(pi);
            d.X(r, 0) = 1.0;
            d.X(r, 1) = group;
            d.X(r, 2) = trend;
            d.X(r, 3) = group * trend;
            if (include_controls) {
                for (std::size_t c = 0; c < spec.controls.size(); ++c) {
                    const auto& term = spec.controls[c];
                    double v = data.control(u, t, static_cast<std::size_t>(data.control_index(term.column)));
                    if (term.log) {
                        if (!(v > 0.0)) {
                            throw DiagnosticsError("log of control '" + term.column +
                                                   "' undefined at (unit=" + data.units()[u] +
                                                   ", time=" + data.periods()[t].label + ")");
                        }
                        v = std::log(v);
                    }
                    d.X(r, 4 + static_cast<long>(c)) = v;
                }
            }
            y[r] = working.outcome(u, t);
        }
    }

    FitResult fit;
    try {
        fit = fit_ols(d, y);
    } catch (const EstimatorError& e) {
        throw DiagnosticsError(std::string("pre-trend regression failed: ") + e.what());
    }

    TrendTestResult res;
    res.interaction_coef = fit.coef("group:trend");
    res.se = fit.se("group:trend");
    res.p_value = fit.p_value("group:trend");
    res.passed = res.p_value >= spec.alpha;
    res.pre_periods = static_cast<int>(pre_idx.size());
    return res;
}

// Leave-one-in placebo: drop the true treated unit(s), then assign the true
// schedule to each control unit in turn and refit the full model. Output is
// sorted by pseudo unit id; rows of the true treated unit are never read.
inline std::vector<PlaceboEstimate> placebo_test(const PanelDataset& data, const ModelSpec& spec) {
    spec.validate();
    if (spec.treatment.empty()) throw DiagnosticsError("placebo test needs a treated unit to mimic");

    std::vector<std::string> control_units;
    for (const auto& u : data.units())
        if (!detail::is_treated_unit(spec, u)) control_units.push_back(u);
    if (control_units.size() < 2) {
        throw DiagnosticsError("placebo test needs at least 2 control units, found " +
                               std::to_string(control_units.size()));
    }

    const PanelDataset control_panel = data.restricted_to_units(control_units);
    const std::vector<PhaseWindow>& true_phases = spec.treatment.front().phases;
    const long long onset = detail::earliest_onset(spec);

    std::vector<PlaceboEstimate> out;
    for (const auto& pseudo : control_units) {
        PanelDataset pseudo_panel = control_panel.with_treatment_schedule(pseudo, onset);

        ModelSpec pseudo_spec = spec;
        pseudo_spec.treatment.clear();
        TreatmentAssignment a;
        a.unit = pseudo;
        a.phases = true_phases;
        pseudo_spec.treatment.push_back(std::move(a));

        FitResult fit;
        try {
            fit = fit_did(pseudo_panel, pseudo_spec);
        } catch (const Error& e) {
            throw DiagnosticsError("placebo fit for pseudo unit " + pseudo + " failed: " + e.what());
        }
        for (const auto& label : pseudo_spec.phase_labels()) {
            AteEstimate ate = extract_ate(fit, label);
            PlaceboEstimate pe;
            pe.pseudo_unit = pseudo;
            pe.phase = label;
            pe.delta = ate.delta;
            pe.se = ate.se;
            pe.p_value = ate.p_value;
            pe.significant = ate.p_value < spec.alpha;
            out.push_back(std::move(pe));
        }
    }
    return out;
}

inline DiagnosticsReport run_diagnostics(const PanelDataset& data, const ModelSpec& spec,
                                         bool trends, bool placebo, bool trend_controls = true) {
    DiagnosticsReport rep;
    rep.alpha = spec.alpha;
    if (trends) rep.parallel_trends = parallel_trends_test(data, spec, trend_controls);
    if (placebo) {
        rep.placebo = placebo_test(data, spec);
        rep.placebo_passed = true;
        for (const auto& pe : rep.placebo) rep.placebo_passed = rep.placebo_passed && !pe.significant;
    }
    return rep;
}

}  // namespace didimpact
