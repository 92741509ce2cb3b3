#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "didimpact/core.hpp"
#include "didimpact/csv.hpp"

namespace didimpact {

// A balanced long-format panel: one row per (unit, period) with a non-negative
// outcome, a {0,1} absorbing treatment indicator and named control columns.
// Datasets are immutable after construction; transforms return new values.

struct Observation {
    std::string unit;
    Period time;
    double outcome = 0.0;
    int treatment = 0;
    std::vector<double> controls;
};

class PanelDataset {
public:
    PanelDataset() = default;

    // Assembles and validates a panel from parsed observations. Row order of
    // the input is irrelevant; storage is canonical (units, then periods,
    // both sorted).
    static PanelDataset from_observations(std::vector<Observation> obs,
                                          std::vector<std::string> control_names) {
        PanelDataset p;
        p.control_names_ = std::move(control_names);

        std::set<std::string> unit_set;
        std::map<long long, std::string> period_set;
        for (const auto& o : obs) {
            unit_set.insert(o.unit);
            auto it = period_set.find(o.time.ordinal);
            if (it == period_set.end()) {
                period_set.emplace(o.time.ordinal, o.time.label);
            } else if (it->second != o.time.label) {
                throw PanelError("time ids '" + it->second + "' and '" + o.time.label +
                                 "' collide on the same ordinal; do not mix formats");
            }
        }
        p.units_.assign(unit_set.begin(), unit_set.end());
        for (const auto& [ord, label] : period_set) p.periods_.push_back(Period{ord, label});

        const std::size_t n = p.units_.size() * p.periods_.size();
        const std::size_t nc = p.control_names_.size();
        p.outcome_.assign(n, 0.0);
        p.treatment_.assign(n, 0);
        p.controls_.assign(n * nc, 0.0);
        std::vector<bool> seen(n, false);

        for (const auto& o : obs) {
            if (o.controls.size() != nc) {
                throw PanelError("observation (" + cell(o.unit, o.time.label) + ") has " +
                                 std::to_string(o.controls.size()) + " controls, expected " +
                                 std::to_string(nc));
            }
            if (!(o.outcome >= 0.0) || !std::isfinite(o.outcome)) {
                throw PanelError("outcome must be finite and >= 0 at (" + cell(o.unit, o.time.label) + ")");
            }
            if (o.treatment != 0 && o.treatment != 1) {
                throw PanelError("treatment must be exactly 0 or 1 at (" + cell(o.unit, o.time.label) + ")");
            }
            const std::size_t r = p.index_of(o.unit, o.time.ordinal);
            if (seen[r]) throw PanelError("duplicate cell (" + cell(o.unit, o.time.label) + ")");
            seen[r] = true;
            p.outcome_[r] = o.outcome;
            p.treatment_[r] = o.treatment;
            for (std::size_t c = 0; c < nc; ++c) p.controls_[r * nc + c] = o.controls[c];
        }

        for (std::size_t u = 0; u < p.units_.size(); ++u) {
            for (std::size_t t = 0; t < p.periods_.size(); ++t) {
                if (!seen[u * p.periods_.size() + t]) {
                    throw PanelError("unbalanced panel: missing cell (" +
                                     cell(p.units_[u], p.periods_[t].label) + ")");
                }
            }
        }
        p.check_absorbing_treatment();
        return p;
    }

    const std::vector<std::string>& units() const { return units_; }
    const std::vector<Period>& periods() const { return periods_; }
    const std::vector<std::string>& control_names() const { return control_names_; }

    std::size_t n_units() const { return units_.size(); }
    std::size_t n_periods() const { return periods_.size(); }
    std::size_t n_rows() const { return units_.size() * periods_.size(); }
    std::size_t n_controls() const { return control_names_.size(); }

    std::size_t row(std::size_t unit_idx, std::size_t period_idx) const {
        return unit_idx * periods_.size() + period_idx;
    }

    double outcome(std::size_t unit_idx, std::size_t period_idx) const {
        return outcome_[row(unit_idx, period_idx)];
    }
    int treatment(std::size_t unit_idx, std::size_t period_idx) const {
        return treatment_[row(unit_idx, period_idx)];
    }
    double control(std::size_t unit_idx, std::size_t period_idx, std::size_t c) const {
        return controls_[row(unit_idx, period_idx) * control_names_.size() + c];
    }

    int unit_index(const std::string& unit) const {
        auto it = std::lower_bound(units_.begin(), units_.end(), unit);
        if (it == units_.end() || *it != unit) return -1;
        return static_cast<int>(it - units_.begin());
    }

    int period_index(long long ordinal) const {
        auto it = std::lower_bound(periods_.begin(), periods_.end(), Period{ordinal, ""});
        if (it == periods_.end() || it->ordinal != ordinal) return -1;
        return static_cast<int>(it - periods_.begin());
    }

    int control_index(const std::string& name) const {
        for (std::size_t i = 0; i < control_names_.size(); ++i)
            if (control_names_[i] == name) return static_cast<int>(i);
        return -1;
    }

    Observation observation(std::size_t unit_idx, std::size_t period_idx) const {
        Observation o;
        o.unit = units_[unit_idx];
        o.time = periods_[period_idx];
        o.outcome = outcome(unit_idx, period_idx);
        o.treatment = treatment(unit_idx, period_idx);
        o.controls.resize(n_controls());
        for (std::size_t c = 0; c < o.controls.size(); ++c) o.controls[c] = control(unit_idx, period_idx, c);
        return o;
    }

    std::vector<std::string> treated_units() const {
        std::vector<std::string> out;
        for (std::size_t u = 0; u < units_.size(); ++u) {
            for (std::size_t t = 0; t < periods_.size(); ++t) {
                if (treatment(u, t) == 1) {
                    out.push_back(units_[u]);
                    break;
                }
            }
        }
        return out;
    }

    // First treated period of a unit, or -1 if never treated.
    int onset_period_index(std::size_t unit_idx) const {
        for (std::size_t t = 0; t < periods_.size(); ++t)
            if (treatment(unit_idx, t) == 1) return static_cast<int>(t);
        return -1;
    }

    friend bool operator==(const PanelDataset& a, const PanelDataset& b) {
        return a.units_ == b.units_ && a.periods_ == b.periods_ &&
               a.control_names_ == b.control_names_ && a.outcome_ == b.outcome_ &&
               a.treatment_ == b.treatment_ && a.controls_ == b.controls_;
    }

    // --- transforms (all return new datasets) ---

    PanelDataset with_outcome(std::vector<double> new_outcome) const {
        if (new_outcome.size() != outcome_.size()) throw PanelError("outcome vector size mismatch");
        PanelDataset p = *this;
        p.outcome_ = std::move(new_outcome);
        return p;
    }

    PanelDataset with_control_column(const std::string& name, std::vector<double> values) const {
        if (values.size() != n_rows()) throw PanelError("control column size mismatch for '" + name + "'");
        if (control_index(name) >= 0) throw PanelError("control column '" + name + "' already exists");
        PanelDataset p = *this;
        const std::size_t nc_old = control_names_.size();
        p.control_names_.push_back(name);
        p.controls_.assign(n_rows() * (nc_old + 1), 0.0);
        for (std::size_t r = 0; r < n_rows(); ++r) {
            for (std::size_t c = 0; c < nc_old; ++c) p.controls_[r * (nc_old + 1) + c] = controls_[r * nc_old + c];
            p.controls_[r * (nc_old + 1) + nc_old] = values[r];
        }
        return p;
    }

    PanelDataset restricted_to_units(const std::vector<std::string>& keep) const {
        std::vector<Observation> obs;
        for (const auto& unit : keep) {
            int u = unit_index(unit);
            if (u < 0) throw PanelError("unknown unit '" + unit + "'");
            for (std::size_t t = 0; t < periods_.size(); ++t)
                obs.push_back(observation(static_cast<std::size_t>(u), t));
        }
        return from_observations(std::move(obs), control_names_);
    }

    // Re-codes the treatment column: `unit` is 1 from `onset_ordinal` onward,
    // every other unit 0. Used by the placebo permutation.
    PanelDataset with_treatment_schedule(const std::string& unit, long long onset_ordinal) const {
        int u = unit_index(unit);
        if (u < 0) throw PanelError("unknown unit '" + unit + "'");
        PanelDataset p = *this;
        std::fill(p.treatment_.begin(), p.treatment_.end(), 0);
        for (std::size_t t = 0; t < periods_.size(); ++t) {
            if (periods_[t].ordinal >= onset_ordinal)
                p.treatment_[p.row(static_cast<std::size_t>(u), t)] = 1;
        }
        return p;
    }

private:
    static std::string cell(const std::string& unit, const std::string& time) {
        return "unit=" + unit + ", time=" + time;
    }

    std::size_t index_of(const std::string& unit, long long ordinal) const {
        int u = unit_index(unit);
        int t = period_index(ordinal);
        return static_cast<std::size_t>(u) * periods_.size() + static_cast<std::size_t>(t);
    }

    void check_absorbing_treatment() const {
        for (std::size_t u = 0; u < units_.size(); ++u) {
            bool treated = false;
            for (std::size_t t = 0; t < periods_.size(); ++t) {
                int v = treatment(u, t);
                if (treated && v == 0) {
                    throw PanelError("treatment for unit " + units_[u] +
                                     " reverts to 0 at time " + periods_[t].label +
                                     "; treatment must be absorbing");
                }
                treated = treated || (v == 1);
            }
        }
    }

    std::vector<std::string> units_;
    std::vector<Period> periods_;
    std::vector<std::string> control_names_;
    std::vector<double> outcome_;
    std::vector<int> treatment_;
    std::vector<double> controls_;  // n_rows x n_controls, row-major
};

// Column mapping for long-format CSV input. `controls` empty means "every
// column not otherwise mapped, in header order".
struct CsvSchema {
    std::string unit = "unit";
    std::string time = "time";
    std::string outcome = "outcome";
    std::string treatment = "treatment";
    std::vector<std::string> controls;
};

inline PanelDataset load_panel(std::istream& in, const CsvSchema& schema = {}) {
    csv::Table t = csv::read_table(in);

    auto need = [&](const std::string& name) {
        int c = t.column(name);
        if (c < 0) throw PanelError("csv is missing required column '" + name + "'");
        return c;
    };
    const int c_unit = need(schema.unit);
    const int c_time = need(schema.time);
    const int c_outcome = need(schema.outcome);
    const int c_treatment = need(schema.treatment);

    std::vector<std::string> control_names = schema.controls;
    std::vector<int> control_cols;
    if (control_names.empty()) {
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            int ii = static_cast<int>(i);
            if (ii == c_unit || ii == c_time || ii == c_outcome || ii == c_treatment) continue;
            control_names.push_back(t.header[i]);
            control_cols.push_back(ii);
        }
    } else {
        for (const auto& name : control_names) control_cols.push_back(need(name));
    }

    std::vector<Observation> obs;
    obs.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        Observation o;
        o.unit = row[c_unit];
        if (o.unit.empty()) throw PanelError("empty unit id in csv row");
        o.time = parse_period(row[c_time]);
        if (!csv::parse_double(row[c_outcome], o.outcome)) {
            throw PanelError("non-numeric outcome '" + row[c_outcome] + "' at (unit=" + o.unit +
                             ", time=" + o.time.label + ")");
        }
        double tr = 0.0;
        if (!csv::parse_double(row[c_treatment], tr) || (tr != 0.0 && tr != 1.0)) {
            throw PanelError("treatment must be 0 or 1, got '" + row[c_treatment] + "' at (unit=" +
                             o.unit + ", time=" + o.time.label + ")");
        }
        o.treatment = static_cast<int>(tr);
        o.controls.reserve(control_cols.size());
        for (std::size_t ci = 0; ci < control_cols.size(); ++ci) {
            double v = 0.0;
            if (!csv::parse_double(row[control_cols[ci]], v)) {
                throw PanelError("non-numeric control '" + control_names[ci] + "' value '" +
                                 row[control_cols[ci]] + "' at (unit=" + o.unit + ", time=" +
                                 o.time.label + ")");
            }
            o.controls.push_back(v);
        }
        obs.push_back(std::move(o));
    }
    return PanelDataset::from_observations(std::move(obs), std::move(control_names));
}

// Canonical long-format export; load_panel(serialize_panel(p)) == p.
inline void serialize_panel(const PanelDataset& p, std::ostream& out) {
    std::vector<std::string> header = {"unit", "time", "outcome", "treatment"};
    for (const auto& c : p.control_names()) header.push_back(c);
    csv::write_row(out, header);
    for (std::size_t u = 0; u < p.n_units(); ++u) {
        for (std::size_t t = 0; t < p.n_periods(); ++t) {
            std::vector<std::string> row = {p.units()[u], p.periods()[t].label,
                                            csv::format_double(p.outcome(u, t)),
                                            std::to_string(p.treatment(u, t))};
            for (std::size_t c = 0; c < p.n_controls(); ++c)
                row.push_back(csv::format_double(p.control(u, t, c)));
            csv::write_row(out, row);
        }
    }
}

// Natural log of one column ("outcome" or a control name). Non-positive
// values are a hard error naming the offending cell; no +1 offsets.
inline PanelDataset log_transform(const PanelDataset& p, const std::string& column) {
    auto transform = [&](auto get) {
        std::vector<double> out(p.n_rows());
        for (std::size_t u = 0; u < p.n_units(); ++u) {
            for (std::size_t t = 0; t < p.n_periods(); ++t) {
                double v = get(u, t);
                if (!(v > 0.0)) {
                    throw PanelError("log transform of '" + column + "' undefined for value " +
                                     csv::format_double(v, "%g") + " at (unit=" + p.units()[u] +
                                     ", time=" + p.periods()[t].label + ")");
                }
                out[p.row(u, t)] = std::log(v);
            }
        }
        return out;
    };

    if (column == "outcome") {
        return p.with_outcome(transform([&](std::size_t u, std::size_t t) { return p.outcome(u, t); }));
    }
    int c = p.control_index(column);
    if (c < 0) throw PanelError("log transform of unknown column '" + column + "'");
    auto values = transform([&](std::size_t u, std::size_t t) { return p.control(u, t, static_cast<std::size_t>(c)); });

    std::vector<Observation> obs;
    obs.reserve(p.n_rows());
    for (std::size_t u = 0; u < p.n_units(); ++u) {
        for (std::size_t t = 0; t < p.n_periods(); ++t) {
            Observation o = p.observation(u, t);
            o.controls[static_cast<std::size_t>(c)] = values[p.row(u, t)];
            obs.push_back(std::move(o));
        }
    }
    return PanelDataset::from_observations(std::move(obs), p.control_names());
}

// --- event calendar ---

struct EventEntry {
    std::string unit;
    std::string event_type;
    Date start;
    Date end;
};

struct EventCalendar {
    std::vector<EventEntry> entries;

    std::vector<std::string> event_types() const {
        std::set<std::string> s;
        for (const auto& e : entries) s.insert(e.event_type);
        return {s.begin(), s.end()};
    }
};

inline EventCalendar load_event_calendar(std::istream& in) {
    csv::Table t = csv::read_table(in);
    auto need = [&](const char* name) {
        int c = t.column(name);
        if (c < 0) throw PanelError(std::string("event calendar is missing column '") + name + "'");
        return c;
    };
    const int c_unit = need("unit");
    const int c_type = need("event_type");
    const int c_start = need("start_date");
    const int c_end = need("end_date");

    EventCalendar cal;
    for (const auto& row : t.rows) {
        EventEntry e;
        e.unit = row[c_unit];
        e.event_type = row[c_type];
        e.start = parse_date(row[c_start]);
        e.end = parse_date(row[c_end]);
        if (e.end.day_number() < e.start.day_number()) {
            throw PanelError("event for unit " + e.unit + " ends (" + row[c_end] +
                             ") before it starts (" + row[c_start] + ")");
        }
        cal.entries.push_back(std::move(e));
    }
    return cal;
}

// Event days of one type for one unit in one month: summed day overlap of all
// same-type events with the month, capped at the month's calendar length.
inline int cap_event_days(const EventCalendar& cal, const std::string& unit,
                          const std::string& event_type, int year, int month) {
    const long long first = Date{year, month, 1}.day_number();
    const long long last = Date{year, month, days_in_month(year, month)}.day_number();
    long long total = 0;
    for (const auto& e : cal.entries) {
        if (e.unit != unit || e.event_type != event_type) continue;
        const long long lo = std::max(first, e.start.day_number());
        const long long hi = std::min(last, e.end.day_number());
        if (hi >= lo) total += hi - lo + 1;
    }
    return static_cast<int>(std::min<long long>(total, last - first + 1));
}

// Builds one control column per event type (capped monthly day counts) and
// attaches them to the panel. Requires year-month time ids.
inline PanelDataset attach_event_controls(const PanelDataset& p, const EventCalendar& cal,
                                          const std::vector<std::string>& types,
                                          const std::string& prefix = "event_") {
    PanelDataset out = p;
    for (const auto& type : types) {
        std::vector<double> col(p.n_rows(), 0.0);
        for (std::size_t u = 0; u < p.n_units(); ++u) {
            for (std::size_t t = 0; t < p.n_periods(); ++t) {
                const Period& per = p.periods()[t];
                if (!period_is_year_month(per)) {
                    throw PanelError("event calendar requires YYYY-MM time ids; got '" + per.label + "'");
                }
                col[p.row(u, t)] = cap_event_days(cal, p.units()[u], type,
                                                  period_year(per), period_month(per));
            }
        }
        out = out.with_control_column(prefix + type, std::move(col));
    }
    return out;
}

}  // namespace didimpact
