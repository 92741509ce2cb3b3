#pragma once

#include <optional>
#include <string>
#include <vector>

#include "didimpact/core.hpp"

namespace didimpact {

// One treatment phase for one unit: [start, end] in panel periods, end open
// (= panel end) when absent. Phases of a unit must be disjoint and ordered.
struct PhaseWindow {
    std::string label;
    Period start;
    std::optional<Period> end;
};

struct TreatmentAssignment {
    std::string unit;
    std::vector<PhaseWindow> phases;
};

inline bool in_window(const PhaseWindow& w, long long ordinal) {
    if (ordinal < w.start.ordinal) return false;
    if (w.end && ordinal > w.end->ordinal) return false;
    return true;
}

struct ControlTerm {
    std::string column;
    bool log = false;

    std::string design_name() const { return log ? "ln(" + column + ")" : column; }
};

// Declarative description of one regression: outcome transform, treatment
// phases, controls, two-way fixed effects, clustering on units.
struct ModelSpec {
    std::string outcome = "outcome";
    bool log_outcome = true;
    std::vector<TreatmentAssignment> treatment;
    std::vector<ControlTerm> controls;
    double alpha = 0.1;

    // Phase labels in declaration order, de-duplicated (several units may
    // share a phase label and thus a dummy column).
    std::vector<std::string> phase_labels() const {
        std::vector<std::string> out;
        for (const auto& a : treatment) {
            for (const auto& w : a.phases) {
                bool known = false;
                for (const auto& l : out) known = known || (l == w.label);
                if (!known) out.push_back(w.label);
            }
        }
        return out;
    }

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 0.5)) {
            throw DidError("alpha must lie in (0, 0.5], got " + std::to_string(alpha));
        }
        for (const auto& a : treatment) {
            if (a.phases.empty()) throw DidError("treatment entry for unit " + a.unit + " has no phases");
            long long prev_end = -(1LL << 62);
            for (const auto& w : a.phases) {
                if (w.label.empty()) throw DidError("empty phase label for unit " + a.unit);
                const long long s = w.start.ordinal;
                const long long e = w.end ? w.end->ordinal : (1LL << 62);
                if (e < s) {
                    throw DidError("phase '" + w.label + "' of unit " + a.unit +
                                   " ends before it starts");
                }
                if (s <= prev_end) {
                    throw DidError("phase windows of unit " + a.unit +
                                   " overlap or are out of order at phase '" + w.label + "'");
                }
                prev_end = e;
            }
        }
    }
};

}  // namespace didimpact
