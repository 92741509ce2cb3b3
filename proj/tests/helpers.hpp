#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "didimpact/panel.hpp"

namespace helpers {

// Small balanced-panel CSV builder for ingestion tests. `outcome_fn` and
// `treatment_fn` take (unit index, period index).
inline std::string panel_csv(int n_units, int n_periods,
                             std::function<double(int, int)> outcome_fn,
                             std::function<int(int, int)> treatment_fn = nullptr,
                             const std::vector<std::string>& control_names = {},
                             std::function<double(int, int, int)> control_fn = nullptr) {
    std::ostringstream out;
    out << "unit,time,outcome,treatment";
    for (const auto& c : control_names) out << "," << c;
    out << "\n";
    for (int u = 0; u < n_units; ++u) {
        for (int t = 0; t < n_periods; ++t) {
            out << "U" << (u < 9 ? "0" : "") << (u + 1) << "," << (t + 1) << ","
                << didimpact::csv::format_double(outcome_fn(u, t)) << ","
                << (treatment_fn ? treatment_fn(u, t) : 0);
            for (std::size_t c = 0; c < control_names.size(); ++c)
                out << "," << didimpact::csv::format_double(control_fn(u, t, static_cast<int>(c)));
            out << "\n";
        }
    }
    return out.str();
}

inline didimpact::PanelDataset load_from_string(const std::string& csv_text,
                                                const didimpact::CsvSchema& schema = {}) {
    std::istringstream in(csv_text);
    return didimpact::load_panel(in, schema);
}

}  // namespace helpers
