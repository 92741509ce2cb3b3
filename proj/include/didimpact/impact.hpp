#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "didimpact/core.hpp"
#include "didimpact/counterfactual.hpp"
#include "didimpact/csv.hpp"

namespace didimpact {

// Demand-side cascade per industry:
//   gross turnover  T  = additional_units * avex
//   net turnover    t  = T * (1 - theta/100)        (VAT deducted)
//   production val. PV = t * psi/100
//   direct effects  DE = PV * omega/100             (gross value added)
//   indirect        IE = PV - DE                    (intermediate inputs)
// Everything chains in full precision; rounding happens only at display.

// psi may exceed 100 slightly when inventory changes push the production
// value above net turnover.
inline constexpr double kMaxPsiPercent = 105.0;

struct IndustryCoefficients {
    std::string industry;
    double avex = 0.0;   // EUR per additional unit (overnight stay)
    double theta = 0.0;  // average VAT %
    double psi = 0.0;    // production-value share of net turnover %
    double omega = 0.0;  // gross-value-added share of production value %

    void validate() const {
        if (industry.empty()) throw ImpactError("industry label must not be empty");
        if (!(avex >= 0.0)) throw ImpactError(industry + ": avex must be >= 0");
        if (!(theta >= 0.0 && theta < 100.0))
            throw ImpactError(industry + ": theta must lie in [0, 100), got " + csv::format_double(theta, "%g"));
        if (!(psi > 0.0 && psi <= kMaxPsiPercent))
            throw ImpactError(industry + ": psi must lie in (0, " + csv::format_double(kMaxPsiPercent, "%g") +
                              "], got " + csv::format_double(psi, "%g"));
        if (!(omega > 0.0 && omega <= 100.0))
            throw ImpactError(industry + ": omega must lie in (0, 100], got " + csv::format_double(omega, "%g"));
    }
};

struct ImpactRow {
    std::string industry;
    double gross_turnover = 0.0;
    double net_turnover = 0.0;
    double production_value = 0.0;
    double direct_effects = 0.0;
    double indirect_effects = 0.0;
};

struct ImpactTable {
    std::vector<ImpactRow> rows;
    ImpactRow totals;
};

inline double gross_turnover(double additional_units, const IndustryCoefficients& c) {
    c.validate();
    if (additional_units < 0.0) {
        throw ImpactError("no uplift: additional units are negative (" +
                          csv::format_double(additional_units, "%.3f") +
                          "); the cascade has no semantics for losses");
    }
    return additional_units * c.avex;
}

inline double net_turnover(double gross, double theta) {
    if (!(theta >= 0.0 && theta < 100.0))
        throw ImpactError("theta must lie in [0, 100), got " + csv::format_double(theta, "%g"));
    return gross * (1.0 - theta / 100.0);
}

inline double production_value(double net, double psi) {
    if (!(psi > 0.0 && psi <= kMaxPsiPercent))
        throw ImpactError("psi must lie in (0, " + csv::format_double(kMaxPsiPercent, "%g") + "], got " +
                          csv::format_double(psi, "%g"));
    return net * psi / 100.0;
}

inline std::pair<double, double> split_effects(double pv, double omega) {
    if (!(omega > 0.0 && omega <= 100.0))
        throw ImpactError("omega must lie in (0, 100], got " + csv::format_double(omega, "%g"));
    const double direct = pv * omega / 100.0;
    return {direct, pv - direct};
}

// theta from turnover-tax statistics: VAT collected over taxable turnover.
inline double derive_theta(double taxable_turnover, double vat_collected) {
    if (!(taxable_turnover > 0.0)) throw ImpactError("taxable turnover must be > 0");
    if (!(vat_collected >= 0.0)) throw ImpactError("collected VAT must be >= 0");
    return 100.0 * vat_collected / taxable_turnover;
}

// psi and omega from structural business statistics.
inline std::pair<double, double> derive_psi_omega(double net_turnover_total, double production_value_total,
                                                  double gross_value_added) {
    if (!(net_turnover_total > 0.0 && production_value_total > 0.0 && gross_value_added > 0.0))
        throw ImpactError("psi/omega derivation needs positive inputs");
    if (gross_value_added > production_value_total)
        throw ImpactError("gross value added exceeds production value");
    return {100.0 * production_value_total / net_turnover_total,
            100.0 * gross_value_added / production_value_total};
}

// Arithmetic mean and population (divide-by-n) standard deviation over the
// non-missing expenditure samples.
inline std::pair<double, double> aggregate_avex(const std::vector<std::optional<double>>& samples) {
    std::vector<double> xs;
    for (const auto& s : samples)
        if (s) xs.push_back(*s);
    if (xs.empty()) throw ImpactError("expenditure aggregation needs at least one non-missing sample");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

inline ImpactRow cascade_row(double additional_units, const IndustryCoefficients& c) {
    ImpactRow r;
    r.industry = c.industry;
    r.gross_turnover = gross_turnover(additional_units, c);
    r.net_turnover = net_turnover(r.gross_turnover, c.theta);
    r.production_value = production_value(r.net_turnover, c.psi);
    auto [de, ie] = split_effects(r.production_value, c.omega);
    r.direct_effects = de;
    r.indirect_effects = ie;
    return r;
}

inline ImpactTable build_impact_table(double additional_units,
                                      const std::vector<IndustryCoefficients>& coeffs) {
    if (coeffs.empty()) throw ImpactError("no industry coefficients given");
    ImpactTable t;
    t.totals.industry = "Total";
    for (const auto& c : coeffs) {
        ImpactRow r = cascade_row(additional_units, c);
        t.totals.gross_turnover += r.gross_turnover;
        t.totals.net_turnover += r.net_turnover;
        t.totals.production_value += r.production_value;
        t.totals.direct_effects += r.direct_effects;
        t.totals.indirect_effects += r.indirect_effects;
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline ImpactTable build_impact_table(const CounterfactualSeries& gap,
                                      const std::vector<IndustryCoefficients>& coeffs) {
    return build_impact_table(gap.cumulative_gap, coeffs);
}

// Preset file: CSV with '#' provenance comments and columns
// industry,avex,theta,psi,omega.
inline std::vector<IndustryCoefficients> load_coefficients(std::istream& in) {
    csv::Table t = csv::read_table(in, /*allow_comments=*/true);
    const char* required[] = {"industry", "avex", "theta", "psi", "omega"};
    int cols[5];
    for (int i = 0; i < 5; ++i) {
        cols[i] = t.column(required[i]);
        if (cols[i] < 0)
            throw ImpactError(std::string("coefficient file is missing column '") + required[i] + "'");
    }
    std::vector<IndustryCoefficients> out;
    for (const auto& row : t.rows) {
        IndustryCoefficients c;
        c.industry = row[static_cast<std::size_t>(cols[0])];
        double* fields[4] = {&c.avex, &c.theta, &c.psi, &c.omega};
        for (int i = 0; i < 4; ++i) {
            if (!csv::parse_double(row[static_cast<std::size_t>(cols[i + 1])], *fields[i])) {
                throw ImpactError("non-numeric value '" + row[static_cast<std::size_t>(cols[i + 1])] +
                                  "' for " + required[i + 1] + " of industry " + c.industry);
            }
        }
        c.validate();
        out.push_back(std::move(c));
    }
    if (out.empty()) throw ImpactError("coefficient file has no industry rows");
    return out;
}

inline std::vector<IndustryCoefficients> load_coefficients_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ImpactError("cannot open coefficient file '" + path + "'");
    return load_coefficients(in);
}

}  // namespace didimpact
