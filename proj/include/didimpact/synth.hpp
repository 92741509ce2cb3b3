#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "didimpact/model_spec.hpp"
#include "didimpact/panel.hpp"

namespace didimpact {

// Counter-based generator: every (seed, unit, period, stream) pair owns an
// independent splitmix64 sequence, so generation order never matters.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t unit, std::uint64_t period, std::uint64_t stream) {
        state_ = mix(seed + 0x9e3779b97f4a7c15ULL * (unit + 1));
        state_ = mix(state_ ^ mix(period + 0xbf58476d1ce4e5b9ULL));
        state_ = mix(state_ ^ mix(stream + 0x94d049bb133111ebULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform on (0,1), never exactly 0 or 1
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Knuth's product method; fine for the small rates used here.
    int next_poisson(double lambda) {
        if (!(lambda >= 0.0)) throw SynthError("poisson rate must be >= 0");
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        int k = -1;
        do {
            ++k;
            prod *= next_uniform();
        } while (prod > limit);
        return k;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

struct ControlGenerator {
    enum class Family { normal, lognormal, uniform, poisson };

    std::string name;
    Family family = Family::normal;
    double p1 = 0.0;     // mean / log-mean / lower / rate
    double p2 = 1.0;     // sd / log-sd / upper / unused
    double beta = 0.0;   // true coefficient in the log-outcome equation
    bool log_in_model = false;  // beta applies to ln(value); analysis should log it too

    double draw(CounterRng& rng) const {
        switch (family) {
            case Family::normal: return p1 + p2 * rng.next_normal();
            case Family::lognormal: return std::exp(p1 + p2 * rng.next_normal());
            case Family::uniform: return p1 + (p2 - p1) * rng.next_uniform();
            case Family::poisson: return static_cast<double>(rng.next_poisson(p1));
        }
        throw SynthError("unknown control generator family");
    }

    double model_value(double v) const {
        if (!log_in_model) return v;
        if (!(v > 0.0)) throw SynthError("control '" + name + "' drew a non-positive value for a log term");
        return std::log(v);
    }
};

// Known data-generating process mirroring the structural two-way FE form:
// ln Y = alpha_u + lambda_t + delta_phase * D + sum beta_c * v_c + noise.
struct DgpSpec {
    int n_units = 8;
    int n_periods = 36;

    std::vector<double> unit_effects;    // explicit alphas; empty -> evenly spread
    double unit_effect_base = 8.5;
    double unit_effect_spread = 0.8;

    std::vector<double> period_effects;  // explicit lambdas; empty -> sinusoid
    double season_amplitude = 0.25;
    int season_cycle = 12;

    std::map<std::string, double> true_delta;  // per phase label
    std::vector<ControlGenerator> controls;
    double noise_sd = 0.05;
    std::uint64_t seed = 1;

    Period start_period = Period{2023LL * 12 + 0, "2023-01"};
    bool integer_periods = false;

    double unit_effect(int u) const {
        if (!unit_effects.empty()) {
            if (static_cast<int>(unit_effects.size()) != n_units)
                throw SynthError("unit_effects length does not match n_units");
            return unit_effects[static_cast<std::size_t>(u)];
        }
        if (n_units == 1) return unit_effect_base;
        const double f = static_cast<double>(u) / (n_units - 1) - 0.5;
        return unit_effect_base + unit_effect_spread * 2.0 * f;
    }

    double period_effect(int t) const {
        if (!period_effects.empty()) {
            if (static_cast<int>(period_effects.size()) != n_periods)
                throw SynthError("period_effects length does not match n_periods");
            return period_effects[static_cast<std::size_t>(t)];
        }
        return season_amplitude * std::sin(6.283185307179586 * t / season_cycle);
    }

    Period period_at(int t) const {
        if (integer_periods) return Period{static_cast<long long>(t + 1), std::to_string(t + 1)};
        const long long ord = start_period.ordinal + t;
        const int year = static_cast<int>(ord / 12);
        const int month = static_cast<int>(ord % 12) + 1;
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
        return Period{ord, buf};
    }

    std::string unit_name(int u) const {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "U%02d", u + 1);
        return buf;
    }
};

namespace detail {

inline const PhaseWindow* active_phase(const std::vector<TreatmentAssignment>& schedule,
                                       const std::string& unit, long long ordinal) {
    for (const auto& a : schedule) {
        if (a.unit != unit) continue;
        for (const auto& w : a.phases) {
            if (in_window(w, ordinal)) return &w;
        }
    }
    return nullptr;
}

}  // namespace detail

// noise_sd >= 0; the seed fully determines the output, independent of
// generation order. Streams: 0 = noise, 1..C = controls.
inline PanelDataset generate_panel(const DgpSpec& spec,
                                   const std::vector<TreatmentAssignment>& schedule) {
    if (spec.n_units < 1 || spec.n_periods < 1) throw SynthError("panel dimensions must be positive");
    if (!(spec.noise_sd >= 0.0)) throw SynthError("noise_sd must be >= 0");

    const long long first = spec.period_at(0).ordinal;
    const long long last = spec.period_at(spec.n_periods - 1).ordinal;
    for (const auto& a : schedule) {
        bool known = false;
        for (int u = 0; u < spec.n_units; ++u) known = known || (spec.unit_name(u) == a.unit);
        if (!known) throw SynthError("schedule references unknown unit '" + a.unit + "'");
        for (const auto& w : a.phases) {
            if (w.start.ordinal < first || w.start.ordinal > last ||
                (w.end && (w.end->ordinal < first || w.end->ordinal > last))) {
                throw SynthError("schedule window '" + w.label + "' lies outside the generated period range");
            }
            if (spec.true_delta.find(w.label) == spec.true_delta.end()) {
                throw SynthError("no true_delta declared for phase '" + w.label + "'");
            }
        }
    }

    std::vector<std::string> control_names;
    for (const auto& g : spec.controls) control_names.push_back(g.name);

    std::vector<Observation> obs;
    obs.reserve(static_cast<std::size_t>(spec.n_units) * static_cast<std::size_t>(spec.n_periods));
    for (int u = 0; u < spec.n_units; ++u) {
        const std::string unit = spec.unit_name(u);
        for (int t = 0; t < spec.n_periods; ++t) {
            Observation o;
            o.unit = unit;
            o.time = spec.period_at(t);

            double log_y = spec.unit_effect(u) + spec.period_effect(t);

            const PhaseWindow* w = detail::active_phase(schedule, unit, o.time.ordinal);
            o.treatment = (w != nullptr) ? 1 : 0;
            if (w != nullptr) log_y += spec.true_delta.at(w->label);

            for (std::size_t c = 0; c < spec.controls.size(); ++c) {
                CounterRng rng(spec.seed, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(c + 1));
                const double v = spec.controls[c].draw(rng);
                o.controls.push_back(v);
                log_y += spec.controls[c].beta * spec.controls[c].model_value(v);
            }
            if (spec.noise_sd > 0.0) {
                CounterRng rng(spec.seed, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(t), 0);
                log_y += spec.noise_sd * rng.next_normal();
            }
            o.outcome = std::exp(log_y);
            obs.push_back(std::move(o));
        }
    }
    return PanelDataset::from_observations(std::move(obs), std::move(control_names));
}

}  // namespace didimpact
