#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace didimpact {

// Base error. Every module throws a subtype carrying the module name so the
// CLI can emit a single machine-parsable line: "error: <module>: <message>".
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error(message), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

#define DIDIMPACT_DEFINE_ERROR(Name, tag)                         \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& msg) : Error(tag, msg) {} \
    };

DIDIMPACT_DEFINE_ERROR(PanelError, "panel")
DIDIMPACT_DEFINE_ERROR(EstimatorError, "estimator")
DIDIMPACT_DEFINE_ERROR(DidError, "did")
DIDIMPACT_DEFINE_ERROR(DiagnosticsError, "diagnostics")
DIDIMPACT_DEFINE_ERROR(CounterfactualError, "counterfactual")
DIDIMPACT_DEFINE_ERROR(ImpactError, "impact")
DIDIMPACT_DEFINE_ERROR(SynthError, "synth")
DIDIMPACT_DEFINE_ERROR(ConfigError, "config")

#undef DIDIMPACT_DEFINE_ERROR

// One panel period. `ordinal` gives the total order and the spacing used by
// trend regressions; `label` is what files and reports show. ISO year-months
// map to ordinal = year*12 + (month-1), plain integers map to themselves.
struct Period {
    long long ordinal = 0;
    std::string label;

    friend bool operator==(const Period& a, const Period& b) {
        return a.ordinal == b.ordinal && a.label == b.label;
    }
    friend bool operator<(const Period& a, const Period& b) { return a.ordinal < b.ordinal; }
};

inline bool is_leap_year(int year) {
    if (year % 400 == 0) return true;
    if (year % 100 == 0) return false;
    return year % 4 == 0;
}

inline int days_in_month(int year, int month) {
    static const int kMonthDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) throw PanelError("month out of range: " + std::to_string(month));
    if (month == 2) return is_leap_year(year) ? 29 : 28;
    return kMonthDays[month - 1];
}

namespace detail {

inline bool parse_fixed_int(const std::string& s, std::size_t offset, std::size_t len, int& out) {
    if (offset + len > s.size()) return false;
    int value = 0;
    for (std::size_t i = 0; i < len; ++i) {
        unsigned char ch = static_cast<unsigned char>(s[offset + i]);
        if (ch < '0' || ch > '9') return false;
        value = value * 10 + static_cast<int>(ch - '0');
    }
    out = value;
    return true;
}

inline bool parse_plain_ll(const std::string& s, long long& out) {
    if (s.empty()) return false;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = (s[0] == '-');
        i = 1;
        if (s.size() == 1) return false;
    }
    long long v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = neg ? -v : v;
    return true;
}

}  // namespace detail

// Accepts "YYYY-MM" or a plain integer index.
inline Period parse_period(const std::string& token) {
    int y = 0, m = 0;
    if (token.size() == 7 && token[4] == '-' &&
        detail::parse_fixed_int(token, 0, 4, y) && detail::parse_fixed_int(token, 5, 2, m)) {
        if (m < 1 || m > 12) throw PanelError("invalid month in time id '" + token + "'");
        return Period{static_cast<long long>(y) * 12 + (m - 1), token};
    }
    long long v = 0;
    if (detail::parse_plain_ll(token, v)) return Period{v, token};
    throw PanelError("unparseable time id '" + token + "' (expected YYYY-MM or integer)");
}

inline bool period_is_year_month(const Period& p) {
    return p.label.size() == 7 && p.label[4] == '-';
}

inline int period_year(const Period& p) { return static_cast<int>(p.ordinal / 12); }
inline int period_month(const Period& p) { return static_cast<int>(p.ordinal % 12) + 1; }

// Calendar date, for event calendars only.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    // days since 1970-01-01 (civil calendar); standard Howard Hinnant algorithm
    long long day_number() const {
        int y = year - (month <= 2);
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const int mp = month + (month > 2 ? -3 : 9);
        const unsigned doy = (153 * static_cast<unsigned>(mp) + 2) / 5 + static_cast<unsigned>(day) - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return static_cast<long long>(era) * 146097 + static_cast<long long>(doe) - 719468;
    }

    friend bool operator==(const Date& a, const Date& b) {
        return a.year == b.year && a.month == b.month && a.day == b.day;
    }
};

inline Date parse_date(const std::string& token) {
    Date d;
    if (token.size() != 10 || token[4] != '-' || token[7] != '-' ||
        !detail::parse_fixed_int(token, 0, 4, d.year) ||
        !detail::parse_fixed_int(token, 5, 2, d.month) ||
        !detail::parse_fixed_int(token, 8, 2, d.day)) {
        throw PanelError("unparseable date '" + token + "' (expected YYYY-MM-DD)");
    }
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        throw PanelError("invalid calendar date '" + token + "'");
    }
    return d;
}

}  // namespace didimpact
