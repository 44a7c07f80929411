#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <string>

namespace alpods {

// Half-open interval (lower, upper] on one variable; either end may be
// infinite.
struct Interval
{
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x > lower && x <= upper; }
    bool empty() const { return !(lower < upper); }
    bool lower_bounded() const { return std::isfinite(lower); }
    bool upper_bounded() const { return std::isfinite(upper); }

    Interval intersect(const Interval& other) const
    {
        return {std::max(lower, other.lower), std::min(upper, other.upper)};
    }

    bool operator==(const Interval&) const = default;
};

// Constrained variables only; absent variables are unconstrained.
using IntervalMap = std::map<std::size_t, Interval>;

inline bool satisfies(std::span<const double> event, const IntervalMap& intervals)
{
    for (const auto& [variable, interval] : intervals) {
        if (!interval.contains(event[variable])) {
            return false;
        }
    }
    return true;
}

// Exact textual key (hex floats) used to recognise identical interval maps.
inline std::string signature_key(const IntervalMap& intervals)
{
    std::string key;
    char buf[80];
    for (const auto& [variable, interval] : intervals) {
        std::snprintf(buf, sizeof(buf), "%zu:%a:%a;", variable, interval.lower, interval.upper);
        key += buf;
    }
    return key;
}

// Infinite bounds serialize as null.
inline nlohmann::json bound_to_json(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline double bound_from_json(const nlohmann::json& j, double infinite)
{
    return j.is_null() ? infinite : j.get<double>();
}

inline nlohmann::json to_json(const Interval& interval)
{
    return {{"lower", bound_to_json(interval.lower)}, {"upper", bound_to_json(interval.upper)}};
}

inline Interval interval_from_json(const nlohmann::json& j)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {bound_from_json(j.at("lower"), -inf), bound_from_json(j.at("upper"), inf)};
}

} // namespace alpods
