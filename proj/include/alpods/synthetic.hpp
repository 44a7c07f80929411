#pragma once

#include "error.hpp"
#include "event_table.hpp"
#include "interval.hpp"
#include "random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace alpods {

inline const std::vector<std::string>& synthetic_markers()
{
    static const std::vector<std::string> names{"FS",   "SS",    "CD34",   "CD13", "CD7",
                                                "CD56", "CD33",  "CD117", "HLA-DR", "CD45"};
    return names;
}

namespace detail {

struct GaussianCluster
{
    std::vector<double> center;
    std::vector<double> sd;
};

inline std::vector<GaussianCluster> random_clusters(Rng& rng, std::size_t count, std::size_t dims, double spread,
                                                    double sd_lo, double sd_hi)
{
    std::vector<GaussianCluster> out(count);
    for (auto& c : out) {
        for (std::size_t j = 0; j < dims; ++j) {
            c.center.push_back(-spread + 2.0 * spread * rng.uniform());
            c.sd.push_back(sd_lo + (sd_hi - sd_lo) * rng.uniform());
        }
    }
    return out;
}

inline void draw(const GaussianCluster& c, Rng& rng, std::vector<double>& values)
{
    for (std::size_t j = 0; j < c.center.size(); ++j) {
        values.push_back(rng.normal(c.center[j], c.sd[j]));
    }
}

inline std::string case_name(const std::string& cls, std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%03zu", k + 1);
    return cls + buf;
}

} // namespace detail

inline constexpr int kPlantedNone = 0;

struct PlantedBenchmark
{
    EventTable table;
    std::vector<int> planted; // per event: kPlantedNone, 1 or 2
    std::vector<IntervalMap> planted_rules; // the gate each planted set lives in, by set - 1
};

// Two classes, BM and PB, sharing a three-cluster background in 10
// markers. Planted set 1 sits high on CD34, planted set 2 high on CD7; each
// is well separated from the background. Per-case share of set 1 is about
// 40% in BM cases and 5% in PB cases; set 2 the other way round.
inline PlantedBenchmark generate_planted_benchmark(std::uint64_t seed, std::size_t cases_per_class = 20,
                                                   std::size_t events_per_case = 2500)
{
    require(cases_per_class >= 2, "need at least two cases per class");
    require(events_per_case >= 20, "need at least 20 events per case");
    const auto& markers = synthetic_markers();
    const std::size_t d = markers.size();
    constexpr std::size_t kCd34 = 2;
    constexpr std::size_t kCd7 = 4;
    constexpr double kPlantedCenter = 6.0;
    constexpr double kPlantedSd = 0.4;

    Rng layout(mix_seed(seed, 0xb0));
    const auto background = detail::random_clusters(layout, 3, d, 1.5, 0.5, 0.6);
    std::array<detail::GaussianCluster, 2> planted_clusters;
    for (std::size_t s = 0; s < 2; ++s) {
        planted_clusters[s] = {std::vector<double>(d, 0.0), std::vector<double>(d, 0.6)};
        const std::size_t marker = s == 0 ? kCd34 : kCd7;
        planted_clusters[s].center[marker] = kPlantedCenter;
        planted_clusters[s].sd[marker] = kPlantedSd;
    }

    PlantedBenchmark out;
    const double gate = 0.5 * (1.5 + 4 * 0.6 + kPlantedCenter - 4 * kPlantedSd);
    out.planted_rules.push_back({{kCd34, Interval{gate, std::numeric_limits<double>::infinity()}}});
    out.planted_rules.push_back({{kCd7, Interval{gate, std::numeric_limits<double>::infinity()}}});

    std::vector<double> values;
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    const std::array<std::string, 2> classes{"BM", "PB"};
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t c = 0; c < cases_per_class; ++c) {
            Rng rng(mix_seed(seed, 0x1000 + k * 0x10000 + c));
            const double high = std::clamp(rng.normal(0.40, 0.03), 0.30, 0.50);
            const double low = std::clamp(rng.normal(0.05, 0.01), 0.02, 0.08);
            const std::array<double, 2> share = k == 0 ? std::array{high, low} : std::array{low, high};
            const auto n1 = static_cast<std::size_t>(std::llround(share[0] * events_per_case));
            const auto n2 = static_cast<std::size_t>(std::llround(share[1] * events_per_case));
            const std::string id = detail::case_name(classes[k], c);
            for (std::size_t e = 0; e < events_per_case; ++e) {
                int tag = kPlantedNone;
                if (e < n1) {
                    tag = 1;
                    detail::draw(planted_clusters[0], rng, values);
                } else if (e < n1 + n2) {
                    tag = 2;
                    detail::draw(planted_clusters[1], rng, values);
                } else {
                    detail::draw(background[rng.below(background.size())], rng, values);
                }
                out.planted.push_back(tag);
                ids.push_back(id);
                labels.push_back(classes[k]);
            }
        }
    }
    out.table = EventTable(markers, std::move(values), ids, labels);
    return out;
}

// Two classes, A and B, each a three-component Gaussian mixture in 10
// markers; B is A shifted by `shift` on the first three markers. Events are
// spread evenly over `cases_per_class` cases per class.
inline EventTable generate_shifted_mixture(std::uint64_t seed, std::size_t total_events = 700000,
                                           std::size_t cases_per_class = 7, double shift = 1.5)
{
    require(cases_per_class >= 1, "need at least one case per class");
    require(total_events >= 2 * cases_per_class, "need at least one event per case");
    const auto& markers = synthetic_markers();
    const std::size_t d = markers.size();
    Rng layout(mix_seed(seed, 0xa0));
    const auto base = detail::random_clusters(layout, 3, d, 2.0, 0.6, 0.8);
    auto shifted = base;
    for (auto& c : shifted) {
        for (std::size_t j = 0; j < 3; ++j) {
            c.center[j] += shift;
        }
    }

    std::vector<double> values;
    values.reserve(total_events * d);
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    ids.reserve(total_events);
    labels.reserve(total_events);
    const std::size_t n_cases = 2 * cases_per_class;
    for (std::size_t c = 0; c < n_cases; ++c) {
        const std::size_t k = c / cases_per_class;
        const std::string cls = k == 0 ? "A" : "B";
        const std::string id = detail::case_name(cls, c % cases_per_class);
        const std::size_t n = total_events / n_cases + (c < total_events % n_cases ? 1 : 0);
        Rng rng(mix_seed(seed, 0x2000 + c));
        const auto& clusters = k == 0 ? base : shifted;
        for (std::size_t e = 0; e < n; ++e) {
            detail::draw(clusters[rng.below(clusters.size())], rng, values);
            ids.push_back(id);
            labels.push_back(cls);
        }
    }
    return EventTable(markers, std::move(values), ids, labels);
}

} // namespace alpods
