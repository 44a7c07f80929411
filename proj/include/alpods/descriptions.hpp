#pragma once

#include "dag.hpp"
#include "density.hpp"
#include "error.hpp"
#include "event_table.hpp"
#include "interval.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace alpods {

// Effect size reported for a population whose case frequencies separate
// the groups without any spread. Ranks above every finite Cohen's d.
inline constexpr double kSeparatingEffect = 1e9;

// Cut points P5, P35, P65, P95 of one marker; they delimit the five levels
// "--", "-", "0", "+", "++".
struct MarkerBands
{
    std::array<double, 4> cuts{};
};

inline std::vector<MarkerBands> marker_bands(const EventTable& table)
{
    std::vector<MarkerBands> bands(table.n_markers());
    for (std::size_t j = 0; j < table.n_markers(); ++j) {
        auto column = table.column(j);
        std::sort(column.begin(), column.end());
        constexpr std::array<double, 4> probs{0.05, 0.35, 0.65, 0.95};
        for (std::size_t b = 0; b < 4; ++b) {
            bands[j].cuts[b] = detail::quantile_sorted(column, probs[b]);
        }
    }
    return bands;
}

namespace detail {

inline constexpr std::array<const char*, 5> kLevelLabels{"--", "-", "0", "+", "++"};

inline std::string format_bound(double v)
{
    if (std::isinf(v)) {
        return v < 0 ? "-inf" : "inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace detail

// Plus/minus token for an interval on one marker.
inline std::string render_symbolic(std::string_view marker, const Interval& interval, const MarkerBands& bands)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::array<double, 6> edges{-inf, bands.cuts[0], bands.cuts[1], bands.cuts[2], bands.cuts[3], inf};
    std::vector<int> nonempty;
    std::vector<int> covered;
    for (int b = 0; b < 5; ++b) {
        const double lo = edges[b];
        const double hi = edges[b + 1];
        if (!(lo < hi)) {
            continue;
        }
        nonempty.push_back(b);
        if (interval.lower < hi && interval.upper > lo) {
            covered.push_back(b);
        }
    }
    std::string token(marker);
    if (covered.size() == 1) {
        return token + detail::kLevelLabels[covered[0]];
    }
    if (covered.size() == 2) {
        return token + detail::kLevelLabels[covered[0]] + ".." + detail::kLevelLabels[covered[1]];
    }
    if (nonempty.size() >= 3 && covered.size() + 1 == nonempty.size()) {
        for (const int b : nonempty) {
            if (std::find(covered.begin(), covered.end(), b) == covered.end()) {
                return token + "not(" + detail::kLevelLabels[b] + ")";
            }
        }
    }
    std::string span = covered.empty() ? std::string("?")
                                       : std::string(detail::kLevelLabels[covered.front()]) + ".." +
                                             detail::kLevelLabels[covered.back()];
    return token + "(" + span + ": " + detail::format_bound(interval.lower) + " to " +
           detail::format_bound(interval.upper) + ")";
}

// Intersects, per variable, all conditions on the node's creating path.
inline IntervalMap simplify_path(const Dag& dag, std::size_t node_id)
{
    require(node_id < dag.nodes.size(), "unknown DAG node");
    IntervalMap intervals;
    for (const auto& c : dag.nodes[node_id].path) {
        const auto [slot, inserted] = intervals.emplace(c.variable, c.interval);
        if (!inserted) {
            slot->second = slot->second.intersect(c.interval);
        }
        if (slot->second.empty()) {
            fail(ErrorKind::integrity, "empty interval while simplifying node " + std::to_string(node_id));
        }
    }
    return intervals;
}

// Share of each case's events that satisfy `intervals`, in case order.
inline std::vector<double> case_frequencies(const EventTable& table, const IntervalMap& intervals)
{
    std::vector<double> out(table.n_cases(), 0.0);
    for (std::size_t c = 0; c < table.n_cases(); ++c) {
        const auto& rows = table.cases()[c].rows;
        std::size_t hits = 0;
        for (const auto r : rows) {
            hits += satisfies(table.row(r), intervals) ? 1 : 0;
        }
        out[c] = rows.empty() ? 0.0 : static_cast<double>(hits) / rows.size();
    }
    return out;
}

// |mean(a) - mean(b)| / pooled sd. Zero spread gives 0 for equal means and
// kSeparatingEffect otherwise.
inline double cohens_d(std::span<const double> a, std::span<const double> b)
{
    require(!a.empty() && !b.empty(), "Cohen's d needs two non-empty groups");
    auto moments = [](std::span<const double> x) {
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
        double ss = 0.0;
        for (const double v : x) {
            ss += (v - mean) * (v - mean);
        }
        return std::pair{mean, ss};
    };
    const auto [mean_a, ss_a] = moments(a);
    const auto [mean_b, ss_b] = moments(b);
    const double df = static_cast<double>(a.size() + b.size()) - 2.0;
    const double pooled = df > 0.0 ? std::sqrt((ss_a + ss_b) / df) : 0.0;
    const double diff = std::abs(mean_a - mean_b);
    if (!(pooled > 0.0)) {
        return diff == 0.0 ? 0.0 : kSeparatingEffect;
    }
    return diff / pooled;
}

inline double effect_size_from_frequencies(std::span<const double> frequencies, const EventTable& table,
                                           int target)
{
    std::vector<double> in;
    std::vector<double> out;
    for (std::size_t c = 0; c < table.n_cases(); ++c) {
        (table.cases()[c].class_label == target ? in : out).push_back(frequencies[c]);
    }
    if (in.empty() || out.empty()) {
        fail(ErrorKind::input, "effect size needs cases inside and outside the target class");
    }
    return cohens_d(in, out);
}

// Cohen's d of the per-case frequencies, target class against the rest.
inline double effect_size(const IntervalMap& intervals, const EventTable& table, int target)
{
    return effect_size_from_frequencies(case_frequencies(table, intervals), table, target);
}

struct PopulationDescription
{
    std::size_t id = 0;
    std::size_t source_node = 0;
    IntervalMap intervals;
    std::vector<std::string> tokens;
    int asserted_class = -1;
    double effect_size = 0.0;
    std::vector<double> class_frequency; // mean case frequency per class

    std::size_t conditions() const { return intervals.size(); }

    std::string rule() const
    {
        std::string out;
        for (const auto& t : tokens) {
            out += (out.empty() ? "" : ", ") + t;
        }
        return out.empty() ? "(all events)" : out;
    }
};

inline std::vector<std::string> render_tokens(const IntervalMap& intervals,
                                              const std::vector<std::string>& markers,
                                              const std::vector<MarkerBands>& bands)
{
    std::vector<std::string> tokens;
    for (const auto& [variable, interval] : intervals) {
        tokens.push_back(render_symbolic(markers.at(variable), interval, bands.at(variable)));
    }
    return tokens;
}

// Items of a computed ABC analysis, by position in the input.
struct AbcPartition
{
    std::vector<std::size_t> order; // input indices sorted by value, descending
    std::vector<double> values;     // values in that order
    std::vector<std::size_t> a;
    std::vector<std::size_t> b;
    std::vector<std::size_t> c;
};

// Cumulative-share curve of the descending values; the A|B cut is the
// curve point closest to (0, 1), the B|C cut starts at the first later item
// whose curve slope drops below 1 (a below-average value).
inline AbcPartition computed_abc(std::span<const double> values)
{
    require(!values.empty(), "computed ABC needs at least one value");
    double total = 0.0;
    for (const double v : values) {
        require(v >= 0.0 && std::isfinite(v), "computed ABC needs finite non-negative values");
        total += v;
    }
    require(total > 0.0, "computed ABC needs at least one positive value");

    AbcPartition out;
    out.order.resize(values.size());
    std::iota(out.order.begin(), out.order.end(), 0);
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });
    const std::size_t n = values.size();
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = values[out.order[i]];
    }

    std::size_t a_end = 1;
    double best = std::numeric_limits<double>::infinity();
    double cumulative = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        cumulative += out.values[i - 1];
        const double x = static_cast<double>(i) / n;
        const double y = cumulative / total;
        const double dist = std::sqrt(x * x + (1.0 - y) * (1.0 - y));
        if (dist < best) {
            best = dist;
            a_end = i;
        }
    }
    std::size_t c_begin = n;
    for (std::size_t i = a_end + 1; i <= n; ++i) {
        const double slope = out.values[i - 1] / total * n;
        if (slope < 1.0) {
            c_begin = i - 1;
            break;
        }
    }
    out.a.assign(out.order.begin(), out.order.begin() + a_end);
    out.b.assign(out.order.begin() + a_end, out.order.begin() + c_begin);
    out.c.assign(out.order.begin() + c_begin, out.order.end());
    return out;
}

inline constexpr std::size_t kMillerMax = 9;

namespace detail {

inline bool ranks_before(const PopulationDescription& x, const PopulationDescription& y)
{
    if (x.effect_size != y.effect_size) {
        return x.effect_size > y.effect_size;
    }
    if (x.conditions() != y.conditions()) {
        return x.conditions() < y.conditions();
    }
    return x.source_node < y.source_node;
}

} // namespace detail

// Overlap of two candidates in [0, 1]; 1 means the same population.
using OverlapFn = std::function<double(const PopulationDescription&, const PopulationDescription&)>;

// Candidates asserting the same class at this overlap or above count as one.
inline constexpr double kRedundantOverlap = 0.5;

// Jaccard index of the training events of the candidates' source nodes.
inline OverlapFn event_overlap(const Dag& dag)
{
    return [&dag](const PopulationDescription& x, const PopulationDescription& y) {
        const auto& a = dag.node(x.source_node).population;
        const auto& b = dag.node(y.source_node).population;
        std::size_t common = 0;
        for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
            if (a[i] < b[j]) {
                ++i;
            } else if (b[j] < a[i]) {
                ++j;
            } else {
                ++common;
                ++i;
                ++j;
            }
        }
        const std::size_t unite = a.size() + b.size() - common;
        return unite == 0 ? 1.0 : static_cast<double>(common) / unite;
    };
}

// Recursive computed ABC on effect sizes until at most nine populations
// remain. With `overlap`, a candidate that is redundant with a better
// ranked one of the same class is dropped first. The result holds at least
// two populations when two candidates exist and, for more than two classes,
// asserts at least class_count - 1 distinct classes when the candidates
// allow it.
inline std::vector<PopulationDescription> select_relevant(std::vector<PopulationDescription> candidates,
                                                          std::size_t class_count = 2,
                                                          const OverlapFn& overlap = {})
{
    require(!candidates.empty(), "select_relevant needs at least one candidate");
    std::stable_sort(candidates.begin(), candidates.end(), detail::ranks_before);
    if (overlap) {
        std::vector<PopulationDescription> distinct;
        for (auto& d : candidates) {
            const bool redundant = std::any_of(distinct.begin(), distinct.end(), [&](const auto& kept) {
                return kept.asserted_class == d.asserted_class && overlap(kept, d) >= kRedundantOverlap;
            });
            if (!redundant) {
                distinct.push_back(std::move(d));
            }
        }
        candidates = std::move(distinct);
    }
    std::vector<std::size_t> working(candidates.size());
    std::iota(working.begin(), working.end(), 0);

    auto a_set = [&](const std::vector<std::size_t>& items) {
        std::vector<double> effects;
        for (const auto i : items) {
            effects.push_back(candidates[i].effect_size);
        }
        if (std::all_of(effects.begin(), effects.end(), [](double e) { return e == 0.0; })) {
            return items;
        }
        auto keep = computed_abc(effects).a;
        std::sort(keep.begin(), keep.end());
        std::vector<std::size_t> out;
        for (const auto k : keep) {
            out.push_back(items[k]);
        }
        return out;
    };
    working = a_set(working);
    while (working.size() > kMillerMax) {
        auto next = a_set(working);
        if (next.size() >= working.size()) {
            break;
        }
        working = std::move(next);
    }
    if (working.size() > kMillerMax) {
        working.resize(kMillerMax);
    }

    std::vector<char> chosen(candidates.size(), 0);
    for (const auto i : working) {
        chosen[i] = 1;
    }
    const std::size_t floor = std::min<std::size_t>(2, candidates.size());
    for (std::size_t i = 0; i < candidates.size() && working.size() < floor; ++i) {
        if (!chosen[i]) {
            chosen[i] = 1;
            working.push_back(i);
        }
    }

    if (class_count > 2) {
        std::set<int> available;
        for (const auto& d : candidates) {
            available.insert(d.asserted_class);
        }
        const std::size_t needed = std::min(class_count - 1, available.size());
        std::set<int> covered;
        for (const auto i : working) {
            covered.insert(candidates[i].asserted_class);
        }
        for (std::size_t i = 0; i < candidates.size() && covered.size() < needed &&
                                working.size() < kMillerMax;
             ++i) {
            if (!chosen[i] && !covered.count(candidates[i].asserted_class)) {
                chosen[i] = 1;
                working.push_back(i);
                covered.insert(candidates[i].asserted_class);
            }
        }
    }

    std::sort(working.begin(), working.end());
    std::vector<PopulationDescription> out;
    for (const auto i : working) {
        out.push_back(candidates[i]);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].id = i + 1;
    }
    return out;
}

// One description per non-root DAG node. Frequencies and effect sizes are
// computed on `cases`, the full training cases; `frequencies` receives the
// per-case frequencies of each description when non-null.
inline std::vector<PopulationDescription> describe_populations(const Dag& dag, const EventTable& cases,
                                                               const std::vector<MarkerBands>& bands,
                                                               std::size_t threads = 1,
                                                               std::vector<std::vector<double>>* frequencies = nullptr)
{
    std::vector<PopulationDescription> out;
    for (std::size_t id = 1; id < dag.nodes.size(); ++id) {
        PopulationDescription d;
        d.id = out.size() + 1;
        d.source_node = id;
        d.intervals = simplify_path(dag, id);
        d.asserted_class = dag.nodes[id].asserted_class;
        d.tokens = render_tokens(d.intervals, dag.markers, bands);
        out.push_back(std::move(d));
    }
    std::vector<std::vector<double>> freqs(out.size());
    const auto case_counts = cases.class_case_counts();
    parallel_for(out.size(), threads, [&](std::size_t i) {
        auto& d = out[i];
        freqs[i] = case_frequencies(cases, d.intervals);
        d.class_frequency.assign(cases.n_classes(), 0.0);
        for (std::size_t c = 0; c < cases.n_cases(); ++c) {
            d.class_frequency[cases.cases()[c].class_label] += freqs[i][c];
        }
        for (std::size_t k = 0; k < case_counts.size(); ++k) {
            d.class_frequency[k] = case_counts[k] > 0 ? d.class_frequency[k] / case_counts[k] : 0.0;
        }
        d.effect_size = effect_size_from_frequencies(freqs[i], cases, d.asserted_class);
    });
    if (frequencies) {
        *frequencies = std::move(freqs);
    }
    return out;
}

inline nlohmann::json to_json(const PopulationDescription& d, const std::vector<std::string>& markers,
                              const std::vector<std::string>& classes)
{
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto& [variable, interval] : d.intervals) {
        auto j = to_json(interval);
        j["variable"] = variable;
        j["marker"] = markers.at(variable);
        intervals.push_back(j);
    }
    nlohmann::json freq = nlohmann::json::object();
    for (std::size_t k = 0; k < classes.size(); ++k) {
        freq[classes[k]] = k < d.class_frequency.size() ? d.class_frequency[k] : 0.0;
    }
    return {{"id", d.id},           {"source_node", d.source_node},
            {"class", classes.at(d.asserted_class)},
            {"effect_size", d.effect_size},
            {"tokens", d.tokens},   {"rule", d.rule()},
            {"conditions", d.conditions()},
            {"intervals", intervals}, {"frequencies", freq}};
}

inline PopulationDescription description_from_json(const nlohmann::json& j, const std::vector<std::string>& classes)
{
    PopulationDescription d;
    d.id = j.at("id").get<std::size_t>();
    d.source_node = j.at("source_node").get<std::size_t>();
    const auto name = j.at("class").get<std::string>();
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) {
        fail(ErrorKind::integrity, "population refers to unknown class '" + name + "'");
    }
    d.asserted_class = static_cast<int>(it - classes.begin());
    d.effect_size = j.at("effect_size").get<double>();
    d.tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const auto& ji : j.at("intervals")) {
        d.intervals.emplace(ji.at("variable").get<std::size_t>(), interval_from_json(ji));
    }
    d.class_frequency.assign(classes.size(), 0.0);
    for (std::size_t k = 0; k < classes.size(); ++k) {
        d.class_frequency[k] = j.at("frequencies").value(classes[k], 0.0);
    }
    return d;
}

// Plain-text rule table: population, class, effect size, rule, and the
// mean per-case frequency in percent for every class.
inline std::string rule_sheet(const std::vector<PopulationDescription>& descriptions,
                              const std::vector<std::string>& classes)
{
    std::size_t rule_width = std::string("Description Rule").size();
    for (const auto& d : descriptions) {
        rule_width = std::max(rule_width, d.rule().size());
    }
    rule_width += 2;
    std::vector<std::string> headers;
    for (const auto& c : classes) {
        headers.push_back(c + " [%]");
    }
    std::ostringstream out;
    out << std::left << std::setw(5) << "Pop" << std::setw(12) << "Class" << std::setw(12) << "|d|"
        << std::setw(static_cast<int>(rule_width)) << "Description Rule";
    for (const auto& h : headers) {
        out << std::right << std::setw(static_cast<int>(std::max<std::size_t>(10, h.size() + 2))) << h;
    }
    out << '\n';
    for (const auto& d : descriptions) {
        std::ostringstream effect;
        if (d.effect_size >= kSeparatingEffect) {
            effect << "separating";
        } else {
            effect << std::fixed << std::setprecision(2) << d.effect_size;
        }
        out << std::left << std::setw(5) << d.id << std::setw(12) << classes.at(d.asserted_class)
            << std::setw(12) << effect.str() << std::setw(static_cast<int>(rule_width)) << d.rule();
        for (std::size_t k = 0; k < classes.size(); ++k) {
            out << std::right << std::setw(static_cast<int>(std::max<std::size_t>(10, headers[k].size() + 2)))
                << std::fixed << std::setprecision(1) << 100.0 * d.class_frequency.at(k);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace alpods
