#pragma once

#include "density.hpp"
#include "descriptions.hpp"
#include "error.hpp"
#include "event_table.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace alpods {

using VariablePair = std::pair<std::size_t, std::size_t>; // always first < second

inline VariablePair canonical_pair(std::size_t x, std::size_t y)
{
    return x < y ? VariablePair{x, y} : VariablePair{y, x};
}

struct ProbDiff
{
    VariablePair pair;
    DensityGrid2D inside;
    DensityGrid2D outside;
    double score = 0.0; // sum of |inside - outside| over cells, in [0, 2]
};

// SDH of the masked events and of the rest over one shared box; the box and
// the cell loop use the canonical pair, so the score does not depend on the
// order of `x` and `y` or on which side the mask selects.
inline ProbDiff probdiff(const EventTable& table, const std::vector<bool>& mask, std::size_t x, std::size_t y,
                         std::size_t bins = 64)
{
    require(mask.size() == table.n_events(), "probdiff mask must have one entry per event");
    require(x != y, "probdiff needs two distinct variables");
    require(x < table.n_markers() && y < table.n_markers(), "probdiff variable out of range");
    ProbDiff out;
    out.pair = canonical_pair(x, y);
    const auto [a, b] = out.pair;
    std::vector<double> in_x, in_y, out_x, out_y;
    for (std::size_t i = 0; i < table.n_events(); ++i) {
        auto& px = mask[i] ? in_x : out_x;
        auto& py = mask[i] ? in_y : out_y;
        px.push_back(table.value(i, a));
        py.push_back(table.value(i, b));
    }
    require(!in_x.empty(), "probdiff: the selected side is empty");
    require(!out_x.empty(), "probdiff: the complement side is empty");
    const auto box_in = bounding_box(in_x, in_y);
    const auto box_out = bounding_box(out_x, out_y);
    const Box2D box{std::min(box_in.x_lo, box_out.x_lo), std::max(box_in.x_hi, box_out.x_hi),
                    std::min(box_in.y_lo, box_out.y_lo), std::max(box_in.y_hi, box_out.y_hi)};
    out.inside = sdh_2d(in_x, in_y, box, bins);
    out.outside = sdh_2d(out_x, out_y, box, bins);
    for (std::size_t k = 0; k < out.inside.weights.size(); ++k) {
        out.score += std::abs(out.inside.weights[k] - out.outside.weights[k]);
    }
    return out;
}

struct PairScore
{
    VariablePair pair;
    double score = 0.0;
};

// All d(d-1)/2 pairs in lexicographic order.
inline std::vector<PairScore> all_pair_scores(const EventTable& table, const std::vector<bool>& mask,
                                              std::size_t bins = 64, std::size_t threads = 1)
{
    std::vector<PairScore> scores;
    for (std::size_t x = 0; x < table.n_markers(); ++x) {
        for (std::size_t y = x + 1; y < table.n_markers(); ++y) {
            scores.push_back({{x, y}, 0.0});
        }
    }
    parallel_for(scores.size(), threads, [&](std::size_t k) {
        scores[k].score = probdiff(table, mask, scores[k].pair.first, scores[k].pair.second, bins).score;
    });
    return scores;
}

inline constexpr std::size_t kDefaultMaxPlots = 6;

struct PanelSpec
{
    std::vector<PairScore> pairs; // score descending
    std::size_t population = 0;
    std::size_t max_plots = kDefaultMaxPlots;
};

// A-set of the computed ABC analysis over the pair scores, capped at
// `max_plots`. All-zero scores carry no ranking; the first pair is used.
inline PanelSpec select_panel(const std::vector<PairScore>& scores, std::size_t population = 0,
                              std::size_t max_plots = kDefaultMaxPlots)
{
    require(!scores.empty(), "panel selection needs at least one variable pair");
    require(max_plots >= 1, "max plots must be at least 1");
    PanelSpec spec;
    spec.population = population;
    spec.max_plots = max_plots;
    std::vector<double> values;
    double total = 0.0;
    for (const auto& s : scores) {
        values.push_back(s.score);
        total += s.score;
    }
    if (!(total > 0.0)) {
        spec.pairs.push_back(scores.front());
        return spec;
    }
    const auto abc = computed_abc(values);
    for (const auto k : abc.a) {
        if (spec.pairs.size() == max_plots) {
            break;
        }
        spec.pairs.push_back(scores[k]);
    }
    return spec;
}

namespace detail {

inline constexpr const char* kBackgroundColor = "#B0B0B0";
inline constexpr const char* kPopulationColor = "#D62728";
inline constexpr std::size_t kMaxPlottedPoints = 20000;
inline constexpr double kPlotSize = 360.0;
inline constexpr double kPlotMargin = 48.0;

inline std::vector<EventIndex> subsample(std::vector<EventIndex> rows, std::size_t limit, Rng& rng)
{
    if (rows.size() <= limit) {
        return rows;
    }
    for (std::size_t i = 0; i < limit; ++i) {
        const std::size_t j = i + rng.below(rows.size() - i);
        std::swap(rows[i], rows[j]);
    }
    rows.resize(limit);
    std::sort(rows.begin(), rows.end());
    return rows;
}

inline std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string xml_escape(std::string_view s)
{
    std::string out;
    for (const char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

// Plot body in local coordinates [0, kPlotSize + 2 * kPlotMargin]^2.
inline std::string plot_body(const EventTable& table, const std::vector<EventIndex>& background,
                             const std::vector<EventIndex>& population, const PairScore& ps,
                             const std::string& title)
{
    const auto [xv, yv] = ps.pair;
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
    for (std::size_t i = 0; i < table.n_events(); ++i) {
        x_lo = std::min(x_lo, table.value(i, xv));
        x_hi = std::max(x_hi, table.value(i, xv));
        y_lo = std::min(y_lo, table.value(i, yv));
        y_hi = std::max(y_hi, table.value(i, yv));
    }
    if (!(x_hi > x_lo)) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (!(y_hi > y_lo)) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    const auto px = [&](double v) { return kPlotMargin + (v - x_lo) / (x_hi - x_lo) * kPlotSize; };
    const auto py = [&](double v) { return kPlotMargin + kPlotSize - (v - y_lo) / (y_hi - y_lo) * kPlotSize; };

    std::ostringstream out;
    const std::string end = fixed2(kPlotMargin + kPlotSize);
    out << "<rect x=\"" << fixed2(kPlotMargin) << "\" y=\"" << fixed2(kPlotMargin) << "\" width=\""
        << fixed2(kPlotSize) << "\" height=\"" << fixed2(kPlotSize) << "\" fill=\"white\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed2(kPlotMargin + kPlotSize / 2) << "\" y=\"" << fixed2(kPlotMargin / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
    out << "<text x=\"" << fixed2(kPlotMargin + kPlotSize / 2) << "\" y=\"" << fixed2(2 * kPlotMargin + kPlotSize - 12)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(table.markers()[xv]) << "</text>\n";
    out << "<text x=\"14\" y=\"" << fixed2(kPlotMargin + kPlotSize / 2) << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 14 " << fixed2(kPlotMargin + kPlotSize / 2) << ")\">"
        << xml_escape(table.markers()[yv]) << "</text>\n";
    out << "<text x=\"" << fixed2(kPlotMargin) << "\" y=\"" << end << "\" dy=\"14\" font-size=\"10\">"
        << xml_escape(format_bound(x_lo)) << "</text>\n";
    out << "<text x=\"" << end << "\" y=\"" << end << "\" dy=\"14\" text-anchor=\"end\" font-size=\"10\">"
        << xml_escape(format_bound(x_hi)) << "</text>\n";
    auto dots = [&](const std::vector<EventIndex>& rows, const char* color) {
        out << "<g fill=\"" << color << "\">\n";
        for (const auto i : rows) {
            out << "<circle cx=\"" << fixed2(px(table.value(i, xv))) << "\" cy=\"" << fixed2(py(table.value(i, yv)))
                << "\" r=\"1.2\"/>\n";
        }
        out << "</g>\n";
    };
    dots(background, kBackgroundColor);
    dots(population, kPopulationColor);
    return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::io, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        fail(ErrorKind::io, "write failed for " + path.string());
    }
}

} // namespace detail

struct PanelFiles
{
    std::vector<std::string> plots;
    std::string combined;
    std::string manifest;
};

// One SVG per panel pair plus a combined panel and a manifest. Gray points
// are events outside the population, red points the population, drawn last.
// Each layer is subsampled to at most 20,000 points with a seeded RNG.
inline PanelFiles render_panel(const EventTable& table, const std::vector<bool>& population,
                               const std::string& class_of_interest, const PanelSpec& spec,
                               const std::string& out_dir, std::uint64_t seed = 1)
{
    require(population.size() == table.n_events(), "population mask must have one entry per event");
    require(!spec.pairs.empty(), "panel has no variable pairs");
    for (const auto& ps : spec.pairs) {
        require(ps.pair.first < table.n_markers() && ps.pair.second < table.n_markers() &&
                    ps.pair.first != ps.pair.second,
                "panel pair refers to unknown variables");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        fail(ErrorKind::io, "cannot create output directory " + out_dir);
    }

    std::vector<EventIndex> inside, outside;
    for (EventIndex i = 0; i < table.n_events(); ++i) {
        (population[i] ? inside : outside).push_back(i);
    }
    const std::size_t population_events = inside.size();
    Rng rng(mix_seed(seed, 0x7a11e));
    const auto background = detail::subsample(std::move(outside), detail::kMaxPlottedPoints, rng);
    const auto foreground = detail::subsample(std::move(inside), detail::kMaxPlottedPoints, rng);

    const double cell = detail::kPlotSize + 2 * detail::kPlotMargin;
    const std::string header = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    auto svg_open = [&](double w, double h) {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + detail::fixed2(w) +
               "\" height=\"" + detail::fixed2(h) + "\" viewBox=\"0 0 " + detail::fixed2(w) + " " +
               detail::fixed2(h) + "\" font-family=\"sans-serif\">\n";
    };

    const std::filesystem::path dir(out_dir);
    PanelFiles files;
    nlohmann::json pairs = nlohmann::json::array();
    const std::size_t columns = std::min<std::size_t>(3, spec.pairs.size());
    const std::size_t rows = (spec.pairs.size() + columns - 1) / columns;
    std::ostringstream combined;
    combined << header << svg_open(columns * cell, rows * cell);
    for (std::size_t k = 0; k < spec.pairs.size(); ++k) {
        const auto& ps = spec.pairs[k];
        const std::string title = "population " + std::to_string(spec.population) + " (" + class_of_interest +
                                  "), ProbDiff " + detail::fixed2(ps.score);
        const std::string body = detail::plot_body(table, background, foreground, ps, title);
        const std::string name = "panel_" + std::to_string(k + 1) + "_" + table.markers()[ps.pair.first] + "_" +
                                 table.markers()[ps.pair.second] + ".svg";
        detail::write_text(dir / name, header + svg_open(cell, cell) + body + "</svg>\n");
        files.plots.push_back((dir / name).string());
        combined << "<g transform=\"translate(" << detail::fixed2((k % columns) * cell) << ","
                 << detail::fixed2((k / columns) * cell) << ")\">\n"
                 << body << "</g>\n";
        pairs.push_back({{"x", table.markers()[ps.pair.first]},
                         {"y", table.markers()[ps.pair.second]},
                         {"score", ps.score},
                         {"file", name}});
    }
    combined << "</svg>\n";
    detail::write_text(dir / "panel.svg", combined.str());
    files.combined = (dir / "panel.svg").string();

    const nlohmann::json manifest = {{"population", spec.population},
                                     {"class", class_of_interest},
                                     {"max_plots", spec.max_plots},
                                     {"population_events", population_events},
                                     {"seed", seed},
                                     {"background_color", detail::kBackgroundColor},
                                     {"population_color", detail::kPopulationColor},
                                     {"pairs", pairs},
                                     {"combined", "panel.svg"}};
    detail::write_text(dir / "manifest.json", manifest.dump(1) + "\n");
    files.manifest = (dir / "manifest.json").string();
    return files;
}

} // namespace alpods
