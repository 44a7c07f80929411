#pragma once

#include "density.hpp"
#include "descriptions.hpp"
#include "error.hpp"
#include "event_table.hpp"
#include "interval.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace alpods {

// Crisp membership of one event in a population.
inline bool event_membership(std::span<const double> event, const IntervalMap& intervals)
{
    return satisfies(event, intervals);
}

// Share of the case's events inside the population.
inline double case_frequency(const EventTable& table, std::size_t case_index, const IntervalMap& intervals)
{
    const auto& rows = table.cases().at(case_index).rows;
    require(!rows.empty(), "case has no events");
    std::size_t hits = 0;
    for (const auto r : rows) {
        hits += event_membership(table.row(r), intervals) ? 1 : 0;
    }
    return static_cast<double>(hits) / rows.size();
}

// Fuzzy set over the frequency domain [0, 1].
struct MembershipFunction
{
    std::string tag;
    std::vector<double> grid;
    std::vector<double> values;
    // Longest stretch where the membership lies strictly inside (0.4, 0.6).
    std::optional<std::pair<double, double>> indecisive;
};

inline constexpr double kFrequencyDensityFloor = 1e-3;
inline constexpr std::size_t kMembershipGridPoints = 101;
inline constexpr double kMinFrequencyBandwidth = 0.01; // one membership grid step

// Frequency densities of the two case groups of a population and the
// derived many()/few() memberships. many(f) is the posterior, under equal
// priors, of the group with the larger mean frequency.
struct FrequencyCalibration
{
    bool informative = false;
    bool first_group_high = true;
    DensityGrid high_density;
    DensityGrid low_density;
    double high_mean = 0.0;
    double low_mean = 0.0;
    MembershipFunction many;
    MembershipFunction few;

    double many_at(double f) const
    {
        const double hi = high_density.at(f) + kFrequencyDensityFloor;
        const double lo = low_density.at(f) + kFrequencyDensityFloor;
        return hi / (hi + lo);
    }
};

namespace detail {

inline void fill_memberships(FrequencyCalibration& cal)
{
    cal.many.tag = "many";
    cal.few.tag = "few";
    cal.many.grid.resize(kMembershipGridPoints);
    cal.many.values.resize(kMembershipGridPoints);
    for (std::size_t i = 0; i < kMembershipGridPoints; ++i) {
        const double f = static_cast<double>(i) / (kMembershipGridPoints - 1);
        cal.many.grid[i] = f;
        cal.many.values[i] = cal.many_at(f);
    }
    cal.few.grid = cal.many.grid;
    cal.few.values.resize(kMembershipGridPoints);
    for (std::size_t i = 0; i < kMembershipGridPoints; ++i) {
        cal.few.values[i] = 1.0 - cal.many.values[i];
    }
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < kMembershipGridPoints;) {
        if (!(cal.many.values[i] > 0.4 && cal.many.values[i] < 0.6)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < kMembershipGridPoints && cal.many.values[j] > 0.4 && cal.many.values[j] < 0.6) {
            ++j;
        }
        if (j - i > best_len) {
            best_len = j - i;
            cal.many.indecisive = std::pair{cal.many.grid[i], cal.many.grid[j - 1]};
        }
        i = j;
    }
    cal.few.indecisive = cal.many.indecisive;
}

inline double mean_of(std::span<const double> v)
{
    double s = 0.0;
    for (const double x : v) {
        s += x;
    }
    return s / v.size();
}

} // namespace detail

// Calibrates many()/few() from the case frequencies of two groups, both
// smoothed with the larger of their Silverman bandwidths (at least one
// membership grid step). Equal group means make the population
// uninformative.
inline FrequencyCalibration calibrate(std::span<const double> first_group, std::span<const double> second_group)
{
    require(!first_group.empty() && !second_group.empty(), "calibration needs cases in both groups");
    FrequencyCalibration cal;
    const double first_mean = detail::mean_of(first_group);
    const double second_mean = detail::mean_of(second_group);
    cal.first_group_high = first_mean >= second_mean;
    const auto high = cal.first_group_high ? first_group : second_group;
    const auto low = cal.first_group_high ? second_group : first_group;
    cal.high_mean = std::max(first_mean, second_mean);
    cal.low_mean = std::min(first_mean, second_mean);
    cal.informative = cal.high_mean > cal.low_mean;
    // One bandwidth for both groups: with unequal bandwidths the posterior
    // at a shared value reflects kernel widths rather than group mass, which
    // is extreme for the point masses at 0 and 1 of single-event cases.
    const double h = std::max({detail::silverman_bandwidth(high), detail::silverman_bandwidth(low),
                               kMinFrequencyBandwidth});
    cal.high_density = estimate_pdf_1d_with_bandwidth(high, h);
    cal.low_density = estimate_pdf_1d_with_bandwidth(low, h);
    detail::fill_memberships(cal);
    return cal;
}

// One expert per population: the asserted class against every other class
// seen in training.
struct PopulationClassifier
{
    std::size_t population = 0;
    std::string name;
    IntervalMap intervals;
    int asserted_class = -1;
    std::vector<int> high_classes;
    std::vector<int> low_classes;
    FrequencyCalibration calibration;

    bool informative() const { return calibration.informative; }
    double many_at(double f) const { return calibration.many_at(f); }
    double few_at(double f) const { return 1.0 - calibration.many_at(f); }
};

// `frequencies` holds the description's frequency for every case of `cases`.
inline PopulationClassifier make_classifier(const PopulationDescription& description,
                                            std::span<const double> frequencies, const EventTable& cases)
{
    require(frequencies.size() == cases.n_cases(), "one frequency per case required");
    PopulationClassifier pc;
    pc.population = description.id;
    pc.name = description.rule();
    pc.intervals = description.intervals;
    pc.asserted_class = description.asserted_class;
    std::vector<double> target;
    std::vector<double> rest;
    std::vector<int> rest_classes;
    for (const int k : cases.present_classes()) {
        if (k != description.asserted_class) {
            rest_classes.push_back(k);
        }
    }
    for (std::size_t c = 0; c < cases.n_cases(); ++c) {
        (cases.cases()[c].class_label == description.asserted_class ? target : rest).push_back(frequencies[c]);
    }
    if (target.empty() || rest.empty()) {
        fail(ErrorKind::input, "classifier calibration needs cases of the asserted class and of the rest");
    }
    pc.calibration = calibrate(target, rest);
    const std::vector<int> asserted{description.asserted_class};
    pc.high_classes = pc.calibration.first_group_high ? asserted : rest_classes;
    pc.low_classes = pc.calibration.first_group_high ? rest_classes : asserted;
    return pc;
}

struct PopulationVerdict
{
    std::size_t population = 0;
    std::string name;
    double frequency = 0.0;
    bool many = false;
    double degree = 0.0;
    std::vector<int> voted_classes;

    std::string term() const { return std::string(many ? "many(" : "few(") + name + ")"; }
};

struct CaseExplanation
{
    std::string case_id;
    int predicted = -1;
    std::vector<double> votes;       // per class
    std::vector<double> conjunction; // per class, min degree of its supporters
    std::vector<PopulationVerdict> populations;
    std::vector<std::size_t> pro;    // indices into populations
    std::vector<std::size_t> contra;
};

// Every informative expert votes for its winning side at the observed
// frequency; a side holding several classes splits its vote evenly. With
// more than two classes the experts asserting one class share a single
// vote, so a class backed by many populations cannot flood the rest sides.
// The most-voted class wins; ties go to the larger min-conjunction of the
// supporting degrees, then to the lexicographically smaller label.
inline CaseExplanation classify_frequencies(std::span<const double> frequencies,
                                            std::span<const PopulationClassifier> classifiers,
                                            std::span<const std::string> class_names)
{
    require(frequencies.size() == classifiers.size(), "one frequency per classifier required");
    const std::size_t k = class_names.size();
    CaseExplanation ex;
    ex.votes.assign(k, 0.0);
    ex.conjunction.assign(k, std::numeric_limits<double>::infinity());
    std::vector<double> weight(classifiers.size(), 1.0);
    if (k > 2) {
        std::map<int, std::size_t> committee;
        for (const auto& pc : classifiers) {
            committee[pc.asserted_class] += pc.informative() ? 1 : 0;
        }
        for (std::size_t i = 0; i < classifiers.size(); ++i) {
            weight[i] = 1.0 / std::max<std::size_t>(1, committee[classifiers[i].asserted_class]);
        }
    }
    std::size_t informative = 0;
    for (std::size_t i = 0; i < classifiers.size(); ++i) {
        const auto& pc = classifiers[i];
        if (!pc.informative()) {
            continue;
        }
        ++informative;
        PopulationVerdict v;
        v.population = pc.population;
        v.name = pc.name;
        v.frequency = frequencies[i];
        const double many = pc.many_at(frequencies[i]);
        v.many = many > 0.5;
        v.degree = v.many ? many : 1.0 - many;
        v.voted_classes = v.many ? pc.high_classes : pc.low_classes;
        for (const int c : v.voted_classes) {
            ex.votes[c] += weight[i] / v.voted_classes.size();
            ex.conjunction[c] = std::min(ex.conjunction[c], v.degree);
        }
        ex.populations.push_back(std::move(v));
    }
    if (informative == 0) {
        fail(ErrorKind::abstain, "no informative population classifier");
    }
    constexpr double tie = 1e-9;
    int best = -1;
    for (std::size_t c = 0; c < k; ++c) {
        if (ex.votes[c] <= 0.0) {
            continue;
        }
        if (best < 0) {
            best = static_cast<int>(c);
            continue;
        }
        const double dv = ex.votes[c] - ex.votes[best];
        if (dv > tie) {
            best = static_cast<int>(c);
        } else if (dv >= -tie) {
            const double dc = ex.conjunction[c] - ex.conjunction[best];
            if (dc > tie || (std::abs(dc) <= tie && class_names[c] < class_names[best])) {
                best = static_cast<int>(c);
            }
        }
    }
    ex.predicted = best;
    for (std::size_t i = 0; i < ex.populations.size(); ++i) {
        const auto& voted = ex.populations[i].voted_classes;
        (std::find(voted.begin(), voted.end(), best) != voted.end() ? ex.pro : ex.contra).push_back(i);
    }
    for (auto& c : ex.conjunction) {
        if (std::isinf(c)) {
            c = 0.0;
        }
    }
    return ex;
}

inline CaseExplanation classify_case(const EventTable& table, std::size_t case_index,
                                     std::span<const PopulationClassifier> classifiers)
{
    std::vector<double> freqs(classifiers.size());
    for (std::size_t i = 0; i < classifiers.size(); ++i) {
        freqs[i] = case_frequency(table, case_index, classifiers[i].intervals);
    }
    auto ex = classify_frequencies(freqs, classifiers, table.classes());
    ex.case_id = table.cases()[case_index].case_id;
    return ex;
}

namespace detail {

inline nlohmann::json density_to_json(const DensityGrid& d)
{
    return {{"grid", d.grid}, {"values", d.values}};
}

inline DensityGrid density_from_json(const nlohmann::json& j)
{
    DensityGrid d;
    d.grid = j.at("grid").get<std::vector<double>>();
    d.values = j.at("values").get<std::vector<double>>();
    if (d.grid.size() != d.values.size() || d.grid.size() < 2) {
        fail(ErrorKind::integrity, "malformed density grid");
    }
    return d;
}

inline nlohmann::json class_list(const std::vector<int>& ks, std::span<const std::string> names)
{
    nlohmann::json out = nlohmann::json::array();
    for (const int k : ks) {
        out.push_back(names[k]);
    }
    return out;
}

inline std::vector<int> class_list_from_json(const nlohmann::json& j, std::span<const std::string> names)
{
    std::vector<int> out;
    for (const auto& v : j) {
        const auto it = std::find(names.begin(), names.end(), v.get<std::string>());
        if (it == names.end()) {
            fail(ErrorKind::integrity, "classifier refers to an unknown class");
        }
        out.push_back(static_cast<int>(it - names.begin()));
    }
    return out;
}

} // namespace detail

inline nlohmann::json to_json(const PopulationClassifier& pc, std::span<const std::string> class_names)
{
    const auto& cal = pc.calibration;
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto& [variable, interval] : pc.intervals) {
        auto j = to_json(interval);
        j["variable"] = variable;
        intervals.push_back(j);
    }
    nlohmann::json indecisive = nullptr;
    if (cal.many.indecisive) {
        indecisive = {cal.many.indecisive->first, cal.many.indecisive->second};
    }
    return {{"population", pc.population},
            {"name", pc.name},
            {"intervals", intervals},
            {"class", pc.asserted_class >= 0 ? nlohmann::json(class_names[pc.asserted_class]) : nlohmann::json(nullptr)},
            {"high_classes", detail::class_list(pc.high_classes, class_names)},
            {"low_classes", detail::class_list(pc.low_classes, class_names)},
            {"informative", cal.informative},
            {"high_mean", cal.high_mean},
            {"low_mean", cal.low_mean},
            {"high_density", detail::density_to_json(cal.high_density)},
            {"low_density", detail::density_to_json(cal.low_density)},
            {"indecisive_band", indecisive}};
}

inline PopulationClassifier classifier_from_json(const nlohmann::json& j, std::span<const std::string> class_names)
{
    PopulationClassifier pc;
    pc.population = j.at("population").get<std::size_t>();
    pc.name = j.at("name").get<std::string>();
    for (const auto& ji : j.at("intervals")) {
        pc.intervals.emplace(ji.at("variable").get<std::size_t>(), interval_from_json(ji));
    }
    if (!j.at("class").is_null()) {
        pc.asserted_class = detail::class_list_from_json(nlohmann::json::array({j.at("class")}), class_names).at(0);
    }
    pc.high_classes = detail::class_list_from_json(j.at("high_classes"), class_names);
    pc.low_classes = detail::class_list_from_json(j.at("low_classes"), class_names);
    auto& cal = pc.calibration;
    cal.informative = j.at("informative").get<bool>();
    cal.high_mean = j.at("high_mean").get<double>();
    cal.low_mean = j.at("low_mean").get<double>();
    cal.high_density = detail::density_from_json(j.at("high_density"));
    cal.low_density = detail::density_from_json(j.at("low_density"));
    detail::fill_memberships(cal);
    return pc;
}

inline nlohmann::json to_json(const CaseExplanation& ex, std::span<const std::string> class_names)
{
    nlohmann::json votes = nlohmann::json::object();
    for (std::size_t k = 0; k < class_names.size(); ++k) {
        votes[class_names[k]] = ex.votes[k];
    }
    nlohmann::json pops = nlohmann::json::array();
    for (const auto& v : ex.populations) {
        pops.push_back({{"population", v.population},
                        {"rule", v.name},
                        {"frequency", v.frequency},
                        {"term", v.many ? "many" : "few"},
                        {"degree", v.degree},
                        {"vote", detail::class_list(v.voted_classes, class_names)}});
    }
    nlohmann::json pro = nlohmann::json::array();
    nlohmann::json contra = nlohmann::json::array();
    for (const auto i : ex.pro) {
        pro.push_back({{"term", ex.populations[i].term()}, {"degree", ex.populations[i].degree}});
    }
    for (const auto i : ex.contra) {
        contra.push_back({{"term", ex.populations[i].term()}, {"degree", ex.populations[i].degree}});
    }
    return {{"case_id", ex.case_id}, {"predicted", class_names[ex.predicted]}, {"votes", votes},
            {"populations", pops},   {"pro", pro},                           {"contra", contra}};
}

// Human-readable verdict, e.g. "PB because many(...) and few(...)".
inline std::string explanation_text(const CaseExplanation& ex, std::span<const std::string> class_names)
{
    std::ostringstream out;
    auto terms = [&](const std::vector<std::size_t>& idx) {
        std::string s;
        for (const auto i : idx) {
            std::ostringstream t;
            t << ex.populations[i].term() << " [" << std::fixed << std::setprecision(2)
              << ex.populations[i].degree << "]";
            s += (s.empty() ? "" : " and ") + t.str();
        }
        return s.empty() ? std::string("-") : s;
    };
    out << ex.case_id << ": " << class_names[ex.predicted] << '\n';
    out << "  pro:    " << terms(ex.pro) << '\n';
    out << "  contra: " << terms(ex.contra) << '\n';
    return out.str();
}

} // namespace alpods
