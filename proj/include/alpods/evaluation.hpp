#pragma once

#include "datasets.hpp"
#include "descriptions.hpp"
#include "error.hpp"
#include "event_table.hpp"
#include "model.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace alpods {

struct Understandability
{
    std::size_t clusters = 0;
    std::size_t max_conditions = 0;
    double mean_conditions = 0.0;
    std::string verdict;
};

// Human-understandable means 2 <= #clusters <= 14 and no cluster with more
// than 14 conditions.
inline Understandability understandability(std::span<const PopulationDescription> descriptions)
{
    Understandability u;
    u.clusters = descriptions.size();
    double total = 0.0;
    for (const auto& d : descriptions) {
        u.max_conditions = std::max(u.max_conditions, d.conditions());
        total += d.conditions();
    }
    u.mean_conditions = descriptions.empty() ? 0.0 : total / descriptions.size();
    if (u.clusters < 2) {
        u.verdict = "trivial";
    } else if (u.clusters > 14 || u.max_conditions > 14) {
        u.verdict = "too complex";
    } else {
        u.verdict = "understandable";
    }
    return u;
}

enum class CvMode
{
    automatic, // leave-one-out for at most 20 cases, repeated split otherwise
    repeated_split,
    leave_one_out
};

struct RoundResult
{
    std::size_t round = 0;
    bool skipped = false;
    std::string warning;
    std::size_t held_out = 0;
    std::size_t correct = 0;
    std::size_t abstained = 0;
    double accuracy = 0.0;
    std::size_t candidates = 0;
    std::vector<std::size_t> conditions; // per emitted population
};

struct EvalReport
{
    std::string mode;
    std::size_t rounds_requested = 0;
    std::vector<RoundResult> rounds;
    bool degenerate = false;
    std::vector<std::string> warnings;
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    std::size_t max_clusters = 0;
    double mean_clusters = 0.0;
    double sd_clusters = 0.0;
    std::size_t max_conditions = 0;
    double mean_conditions = 0.0;
    double sd_conditions = 0.0;
    double wall_clock_seconds = 0.0;
    TrainConfig params;
    std::uint64_t seed = 0;

    std::size_t completed_rounds() const
    {
        return static_cast<std::size_t>(
            std::count_if(rounds.begin(), rounds.end(), [](const RoundResult& r) { return !r.skipped; }));
    }

    // Wall-clock time is left out unless asked for, so reports stay
    // byte-identical across reruns.
    nlohmann::json to_json(bool include_timing = false) const
    {
        nlohmann::json per_round = nlohmann::json::array();
        for (const auto& r : rounds) {
            nlohmann::json jr = {{"round", r.round}, {"skipped", r.skipped}};
            if (r.skipped) {
                jr["warning"] = r.warning;
            } else {
                jr["held_out"] = r.held_out;
                jr["correct"] = r.correct;
                jr["abstained"] = r.abstained;
                jr["accuracy"] = r.accuracy;
                jr["candidates"] = r.candidates;
                jr["clusters"] = r.conditions.size();
                jr["conditions"] = r.conditions;
            }
            per_round.push_back(jr);
        }
        nlohmann::json j = {{"mode", mode},
                            {"rounds_requested", rounds_requested},
                            {"rounds_completed", completed_rounds()},
                            {"degenerate", degenerate},
                            {"warnings", warnings},
                            {"accuracy", {{"mean", mean_accuracy}, {"sd", sd_accuracy}}},
                            {"clusters", {{"max", max_clusters}, {"mean", mean_clusters}, {"sd", sd_clusters}}},
                            {"conditions", {{"max", max_conditions}, {"mean", mean_conditions}, {"sd", sd_conditions}}},
                            {"params", alpods::to_json(params)},
                            {"seed", seed},
                            {"rounds", per_round}};
        if (include_timing) {
            j["wall_clock_seconds"] = wall_clock_seconds;
        }
        return j;
    }

    std::string text() const
    {
        std::ostringstream out;
        out << std::fixed;
        auto row = [&](const std::string& label) -> std::ostream& {
            return out << std::left << std::setw(38) << label;
        };
        row("Processing Time") << std::setprecision(1) << wall_clock_seconds << " s\n";
        row("No of Crossvalidations") << completed_rounds() << " (" << mode << ")\n";
        row("Max No Of Cluster") << max_clusters << '\n';
        row("Mean No Of Cluster") << std::setprecision(1) << mean_clusters << " +- " << sd_clusters << '\n';
        row("Max No Of Conditions for a Cluster") << max_conditions << '\n';
        row("Mean No Of Conditions for a Cluster") << std::setprecision(1) << mean_conditions << " +- "
                                                   << sd_conditions << '\n';
        row("Accuracy [%]") << std::setprecision(1) << 100.0 * mean_accuracy << " +- " << 100.0 * sd_accuracy
                            << '\n';
        for (const auto& w : warnings) {
            out << "warning: " << w << '\n';
        }
        return out.str();
    }
};

namespace detail {

inline std::pair<double, double> mean_sd(const std::vector<double>& v)
{
    if (v.empty()) {
        return {0.0, 0.0};
    }
    double mean = 0.0;
    for (const double x : v) {
        mean += x;
    }
    mean /= v.size();
    double ss = 0.0;
    for (const double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0};
}

inline RoundResult run_round(const EventTable& train, const EventTable& test, const TrainConfig& config,
                             std::size_t round)
{
    RoundResult r;
    r.round = round;
    if (train.present_classes().size() < 2) {
        r.skipped = true;
        r.warning = "round " + std::to_string(round) + ": training cases hold fewer than two classes";
        return r;
    }
    if (test.n_cases() == 0) {
        r.skipped = true;
        r.warning = "round " + std::to_string(round) + ": no held-out cases";
        return r;
    }
    const Model model = train_model(train, config, 1);
    r.candidates = model.candidate_count;
    for (const auto& d : model.populations) {
        r.conditions.push_back(d.conditions());
    }
    r.held_out = test.n_cases();
    if (model.classifiers.empty()) {
        r.abstained = r.held_out;
    } else {
        for (std::size_t c = 0; c < test.n_cases(); ++c) {
            try {
                const auto ex = classify_case(test, c, model.classifiers);
                r.correct += ex.predicted == test.cases()[c].class_label ? 1 : 0;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::abstain) {
                    throw;
                }
                ++r.abstained;
            }
        }
    }
    r.accuracy = static_cast<double>(r.correct) / r.held_out;
    return r;
}

} // namespace detail

// Case-level cross-validation. Repeated-split rounds use stratified 50/50
// case splits; leave-one-out holds out every case once and ignores
// `rounds`. Each round trains on a balanced event sample of its training
// cases and scores held-out cases by population vote. Rounds run on up to
// `threads` workers; the report does not depend on the thread count.
inline EvalReport cross_validate(const EventTable& table, const TrainConfig& config, std::size_t rounds,
                                 CvMode mode = CvMode::automatic, std::uint64_t seed = 1, std::size_t threads = 1)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    EvalReport report;
    report.params = config;
    report.seed = seed;
    report.rounds_requested = rounds;
    if (mode == CvMode::automatic) {
        mode = table.n_cases() <= 20 ? CvMode::leave_one_out : CvMode::repeated_split;
    }
    report.mode = mode == CvMode::leave_one_out ? "leave-one-out" : "repeated-split";

    if (table.present_classes().size() < 2) {
        report.degenerate = true;
        report.mean_accuracy = 1.0;
        report.warnings.push_back("single-class data: every case is trivially labeled correctly");
        report.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
    }

    if (mode == CvMode::leave_one_out) {
        require(table.n_cases() >= 2, "leave-one-out needs at least two cases");
        rounds = table.n_cases();
        report.rounds_requested = rounds;
    } else {
        for (const auto n : table.class_case_counts()) {
            require(n == 0 || n >= 2, "repeated-split cross-validation needs at least two cases per class");
        }
        require(rounds >= 1, "at least one round is required");
    }

    report.rounds.resize(rounds);
    parallel_for(rounds, threads, [&](std::size_t r) {
        TrainConfig round_config = config;
        round_config.seed = mix_seed(seed, 2 * r + 1);
        if (mode == CvMode::leave_one_out) {
            std::vector<std::uint32_t> keep;
            for (std::uint32_t c = 0; c < table.n_cases(); ++c) {
                if (c != r) {
                    keep.push_back(c);
                }
            }
            const std::uint32_t held[] = {static_cast<std::uint32_t>(r)};
            report.rounds[r] = detail::run_round(table.select_cases(keep), table.select_cases(held), round_config, r);
        } else {
            const auto split = split_cases(table, 0.5, mix_seed(seed, 2 * r));
            report.rounds[r] = detail::run_round(split.train, split.test, round_config, r);
        }
    });

    std::vector<double> accuracies;
    std::vector<double> clusters;
    std::vector<double> conditions;
    for (const auto& r : report.rounds) {
        if (r.skipped) {
            report.warnings.push_back(r.warning);
            continue;
        }
        accuracies.push_back(r.accuracy);
        clusters.push_back(static_cast<double>(r.conditions.size()));
        report.max_clusters = std::max(report.max_clusters, r.conditions.size());
        for (const auto c : r.conditions) {
            conditions.push_back(static_cast<double>(c));
            report.max_conditions = std::max(report.max_conditions, c);
        }
    }
    std::tie(report.mean_accuracy, report.sd_accuracy) = detail::mean_sd(accuracies);
    std::tie(report.mean_clusters, report.sd_clusters) = detail::mean_sd(clusters);
    std::tie(report.mean_conditions, report.sd_conditions) = detail::mean_sd(conditions);
    report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace alpods
