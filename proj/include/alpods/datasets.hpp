#pragma once

#include "error.hpp"
#include "event_table.hpp"
#include "iris_data.hpp"
#include "random.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace alpods {

// Case-level partition of a table. No case appears on both sides.
struct DatasetSplit
{
    EventTable train;
    EventTable test;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

// Stratified case split. Each class with at least two cases contributes
// round(n * train_fraction) cases to train, clamped so both sides get one;
// a class with a single case is kept in train and reported in `warnings`.
inline DatasetSplit split_cases(const EventTable& table, double train_fraction, std::uint64_t seed)
{
    require(table.n_cases() >= 2, "split_cases needs at least two cases");
    require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");

    Rng rng(mix_seed(seed, 0x5911));
    std::vector<std::vector<std::uint32_t>> by_class(table.n_classes());
    for (std::uint32_t c = 0; c < table.n_cases(); ++c) {
        by_class[table.cases()[c].class_label].push_back(c);
    }
    DatasetSplit split;
    split.seed = seed;
    std::vector<std::uint32_t> train_cases;
    std::vector<std::uint32_t> test_cases;
    for (std::size_t k = 0; k < by_class.size(); ++k) {
        auto& cases = by_class[k];
        if (cases.empty()) {
            continue;
        }
        if (cases.size() < 2) {
            split.warnings.push_back("class '" + table.classes()[k] +
                                     "' has fewer than 2 cases; kept wholly in train");
            train_cases.insert(train_cases.end(), cases.begin(), cases.end());
            continue;
        }
        rng.shuffle(std::span(cases));
        auto n_train = static_cast<std::size_t>(std::llround(cases.size() * train_fraction));
        n_train = std::clamp<std::size_t>(n_train, 1, cases.size() - 1);
        train_cases.insert(train_cases.end(), cases.begin(), cases.begin() + n_train);
        test_cases.insert(test_cases.end(), cases.begin() + n_train, cases.end());
    }
    std::sort(train_cases.begin(), train_cases.end());
    std::sort(test_cases.begin(), test_cases.end());
    split.train = table.select_cases(train_cases);
    split.test = table.select_cases(test_cases);
    return split;
}

// Up to `per_class_events` events per class, drawn uniformly without
// replacement. Classes are emitted in class-index order.
inline EventTable balanced_event_sample(const EventTable& table, std::size_t per_class_events,
                                        std::uint64_t seed)
{
    require(!table.empty(), "cannot sample from an empty table");
    Rng rng(mix_seed(seed, 0xba1));
    std::vector<std::vector<EventIndex>> by_class(table.n_classes());
    for (std::size_t i = 0; i < table.n_events(); ++i) {
        by_class[table.event_class(i)].push_back(static_cast<EventIndex>(i));
    }
    std::vector<EventIndex> rows;
    for (auto& events : by_class) {
        const std::size_t take = std::min(per_class_events, events.size());
        // Partial Fisher-Yates: the first `take` slots become the sample.
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(events.size() - i));
            std::swap(events[i], events[j]);
        }
        rows.insert(rows.end(), events.begin(), events.begin() + take);
    }
    return table.select_events(rows);
}

// Iris with Gaussian jitter. Each of `repetitions` copies of the 150 base
// flowers gets independent noise with variance noise_variance_fraction
// times the sample variance of the variable; every flower is its own case.
// The split halves every species.
inline std::pair<EventTable, DatasetSplit> generate_jittered_iris(std::uint64_t seed,
                                                                  std::size_t repetitions = 10,
                                                                  double noise_variance_fraction = 0.10)
{
    require(repetitions >= 1, "repetitions must be at least 1");
    require(noise_variance_fraction >= 0.0, "noise_variance_fraction must be non-negative");

    const auto& base = detail::kIrisRows;
    std::array<double, 4> noise_sd{};
    for (std::size_t v = 0; v < 4; ++v) {
        double mean = 0.0;
        for (const auto& r : base) {
            mean += r.values[v];
        }
        mean /= base.size();
        double ss = 0.0;
        for (const auto& r : base) {
            ss += (r.values[v] - mean) * (r.values[v] - mean);
        }
        noise_sd[v] = std::sqrt(noise_variance_fraction * ss / (base.size() - 1));
    }

    Rng rng(mix_seed(seed, 0x1415));
    std::vector<double> values;
    values.reserve(repetitions * base.size() * 4);
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            for (std::size_t v = 0; v < 4; ++v) {
                const double noise = noise_sd[v] > 0.0 ? rng.normal(0.0, noise_sd[v]) : 0.0;
                values.push_back(base[i].values[v] + noise);
            }
            ids.push_back("iris" + std::to_string(rep + 1) + "_" + std::to_string(i + 1));
            labels.emplace_back(detail::kIrisSpecies[base[i].species]);
        }
    }
    std::vector<std::string> markers(detail::kIrisMarkers.begin(), detail::kIrisMarkers.end());
    EventTable table(std::move(markers), std::move(values), ids, labels);
    auto split = split_cases(table, 0.5, seed);
    return {std::move(table), std::move(split)};
}

} // namespace alpods
