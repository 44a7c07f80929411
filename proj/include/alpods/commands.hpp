#pragma once

#include "csv.hpp"
#include "datasets.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "synthetic.hpp"
#include "vispanel.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace alpods {

enum ExitCode : int
{
    kExitOk = 0,
    kExitValidation = 1,
    kExitIo = 2,
    kExitAcceptance = 3
};

// Everything a run can be configured with from a JSON file. Growth
// parameters are flat keys next to the sampling and rendering keys.
struct RunConfig
{
    TrainConfig train;
    std::size_t sdh_bins = 64;
    std::size_t max_plots = kDefaultMaxPlots;
    CsvSchema schema;

    void validate() const
    {
        train.validate();
        require(sdh_bins >= 2, "sdh_bins must be at least 2");
        require(max_plots >= 1, "max_plots must be at least 1");
    }

    static RunConfig from_json(const nlohmann::json& j)
    {
        if (!j.is_object()) {
            fail(ErrorKind::input, "config must be a JSON object");
        }
        RunConfig config;
        nlohmann::json growth = nlohmann::json::object();
        try {
            for (const auto& [key, value] : j.items()) {
                if (key == "per_class_events") {
                    config.train.per_class_events = value.get<std::size_t>();
                } else if (key == "seed") {
                    config.train.seed = value.get<std::uint64_t>();
                } else if (key == "sdh_bins") {
                    config.sdh_bins = value.get<std::size_t>();
                } else if (key == "max_plots") {
                    config.max_plots = value.get<std::size_t>();
                } else if (key == "schema") {
                    config.schema = CsvSchema::from_json(value);
                } else {
                    growth[key] = value;
                }
            }
            update_from_json(config.train.growth, growth);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::input, std::string("bad config value: ") + e.what());
        }
        config.validate();
        return config;
    }

    static RunConfig load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) {
            fail(ErrorKind::io, "cannot open config file " + path);
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::input, "config file " + path + " is not valid JSON: " + e.what());
        }
        return from_json(j);
    }
};

// Values given on the command line win over the config file.
struct CommonOptions
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t threads = default_thread_count();

    RunConfig resolve() const
    {
        RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        if (seed) {
            config.train.seed = *seed;
        }
        config.validate();
        return config;
    }
};

namespace detail {

inline void ensure_directory(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        fail(ErrorKind::io, "cannot create output directory " + dir);
    }
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::io, "cannot write " + path);
    }
    out << text;
    if (!out) {
        fail(ErrorKind::io, "write failed for " + path);
    }
}

// True for a 0-byte file or one holding a header and blank lines only.
inline bool has_no_rows(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t non_blank = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            ++non_blank;
        }
    }
    return non_blank <= 1;
}

inline std::string output_stem(const std::string& bundle_path)
{
    std::filesystem::path p(bundle_path);
    if (p.extension() == ".json") {
        p.replace_extension();
    }
    return p.string();
}

} // namespace detail

// Maps exceptions to exit codes and prints the message to `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::io ? kExitIo : kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

struct GenIrisOptions
{
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

inline int cmd_gen_iris(const GenIrisOptions& o, std::ostream& out)
{
    detail::ensure_directory(o.out_dir);
    const auto [table, split] = generate_jittered_iris(o.seed);
    const auto dir = std::filesystem::path(o.out_dir);
    write_csv((dir / "iris_train.csv").string(), split.train);
    write_csv((dir / "iris_test.csv").string(), split.test);
    out << "wrote " << (dir / "iris_train.csv").string() << " (" << split.train.n_events() << " rows) and "
        << (dir / "iris_test.csv").string() << " (" << split.test.n_events() << " rows)\n";
    return kExitOk;
}

struct GenSyntheticOptions
{
    std::string kind = "planted"; // planted | mixture
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::optional<std::size_t> events;          // total for mixture, per case for planted
    std::optional<std::size_t> cases_per_class;
};

inline int cmd_gen_synthetic(const GenSyntheticOptions& o, std::ostream& out)
{
    detail::ensure_directory(o.out_dir);
    const auto dir = std::filesystem::path(o.out_dir);
    if (o.kind == "planted") {
        const auto bench =
            generate_planted_benchmark(o.seed, o.cases_per_class.value_or(20), o.events.value_or(2500));
        write_csv((dir / "planted.csv").string(), bench.table);
        std::string tags = "planted\n";
        for (const int t : bench.planted) {
            tags += std::to_string(t) + '\n';
        }
        detail::write_file((dir / "planted_membership.csv").string(), tags);
        out << "wrote " << (dir / "planted.csv").string() << " (" << bench.table.n_events() << " rows)\n";
    } else if (o.kind == "mixture") {
        const auto table =
            generate_shifted_mixture(o.seed, o.events.value_or(700000), o.cases_per_class.value_or(7));
        write_csv((dir / "mixture.csv").string(), table);
        out << "wrote " << (dir / "mixture.csv").string() << " (" << table.n_events() << " rows)\n";
    } else {
        fail(ErrorKind::input, "unknown synthetic kind '" + o.kind + "' (expected planted or mixture)");
    }
    return kExitOk;
}

struct TrainOptions
{
    CommonOptions common;
    std::string data_path;
    std::string bundle_path;
    std::optional<std::size_t> per_class_events;
};

inline int cmd_train(const TrainOptions& o, std::ostream& out)
{
    RunConfig config = o.common.resolve();
    if (o.per_class_events) {
        config.train.per_class_events = *o.per_class_events;
    }
    config.validate();
    const auto table = load_csv(o.data_path, config.schema);
    const auto model = train_model(table, config.train, o.common.threads);
    save_model(o.bundle_path, model);
    const auto stem = detail::output_stem(o.bundle_path);
    const auto sheet = rule_sheet(model.populations, model.classes);
    detail::write_file(stem + ".rules.txt", sheet);
    detail::write_file(stem + ".populations.json", populations_to_json(model).dump(1) + "\n");
    out << sheet;
    out << model.populations.size() << " of " << model.candidate_count << " candidate populations selected\n";
    return kExitOk;
}

struct ClassifyOptions
{
    CommonOptions common;
    std::string bundle_path;
    std::string data_path;
    bool explain = false;
    bool json = false;
};

inline int cmd_classify(const ClassifyOptions& o, std::ostream& out, std::ostream& err)
{
    const RunConfig config = o.common.resolve();
    const auto model = load_model(o.bundle_path);
    const auto text = detail::read_file(o.data_path);
    if (detail::has_no_rows(text)) {
        return kExitOk;
    }
    const auto table = parse_csv(text, config.schema);
    const auto results = model.classify(table);
    if (o.json) {
        nlohmann::json records = nlohmann::json::array();
        for (const auto& ex : results) {
            if (o.explain) {
                records.push_back(to_json(ex, model.classes));
            } else {
                records.push_back({{"case_id", ex.case_id}, {"predicted", model.classes[ex.predicted]}});
            }
        }
        out << records.dump(1) << '\n';
    } else {
        for (const auto& ex : results) {
            if (o.explain) {
                out << explanation_text(ex, model.classes);
            } else {
                out << ex.case_id << ',' << model.classes[ex.predicted] << '\n';
            }
        }
    }
    std::size_t labeled = 0;
    std::size_t correct = 0;
    for (std::size_t c = 0; c < table.n_cases(); ++c) {
        const auto& truth = table.classes()[table.cases()[c].class_label];
        const auto it = std::find(model.classes.begin(), model.classes.end(), truth);
        if (it != model.classes.end()) {
            ++labeled;
            correct += model.classes[results[c].predicted] == truth ? 1 : 0;
        }
    }
    if (labeled > 0) {
        err << "accuracy " << correct << "/" << labeled << '\n';
    }
    return kExitOk;
}

struct VisPanelOptions
{
    CommonOptions common;
    std::string bundle_path;
    std::string data_path;
    std::size_t population = 1;
    std::string out_dir = ".";
    std::vector<std::string> pairs; // marker names, two per pair
    std::optional<std::size_t> max_plots;
    std::optional<std::size_t> bins;
};

inline int cmd_vispanel(const VisPanelOptions& o, std::ostream& out)
{
    RunConfig config = o.common.resolve();
    if (o.max_plots) {
        config.max_plots = *o.max_plots;
    }
    if (o.bins) {
        config.sdh_bins = *o.bins;
    }
    config.validate();
    const auto model = load_model(o.bundle_path);
    const PopulationDescription* target = nullptr;
    std::string known;
    for (const auto& d : model.populations) {
        known += (known.empty() ? "" : ", ") + std::to_string(d.id);
        if (d.id == o.population) {
            target = &d;
        }
    }
    if (target == nullptr) {
        fail(ErrorKind::input, "unknown population id " + std::to_string(o.population) + "; known ids: " +
                                   (known.empty() ? "none" : known));
    }
    const auto table = load_csv(o.data_path, config.schema).with_markers(model.markers);
    std::vector<bool> mask(table.n_events());
    std::size_t inside = 0;
    for (std::size_t i = 0; i < table.n_events(); ++i) {
        mask[i] = satisfies(table.row(i), target->intervals);
        inside += mask[i] ? 1 : 0;
    }

    PanelSpec spec;
    if (!o.pairs.empty()) {
        require(o.pairs.size() % 2 == 0, "--pairs needs marker names in pairs, e.g. FS,SS");
        spec.population = target->id;
        spec.max_plots = o.pairs.size() / 2;
        const bool scorable = inside > 0 && inside < table.n_events();
        for (std::size_t k = 0; k < o.pairs.size(); k += 2) {
            const auto x = table.marker_index(o.pairs[k]);
            const auto y = table.marker_index(o.pairs[k + 1]);
            require(x != y, "--pairs needs two different markers per pair");
            const double score = scorable ? probdiff(table, mask, x, y, config.sdh_bins).score : 0.0;
            spec.pairs.push_back({canonical_pair(x, y), score});
        }
    } else {
        require(table.n_markers() >= 2, "a panel needs at least two markers");
        std::vector<PairScore> scores;
        if (inside > 0 && inside < table.n_events()) {
            scores = all_pair_scores(table, mask, config.sdh_bins, o.common.threads);
        } else {
            scores.push_back({{0, 1}, 0.0});
        }
        spec = select_panel(scores, target->id, config.max_plots);
    }
    const auto files = render_panel(table, mask, model.classes.at(target->asserted_class), spec, o.out_dir,
                                    config.train.seed);
    for (const auto& f : files.plots) {
        out << f << '\n';
    }
    out << files.combined << '\n' << files.manifest << '\n';
    return kExitOk;
}

// Acceptance thresholds of the jittered-Iris benchmark.
struct IrisThresholds
{
    double min_mean_accuracy = 0.94;
    double max_mean_clusters = 5.0;
    std::size_t max_clusters = 9;
    double max_mean_conditions = 4.0;
    double max_seconds = 60.0;
};

struct BenchIrisOptions
{
    CommonOptions common;
    std::size_t rounds = 50;
    std::string json_path;
    bool record_timing = false;
};

inline int cmd_bench_iris(const BenchIrisOptions& o, std::ostream& out)
{
    const RunConfig config = o.common.resolve();
    const auto start = std::chrono::steady_clock::now();
    const auto [table, split] = generate_jittered_iris(config.train.seed);
    auto report = cross_validate(table, config.train, o.rounds, CvMode::repeated_split, config.train.seed,
                                 o.common.threads);
    report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.json_path.empty()) {
        detail::write_file(o.json_path, report.to_json(o.record_timing).dump(1) + "\n");
    }
    out << report.text();
    const IrisThresholds t;
    const bool ok = report.mean_accuracy >= t.min_mean_accuracy && report.mean_clusters <= t.max_mean_clusters &&
                    report.max_clusters <= t.max_clusters && report.mean_conditions <= t.max_mean_conditions &&
                    report.wall_clock_seconds < t.max_seconds;
    out << (ok ? "acceptance thresholds met\n" : "acceptance thresholds NOT met\n");
    return ok ? kExitOk : kExitAcceptance;
}

} // namespace alpods
