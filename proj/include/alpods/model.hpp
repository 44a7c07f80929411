#pragma once

#include "dag.hpp"
#include "datasets.hpp"
#include "descriptions.hpp"
#include "error.hpp"
#include "event_table.hpp"
#include "fuzzy.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace alpods {

inline constexpr const char* kBundleFormat = "alpods-bundle/1";

struct TrainConfig
{
    GrowthParams growth;
    std::size_t per_class_events = 10000;
    std::uint64_t seed = 1;

    void validate() const
    {
        growth.validate();
        require(per_class_events >= 1, "per_class_events must be at least 1");
    }
};

inline nlohmann::json to_json(const TrainConfig& c)
{
    auto j = to_json(c.growth);
    j["per_class_events"] = c.per_class_events;
    j["seed"] = c.seed;
    return j;
}

// Trained explainer: the DAG, the selected populations and one calibrated
// expert per population.
struct Model
{
    std::vector<std::string> markers;
    std::vector<std::string> classes;
    std::vector<MarkerBands> bands;
    Dag dag;
    std::size_t candidate_count = 0;
    std::vector<PopulationDescription> populations;
    std::vector<PopulationClassifier> classifiers;
    TrainConfig config;
    EventTable training_sample; // rows the DAG indexes; not serialized

    // One explanation per case of `table`, in case order.
    std::vector<CaseExplanation> classify(const EventTable& table) const
    {
        if (table.markers() != markers) {
            return classify(table.with_markers(markers));
        }
        const EventTable& data = table;
        std::vector<CaseExplanation> out;
        out.reserve(data.n_cases());
        for (std::size_t c = 0; c < data.n_cases(); ++c) {
            std::vector<double> freqs(classifiers.size());
            for (std::size_t i = 0; i < classifiers.size(); ++i) {
                freqs[i] = case_frequency(data, c, classifiers[i].intervals);
            }
            auto ex = classify_frequencies(freqs, classifiers, classes);
            ex.case_id = data.cases()[c].case_id;
            out.push_back(std::move(ex));
        }
        return out;
    }
};

// Balanced event sample -> DAG -> candidate descriptions (frequencies on the
// full training cases) -> relevant few -> calibrated experts.
inline Model train_model(const EventTable& train, const TrainConfig& config = {}, std::size_t threads = 1)
{
    config.validate();
    const auto present = train.present_classes();
    if (present.size() < 2) {
        fail(ErrorKind::input, "need >= 2 classes to train, found " + std::to_string(present.size()));
    }
    Model model;
    model.markers = train.markers();
    model.classes = train.classes();
    model.config = config;
    model.training_sample = balanced_event_sample(train, config.per_class_events, config.seed);
    model.dag = grow_dag(model.training_sample, config.growth, threads);
    model.bands = marker_bands(train);

    std::vector<std::vector<double>> frequencies;
    auto candidates = describe_populations(model.dag, train, model.bands, threads, &frequencies);
    model.candidate_count = candidates.size();
    if (candidates.empty()) {
        return model;
    }
    std::map<std::size_t, std::size_t> by_node;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        by_node[candidates[i].source_node] = i;
    }
    model.populations = select_relevant(std::move(candidates), present.size(), event_overlap(model.dag));
    for (const auto& d : model.populations) {
        model.classifiers.push_back(make_classifier(d, frequencies[by_node.at(d.source_node)], train));
    }
    return model;
}

inline nlohmann::json populations_to_json(const Model& model)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : model.populations) {
        out.push_back(to_json(d, model.markers, model.classes));
    }
    return out;
}

inline nlohmann::json to_json(const Model& model)
{
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : model.bands) {
        bands.push_back(b.cuts);
    }
    nlohmann::json classifiers = nlohmann::json::array();
    for (const auto& pc : model.classifiers) {
        classifiers.push_back(to_json(pc, model.classes));
    }
    return {{"format", kBundleFormat},
            {"markers", model.markers},
            {"classes", model.classes},
            {"config", to_json(model.config)},
            {"marker_percentiles", bands},
            {"candidate_count", model.candidate_count},
            {"dag", to_json(model.dag)},
            {"populations", populations_to_json(model)},
            {"classifiers", classifiers}};
}

inline Model model_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || j.value("format", std::string()) != kBundleFormat) {
        fail(ErrorKind::integrity, std::string("unsupported bundle format, expected ") + kBundleFormat);
    }
    try {
        Model model;
        model.markers = j.at("markers").get<std::vector<std::string>>();
        model.classes = j.at("classes").get<std::vector<std::string>>();
        auto config = j.at("config");
        model.config.per_class_events = config.at("per_class_events").get<std::size_t>();
        model.config.seed = config.at("seed").get<std::uint64_t>();
        config.erase("per_class_events");
        config.erase("seed");
        update_from_json(model.config.growth, config);
        for (const auto& b : j.at("marker_percentiles")) {
            model.bands.push_back({b.get<std::array<double, 4>>()});
        }
        model.candidate_count = j.at("candidate_count").get<std::size_t>();
        model.dag = dag_from_json(j.at("dag"));
        for (const auto& jd : j.at("populations")) {
            model.populations.push_back(description_from_json(jd, model.classes));
        }
        for (const auto& jc : j.at("classifiers")) {
            model.classifiers.push_back(classifier_from_json(jc, model.classes));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::integrity, std::string("malformed bundle: ") + e.what());
    }
}

inline void save_model(const std::string& path, const Model& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::io, "cannot write bundle " + path);
    }
    out << to_json(model).dump(1) << '\n';
    if (!out) {
        fail(ErrorKind::io, "write failed for " + path);
    }
}

inline Model load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::io, "cannot open bundle " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::integrity, "bundle " + path + " is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

} // namespace alpods
