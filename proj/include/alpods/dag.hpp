#pragma once

#include "density.hpp"
#include "error.hpp"
#include "event_table.hpp"
#include "interval.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace alpods {

enum class SimpsonMode
{
    disagreement, // 2q(1-q): two draws land on different sides of the split
    agreement     // 1 - 2q(1-q)
};

struct GrowthParams
{
    double min_size_fraction = 0.01;
    std::size_t max_depth = 6;
    double si_threshold = 0.02;
    std::size_t max_nodes = 512;
    std::size_t max_children_per_variable = 2;
    double min_region_support = 0.05;
    std::size_t grid_points = 256;
    SimpsonMode simpson_mode = SimpsonMode::disagreement;

    void validate() const
    {
        require(min_size_fraction >= 0.0 && min_size_fraction < 1.0, "min_size_fraction must lie in [0, 1)");
        require(max_depth >= 1, "max_depth must be at least 1");
        require(si_threshold >= 0.0 && si_threshold <= 1.0, "si_threshold must lie in [0, 1]");
        require(max_nodes >= 1, "max_nodes must be at least 1");
        require(max_children_per_variable >= 1, "max_children_per_variable must be at least 1");
        require(min_region_support >= 0.0 && min_region_support <= 1.0,
                "min_region_support must lie in [0, 1]");
        require(grid_points >= 8, "grid_points must be at least 8");
    }
};

inline nlohmann::json to_json(const GrowthParams& p)
{
    return {{"min_size_fraction", p.min_size_fraction},
            {"max_depth", p.max_depth},
            {"si_threshold", p.si_threshold},
            {"max_nodes", p.max_nodes},
            {"max_children_per_variable", p.max_children_per_variable},
            {"min_region_support", p.min_region_support},
            {"grid_points", p.grid_points},
            {"simpson_mode", p.simpson_mode == SimpsonMode::disagreement ? "disagreement" : "agreement"}};
}

// Applies the keys present in `j` onto `p`; unknown keys are rejected.
inline void update_from_json(GrowthParams& p, const nlohmann::json& j)
{
    for (const auto& [key, value] : j.items()) {
        if (key == "min_size_fraction") {
            p.min_size_fraction = value.get<double>();
        } else if (key == "max_depth") {
            p.max_depth = value.get<std::size_t>();
        } else if (key == "si_threshold") {
            p.si_threshold = value.get<double>();
        } else if (key == "max_nodes") {
            p.max_nodes = value.get<std::size_t>();
        } else if (key == "max_children_per_variable") {
            p.max_children_per_variable = value.get<std::size_t>();
        } else if (key == "min_region_support") {
            p.min_region_support = value.get<double>();
        } else if (key == "grid_points") {
            p.grid_points = value.get<std::size_t>();
        } else if (key == "simpson_mode") {
            const auto mode = value.get<std::string>();
            require(mode == "disagreement" || mode == "agreement", "unknown simpson_mode '" + mode + "'");
            p.simpson_mode = mode == "disagreement" ? SimpsonMode::disagreement : SimpsonMode::agreement;
        } else {
            fail(ErrorKind::input, "unknown growth parameter '" + key + "'");
        }
    }
}

// With q = sub_size / parent_size: the probability that two independent
// draws from the parent disagree on membership in the subpopulation.
inline double simpson_index(std::size_t parent_size, std::size_t sub_size,
                            SimpsonMode mode = SimpsonMode::disagreement)
{
    require(parent_size >= 1, "simpson_index needs a non-empty parent");
    require(sub_size <= parent_size, "subpopulation larger than its parent");
    // 2q(1-q) as one rounded division of exact integers.
    const auto n = static_cast<std::uint64_t>(parent_size);
    const auto s = static_cast<std::uint64_t>(sub_size);
    const double si = static_cast<double>(2 * s * (n - s)) / (static_cast<double>(n) * static_cast<double>(n));
    return mode == SimpsonMode::disagreement ? si : 1.0 - si;
}

struct Condition
{
    std::size_t variable = 0;
    Interval interval;
    int asserted_class = -1;
    double simpson = 0.0;
};

struct DagEdge
{
    Condition condition;
    std::size_t child = 0;
};

struct DagNode
{
    std::size_t id = 0;
    std::vector<EventIndex> population; // rows of the training table, ascending
    std::size_t population_size = 0;
    std::vector<std::size_t> class_histogram;
    std::size_t depth = 0;
    std::vector<DagEdge> children;
    std::optional<int> leaf_label;
    int asserted_class = -1;      // class of the condition that created the node
    std::vector<Condition> path;  // conditions along the creating path
    IntervalMap signature;        // per-variable intersection of `path`
};

struct Dag
{
    std::vector<DagNode> nodes;
    std::size_t root = 0;
    std::map<std::string, std::size_t> registry; // signature key -> node id
    GrowthParams params;
    std::vector<std::string> markers;
    std::vector<std::string> classes;
    std::size_t total_events = 0;

    const DagNode& node(std::size_t id) const { return nodes.at(id); }
};

inline bool terminate(std::size_t depth, std::size_t pop_size, std::size_t total_size,
                      std::span<const std::size_t> class_histogram, const GrowthParams& params)
{
    const auto nonzero = std::count_if(class_histogram.begin(), class_histogram.end(),
                                       [](std::size_t c) { return c > 0; });
    return nonzero <= 1 || static_cast<double>(pop_size) < params.min_size_fraction * total_size ||
           depth >= params.max_depth;
}

// Majority vote; ties go to the lexicographically smallest label.
inline int classify_leaf(std::span<const std::size_t> class_histogram,
                         std::span<const std::string> class_names)
{
    require(!class_histogram.empty() && class_histogram.size() == class_names.size(),
            "classify_leaf needs one count per class");
    int best = 0;
    for (std::size_t k = 1; k < class_histogram.size(); ++k) {
        if (class_histogram[k] > class_histogram[best] ||
            (class_histogram[k] == class_histogram[best] && class_names[k] < class_names[best])) {
            best = static_cast<int>(k);
        }
    }
    return best;
}

// Candidate splits of `node` on one variable: the Bayes decision regions of
// the node's classes (priors = node class shares) that pass the Simpson
// index threshold, best first, at most max_children_per_variable of them.
inline std::vector<Condition> enumerate_conditions(const DagNode& node, std::size_t variable,
                                                   const EventTable& table, const GrowthParams& params)
{
    std::vector<int> present;
    for (std::size_t k = 0; k < node.class_histogram.size(); ++k) {
        if (node.class_histogram[k] > 0) {
            present.push_back(static_cast<int>(k));
        }
    }
    if (present.size() < 2 || node.population.empty()) {
        return {};
    }
    std::vector<int> slot(node.class_histogram.size(), -1);
    for (std::size_t s = 0; s < present.size(); ++s) {
        slot[present[s]] = static_cast<int>(s);
    }
    std::vector<std::vector<double>> values(present.size());
    std::vector<double> priors(present.size());
    for (std::size_t s = 0; s < present.size(); ++s) {
        values[s].reserve(node.class_histogram[present[s]]);
        priors[s] = static_cast<double>(node.class_histogram[present[s]]) / node.population.size();
    }
    for (const auto e : node.population) {
        values[slot[table.event_class(e)]].push_back(table.value(e, variable));
    }
    double prior_sum = 0.0;
    for (const double p : priors) {
        prior_sum += p;
    }
    for (auto& p : priors) {
        p /= prior_sum;
    }

    const auto curves = posterior_curves(values, priors, params.grid_points);
    const auto regions = bayes_regions(curves, params.min_region_support);
    std::vector<Condition> out;
    for (const auto& region : regions) {
        Condition c;
        c.variable = variable;
        c.interval = {region.lower, region.upper};
        c.asserted_class = present[region.winner];
        std::size_t inside = 0;
        for (const auto e : node.population) {
            inside += c.interval.contains(table.value(e, variable)) ? 1 : 0;
        }
        if (inside == 0 || inside == node.population.size()) {
            continue;
        }
        c.simpson = simpson_index(node.population.size(), inside, params.simpson_mode);
        if (c.simpson >= params.si_threshold) {
            out.push_back(c);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Condition& a, const Condition& b) {
        if (a.simpson != b.simpson) {
            return a.simpson > b.simpson;
        }
        return a.interval.lower < b.interval.lower;
    });
    if (out.size() > params.max_children_per_variable) {
        out.resize(params.max_children_per_variable);
    }
    return out;
}

namespace detail {

inline std::uint64_t population_hash(std::span<const EventIndex> population)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto e : population) {
        h ^= e;
        h *= 1099511628211ULL;
    }
    return h ^ population.size();
}

class DagGrower
{
public:
    DagGrower(const EventTable& table, const GrowthParams& params, std::size_t threads)
        : table_(table), params_(params), threads_(threads)
    {
    }

    Dag grow()
    {
        dag_.params = params_;
        dag_.markers = table_.markers();
        dag_.classes = table_.classes();
        dag_.total_events = table_.n_events();
        DagNode root;
        root.population.resize(table_.n_events());
        for (std::size_t i = 0; i < root.population.size(); ++i) {
            root.population[i] = static_cast<EventIndex>(i);
        }
        add_node(std::move(root));
        expand(0);
        for (auto& node : dag_.nodes) {
            node.population_size = node.population.size();
        }
        return std::move(dag_);
    }

private:
    std::size_t add_node(DagNode node)
    {
        node.id = dag_.nodes.size();
        node.class_histogram.assign(table_.n_classes(), 0);
        for (const auto e : node.population) {
            ++node.class_histogram[table_.event_class(e)];
        }
        dag_.registry.emplace(signature_key(node.signature), node.id);
        by_population_.emplace(population_hash(node.population), node.id);
        dag_.nodes.push_back(std::move(node));
        return dag_.nodes.back().id;
    }

    std::optional<std::size_t> find_existing(const IntervalMap& signature,
                                             const std::vector<EventIndex>& population) const
    {
        if (const auto it = dag_.registry.find(signature_key(signature)); it != dag_.registry.end()) {
            return it->second;
        }
        const auto [first, last] = by_population_.equal_range(population_hash(population));
        for (auto it = first; it != last; ++it) {
            if (dag_.nodes[it->second].population == population) {
                return it->second;
            }
        }
        return std::nullopt;
    }

    void label_leaf(std::size_t id)
    {
        auto& node = dag_.nodes[id];
        node.leaf_label = classify_leaf(node.class_histogram, dag_.classes);
    }

    void expand(std::size_t id)
    {
        {
            const auto& node = dag_.nodes[id];
            if (terminate(node.depth, node.population.size(), table_.n_events(), node.class_histogram,
                          params_)) {
                label_leaf(id);
                return;
            }
        }
        std::vector<std::vector<Condition>> per_variable(table_.n_markers());
        parallel_for(table_.n_markers(), threads_, [&](std::size_t v) {
            per_variable[v] = enumerate_conditions(dag_.nodes[id], v, table_, params_);
        });
        std::vector<Condition> conditions;
        for (auto& list : per_variable) {
            conditions.insert(conditions.end(), list.begin(), list.end());
        }
        std::stable_sort(conditions.begin(), conditions.end(), [](const Condition& a, const Condition& b) {
            if (a.variable != b.variable) {
                return a.variable < b.variable;
            }
            return a.interval.lower < b.interval.lower;
        });

        std::vector<std::size_t> created;
        for (const auto& condition : conditions) {
            const auto& parent = dag_.nodes[id];
            std::vector<EventIndex> population;
            for (const auto e : parent.population) {
                if (condition.interval.contains(table_.value(e, condition.variable))) {
                    population.push_back(e);
                }
            }
            IntervalMap signature = parent.signature;
            const auto [slot, inserted] = signature.emplace(condition.variable, condition.interval);
            if (!inserted) {
                slot->second = slot->second.intersect(condition.interval);
            }

            if (const auto existing = find_existing(signature, population)) {
                // Only edges that point deeper keep the graph layered.
                if (dag_.nodes[*existing].depth > parent.depth) {
                    dag_.nodes[id].children.push_back({condition, *existing});
                }
                continue;
            }
            if (dag_.nodes.size() >= params_.max_nodes) {
                continue;
            }
            DagNode child;
            child.population = std::move(population);
            child.depth = parent.depth + 1;
            child.asserted_class = condition.asserted_class;
            child.path = parent.path;
            child.path.push_back(condition);
            child.signature = std::move(signature);
            const auto child_id = add_node(std::move(child));
            dag_.nodes[id].children.push_back({condition, child_id});
            created.push_back(child_id);
        }
        if (dag_.nodes[id].children.empty()) {
            label_leaf(id);
        }
        // All siblings exist before any of them is expanded, so the node
        // budget cannot be used up by the first subtree alone.
        for (const auto child_id : created) {
            expand(child_id);
        }
    }

    const EventTable& table_;
    GrowthParams params_;
    std::size_t threads_;
    Dag dag_;
    std::unordered_multimap<std::uint64_t, std::size_t> by_population_;
};

} // namespace detail

// Depth-first growth from the full table. A node's children are all
// created, in ascending (variable, lower bound) order, before the first of
// them is expanded; a candidate whose interval
// signature or event set matches an existing node is linked instead of
// recreated. The result does not depend on `threads`.
inline Dag grow_dag(const EventTable& train, const GrowthParams& params = {}, std::size_t threads = 1)
{
    params.validate();
    require(!train.empty(), "grow_dag needs a non-empty training table");
    return detail::DagGrower(train, params, threads).grow();
}

namespace detail {

inline nlohmann::json condition_to_json(const Condition& c, const Dag& dag)
{
    auto j = to_json(c.interval);
    j["variable"] = c.variable;
    j["marker"] = dag.markers.at(c.variable);
    j["class"] = dag.classes.at(c.asserted_class);
    j["simpson"] = c.simpson;
    return j;
}

inline Condition condition_from_json(const nlohmann::json& j, const std::vector<std::string>& classes)
{
    Condition c;
    c.interval = interval_from_json(j);
    c.variable = j.at("variable").get<std::size_t>();
    const auto name = j.at("class").get<std::string>();
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) {
        fail(ErrorKind::integrity, "condition refers to unknown class '" + name + "'");
    }
    c.asserted_class = static_cast<int>(it - classes.begin());
    c.simpson = j.at("simpson").get<double>();
    return c;
}

} // namespace detail

// Event lists are not serialized; population sizes and histograms are.
inline nlohmann::json to_json(const Dag& dag)
{
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : dag.nodes) {
        nlohmann::json path = nlohmann::json::array();
        for (const auto& c : node.path) {
            path.push_back(detail::condition_to_json(c, dag));
        }
        nlohmann::json children = nlohmann::json::array();
        for (const auto& edge : node.children) {
            children.push_back({{"child", edge.child}, {"condition", detail::condition_to_json(edge.condition, dag)}});
        }
        nodes.push_back({{"id", node.id},
                         {"depth", node.depth},
                         {"size", node.population_size},
                         {"histogram", node.class_histogram},
                         {"asserted_class", node.asserted_class >= 0
                                                ? nlohmann::json(dag.classes[node.asserted_class])
                                                : nlohmann::json(nullptr)},
                         {"leaf_label", node.leaf_label ? nlohmann::json(dag.classes[*node.leaf_label])
                                                        : nlohmann::json(nullptr)},
                         {"path", path},
                         {"children", children}});
    }
    return {{"markers", dag.markers}, {"classes", dag.classes}, {"root", dag.root},
            {"total_events", dag.total_events}, {"params", to_json(dag.params)}, {"nodes", nodes}};
}

inline Dag dag_from_json(const nlohmann::json& j)
{
    Dag dag;
    dag.markers = j.at("markers").get<std::vector<std::string>>();
    dag.classes = j.at("classes").get<std::vector<std::string>>();
    dag.root = j.at("root").get<std::size_t>();
    dag.total_events = j.at("total_events").get<std::size_t>();
    update_from_json(dag.params, j.at("params"));
    auto class_of = [&](const nlohmann::json& v) {
        if (v.is_null()) {
            return -1;
        }
        const auto it = std::find(dag.classes.begin(), dag.classes.end(), v.get<std::string>());
        if (it == dag.classes.end()) {
            fail(ErrorKind::integrity, "DAG node refers to an unknown class");
        }
        return static_cast<int>(it - dag.classes.begin());
    };
    for (const auto& jn : j.at("nodes")) {
        DagNode node;
        node.id = jn.at("id").get<std::size_t>();
        if (node.id != dag.nodes.size()) {
            fail(ErrorKind::integrity, "DAG node ids must be consecutive");
        }
        node.depth = jn.at("depth").get<std::size_t>();
        node.population_size = jn.at("size").get<std::size_t>();
        node.class_histogram = jn.at("histogram").get<std::vector<std::size_t>>();
        node.asserted_class = class_of(jn.at("asserted_class"));
        if (const int leaf = class_of(jn.at("leaf_label")); leaf >= 0) {
            node.leaf_label = leaf;
        }
        for (const auto& jc : jn.at("path")) {
            node.path.push_back(detail::condition_from_json(jc, dag.classes));
            const auto& c = node.path.back();
            const auto [slot, inserted] = node.signature.emplace(c.variable, c.interval);
            if (!inserted) {
                slot->second = slot->second.intersect(c.interval);
            }
        }
        for (const auto& je : jn.at("children")) {
            node.children.push_back(
                {detail::condition_from_json(je.at("condition"), dag.classes), je.at("child").get<std::size_t>()});
        }
        dag.registry.emplace(signature_key(node.signature), node.id);
        dag.nodes.push_back(std::move(node));
    }
    for (const auto& node : dag.nodes) {
        for (const auto& edge : node.children) {
            if (edge.child >= dag.nodes.size()) {
                fail(ErrorKind::integrity, "DAG edge points to a missing node");
            }
        }
    }
    return dag;
}

} // namespace alpods
