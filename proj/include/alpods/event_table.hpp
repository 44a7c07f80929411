#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace alpods {

using EventIndex = std::uint32_t;

// Row indices of one case inside an EventTable.
struct CaseIndex
{
    std::string case_id;
    int class_label = 0;
    std::vector<EventIndex> rows;
};

// Dense n x d matrix of events. Every event belongs to a case, every case to
// exactly one class. Class labels are kept in lexicographic order so class
// indices are stable across subsets of the same table. Immutable once built.
class EventTable
{
public:
    EventTable() = default;

    // `values` is row-major with markers.size() columns. Throws on
    // non-finite values, duplicate markers or a case with two classes.
    EventTable(std::vector<std::string> markers,
               std::vector<double> values,
               const std::vector<std::string>& event_case_ids,
               const std::vector<std::string>& event_classes,
               std::vector<std::string> class_universe = {})
        : markers_(std::move(markers)), values_(std::move(values))
    {
        require(!markers_.empty(), "event table needs at least one marker");
        std::unordered_set<std::string> seen;
        for (const auto& m : markers_) {
            if (!seen.insert(m).second) {
                fail(ErrorKind::schema, "duplicate marker name '" + m + "'");
            }
        }
        const std::size_t n = event_case_ids.size();
        require(values_.size() == n * markers_.size(), "value matrix does not match event count");
        require(event_classes.size() == n, "class column does not match event count");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                fail(ErrorKind::integrity,
                     "non-finite value at event " + std::to_string(i / markers_.size()));
            }
        }

        classes_ = std::move(class_universe);
        for (const auto& c : event_classes) {
            classes_.push_back(c);
        }
        std::sort(classes_.begin(), classes_.end());
        classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());

        std::unordered_map<std::string, std::uint32_t> case_lookup;
        event_case_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto [it, inserted] =
                case_lookup.emplace(event_case_ids[i], static_cast<std::uint32_t>(cases_.size()));
            if (inserted) {
                cases_.push_back({event_case_ids[i], class_index(event_classes[i]), {}});
            } else if (classes_[cases_[it->second].class_label] != event_classes[i]) {
                fail(ErrorKind::integrity, "case '" + event_case_ids[i] + "' is labeled both '" +
                                               classes_[cases_[it->second].class_label] + "' and '" +
                                               event_classes[i] + "'");
            }
            event_case_[i] = it->second;
            cases_[it->second].rows.push_back(static_cast<EventIndex>(i));
        }
    }

    std::size_t n_events() const { return event_case_.size(); }
    std::size_t n_markers() const { return markers_.size(); }
    std::size_t n_cases() const { return cases_.size(); }
    std::size_t n_classes() const { return classes_.size(); }
    bool empty() const { return event_case_.empty(); }

    const std::vector<std::string>& markers() const { return markers_; }
    const std::vector<std::string>& classes() const { return classes_; }
    const std::vector<CaseIndex>& cases() const { return cases_; }
    std::span<const double> values() const { return values_; }

    double value(std::size_t event, std::size_t marker) const
    {
        return values_[event * markers_.size() + marker];
    }

    std::span<const double> row(std::size_t event) const
    {
        return {values_.data() + event * markers_.size(), markers_.size()};
    }

    std::vector<double> column(std::size_t marker) const
    {
        std::vector<double> out(n_events());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = value(i, marker);
        }
        return out;
    }

    std::uint32_t event_case(std::size_t event) const { return event_case_[event]; }
    int event_class(std::size_t event) const { return cases_[event_case_[event]].class_label; }

    int class_index(const std::string& name) const
    {
        const auto it = std::lower_bound(classes_.begin(), classes_.end(), name);
        if (it == classes_.end() || *it != name) {
            fail(ErrorKind::input, "unknown class '" + name + "'");
        }
        return static_cast<int>(it - classes_.begin());
    }

    std::size_t marker_index(const std::string& name) const
    {
        const auto it = std::find(markers_.begin(), markers_.end(), name);
        if (it == markers_.end()) {
            fail(ErrorKind::schema, "unknown marker '" + name + "'");
        }
        return static_cast<std::size_t>(it - markers_.begin());
    }

    std::vector<std::size_t> class_event_counts() const
    {
        std::vector<std::size_t> counts(classes_.size(), 0);
        for (std::size_t i = 0; i < n_events(); ++i) {
            ++counts[event_class(i)];
        }
        return counts;
    }

    std::vector<std::size_t> class_case_counts() const
    {
        std::vector<std::size_t> counts(classes_.size(), 0);
        for (const auto& c : cases_) {
            ++counts[c.class_label];
        }
        return counts;
    }

    // Classes with at least one event.
    std::vector<int> present_classes() const
    {
        std::vector<int> out;
        const auto counts = class_case_counts();
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] > 0) {
                out.push_back(static_cast<int>(k));
            }
        }
        return out;
    }

    // Table holding the given events in the given order. Case ids, class
    // labels and the class universe are preserved.
    EventTable select_events(std::span<const EventIndex> rows) const
    {
        std::vector<double> values;
        values.reserve(rows.size() * n_markers());
        std::vector<std::string> ids;
        std::vector<std::string> labels;
        ids.reserve(rows.size());
        labels.reserve(rows.size());
        for (const auto r : rows) {
            const auto src = row(r);
            values.insert(values.end(), src.begin(), src.end());
            const auto& c = cases_[event_case_[r]];
            ids.push_back(c.case_id);
            labels.push_back(classes_[c.class_label]);
        }
        return EventTable(markers_, std::move(values), ids, labels, classes_);
    }

    // Table holding all events of the given cases, in original row order.
    EventTable select_cases(std::span<const std::uint32_t> case_indices) const
    {
        std::vector<char> keep(cases_.size(), 0);
        for (const auto c : case_indices) {
            keep[c] = 1;
        }
        std::vector<EventIndex> rows;
        for (std::size_t i = 0; i < n_events(); ++i) {
            if (keep[event_case_[i]]) {
                rows.push_back(static_cast<EventIndex>(i));
            }
        }
        return select_events(rows);
    }

    // Same marker layout with columns reordered to `names` (which must all
    // exist). Used to align new data with a trained model.
    EventTable with_markers(const std::vector<std::string>& names) const
    {
        std::vector<std::size_t> src(names.size());
        std::vector<std::string> missing;
        for (std::size_t j = 0; j < names.size(); ++j) {
            const auto it = std::find(markers_.begin(), markers_.end(), names[j]);
            if (it == markers_.end()) {
                missing.push_back(names[j]);
            } else {
                src[j] = static_cast<std::size_t>(it - markers_.begin());
            }
        }
        if (!missing.empty()) {
            std::string list;
            for (const auto& m : missing) {
                list += (list.empty() ? "" : ", ") + m;
            }
            fail(ErrorKind::schema, "data lacks markers required by the model: " + list);
        }
        std::vector<double> values(n_events() * names.size());
        for (std::size_t i = 0; i < n_events(); ++i) {
            for (std::size_t j = 0; j < names.size(); ++j) {
                values[i * names.size() + j] = value(i, src[j]);
            }
        }
        std::vector<std::string> ids(n_events());
        std::vector<std::string> labels(n_events());
        for (std::size_t i = 0; i < n_events(); ++i) {
            ids[i] = cases_[event_case_[i]].case_id;
            labels[i] = classes_[event_class(i)];
        }
        return EventTable(names, std::move(values), ids, labels, classes_);
    }

    bool operator==(const EventTable& other) const
    {
        if (markers_ != other.markers_ || values_ != other.values_ ||
            event_case_.size() != other.event_case_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < n_events(); ++i) {
            if (cases_[event_case_[i]].case_id != other.cases_[other.event_case_[i]].case_id ||
                classes_[event_class(i)] != other.classes_[other.event_class(i)]) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<std::string> markers_;
    std::vector<double> values_;
    std::vector<std::uint32_t> event_case_;
    std::vector<CaseIndex> cases_;
    std::vector<std::string> classes_;
};

} // namespace alpods
