#pragma once

#include "error.hpp"
#include "event_table.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace alpods {

// Column roles of an event CSV. An empty marker list means "every column
// that is neither the case nor the class column".
struct CsvSchema
{
    std::string case_column = "case_id";
    std::string class_column = "class";
    std::vector<std::string> markers;

    static CsvSchema from_json(const nlohmann::json& j)
    {
        CsvSchema schema;
        if (!j.is_object()) {
            fail(ErrorKind::schema, "schema file must hold a JSON object");
        }
        for (const auto& [key, value] : j.items()) {
            if (key == "case_column") {
                schema.case_column = value.get<std::string>();
            } else if (key == "class_column") {
                schema.class_column = value.get<std::string>();
            } else if (key == "markers") {
                schema.markers = value.get<std::vector<std::string>>();
            } else {
                fail(ErrorKind::schema, "unknown schema key '" + key + "'");
            }
        }
        return schema;
    }

    static CsvSchema load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) {
            fail(ErrorKind::io, "cannot open schema file " + path);
        }
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::schema, "bad schema file " + path + ": " + e.what());
        }
    }
};

namespace detail {

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::io, "cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

inline void split_fields(std::string_view line, std::vector<std::string_view>& out)
{
    out.clear();
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
            field.remove_suffix(1);
        }
        out.push_back(field);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
}

inline std::string format_double(double v)
{
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, result.ptr);
}

} // namespace detail

// Parses an event table from CSV text. Rows keep file order.
inline EventTable parse_csv(std::string_view text, const CsvSchema& schema = {})
{
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        pos = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        fail(ErrorKind::schema, "CSV has no header row");
    }

    std::vector<std::string_view> fields;
    detail::split_fields(lines[0], fields);
    const std::vector<std::string> header(fields.begin(), fields.end());
    auto find_column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            fail(ErrorKind::schema, "missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t case_col = find_column(schema.case_column);
    const std::size_t class_col = find_column(schema.class_column);
    std::vector<std::string> markers = schema.markers;
    if (markers.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j != case_col && j != class_col) {
                markers.push_back(header[j]);
            }
        }
    }
    if (markers.empty()) {
        fail(ErrorKind::schema, "CSV has no marker columns");
    }
    std::vector<std::size_t> marker_cols;
    marker_cols.reserve(markers.size());
    for (const auto& m : markers) {
        marker_cols.push_back(find_column(m));
    }

    const std::size_t n = lines.size() - 1;
    std::vector<double> values;
    values.reserve(n * markers.size());
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    ids.reserve(n);
    labels.reserve(n);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        detail::split_fields(lines[r], fields);
        const std::string where = " at line " + std::to_string(r + 1);
        if (fields.size() != header.size()) {
            fail(ErrorKind::parse, "expected " + std::to_string(header.size()) + " fields, found " +
                                       std::to_string(fields.size()) + where);
        }
        for (std::size_t j = 0; j < marker_cols.size(); ++j) {
            const auto cell = fields[marker_cols[j]];
            double v = 0.0;
            const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || result.ec != std::errc{} || result.ptr != cell.data() + cell.size() ||
                !std::isfinite(v)) {
                fail(ErrorKind::parse, "non-numeric value '" + std::string(cell) + "' in column '" +
                                           markers[j] + "'" + where);
            }
            values.push_back(v);
        }
        ids.emplace_back(fields[case_col]);
        labels.emplace_back(fields[class_col]);
    }
    if (n == 0) {
        fail(ErrorKind::input, "CSV has no data rows");
    }
    return EventTable(std::move(markers), std::move(values), ids, labels);
}

inline EventTable load_csv(const std::string& path, const CsvSchema& schema = {})
{
    return parse_csv(detail::read_file(path), schema);
}

// Shortest round-trip representation for every value.
inline void write_csv(std::ostream& out, const EventTable& table)
{
    out << "case_id,class";
    for (const auto& m : table.markers()) {
        out << ',' << m;
    }
    out << '\n';
    std::string line;
    for (std::size_t i = 0; i < table.n_events(); ++i) {
        const auto& c = table.cases()[table.event_case(i)];
        line = c.case_id;
        line += ',';
        line += table.classes()[c.class_label];
        for (const double v : table.row(i)) {
            line += ',';
            line += detail::format_double(v);
        }
        line += '\n';
        out << line;
    }
}

inline void write_csv(const std::string& path, const EventTable& table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::io, "cannot write " + path);
    }
    write_csv(out, table);
    if (!out) {
        fail(ErrorKind::io, "write failed for " + path);
    }
}

} // namespace alpods
