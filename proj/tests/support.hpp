#pragma once

#include <alpods/alpods.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace testing_support {

// Table from a per-event list of (case, class, values...).
struct Row
{
    std::string case_id;
    std::string cls;
    std::vector<double> values;
};

inline alpods::EventTable make_table(std::vector<std::string> markers, const std::vector<Row>& rows)
{
    std::vector<double> values;
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    for (const auto& r : rows) {
        values.insert(values.end(), r.values.begin(), r.values.end());
        ids.push_back(r.case_id);
        labels.push_back(r.cls);
    }
    return alpods::EventTable(std::move(markers), std::move(values), ids, labels);
}

// One event per case, two classes separated on marker x at 0: A below, B above.
inline alpods::EventTable two_blobs_1d(std::size_t per_class, std::uint64_t seed)
{
    alpods::Rng rng(seed);
    std::vector<Row> rows;
    for (std::size_t i = 0; i < per_class; ++i) {
        rows.push_back({"a" + std::to_string(i), "A", {rng.normal(-3.0, 0.5)}});
        rows.push_back({"b" + std::to_string(i), "B", {rng.normal(3.0, 0.5)}});
    }
    return make_table({"x"}, rows);
}

inline void expect_error_kind(const std::function<void()>& fn, alpods::ErrorKind kind,
                              const std::string& fragment = {})
{
    try {
        fn();
        ADD_FAILURE() << "expected an error";
    } catch (const alpods::Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
        if (!fragment.empty()) {
            EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
        }
    }
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() /
                ("alpods_" + name + "_" + std::to_string(::getpid())))
    {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace testing_support
