#include "support.hpp"

using namespace alpods;
using testing_support::expect_error_kind;
using testing_support::make_table;
using testing_support::Row;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

// Inside events lie on the diagonal of markers 0 and 1; outside events are
// uniform. Every marginal is uniform on [0, 1] on both sides, so only the
// pair (0, 1) tells the sides apart.
struct DiagonalFixture
{
    EventTable table;
    std::vector<bool> mask;
};

DiagonalFixture diagonal(std::size_t per_side, std::size_t markers, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t m = 0; m < markers; ++m) {
        names.push_back("M" + std::to_string(m));
    }
    std::vector<Row> rows;
    DiagonalFixture out;
    for (std::size_t side = 0; side < 2; ++side) {
        for (std::size_t i = 0; i < per_side; ++i) {
            std::vector<double> v(markers);
            for (auto& x : v) {
                x = rng.uniform();
            }
            if (side == 0) {
                v[1] = v[0];
            }
            rows.push_back({(side == 0 ? "a" : "b") + std::to_string(i % 10), side == 0 ? "A" : "B", v});
            out.mask.push_back(side == 0);
        }
    }
    out.table = make_table(names, rows);
    return out;
}

std::size_t circles_in_group(const std::string& svg, const std::string& color)
{
    const std::string open = "<g fill=\"" + color + "\">";
    std::size_t count = 0;
    for (auto at = svg.find(open); at != std::string::npos; at = svg.find(open, at + 1)) {
        const auto end = svg.find("</g>", at);
        for (auto c = svg.find("<circle", at); c != std::string::npos && c < end; c = svg.find("<circle", c + 1)) {
            ++count;
        }
    }
    return count;
}

} // namespace

TEST(ProbDiff, SameDistributionScoresLow)
{
    Rng rng(1);
    std::vector<Row> rows;
    std::vector<bool> mask;
    for (std::size_t i = 0; i < 20000; ++i) {
        rows.push_back({"c", "A", {rng.normal(0, 1), rng.normal(0, 1)}});
        mask.push_back(i % 2 == 0);
    }
    const auto t = make_table({"x", "y"}, rows);
    EXPECT_LE(probdiff(t, mask, 0, 1).score, 0.15);
}

TEST(ProbDiff, DisjointSidesScoreTwo)
{
    std::vector<Row> rows;
    std::vector<bool> mask;
    for (int i = 0; i < 500; ++i) {
        rows.push_back({"c", "A", {0.01 * i, 0.01 * i}});
        mask.push_back(true);
        rows.push_back({"c", "A", {100 + 0.01 * i, 100 + 0.01 * i}});
        mask.push_back(false);
    }
    const auto t = make_table({"x", "y"}, rows);
    EXPECT_NEAR(probdiff(t, mask, 0, 1).score, 2.0, 1e-9);
}

TEST(ProbDiff, SymmetricAndBounded)
{
    const auto f = diagonal(3000, 3, 2);
    auto complement = f.mask;
    complement.flip();
    for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t y = 0; y < 3; ++y) {
            if (x == y) {
                continue;
            }
            const double s = probdiff(f.table, f.mask, x, y).score;
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 2.0 + 1e-12);
            EXPECT_NEAR(s, probdiff(f.table, f.mask, y, x).score, 1e-9);
            EXPECT_NEAR(s, probdiff(f.table, complement, x, y).score, 1e-9);
        }
    }
    const auto pd = probdiff(f.table, f.mask, 0, 1);
    EXPECT_NEAR(std::accumulate(pd.inside.weights.begin(), pd.inside.weights.end(), 0.0), 1.0, 1e-9);
    EXPECT_NEAR(std::accumulate(pd.outside.weights.begin(), pd.outside.weights.end(), 0.0), 1.0, 1e-9);
}

TEST(ProbDiff, EmptySideIsAnError)
{
    const auto t = make_table({"x", "y"}, {{"c", "A", {1, 2}}, {"c", "A", {3, 4}}});
    expect_error_kind([&] { probdiff(t, {true, true}, 0, 1); }, ErrorKind::input, "complement side is empty");
    expect_error_kind([&] { probdiff(t, {false, false}, 0, 1); }, ErrorKind::input, "selected side is empty");
    expect_error_kind([&] { probdiff(t, {true}, 0, 1); }, ErrorKind::input);
}

TEST(SelectPanel, TwoMarkersGiveOnePair)
{
    const auto f = diagonal(500, 2, 3);
    const auto scores = all_pair_scores(f.table, f.mask);
    ASSERT_EQ(scores.size(), 1u);
    const auto spec = select_panel(scores, 4);
    ASSERT_EQ(spec.pairs.size(), 1u);
    EXPECT_EQ(spec.pairs[0].pair, (VariablePair{0, 1}));
    EXPECT_EQ(spec.population, 4u);
}

TEST(SelectPanel, DominantPairIsSelectedAlone)
{
    const auto f = diagonal(10000, 4, 4);
    const auto scores = all_pair_scores(f.table, f.mask, 16, 2);
    ASSERT_EQ(scores.size(), 6u);
    EXPECT_EQ(scores[0].pair, (VariablePair{0, 1}));
    for (std::size_t k = 1; k < scores.size(); ++k) {
        EXPECT_GT(scores[0].score, 10.0 * scores[k].score) << scores[k].pair.first << "," << scores[k].pair.second;
    }
    const auto spec = select_panel(scores);
    ASSERT_EQ(spec.pairs.size(), 1u);
    EXPECT_EQ(spec.pairs[0].pair, (VariablePair{0, 1}));
}

TEST(SelectPanel, CapAndZeroScores)
{
    std::vector<PairScore> scores;
    for (std::size_t k = 0; k < 10; ++k) {
        scores.push_back({{0, k + 1}, 1.0});
    }
    EXPECT_LE(select_panel(scores, 0, 3).pairs.size(), 3u);
    for (auto& s : scores) {
        s.score = 0.0;
    }
    const auto spec = select_panel(scores);
    ASSERT_EQ(spec.pairs.size(), 1u);
    EXPECT_EQ(spec.pairs[0].pair, (VariablePair{0, 1}));
    expect_error_kind([] { select_panel({}); }, ErrorKind::input);
}

TEST(RenderPanel, ColorsFollowTheMask)
{
    TempDir dir("panel_colors");
    const auto f = diagonal(200, 3, 5);
    PanelSpec spec;
    spec.pairs = {{{0, 1}, 1.0}};

    const auto none = render_panel(f.table, std::vector<bool>(f.table.n_events(), false), "A", spec,
                                   dir.file("none"));
    const auto none_svg = slurp(none.plots.at(0));
    EXPECT_EQ(circles_in_group(none_svg, "#D62728"), 0u);
    EXPECT_EQ(circles_in_group(none_svg, "#B0B0B0"), f.table.n_events());

    const auto all = render_panel(f.table, std::vector<bool>(f.table.n_events(), true), "A", spec,
                                  dir.file("all"));
    const auto all_svg = slurp(all.plots.at(0));
    EXPECT_EQ(circles_in_group(all_svg, "#D62728"), f.table.n_events());
    EXPECT_EQ(circles_in_group(all_svg, "#B0B0B0"), 0u);

    const auto half = render_panel(f.table, f.mask, "A", spec, dir.file("half"));
    const auto half_svg = slurp(half.plots.at(0));
    EXPECT_EQ(circles_in_group(half_svg, "#D62728"), 200u);
    // red is drawn after gray
    EXPECT_LT(half_svg.find("#B0B0B0\">"), half_svg.find("#D62728\">"));
}

TEST(RenderPanel, FilesAndManifest)
{
    TempDir dir("panel_files");
    const auto f = diagonal(300, 4, 6);
    auto scores = all_pair_scores(f.table, f.mask, 16);
    std::sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) { return a.score > b.score; });
    PanelSpec spec;
    spec.population = 2;
    spec.pairs = {scores[0], scores[1]};
    const auto files = render_panel(f.table, f.mask, "A & B", spec, dir.path().string(), 3);
    ASSERT_EQ(files.plots.size(), 2u);
    EXPECT_EQ(std::filesystem::path(files.plots[0]).filename(), "panel_1_M0_M1.svg");
    EXPECT_TRUE(std::filesystem::exists(files.combined));
    const auto manifest = nlohmann::json::parse(slurp(files.manifest));
    EXPECT_EQ(manifest.at("population"), 2);
    EXPECT_EQ(manifest.at("class"), "A & B");
    EXPECT_EQ(manifest.at("population_events"), 300);
    EXPECT_EQ(manifest.at("pairs").size(), 2u);
    EXPECT_EQ(manifest.at("pairs")[0].at("file"), "panel_1_M0_M1.svg");
    EXPECT_NE(slurp(files.plots[0]).find("A &amp; B"), std::string::npos);
    EXPECT_EQ(slurp(files.combined).find("A & B"), std::string::npos);
}

TEST(RenderPanel, BytewiseDeterministic)
{
    TempDir dir("panel_det");
    const auto f = diagonal(15000, 3, 7); // 30,000 events: both layers are subsampled
    PanelSpec spec;
    spec.pairs = {{{0, 1}, 1.5}, {{1, 2}, 0.1}};
    const auto a = render_panel(f.table, f.mask, "A", spec, dir.file("a"), 8);
    const auto b = render_panel(f.table, f.mask, "A", spec, dir.file("b"), 8);
    for (std::size_t k = 0; k < a.plots.size(); ++k) {
        EXPECT_EQ(slurp(a.plots[k]), slurp(b.plots[k]));
    }
    EXPECT_EQ(slurp(a.combined), slurp(b.combined));
    EXPECT_EQ(slurp(a.manifest), slurp(b.manifest));
    EXPECT_EQ(circles_in_group(slurp(a.plots[0]), "#B0B0B0"), 15000u);
}

TEST(RenderPanel, UnwritableDirectoryIsIoError)
{
    TempDir dir("panel_io");
    testing_support::spit(dir.file("blocker"), "x");
    const auto f = diagonal(50, 2, 8);
    PanelSpec spec;
    spec.pairs = {{{0, 1}, 1.0}};
    expect_error_kind([&] { render_panel(f.table, f.mask, "A", spec, dir.file("blocker") + "/sub"); },
                      ErrorKind::io);
}
