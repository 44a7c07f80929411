#include "support.hpp"

#include <numbers>

using namespace alpods;
using testing_support::expect_error_kind;

namespace {

std::vector<double> normal_draws(std::size_t n, double mean, double sd, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) {
        v = rng.normal(mean, sd);
    }
    return out;
}

double gaussian(double x, double mean, double sd)
{
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// First grid point where class 0 stops winning.
double crossover(const PosteriorCurves& c)
{
    for (std::size_t i = 1; i < c.grid.size(); ++i) {
        if (c.posteriors[0][i] < c.posteriors[1][i] && c.posteriors[0][i - 1] >= c.posteriors[1][i - 1]) {
            return c.grid[i];
        }
    }
    return std::nan("");
}

} // namespace

TEST(EstimatePdf, StandardNormalPeak)
{
    const auto d = estimate_pdf_1d(normal_draws(10000, 0.0, 1.0, 1));
    EXPECT_NEAR(d.at(0.0), 0.3989, 0.15 * 0.3989);
    EXPECT_NEAR(d.integral(), 1.0, 1e-6);
}

TEST(EstimatePdf, ConstantInputIsNarrowUniformSpike)
{
    const std::vector<double> v{5, 5, 5};
    const auto d = estimate_pdf_1d(v);
    const double eps = 1e-6 * 5.0;
    EXPECT_NEAR(d.grid.front(), 5.0 - eps / 2, 1e-12);
    EXPECT_NEAR(d.grid.back(), 5.0 + eps / 2, 1e-12);
    for (const double y : d.values) {
        EXPECT_DOUBLE_EQ(y, 1.0 / eps);
    }
    EXPECT_NEAR(d.integral(), 1.0, 1e-6);
}

TEST(EstimatePdf, UnitIntegralAndGridShape)
{
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(2 + rng.below(500));
        for (auto& x : v) {
            x = rng.normal(rng.normal(0, 10), 0.1 + rng.uniform() * 5);
        }
        const auto d = estimate_pdf_1d(v);
        ASSERT_EQ(d.grid.size(), 256u);
        EXPECT_NEAR(d.integral(), 1.0, 1e-6);
        for (std::size_t i = 1; i < d.grid.size(); ++i) {
            EXPECT_LT(d.grid[i - 1], d.grid[i]);
        }
        for (const double y : d.values) {
            EXPECT_GE(y, 0.0);
        }
    }
}

TEST(EstimatePdf, TranslationEquivariance)
{
    auto v = normal_draws(500, 1.0, 2.0, 3);
    const auto a = estimate_pdf_1d(v);
    for (auto& x : v) {
        x += 0.5;
    }
    const auto b = estimate_pdf_1d(v);
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
        EXPECT_NEAR(b.grid[i], a.grid[i] + 0.5, 1e-9);
        EXPECT_NEAR(b.values[i], a.values[i], 1e-9);
    }
}

TEST(EstimatePdf, EmptyInputIsInputError)
{
    expect_error_kind([] { estimate_pdf_1d(std::vector<double>{}); }, ErrorKind::input);
}

TEST(PosteriorCurves, IdenticalClassesGiveHalfEverywhere)
{
    const auto v = normal_draws(300, 0.0, 1.0, 4);
    const std::vector<double> priors{0.5, 0.5};
    const auto c = posterior_curves({v, v}, priors);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        EXPECT_NEAR(c.posteriors[0][i], 0.5, 1e-12);
    }
    EXPECT_TRUE(bayes_regions(c, 0.0).empty());
}

TEST(PosteriorCurves, EqualPriorCrossoverAtMidpoint)
{
    const std::vector<double> priors{0.5, 0.5};
    const auto c = posterior_curves({normal_draws(100000, 0, 1, 5), normal_draws(100000, 2, 1, 6)}, priors);
    const double step = c.grid[1] - c.grid[0];
    EXPECT_NEAR(crossover(c), 1.0, step);
    const auto regions = bayes_regions(c, 0.05);
    ASSERT_EQ(regions.size(), 2u);
    EXPECT_NEAR(regions[0].upper, 1.0, step);
    EXPECT_EQ(regions[0].winner, 0);
    EXPECT_EQ(regions[1].winner, 1);
    EXPECT_EQ(regions[0].lower, -std::numeric_limits<double>::infinity());
    EXPECT_EQ(regions[1].upper, std::numeric_limits<double>::infinity());
}

TEST(PosteriorCurves, UnequalPriorCrossoverMatchesAnalyticRoot)
{
    // Equal variances s^2: the posteriors meet where
    // x = (m0 + m1) / 2 + s^2 ln(p0 / p1) / (m1 - m0). Kernel smoothing
    // inflates s^2 by h^2, which is folded into the oracle.
    const auto a = normal_draws(200000, 0, 1, 7);
    const auto b = normal_draws(200000, 3, 1, 8);
    const std::vector<double> priors{0.75, 0.25};
    const auto c = posterior_curves({a, b}, priors);
    const double h = detail::silverman_bandwidth(a);
    const double expected = 1.5 + (1.0 + h * h) * std::log(3.0) / 3.0;
    EXPECT_NEAR(expected, 1.866, 0.01);
    EXPECT_NEAR(crossover(c), expected, c.grid[1] - c.grid[0]);
}

TEST(PosteriorCurves, PointwiseSumIsOne)
{
    Rng rng(9);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t k = 2 + rng.below(3);
        std::vector<std::vector<double>> values(k);
        std::vector<double> priors(k);
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            values[c] = normal_draws(5 + rng.below(300), rng.normal(0, 3), 0.2 + rng.uniform() * 3, rng.next());
            priors[c] = 0.05 + rng.uniform();
            total += priors[c];
        }
        for (auto& p : priors) {
            p /= total;
        }
        const auto curves = posterior_curves(values, priors);
        for (std::size_t i = 0; i < curves.grid.size(); ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                EXPECT_GE(curves.posteriors[c][i], 0.0);
                EXPECT_LE(curves.posteriors[c][i], 1.0);
                s += curves.posteriors[c][i];
            }
            EXPECT_NEAR(s, 1.0, 1e-9);
        }
    }
}

TEST(PosteriorCurves, EmptyClassIsInputError)
{
    const std::vector<double> priors{0.5, 0.5};
    expect_error_kind([&] { posterior_curves({{1.0, 2.0}, {}}, priors); }, ErrorKind::input);
}

TEST(PosteriorCurves, TinyDenominatorFallsBackToPriors)
{
    const std::vector<double> grid{0, 1, 2};
    const std::vector<double> priors{0.3, 0.7};
    const auto c = posterior_curves_from_densities(grid, {{1, 0, 0}, {0, 1e-20, 1}}, priors);
    EXPECT_DOUBLE_EQ(c.posteriors[0][1], 0.3);
    EXPECT_DOUBLE_EQ(c.posteriors[1][1], 0.7);
    EXPECT_DOUBLE_EQ(c.posteriors[0][0], 1.0);
}

TEST(BayesRegions, TwoDisjointWinsGiveThreeRegions)
{
    // Class 0 is bimodal at -4 and 4, class 1 unimodal at 0: the grid scan
    // must see the winner change exactly twice.
    std::vector<double> grid;
    std::vector<double> d0, d1;
    for (int i = 0; i <= 400; ++i) {
        const double x = -10 + 0.05 * i;
        grid.push_back(x);
        d0.push_back(0.5 * gaussian(x, -4, 1) + 0.5 * gaussian(x, 4, 1));
        d1.push_back(gaussian(x, 0, 1));
    }
    const std::vector<double> priors{0.5, 0.5};
    const auto c = posterior_curves_from_densities(grid, {d0, d1}, priors);
    std::size_t changes = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        changes += (c.posteriors[0][i] > c.posteriors[1][i]) != (c.posteriors[0][i - 1] > c.posteriors[1][i - 1]);
    }
    ASSERT_EQ(changes, 2u);
    const auto regions = bayes_regions(c, 0.0);
    ASSERT_EQ(regions.size(), 3u);
    EXPECT_EQ(regions[0].winner, 0);
    EXPECT_EQ(regions[1].winner, 1);
    EXPECT_EQ(regions[2].winner, 0);
    // analytic crossover: 0.5 e^{-(x-4)^2/2} (x > 0 side) = e^{-x^2/2} -> x = 2 + ln(2)/4 for the
    // dominant term; the -4 mode adds a negligible share.
    EXPECT_NEAR(regions[1].upper, 2.0 + std::log(2.0) / 4.0, 0.05);
    EXPECT_NEAR(regions[1].lower, -(2.0 + std::log(2.0) / 4.0), 0.05);
}

TEST(BayesRegions, InvariantsOnRandomCurves)
{
    Rng rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t k = 2 + rng.below(3);
        std::vector<std::vector<double>> values(k);
        std::vector<double> priors(k, 1.0 / k);
        for (std::size_t c = 0; c < k; ++c) {
            values[c] = normal_draws(50 + rng.below(200), rng.normal(0, 2), 0.3 + rng.uniform(), rng.next());
        }
        const auto curves = posterior_curves(values, priors);
        const auto regions = bayes_regions(curves, 0.02);
        for (std::size_t r = 0; r < regions.size(); ++r) {
            EXPECT_LT(regions[r].lower, regions[r].upper);
            if (r > 0) {
                EXPECT_LE(regions[r - 1].upper, regions[r].lower);
            }
            EXPECT_GE(regions[r].support, 0.02);
            for (std::size_t i = regions[r].first; i <= regions[r].last; ++i) {
                for (std::size_t c = 0; c < k; ++c) {
                    if (static_cast<int>(c) != regions[r].winner) {
                        EXPECT_GT(curves.posteriors[regions[r].winner][i], curves.posteriors[c][i]);
                    }
                }
            }
        }
    }
}

TEST(BayesRegions, SupportFilterDropsSlivers)
{
    // 1% of events sit in a far cluster of class 1; it wins its own region
    // but falls below a 5% support floor.
    auto a = normal_draws(990, 0, 1, 11);
    auto b = normal_draws(10, 20, 0.5, 12);
    const std::vector<double> priors{0.99, 0.01};
    const auto curves = posterior_curves({a, b}, priors);
    bool found = false;
    for (const auto& r : bayes_regions(curves, 0.0)) {
        found = found || (r.winner == 1 && r.support < 0.05);
    }
    EXPECT_TRUE(found);
    for (const auto& r : bayes_regions(curves, 0.05)) {
        EXPECT_NE(r.winner, 1);
    }
}

TEST(Sdh2d, SinglePointKeepsUnitMass)
{
    const std::vector<double> x{1.0};
    const auto d = sdh_2d(x, x);
    double total = 0.0;
    double peak = 0.0;
    for (const double w : d.weights) {
        total += w;
        peak = std::max(peak, w);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_EQ(peak, d.weight(32, 32));
}

TEST(Sdh2d, UniformGridWithoutSmoothingIsUniform)
{
    std::vector<double> x, y;
    for (int i = 0; i < 64; ++i) {
        for (int j = 0; j < 64; ++j) {
            x.push_back(i + 0.5);
            y.push_back(j + 0.5);
        }
    }
    const Box2D box{0, 64, 0, 64};
    const auto d = sdh_2d(x, y, box, 64, 0);
    for (const double w : d.weights) {
        EXPECT_NEAR(w, 1.0 / 4096, 1e-12);
    }
}

TEST(Sdh2d, GaussianPeakNearCentre)
{
    const auto x = normal_draws(10000, 0, 1, 13);
    const auto y = normal_draws(10000, 0, 1, 14);
    const Box2D box{-4, 4, -4, 4};
    const auto d = sdh_2d(x, y, box, 64);
    std::size_t best = 0;
    for (std::size_t k = 1; k < d.weights.size(); ++k) {
        if (d.weights[k] > d.weights[best]) {
            best = k;
        }
    }
    const auto ix = static_cast<long>(best / 64);
    const auto iy = static_cast<long>(best % 64);
    EXPECT_LE(std::abs(ix - 31.5), 2.5);
    EXPECT_LE(std::abs(iy - 31.5), 2.5);
}

TEST(Sdh2d, SumsToOneAndNonNegative)
{
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(1000);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.normal(0, 1 + trial);
            y[i] = rng.uniform();
        }
        const auto d = sdh_2d(x, y, 8 + rng.below(64), rng.below(5));
        double total = 0.0;
        for (const double w : d.weights) {
            EXPECT_GE(w, 0.0);
            total += w;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(Sdh2d, SmoothingConservesMassBeforeRenormalization)
{
    Rng rng(16);
    std::vector<double> w(16 * 16);
    for (auto& v : w) {
        v = rng.uniform();
    }
    double before = 0.0;
    for (const double v : w) {
        before += v;
    }
    detail::binomial_smooth(w, 16, 16);
    double after = 0.0;
    for (const double v : w) {
        after += v;
    }
    EXPECT_NEAR(after, before, 1e-12);
}

TEST(Sdh2d, MismatchedLengthsIsInputError)
{
    const std::vector<double> x{1, 2};
    const std::vector<double> y{1};
    expect_error_kind([&] { sdh_2d(x, y); }, ErrorKind::input);
}
