#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace alpods {

// A 1-D density sampled on an ascending grid, unit trapezoid integral.
struct DensityGrid
{
    std::vector<double> grid;
    std::vector<double> values;

    // Linear interpolation; zero outside the grid.
    double at(double x) const
    {
        if (grid.empty() || x < grid.front() || x > grid.back()) {
            return 0.0;
        }
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        if (it == grid.end()) {
            return values.back();
        }
        const auto hi = static_cast<std::size_t>(it - grid.begin());
        if (hi == 0) {
            return values.front();
        }
        const std::size_t lo = hi - 1;
        const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
        return values[lo] + t * (values[hi] - values[lo]);
    }

    double integral() const
    {
        double sum = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            sum += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
        }
        return sum;
    }
};

namespace detail {

// Type-7 quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.size() == 1) {
        return sorted.front();
    }
    const double h = (sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

inline double sample_sd(std::span<const double> values)
{
    if (values.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (const double v : values) {
        mean += v;
    }
    mean /= values.size();
    double ss = 0.0;
    for (const double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / (values.size() - 1));
}

// Silverman's rule of thumb, 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling
// back to sd when the IQR vanishes. Zero means the sample is degenerate.
inline double silverman_bandwidth(std::span<const double> values)
{
    const double sd = sample_sd(values);
    if (!(sd > 0.0)) {
        return 0.0;
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) {
        spread = sd;
    }
    return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

// Gaussian KDE on the uniform grid lo + i*step via linear binning followed
// by a truncated discrete convolution. Not normalized.
inline std::vector<double> binned_kde(std::span<const double> values, double lo, double step,
                                      std::size_t points, double bandwidth)
{
    std::vector<double> counts(points, 0.0);
    for (const double v : values) {
        const double pos = (v - lo) / step;
        if (pos <= 0.0) {
            counts.front() += 1.0;
            continue;
        }
        const auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= points) {
            counts.back() += 1.0;
            continue;
        }
        const double frac = pos - i;
        counts[i] += 1.0 - frac;
        counts[i + 1] += frac;
    }
    const auto reach =
        std::min<std::size_t>(points - 1, static_cast<std::size_t>(std::ceil(4.0 * bandwidth / step)));
    std::vector<double> kernel(reach + 1);
    const double norm = 1.0 / (values.size() * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t j = 0; j <= reach; ++j) {
        const double u = j * step / bandwidth;
        kernel[j] = norm * std::exp(-0.5 * u * u);
    }
    std::vector<double> density(points, 0.0);
    for (std::size_t i = 0; i < points; ++i) {
        if (counts[i] == 0.0) {
            continue;
        }
        const std::size_t a = i >= reach ? i - reach : 0;
        const std::size_t b = std::min(points - 1, i + reach);
        for (std::size_t t = a; t <= b; ++t) {
            density[t] += counts[i] * kernel[t > i ? t - i : i - t];
        }
    }
    return density;
}

inline void normalize_trapezoid(std::span<const double> grid, std::span<double> values)
{
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        sum += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    }
    if (sum > 0.0) {
        for (auto& v : values) {
            v /= sum;
        }
    }
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points)
{
    std::vector<double> grid(points);
    const double step = (hi - lo) / (points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = lo + i * step;
    }
    grid.back() = hi;
    return grid;
}

inline double spike_width(double center)
{
    return 1e-6 * std::max(1.0, std::abs(center));
}

} // namespace detail

// Gaussian KDE with Silverman bandwidth on `grid_points` points spanning
// [min - 3h, max + 3h]. A constant sample becomes a uniform spike of width
// 1e-6 * max(1, |value|) centred on the value.
inline DensityGrid estimate_pdf_1d(std::span<const double> values, std::size_t grid_points = 256)
{
    require(!values.empty(), "estimate_pdf_1d needs at least one value");
    require(grid_points >= 2, "estimate_pdf_1d needs at least two grid points");
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    const double h = detail::silverman_bandwidth(values);
    DensityGrid out;
    if (h == 0.0) {
        const double width = detail::spike_width(*min_it);
        out.grid = detail::uniform_grid(*min_it - 0.5 * width, *min_it + 0.5 * width, grid_points);
        out.values.assign(grid_points, 1.0 / width);
        return out;
    }
    const double lo = *min_it - 3.0 * h;
    const double hi = *max_it + 3.0 * h;
    out.grid = detail::uniform_grid(lo, hi, grid_points);
    out.values = detail::binned_kde(values, lo, (hi - lo) / (grid_points - 1), grid_points, h);
    detail::normalize_trapezoid(out.grid, out.values);
    return out;
}

// Gaussian KDE with a fixed bandwidth on `grid_points` points spanning
// [min - 3h, max + 3h].
inline DensityGrid estimate_pdf_1d_with_bandwidth(std::span<const double> values, double bandwidth,
                                                  std::size_t grid_points = 256)
{
    require(!values.empty(), "estimate_pdf_1d needs at least one value");
    require(grid_points >= 2, "estimate_pdf_1d needs at least two grid points");
    require(bandwidth > 0.0 && std::isfinite(bandwidth), "bandwidth must be positive");
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *min_it - 3.0 * bandwidth;
    const double hi = *max_it + 3.0 * bandwidth;
    DensityGrid out;
    out.grid = detail::uniform_grid(lo, hi, grid_points);
    out.values = detail::binned_kde(values, lo, (hi - lo) / (grid_points - 1), grid_points, bandwidth);
    detail::normalize_trapezoid(out.grid, out.values);
    return out;
}

// Per-class Bayes posteriors on a shared grid. `cell_mass[i]` is the share
// of observations falling in the grid cell around grid[i] (cells split at
// midpoints); it drives the support filter of bayes_regions.
struct PosteriorCurves
{
    std::vector<double> grid;
    std::vector<double> priors;
    std::vector<std::vector<double>> posteriors; // [class][grid point]
    std::vector<double> cell_mass;

    std::size_t n_classes() const { return priors.size(); }
};

inline constexpr double kPosteriorDenominatorFloor = 1e-12;

// posterior_c = prior_c pdf_c / sum_j prior_j pdf_j; where the denominator
// is below 1e-12 the priors are returned. Without explicit cell masses the
// mixture density is used.
inline PosteriorCurves posterior_curves_from_densities(std::vector<double> grid,
                                                       const std::vector<std::vector<double>>& densities,
                                                       std::span<const double> priors,
                                                       std::vector<double> cell_mass = {})
{
    require(densities.size() >= 2, "posterior curves need at least two classes");
    require(priors.size() == densities.size(), "one prior per class required");
    double prior_sum = 0.0;
    for (const double p : priors) {
        require(p >= 0.0, "priors must be non-negative");
        prior_sum += p;
    }
    require(std::abs(prior_sum - 1.0) < 1e-9, "priors must sum to 1");
    const std::size_t g = grid.size();
    for (const auto& d : densities) {
        require(d.size() == g, "density does not match grid");
    }

    PosteriorCurves curves;
    curves.priors.assign(priors.begin(), priors.end());
    curves.posteriors.assign(densities.size(), std::vector<double>(g, 0.0));
    std::vector<double> mixture(g, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
        double denominator = 0.0;
        for (std::size_t c = 0; c < densities.size(); ++c) {
            denominator += priors[c] * densities[c][i];
        }
        mixture[i] = denominator;
        for (std::size_t c = 0; c < densities.size(); ++c) {
            curves.posteriors[c][i] = denominator < kPosteriorDenominatorFloor
                                          ? priors[c]
                                          : priors[c] * densities[c][i] / denominator;
        }
    }
    if (cell_mass.empty()) {
        double total = 0.0;
        for (const double m : mixture) {
            total += m;
        }
        cell_mass.resize(g);
        for (std::size_t i = 0; i < g; ++i) {
            cell_mass[i] = total > 0.0 ? mixture[i] / total : 0.0;
        }
    }
    require(cell_mass.size() == g, "cell mass does not match grid");
    curves.grid = std::move(grid);
    curves.cell_mass = std::move(cell_mass);
    return curves;
}

// KDE per class on a common grid covering every class, then Bayes. Each
// class bandwidth is floored at one grid step so narrow or constant classes
// stay resolvable on the shared grid.
inline PosteriorCurves posterior_curves(const std::vector<std::vector<double>>& values_by_class,
                                        std::span<const double> priors, std::size_t grid_points = 256)
{
    require(values_by_class.size() >= 2, "posterior curves need at least two classes");
    require(grid_points >= 2, "posterior curves need at least two grid points");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double h_max = 0.0;
    std::vector<double> bandwidths;
    std::size_t total = 0;
    for (const auto& values : values_by_class) {
        require(!values.empty(), "every class needs at least one value");
        for (const double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        bandwidths.push_back(detail::silverman_bandwidth(values));
        h_max = std::max(h_max, bandwidths.back());
        total += values.size();
    }
    double pad = 3.0 * h_max;
    if (pad == 0.0) {
        pad = std::max(detail::spike_width(lo), 0.01 * (hi - lo));
    }
    lo -= pad;
    hi += pad;
    const double step = (hi - lo) / (grid_points - 1);
    auto grid = detail::uniform_grid(lo, hi, grid_points);

    std::vector<std::vector<double>> densities;
    densities.reserve(values_by_class.size());
    std::vector<double> cell_mass(grid_points, 0.0);
    for (std::size_t c = 0; c < values_by_class.size(); ++c) {
        const auto& values = values_by_class[c];
        auto density = detail::binned_kde(values, lo, step, grid_points, std::max(bandwidths[c], step));
        detail::normalize_trapezoid(grid, density);
        densities.push_back(std::move(density));
        for (const double v : values) {
            // Cell i covers (mid(i-1, i), mid(i, i+1)].
            const double pos = std::ceil((v - lo) / step - 0.5);
            const auto cell = static_cast<std::size_t>(std::clamp(pos, 0.0, double(grid_points - 1)));
            cell_mass[cell] += 1.0 / total;
        }
    }
    return posterior_curves_from_densities(std::move(grid), densities, priors, std::move(cell_mass));
}

// A maximal run of grid points won strictly by one class. The interval is
// (lower, upper], split at grid midpoints.
struct DecisionRegion
{
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    int winner = -1;
    double mean_margin = 0.0;
    double support = 0.0;
    std::size_t first = 0;
    std::size_t last = 0;
};

// Regions whose observation share is below `min_support` are dropped. The
// outermost surviving regions extend to -inf / +inf when no observation
// lies beyond them.
inline std::vector<DecisionRegion> bayes_regions(const PosteriorCurves& curves, double min_support)
{
    const std::size_t g = curves.grid.size();
    const std::size_t k = curves.n_classes();
    std::vector<int> winner(g, -1);
    std::vector<double> margin(g, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
        int best = -1;
        double best_p = -1.0;
        double second = -1.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double p = curves.posteriors[c][i];
            if (p > best_p) {
                second = best_p;
                best_p = p;
                best = static_cast<int>(c);
            } else if (p > second) {
                second = p;
            }
        }
        if (best_p > second) {
            winner[i] = best;
            margin[i] = best_p - second;
        }
    }

    std::vector<DecisionRegion> regions;
    for (std::size_t i = 0; i < g;) {
        if (winner[i] < 0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double margin_sum = 0.0;
        double mass = 0.0;
        while (j < g && winner[j] == winner[i]) {
            margin_sum += margin[j];
            mass += curves.cell_mass[j];
            ++j;
        }
        DecisionRegion r;
        r.winner = winner[i];
        r.first = i;
        r.last = j - 1;
        r.mean_margin = margin_sum / (j - i);
        r.support = mass;
        if (i > 0) {
            r.lower = 0.5 * (curves.grid[i - 1] + curves.grid[i]);
        }
        if (j < g) {
            r.upper = 0.5 * (curves.grid[j - 1] + curves.grid[j]);
        }
        if (r.support >= min_support) {
            regions.push_back(r);
        }
        i = j;
    }
    if (!regions.empty()) {
        auto empty_range = [&](std::size_t a, std::size_t b) {
            for (std::size_t i = a; i < b; ++i) {
                if (curves.cell_mass[i] > 0.0) {
                    return false;
                }
            }
            return true;
        };
        if (empty_range(0, regions.front().first)) {
            regions.front().lower = -std::numeric_limits<double>::infinity();
        }
        if (empty_range(regions.back().last + 1, g)) {
            regions.back().upper = std::numeric_limits<double>::infinity();
        }
    }
    return regions;
}

struct Box2D
{
    double x_lo = 0.0;
    double x_hi = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;
};

inline Box2D bounding_box(std::span<const double> x, std::span<const double> y)
{
    require(!x.empty() && x.size() == y.size(), "bounding box needs matching non-empty coordinates");
    const auto [x_lo, x_hi] = std::minmax_element(x.begin(), x.end());
    const auto [y_lo, y_hi] = std::minmax_element(y.begin(), y.end());
    return {*x_lo, *x_hi, *y_lo, *y_hi};
}

// Smoothed 2-D histogram; weights[ix * bins_y + iy] sums to one.
struct DensityGrid2D
{
    std::size_t bins_x = 0;
    std::size_t bins_y = 0;
    Box2D box;
    std::vector<double> weights;

    double weight(std::size_t ix, std::size_t iy) const { return weights[ix * bins_y + iy]; }
    double center_x(std::size_t ix) const { return box.x_lo + (ix + 0.5) * (box.x_hi - box.x_lo) / bins_x; }
    double center_y(std::size_t iy) const { return box.y_lo + (iy + 0.5) * (box.y_hi - box.y_lo) / bins_y; }
};

namespace detail {

inline std::size_t bin_of(double v, double lo, double hi, std::size_t bins)
{
    if (!(hi > lo)) {
        return bins / 2;
    }
    const double pos = std::floor((v - lo) / (hi - lo) * bins);
    return static_cast<std::size_t>(std::clamp(pos, 0.0, double(bins - 1)));
}

// One pass of (1,2,1)/4 along both axes; edges reflect, so mass is kept.
inline void binomial_smooth(std::vector<double>& w, std::size_t nx, std::size_t ny)
{
    std::vector<double> tmp(w.size());
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double left = w[(ix == 0 ? ix : ix - 1) * ny + iy];
            const double right = w[(ix + 1 == nx ? ix : ix + 1) * ny + iy];
            tmp[ix * ny + iy] = 0.25 * left + 0.5 * w[ix * ny + iy] + 0.25 * right;
        }
    }
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double down = tmp[ix * ny + (iy == 0 ? iy : iy - 1)];
            const double up = tmp[ix * ny + (iy + 1 == ny ? iy : iy + 1)];
            w[ix * ny + iy] = 0.25 * down + 0.5 * tmp[ix * ny + iy] + 0.25 * up;
        }
    }
}

} // namespace detail

// Histogram over `box` (points outside are clamped into the border bins),
// smoothed `smoothing_passes` times, renormalized to unit sum.
inline DensityGrid2D sdh_2d(std::span<const double> x, std::span<const double> y, const Box2D& box,
                            std::size_t bins = 64, std::size_t smoothing_passes = 3)
{
    require(x.size() == y.size(), "sdh_2d needs coordinate lists of equal length");
    require(!x.empty(), "sdh_2d needs at least one point");
    require(bins >= 1, "sdh_2d needs at least one bin");
    DensityGrid2D out;
    out.bins_x = bins;
    out.bins_y = bins;
    out.box = box;
    out.weights.assign(bins * bins, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto ix = detail::bin_of(x[i], box.x_lo, box.x_hi, bins);
        const auto iy = detail::bin_of(y[i], box.y_lo, box.y_hi, bins);
        out.weights[ix * bins + iy] += 1.0;
    }
    for (std::size_t p = 0; p < smoothing_passes; ++p) {
        detail::binomial_smooth(out.weights, bins, bins);
    }
    double total = 0.0;
    for (const double w : out.weights) {
        total += w;
    }
    for (auto& w : out.weights) {
        w /= total;
    }
    return out;
}

inline DensityGrid2D sdh_2d(std::span<const double> x, std::span<const double> y, std::size_t bins = 64,
                            std::size_t smoothing_passes = 3)
{
    require(x.size() == y.size(), "sdh_2d needs coordinate lists of equal length");
    return sdh_2d(x, y, bounding_box(x, y), bins, smoothing_passes);
}

} // namespace alpods
