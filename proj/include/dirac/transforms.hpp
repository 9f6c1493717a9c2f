#pragma once

// Classical accumulator-space transforms written as directed accumulation
// (Radon, Hough) or as its read-side dual (polar resampling).
//
// Conventions, shared with the oracles in the tests:
//   - x is the row index i, y the column index j.
//   - Radon at angle a bins t = y*cos(a) + x*sin(a), centred so that the
//     image centre projects onto the middle bin; angle 0 therefore gives
//     per-column sums and angle pi/2 per-row sums when num_bins matches.
//   - Hough uses rho = x*cos(theta) + y*sin(theta), theta_j = j*pi/num_theta,
//     rho in [-diag, +diag] spread uniformly over num_rho bins.
//   - Polar cell (r, b) reads the source at center + r*(cos phi_b, sin phi_b)
//     with phi_b = 2*pi*b/num_phi.

#include <cmath>
#include <numbers>
#include <utility>

#include "dirac/core.hpp"
#include "dirac/deda.hpp"
#include "dirac/sampling.hpp"

namespace dirac {

template <std::floating_point T>
FeatureMap<T> radon_projection(const FeatureMap<T>& source, double angle, std::size_t num_bins,
                               const Exec& exec = Exec::from_env()) {
    if (!std::isfinite(angle)) throw invalid_argument("radon_projection: non-finite angle");
    if (source.rank() != 2) throw invalid_argument("radon_projection: expected a 2D map");
    if (num_bins == 0) throw invalid_argument("radon_projection: num_bins must be positive");
    const std::size_t rows = source.dims()[0], cols = source.dims()[1];
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double centre = (static_cast<double>(cols) - 1) / 2 * ca + (static_cast<double>(rows) - 1) / 2 * sa;
    const double offset = (static_cast<double>(num_bins) - 1) / 2;

    SamplingGrid<T> grid(1, source.dims());
    for (std::size_t i = 0, loc = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j, ++loc) {
            const double t = static_cast<double>(j) * ca + static_cast<double>(i) * sa;
            grid.coord(0, loc) = static_cast<T>(t - centre + offset);
        }
    return deda_forward(source, GridSet<T>{std::move(grid)}, Kernel::Integer, {num_bins}, exec);
}

/// Continuous rho-bin coordinate of pixel (i, j) for angle theta.
inline double hough_rho_coordinate(std::size_t i, std::size_t j, double theta, double diag,
                                   std::size_t num_rho) {
    const double rho = static_cast<double>(i) * std::cos(theta) + static_cast<double>(j) * std::sin(theta);
    return (rho + diag) / (2 * diag) * (static_cast<double>(num_rho) - 1);
}

inline double hough_diagonal(std::size_t rows, std::size_t cols) {
    const double d = std::hypot(static_cast<double>(rows) - 1, static_cast<double>(cols) - 1);
    return d > 0 ? d : 1.0;
}

/// (rho, theta) accumulator of edge strengths, shape (C, num_rho, num_theta).
template <std::floating_point T>
FeatureMap<T> hough_lines(const FeatureMap<T>& edge_map, std::size_t num_rho, std::size_t num_theta,
                          const Exec& exec = Exec::from_env()) {
    if (num_rho < 1 || num_theta < 1) throw invalid_argument("hough_lines: bin counts must be positive");
    if (edge_map.rank() != 2) throw invalid_argument("hough_lines: expected a 2D map");
    for (auto v : edge_map.data())
        if (v < 0) throw invalid_argument("hough_lines: edge map must be non-negative");
    const std::size_t rows = edge_map.dims()[0], cols = edge_map.dims()[1];
    const double diag = hough_diagonal(rows, cols);

    std::vector<SamplingGrid<T>> grids;
    grids.reserve(num_theta);
    for (std::size_t t = 0; t < num_theta; ++t) {
        const double theta = std::numbers::pi * static_cast<double>(t) / static_cast<double>(num_theta);
        SamplingGrid<T> g(2, edge_map.dims());
        for (std::size_t i = 0, loc = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j, ++loc) {
                g.coord(0, loc) = static_cast<T>(hough_rho_coordinate(i, j, theta, diag, num_rho));
                g.coord(1, loc) = static_cast<T>(t);
            }
        grids.push_back(std::move(g));
    }
    return deda_forward(edge_map, GridSet<T>(std::move(grids)), Kernel::Integer, {num_rho, num_theta}, exec);
}

template <std::floating_point T>
FeatureMap<T> polar_resample(const FeatureMap<T>& source, std::pair<double, double> center,
                             std::size_t num_r, std::size_t num_phi, const Exec& exec = Exec::from_env()) {
    if (source.rank() != 2) throw invalid_argument("polar_resample: expected a 2D map");
    if (num_r == 0 || num_phi == 0) throw invalid_argument("polar_resample: bin counts must be positive");
    const auto [cx, cy] = center;
    const double max_x = static_cast<double>(source.dims()[0]) - 1;
    const double max_y = static_cast<double>(source.dims()[1]) - 1;
    if (!(cx >= 0 && cx <= max_x && cy >= 0 && cy <= max_y))
        throw invalid_argument("polar_resample: center lies outside the source");

    SamplingGrid<T> grid(2, {num_r, num_phi});
    for (std::size_t r = 0, loc = 0; r < num_r; ++r)
        for (std::size_t b = 0; b < num_phi; ++b, ++loc) {
            const double phi = 2 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(num_phi);
            grid.coord(0, loc) = static_cast<T>(cx + static_cast<double>(r) * std::cos(phi));
            grid.coord(1, loc) = static_cast<T>(cy + static_cast<double>(r) * std::sin(phi));
        }
    return grid_sample(source, grid, Kernel::Bilinear, exec);
}

}  // namespace dirac
