#pragma once

// Rim transformation by directed accumulation.
//
// Every pixel is moved k steps along its unit image gradient, for each radius
// k, and votes with its gradient magnitude (v_s) and its value (v_u) at the
// landing cell (integer kernel). Pixels on a circle of radius r whose
// gradients point at the centre all land on the centre when k == r, so a rim
// shows up as a peak at its centre.
//
// Axis convention: x is the row axis, y the column axis. Gradients point
// towards increasing intensity, so on the outer edge of a bright ring they
// point inwards and the votes converge:
//
//            row 0
//        . . . . . . .
//        . # # # # # .        # bright rim
//        . # <---- # .        outer-edge gradient points inwards;
//        . # - o - # .        shifting by k = radius lands on o
//        . # # # # # .
//
// Volumes are processed slice by slice along the first (axial) spatial axis.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dirac/core.hpp"
#include "dirac/deda.hpp"
#include "dirac/parallel.hpp"

namespace dirac {

struct DatrConfig {
    std::vector<int> radii{5, 7, 9, 11, 13, 15};
    double epsilon = 1e-8;
    std::optional<Extents> target_dims;
    /// Use every shift 1..max(H, W) instead of `radii`.
    bool full_range = false;
    /// Keep one output channel per radius instead of summing over radii.
    bool per_radius_channels = false;

    void validate() const {
        if (!(epsilon > 0)) throw invalid_argument("DatrConfig: epsilon must be positive");
        if (full_range) return;
        if (radii.empty()) throw invalid_argument("DatrConfig: radii must not be empty");
        for (std::size_t i = 0; i < radii.size(); ++i) {
            if (radii[i] <= 0) throw invalid_argument("DatrConfig: radii must be positive");
            if (i > 0 && radii[i] <= radii[i - 1])
                throw invalid_argument("DatrConfig: radii must be strictly ascending");
        }
    }

    /// Shift distances actually used for a plane of the given extents.
    std::vector<int> effective_radii(const Extents& plane) const {
        if (!full_range) return radii;
        std::vector<int> all(std::max(plane[0], plane[1]));
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i + 1);
        return all;
    }
};

template <std::floating_point T>
struct GradientField {
    FeatureMap<T> gx, gy;
    FeatureMap<T> magnitude;
    FeatureMap<T> unit_x, unit_y;
};

/// 3x3 Sobel derivatives with replicated borders (correlation, unnormalized):
/// gy uses [[-1,0,1],[-2,0,2],[-1,0,1]], gx its transpose.
template <std::floating_point T>
GradientField<T> sobel_gradients(const FeatureMap<T>& source, T epsilon) {
    if (source.rank() != 2) throw invalid_argument("sobel_gradients: expected a 2D map");
    const std::size_t rows = source.dims()[0], cols = source.dims()[1];
    if (rows < 3 || cols < 3) throw invalid_argument("sobel_gradients: extents must be at least 3x3");
    if (!(epsilon > 0)) throw invalid_argument("sobel_gradients: epsilon must be positive");

    GradientField<T> f{FeatureMap<T>(source.channels(), source.dims()),
                       FeatureMap<T>(source.channels(), source.dims()),
                       FeatureMap<T>(source.channels(), source.dims()),
                       FeatureMap<T>(source.channels(), source.dims()),
                       FeatureMap<T>(source.channels(), source.dims())};
    constexpr T smooth[3] = {1, 2, 1};
    auto clamp = [](long v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(n) - 1));
    };
    // Weighted central differences: flat neighbourhoods give exact zeros.
    for (std::size_t c = 0; c < source.channels(); ++c) {
        for (std::size_t i = 0; i < rows; ++i) {
            const std::size_t up = clamp(static_cast<long>(i) - 1, rows), down = clamp(static_cast<long>(i) + 1, rows);
            for (std::size_t j = 0; j < cols; ++j) {
                const std::size_t left = clamp(static_cast<long>(j) - 1, cols);
                const std::size_t right = clamp(static_cast<long>(j) + 1, cols);
                const std::size_t ri[3] = {up, i, down}, cj[3] = {left, j, right};
                T gx{0}, gy{0};
                for (int t = 0; t < 3; ++t) {
                    gx += smooth[t] * (source(c, down, cj[t]) - source(c, up, cj[t]));
                    gy += smooth[t] * (source(c, ri[t], right) - source(c, ri[t], left));
                }
                const T s = std::sqrt(gx * gx + gy * gy);
                f.gx(c, i, j) = gx;
                f.gy(c, i, j) = gy;
                f.magnitude(c, i, j) = s;
                f.unit_x(c, i, j) = gx / (s + epsilon);
                f.unit_y(c, i, j) = gy / (s + epsilon);
            }
        }
    }
    return f;
}

/// Grid k holds every pixel shifted k steps along its unit gradient of
/// channel `channel`: G[k] = k * unit + mesh.
template <std::floating_point T>
GridSet<T> build_rim_grids(const GradientField<T>& field, const std::vector<int>& radii,
                           std::size_t channel = 0) {
    if (radii.empty()) throw invalid_argument("build_rim_grids: radii must not be empty");
    const Extents& dims = field.unit_x.dims();
    if (dims.size() != 2) throw invalid_argument("build_rim_grids: expected a 2D gradient field");
    const auto ux = field.unit_x.channel(channel);
    const auto uy = field.unit_y.channel(channel);
    std::vector<SamplingGrid<T>> grids;
    grids.reserve(radii.size());
    for (int k : radii) {
        if (k <= 0) throw invalid_argument("build_rim_grids: radii must be positive");
        SamplingGrid<T> g(2, dims);
        const T step = static_cast<T>(k);
        for (std::size_t i = 0, loc = 0; i < dims[0]; ++i)
            for (std::size_t j = 0; j < dims[1]; ++j, ++loc) {
                g.coord(0, loc) = step * ux[loc] + static_cast<T>(i);
                g.coord(1, loc) = step * uy[loc] + static_cast<T>(j);
            }
        grids.push_back(std::move(g));
    }
    return GridSet<T>(std::move(grids));
}

template <std::floating_point T>
struct DatrResult {
    FeatureMap<T> v_u;
    FeatureMap<T> v_s;
};

namespace detail {

template <std::floating_point T>
FeatureMap<T> single_channel(const FeatureMap<T>& map, std::size_t c) {
    auto plane = map.channel(c);
    return FeatureMap<T>(1, map.dims(), std::vector<T>(plane.begin(), plane.end()));
}

}  // namespace detail

template <std::floating_point T>
DatrResult<T> datr_transform(const FeatureMap<T>& source, const DatrConfig& cfg,
                             const Exec& exec = Exec::from_env()) {
    cfg.validate();
    if (source.rank() != 2) throw invalid_argument("datr_transform: expected a 2D map");
    const Extents target = cfg.target_dims.value_or(source.dims());
    if (target.size() != 2) throw shape_mismatch("datr_transform: target extents must be 2D");
    const auto radii = cfg.effective_radii(source.dims());
    const auto field = sobel_gradients(source, static_cast<T>(cfg.epsilon));

    const std::size_t per_channel = cfg.per_radius_channels ? radii.size() : 1;
    const std::size_t out_channels = source.channels() * per_channel;
    DatrResult<T> out{FeatureMap<T>(out_channels, target), FeatureMap<T>(out_channels, target)};
    const std::size_t plane = volume(target);

    for (std::size_t c = 0; c < source.channels(); ++c) {
        const auto u = detail::single_channel(source, c);
        const auto s = detail::single_channel(field.magnitude, c);
        const auto grids = build_rim_grids(field, radii, c);
        auto store = [&](const FeatureMap<T>& vu, const FeatureMap<T>& vs, std::size_t slot) {
            std::copy(vu.data().begin(), vu.data().end(), out.v_u.data().begin() + slot * plane);
            std::copy(vs.data().begin(), vs.data().end(), out.v_s.data().begin() + slot * plane);
        };
        if (!cfg.per_radius_channels) {
            store(deda_forward(u, grids, Kernel::Integer, target, exec),
                  deda_forward(s, grids, Kernel::Integer, target, exec), c);
            continue;
        }
        for (std::size_t k = 0; k < grids.size(); ++k) {
            const GridSet<T> one{grids[k]};
            store(deda_forward(u, one, Kernel::Integer, target, exec),
                  deda_forward(s, one, Kernel::Integer, target, exec), c * per_channel + k);
        }
    }
    return out;
}

/// Axial slice extraction for (C, D, H, W) maps.
template <std::floating_point T>
FeatureMap<T> axial_slice(const FeatureMap<T>& volume_map, std::size_t z) {
    const auto& d = volume_map.dims();
    if (d.size() != 3) throw invalid_argument("axial_slice: expected a 3D map");
    if (z >= d[0]) throw invalid_argument("axial_slice: slice index out of range");
    const std::size_t plane = d[1] * d[2];
    std::vector<T> data;
    data.reserve(volume_map.channels() * plane);
    for (std::size_t c = 0; c < volume_map.channels(); ++c) {
        auto ch = volume_map.channel(c);
        data.insert(data.end(), ch.begin() + z * plane, ch.begin() + (z + 1) * plane);
    }
    return FeatureMap<T>(volume_map.channels(), {d[1], d[2]}, std::move(data));
}

template <std::floating_point T>
DatrResult<T> datr_volume(const FeatureMap<T>& source, const DatrConfig& cfg,
                          const Exec& exec = Exec::from_env()) {
    if (source.rank() != 3) throw invalid_argument("datr_volume: expected a 3D map");
    const std::size_t depth = source.dims()[0];
    std::vector<DatrResult<T>> slices;
    slices.reserve(depth);
    for (std::size_t z = 0; z < depth; ++z) slices.push_back(datr_transform(axial_slice(source, z), cfg, exec));

    const auto& first = slices.front().v_s;
    const Extents dims{depth, first.dims()[0], first.dims()[1]};
    const std::size_t plane = first.spatial_size();
    DatrResult<T> out{FeatureMap<T>(first.channels(), dims), FeatureMap<T>(first.channels(), dims)};
    for (std::size_t z = 0; z < depth; ++z)
        for (std::size_t c = 0; c < first.channels(); ++c) {
            auto dst_u = out.v_u.channel(c).subspan(z * plane, plane);
            auto dst_s = out.v_s.channel(c).subspan(z * plane, plane);
            auto src_u = slices[z].v_u.channel(c);
            auto src_s = slices[z].v_s.channel(c);
            std::copy(src_u.begin(), src_u.end(), dst_u.begin());
            std::copy(src_s.begin(), src_s.end(), dst_s.begin());
        }
    return out;
}

}  // namespace dirac
