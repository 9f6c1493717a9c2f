#pragma once

// Shared read (gather) and write (scatter) loops. Grid sampling, the DeDA
// backward pass and the DeDA forward pass are all built from these two.

#include <array>
#include <cstddef>
#include <vector>

#include "dirac/core.hpp"
#include "dirac/kernels.hpp"
#include "dirac/parallel.hpp"

namespace dirac::detail {

template <std::floating_point T>
struct WeightedCell {
    std::size_t cell;
    T weight;
};

inline Extents strides_of(const Extents& dims) {
    Extents s(dims.size(), 1);
    for (std::size_t q = dims.size(); q-- > 1;) s[q - 1] = s[q] * dims[q];
    return s;
}

/// Appends the (cell, weight) pairs that location `loc` of `grid` touches in a
/// space of extents `dims`. Axis taps combine outer-to-inner (axis 0 slowest).
template <std::floating_point T>
void append_cells(const SamplingGrid<T>& grid, std::size_t loc, Kernel kernel, const Extents& dims,
                  const Extents& strides, std::vector<WeightedCell<T>>& out) {
    const std::size_t q_count = dims.size();
    std::array<Taps<T>, 3> taps;
    for (std::size_t q = 0; q < q_count; ++q) {
        taps[q] = kernel_taps(kernel, grid.coord(q, loc), dims[q]);
        if (taps[q].count == 0) return;
    }
    std::array<int, 3> pick{0, 0, 0};
    while (true) {
        std::size_t cell = 0;
        T weight{1};
        for (std::size_t q = 0; q < q_count; ++q) {
            const auto& t = taps[q].tap[pick[q]];
            cell += t.index * strides[q];
            weight = q == 0 ? t.weight : weight * t.weight;
        }
        if (weight != T{0}) out.push_back({cell, weight});
        std::size_t q = q_count;
        while (q-- > 0) {
            if (++pick[q] < taps[q].count) break;
            pick[q] = 0;
        }
        if (q == static_cast<std::size_t>(-1)) return;
    }
}

/// out[c, loc] = sum_k sum_cells values[c, cell] * w, with `loc` ranging over
/// the grids' spatial extents and cells over values' spatial extents.
template <std::floating_point T>
FeatureMap<T> gather(const FeatureMap<T>& values, const GridSet<T>& grids, Kernel kernel,
                     const Exec& exec) {
    const Extents& dims = values.dims();
    const Extents strides = strides_of(dims);
    const std::size_t channels = values.channels();
    FeatureMap<T> out(channels, grids.spatial());
    const std::size_t locations = out.spatial_size();
    const std::size_t in_plane = values.spatial_size();
    auto src = values.data();
    auto dst = out.data();

    parallel_for(exec, locations, [&](std::size_t begin, std::size_t end) {
        std::vector<WeightedCell<T>> cells;
        for (std::size_t loc = begin; loc < end; ++loc) {
            cells.clear();
            for (const auto& grid : grids) append_cells(grid, loc, kernel, dims, strides, cells);
            for (std::size_t c = 0; c < channels; ++c) {
                const T* plane = src.data() + c * in_plane;
                T acc{0};
                for (const auto& wc : cells) acc += plane[wc.cell] * wc.weight;
                dst[c * locations + loc] = acc;
            }
        }
    });
    return out;
}

/// out[c, cell] += values[c, loc] * w for every grid k, location loc and touched
/// cell, visited in (k, loc, cell) order. Work is split by output channel and
/// by bands of the first target axis, so each cell sees the sequential order.
template <std::floating_point T>
FeatureMap<T> scatter(const FeatureMap<T>& values, const GridSet<T>& grids, Kernel kernel,
                      const Extents& target, const Exec& exec) {
    const Extents strides = strides_of(target);
    const std::size_t channels = values.channels();
    FeatureMap<T> out(channels, target);
    const std::size_t locations = values.spatial_size();
    const std::size_t cells_per_channel = out.spatial_size();
    const std::size_t band_stride = strides[0];
    const std::size_t bands = std::min<std::size_t>(std::max(1u, exec.threads), target[0]);
    auto src = values.data();
    auto dst = out.data();

    parallel_for(exec, channels * bands, [&](std::size_t begin, std::size_t end) {
        std::vector<WeightedCell<T>> cells;
        for (std::size_t task = begin; task < end; ++task) {
            const std::size_t c = task / bands, band = task % bands;
            const std::size_t row_lo = band * target[0] / bands;
            const std::size_t row_hi = (band + 1) * target[0] / bands;
            const std::size_t cell_lo = row_lo * band_stride, cell_hi = row_hi * band_stride;
            const T* plane = src.data() + c * locations;
            T* acc = dst.data() + c * cells_per_channel;
            for (const auto& grid : grids) {
                for (std::size_t loc = 0; loc < locations; ++loc) {
                    const T u = plane[loc];
                    cells.clear();
                    append_cells(grid, loc, kernel, target, strides, cells);
                    for (const auto& wc : cells)
                        if (wc.cell >= cell_lo && wc.cell < cell_hi) acc[wc.cell] += u * wc.weight;
                }
            }
        }
    });
    return out;
}

}  // namespace dirac::detail
