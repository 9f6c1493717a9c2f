#pragma once

// Grid sampling: the read-side dual of directed accumulation.
//
//   V[c, p] = sum_{n,m} U[c, n, m] K(G^x[p], n) K(G^y[p], m)
//
// The output takes the grid's spatial extents. Coordinates outside the source
// contribute nothing (zero padding).

#include "dirac/core.hpp"
#include "dirac/detail/accumulate.hpp"
#include "dirac/kernels.hpp"
#include "dirac/parallel.hpp"

namespace dirac {

template <std::floating_point T>
FeatureMap<T> grid_sample(const FeatureMap<T>& source, const SamplingGrid<T>& grid, Kernel kernel,
                          const Exec& exec = Exec::from_env()) {
    if (grid.coord_dims() != source.rank())
        throw shape_mismatch("grid_sample: grid has " + std::to_string(grid.coord_dims()) +
                             " coordinates for a source of rank " + std::to_string(source.rank()));
    return detail::gather(source, GridSet<T>{grid}, kernel, exec);
}

template <std::floating_point T>
struct GridSampleGrad {
    FeatureMap<T> grad_source;
    SamplingGrid<T> grad_grid;
};

template <std::floating_point T>
GridSampleGrad<T> grid_sample_backward(const FeatureMap<T>& upstream, const FeatureMap<T>& source,
                                       const SamplingGrid<T>& grid, Kernel kernel,
                                       const Exec& exec = Exec::from_env()) {
    if (grid.coord_dims() != source.rank())
        throw shape_mismatch("grid_sample_backward: grid coordinates do not match source rank");
    if (upstream.channels() != source.channels() || upstream.dims() != grid.spatial())
        throw shape_mismatch("grid_sample_backward: upstream shape " + to_string(upstream.shape()) +
                             " does not match the sampled output");

    // d/dU is the transpose of the read: scatter the upstream through the grid.
    GridSampleGrad<T> grad{detail::scatter(upstream, GridSet<T>{grid}, kernel, source.dims(), exec),
                           SamplingGrid<T>(grid.coord_dims(), grid.spatial())};
    if (kernel == Kernel::Integer) return grad;

    const Extents& dims = source.dims();
    const Extents strides = detail::strides_of(dims);
    const std::size_t q_count = dims.size();
    const std::size_t locations = grid.locations();
    const std::size_t in_plane = source.spatial_size();
    const std::size_t channels = source.channels();

    parallel_for(exec, locations, [&](std::size_t begin, std::size_t end) {
        for (std::size_t loc = begin; loc < end; ++loc) {
            std::array<detail::Taps<T>, 3> taps;
            bool inside = true;
            for (std::size_t q = 0; q < q_count; ++q) {
                taps[q] = detail::kernel_taps(kernel, grid.coord(q, loc), dims[q]);
                inside = inside && taps[q].count > 0;
            }
            if (!inside) continue;
            for (std::size_t dq = 0; dq < q_count; ++dq) {
                T total{0};
                std::array<int, 3> pick{0, 0, 0};
                while (true) {
                    std::size_t cell = 0;
                    T factor{1};
                    for (std::size_t q = 0; q < q_count; ++q) {
                        const auto& t = taps[q].tap[pick[q]];
                        cell += t.index * strides[q];
                        factor *= q == dq ? t.slope : t.weight;
                    }
                    if (factor != T{0})
                        for (std::size_t c = 0; c < channels; ++c)
                            total += upstream.data()[c * locations + loc] *
                                     source.data()[c * in_plane + cell] * factor;
                    std::size_t q = q_count;
                    while (q-- > 0) {
                        if (++pick[q] < taps[q].count) break;
                        pick[q] = 0;
                    }
                    if (q == static_cast<std::size_t>(-1)) break;
                }
                grad.grad_grid.coord(dq, loc) = total;
            }
        }
    });
    return grad;
}

}  // namespace dirac
