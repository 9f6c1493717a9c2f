#pragma once

// Directed accumulation (DeDA).
//
// Forward:  V[c, t] = sum_k sum_s U[c, s] prod_q K(G^q[k][s], t_q)
// Backward: dL/dU[c, s] = sum_k sum_t A[c, t] prod_q K(G^q[k][s], t_q)
//
// s runs over the source locations (the grids share the source extents) and
// t over the target cells. The backward pass with one grid is exactly a grid
// sampling read of A, and the pair satisfies <D(U), A> = <U, D^T(A)>.
//
// Votes landing outside the target are dropped. Gradients with respect to the
// grid coordinates are not provided.

#include <cmath>
#include <limits>

#include "dirac/core.hpp"
#include "dirac/detail/accumulate.hpp"
#include "dirac/parallel.hpp"

namespace dirac {

inline constexpr std::size_t max_target_rank = 3;

namespace detail {

template <std::floating_point T>
void check_deda_grids(const GridSet<T>& grids, const Extents& source_dims, const Extents& target_dims,
                      const char* what) {
    if (target_dims.empty() || target_dims.size() > max_target_rank)
        throw shape_mismatch(std::string(what) + ": target rank must be 1, 2 or 3");
    for (auto d : target_dims)
        if (d == 0) throw invalid_argument(std::string(what) + ": zero target extent");
    if (grids.spatial() != source_dims)
        throw shape_mismatch(std::string(what) + ": grid extents " + to_string(grids.spatial()) +
                             " differ from source extents " + to_string(source_dims));
    if (grids.coord_dims() != target_dims.size())
        throw shape_mismatch(std::string(what) + ": grids carry " + std::to_string(grids.coord_dims()) +
                             " coordinates but the target has rank " + std::to_string(target_dims.size()));
}

}  // namespace detail

template <std::floating_point T>
FeatureMap<T> deda_forward(const FeatureMap<T>& source, const GridSet<T>& grids, Kernel kernel,
                           const Extents& target_dims, const Exec& exec = Exec::from_env()) {
    detail::check_deda_grids(grids, source.dims(), target_dims, "deda_forward");
    return detail::scatter(source, grids, kernel, target_dims, exec);
}

template <std::floating_point T>
FeatureMap<T> deda_backward(const FeatureMap<T>& upstream, const GridSet<T>& grids, Kernel kernel,
                            const Extents& source_dims, const Exec& exec = Exec::from_env()) {
    detail::check_deda_grids(grids, source_dims, upstream.dims(), "deda_backward");
    return detail::gather(upstream, grids, kernel, exec);
}

/// Relative gap between <D(U), A> and <U, D^T(A)>.
template <std::floating_point T>
T adjoint_check(const FeatureMap<T>& source, const FeatureMap<T>& probe, const GridSet<T>& grids,
                Kernel kernel, const Exec& exec = Exec::from_env()) {
    if (probe.channels() != source.channels())
        throw shape_mismatch("adjoint_check: probe and source channel counts differ");
    const auto forward = deda_forward(source, grids, kernel, probe.dims(), exec);
    const auto backward = deda_backward(probe, grids, kernel, source.dims(), exec);
    const T lhs = inner_product(forward, probe);
    const T rhs = inner_product(source, backward);
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::numeric_limits<T>::min());
}

}  // namespace dirac
