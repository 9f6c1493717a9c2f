#pragma once

// Sampling kernels K(g, n): weight of integer cell n for real coordinate g.
//   Integer:  1 if floor(g + 0.5) == n else 0
//   Bilinear: max(0, 1 - |g - n|)

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>

#include "dirac/core.hpp"

namespace dirac {

template <std::floating_point T>
T kernel_eval(Kernel kernel, T g, long n) {
    if (!std::isfinite(g)) throw invalid_argument("kernel_eval: non-finite coordinate");
    if (kernel == Kernel::Integer) return std::floor(g + T(0.5)) == static_cast<T>(n) ? T{1} : T{0};
    return std::max(T{0}, T{1} - std::abs(g - static_cast<T>(n)));
}

/// dK/dg. Zero for the integer kernel and at bilinear kinks.
template <std::floating_point T>
T kernel_derivative(Kernel kernel, T g, long n) {
    if (!std::isfinite(g)) throw invalid_argument("kernel_derivative: non-finite coordinate");
    if (kernel == Kernel::Integer) return T{0};
    const T d = g - static_cast<T>(n);
    const T a = std::abs(d);
    if (a == T{0} || a >= T{1}) return T{0};
    return d > T{0} ? T{-1} : T{1};
}

namespace detail {

template <std::floating_point T>
struct Tap {
    std::size_t index;
    T weight;
    T slope;
};

/// In-range cells with possibly nonzero weight for coordinate g on an axis of
/// length `extent`. Weights are computed with exactly the kernel_eval formula.
template <std::floating_point T>
struct Taps {
    std::array<Tap<T>, 2> tap{};
    int count = 0;

    void push(std::size_t index, T weight, T slope) { tap[count++] = {index, weight, slope}; }
};

template <std::floating_point T>
Taps<T> kernel_taps(Kernel kernel, T g, std::size_t extent) {
    Taps<T> out;
    const T hi = static_cast<T>(extent);
    if (!(g > T{-1}) || !(g < hi)) return out;
    if (kernel == Kernel::Integer) {
        const T r = std::floor(g + T(0.5));
        if (r >= T{0} && r < hi) out.push(static_cast<std::size_t>(r), T{1}, T{0});
        return out;
    }
    const T f = std::floor(g);
    const long n0 = static_cast<long>(f);
    for (long n = n0; n <= n0 + 1; ++n) {
        if (n < 0 || n >= static_cast<long>(extent)) continue;
        const T w = std::max(T{0}, T{1} - std::abs(g - static_cast<T>(n)));
        out.push(static_cast<std::size_t>(n), w, kernel_derivative(kernel, g, n));
    }
    return out;
}

}  // namespace detail
}  // namespace dirac
