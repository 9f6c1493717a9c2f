#pragma once

// Dense containers shared by every operator in the library.
//
// Layout is row-major and channel-outermost: element (c, i, j) of a map with
// spatial extents (H, W) lives at c*H*W + i*W + j. Coordinates stored in a
// SamplingGrid are absolute pixel units indexed from 0. The first spatial axis
// is called "x" (rows) and the second "y" (columns) throughout.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirac {

class invalid_argument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class shape_mismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Extents = std::vector<std::size_t>;

inline std::size_t volume(const Extents& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string to_string(const Extents& dims) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << ')';
    return os.str();
}

namespace detail {

inline void check_spatial(const Extents& dims, const char* what, std::size_t min_rank = 1) {
    if (dims.size() < min_rank || dims.size() > 3)
        throw invalid_argument(std::string(what) + ": expected " + std::to_string(min_rank) +
                               " to 3 spatial extents, got " + std::to_string(dims.size()));
    for (auto d : dims)
        if (d == 0) throw invalid_argument(std::string(what) + ": zero extent in " + to_string(dims));
}

template <std::floating_point T>
void check_finite(std::span<const T> values, const char* what) {
    for (auto v : values)
        if (!std::isfinite(v)) throw invalid_argument(std::string(what) + ": non-finite value");
}

}  // namespace detail

/// Multi-channel dense map with 2 or 3 spatial extents.
template <std::floating_point T = double>
class FeatureMap {
public:
    using value_type = T;

    FeatureMap() = default;

    FeatureMap(std::size_t channels, Extents dims)
        : channels_(channels), dims_(std::move(dims)) {
        validate_shape();
        data_.assign(channels_ * volume(dims_), T{0});
    }

    FeatureMap(std::size_t channels, Extents dims, std::vector<T> data)
        : channels_(channels), dims_(std::move(dims)), data_(std::move(data)) {
        validate_shape();
        if (data_.size() != channels_ * volume(dims_))
            throw shape_mismatch("FeatureMap: data length " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(channels_) + "x" +
                                 to_string(dims_));
        detail::check_finite<T>(data_, "FeatureMap");
    }

    std::size_t channels() const noexcept { return channels_; }
    const Extents& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t spatial_size() const noexcept { return volume(dims_); }
    std::size_t size() const noexcept { return data_.size(); }

    /// Full shape with the channel count first.
    Extents shape() const {
        Extents s{channels_};
        s.insert(s.end(), dims_.begin(), dims_.end());
        return s;
    }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    std::span<T> channel(std::size_t c) {
        return std::span<T>(data_).subspan(c * spatial_size(), spatial_size());
    }
    std::span<const T> channel(std::size_t c) const {
        return std::span<const T>(data_).subspan(c * spatial_size(), spatial_size());
    }

    T& operator()(std::size_t c, std::size_t i, std::size_t j) {
        return data_[(c * dims_[0] + i) * dims_[1] + j];
    }
    T operator()(std::size_t c, std::size_t i, std::size_t j) const {
        return data_[(c * dims_[0] + i) * dims_[1] + j];
    }
    T& operator()(std::size_t c, std::size_t z, std::size_t i, std::size_t j) {
        return data_[((c * dims_[0] + z) * dims_[1] + i) * dims_[2] + j];
    }
    T operator()(std::size_t c, std::size_t z, std::size_t i, std::size_t j) const {
        return data_[((c * dims_[0] + z) * dims_[1] + i) * dims_[2] + j];
    }

    bool same_shape(const FeatureMap& other) const {
        return channels_ == other.channels_ && dims_ == other.dims_;
    }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    void validate_shape() const {
        if (channels_ == 0) throw invalid_argument("FeatureMap: channel count must be positive");
        detail::check_spatial(dims_, "FeatureMap");
    }

    std::size_t channels_ = 0;
    Extents dims_;
    std::vector<T> data_;
};

/// Per-location target coordinates, stored as Q planes over the spatial extents.
template <std::floating_point T = double>
class SamplingGrid {
public:
    SamplingGrid() = default;

    SamplingGrid(std::size_t coord_dims, Extents spatial)
        : coord_dims_(coord_dims), spatial_(std::move(spatial)) {
        validate_shape();
        coords_.assign(coord_dims_ * volume(spatial_), T{0});
    }

    SamplingGrid(std::size_t coord_dims, Extents spatial, std::vector<T> coords)
        : coord_dims_(coord_dims), spatial_(std::move(spatial)), coords_(std::move(coords)) {
        validate_shape();
        if (coords_.size() != coord_dims_ * volume(spatial_))
            throw shape_mismatch("SamplingGrid: coordinate length " + std::to_string(coords_.size()) +
                                 " does not match " + std::to_string(coord_dims_) + "x" +
                                 to_string(spatial_));
        detail::check_finite<T>(coords_, "SamplingGrid");
    }

    std::size_t coord_dims() const noexcept { return coord_dims_; }
    const Extents& spatial() const noexcept { return spatial_; }
    std::size_t locations() const noexcept { return volume(spatial_); }

    std::span<T> coords() noexcept { return coords_; }
    std::span<const T> coords() const noexcept { return coords_; }

    /// Coordinate plane q, one value per spatial location.
    std::span<T> plane(std::size_t q) {
        return std::span<T>(coords_).subspan(q * locations(), locations());
    }
    std::span<const T> plane(std::size_t q) const {
        return std::span<const T>(coords_).subspan(q * locations(), locations());
    }

    T coord(std::size_t q, std::size_t location) const { return coords_[q * locations() + location]; }
    T& coord(std::size_t q, std::size_t location) { return coords_[q * locations() + location]; }

    friend bool operator==(const SamplingGrid&, const SamplingGrid&) = default;

private:
    void validate_shape() const {
        if (coord_dims_ == 0) throw invalid_argument("SamplingGrid: coordinate count must be positive");
        detail::check_spatial(spatial_, "SamplingGrid");
    }

    std::size_t coord_dims_ = 0;
    Extents spatial_;
    std::vector<T> coords_;
};

/// Ordered, non-empty collection of grids sharing Q and spatial extents.
template <std::floating_point T = double>
class GridSet {
public:
    explicit GridSet(std::vector<SamplingGrid<T>> grids) : grids_(std::move(grids)) {
        if (grids_.empty()) throw invalid_argument("GridSet: at least one grid is required");
        for (const auto& g : grids_)
            if (g.coord_dims() != grids_.front().coord_dims() || g.spatial() != grids_.front().spatial())
                throw shape_mismatch("GridSet: grids disagree on coordinate count or extents");
    }

    GridSet(std::initializer_list<SamplingGrid<T>> grids)
        : GridSet(std::vector<SamplingGrid<T>>(grids)) {}

    std::size_t size() const noexcept { return grids_.size(); }
    std::size_t coord_dims() const noexcept { return grids_.front().coord_dims(); }
    const Extents& spatial() const noexcept { return grids_.front().spatial(); }

    const SamplingGrid<T>& operator[](std::size_t k) const { return grids_[k]; }
    auto begin() const noexcept { return grids_.begin(); }
    auto end() const noexcept { return grids_.end(); }

    /// Concatenation; order of `this` first.
    GridSet joined(const GridSet& other) const {
        auto all = grids_;
        all.insert(all.end(), other.grids_.begin(), other.grids_.end());
        return GridSet(std::move(all));
    }

private:
    std::vector<SamplingGrid<T>> grids_;
};

enum class Kernel { Integer, Bilinear };

inline const char* to_string(Kernel k) { return k == Kernel::Integer ? "integer" : "bilinear"; }

inline Kernel parse_kernel(const std::string& name) {
    if (name == "integer") return Kernel::Integer;
    if (name == "bilinear") return Kernel::Bilinear;
    throw invalid_argument("unknown kernel '" + name + "' (expected integer or bilinear)");
}

/// Identity coordinates: plane q holds the index along spatial axis q.
template <std::floating_point T = double>
SamplingGrid<T> mesh_grid(const Extents& dims) {
    detail::check_spatial(dims, "mesh_grid");
    SamplingGrid<T> grid(dims.size(), dims);
    const std::size_t n = grid.locations();
    for (std::size_t loc = 0; loc < n; ++loc) {
        std::size_t rest = loc;
        for (std::size_t q = dims.size(); q-- > 0;) {
            grid.coord(q, loc) = static_cast<T>(rest % dims[q]);
            rest /= dims[q];
        }
    }
    return grid;
}

/// Left-to-right sum. Kept sequential so every caller sees the same rounding.
template <std::floating_point T>
T deterministic_sum(std::span<const T> values) {
    T acc{0};
    for (auto v : values) {
        if (!std::isfinite(v)) throw invalid_argument("deterministic_sum: non-finite value");
        acc += v;
    }
    return acc;
}

template <std::floating_point T>
T deterministic_sum(const std::vector<T>& values) {
    return deterministic_sum(std::span<const T>(values));
}

/// Inner product over the flat data of two equally shaped maps.
template <std::floating_point T>
T inner_product(const FeatureMap<T>& a, const FeatureMap<T>& b) {
    if (!a.same_shape(b)) throw shape_mismatch("inner_product: shapes differ");
    std::vector<T> terms(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) terms[i] = a.data()[i] * b.data()[i];
    return deterministic_sum(std::span<const T>(terms));
}

}  // namespace dirac
