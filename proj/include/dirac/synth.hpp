#pragma once

// Synthetic phantoms: rim+/rim- lesion patches, the dipole forward model for
// susceptibility maps, and the patch augmentation pipeline.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <vector>

#include "dirac/core.hpp"
#include "dirac/random.hpp"
#include "dirac/sampling.hpp"

namespace dirac {

enum class LesionKind { RimPositive, RimNegative };

inline const char* to_string(LesionKind k) { return k == LesionKind::RimPositive ? "rim+" : "rim-"; }

inline LesionKind parse_lesion_kind(const std::string& s) {
    if (s == "rim+" || s == "RimPositive") return LesionKind::RimPositive;
    if (s == "rim-" || s == "RimNegative") return LesionKind::RimNegative;
    throw invalid_argument("unknown lesion kind '" + s + "'");
}

struct LesionSpec {
    LesionKind kind = LesionKind::RimPositive;
    /// (x, y) for 2D patches, (z, x, y) for volumes.
    std::vector<double> center;
    double radius = 6.0;
    double rim_width = 2.0;
    double rim_intensity = 1.0;
    double interior_intensity = 0.3;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(rim_width > 0) || !(radius > rim_width))
            throw invalid_argument("LesionSpec: need radius > rim_width > 0");
        if (kind == LesionKind::RimPositive && !(rim_intensity > interior_intensity))
            throw invalid_argument("LesionSpec: a rim+ lesion needs rim_intensity > interior_intensity");
        if (noise_sigma < 0) throw invalid_argument("LesionSpec: noise_sigma must be non-negative");
    }
};

/// Slice spacing over in-plane spacing for 0.75 x 0.75 x 3 mm voxels.
inline constexpr double default_axial_scale = 4.0;

template <std::floating_point T = double>
struct LesionPatch {
    FeatureMap<T> patch;
    LesionSpec label;
};

/// Background 0. Rim+: interior disk of radius `radius` plus an annulus
/// |r - radius| <= w/2 at rim intensity. Rim-: a disk of interior intensity
/// out to radius + w/2. Every edge is a one-pixel linear ramp (partial
/// volume), so the annulus core |r - radius| <= w/2 - 1/2 is exactly at rim
/// intensity. In volumes the axial
/// distance is stretched by `axial_scale`; the 2-pixel fit margin is checked
/// in-plane only.
template <std::floating_point T = double>
LesionPatch<T> generate_lesion(const LesionSpec& spec, const Extents& dims,
                               double axial_scale = default_axial_scale) {
    spec.validate();
    detail::check_spatial(dims, "generate_lesion", 2);
    if (spec.center.size() != dims.size())
        throw invalid_argument("generate_lesion: center rank does not match patch rank");
    const std::size_t plane_axis = dims.size() - 2;
    const double outer = spec.radius + spec.rim_width / 2;
    constexpr double margin = 2.0;
    for (std::size_t a = plane_axis; a < dims.size(); ++a) {
        const double c = spec.center[a];
        if (c - outer < margin || c + outer > static_cast<double>(dims[a]) - 1 - margin)
            throw invalid_argument("generate_lesion: lesion does not fit inside the patch");
    }
    if (plane_axis == 1 && (spec.center[0] < 0 || spec.center[0] > static_cast<double>(dims[0]) - 1))
        throw invalid_argument("generate_lesion: axial center outside the patch");

    FeatureMap<T> out(1, dims);
    Rng rng(spec.seed, 1);
    const std::size_t n = out.spatial_size();
    for (std::size_t loc = 0; loc < n; ++loc) {
        std::size_t rest = loc;
        double r2 = 0;
        for (std::size_t a = dims.size(); a-- > 0;) {
            double d = static_cast<double>(rest % dims[a]) - spec.center[a];
            rest /= dims[a];
            if (a < plane_axis) d *= axial_scale;
            r2 += d * d;
        }
        const double r = std::sqrt(r2);
        double v = 0;
        if (spec.kind == LesionKind::RimPositive) {
            const double rim = std::clamp(spec.rim_width / 2 + 0.5 - std::abs(r - spec.radius), 0.0, 1.0);
            const double core = std::clamp(spec.radius + 0.5 - r, 0.0, 1.0);
            v = rim * spec.rim_intensity + (1 - rim) * core * spec.interior_intensity;
        } else {
            v = spec.interior_intensity * std::clamp(outer + 0.5 - r, 0.0, 1.0);
        }
        if (spec.noise_sigma > 0) v += rng.normal(0.0, spec.noise_sigma);
        out.data()[loc] = static_cast<T>(v);
    }
    return {std::move(out), spec};
}

// ---------------------------------------------------------------------------
// Dipole forward model: b = chi * d + n, evaluated in k-space with
// D(k) = 1/3 - kz^2 / |k|^2 and D(0) = 0. The field axis z is the first
// spatial axis.

template <std::floating_point T = double>
struct QsmPhantom {
    FeatureMap<T> chi;
    FeatureMap<T> field;
    double noise_sigma = 0.0;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

inline double fft_frequency(std::size_t i, std::size_t n, double spacing) {
    const double k = i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    return k / (static_cast<double>(n) * spacing);
}

}  // namespace detail

inline double dipole_kernel_value(double kz, double kx, double ky) {
    const double k2 = kz * kz + kx * kx + ky * ky;
    if (k2 == 0) return 0.0;
    return 1.0 / 3.0 - kz * kz / k2;
}

template <std::floating_point T = double>
QsmPhantom<T> qsm_forward(const FeatureMap<T>& chi, double noise_sigma, std::uint64_t seed,
                          std::array<double, 3> voxel_size = {1.0, 1.0, 1.0}) {
    if (chi.rank() != 3) throw invalid_argument("qsm_forward: expected a 3D susceptibility map");
    if (noise_sigma < 0) throw invalid_argument("qsm_forward: noise_sigma must be non-negative");
    const auto& d = chi.dims();
    const std::size_t n = chi.spatial_size();

    std::vector<double> kernel(n);
    for (std::size_t z = 0, loc = 0; z < d[0]; ++z)
        for (std::size_t x = 0; x < d[1]; ++x)
            for (std::size_t y = 0; y < d[2]; ++y, ++loc)
                kernel[loc] = dipole_kernel_value(detail::fft_frequency(z, d[0], voxel_size[0]),
                                                  detail::fft_frequency(x, d[1], voxel_size[1]),
                                                  detail::fft_frequency(y, d[2], voxel_size[2]));

    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf) throw std::bad_alloc();
    fftw_plan fwd, inv;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        const int nz = static_cast<int>(d[0]), nx = static_cast<int>(d[1]), ny = static_cast<int>(d[2]);
        fwd = fftw_plan_dft_3d(nz, nx, ny, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_3d(nz, nx, ny, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    FeatureMap<T> field(chi.channels(), d);
    Rng rng(seed, 2);
    for (std::size_t c = 0; c < chi.channels(); ++c) {
        auto src = chi.channel(c);
        for (std::size_t i = 0; i < n; ++i) {
            buf[i][0] = static_cast<double>(src[i]);
            buf[i][1] = 0.0;
        }
        fftw_execute(fwd);
        for (std::size_t i = 0; i < n; ++i) {
            buf[i][0] *= kernel[i];
            buf[i][1] *= kernel[i];
        }
        fftw_execute(inv);
        auto dst = field.channel(c);
        for (std::size_t i = 0; i < n; ++i) {
            double v = buf[i][0] / static_cast<double>(n);
            if (noise_sigma > 0) v += rng.normal(0.0, noise_sigma);
            dst[i] = static_cast<T>(v);
        }
    }
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    fftw_free(buf);
    return {chi, std::move(field), noise_sigma};
}

// ---------------------------------------------------------------------------
// Augmentation for (C, D, H, W) patches; axis 0 is axial.

struct AugmentConfig {
    bool recenter = true;
    bool flip = true;
    std::pair<double, double> scale_range{0.95, 1.05};
    std::pair<double, double> rotation_deg_range{-5.0, 5.0};
    /// Blur sigmas are drawn from normal(mean, std) and truncated at 0.
    double blur_inplane_mean = 0.1, blur_inplane_std = 0.95;
    double blur_axial_mean = 0.03, blur_axial_std = 0.3;
    std::array<double, 3> voxel_size{3.0, 0.75, 0.75};
    std::uint64_t seed = 0;

    static AugmentConfig identity() {
        AugmentConfig c;
        c.recenter = false;
        c.flip = false;
        c.scale_range = {1.0, 1.0};
        c.rotation_deg_range = {0.0, 0.0};
        c.blur_inplane_mean = c.blur_inplane_std = 0.0;
        c.blur_axial_mean = c.blur_axial_std = 0.0;
        return c;
    }
};

inline int gaussian_kernel_radius(double sigma) { return static_cast<int>(std::floor(4 * sigma + 0.5)); }

template <std::floating_point T>
FeatureMap<T> flip(const FeatureMap<T>& patch, std::size_t axis) {
    if (axis >= patch.rank()) throw invalid_argument("flip: axis out of range");
    const auto& d = patch.dims();
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < d.size(); ++a) inner *= d[a];
    const std::size_t len = d[axis];
    const std::size_t outer = patch.size() / (len * inner);
    FeatureMap<T> out(patch.channels(), d);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < len; ++i)
            for (std::size_t k = 0; k < inner; ++k)
                out.data()[(o * len + (len - 1 - i)) * inner + k] = patch.data()[(o * len + i) * inner + k];
    return out;
}

/// Integer shift that moves the centre of mass of max(U, 0) (all channels)
/// to the geometric centre; vacated voxels are zero.
template <std::floating_point T>
FeatureMap<T> recenter(const FeatureMap<T>& patch) {
    const auto& d = patch.dims();
    const std::size_t rank = d.size(), n = patch.spatial_size();
    std::vector<double> moment(rank, 0.0);
    double mass = 0;
    for (std::size_t c = 0; c < patch.channels(); ++c) {
        auto ch = patch.channel(c);
        for (std::size_t loc = 0; loc < n; ++loc) {
            const double w = std::max(0.0, static_cast<double>(ch[loc]));
            if (w == 0) continue;
            std::size_t rest = loc;
            for (std::size_t a = rank; a-- > 0;) {
                moment[a] += w * static_cast<double>(rest % d[a]);
                rest /= d[a];
            }
            mass += w;
        }
    }
    if (mass == 0) return patch;
    std::vector<long> shift(rank);
    for (std::size_t a = 0; a < rank; ++a)
        shift[a] = std::lround((static_cast<double>(d[a]) - 1) / 2 - moment[a] / mass);

    FeatureMap<T> out(patch.channels(), d);
    for (std::size_t c = 0; c < patch.channels(); ++c) {
        auto src = patch.channel(c);
        auto dst = out.channel(c);
        for (std::size_t loc = 0; loc < n; ++loc) {
            std::size_t rest = loc, target = 0, stride = 1;
            bool inside = true;
            for (std::size_t a = rank; a-- > 0;) {
                const long moved = static_cast<long>(rest % d[a]) + shift[a];
                rest /= d[a];
                inside = inside && moved >= 0 && moved < static_cast<long>(d[a]);
                target += static_cast<std::size_t>(std::max(moved, 0L)) * stride;
                stride *= d[a];
            }
            if (inside) dst[target] = src[loc];
        }
    }
    return out;
}

/// Scale about the patch centre (all axes) and rotate in-plane, resampled
/// trilinearly; samples outside the patch are zero.
template <std::floating_point T>
FeatureMap<T> affine_resample(const FeatureMap<T>& patch, double scale, double rotation_deg,
                              std::array<double, 3> voxel_size = {3.0, 0.75, 0.75}) {
    if (patch.rank() != 3) throw invalid_argument("affine_resample: expected a 3D patch");
    if (!(scale > 0)) throw invalid_argument("affine_resample: scale must be positive");
    const auto& d = patch.dims();
    const double cz = (static_cast<double>(d[0]) - 1) / 2;
    const double cx = (static_cast<double>(d[1]) - 1) / 2;
    const double cy = (static_cast<double>(d[2]) - 1) / 2;
    const double a = rotation_deg * std::numbers::pi / 180.0;
    const double ca = std::cos(a), sa = std::sin(a);
    const double vx = voxel_size[1], vy = voxel_size[2];

    SamplingGrid<T> grid(3, d);
    for (std::size_t z = 0, loc = 0; z < d[0]; ++z)
        for (std::size_t x = 0; x < d[1]; ++x)
            for (std::size_t y = 0; y < d[2]; ++y, ++loc) {
                // Inverse map, in physical in-plane units.
                const double px = (static_cast<double>(x) - cx) * vx;
                const double py = (static_cast<double>(y) - cy) * vy;
                const double sx = (ca * px + sa * py) / scale;
                const double sy = (-sa * px + ca * py) / scale;
                grid.coord(0, loc) = static_cast<T>((static_cast<double>(z) - cz) / scale + cz);
                grid.coord(1, loc) = static_cast<T>(sx / vx + cx);
                grid.coord(2, loc) = static_cast<T>(sy / vy + cy);
            }
    return grid_sample(patch, grid, Kernel::Bilinear, Exec::sequential());
}

/// Separable Gaussian, radius floor(4 sigma + 0.5) per axis, replicated borders.
template <std::floating_point T>
FeatureMap<T> gaussian_blur(const FeatureMap<T>& patch, const std::vector<double>& sigmas) {
    if (sigmas.size() != patch.rank()) throw invalid_argument("gaussian_blur: one sigma per axis required");
    FeatureMap<T> cur = patch;
    const auto& d = patch.dims();
    for (std::size_t axis = 0; axis < d.size(); ++axis) {
        const double sigma = sigmas[axis];
        if (sigma < 0) throw invalid_argument("gaussian_blur: sigma must be non-negative");
        const int radius = gaussian_kernel_radius(sigma);
        if (sigma == 0 || radius == 0) continue;
        std::vector<double> w(2 * radius + 1);
        double total = 0;
        for (int t = -radius; t <= radius; ++t) total += w[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
        for (auto& v : w) v /= total;

        std::size_t inner = 1;
        for (std::size_t a = axis + 1; a < d.size(); ++a) inner *= d[a];
        const long len = static_cast<long>(d[axis]);
        const std::size_t outer = cur.size() / (d[axis] * inner);
        FeatureMap<T> next(cur.channels(), d);
        for (std::size_t o = 0; o < outer; ++o)
            for (long i = 0; i < len; ++i)
                for (std::size_t k = 0; k < inner; ++k) {
                    double acc = 0;
                    for (int t = -radius; t <= radius; ++t) {
                        const long src = std::clamp(i + t, 0L, len - 1);
                        acc += w[t + radius] * static_cast<double>(cur.data()[(o * d[axis] + src) * inner + k]);
                    }
                    next.data()[(o * d[axis] + i) * inner + k] = static_cast<T>(acc);
                }
        cur = std::move(next);
    }
    return cur;
}

/// Recentering, one random-axis flip, random scale/rotation with trilinear
/// resampling, then an anisotropic Gaussian blur. Deterministic per cfg.seed.
template <std::floating_point T>
FeatureMap<T> augment(const FeatureMap<T>& patch, const AugmentConfig& cfg) {
    if (patch.rank() != 3) throw invalid_argument("augment: expected a 3D patch");
    Rng rng(cfg.seed, 3);
    FeatureMap<T> out = cfg.recenter ? recenter(patch) : patch;
    const std::size_t axis = rng.below(3);
    if (cfg.flip) out = flip(out, axis);
    const double scale = rng.uniform(cfg.scale_range.first, cfg.scale_range.second);
    const double angle = rng.uniform(cfg.rotation_deg_range.first, cfg.rotation_deg_range.second);
    if (scale != 1.0 || angle != 0.0) out = affine_resample(out, scale, angle, cfg.voxel_size);
    const double s_axial = std::max(0.0, rng.normal(cfg.blur_axial_mean, cfg.blur_axial_std));
    const double s_x = std::max(0.0, rng.normal(cfg.blur_inplane_mean, cfg.blur_inplane_std));
    const double s_y = std::max(0.0, rng.normal(cfg.blur_inplane_mean, cfg.blur_inplane_std));
    return gaussian_blur(out, {s_axial, s_x, s_y});
}

}  // namespace dirac
