// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/image.hpp"
#include "sltarch/scene.hpp"

#include <nlohmann/json.hpp>

#include <thread>

namespace sltarch {

inline constexpr int kTileSize               = 16;
inline constexpr double kAlphaMin            = 1.0 / 255.0;
inline constexpr double kAlphaMax            = 0.99;
inline constexpr double kTransmittanceCutoff = 1e-4;
inline constexpr double kCovarianceFloor     = 0.3; // px^2 added to the 2D covariance diagonal

/// Symmetric 2x2 matrix stored as (xx, xy, yy).
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    Sym2 inverse() const {
        const double d = det();
        return {yy / d, -xy / d, xx / d};
    }

    friend bool operator==(Sym2, Sym2) = default;
};

struct ProjectedGaussian {
    NodeId nid = 0;
    Vec2 mean2d;  // pixels
    Sym2 cov2d;   // pixels^2
    Sym2 conic;   // cov2d^-1
    double depth   = 0.0;
    double opacity = 0.0;
    Vec3 color;
};

/// EWA projection: cov2d = J W Sigma W^T J^T + 0.3 I, with W the camera
/// rotation and J the perspective Jacobian at the camera-space mean.
/// Returns nullopt when the mean is at or in front of the near plane.
inline std::optional<ProjectedGaussian> project_gaussian(const Gaussian &g, const Camera &cam, NodeId nid = 0) {
    const Mat3 w = cam.orientation.to_matrix();
    const Vec3 t = w * (g.mean - cam.position);
    if (t.z <= cam.near) return std::nullopt;
    const double f = cam.focal;
    const double iz = 1.0 / t.z;
    // Rows of J (third row is zero).
    const Vec3 j0{f * iz, 0.0, -f * t.x * iz * iz};
    const Vec3 j1{0.0, f * iz, -f * t.y * iz * iz};
    const Mat3 sigma = w * g.covariance() * w.transposed();
    const auto quad  = [&](Vec3 a, Vec3 b) {
        double s = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) s += a[r] * sigma(r, c) * b[c];
        return s;
    };
    ProjectedGaussian pg;
    pg.nid     = nid;
    pg.mean2d  = {f * t.x * iz + 0.5 * cam.width, f * t.y * iz + 0.5 * cam.height};
    pg.cov2d   = {quad(j0, j0) + kCovarianceFloor, quad(j0, j1), quad(j1, j1) + kCovarianceFloor};
    pg.conic   = pg.cov2d.inverse();
    pg.depth   = t.z;
    pg.opacity = g.opacity;
    pg.color   = g.color;
    return pg;
}

/// Projects the Gaussians of a cut, dropping those clipped by the near plane.
inline std::vector<ProjectedGaussian> project_cut(std::span<const Gaussian> gaussians, std::span<const NodeId> cut,
                                                  const Camera &cam) {
    std::vector<ProjectedGaussian> out;
    out.reserve(cut.size());
    for (NodeId nid : cut)
        if (auto pg = project_gaussian(gaussians[nid], cam, nid)) out.push_back(*pg);
    return out;
}

struct TileBins {
    int width   = 0; // image size the grid was built for
    int height  = 0;
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<std::vector<std::uint32_t>> lists; // row-major tiles, indices into the projection array

    const std::vector<std::uint32_t> &tile(int tx, int ty) const { return lists[static_cast<std::size_t>(ty) * tiles_x + tx]; }
    std::size_t entries() const {
        std::size_t n = 0;
        for (const auto &l : lists) n += l.size();
        return n;
    }

    friend bool operator==(const TileBins &, const TileBins &) = default;
};

/// Inclusive tile range covered by the 3-sigma box, or nullopt when the box
/// misses the grid.
struct TileRange {
    int x0, y0, x1, y1;
};

inline std::optional<TileRange> tile_range(const ProjectedGaussian &pg, int tiles_x, int tiles_y) {
    const double rx = 3.0 * std::sqrt(pg.cov2d.xx);
    const double ry = 3.0 * std::sqrt(pg.cov2d.yy);
    const double lox = std::floor((pg.mean2d.x - rx) / kTileSize), hix = std::floor((pg.mean2d.x + rx) / kTileSize);
    const double loy = std::floor((pg.mean2d.y - ry) / kTileSize), hiy = std::floor((pg.mean2d.y + ry) / kTileSize);
    if (!(hix >= 0.0 && hiy >= 0.0 && lox < tiles_x && loy < tiles_y)) return std::nullopt;
    return TileRange{static_cast<int>(std::max(lox, 0.0)), static_cast<int>(std::max(loy, 0.0)),
                     static_cast<int>(std::min<double>(hix, tiles_x - 1)), static_cast<int>(std::min<double>(hiy, tiles_y - 1))};
}

inline TileBins bin_gaussians(std::span<const ProjectedGaussian> projected, int width, int height) {
    if (width < 1 || height < 1) throw ParameterError("image dimensions must be >= 1");
    TileBins bins;
    bins.width   = width;
    bins.height  = height;
    bins.tiles_x = (width + kTileSize - 1) / kTileSize;
    bins.tiles_y = (height + kTileSize - 1) / kTileSize;
    bins.lists.resize(static_cast<std::size_t>(bins.tiles_x) * bins.tiles_y);
    for (std::size_t i = 0; i < projected.size(); ++i) {
        const auto range = tile_range(projected[i], bins.tiles_x, bins.tiles_y);
        if (!range) continue;
        for (int ty = range->y0; ty <= range->y1; ++ty)
            for (int tx = range->x0; tx <= range->x1; ++tx)
                bins.lists[static_cast<std::size_t>(ty) * bins.tiles_x + tx].push_back(static_cast<std::uint32_t>(i));
    }
    for (auto &list : bins.lists)
        std::sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
            return std::tie(projected[a].depth, projected[a].nid) < std::tie(projected[b].depth, projected[b].nid);
        });
    return bins;
}

/// Exponent -1/2 d^T conic d.
inline double gaussian_power(const ProjectedGaussian &pg, Vec2 p) {
    const double dx = p.x - pg.mean2d.x;
    const double dy = p.y - pg.mean2d.y;
    return -0.5 * (pg.conic.xx * dx * dx + 2.0 * pg.conic.xy * dx * dy + pg.conic.yy * dy * dy);
}

inline double splat_alpha(const ProjectedGaussian &pg, Vec2 p) {
    return std::min(kAlphaMax, pg.opacity * std::exp(gaussian_power(pg, p)));
}

/// Transparency test on the exponent: power >= ln(1 / (255 opacity)), which
/// equals opacity * exp(power) >= 1/255 without evaluating exp.
inline bool group_alpha_check(const ProjectedGaussian &pg, Vec2 group_center) {
    if (!(pg.opacity > 0.0)) return false;
    return gaussian_power(pg, group_center) >= std::log(1.0 / (255.0 * pg.opacity));
}

/// Per (Gaussian, 2x2 group) lane-activity counters.
struct DivergenceStats {
    std::uint64_t evaluations  = 0;
    std::uint64_t full_active  = 0; // all four lanes blend
    std::uint64_t full_skip    = 0; // no lane blends
    std::uint64_t mixed        = 0; // divergent
    std::uint64_t active_lanes = 0;

    std::uint64_t blend_cycles() const { return full_active + mixed; }
    double simd_utilization() const {
        const auto cycles = blend_cycles();
        return cycles == 0 ? 1.0 : static_cast<double>(active_lanes) / (4.0 * static_cast<double>(cycles));
    }

    DivergenceStats &operator+=(const DivergenceStats &o) {
        evaluations += o.evaluations;
        full_active += o.full_active;
        full_skip += o.full_skip;
        mixed += o.mixed;
        active_lanes += o.active_lanes;
        return *this;
    }

    friend bool operator==(const DivergenceStats &, const DivergenceStats &) = default;
};

inline nlohmann::json divergence_json(const DivergenceStats &s) {
    return {{"evaluations", s.evaluations},
            {"full_active", s.full_active},
            {"full_skip", s.full_skip},
            {"mixed", s.mixed},
            {"simd_utilization", s.simd_utilization()}};
}

enum class BlendMode { reference, grouped };

inline const char *to_string(BlendMode m) { return m == BlendMode::reference ? "reference" : "grouped"; }

inline BlendMode blend_mode_from_string(const std::string &s) {
    if (s == "reference") return BlendMode::reference;
    if (s == "grouped") return BlendMode::grouped;
    throw ParameterError("unknown blend mode '" + s + "' (expected reference or grouped)");
}

struct RenderResult {
    Image image;
    DivergenceStats divergence;
    std::vector<DivergenceStats> per_tile; // row-major, same grid as the bins
};

namespace detail {

struct Lane {
    double r = 0.0, g = 0.0, b = 0.0;
    double t   = 1.0;
    bool valid = true; // false for padding pixels beyond the image edge

    void blend(const ProjectedGaussian &pg, double alpha) {
        const double w = alpha * t;
        r += pg.color.x * w;
        g += pg.color.y * w;
        b += pg.color.z * w;
        t *= 1.0 - alpha;
    }
};

// Both blenders walk a tile in 2x2 groups. Padding pixels of odd-sized
// images are never written back.
template <typename GroupFn>
DivergenceStats blend_tile(const TileBins &bins, int tx, int ty, Image &img, GroupFn &&group_fn) {
    DivergenceStats stats;
    const int x_end = std::min(bins.width + (bins.width & 1), (tx + 1) * kTileSize);
    const int y_end = std::min(bins.height + (bins.height & 1), (ty + 1) * kTileSize);
    for (int gy = ty * kTileSize; gy < y_end; gy += 2)
        for (int gx = tx * kTileSize; gx < x_end; gx += 2) {
            std::array<Lane, 4> lanes;
            for (int l = 0; l < 4; ++l) lanes[l].valid = gx + (l & 1) < bins.width && gy + (l >> 1) < bins.height;
            group_fn(bins.tile(tx, ty), gx, gy, lanes, stats);
            for (int l = 0; l < 4; ++l)
                if (lanes[l].valid)
                    img.at(gx + (l & 1), gy + (l >> 1)) = {static_cast<float>(lanes[l].r), static_cast<float>(lanes[l].g),
                                                           static_cast<float>(lanes[l].b)};
        }
    return stats;
}

template <typename GroupFn>
RenderResult blend_tiles(const TileBins &bins, std::size_t threads, GroupFn group_fn) {
    RenderResult out;
    out.image = Image(bins.width, bins.height);
    out.per_tile.assign(bins.lists.size(), {});
    const std::size_t tiles = bins.lists.size();
    auto run                = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < tiles; i += stride)
            out.per_tile[i] = blend_tile(bins, static_cast<int>(i % bins.tiles_x), static_cast<int>(i / bins.tiles_x),
                                         out.image, group_fn);
    };
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(tiles, 1));
    if (threads == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
    }
    for (const auto &s : out.per_tile) out.divergence += s;
    return out;
}

inline Vec2 pixel_center(int x, int y) { return {x + 0.5, y + 0.5}; }

} // namespace detail

/// Per-pixel front-to-back blending. Divergence counters model 4-lane groups
/// executing in lockstep: a lane is active when its pixel is still
/// accumulating and the Gaussian's alpha reaches 1/255.
inline RenderResult blend_reference(const TileBins &bins, std::span<const ProjectedGaussian> projected,
                                    std::size_t threads = 1) {
    return detail::blend_tiles(bins, threads, [&](const std::vector<std::uint32_t> &list, int gx, int gy,
                                                  std::array<detail::Lane, 4> &lanes, DivergenceStats &stats) {
        std::array<bool, 4> alive{};
        for (int l = 0; l < 4; ++l) alive[l] = lanes[l].valid;
        for (std::uint32_t idx : list) {
            if (std::none_of(alive.begin(), alive.end(), [](bool a) { return a; })) break;
            const auto &pg = projected[idx];
            int active     = 0;
            for (int l = 0; l < 4; ++l) {
                if (!alive[l]) continue;
                const double alpha = splat_alpha(pg, detail::pixel_center(gx + (l & 1), gy + (l >> 1)));
                if (alpha < kAlphaMin) continue;
                ++active;
                lanes[l].blend(pg, alpha);
                if (lanes[l].t < kTransmittanceCutoff) alive[l] = false;
            }
            ++stats.evaluations;
            stats.active_lanes += active;
            if (active == 4) ++stats.full_active;
            else if (active == 0) ++stats.full_skip;
            else ++stats.mixed;
        }
    });
}

/// 2x2 group blending: one exponent check at the group center admits or
/// rejects a Gaussian for all four pixels, which then blend with their own
/// alpha. The group stops once all four transmittances are below the cutoff.
inline RenderResult blend_grouped(const TileBins &bins, std::span<const ProjectedGaussian> projected,
                                  std::size_t threads = 1) {
    return detail::blend_tiles(bins, threads, [&](const std::vector<std::uint32_t> &list, int gx, int gy,
                                                  std::array<detail::Lane, 4> &lanes, DivergenceStats &stats) {
        const Vec2 center{gx + 1.0, gy + 1.0};
        for (std::uint32_t idx : list) {
            if (std::all_of(lanes.begin(), lanes.end(), [](const detail::Lane &l) { return l.t < kTransmittanceCutoff; }))
                break;
            const auto &pg = projected[idx];
            ++stats.evaluations;
            if (!group_alpha_check(pg, center)) {
                ++stats.full_skip;
                continue;
            }
            ++stats.full_active;
            stats.active_lanes += 4;
            for (int l = 0; l < 4; ++l)
                lanes[l].blend(pg, splat_alpha(pg, detail::pixel_center(gx + (l & 1), gy + (l >> 1))));
        }
    });
}

inline RenderResult blend(BlendMode mode, const TileBins &bins, std::span<const ProjectedGaussian> projected,
                          std::size_t threads = 1) {
    return mode == BlendMode::reference ? blend_reference(bins, projected, threads) : blend_grouped(bins, projected, threads);
}

/// Projection, binning and blending of a cut in one call.
inline RenderResult render_cut(std::span<const Gaussian> gaussians, std::span<const NodeId> cut, const Camera &cam,
                               BlendMode mode, std::size_t threads = 1) {
    const auto projected = project_cut(gaussians, cut, cam);
    const auto bins      = bin_gaussians(projected, cam.width, cam.height);
    return blend(mode, bins, projected, threads);
}

} // namespace sltarch
