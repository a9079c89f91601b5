// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/sltarch.hpp"

#include <vector>

namespace sltarch::testing {

inline Gaussian iso(Vec3 mean, double scale, double opacity = 0.8, Vec3 color = {0.5, 0.5, 0.5}) {
    Gaussian g;
    g.mean    = mean;
    g.scale   = {scale, scale, scale};
    g.opacity = opacity;
    g.color   = color;
    return g;
}

/// Concentric tree: every node sits at `center` with scale 10 * 0.5^depth.
inline LodTree concentric_tree(const std::vector<std::optional<NodeId>> &parents, Vec3 center = {0, 0, 50}) {
    std::vector<std::size_t> depth(parents.size(), 0);
    std::vector<Gaussian> gs;
    for (std::size_t i = 0; i < parents.size(); ++i) {
        if (parents[i]) depth[i] = depth[*parents[i]] + 1;
        gs.push_back(iso(center, 10.0 * std::pow(0.5, static_cast<double>(depth[i]))));
    }
    return LodTree::build(std::move(gs), parents);
}

inline LodTree chain_tree(std::size_t n) {
    std::vector<std::optional<NodeId>> parents(n);
    for (std::size_t i = 1; i < n; ++i) parents[i] = static_cast<NodeId>(i - 1);
    return concentric_tree(parents);
}

/// Two coarse nodes near the camera, one distant node:
///   0 root (0,0,20) s=10; 1 (-3,0,6), 2 (0,0,40), 3 (3,0,6) s=1;
///   4,5 under 1; 6 under 2; 7,8 under 3; leaves s=0.3.
inline LodTree near_far_tree() {
    std::vector<Gaussian> gs{iso({0, 0, 20}, 10),    iso({-3, 0, 6}, 1),   iso({0, 0, 40}, 1),
                             iso({3, 0, 6}, 1),      iso({-4, 0, 6}, 0.3), iso({-2, 0, 6}, 0.3),
                             iso({0, 0, 40}, 0.3),   iso({2, 0, 6}, 0.3),  iso({4, 0, 6}, 0.3)};
    std::vector<std::optional<NodeId>> parents{std::nullopt, 0, 0, 0, 1, 1, 2, 3, 3};
    return LodTree::build(std::move(gs), parents);
}

inline Camera origin_camera(double focal = 100.0, int w = 200, int h = 200) {
    Camera cam;
    cam.focal  = focal;
    cam.width  = w;
    cam.height = h;
    cam.near   = 0.1;
    cam.far    = 100.0;
    return cam;
}

/// R -> A, B; A -> a1..a3; B -> b1..b3, all leaves.
inline LodTree two_subtree_tree() {
    return concentric_tree({std::nullopt, 0, 0, 1, 1, 1, 2, 2, 2});
}

inline LodTree random_tree(std::uint64_t seed, std::size_t nodes, std::size_t max_children = 32) {
    GeneratorParams p;
    p.seed         = seed;
    p.node_budget  = nodes;
    p.max_children = max_children;
    return gen_synthetic_tree(p);
}

/// Deterministic camera around the scene, sometimes inside or facing away.
inline Camera random_camera(const LodTree &tree, Rng &rng, int w = 128, int h = 128) {
    const Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
    const double dist = rng.uniform(0.3, 4.0);
    Camera cam        = framing_camera(tree, norm(dir) > 1e-9 ? dir : Vec3{0, 0, 1}, dist, w, h, rng.uniform(80.0, 400.0));
    if (rng.uniform() < 0.1) cam.orientation = rng.unit_quaternion();
    return cam;
}

} // namespace sltarch::testing
