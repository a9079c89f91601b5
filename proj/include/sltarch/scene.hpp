// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/common.hpp"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sltarch {

struct Gaussian {
    Vec3 mean;
    Vec3 scale{1.0, 1.0, 1.0}; // standard deviations, world units
    Quat rotation;
    double opacity = 1.0;
    Vec3 color{1.0, 1.0, 1.0};

    double max_scale() const { return std::max({scale.x, scale.y, scale.z}); }

    // Sigma = R S S^T R^T
    Mat3 covariance() const {
        const Mat3 r = rotation.to_matrix();
        Mat3 rs      = r;
        for (int row = 0; row < 3; ++row) {
            rs(row, 0) *= scale.x;
            rs(row, 1) *= scale.y;
            rs(row, 2) *= scale.z;
        }
        return rs * rs.transposed();
    }

    friend bool operator==(const Gaussian &, const Gaussian &) = default;
};

/// Returns an empty string when valid, otherwise the first violated invariant.
inline std::string gaussian_violation(const Gaussian &g) {
    const auto finite3 = [](Vec3 v) {
        return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
    };
    if (!finite3(g.mean)) return "non-finite mean";
    if (!finite3(g.scale) || !(g.scale.x > 0.0 && g.scale.y > 0.0 && g.scale.z > 0.0))
        return "scale components must be finite and > 0";
    const double qn = g.rotation.norm();
    if (!std::isfinite(qn) || std::abs(qn - 1.0) > 1e-6) return "quaternion norm deviates from 1 by more than 1e-6";
    if (!(g.opacity >= 0.0 && g.opacity <= 1.0)) return "opacity outside [0,1]";
    for (int c = 0; c < 3; ++c)
        if (!(g.color[c] >= 0.0 && g.color[c] <= 1.0)) return "color channel outside [0,1]";
    return {};
}

struct Aabb {
    Vec3 min;
    Vec3 max;

    bool contains(const Aabb &o) const {
        return min.x <= o.min.x && min.y <= o.min.y && min.z <= o.min.z && o.max.x <= max.x &&
               o.max.y <= max.y && o.max.z <= max.z;
    }

    Vec3 center() const { return 0.5 * (min + max); }

    friend bool operator==(const Aabb &, const Aabb &) = default;
};

/// Box enclosing the 3-sigma ellipsoid: the exact axis-aligned extent of an
/// ellipsoid with covariance Sigma is sqrt(Sigma_ii) per axis.
inline Aabb gaussian_aabb(const Gaussian &g) {
    const Mat3 cov = g.covariance();
    const Vec3 half{3.0 * std::sqrt(cov(0, 0)), 3.0 * std::sqrt(cov(1, 1)), 3.0 * std::sqrt(cov(2, 2))};
    return {g.mean - half, g.mean + half};
}

struct LodNode {
    NodeId nid = 0;
    Gaussian gaussian;
    Aabb aabb;
    std::optional<NodeId> parent;
    std::vector<NodeId> children;

    bool is_leaf() const { return children.empty(); }

    friend bool operator==(const LodNode &, const LodNode &) = default;
};

/// Canonical LoD hierarchy. Immutable once built; `build` validates every
/// structural and attribute invariant and recomputes the node boxes.
class LodTree {
  public:
    LodTree() = default;

    /// `parents[i]` is the parent of node i (nullopt for the root). Children
    /// are ordered by ascending nid.
    static LodTree build(std::vector<Gaussian> gaussians, const std::vector<std::optional<NodeId>> &parents);

    std::span<const LodNode> nodes() const { return nodes_; }
    const LodNode &node(NodeId nid) const { return nodes_.at(nid); }
    NodeId root() const { return root_; }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    friend bool operator==(const LodTree &, const LodTree &) = default;

  private:
    std::vector<LodNode> nodes_;
    NodeId root_ = 0;
};

namespace detail {
inline std::string nid_message(NodeId nid, const std::string &what) {
    std::ostringstream os;
    os << "node " << nid << ": " << what;
    return os.str();
}
} // namespace detail

inline LodTree LodTree::build(std::vector<Gaussian> gaussians, const std::vector<std::optional<NodeId>> &parents) {
    if (gaussians.empty()) throw InvariantError("tree must contain at least one node");
    if (gaussians.size() != parents.size()) throw InvariantError("gaussian and parent arrays differ in length");
    const std::size_t n = gaussians.size();

    LodTree tree;
    tree.nodes_.resize(n);
    std::optional<NodeId> root;
    for (std::size_t i = 0; i < n; ++i) {
        const auto nid = static_cast<NodeId>(i);
        auto &node     = tree.nodes_[i];
        node.nid       = nid;
        node.gaussian  = gaussians[i];
        if (auto why = gaussian_violation(node.gaussian); !why.empty())
            throw InvariantError(detail::nid_message(nid, why));
        node.aabb   = gaussian_aabb(node.gaussian);
        node.parent = parents[i];
        if (!node.parent) {
            if (root) throw InvariantError(detail::nid_message(nid, "second root (node " + std::to_string(*root) + " has no parent either)"));
            root = nid;
        } else if (*node.parent >= n) {
            throw InvariantError(detail::nid_message(nid, "parent " + std::to_string(*node.parent) + " does not exist"));
        } else if (*node.parent == nid) {
            throw InvariantError(detail::nid_message(nid, "node is its own parent"));
        }
    }
    if (!root) throw InvariantError("tree has no root");
    tree.root_ = *root;
    for (std::size_t i = 0; i < n; ++i)
        if (const auto p = tree.nodes_[i].parent) tree.nodes_[*p].children.push_back(static_cast<NodeId>(i));

    // Reachability also rules out cycles: with n-1 parent links, n reachable
    // nodes from the root means the link graph is a tree.
    std::vector<NodeId> stack{tree.root_};
    std::size_t reached = 0;
    while (!stack.empty()) {
        const NodeId cur = stack.back();
        stack.pop_back();
        ++reached;
        const auto &node = tree.nodes_[cur];
        for (NodeId c : node.children) {
            const auto &child = tree.nodes_[c];
            if (!node.aabb.contains(child.aabb))
                throw InvariantError(detail::nid_message(c, "box not contained in parent " + std::to_string(cur)));
            if (!(child.gaussian.max_scale() < node.gaussian.max_scale()))
                throw InvariantError(detail::nid_message(c, "max scale not smaller than parent " + std::to_string(cur)));
            stack.push_back(c);
        }
    }
    if (reached != n) throw InvariantError("tree contains a cycle or nodes unreachable from the root");
    return tree;
}

/// Pinhole camera. `orientation` rotates world vectors into camera space,
/// where +z looks forward, +x right and +y down the image.
struct Camera {
    Vec3 position;
    Quat orientation;
    double focal   = 500.0;
    int width      = 256;
    int height     = 256;
    double near    = 0.1;
    double far     = 1000.0;

    Vec3 to_camera(Vec3 world) const { return orientation.to_matrix() * (world - position); }

    std::string violation() const {
        if (!(near > 0.0 && near < far)) return "require 0 < near < far";
        if (width < 1 || height < 1) return "width and height must be >= 1";
        if (!(focal > 0.0)) return "focal must be > 0";
        if (std::abs(orientation.norm() - 1.0) > 1e-6) return "orientation quaternion is not unit";
        return {};
    }

    void validate() const {
        if (auto why = violation(); !why.empty()) throw InvariantError("camera: " + why);
    }

    static Camera look_at(Vec3 eye, Vec3 target, Vec3 up, double focal, int width, int height, double near,
                          double far) {
        const Vec3 forward = normalized(target - eye);
        Vec3 right         = cross(forward, up);
        if (norm(right) < 1e-12) right = cross(forward, std::abs(forward.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 0, 1});
        right           = normalized(right);
        const Vec3 down = cross(forward, right);
        const Mat3 r{{right.x, right.y, right.z, down.x, down.y, down.z, forward.x, forward.y, forward.z}};
        Camera cam;
        cam.position    = eye;
        cam.orientation = Quat::from_matrix(r);
        cam.focal       = focal;
        cam.width       = width;
        cam.height      = height;
        cam.near        = near;
        cam.far         = far;
        cam.validate();
        return cam;
    }

    friend bool operator==(const Camera &, const Camera &) = default;
};

enum class Visibility { Outside, Visible };

/// Conservative view-frustum test: Outside only when all eight corners lie
/// strictly on the exterior side of one of the six planes.
inline Visibility frustum_test(const Aabb &box, const Camera &cam) {
    const Mat3 r     = cam.orientation.to_matrix();
    const double hw  = 0.5 * cam.width;
    const double hh  = 0.5 * cam.height;
    std::array<int, 6> outside{};
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3 world{(corner & 1) ? box.max.x : box.min.x, (corner & 2) ? box.max.y : box.min.y,
                         (corner & 4) ? box.max.z : box.min.z};
        const Vec3 p = r * (world - cam.position);
        outside[0] += p.z < cam.near;
        outside[1] += p.z > cam.far;
        outside[2] += cam.focal * p.x + hw * p.z < 0.0;
        outside[3] += -cam.focal * p.x + hw * p.z < 0.0;
        outside[4] += cam.focal * p.y + hh * p.z < 0.0;
        outside[5] += -cam.focal * p.y + hh * p.z < 0.0;
    }
    for (int count : outside)
        if (count == 8) return Visibility::Outside;
    return Visibility::Visible;
}

/// Pinhole-projected 3-sigma diameter in pixels: focal * 6 * max(scale) / depth,
/// with depth clamped to the near plane. A node whose mean is at or behind the
/// camera but whose box is still visible is infinitely coarse.
inline double projected_size(const Gaussian &g, const Aabb &box, const Camera &cam) {
    const double depth = cam.to_camera(g.mean).z;
    if (depth <= 0.0 && frustum_test(box, cam) == Visibility::Visible) return kInfinity;
    return cam.focal * 6.0 * g.max_scale() / std::max(depth, cam.near);
}

inline double projected_size(const LodNode &node, const Camera &cam) {
    return projected_size(node.gaussian, node.aabb, cam);
}

/// Reference LoD search. Top-down: prune a node outside the frustum, select
/// the first node on each path whose projection is <= epsilon (or the leaf),
/// otherwise descend. Returns selected nids in ascending order.
inline std::vector<NodeId> oracle_cut(const LodTree &tree, const Camera &cam, double epsilon) {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    std::vector<NodeId> cut;
    if (tree.empty()) return cut;
    std::vector<NodeId> stack{tree.root()};
    while (!stack.empty()) {
        const auto &node = tree.node(stack.back());
        stack.pop_back();
        if (frustum_test(node.aabb, cam) == Visibility::Outside) continue;
        if (node.is_leaf() || projected_size(node, cam) <= epsilon) {
            cut.push_back(node.nid);
            continue;
        }
        stack.insert(stack.end(), node.children.rbegin(), node.children.rend());
    }
    std::sort(cut.begin(), cut.end());
    return cut;
}

struct GeneratorParams {
    std::uint64_t seed       = 1;
    std::size_t node_budget  = 1000;
    std::size_t max_children = 32;
    std::size_t depth_limit  = 24;
    double shrink_factor     = 0.5;
    double root_scale        = 8.0;
};

namespace detail {

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Heavy-tailed child count: a leaf with fixed probability, otherwise a
// discretized Pareto draw (scale 2) truncated at max_children.
inline std::size_t draw_child_count(Rng &rng, std::size_t max_children) {
    constexpr double kLeafProbability = 0.3;
    constexpr double kTailIndex       = 1.2;
    constexpr double kMinInner        = 2.0;
    if (rng.uniform() < kLeafProbability) return 0;
    const double x = kMinInner * std::pow(1.0 - rng.uniform(), -1.0 / kTailIndex);
    return static_cast<std::size_t>(std::min<double>(static_cast<double>(max_children), std::floor(x)));
}

inline Gaussian place_child(Rng &rng, const Gaussian &parent, const Aabb &parent_box, double shrink) {
    Gaussian child;
    const double target_max = parent.max_scale() * shrink * rng.uniform(0.7, 1.0);
    const int major         = static_cast<int>(rng.uniform_int(0, 2));
    for (int axis = 0; axis < 3; ++axis) child.scale[axis] = axis == major ? target_max : target_max * rng.uniform(0.4, 1.0);
    child.rotation = rng.unit_quaternion();

    // Shrink uniformly until the child's box fits inside the parent's with a
    // small margin, then place the mean uniformly in the admissible region.
    const Vec3 parent_half = 0.5 * (parent_box.max - parent_box.min);
    Aabb box               = gaussian_aabb(child);
    double fit             = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const double half = 0.5 * (box.max[axis] - box.min[axis]);
        fit               = std::min(fit, 0.99 * parent_half[axis] / half);
    }
    if (fit < 1.0) child.scale = fit * child.scale;
    box = gaussian_aabb(child);
    for (int axis = 0; axis < 3; ++axis) {
        const double half = 0.5 * (box.max[axis] - box.min[axis]);
        const double lo   = parent_box.min[axis] + half;
        const double hi   = parent_box.max[axis] - half;
        child.mean[axis]  = lo + (hi - lo) * rng.uniform(0.001, 0.999);
    }
    if (!parent_box.contains(gaussian_aabb(child))) child.mean = parent.mean;

    child.opacity = rng.uniform(0.35, 0.95);
    for (int c = 0; c < 3; ++c) child.color[c] = clamp01(parent.color[c] + 0.12 * rng.normal());
    return child;
}

} // namespace detail

/// Deterministic synthetic LoD scene. Nodes are numbered in breadth-first
/// order, so children of a node carry consecutive ascending nids.
inline LodTree gen_synthetic_tree(const GeneratorParams &params) {
    if (params.node_budget < 1) throw ParameterError("node_budget must be >= 1");
    if (params.max_children < 1) throw ParameterError("max_children must be >= 1");
    if (params.depth_limit < 1) throw ParameterError("depth_limit must be >= 1");
    if (!(params.shrink_factor > 0.0 && params.shrink_factor < 1.0)) throw ParameterError("shrink_factor must be in (0,1)");
    if (!(params.root_scale > 0.0)) throw ParameterError("root_scale must be > 0");

    Rng rng(params.seed);
    std::vector<Gaussian> gaussians;
    std::vector<std::optional<NodeId>> parents;
    std::vector<Aabb> boxes;
    std::vector<std::size_t> depth;

    Gaussian root;
    for (int axis = 0; axis < 3; ++axis) root.scale[axis] = params.root_scale * rng.uniform(0.6, 1.0);
    root.rotation = rng.unit_quaternion();
    root.opacity  = rng.uniform(0.5, 0.95);
    for (int c = 0; c < 3; ++c) root.color[c] = rng.uniform(0.2, 0.8);
    gaussians.push_back(root);
    parents.push_back(std::nullopt);
    boxes.push_back(gaussian_aabb(root));
    depth.push_back(0);

    std::deque<NodeId> frontier{0};
    while (!frontier.empty() && gaussians.size() < params.node_budget) {
        const NodeId cur = frontier.front();
        frontier.pop_front();
        if (depth[cur] + 1 >= params.depth_limit) continue;
        std::size_t k = detail::draw_child_count(rng, params.max_children);
        if (cur == 0) k = std::max<std::size_t>(k, 2);
        k = std::min(k, params.node_budget - gaussians.size());
        for (std::size_t i = 0; i < k; ++i) {
            const Gaussian parent = gaussians[cur];
            const Aabb parent_box = boxes[cur];
            Gaussian child        = detail::place_child(rng, parent, parent_box, params.shrink_factor);
            const auto nid        = static_cast<NodeId>(gaussians.size());
            gaussians.push_back(child);
            parents.push_back(cur);
            boxes.push_back(gaussian_aabb(child));
            depth.push_back(depth[cur] + 1);
            frontier.push_back(nid);
        }
        // A childless last frontier node would end generation early; redraw it.
        if (frontier.empty() && gaussians.size() < params.node_budget) frontier.push_back(cur);
    }
    return LodTree::build(std::move(gaussians), parents);
}

/// Camera looking at the scene root from a given direction and distance
/// measured in multiples of the root box radius.
inline Camera framing_camera(const LodTree &tree, Vec3 direction, double distance_factor, int width = 256,
                             int height = 256, double focal = 300.0) {
    const Aabb box      = tree.node(tree.root()).aabb;
    const Vec3 center   = box.center();
    const double radius = 0.5 * norm(box.max - box.min);
    const Vec3 eye      = center + (distance_factor * radius) * normalized(direction);
    const double far    = (distance_factor + 2.0) * radius * 2.0;
    return Camera::look_at(eye, center, {0, 1, 0}, focal, width, height, 0.05, far);
}

} // namespace sltarch
