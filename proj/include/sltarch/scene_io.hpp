// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/scene.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>

namespace sltarch {

inline constexpr const char *kSceneFormat = "lodscene/1";

namespace detail {

using nlohmann::json;

inline json vec_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }
inline json quat_json(Quat q) { return json::array({q.w, q.x, q.y, q.z}); }

inline std::string location(const std::string &text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col) + " (offset " + std::to_string(byte) + ")";
}

inline json parse_text(const std::string &text, const std::string &source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(source + ": " + location(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
    }
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

template <std::size_t N>
std::array<double, N> number_array(const json &j, const char *key, const std::string &where) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->size() != N)
        throw ParseError(where + ": field '" + key + "' must be an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        if (!(*it)[i].is_number()) throw ParseError(where + ": field '" + key + "' must contain numbers");
        out[i] = (*it)[i].get<double>();
    }
    return out;
}

inline double number_field(const json &j, const char *key, const std::string &where) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
    return it->get<double>();
}

inline std::int64_t integer_field(const json &j, const char *key, const std::string &where) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) throw ParseError(where + ": field '" + key + "' must be an integer");
    return it->get<std::int64_t>();
}

} // namespace detail

inline nlohmann::json scene_to_json(const LodTree &tree) {
    using detail::json;
    json nodes = json::array();
    for (const auto &node : tree.nodes()) {
        const auto &g = node.gaussian;
        nodes.push_back({{"nid", node.nid},
                         {"parent", node.parent ? json(*node.parent) : json(nullptr)},
                         {"mean", detail::vec_json(g.mean)},
                         {"scale", detail::vec_json(g.scale)},
                         {"rot", detail::quat_json(g.rotation)},
                         {"opacity", g.opacity},
                         {"color", detail::vec_json(g.color)}});
    }
    return {{"format", kSceneFormat}, {"nodes", std::move(nodes)}, {"root", tree.root()}};
}

/// Parses and validates a scene document. Boxes are recomputed, never read.
inline LodTree scene_from_json(const nlohmann::json &doc) {
    if (!doc.is_object()) throw ParseError("scene: top level must be an object");
    const auto fmt = doc.find("format");
    if (fmt == doc.end() || !fmt->is_string() || fmt->get<std::string>() != kSceneFormat)
        throw FormatError(std::string("scene: expected format \"") + kSceneFormat + "\"");
    const auto nodes = doc.find("nodes");
    if (nodes == doc.end() || !nodes->is_array() || nodes->empty()) throw ParseError("scene: 'nodes' must be a non-empty array");
    const std::size_t n = nodes->size();

    std::vector<Gaussian> gaussians(n);
    std::vector<std::optional<NodeId>> parents(n);
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const auto &jn = (*nodes)[i];
        const std::string where = "scene node #" + std::to_string(i);
        if (!jn.is_object()) throw ParseError(where + ": must be an object");
        const auto nid = detail::integer_field(jn, "nid", where);
        if (nid < 0 || static_cast<std::size_t>(nid) >= n)
            throw InvariantError(detail::nid_message(static_cast<NodeId>(nid), "nid outside dense range [0, " + std::to_string(n) + ")"));
        if (seen[nid]) throw InvariantError(detail::nid_message(static_cast<NodeId>(nid), "duplicate nid"));
        seen[nid] = true;

        const auto pit = jn.find("parent");
        if (pit == jn.end()) throw ParseError(where + ": missing field 'parent'");
        if (!pit->is_null()) {
            if (!pit->is_number_integer()) throw ParseError(where + ": 'parent' must be an integer or null");
            const auto p = pit->get<std::int64_t>();
            if (p < 0 || static_cast<std::size_t>(p) >= n)
                throw InvariantError(detail::nid_message(static_cast<NodeId>(nid), "parent " + std::to_string(p) + " does not exist"));
            parents[nid] = static_cast<NodeId>(p);
        }

        Gaussian g;
        const auto mean  = detail::number_array<3>(jn, "mean", where);
        const auto scale = detail::number_array<3>(jn, "scale", where);
        const auto rot   = detail::number_array<4>(jn, "rot", where);
        const auto color = detail::number_array<3>(jn, "color", where);
        g.mean           = {mean[0], mean[1], mean[2]};
        g.scale          = {scale[0], scale[1], scale[2]};
        g.rotation       = {rot[0], rot[1], rot[2], rot[3]};
        g.opacity        = detail::number_field(jn, "opacity", where);
        g.color          = {color[0], color[1], color[2]};
        gaussians[nid]   = g;
    }

    LodTree tree = LodTree::build(std::move(gaussians), parents);
    const auto root = detail::integer_field(doc, "root", "scene");
    if (root < 0 || static_cast<NodeId>(root) != tree.root())
        throw InvariantError("scene: declared root " + std::to_string(root) + " is not the parentless node " + std::to_string(tree.root()));
    return tree;
}

inline void save_scene(const LodTree &tree, const std::filesystem::path &path) {
    detail::write_file(path, scene_to_json(tree).dump(1) + "\n");
}

inline LodTree load_scene(const std::filesystem::path &path) {
    return scene_from_json(detail::parse_text(detail::read_file(path), path.string()));
}

inline nlohmann::json camera_to_json(const Camera &cam) {
    return {{"pos", detail::vec_json(cam.position)},
            {"rot", detail::quat_json(cam.orientation)},
            {"focal", cam.focal},
            {"width", cam.width},
            {"height", cam.height},
            {"near", cam.near},
            {"far", cam.far}};
}

inline Camera camera_from_json(const nlohmann::json &doc) {
    if (!doc.is_object()) throw ParseError("camera: top level must be an object");
    Camera cam;
    const auto pos  = detail::number_array<3>(doc, "pos", "camera");
    const auto rot  = detail::number_array<4>(doc, "rot", "camera");
    cam.position    = {pos[0], pos[1], pos[2]};
    cam.orientation = {rot[0], rot[1], rot[2], rot[3]};
    cam.focal       = detail::number_field(doc, "focal", "camera");
    cam.width       = static_cast<int>(detail::integer_field(doc, "width", "camera"));
    cam.height      = static_cast<int>(detail::integer_field(doc, "height", "camera"));
    cam.near        = detail::number_field(doc, "near", "camera");
    cam.far         = detail::number_field(doc, "far", "camera");
    cam.validate();
    return cam;
}

inline void save_camera(const Camera &cam, const std::filesystem::path &path) {
    detail::write_file(path, camera_to_json(cam).dump(1) + "\n");
}

inline Camera load_camera(const std::filesystem::path &path) {
    return camera_from_json(detail::parse_text(detail::read_file(path), path.string()));
}

} // namespace sltarch
