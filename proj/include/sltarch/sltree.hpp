// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/scene.hpp"

#include <deque>
#include <numeric>
#include <string>
#include <vector>

namespace sltarch {

/// Largest subtree size limit representable in the 16-bit record fields.
inline constexpr std::size_t kMaxTau = 65535;

struct SubtreeNodeRecord {
    NodeId nid = 0;
    Aabb aabb;
    std::uint32_t remaining = 0; // in-subtree DFS descendants; skip = slot + remaining + 1
    std::optional<SubtreeId> child_sid_first;
    std::uint32_t child_sid_count = 0;
    bool is_boundary              = false; // some children live in other subtrees
    bool is_leaf                  = false; // no children in the LoD tree at all

    friend bool operator==(const SubtreeNodeRecord &, const SubtreeNodeRecord &) = default;
};

struct Subtree {
    SubtreeId sid = 0;
    std::vector<SubtreeNodeRecord> records; // DFS order over a forest of sibling roots
    std::optional<NodeId> parent_node;

    std::size_t size() const { return records.size(); }

    friend bool operator==(const Subtree &, const Subtree &) = default;
};

struct NodeSlot {
    SubtreeId sid      = 0;
    std::uint32_t slot = 0;

    friend bool operator==(NodeSlot, NodeSlot) = default;
};

/// A subtree before final numbering: its forest roots (in sibling order) and
/// its members in collection order.
struct ProvisionalSubtree {
    std::vector<NodeId> roots;
    std::vector<NodeId> nodes;
    std::optional<NodeId> parent_node;

    std::size_t size() const { return nodes.size(); }

    friend bool operator==(const ProvisionalSubtree &, const ProvisionalSubtree &) = default;
};

struct SLTree {
    std::vector<Subtree> subtrees; // indexed by sid
    SubtreeId root_sid = 0;
    std::size_t tau_s  = 0;
    std::vector<NodeSlot> node_index; // nid -> (sid, slot)
    std::vector<Gaussian> gaussians;  // payload array indexed by nid

    std::size_t node_count() const { return node_index.size(); }
    const SubtreeNodeRecord &record(NodeId nid) const {
        const auto at = node_index.at(nid);
        return subtrees[at.sid].records[at.slot];
    }

    friend bool operator==(const SLTree &, const SLTree &) = default;
};

/// BFS grouping. Each dequeued root collects up to tau_s nodes breadth-first;
/// children of collected nodes that did not fit become new roots, enqueued in
/// discovery order.
inline std::vector<ProvisionalSubtree> initial_partition(const LodTree &tree, std::size_t tau_s) {
    if (tau_s < 1) throw ParameterError("tau_s must be >= 1");
    std::vector<ProvisionalSubtree> out;
    if (tree.empty()) return out;

    std::deque<NodeId> roots{tree.root()};
    std::deque<NodeId> bfs;
    while (!roots.empty()) {
        const NodeId start = roots.front();
        roots.pop_front();

        ProvisionalSubtree sub;
        sub.roots       = {start};
        sub.parent_node = tree.node(start).parent;
        bfs.assign({start});
        while (!bfs.empty() && sub.nodes.size() < tau_s) {
            const NodeId cur = bfs.front();
            bfs.pop_front();
            sub.nodes.push_back(cur);
            for (NodeId c : tree.node(cur).children) bfs.push_back(c);
        }
        // Whatever is still waiting in the BFS queue is exactly the set of
        // uncollected immediate children, already in discovery order.
        roots.insert(roots.end(), bfs.begin(), bfs.end());
        out.push_back(std::move(sub));
    }
    return out;
}

/// Greedy left-to-right merge of small sibling subtrees: s joins the running
/// group iff it hangs off the same parent node, s.size <= tau_s/2 and the
/// merged size stays within tau_s. Otherwise the group is emitted and s starts
/// a new one.
inline std::vector<ProvisionalSubtree> merge_subtrees(const std::vector<ProvisionalSubtree> &provisional, std::size_t tau_s) {
    if (tau_s < 1) throw ParameterError("tau_s must be >= 1");
    std::vector<ProvisionalSubtree> out;
    std::optional<ProvisionalSubtree> group;
    for (const auto &s : provisional) {
        const bool mergeable = group && group->parent_node && s.parent_node == group->parent_node &&
                               2 * s.size() <= tau_s && s.size() + group->size() <= tau_s;
        if (mergeable) {
            group->roots.insert(group->roots.end(), s.roots.begin(), s.roots.end());
            group->nodes.insert(group->nodes.end(), s.nodes.begin(), s.nodes.end());
        } else {
            if (group) out.push_back(std::move(*group));
            group = s;
        }
    }
    if (group) out.push_back(std::move(*group));
    return out;
}

inline void validate_sltree(const SLTree &sl, const LodTree &tree);

/// Offline partitioning: initial BFS grouping, sibling merging, DFS record
/// layout, and BFS numbering of subtrees so that the child subtrees of every
/// boundary node occupy a contiguous SID range.
inline SLTree build_sltree(const LodTree &tree, std::size_t tau_s) {
    if (tau_s < 1) throw ParameterError("tau_s must be >= 1");
    if (tau_s > kMaxTau) throw ParameterError("tau_s must be <= 65535");
    if (tree.empty()) throw ParameterError("cannot partition an empty tree");

    const auto groups   = merge_subtrees(initial_partition(tree, tau_s), tau_s);
    const std::size_t n = tree.size();

    std::vector<std::uint32_t> group_of(n);
    std::vector<std::vector<std::uint32_t>> child_groups(n);
    for (std::uint32_t gi = 0; gi < groups.size(); ++gi) {
        for (NodeId nid : groups[gi].nodes) group_of[nid] = gi;
        if (groups[gi].parent_node) child_groups[*groups[gi].parent_node].push_back(gi);
    }

    SLTree sl;
    sl.tau_s    = tau_s;
    sl.root_sid = 0;
    sl.node_index.resize(n);
    sl.gaussians.reserve(n);
    for (const auto &node : tree.nodes()) sl.gaussians.push_back(node.gaussian);
    sl.subtrees.resize(groups.size());

    std::vector<std::uint32_t> in_subtree_size(n, 0);
    std::vector<SubtreeId> sid_of_group(groups.size(), 0);
    std::deque<std::uint32_t> pending{group_of[tree.root()]};
    SubtreeId next_sid = 1;
    std::vector<NodeId> order;
    std::vector<NodeId> stack;
    while (!pending.empty()) {
        const std::uint32_t gi = pending.front();
        pending.pop_front();
        const auto &group = groups[gi];
        const SubtreeId sid = sid_of_group[gi];

        // Preorder DFS of the forest restricted to this group's members.
        order.clear();
        for (NodeId r : group.roots) {
            stack.assign({r});
            while (!stack.empty()) {
                const NodeId cur = stack.back();
                stack.pop_back();
                order.push_back(cur);
                const auto &children = tree.node(cur).children;
                for (auto it = children.rbegin(); it != children.rend(); ++it)
                    if (group_of[*it] == gi) stack.push_back(*it);
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            std::uint32_t count = 1;
            for (NodeId c : tree.node(*it).children)
                if (group_of[c] == gi) count += in_subtree_size[c];
            in_subtree_size[*it] = count;
        }

        Subtree &sub    = sl.subtrees[sid];
        sub.sid         = sid;
        sub.parent_node = group.parent_node;
        sub.records.reserve(order.size());
        for (std::uint32_t slot = 0; slot < order.size(); ++slot) {
            const auto &node = tree.node(order[slot]);
            SubtreeNodeRecord rec;
            rec.nid       = node.nid;
            rec.aabb      = node.aabb;
            rec.remaining = in_subtree_size[node.nid] - 1;
            rec.is_leaf   = node.is_leaf();
            const auto &kids = child_groups[node.nid];
            if (!kids.empty()) {
                rec.is_boundary     = true;
                rec.child_sid_first = next_sid;
                rec.child_sid_count = static_cast<std::uint32_t>(kids.size());
                for (std::uint32_t k : kids) {
                    sid_of_group[k] = next_sid++;
                    pending.push_back(k);
                }
            }
            sub.records.push_back(rec);
            sl.node_index[node.nid] = {sid, slot};
        }
    }
    validate_sltree(sl, tree);
    return sl;
}

namespace detail {
inline std::string sid_message(SubtreeId sid, const std::string &what) {
    return "subtree " + std::to_string(sid) + ": " + what;
}
} // namespace detail

/// Checks every SLTree invariant against the source tree; throws
/// InvariantError naming the offending subtree and/or node.
inline void validate_sltree(const SLTree &sl, const LodTree &tree) {
    const std::size_t n = tree.size();
    if (sl.node_index.size() != n) throw InvariantError("node_index size differs from tree node count");
    if (sl.root_sid >= sl.subtrees.size()) throw InvariantError("root_sid out of range");

    std::vector<bool> seen(n, false);
    std::size_t total = 0;
    struct Span {
        NodeId nid;
        std::uint32_t end;
    };
    std::vector<Span> open;
    for (SubtreeId sid = 0; sid < sl.subtrees.size(); ++sid) {
        const Subtree &sub = sl.subtrees[sid];
        if (sub.sid != sid) throw InvariantError(detail::sid_message(sid, "stored sid mismatch"));
        if (sub.records.empty() || sub.records.size() > sl.tau_s)
            throw InvariantError(detail::sid_message(sid, "size " + std::to_string(sub.records.size()) + " outside [1, tau_s]"));
        total += sub.records.size();
        open.clear();
        for (std::uint32_t slot = 0; slot < sub.records.size(); ++slot) {
            const auto &rec = sub.records[slot];
            if (rec.nid >= n) throw InvariantError(detail::sid_message(sid, "unknown nid " + std::to_string(rec.nid)));
            if (seen[rec.nid]) throw InvariantError(detail::sid_message(sid, detail::nid_message(rec.nid, "stored twice")));
            seen[rec.nid] = true;
            if (!(sl.node_index[rec.nid] == NodeSlot{sid, slot}))
                throw InvariantError(detail::nid_message(rec.nid, "node_index disagrees with record position"));
            if (slot + rec.remaining + 1 > sub.records.size())
                throw InvariantError(detail::sid_message(sid, detail::nid_message(rec.nid, "remaining overruns subtree")));
            const auto &node = tree.node(rec.nid);
            if (!(rec.aabb == node.aabb)) throw InvariantError(detail::nid_message(rec.nid, "record box differs from node box"));
            if (rec.is_leaf != node.is_leaf()) throw InvariantError(detail::nid_message(rec.nid, "leaf flag mismatch"));

            while (!open.empty() && open.back().end < slot) open.pop_back();
            if (open.empty()) {
                if (node.parent != sub.parent_node)
                    throw InvariantError(detail::sid_message(sid, detail::nid_message(rec.nid, "forest root does not hang off the subtree's parent node")));
            } else {
                if (node.parent != open.back().nid)
                    throw InvariantError(detail::sid_message(sid, detail::nid_message(rec.nid, "not in its parent's DFS span")));
                if (slot + rec.remaining > open.back().end)
                    throw InvariantError(detail::sid_message(sid, detail::nid_message(rec.nid, "DFS span escapes its parent's span")));
            }
            open.push_back({rec.nid, slot + rec.remaining});

            if (rec.is_boundary != (rec.child_sid_count > 0) || rec.is_boundary != rec.child_sid_first.has_value())
                throw InvariantError(detail::nid_message(rec.nid, "boundary flag inconsistent with child SID range"));
            if (rec.is_boundary) {
                const SubtreeId first = *rec.child_sid_first;
                if (first + rec.child_sid_count > sl.subtrees.size())
                    throw InvariantError(detail::nid_message(rec.nid, "child SID range out of bounds"));
                for (SubtreeId c = first; c < first + rec.child_sid_count; ++c)
                    if (sl.subtrees[c].parent_node != rec.nid)
                        throw InvariantError(detail::nid_message(rec.nid, "child SID " + std::to_string(c) + " hangs off another node"));
            }
        }
    }
    if (total != n) throw InvariantError("subtree sizes do not sum to the node count");

    // Hierarchy preservation for edges that cross subtrees.
    for (const auto &node : tree.nodes()) {
        const auto at   = sl.node_index[node.nid];
        const auto &rec = sl.subtrees[at.sid].records[at.slot];
        std::size_t external = 0;
        for (NodeId c : node.children) {
            const auto cat = sl.node_index[c];
            if (cat.sid == at.sid) continue;
            ++external;
            if (!rec.is_boundary || cat.sid < *rec.child_sid_first || cat.sid >= *rec.child_sid_first + rec.child_sid_count)
                throw InvariantError(detail::nid_message(c, "subtree " + std::to_string(cat.sid) + " outside parent's child SID range"));
        }
        if ((external > 0) != rec.is_boundary)
            throw InvariantError(detail::nid_message(node.nid, "boundary flag does not match external children"));
    }
}

/// Population mean and standard deviation of a list of sizes.
inline std::pair<double, double> size_moments(const std::vector<std::size_t> &sizes) {
    if (sizes.empty()) return {0.0, 0.0};
    const double mean = std::accumulate(sizes.begin(), sizes.end(), 0.0) / static_cast<double>(sizes.size());
    double var        = 0.0;
    for (auto s : sizes) var += (static_cast<double>(s) - mean) * (static_cast<double>(s) - mean);
    return {mean, std::sqrt(var / static_cast<double>(sizes.size()))};
}

template <typename Range>
std::vector<std::size_t> subtree_sizes(const Range &subtrees) {
    std::vector<std::size_t> out;
    out.reserve(std::size(subtrees));
    for (const auto &s : subtrees) out.push_back(s.size());
    return out;
}

} // namespace sltarch
