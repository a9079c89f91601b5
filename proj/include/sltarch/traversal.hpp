// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/sltree.hpp"

#include <condition_variable>
#include <mutex>
#include <queue>
#include <thread>

#include <nlohmann/json.hpp>

namespace sltarch {

struct Cut {
    std::vector<NodeId> selected;              // strictly increasing
    std::optional<std::vector<double>> weights; // aligned with `selected`

    friend bool operator==(const Cut &, const Cut &) = default;
};

struct WorkloadStats {
    std::vector<std::size_t> per_worker_visited;
    std::vector<std::size_t> per_worker_subtrees;
    std::size_t nodes_touched_total = 0;
    std::size_t nodes_in_tree       = 0;
};

namespace detail {

// Examines the record at `slot` and returns the slot to examine next.
template <typename EmitFn, typename EnqueueFn>
std::size_t scan_step(const SLTree &sl, const std::vector<SubtreeNodeRecord> &records, std::size_t slot,
                      const Camera &cam, double epsilon, EmitFn &&emit, EnqueueFn &&enqueue) {
    const auto &rec = records[slot];
    if (frustum_test(rec.aabb, cam) == Visibility::Outside) return slot + rec.remaining + 1;
    if (rec.is_leaf || projected_size(sl.gaussians[rec.nid], rec.aabb, cam) <= epsilon) {
        emit(rec.nid);
        return slot + rec.remaining + 1;
    }
    if (rec.is_boundary)
        for (SubtreeId c = *rec.child_sid_first; c < *rec.child_sid_first + rec.child_sid_count; ++c) enqueue(c);
    return slot + 1;
}

// `enqueue(sid, examined)` also receives the number of records examined so
// far, which the virtual-time scheduler uses as the enqueue timestamp.
template <typename EmitFn, typename EnqueueFn>
std::size_t scan_subtree(const SLTree &sl, SubtreeId sid, const Camera &cam, double epsilon, EmitFn &&emit,
                         EnqueueFn &&enqueue) {
    const auto &records = sl.subtrees.at(sid).records;
    std::size_t visited = 0;
    for (std::size_t slot = 0; slot < records.size();) {
        ++visited;
        slot = scan_step(sl, records, slot, cam, epsilon, emit, [&](SubtreeId c) { enqueue(c, visited); });
    }
    return visited;
}

} // namespace detail

/// Scans one subtree's DFS records from slot 0.
///  - outside the frustum: skip the whole in-subtree span
///  - fine enough, or a true leaf: emit and skip the span
///  - boundary node: enqueue its child SID range and step into its span
///  - otherwise step to the next record
/// Returns the number of records examined.
template <typename EmitFn, typename EnqueueFn>
std::size_t traverse_subtree(const SLTree &sl, SubtreeId sid, const Camera &cam, double epsilon, EmitFn &&emit,
                             EnqueueFn &&enqueue) {
    return detail::scan_subtree(sl, sid, cam, epsilon, emit, [&](SubtreeId c, std::size_t) { enqueue(c); });
}

enum class Schedule {
    threaded,     // real worker threads sharing one FIFO queue
    virtual_time, // deterministic list schedule: each record costs one time unit
};

namespace detail {

inline WorkloadStats empty_stats(const SLTree &sl, std::size_t workers) {
    WorkloadStats stats;
    stats.per_worker_visited.assign(workers, 0);
    stats.per_worker_subtrees.assign(workers, 0);
    stats.nodes_in_tree = sl.node_count();
    return stats;
}

inline std::pair<Cut, WorkloadStats> traverse_threaded(const SLTree &sl, const Camera &cam, double epsilon,
                                                       std::size_t workers) {
    WorkloadStats stats = empty_stats(sl, workers);
    std::vector<std::vector<NodeId>> emitted(workers);

    std::mutex mutex;
    std::condition_variable wake;
    std::deque<SubtreeId> queue{sl.root_sid};
    std::size_t busy = 0;

    auto worker = [&](std::size_t id) {
        auto &out = emitted[id];
        std::unique_lock lock(mutex);
        for (;;) {
            wake.wait(lock, [&] { return !queue.empty() || busy == 0; });
            if (queue.empty()) return; // nothing queued and nobody can add more
            const SubtreeId sid = queue.front();
            queue.pop_front();
            ++busy;
            lock.unlock();
            std::vector<SubtreeId> children;
            const std::size_t visited = traverse_subtree(
                sl, sid, cam, epsilon, [&](NodeId nid) { out.push_back(nid); },
                [&](SubtreeId c) { children.push_back(c); });
            lock.lock();
            queue.insert(queue.end(), children.begin(), children.end());
            stats.per_worker_visited[id] += visited;
            ++stats.per_worker_subtrees[id];
            --busy;
            wake.notify_all();
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t id = 0; id < workers; ++id) pool.emplace_back(worker, id);
    }

    Cut cut;
    for (const auto &part : emitted) cut.selected.insert(cut.selected.end(), part.begin(), part.end());
    std::sort(cut.selected.begin(), cut.selected.end());
    for (auto v : stats.per_worker_visited) stats.nodes_touched_total += v;
    return {std::move(cut), std::move(stats)};
}

// Discrete-event model of the same pool: the earliest-free worker takes the
// earliest-ready subtree; a child subtree becomes ready as soon as the record
// that enqueued it has been examined.
inline std::pair<Cut, WorkloadStats> traverse_virtual(const SLTree &sl, const Camera &cam, double epsilon,
                                                      std::size_t workers) {
    WorkloadStats stats = empty_stats(sl, workers);
    struct Ready {
        std::uint64_t time;
        std::uint64_t seq;
        SubtreeId sid;
        bool operator>(const Ready &o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
    };
    std::priority_queue<Ready, std::vector<Ready>, std::greater<>> ready;
    std::uint64_t seq = 0;
    ready.push({0, seq++, sl.root_sid});
    std::vector<std::uint64_t> free_at(workers, 0);
    Cut cut;
    while (!ready.empty()) {
        const Ready next = ready.top();
        ready.pop();
        const auto w = static_cast<std::size_t>(std::min_element(free_at.begin(), free_at.end()) - free_at.begin());
        const std::uint64_t start = std::max(free_at[w], next.time);
        const std::uint64_t examined = detail::scan_subtree(
            sl, next.sid, cam, epsilon, [&](NodeId nid) { cut.selected.push_back(nid); },
            [&](SubtreeId c, std::size_t at) { ready.push({start + at, seq++, c}); });
        free_at[w] = start + examined;
        stats.per_worker_visited[w] += examined;
        ++stats.per_worker_subtrees[w];
    }
    std::sort(cut.selected.begin(), cut.selected.end());
    for (auto v : stats.per_worker_visited) stats.nodes_touched_total += v;
    return {std::move(cut), std::move(stats)};
}

} // namespace detail

/// Parallel streaming LoD search over the SLTree. The cut is identical for
/// every worker count and schedule; only the per-worker split of the work
/// varies.
inline std::pair<Cut, WorkloadStats> traverse(const SLTree &sl, const Camera &cam, double epsilon, std::size_t workers,
                                              Schedule schedule = Schedule::threaded) {
    if (workers < 1) throw ParameterError("workers must be >= 1");
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if (sl.subtrees.empty()) throw ParameterError("empty SLTree");
    return schedule == Schedule::threaded ? detail::traverse_threaded(sl, cam, epsilon, workers)
                                          : detail::traverse_virtual(sl, cam, epsilon, workers);
}

/// Fixed assignment used as the imbalance baseline: the LoD tree is expanded
/// level by level until there are at least `workers` top-level subtrees, which
/// are then dealt round-robin. Nodes above that frontier are charged to
/// worker 0. Loads are the node visits of the reference search.
inline WorkloadStats static_subtree_workload(const LodTree &tree, const Camera &cam, double epsilon,
                                             std::size_t workers) {
    if (workers < 1) throw ParameterError("workers must be >= 1");
    WorkloadStats stats;
    stats.per_worker_visited.assign(workers, 0);
    stats.per_worker_subtrees.assign(workers, 0);
    stats.nodes_in_tree = tree.size();

    std::vector<NodeId> frontier{tree.root()};
    std::vector<NodeId> above;
    while (frontier.size() < workers) {
        std::vector<NodeId> next;
        bool expanded = false;
        for (NodeId nid : frontier) {
            const auto &node = tree.node(nid);
            if (node.is_leaf()) {
                next.push_back(nid);
            } else {
                above.push_back(nid);
                next.insert(next.end(), node.children.begin(), node.children.end());
                expanded = true;
            }
        }
        if (!expanded) break;
        frontier = std::move(next);
    }

    // Visits of the reference search, attributed per node.
    std::vector<std::uint8_t> visited(tree.size(), 0);
    std::vector<NodeId> stack{tree.root()};
    while (!stack.empty()) {
        const auto &node = tree.node(stack.back());
        stack.pop_back();
        visited[node.nid] = 1;
        if (frustum_test(node.aabb, cam) == Visibility::Outside) continue;
        if (node.is_leaf() || projected_size(node, cam) <= epsilon) continue;
        stack.insert(stack.end(), node.children.begin(), node.children.end());
    }

    for (NodeId nid : above) stats.per_worker_visited[0] += visited[nid];
    for (std::size_t i = 0; i < frontier.size(); ++i) {
        const std::size_t w = i % workers;
        ++stats.per_worker_subtrees[w];
        stack.assign({frontier[i]});
        while (!stack.empty()) {
            const NodeId cur = stack.back();
            stack.pop_back();
            if (!visited[cur]) continue;
            ++stats.per_worker_visited[w];
            const auto &children = tree.node(cur).children;
            stack.insert(stack.end(), children.begin(), children.end());
        }
    }
    for (auto v : stats.per_worker_visited) stats.nodes_touched_total += v;
    return stats;
}

struct WorkloadSummary {
    std::size_t workers = 0;
    double mean         = 0.0;
    double stddev       = 0.0; // population
    std::size_t max     = 0;
    double imbalance    = 0.0; // max / mean
    std::size_t touched = 0;
    std::size_t total   = 0;
    double touched_ratio = 0.0; // touched / total, 1.0 for an exhaustive search

    double cv() const { return mean > 0.0 ? stddev / mean : 0.0; }
};

inline WorkloadSummary workload_report(const WorkloadStats &stats) {
    WorkloadSummary s;
    s.workers = stats.per_worker_visited.size();
    s.touched = stats.nodes_touched_total;
    s.total   = stats.nodes_in_tree;
    if (s.workers == 0) return s;
    std::tie(s.mean, s.stddev) = size_moments(stats.per_worker_visited);
    s.max           = *std::max_element(stats.per_worker_visited.begin(), stats.per_worker_visited.end());
    s.imbalance     = s.mean > 0.0 ? static_cast<double>(s.max) / s.mean : 0.0;
    s.touched_ratio = s.total > 0 ? static_cast<double>(s.touched) / static_cast<double>(s.total) : 0.0;
    return s;
}

inline nlohmann::json workload_json(const WorkloadStats &stats) {
    const auto s = workload_report(stats);
    return {{"workers", s.workers},
            {"mean", s.mean},
            {"stddev", s.stddev},
            {"max", s.max},
            {"imbalance", s.imbalance},
            {"touched", s.touched},
            {"total", s.total},
            {"per_worker", stats.per_worker_visited},
            {"per_worker_subtrees", stats.per_worker_subtrees}};
}

/// Blend weight of each selected node toward its parent's level of detail:
/// w = clamp((proj(parent) - eps) / (proj(parent) - proj(n)), 0, 1); 1 for the
/// root, for leaves selected only because they are leaves, and whenever the
/// parent's projection is unbounded or equal to the node's.
inline std::vector<double> interpolation_weights(const LodTree &tree, const std::vector<NodeId> &selected,
                                                 const Camera &cam, double epsilon) {
    std::vector<double> weights;
    weights.reserve(selected.size());
    for (NodeId nid : selected) {
        const auto &node  = tree.node(nid);
        const double proj = projected_size(node, cam);
        if (!node.parent || (node.is_leaf() && proj > epsilon)) {
            weights.push_back(1.0);
            continue;
        }
        const double parent_proj = projected_size(tree.node(*node.parent), cam);
        if (!std::isfinite(parent_proj) || parent_proj == proj) {
            weights.push_back(1.0);
            continue;
        }
        weights.push_back(std::clamp((parent_proj - epsilon) / (parent_proj - proj), 0.0, 1.0));
    }
    return weights;
}

} // namespace sltarch
