// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/splat.hpp"
#include "sltarch/traversal.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace sltarch {

struct EnergyWeights {
    double sram_access    = 1.0;
    double dram_streaming = 25.0 / 3.0;
    double dram_random    = 25.0;

    friend bool operator==(const EnergyWeights &, const EnergyWeights &) = default;
};

struct ArchConfig {
    std::size_t lt_units              = 4;
    double clock_hz                   = 1e9;
    std::size_t cache_ways            = 4;
    std::size_t cache_sets            = 128;
    std::size_t cache_entry_nodes     = 32;
    std::size_t output_buffer_bytes   = 8192; // both halves
    std::size_t subtree_queue_bytes   = 48;
    std::size_t sp_units              = 4;
    std::size_t projection_units      = 4;
    std::size_t sort_units            = 4;
    std::size_t global_buffer_bytes   = 262144; // both halves
    std::size_t dram_channels         = 4;
    double dram_bytes_per_cycle       = 16.0; // per channel
    std::size_t node_record_bytes     = 40;
    std::size_t gaussian_record_bytes = 56;
    EnergyWeights energy_weights;

    static constexpr std::size_t kSidBytes = 4;
    static constexpr std::size_t kNidBytes = 4;

    std::size_t queue_capacity() const { return subtree_queue_bytes / kSidBytes; }
    std::size_t output_half_nids() const { return output_buffer_bytes / 2 / kNidBytes; }
    std::uint64_t fill_latency(std::size_t tau_s) const {
        return static_cast<std::uint64_t>(std::ceil(static_cast<double>(tau_s * node_record_bytes) / dram_bytes_per_cycle));
    }

    void validate() const {
        const std::pair<const char *, std::size_t> counts[] = {
            {"lt_units", lt_units},           {"cache_ways", cache_ways},
            {"cache_sets", cache_sets},       {"cache_entry_nodes", cache_entry_nodes},
            {"sp_units", sp_units},           {"projection_units", projection_units},
            {"sort_units", sort_units},       {"dram_channels", dram_channels},
            {"node_record_bytes", node_record_bytes}, {"gaussian_record_bytes", gaussian_record_bytes}};
        for (const auto &[name, v] : counts)
            if (v < 1) throw ConfigError(std::string("arch: ") + name + " must be >= 1");
        if (queue_capacity() < 1) throw ConfigError("arch: subtree_queue_bytes must hold at least one SID");
        if (output_half_nids() < 1) throw ConfigError("arch: output_buffer_bytes must hold at least one NID per half");
        if (global_buffer_bytes < 2) throw ConfigError("arch: global_buffer_bytes must be >= 2");
        if (!(clock_hz > 0.0) || !std::isfinite(clock_hz)) throw ConfigError("arch: clock_hz must be > 0");
        if (!(dram_bytes_per_cycle > 0.0) || !std::isfinite(dram_bytes_per_cycle))
            throw ConfigError("arch: dram_bytes_per_cycle must be > 0");
        const auto &w = energy_weights;
        if (!(w.sram_access > 0.0 && w.dram_streaming > 0.0 && w.dram_random > 0.0))
            throw ConfigError("arch: energy weights must be > 0");
        const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
        if (!near(w.dram_random / w.sram_access, 25.0)) throw ConfigError("arch: dram_random : sram_access must be 25 : 1");
        if (!near(w.dram_random / w.dram_streaming, 3.0)) throw ConfigError("arch: dram_random : dram_streaming must be 3 : 1");
    }

    friend bool operator==(const ArchConfig &, const ArchConfig &) = default;
};

namespace detail {

inline void reject_unknown(const nlohmann::json &j, std::initializer_list<const char *> known, const std::string &where) {
    for (const auto &[key, value] : j.items())
        if (std::none_of(known.begin(), known.end(), [&](const char *k) { return key == k; }))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read_field(const nlohmann::json &j, const char *key, T &out, const std::string &where) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_unsigned()) throw ConfigError(where + ": '" + key + "' must be a non-negative integer");
    } else {
        if (!it->is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    }
    out = it->get<T>();
}

} // namespace detail

inline nlohmann::json arch_to_json(const ArchConfig &c) {
    return {{"lt_units", c.lt_units},
            {"clock_hz", c.clock_hz},
            {"cache_ways", c.cache_ways},
            {"cache_sets", c.cache_sets},
            {"cache_entry_nodes", c.cache_entry_nodes},
            {"output_buffer_bytes", c.output_buffer_bytes},
            {"subtree_queue_bytes", c.subtree_queue_bytes},
            {"sp_units", c.sp_units},
            {"projection_units", c.projection_units},
            {"sort_units", c.sort_units},
            {"global_buffer_bytes", c.global_buffer_bytes},
            {"dram_channels", c.dram_channels},
            {"dram_bytes_per_cycle", c.dram_bytes_per_cycle},
            {"node_record_bytes", c.node_record_bytes},
            {"gaussian_record_bytes", c.gaussian_record_bytes},
            {"energy_weights",
             {{"sram_access", c.energy_weights.sram_access},
              {"dram_streaming", c.energy_weights.dram_streaming},
              {"dram_random", c.energy_weights.dram_random}}}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ArchConfig arch_from_json(const nlohmann::json &j, ArchConfig base = {}) {
    const std::string where = "arch";
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    detail::reject_unknown(j,
                           {"lt_units", "clock_hz", "cache_ways", "cache_sets", "cache_entry_nodes", "output_buffer_bytes",
                            "subtree_queue_bytes", "sp_units", "projection_units", "sort_units", "global_buffer_bytes",
                            "dram_channels", "dram_bytes_per_cycle", "node_record_bytes", "gaussian_record_bytes",
                            "energy_weights"},
                           where);
    ArchConfig c = base;
    detail::read_field(j, "lt_units", c.lt_units, where);
    detail::read_field(j, "clock_hz", c.clock_hz, where);
    detail::read_field(j, "cache_ways", c.cache_ways, where);
    detail::read_field(j, "cache_sets", c.cache_sets, where);
    detail::read_field(j, "cache_entry_nodes", c.cache_entry_nodes, where);
    detail::read_field(j, "output_buffer_bytes", c.output_buffer_bytes, where);
    detail::read_field(j, "subtree_queue_bytes", c.subtree_queue_bytes, where);
    detail::read_field(j, "sp_units", c.sp_units, where);
    detail::read_field(j, "projection_units", c.projection_units, where);
    detail::read_field(j, "sort_units", c.sort_units, where);
    detail::read_field(j, "global_buffer_bytes", c.global_buffer_bytes, where);
    detail::read_field(j, "dram_channels", c.dram_channels, where);
    detail::read_field(j, "dram_bytes_per_cycle", c.dram_bytes_per_cycle, where);
    detail::read_field(j, "node_record_bytes", c.node_record_bytes, where);
    detail::read_field(j, "gaussian_record_bytes", c.gaussian_record_bytes, where);
    if (const auto it = j.find("energy_weights"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("arch.energy_weights: expected an object");
        detail::reject_unknown(*it, {"sram_access", "dram_streaming", "dram_random"}, "arch.energy_weights");
        detail::read_field(*it, "sram_access", c.energy_weights.sram_access, "arch.energy_weights");
        detail::read_field(*it, "dram_streaming", c.energy_weights.dram_streaming, "arch.energy_weights");
        detail::read_field(*it, "dram_random", c.energy_weights.dram_random, "arch.energy_weights");
    }
    c.validate();
    return c;
}

struct UnitActivity {
    std::vector<std::uint64_t> busy;
    std::vector<std::uint64_t> idle;

    void resize(std::size_t units) {
        busy.assign(units, 0);
        idle.assign(units, 0);
    }
    // Fills idle so that busy + idle = total for every unit.
    void close(std::uint64_t total) {
        for (std::size_t u = 0; u < busy.size(); ++u) idle[u] = total - busy[u];
    }
    std::vector<double> utilization() const {
        std::vector<double> out;
        for (std::size_t u = 0; u < busy.size(); ++u) {
            const auto total = busy[u] + idle[u];
            out.push_back(total == 0 ? 0.0 : static_cast<double>(busy[u]) / static_cast<double>(total));
        }
        return out;
    }

    friend bool operator==(const UnitActivity &, const UnitActivity &) = default;
};

struct SimReport {
    std::uint64_t lod_cycles   = 0;
    std::uint64_t splat_cycles = 0;
    std::uint64_t total_cycles = 0;
    UnitActivity lt;
    UnitActivity sp;
    std::uint64_t cache_fills         = 0;
    std::uint64_t cache_stall_cycles  = 0; // fill blocked, no finished entry in the target set
    std::uint64_t queue_full_cycles   = 0; // some LT unit holds child SIDs the queue cannot accept
    std::uint64_t output_swaps        = 0;
    std::uint64_t dram_bytes_streaming = 0;
    std::uint64_t dram_bytes_random    = 0;
    std::uint64_t sram_accesses        = 0; // bytes moved through on-chip buffers
    std::uint64_t nodes_visited        = 0;
    std::uint64_t subtrees_processed   = 0;
    std::uint64_t cut_size             = 0;
    std::uint64_t gaussians_rendered   = 0;
    DivergenceStats divergence;
    EnergyWeights weights;

    std::uint64_t dram_bytes() const { return dram_bytes_streaming + dram_bytes_random; }
    double energy_sram() const { return static_cast<double>(sram_accesses) * weights.sram_access; }
    double energy_dram_streaming() const { return static_cast<double>(dram_bytes_streaming) * weights.dram_streaming; }
    double energy_dram_random() const { return static_cast<double>(dram_bytes_random) * weights.dram_random; }
    double energy_total() const { return energy_sram() + energy_dram_streaming() + energy_dram_random(); }
    double lod_share() const {
        return total_cycles == 0 ? 0.0 : static_cast<double>(lod_cycles) / static_cast<double>(total_cycles);
    }

    friend bool operator==(const SimReport &, const SimReport &) = default;
};

inline nlohmann::json report_to_json(const SimReport &r) {
    return {{"lod_cycles", r.lod_cycles},
            {"splat_cycles", r.splat_cycles},
            {"total_cycles", r.total_cycles},
            {"lod_share", r.lod_share()},
            {"lt_units", {{"busy", r.lt.busy}, {"idle", r.lt.idle}, {"utilization", r.lt.utilization()}}},
            {"sp_units", {{"busy", r.sp.busy}, {"idle", r.sp.idle}, {"utilization", r.sp.utilization()}}},
            {"cache_fills", r.cache_fills},
            {"cache_stall_cycles", r.cache_stall_cycles},
            {"queue_full_cycles", r.queue_full_cycles},
            {"output_swaps", r.output_swaps},
            {"dram_bytes_streaming", r.dram_bytes_streaming},
            {"dram_bytes_random", r.dram_bytes_random},
            {"sram_accesses", r.sram_accesses},
            {"energy",
             {{"sram", r.energy_sram()},
              {"dram_streaming", r.energy_dram_streaming()},
              {"dram_random", r.energy_dram_random()},
              {"total", r.energy_total()}}},
            {"nodes_visited", r.nodes_visited},
            {"subtrees_processed", r.subtrees_processed},
            {"cut_size", r.cut_size},
            {"gaussians_rendered", r.gaussians_rendered},
            {"divergence", divergence_json(r.divergence)}};
}

inline std::string report_csv_header() {
    return "lod_cycles,splat_cycles,total_cycles,lod_share,cache_fills,cache_stall_cycles,queue_full_cycles,"
           "dram_bytes_streaming,dram_bytes_random,sram_accesses,energy_total,nodes_visited,cut_size,"
           "gaussians_rendered,mixed_groups,simd_utilization";
}

inline std::string report_csv_row(const SimReport &r) {
    std::ostringstream os;
    os.precision(10);
    os << r.lod_cycles << ',' << r.splat_cycles << ',' << r.total_cycles << ',' << r.lod_share() << ',' << r.cache_fills
       << ',' << r.cache_stall_cycles << ',' << r.queue_full_cycles << ',' << r.dram_bytes_streaming << ','
       << r.dram_bytes_random << ',' << r.sram_accesses << ',' << r.energy_total() << ',' << r.nodes_visited << ','
       << r.cut_size << ',' << r.gaussians_rendered << ',' << r.divergence.mixed << ','
       << r.divergence.simd_utilization();
    return os.str();
}

namespace detail {

struct CacheWay {
    bool valid    = false;
    bool finished = false;
    SubtreeId sid = 0;
};

class SubtreeCache {
  public:
    SubtreeCache(std::size_t sets, std::size_t ways) : sets_(sets), ways_(ways), entries_(sets * ways), next_(sets, 0) {}

    // Round-robin from the set pointer over invalid or finished ways.
    std::optional<std::size_t> claim(SubtreeId sid) {
        const std::size_t set = sid % sets_;
        for (std::size_t k = 0; k < ways_; ++k) {
            const std::size_t way = (next_[set] + k) % ways_;
            auto &e               = entries_[set * ways_ + way];
            if (!e.valid || e.finished) {
                e         = {true, false, sid};
                next_[set] = (way + 1) % ways_;
                return set * ways_ + way;
            }
        }
        return std::nullopt;
    }
    bool resident(SubtreeId sid, std::size_t entry) const {
        const auto &e = entries_[entry];
        return e.valid && !e.finished && e.sid == sid;
    }
    void finish(std::size_t entry) { entries_[entry].finished = true; }

  private:
    std::size_t sets_, ways_;
    std::vector<CacheWay> entries_;
    std::vector<std::size_t> next_;
};

} // namespace detail

/// Cycle loop of the LoD-search core. Within one cycle: fills that complete
/// become loaded, LT units (in index order) take loaded SIDs and evaluate one
/// record each, child SIDs drain into the subtree queue, and the fill engine
/// issues fills in queue order. A SID entering the queue is visible to the
/// fill engine from the next cycle.
inline std::pair<Cut, SimReport> simulate_lod(const SLTree &sl, const Camera &cam, double epsilon, const ArchConfig &cfg) {
    cfg.validate();
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if (sl.subtrees.empty()) throw ParameterError("empty SLTree");
    if (cfg.cache_entry_nodes < sl.tau_s)
        throw ConfigError("arch: cache_entry_nodes (" + std::to_string(cfg.cache_entry_nodes) + ") is smaller than tau_s (" +
                          std::to_string(sl.tau_s) + ")");

    SimReport rep;
    rep.weights = cfg.energy_weights;
    rep.lt.resize(cfg.lt_units);
    const std::uint64_t latency     = cfg.fill_latency(sl.tau_s);
    const std::uint64_t fill_bytes  = sl.tau_s * cfg.node_record_bytes;
    const std::size_t capacity      = cfg.queue_capacity();
    const std::size_t output_half   = cfg.output_half_nids();

    struct Waiting {
        SubtreeId sid;
        std::uint64_t visible_at;
    };
    struct InFlight {
        SubtreeId sid;
        std::size_t entry;
        std::uint64_t done_at;
    };
    struct Loaded {
        SubtreeId sid;
        std::size_t entry;
    };
    struct Unit {
        std::optional<Loaded> current;
        std::size_t slot = 0;
        std::vector<SubtreeId> pending;
    };

    detail::SubtreeCache cache(cfg.cache_sets, cfg.cache_ways);
    std::deque<Waiting> unissued{{sl.root_sid, 0}};
    std::deque<InFlight> in_flight;
    std::deque<Loaded> loaded;
    std::vector<Unit> units(cfg.lt_units);
    std::vector<std::uint8_t> filled(sl.subtrees.size(), 0);
    std::size_t channels_busy = 0;
    std::size_t output_fill   = 0;
    Cut cut;

    auto emit = [&](NodeId nid) {
        cut.selected.push_back(nid);
        rep.sram_accesses += ArchConfig::kNidBytes;
        if (++output_fill == output_half) {
            rep.dram_bytes_streaming += output_half * ArchConfig::kNidBytes;
            ++rep.output_swaps;
            output_fill = 0;
        }
    };

    std::uint64_t t = 0;
    for (;; ++t) {
        while (!in_flight.empty() && in_flight.front().done_at == t) {
            loaded.push_back({in_flight.front().sid, in_flight.front().entry});
            in_flight.pop_front();
            --channels_busy;
        }

        for (std::size_t u = 0; u < units.size(); ++u) {
            auto &unit = units[u];
            if (!unit.current) {
                if (loaded.empty()) continue;
                unit.current = loaded.front();
                unit.slot    = 0;
                loaded.pop_front();
            }
            const auto cur = *unit.current;
            if (!cache.resident(cur.sid, cur.entry))
                throw InvariantError("LT unit referenced subtree " + std::to_string(cur.sid) + " which is not cache resident");
            const auto &records = sl.subtrees[cur.sid].records;
            unit.slot = detail::scan_step(sl, records, unit.slot, cam, epsilon, emit,
                                          [&](SubtreeId c) { unit.pending.push_back(c); });
            ++rep.lt.busy[u];
            ++rep.nodes_visited;
            rep.sram_accesses += cfg.node_record_bytes;
            if (unit.slot >= records.size()) {
                cache.finish(cur.entry);
                unit.current.reset();
                ++rep.subtrees_processed;
            }
        }

        bool blocked = false;
        for (auto &unit : units) {
            std::size_t moved = 0;
            while (moved < unit.pending.size() && unissued.size() + in_flight.size() + loaded.size() < capacity)
                unissued.push_back({unit.pending[moved++], t + 1});
            unit.pending.erase(unit.pending.begin(), unit.pending.begin() + static_cast<std::ptrdiff_t>(moved));
            blocked = blocked || !unit.pending.empty();
        }
        if (blocked) ++rep.queue_full_cycles;

        while (channels_busy < cfg.dram_channels && !unissued.empty() && unissued.front().visible_at <= t) {
            const SubtreeId sid = unissued.front().sid;
            const auto entry    = cache.claim(sid);
            if (!entry) {
                ++rep.cache_stall_cycles;
                break;
            }
            if (filled[sid]) throw InvariantError("subtree " + std::to_string(sid) + " filled twice");
            filled[sid] = 1;
            unissued.pop_front();
            in_flight.push_back({sid, *entry, t + latency});
            ++channels_busy;
            ++rep.cache_fills;
            rep.dram_bytes_streaming += fill_bytes;
            rep.sram_accesses += fill_bytes;
        }

        const bool units_idle = std::all_of(units.begin(), units.end(),
                                            [](const Unit &u) { return !u.current && u.pending.empty(); });
        if (units_idle && unissued.empty() && in_flight.empty() && loaded.empty()) break;
        if (units_idle && in_flight.empty() && loaded.empty() && unissued.front().visible_at <= t)
            throw InvariantError("LoD core deadlocked at cycle " + std::to_string(t));
    }

    if (output_fill > 0) {
        rep.dram_bytes_streaming += output_fill * ArchConfig::kNidBytes;
        ++rep.output_swaps;
    }
    rep.lod_cycles   = t + 1;
    rep.total_cycles = rep.lod_cycles;
    rep.lt.close(rep.lod_cycles);
    std::sort(cut.selected.begin(), cut.selected.end());
    rep.cut_size = cut.selected.size();
    return {std::move(cut), std::move(rep)};
}

/// Splatting core: global-buffer fill, projection, per-tile sort and SP
/// units, serialized. SP units take tiles in row-major order, each tile going
/// to the earliest-free unit; a tile costs one cycle per (Gaussian, group)
/// evaluation.
inline std::pair<Image, SimReport> simulate_splat(std::span<const Gaussian> gaussians, std::span<const NodeId> cut,
                                                  const Camera &cam, const ArchConfig &cfg, BlendMode mode) {
    cfg.validate();
    SimReport rep;
    rep.weights = cfg.energy_weights;
    rep.sp.resize(cfg.sp_units);
    rep.lt.resize(cfg.lt_units);
    rep.cut_size = cut.size();

    const auto projected = project_cut(gaussians, cut, cam);
    const auto bins      = bin_gaussians(projected, cam.width, cam.height);
    RenderResult render  = blend(mode, bins, projected);

    const std::uint64_t n         = cut.size();
    const double bandwidth        = cfg.dram_bytes_per_cycle * static_cast<double>(cfg.dram_channels);
    const std::uint64_t load      = n * cfg.gaussian_record_bytes;
    const std::uint64_t first_buf = std::min<std::uint64_t>(load, cfg.global_buffer_bytes / 2);
    const auto fill_cycles        = static_cast<std::uint64_t>(std::ceil(static_cast<double>(first_buf) / bandwidth));
    const std::uint64_t proj_cycles = (n + cfg.projection_units - 1) / cfg.projection_units;

    std::uint64_t sort_cycles = 0;
    for (const auto &list : bins.lists) {
        const double k = static_cast<double>(list.size());
        sort_cycles += static_cast<std::uint64_t>(std::ceil(k * std::log2(std::max(k, 2.0)) / static_cast<double>(cfg.sort_units)));
    }

    std::vector<std::uint64_t> free_at(cfg.sp_units, 0);
    for (const auto &tile : render.per_tile) {
        if (tile.evaluations == 0) continue;
        const auto u = static_cast<std::size_t>(std::min_element(free_at.begin(), free_at.end()) - free_at.begin());
        free_at[u] += tile.evaluations;
        rep.sp.busy[u] += tile.evaluations;
    }
    const std::uint64_t sp_cycles = *std::max_element(free_at.begin(), free_at.end());

    rep.splat_cycles         = fill_cycles + proj_cycles + sort_cycles + sp_cycles;
    rep.total_cycles         = rep.splat_cycles;
    rep.dram_bytes_streaming = load;
    rep.sram_accesses        = load + bins.entries() * cfg.gaussian_record_bytes;
    rep.gaussians_rendered   = projected.size();
    rep.divergence           = render.divergence;
    rep.sp.close(rep.splat_cycles);
    rep.lt.close(rep.splat_cycles);
    return {std::move(render.image), std::move(rep)};
}

/// LoD search followed by splatting; the stages do not overlap.
inline std::pair<Image, SimReport> simulate_end_to_end(const SLTree &sl, const Camera &cam, double epsilon,
                                                       const ArchConfig &cfg, BlendMode mode) {
    auto [cut, lod]       = simulate_lod(sl, cam, epsilon, cfg);
    auto [image, splat]   = simulate_splat(sl.gaussians, cut.selected, cam, cfg, mode);
    SimReport rep         = lod;
    rep.splat_cycles      = splat.splat_cycles;
    rep.total_cycles      = lod.lod_cycles + splat.splat_cycles;
    rep.sp                = splat.sp;
    rep.sp.close(rep.total_cycles);
    rep.lt.close(rep.total_cycles);
    rep.dram_bytes_streaming += splat.dram_bytes_streaming;
    rep.dram_bytes_random += splat.dram_bytes_random;
    rep.sram_accesses += splat.sram_accesses;
    rep.gaussians_rendered = splat.gaussians_rendered;
    rep.divergence         = splat.divergence;
    return {std::move(image), std::move(rep)};
}

/// Streaming scan over every node record of the LoD tree.
inline SimReport exhaustive_baseline(const LodTree &tree, const Camera &cam, double epsilon, const ArchConfig &cfg) {
    cfg.validate();
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    cam.validate();
    SimReport rep;
    rep.weights = cfg.energy_weights;
    rep.lt.resize(cfg.lt_units);
    const std::uint64_t n     = tree.size();
    const std::uint64_t bytes = n * cfg.node_record_bytes;
    const double bandwidth    = cfg.dram_bytes_per_cycle * static_cast<double>(cfg.dram_channels);
    rep.lod_cycles   = std::max<std::uint64_t>((n + cfg.lt_units - 1) / cfg.lt_units,
                                             static_cast<std::uint64_t>(std::ceil(static_cast<double>(bytes) / bandwidth)));
    rep.total_cycles = rep.lod_cycles;
    for (std::size_t u = 0; u < cfg.lt_units; ++u) rep.lt.busy[u] = n / cfg.lt_units + (u < n % cfg.lt_units ? 1 : 0);
    rep.lt.close(rep.lod_cycles);
    rep.dram_bytes_streaming = bytes;
    rep.sram_accesses        = bytes;
    rep.nodes_visited        = n;
    return rep;
}

} // namespace sltarch
