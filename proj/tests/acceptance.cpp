// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace sltarch;
using namespace sltarch::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Fixed corpus: node counts log-spaced over 1e2..1e5.
struct CorpusScene {
    std::uint64_t seed;
    LodTree tree;
};

std::vector<CorpusScene> make_corpus(std::size_t count) {
    std::vector<CorpusScene> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double t          = static_cast<double>(i) / static_cast<double>(count - 1);
        const auto nodes        = static_cast<std::size_t>(std::lround(std::pow(10.0, 2.0 + 3.0 * t)));
        const std::uint64_t seed = 1000 + i;
        out.push_back({seed, random_tree(seed, nodes)});
    }
    return out;
}

constexpr std::size_t kCorpusScenes  = 100;
constexpr int kCamerasPerScene       = 10;
constexpr double kEpsilons[]         = {1.0, 4.0, 16.0};

std::vector<Gaussian> payload(const LodTree &tree) {
    std::vector<Gaussian> gs;
    gs.reserve(tree.size());
    for (const auto &n : tree.nodes()) gs.push_back(n.gaussian);
    return gs;
}

bool above_leaves(const LodTree &tree, const std::vector<NodeId> &cut) {
    return std::any_of(cut.begin(), cut.end(), [&](NodeId n) { return !tree.node(n).is_leaf(); });
}

// Criteria 1, 4 and 5 share the corpus sweep.
struct CorpusResults {
    Outcome cuts, streaming, traffic;
    std::size_t runs = 0;
    double seconds   = 0.0;
};

CorpusResults corpus_sweep(const std::vector<CorpusScene> &corpus) {
    CorpusResults r;
    const auto t0 = Clock::now();
    std::size_t cut_mismatches = 0, stream_violations = 0, traffic_checked = 0, traffic_violations = 0;
    double reduction_sum = 0.0, reduction_min = 100.0;
    std::size_t worker_cycle = 0;
    double occupancy_sum     = 0.0;
    for (const auto &scene : corpus) {
        const SLTree sl = build_sltree(scene.tree, 32);
        occupancy_sum += static_cast<double>(scene.tree.size()) / static_cast<double>(32 * sl.subtrees.size());
        ArchConfig cfg;
        Rng rng(scene.seed * 7919);
        for (int c = 0; c < kCamerasPerScene; ++c) {
            const Camera cam = random_camera(scene.tree, rng);
            for (double eps : kEpsilons) {
                ++r.runs;
                const auto oracle          = oracle_cut(scene.tree, cam, eps);
                const std::size_t workers  = std::size_t{1} << (worker_cycle++ % 4);
                const auto schedule        = worker_cycle % 2 ? Schedule::threaded : Schedule::virtual_time;
                const auto searched        = traverse(sl, cam, eps, workers, schedule).first;
                if (searched.selected != oracle) ++cut_mismatches;

                SimReport lod;
                try {
                    auto [cut, rep] = simulate_lod(sl, cam, eps, cfg);
                    if (cut.selected != oracle) ++cut_mismatches;
                    lod = rep;
                } catch (const InvariantError &) {
                    ++stream_violations;
                    continue;
                }
                if (lod.dram_bytes_random != 0 || lod.cache_fills != lod.subtrees_processed) ++stream_violations;

                if (above_leaves(scene.tree, oracle)) {
                    ++traffic_checked;
                    const auto base = exhaustive_baseline(scene.tree, cam, eps, cfg);
                    if (!(lod.dram_bytes() < base.dram_bytes())) ++traffic_violations;
                    const double red = 100.0 * (1.0 - static_cast<double>(lod.dram_bytes()) / static_cast<double>(base.dram_bytes()));
                    reduction_sum += red;
                    reduction_min = std::min(reduction_min, red);
                }
            }
        }
    }
    r.seconds = seconds_since(t0);

    std::ostringstream a;
    a << corpus.size() << " scenes x " << kCamerasPerScene << " cameras x 3 eps = " << r.runs << " runs, " << cut_mismatches
      << " mismatches, " << std::fixed << std::setprecision(1) << r.seconds << " s";
    r.cuts = {cut_mismatches == 0 && r.runs >= 3000 && r.seconds < 120.0, a.str()};

    std::ostringstream b;
    b << r.runs << " runs, " << stream_violations << " with random DRAM bytes or repeated subtree loads";
    r.streaming = {stream_violations == 0, b.str()};

    std::ostringstream c;
    c << traffic_checked << " runs with cut above leaves, " << traffic_violations << " not below baseline; reduction mean "
      << std::fixed << std::setprecision(1) << (traffic_checked ? reduction_sum / static_cast<double>(traffic_checked) : 0.0)
      << "%, min " << reduction_min << "%; mean subtree block occupancy "
      << 100.0 * occupancy_sum / static_cast<double>(corpus.size()) << "%";
    r.traffic = {traffic_violations == 0 && traffic_checked > 0, c.str()};
    return r;
}

Outcome partition_invariants(const std::vector<CorpusScene> &corpus) {
    std::size_t checks = 0, failures = 0, spread_failures = 0, cv_improved = 0;
    std::string first_spread;
    for (const auto &scene : corpus) {
        for (std::size_t tau : {4u, 8u, 32u}) {
            ++checks;
            const auto initial = initial_partition(scene.tree, tau);
            const SLTree sl    = build_sltree(scene.tree, tau);
            std::vector<std::uint8_t> seen(scene.tree.size(), 0);
            bool ok = true;
            for (const auto &sub : sl.subtrees) {
                ok = ok && sub.size() >= 1 && sub.size() <= tau;
                for (const auto &rec : sub.records) ++seen[rec.nid];
            }
            ok = ok && std::all_of(seen.begin(), seen.end(), [](std::uint8_t v) { return v == 1; });
            try {
                validate_sltree(sl, scene.tree);
            } catch (const InvariantError &) {
                ok = false;
            }
            if (!ok) ++failures;
            const auto [mean_before, before] = size_moments(subtree_sizes(initial));
            const auto [mean_after, after]   = size_moments(subtree_sizes(sl.subtrees));
            if (after / mean_after <= before / mean_before) ++cv_improved;
            if (after > before) {
                if (spread_failures++ == 0) {
                    std::ostringstream os;
                    os << "; first: seed " << scene.seed << " tau " << tau << " stddev " << before << " -> " << after;
                    first_spread = os.str();
                }
            }
        }
    }
    std::ostringstream os;
    os << checks << " (scene, tau) pairs, " << failures << " structural failures, " << spread_failures
       << " with larger post-merge size stddev" << first_spread << "; size cv not larger on " << cv_improved << "/"
       << checks;
    return {failures == 0 && spread_failures == 0, os.str()};
}

Outcome workload_balance() {
    constexpr int kScenes = 60;
    int wins              = 0;
    for (int i = 0; i < kScenes; ++i) {
        const auto tree  = random_tree(5000 + i, 20000);
        const SLTree sl  = build_sltree(tree, 32);
        Rng rng(900 + i);
        const Camera cam = framing_camera(tree, {rng.normal(), rng.normal(), rng.normal()}, 3.0);
        const double dyn = workload_report(traverse(sl, cam, 1.0, 8, Schedule::virtual_time).second).cv();
        const double fix = workload_report(static_subtree_workload(tree, cam, 1.0, 8)).cv();
        if (dyn < fix) ++wins;
    }
    std::ostringstream os;
    os << "dynamic cv < static cv on " << wins << "/" << kScenes << " heavy-tailed scenes (8 workers)";
    return {wins * 100 >= 95 * kScenes, os.str()};
}

struct RenderResults {
    Outcome divergence, quality;
};

RenderResults rendering() {
    constexpr int kScenes = 24;
    double psnr_min = 1e9, ssim_min = 1e9, psnr_sum = 0.0, util_max = 0.0;
    std::uint64_t grouped_mixed = 0;
    int ref_full_util = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < kScenes; ++i) {
        const auto tree  = random_tree(7000 + i, 20000);
        Rng rng(300 + i);
        const Camera cam = framing_camera(tree, {rng.normal(), rng.normal(), rng.normal()}, rng.uniform(0.8, 2.0), 256, 256);
        const auto cut   = oracle_cut(tree, cam, 2.0);
        const auto gs    = payload(tree);
        const auto ref   = render_cut(gs, cut, cam, BlendMode::reference);
        const auto grp   = render_cut(gs, cut, cam, BlendMode::grouped);
        const auto m     = image_metrics(grp.image, ref.image);
        psnr_min = std::min(psnr_min, m.psnr);
        ssim_min = std::min(ssim_min, m.ssim);
        psnr_sum += m.psnr;
        grouped_mixed += grp.divergence.mixed;
        const double u = ref.divergence.simd_utilization();
        util_max       = std::max(util_max, u);
        if (!(u < 1.0)) ++ref_full_util;
    }
    const double secs = seconds_since(t0);
    RenderResults r;
    std::ostringstream a;
    a << kScenes << " scenes: grouped mixed groups " << grouped_mixed << ", reference 4-lane utilization max " << std::fixed
      << std::setprecision(4) << util_max;
    r.divergence = {grouped_mixed == 0 && ref_full_util == 0, a.str()};
    std::ostringstream b;
    b << kScenes << " scenes at 256x256: PSNR min " << std::fixed << std::setprecision(2) << psnr_min << " dB (mean "
      << psnr_sum / kScenes << "), SSIM min " << std::setprecision(5) << ssim_min << ", " << std::setprecision(1) << secs
      << " s";
    r.quality = {psnr_min >= 35.0 && ssim_min >= 0.98 && secs < 300.0, b.str()};
    return r;
}

Outcome group_check() {
    Rng rng(4242);
    std::size_t disagreements = 0, near_boundary = 0;
    constexpr std::size_t kSamples = 1000000;
    for (std::size_t i = 0; i < kSamples; ++i) {
        ProjectedGaussian pg;
        pg.mean2d = {rng.uniform(-16, 16), rng.uniform(-16, 16)};
        // Random positive-definite conic.
        const double a = rng.uniform(0.01, 2.0), c = rng.uniform(0.01, 2.0);
        const double b = rng.uniform(-0.99, 0.99) * std::sqrt(a * c);
        pg.conic       = {a, b, c};
        pg.opacity     = rng.uniform(0.0, 1.0);
        const Vec2 p{rng.uniform(-16, 16), rng.uniform(-16, 16)};
        const double direct = pg.opacity * std::exp(gaussian_power(pg, p));
        if (group_alpha_check(pg, p) != (direct >= 1.0 / 255.0)) {
            if (std::abs(direct - 1.0 / 255.0) < 1e-12)
                ++near_boundary;
            else
                ++disagreements;
        }
    }
    std::ostringstream os;
    os << kSamples << " samples, " << disagreements << " disagreements, " << near_boundary << " within 1e-12 of 1/255";
    return {disagreements == 0, os.str()};
}

Outcome simulator_determinism() {
    bool ok = true;
    std::ostringstream os;
    // One subtree of n chained nodes: fill latency plus n records.
    for (std::size_t n : {1u, 7u, 20u}) {
        ArchConfig cfg;
        cfg.lt_units         = 1;
        const auto rep       = simulate_lod(build_sltree(chain_tree(n), 32), origin_camera(), 1e-9, cfg).second;
        const auto expected  = cfg.fill_latency(32) + n;
        if (rep.lod_cycles != expected) {
            ok = false;
            os << "single n=" << n << " got " << rep.lod_cycles << " want " << expected << "; ";
        }
    }
    // Root subtree with two child subtrees, tau 3.
    const SLTree two = build_sltree(two_subtree_tree(), 3);
    for (std::size_t units : {1u, 2u}) {
        ArchConfig cfg;
        cfg.cache_entry_nodes = 3;
        cfg.lt_units          = units;
        const auto L          = cfg.fill_latency(3);
        const auto expected   = units == 2 ? 2 * L + 6 : 2 * L + 8;
        const auto got        = simulate_lod(two, origin_camera(), 1e-6, cfg).second.lod_cycles;
        if (got != expected) {
            ok = false;
            os << "two-subtree units=" << units << " got " << got << " want " << expected << "; ";
        }
    }
    // Full reports byte-identical across reruns.
    std::size_t reruns = 0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto tree  = random_tree(seed, 30000);
        const SLTree sl  = build_sltree(tree, 32);
        const Camera cam = framing_camera(tree, {0.2, 0.7, 1.0}, 1.3);
        for (auto mode : {BlendMode::reference, BlendMode::grouped}) {
            const auto a = simulate_end_to_end(sl, cam, 2.0, ArchConfig{}, mode);
            const auto b = simulate_end_to_end(sl, cam, 2.0, ArchConfig{}, mode);
            const std::string ja = report_to_json(a.second).dump() + report_csv_row(a.second);
            const std::string jb = report_to_json(b.second).dump() + report_csv_row(b.second);
            if (ja != jb || encode_ppm(a.first) != encode_ppm(b.first)) {
                ok = false;
                os << "seed " << seed << " rerun differs; ";
            }
            ++reruns;
        }
    }
    os << "hand schedules L+n, 2L+6, 2L+8 checked; " << reruns << " end-to-end reruns compared";
    return {ok, os.str()};
}

// Share of the LoD search in a pipeline whose search walks the whole tree
// (the unaccelerated pipeline), next to the streaming search's share.
Outcome lod_share_trend() {
    const auto tree  = random_tree(77, 100000);
    const SLTree sl  = build_sltree(tree, 32);
    const Camera cam = framing_camera(tree, {0.3, 0.4, 1.0}, 3.0, 256, 256);
    const std::vector<double> eps{0.25, 0.5, 1, 2, 4, 8, 16, 32, 64};
    std::ostringstream full, streaming;
    full << std::fixed << std::setprecision(3);
    streaming << std::fixed << std::setprecision(3);
    bool monotone = true;
    double prev   = -1.0;
    std::uint64_t last_search = 0, last_splat = 0;
    for (double e : eps) {
        const auto rep    = simulate_end_to_end(sl, cam, e, ArchConfig{}, BlendMode::grouped).second;
        const auto search = exhaustive_baseline(tree, cam, e, ArchConfig{}).lod_cycles;
        const double s    = static_cast<double>(search) / static_cast<double>(search + rep.splat_cycles);
        if (s < prev) monotone = false;
        prev        = s;
        last_search = search;
        last_splat  = rep.splat_cycles;
        full << ' ' << e << ':' << s;
        streaming << ' ' << rep.lod_share();
    }
    const bool dominant = last_search > last_splat;
    return {monotone && dominant, "full-tree search share over eps" + full.str() + "; streaming search share" + streaming.str()};
}

} // namespace

int main() {
    std::vector<std::pair<std::string, Outcome>> results;
    const auto run = [&](int id, const std::string &name, const std::function<Outcome()> &fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        results.emplace_back(std::to_string(id) + " " + name, o);
        std::printf("%s  %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    };

    const auto corpus = make_corpus(kCorpusScenes);
    CorpusResults sweep;
    bool sweep_ok = true;
    std::string sweep_error;
    try {
        sweep = corpus_sweep(corpus);
    } catch (const std::exception &e) {
        sweep_ok    = false;
        sweep_error = std::string("exception: ") + e.what();
    }
    const auto from_sweep = [&](Outcome CorpusResults::*field) {
        return [&, field]() -> Outcome { return sweep_ok ? sweep.*field : Outcome{false, sweep_error}; };
    };

    run(1, "cut equivalence", from_sweep(&CorpusResults::cuts));
    run(2, "partition invariants", [&] { return partition_invariants(corpus); });
    run(3, "workload balance", workload_balance);
    run(4, "streaming contract", from_sweep(&CorpusResults::streaming));
    run(5, "DRAM traffic reduction", from_sweep(&CorpusResults::traffic));
    RenderResults render;
    bool render_ok = true;
    std::string render_error;
    try {
        render = rendering();
    } catch (const std::exception &e) {
        render_ok    = false;
        render_error = std::string("exception: ") + e.what();
    }
    run(6, "divergence elimination", [&] { return render_ok ? render.divergence : Outcome{false, render_error}; });
    run(7, "rendering quality", [&] { return render_ok ? render.quality : Outcome{false, render_error}; });
    run(8, "group check equivalence", group_check);
    run(9, "simulator determinism", simulator_determinism);
    run(10, "LoD share trend", lod_share_trend);

    const auto failed = std::count_if(results.begin(), results.end(), [](const auto &r) { return !r.second.pass; });
    std::printf("%zu/%zu criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
    return failed == 0 ? 0 : 1;
}
