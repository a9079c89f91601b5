// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

// sltarch: scene generation, partitioning, traversal, rendering, simulation
// and sweeps from the command line.

#include "sltarch/sltarch.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sltarch;

namespace {

struct Options {
    // inputs / outputs
    std::string scene;
    std::string camera;
    std::string arch;
    std::string out = ".";
    std::string cut;
    // generator
    std::uint64_t seed        = 1;
    std::size_t nodes         = 1000;
    std::size_t max_children  = 32;
    std::size_t depth         = 24;
    double shrink             = 0.5;
    // view
    int width       = 256;
    int height      = 256;
    double focal    = 300.0;
    double distance = 3.0;
    // search / render
    std::size_t tau      = 32;
    double epsilon       = 2.0;
    std::size_t workers  = 8;
    std::string schedule = "virtual";
    std::string mode     = "grouped";
    bool weights         = false;
    bool oracle          = false;
    // sweep lists
    std::string epsilons  = "2";
    std::string taus      = "32";
    std::string worker_ns = "8";
};

// Lets a subcommand read the same option set from flags or a JSON config.
class Command {
  public:
    Command(CLI::App &parent, const std::string &name, const std::string &help) : app_(parent.add_subcommand(name, help)) {
        app_->add_option("--config", config_, "JSON file with option values (flags take precedence)");
    }

    template <typename T>
    Command &opt(const std::string &key, T &ref, const std::string &help) {
        CLI::Option *o = app_->add_option("--" + dashed(key), ref, help)->capture_default_str();
        fields_.push_back({key, o, [&ref, key](const json &j) { ref = from_json<T>(j, key); }, [&ref] { return json(ref); }});
        return *this;
    }

    Command &flag(const std::string &key, bool &ref, const std::string &help) {
        CLI::Option *o = app_->add_flag("--" + dashed(key), ref, help);
        fields_.push_back({key, o, [&ref, key](const json &j) { ref = from_json<bool>(j, key); }, [&ref] { return json(ref); }});
        return *this;
    }

    CLI::App *app() const { return app_; }

    // Applies config values for every option not given on the command line.
    void apply_config() const {
        if (config_.empty()) return;
        const json doc = detail::parse_text(detail::read_file(config_), config_);
        if (!doc.is_object()) throw ConfigError(config_ + ": expected a JSON object");
        for (const auto &[key, value] : doc.items()) {
            if (key == "command") {
                if (value != app_->get_name())
                    throw ConfigError(config_ + ": config is for '" + value.dump() + "', not '" + app_->get_name() + "'");
                continue;
            }
            const auto it = std::find_if(fields_.begin(), fields_.end(), [&](const Field &f) { return f.key == key; });
            if (it == fields_.end()) throw ConfigError(config_ + ": unknown key '" + key + "' for " + app_->get_name());
            if (it->option->count() == 0) it->set(value);
        }
    }

    json effective() const {
        json j = {{"command", app_->get_name()}};
        for (const auto &f : fields_) j[f.key] = f.get();
        return j;
    }

  private:
    struct Field {
        std::string key;
        CLI::Option *option;
        std::function<void(const json &)> set;
        std::function<json()> get;
    };

    static std::string dashed(std::string key) {
        std::replace(key.begin(), key.end(), '_', '-');
        return key;
    }

    template <typename T>
    static T from_json(const json &j, const std::string &key) {
        const auto bad = [&](const char *what) { return ConfigError("config key '" + key + "' must be " + what); };
        if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean()) throw bad("a boolean");
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!j.is_number_unsigned()) throw bad("a non-negative integer");
        } else if constexpr (std::is_integral_v<T>) {
            if (!j.is_number_integer()) throw bad("an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!j.is_number()) throw bad("a number");
        } else {
            if (!j.is_string()) throw bad("a string");
        }
        return j.get<T>();
    }

    CLI::App *app_;
    std::string config_;
    std::vector<Field> fields_;
};

json meta() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream os;
    os << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    return {{"tool", "sltarch"}, {"timestamp", os.str()}};
}

fs::path output_dir(const Options &o) {
    const fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_json(const fs::path &path, const json &j) {
    detail::write_file(path, j.dump(2) + "\n");
    spdlog::info("wrote {}", path.string());
}

LodTree require_scene(const Options &o) {
    if (o.scene.empty()) throw ParameterError("--scene is required");
    spdlog::debug("loading scene {}", o.scene);
    return load_scene(o.scene);
}

Camera view(const Options &o, const LodTree &tree) {
    if (!o.camera.empty()) return load_camera(o.camera);
    if (o.width < 1 || o.height < 1 || !(o.focal > 0.0) || !(o.distance > 0.0))
        throw ParameterError("width, height, focal and distance must be positive");
    return framing_camera(tree, {0.3, 0.4, 1.0}, o.distance, o.width, o.height, o.focal);
}

ArchConfig arch_config(const Options &o, std::size_t tau) {
    ArchConfig cfg;
    if (!o.arch.empty()) cfg = arch_from_json(detail::parse_text(detail::read_file(o.arch), o.arch));
    cfg.cache_entry_nodes = std::max(cfg.cache_entry_nodes, tau);
    return cfg;
}

Schedule schedule_from(const std::string &s) {
    if (s == "threaded") return Schedule::threaded;
    if (s == "virtual") return Schedule::virtual_time;
    throw ParameterError("unknown schedule '" + s + "' (expected threaded or virtual)");
}

json size_summary(const std::vector<std::size_t> &sizes, std::size_t tau) {
    const auto [mean, sd] = size_moments(sizes);
    std::vector<std::size_t> histogram(tau + 1, 0);
    for (auto s : sizes) ++histogram[s];
    return {{"count", sizes.size()}, {"mean", mean}, {"stddev", sd}, {"histogram", histogram}};
}

/// "a..b" (inclusive integer range) or a comma-separated list.
template <typename T>
std::vector<T> parse_list(const std::string &text, const char *what) {
    std::vector<T> out;
    const auto number = [&](const std::string &s) -> T {
        try {
            std::size_t used = 0;
            const double v   = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            if constexpr (std::is_integral_v<T>) {
                if (v < 0 || v != std::floor(v)) throw std::invalid_argument(s);
            }
            return static_cast<T>(v);
        } catch (const std::logic_error &) {
            throw ParameterError(std::string("bad ") + what + " value '" + s + "'");
        }
    };
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const T lo = number(text.substr(0, dots));
        const T hi = number(text.substr(dots + 2));
        if constexpr (!std::is_integral_v<T>) throw ParameterError(std::string(what) + ": ranges need integer bounds");
        if (hi < lo) throw ParameterError(std::string(what) + ": empty range " + text);
        for (T v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(number(item));
    if (out.empty()) throw ParameterError(std::string(what) + ": empty list");
    return out;
}

std::vector<double> parse_epsilons(const std::string &text) {
    if (text.find("..") != std::string::npos) {
        std::vector<double> out;
        for (auto v : parse_list<std::size_t>(text, "epsilon")) out.push_back(static_cast<double>(v));
        return out;
    }
    return parse_list<double>(text, "epsilon");
}

// ---------------------------------------------------------------- commands

int run_gen(const Options &o) {
    GeneratorParams p;
    p.seed          = o.seed;
    p.node_budget   = o.nodes;
    p.max_children  = o.max_children;
    p.depth_limit   = o.depth;
    p.shrink_factor = o.shrink;
    const LodTree tree = gen_synthetic_tree(p);
    const fs::path dir = output_dir(o);
    save_scene(tree, dir / "scene.json");
    save_camera(view(o, tree), dir / "camera.json");
    std::cout << "generated " << tree.size() << " nodes -> " << (dir / "scene.json").string() << "\n";
    return 0;
}

int run_partition(const Options &o) {
    const LodTree tree = require_scene(o);
    if (o.tau < 1 || o.tau > kMaxTau) throw ParameterError("--tau must be in [1, 65535]");
    const auto initial = initial_partition(tree, o.tau);
    const SLTree sl    = build_sltree(tree, o.tau);
    const fs::path dir = output_dir(o);
    save_sltree(sl, dir / "tree.slt");
    write_json(dir / "partition.json", {{"meta", meta()},
                                        {"tau", o.tau},
                                        {"nodes", tree.size()},
                                        {"subtrees", sl.subtrees.size()},
                                        {"before_merge", size_summary(subtree_sizes(initial), o.tau)},
                                        {"after_merge", size_summary(subtree_sizes(sl.subtrees), o.tau)}});
    std::cout << "partitioned " << tree.size() << " nodes into " << sl.subtrees.size() << " subtrees (tau " << o.tau << ")\n";
    return 0;
}

int run_traverse(const Options &o) {
    const LodTree tree = require_scene(o);
    const Camera cam   = view(o, tree);
    const SLTree sl    = build_sltree(tree, o.tau);
    auto [cut, stats]  = traverse(sl, cam, o.epsilon, o.workers, schedule_from(o.schedule));
    if (o.weights) cut.weights = interpolation_weights(tree, cut.selected, cam, o.epsilon);
    const auto fixed   = static_subtree_workload(tree, cam, o.epsilon, o.workers);
    const fs::path dir = output_dir(o);
    json cut_doc       = {{"meta", meta()}, {"epsilon", o.epsilon}, {"selected", cut.selected}};
    if (cut.weights) cut_doc["weights"] = *cut.weights;
    write_json(dir / "cut.json", cut_doc);
    write_json(dir / "workload.json", {{"meta", meta()}, {"dynamic", workload_json(stats)}, {"static", workload_json(fixed)}});
    const auto s = workload_report(stats);
    std::cout << "cut size " << cut.selected.size() << ", nodes touched " << s.touched << " / " << s.total << ", worker cv "
              << s.cv() << "\n";
    return 0;
}

int run_render(const Options &o) {
    const LodTree tree   = require_scene(o);
    const Camera cam     = view(o, tree);
    const SLTree sl      = build_sltree(tree, o.tau);
    const auto cut       = traverse(sl, cam, o.epsilon, o.workers, schedule_from(o.schedule)).first;
    const BlendMode mode = blend_mode_from_string(o.mode);
    const auto image     = render_cut(sl.gaussians, cut.selected, cam, mode);
    const auto reference = mode == BlendMode::reference ? image : render_cut(sl.gaussians, cut.selected, cam, BlendMode::reference);
    const auto metrics   = image_metrics(image.image, reference.image);
    const fs::path dir   = output_dir(o);
    write_image(image.image, dir / ("render_" + o.mode + ".ppm"));
    write_json(dir / "metrics.json", {{"meta", meta()},
                                      {"mode", o.mode},
                                      {"cut_size", cut.selected.size()},
                                      {"psnr_vs_reference", metrics.psnr},
                                      {"ssim_vs_reference", metrics.ssim},
                                      {"divergence", divergence_json(image.divergence)}});
    std::cout << "rendered " << cam.width << "x" << cam.height << " (" << o.mode << "), PSNR vs reference " << metrics.psnr
              << " dB, SSIM " << metrics.ssim << "\n";
    return 0;
}

json traffic_json(const SimReport &lod, const SimReport &base) {
    const double reduction = base.dram_bytes() == 0 ? 0.0
                                                    : 100.0 * (1.0 - static_cast<double>(lod.dram_bytes()) /
                                                                         static_cast<double>(base.dram_bytes()));
    return {{"lod_dram_bytes", lod.dram_bytes()}, {"baseline_dram_bytes", base.dram_bytes()}, {"reduction_percent", reduction}};
}

int run_simulate(const Options &o) {
    const LodTree tree   = require_scene(o);
    const Camera cam     = view(o, tree);
    const SLTree sl      = build_sltree(tree, o.tau);
    const ArchConfig cfg = arch_config(o, o.tau);
    const BlendMode mode = blend_mode_from_string(o.mode);
    const auto [cut, lod]       = simulate_lod(sl, cam, o.epsilon, cfg);
    const auto [image, report]  = simulate_end_to_end(sl, cam, o.epsilon, cfg, mode);
    const auto base             = exhaustive_baseline(tree, cam, o.epsilon, cfg);
    const fs::path dir          = output_dir(o);
    write_json(dir / "report.json", {{"meta", meta()},
                                     {"arch", arch_to_json(cfg)},
                                     {"mode", o.mode},
                                     {"report", report_to_json(report)},
                                     {"baseline", report_to_json(base)},
                                     {"traffic", traffic_json(lod, base)}});
    detail::write_file(dir / "report.csv", report_csv_header() + "\n" + report_csv_row(report) + "\n");
    write_image(image, dir / ("sim_" + o.mode + ".ppm"));
    std::cout << "lod " << report.lod_cycles << " + splat " << report.splat_cycles << " = " << report.total_cycles
              << " cycles; energy " << report.energy_total() << "\n";
    return 0;
}

std::vector<NodeId> read_cut(const std::string &path) {
    const json doc = detail::parse_text(detail::read_file(path), path);
    const auto it  = doc.find("selected");
    if (!doc.is_object() || it == doc.end() || !it->is_array()) throw ParseError(path + ": expected an object with 'selected'");
    std::vector<NodeId> out;
    for (const auto &v : *it) {
        if (!v.is_number_unsigned()) throw ParseError(path + ": 'selected' must hold node ids");
        out.push_back(v.get<NodeId>());
    }
    return out;
}

int run_compare(const Options &o) {
    const LodTree tree = require_scene(o);
    const Camera cam   = view(o, tree);
    const fs::path dir = output_dir(o);
    if (o.oracle) {
        const auto oracle = oracle_cut(tree, cam, o.epsilon);
        const auto cut = o.cut.empty() ? traverse(build_sltree(tree, o.tau), cam, o.epsilon, o.workers, schedule_from(o.schedule)).first.selected
                                       : read_cut(o.cut);
        const bool same = cut == oracle;
        write_json(dir / "compare.json", {{"meta", meta()}, {"cuts_identical", same}, {"cut_size", cut.size()}, {"oracle_size", oracle.size()}});
        std::cout << "cuts identical: " << (same ? "true" : "false") << "\n";
        return same ? 0 : 1;
    }
    const SLTree sl = build_sltree(tree, o.tau);
    const auto cut  = traverse(sl, cam, o.epsilon, o.workers, schedule_from(o.schedule)).first;
    const auto ref  = render_cut(sl.gaussians, cut.selected, cam, BlendMode::reference);
    const auto grp  = render_cut(sl.gaussians, cut.selected, cam, BlendMode::grouped);
    const auto m    = image_metrics(grp.image, ref.image);
    write_image(ref.image, dir / "render_reference.ppm");
    write_image(grp.image, dir / "render_grouped.ppm");
    write_json(dir / "compare.json", {{"meta", meta()},
                                      {"psnr", m.psnr},
                                      {"ssim", m.ssim},
                                      {"reference", divergence_json(ref.divergence)},
                                      {"grouped", divergence_json(grp.divergence)}});
    std::cout << std::setw(12) << "" << std::setw(14) << "reference" << std::setw(14) << "grouped" << "\n"
              << std::setw(12) << "evaluations" << std::setw(14) << ref.divergence.evaluations << std::setw(14)
              << grp.divergence.evaluations << "\n"
              << std::setw(12) << "mixed" << std::setw(14) << ref.divergence.mixed << std::setw(14) << grp.divergence.mixed << "\n"
              << std::setw(12) << "utilization" << std::setw(14) << ref.divergence.simd_utilization() << std::setw(14)
              << grp.divergence.simd_utilization() << "\n"
              << "PSNR " << m.psnr << " dB, SSIM " << m.ssim << "\n";
    return 0;
}

int run_sweep(const Options &o) {
    const LodTree tree   = require_scene(o);
    const Camera cam     = view(o, tree);
    const BlendMode mode = blend_mode_from_string(o.mode);
    const auto eps_list  = parse_epsilons(o.epsilons);
    const auto tau_list  = parse_list<std::size_t>(o.taus, "tau");
    const auto wrk_list  = parse_list<std::size_t>(o.worker_ns, "workers");
    const fs::path dir   = output_dir(o);

    std::ostringstream csv;
    csv.precision(10);
    csv << "epsilon,tau,workers,max_load,mean_load,stddev_load,cv,static_cv,traffic_reduction_percent,"
        << report_csv_header() << "\n";
    for (std::size_t tau : tau_list) {
        const SLTree sl      = build_sltree(tree, tau);
        const ArchConfig cfg = arch_config(o, tau);
        for (double eps : eps_list) {
            const auto lod  = simulate_lod(sl, cam, eps, cfg).second;
            const auto full = simulate_end_to_end(sl, cam, eps, cfg, mode).second;
            const auto base = exhaustive_baseline(tree, cam, eps, cfg);
            const double reduction = traffic_json(lod, base)["reduction_percent"].get<double>();
            for (std::size_t workers : wrk_list) {
                spdlog::debug("sweep tau={} eps={} workers={}", tau, eps, workers);
                const auto dyn = workload_report(traverse(sl, cam, eps, workers, Schedule::virtual_time).second);
                const auto fix = workload_report(static_subtree_workload(tree, cam, eps, workers));
                csv << eps << ',' << tau << ',' << workers << ',' << dyn.max << ',' << dyn.mean << ',' << dyn.stddev << ','
                    << dyn.cv() << ',' << fix.cv() << ',' << reduction << ',' << report_csv_row(full) << "\n";
            }
        }
    }
    detail::write_file(dir / "sweep.csv", csv.str());
    std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << eps_list.size() * tau_list.size() * wrk_list.size()
              << " rows)\n";
    return 0;
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("sltarch");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char *level = std::getenv("SLT_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

} // namespace

int main(int argc, char **argv) {
    configure_logging();
    CLI::App app{"SLTree LoD search, splatting and accelerator simulation"};
    app.require_subcommand(1);
    Options o;

    std::vector<std::unique_ptr<Command>> commands;
    std::map<CLI::App *, std::function<int(const Options &)>> handlers;
    const auto add = [&](const std::string &name, const std::string &help, std::function<int(const Options &)> fn) -> Command & {
        commands.push_back(std::make_unique<Command>(app, name, help));
        handlers[commands.back()->app()] = std::move(fn);
        return *commands.back();
    };
    const auto view_opts = [&](Command &c) {
        c.opt("camera", o.camera, "camera JSON (default: framing camera)")
            .opt("width", o.width, "image width for the framing camera")
            .opt("height", o.height, "image height for the framing camera")
            .opt("focal", o.focal, "focal length in pixels for the framing camera")
            .opt("distance", o.distance, "framing distance in root-box radii");
    };

    auto &gen = add("gen", "generate a synthetic LoD scene", run_gen);
    gen.opt("seed", o.seed, "random seed")
        .opt("nodes", o.nodes, "node budget")
        .opt("max_children", o.max_children, "maximum children per node")
        .opt("depth", o.depth, "depth limit")
        .opt("shrink", o.shrink, "child scale shrink factor")
        .opt("out", o.out, "output directory");
    view_opts(gen);

    auto &part = add("partition", "partition a scene into an SLTree file", run_partition);
    part.opt("scene", o.scene, "scene JSON").opt("tau", o.tau, "subtree size limit").opt("out", o.out, "output directory");

    auto &trav = add("traverse", "parallel LoD search with workload statistics", run_traverse);
    trav.opt("scene", o.scene, "scene JSON")
        .opt("tau", o.tau, "subtree size limit")
        .opt("epsilon", o.epsilon, "LoD requirement in pixels")
        .opt("workers", o.workers, "worker count")
        .opt("schedule", o.schedule, "threaded or virtual")
        .flag("weights", o.weights, "emit interpolation weights")
        .opt("out", o.out, "output directory");
    view_opts(trav);

    auto &rend = add("render", "render the cut to a PPM image", run_render);
    rend.opt("scene", o.scene, "scene JSON")
        .opt("tau", o.tau, "subtree size limit")
        .opt("epsilon", o.epsilon, "LoD requirement in pixels")
        .opt("workers", o.workers, "worker count")
        .opt("schedule", o.schedule, "threaded or virtual")
        .opt("mode", o.mode, "reference or grouped")
        .opt("out", o.out, "output directory");
    view_opts(rend);

    auto &sim = add("simulate", "cycle-approximate accelerator simulation", run_simulate);
    sim.opt("scene", o.scene, "scene JSON")
        .opt("tau", o.tau, "subtree size limit")
        .opt("epsilon", o.epsilon, "LoD requirement in pixels")
        .opt("mode", o.mode, "reference or grouped")
        .opt("arch", o.arch, "architecture JSON")
        .opt("out", o.out, "output directory");
    view_opts(sim);

    auto &cmp = add("compare", "reference vs grouped blending, or a cut vs the oracle", run_compare);
    cmp.opt("scene", o.scene, "scene JSON")
        .opt("tau", o.tau, "subtree size limit")
        .opt("epsilon", o.epsilon, "LoD requirement in pixels")
        .opt("workers", o.workers, "worker count")
        .opt("schedule", o.schedule, "threaded or virtual")
        .flag("oracle", o.oracle, "check a cut against the reference search")
        .opt("cut", o.cut, "cut JSON to check (default: traverse now)")
        .opt("out", o.out, "output directory");
    view_opts(cmp);

    auto &swp = add("sweep", "CSV sweep over epsilon, tau and workers", run_sweep);
    swp.opt("scene", o.scene, "scene JSON")
        .opt("epsilon", o.epsilons, "epsilon list (a,b,c or a..b)")
        .opt("tau", o.taus, "tau list")
        .opt("workers", o.worker_ns, "worker list")
        .opt("mode", o.mode, "reference or grouped")
        .opt("arch", o.arch, "architecture JSON")
        .opt("out", o.out, "output directory");
    view_opts(swp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    for (const auto &cmd : commands) {
        if (!cmd->app()->parsed()) continue;
        try {
            cmd->apply_config();
            const int rc = handlers.at(cmd->app())(o);
            write_json(output_dir(o) / "run_config.json", cmd->effective());
            return rc;
        } catch (const ParameterError &e) {
            std::cerr << "error: " << e.what() << "\n" << cmd->app()->help();
            return 2;
        } catch (const ConfigError &e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const Error &e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception &e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 2;
}
