#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclestab/csv.hpp"
#include "cyclestab/engine.hpp"

namespace cyclestab {

/// One figure panel: a single trajectory configuration. Stochastic panels are
/// emitted as 3 runs, deterministic ones as a single run.
struct PanelSpec {
    std::string figure;
    std::string tag;
    std::string map_name;
    std::optional<double> r;
    ControlSpec spec;
    double x0 = 0.5;
    std::int64_t steps = 200;
};

struct EnsembleEntry {
    std::string tag;
    std::string map_name;
    std::optional<double> r;
    ControlSpec spec;
    EnsembleConfig cfg;
    std::optional<int> cycle_d;  // target found by cycle search when set
    double cycle_lo = 0.0, cycle_hi = 5.0;
    std::vector<std::string> acceptance;
};

struct ExamplePlan {
    std::string id;
    std::vector<PanelSpec> panels;
    std::vector<EnsembleEntry> ensembles;
    std::vector<std::string> notes;
};

namespace detail {

inline std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

inline ControlSpec base_spec(ControlFamily family, double alpha, double l, int k, int m, int d,
                             NoiseSpec noise, double target = 0.0) {
    ControlSpec spec;
    spec.family = family;
    spec.alpha = alpha;
    spec.l = l;
    spec.k = k;
    spec.m = m;
    spec.d = d;
    spec.noise = std::move(noise);
    spec.target = target;
    spec.truncate = true;
    return spec;
}

}  // namespace detail

/// The published parameter table, one plan per example. Values come from the
/// figure captions; where a caption and its accompanying text disagree the
/// caption wins and the disagreement is recorded in the notes.
inline ExamplePlan example_plan(const std::string& id) {
    using detail::base_spec;
    const double r1 = std::log(19.0) / 0.9;  // printed as r = 3.2716
    ExamplePlan plan;
    plan.id = id;

    if (id == "example1") {
        for (double l : {0.0, 0.32, 0.4, 0.42}) {
            plan.panels.push_back({"fig1", "l" + detail::short_num(l), "ricker", r1,
                                   base_spec(ControlFamily::toc, 0.7, l, 2, 2, 1,
                                             NoiseSpec::uniform(), 1.0),
                                   0.5, 200});
        }
        for (double l : {0.65, 0.7}) {
            plan.panels.push_back({"fig2", "l" + detail::short_num(l), "ricker", r1,
                                   base_spec(ControlFamily::toc, 0.3, l, 2, 1, 2,
                                             NoiseSpec::bernoulli(), 0.1),
                                   0.5, 200});
        }
        EnsembleEntry on{"K1_uniform_l0.4", "ricker", r1,
                         base_spec(ControlFamily::toc, 0.7, 0.4, 2, 2, 1, NoiseSpec::uniform(), 1.0),
                         EnsembleConfig{0.5, 500, 100, 1, PointTarget{1.0}, 1e-2, 0},
                         std::nullopt, 0.0, 5.0, {"A8a"}};
        EnsembleEntry off = on;
        off.tag = "K1_deterministic";
        off.spec.l = 0.0;
        off.spec.noise = NoiseSpec::none();
        plan.ensembles.push_back(on);
        plan.ensembles.push_back(off);
        plan.notes = {
            "fig1 caption lists m=2, d=1 for point control pulsed every second step; stored as k=m*d=2",
            "fig2 targets the first point (0.1) of the 2-cycle {0.1, 1.9}",
        };
    } else if (id == "example2") {
        for (double l : {1.2, 1.3}) {
            plan.panels.push_back({"fig3", "l" + detail::short_num(l), "logistic", 3.5,
                                   base_spec(ControlFamily::toc, 0.0, l, 2, 1, 2,
                                             NoiseSpec::uniform(), 3.0 / 7.0),
                                   0.5, 200});
        }
        for (double l : {0.75, 0.8}) {
            plan.panels.push_back({"fig4", "l" + detail::short_num(l), "logistic", 3.5,
                                   base_spec(ControlFamily::toc, 0.2, l, 2, 1, 2,
                                             NoiseSpec::uniform(), 3.0 / 7.0),
                                   0.5, 200});
        }
        plan.notes = {
            "noise distribution is not stated for these panels; continuous uniform on [-1,1] is used",
            "target is the first point (3/7) of the logistic 2-cycle {3/7, 6/7}",
        };
    } else if (id == "example3") {
        for (double l : {0.4, 0.5, 0.7}) {
            plan.panels.push_back({"fig5", "l" + detail::short_num(l), "maynard_smith",
                                   std::nullopt,
                                   base_spec(ControlFamily::pbc, 0.2, l, 1, 1, 1,
                                             NoiseSpec::bernoulli()),
                                   2.001, 200});
        }
        for (double l : {0.0, 0.2, 0.3, 0.35, 0.4, 0.45}) {
            plan.panels.push_back({"fig6", "l" + detail::short_num(l), "ricker", 3.2,
                                   base_spec(ControlFamily::pbc, 0.4, l, 2, 1, 2,
                                             l == 0.0 ? NoiseSpec::none() : NoiseSpec::bernoulli()),
                                   0.5, 200});
        }
        EnsembleEntry cyc{"pbc_2cycle_l0.4", "ricker", 3.2,
                          base_spec(ControlFamily::pbc, 0.4, 0.4, 2, 1, 2, NoiseSpec::bernoulli()),
                          EnsembleConfig{0.5, 500, 100, 1, PointTarget{0.0}, 1e-3, 0},
                          2, 0.0, 5.0, {"A8c"}};
        plan.ensembles.push_back(cyc);
        plan.notes = {
            "fig5 caption lists 'l=04' alongside l=0.4; treated as a typo and emitted once as l=0.4",
            "fig5 caption gives alpha=0.2 while the accompanying text discusses alpha=0.8; the caption value is emitted",
            "noise distribution is not stated for these panels; Bernoulli is used (the certification for the "
            "fig6 parameters holds for Bernoulli noise and fails for uniform)",
        };
    } else if (id == "example4") {
        plan.panels.push_back({"fig7", "a0.3_l0.24", "ricker", 2.41,
                               base_spec(ControlFamily::pbc, 0.3, 0.24, 1, 1, 1,
                                         NoiseSpec::bernoulli()),
                               0.5, 200});
        struct P { double alpha, l, x0; };
        for (const P& p : {P{0.28, 0.27, 0.5}, P{0.28, 0.45, 0.5}, P{0.1, 0.27, 0.5},
                           P{0.1, 0.27, 10.0}}) {
            plan.panels.push_back({"fig8",
                                   "a" + detail::short_num(p.alpha) + "_l" + detail::short_num(p.l) +
                                       "_x" + detail::short_num(p.x0),
                                   "ricker", 2.2,
                                   base_spec(ControlFamily::pbc, p.alpha, p.l, 2, 2, 1,
                                             NoiseSpec::bernoulli()),
                                   p.x0, 200});
        }
        EnsembleEntry eq{"pbc_K1_l0.24", "ricker", 2.41,
                         base_spec(ControlFamily::pbc, 0.3, 0.24, 1, 1, 1, NoiseSpec::bernoulli()),
                         EnsembleConfig{0.5, 500, 200, 1, PointTarget{1.0}, 1e-3, 0},
                         std::nullopt, 0.0, 5.0, {"A8b"}};
        plan.ensembles.push_back(eq);
        plan.notes = {
            "fig7 (r=2.41, k=1, alpha=0.3, l=0.24) comes from the example text rather than a caption",
        };
    } else {
        throw std::invalid_argument("unknown example id '" + id + "' (expected example1..example4)");
    }
    return plan;
}

namespace detail {

inline std::string noise_flag(const NoiseSpec& noise) {
    switch (noise.kind) {
        case NoiseKind::none: return "none";
        case NoiseKind::bernoulli: return "bernoulli";
        case NoiseKind::uniform: return "uniform";
        case NoiseKind::discrete: {
            std::string s = "discrete:";
            for (std::size_t i = 0; i < noise.atoms.size(); ++i) {
                if (i) s += ',';
                s += fmt17(noise.atoms[i].first) + ':' + fmt17(noise.atoms[i].second);
            }
            return s;
        }
    }
    return "none";
}

inline std::vector<std::string> control_args(const std::string& map_name, std::optional<double> r,
                                             const ControlSpec& spec) {
    std::vector<std::string> a{"--map", map_name};
    if (r) { a.push_back("--r"); a.push_back(fmt17(*r)); }
    a.push_back("--control");
    a.push_back(spec.family == ControlFamily::toc ? "toc"
                : spec.family == ControlFamily::pbc ? "pbc" : "none");
    a.insert(a.end(), {"--alpha", fmt17(spec.alpha), "--l", fmt17(spec.l), "--k",
                       std::to_string(spec.k), "--m", std::to_string(spec.m), "--d",
                       std::to_string(spec.d), "--noise", noise_flag(spec.noise), "--phase",
                       spec.phase == PulsePhase::end_of_block ? "end" : "start", "--truncate",
                       spec.truncate ? "1" : "0"});
    if (spec.family == ControlFamily::toc) {
        a.push_back("--target");
        a.push_back(fmt17(spec.target));
    }
    return a;
}

inline nlohmann::ordered_json params_json(const std::string& map_name, std::optional<double> r,
                                          const ControlSpec& spec) {
    nlohmann::ordered_json j;
    j["map"] = map_name;
    if (r) j["r"] = *r;
    j["control"] = spec.family == ControlFamily::toc ? "toc"
                   : spec.family == ControlFamily::pbc ? "pbc" : "none";
    j["alpha"] = spec.alpha;
    j["l"] = spec.l;
    j["k"] = spec.k;
    j["m"] = spec.m;
    j["d"] = spec.d;
    j["phase"] = spec.phase == PulsePhase::end_of_block ? "end" : "start";
    j["noise"] = noise_flag(spec.noise);
    j["truncate"] = spec.truncate;
    if (spec.family == ControlFamily::toc) j["target"] = spec.target;
    return j;
}

}  // namespace detail

/// Write the CSV bundle and manifest for one example into `outdir`. Panel
/// trajectories use streams (seed, 1000 + counter); ensembles use streams
/// (seed, path). The output is a pure function of (id, seed); `threads` only
/// parallelizes the ensembles.
inline void write_example_bundle(const std::string& id, const std::string& outdir,
                                 std::uint64_t seed, int threads = 1) {
    const ExamplePlan plan = example_plan(id);
    std::filesystem::create_directories(outdir);
    nlohmann::ordered_json manifest;
    manifest["example"] = plan.id;
    manifest["seed"] = seed;
    manifest["panels"] = nlohmann::ordered_json::array();
    manifest["ensembles"] = nlohmann::ordered_json::array();

    std::uint64_t stream_counter = 1000;
    for (const auto& panel : plan.panels) {
        const MapModel map = panel.r ? make_map(panel.map_name, {{"r", *panel.r}})
                                     : make_map(panel.map_name);
        const bool stochastic = panel.spec.l > 0.0 && panel.spec.noise.kind != NoiseKind::none;
        const int runs = stochastic ? 3 : 1;
        for (int run = 0; run < runs; ++run) {
            const std::uint64_t stream = stream_counter++;
            const std::string file = plan.id + "_" + panel.figure + "_" + panel.tag + "_run" +
                                     std::to_string(run) + ".csv";
            const auto traj =
                run_trajectory(map, panel.spec, panel.x0, panel.steps, RngStream(seed, stream));
            auto os = open_csv((std::filesystem::path(outdir) / file).string());
            write_trajectory_csv(os, traj);

            nlohmann::ordered_json j;
            j["file"] = file;
            j["figure"] = panel.figure;
            j["run"] = run;
            j["params"] = detail::params_json(panel.map_name, panel.r, panel.spec);
            j["x0"] = panel.x0;
            j["steps"] = panel.steps;
            j["seed"] = seed;
            j["stream"] = stream;
            auto replay = detail::control_args(panel.map_name, panel.r, panel.spec);
            std::vector<std::string> argv{"simulate"};
            argv.insert(argv.end(), replay.begin(), replay.end());
            argv.insert(argv.end(), {"--x0", fmt17(panel.x0), "--steps", std::to_string(panel.steps),
                                     "--seed", std::to_string(seed), "--stream",
                                     std::to_string(stream), "--out", file});
            j["replay"] = argv;
            manifest["panels"].push_back(j);
        }
    }

    for (const auto& ens : plan.ensembles) {
        const MapModel map =
            ens.r ? make_map(ens.map_name, {{"r", *ens.r}}) : make_map(ens.map_name);
        EnsembleConfig cfg = ens.cfg;
        cfg.base_seed = seed;
        if (ens.cycle_d) {
            auto cycles = find_cycle(map, *ens.cycle_d, SearchGrid{ens.cycle_lo, ens.cycle_hi});
            if (cycles.size() != 1)
                throw std::runtime_error("expected one cycle for ensemble target of " + ens.tag);
            cfg.target = cycles.front();
        }
        const std::string file = plan.id + "_ensemble_" + ens.tag + ".csv";
        const auto stats = ensemble(map, ens.spec, cfg.x0, cfg.steps, cfg.paths, cfg.base_seed,
                                    cfg.target, cfg.tol, cfg.window, threads);
        auto os = open_csv((std::filesystem::path(outdir) / file).string());
        write_ensemble_csv(os, stats);

        nlohmann::ordered_json j;
        j["file"] = file;
        j["params"] = detail::params_json(ens.map_name, ens.r, ens.spec);
        j["x0"] = cfg.x0;
        j["steps"] = cfg.steps;
        j["paths"] = cfg.paths;
        j["tol"] = cfg.tol;
        j["seed"] = seed;
        j["success_fraction"] = stats.success_fraction;
        if (ens.cycle_d) {
            j["target"] = {{"cycle_d", *ens.cycle_d},
                           {"search_lo", ens.cycle_lo},
                           {"search_hi", ens.cycle_hi}};
        } else {
            j["target"] = {{"K", std::get<PointTarget>(cfg.target).value}};
        }
        j["acceptance"] = ens.acceptance;
        auto replay = detail::control_args(ens.map_name, ens.r, ens.spec);
        std::vector<std::string> argv{"ensemble"};
        argv.insert(argv.end(), replay.begin(), replay.end());
        argv.insert(argv.end(), {"--x0", fmt17(cfg.x0), "--steps", std::to_string(cfg.steps),
                                 "--paths", std::to_string(cfg.paths), "--tol", fmt17(cfg.tol),
                                 "--seed", std::to_string(seed)});
        if (ens.cycle_d) {
            argv.insert(argv.end(), {"--cycle-d", std::to_string(*ens.cycle_d), "--cycle-lo",
                                     fmt17(ens.cycle_lo), "--cycle-hi", fmt17(ens.cycle_hi)});
        } else {
            argv.insert(argv.end(), {"--K", fmt17(std::get<PointTarget>(cfg.target).value)});
        }
        argv.insert(argv.end(), {"--out", file});
        j["replay"] = argv;
        manifest["ensembles"].push_back(j);
    }

    manifest["notes"] = plan.notes;
    auto os = open_csv((std::filesystem::path(outdir) / "manifest.json").string());
    os << manifest.dump(2) << '\n';
}

}  // namespace cyclestab
