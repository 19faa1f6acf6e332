// cyclestab - condition checks, cycle finding, trajectory simulation,
// ensembles, (alpha, l) region sweeps, and reproduction bundles for pulsed
// stochastic PBC/TOC on one-dimensional maps.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cyclestab/conditions.hpp"
#include "cyclestab/csv.hpp"
#include "cyclestab/engine.hpp"
#include "cyclestab/maps.hpp"
#include "cyclestab/noise.hpp"
#include "cyclestab/reproduce.hpp"

namespace {

using namespace cyclestab;

NoiseSpec parse_noise(const std::string& text) {
    if (text == "none") return NoiseSpec::none();
    if (text == "bernoulli") return NoiseSpec::bernoulli();
    if (text == "uniform") return NoiseSpec::uniform();
    if (text.rfind("discrete:", 0) == 0) {
        std::vector<std::pair<double, double>> atoms;
        std::string body = text.substr(9);
        std::size_t pos = 0;
        while (pos < body.size()) {
            const std::size_t comma = body.find(',', pos);
            const std::string item = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
            const std::size_t colon = item.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("discrete noise expects v:p pairs, got '" + item + "'");
            atoms.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return NoiseSpec::discrete(std::move(atoms));
    }
    throw std::invalid_argument("unknown noise '" + text + "'");
}

/// Grid spec lo:hi:step with inclusive endpoints; a bare number is a
/// single-value axis.
std::vector<double> parse_grid(const std::string& text) {
    const std::size_t c1 = text.find(':');
    if (c1 == std::string::npos) return {std::stod(text)};
    const std::size_t c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("grid spec must be lo:hi:step");
    const double lo = std::stod(text.substr(0, c1));
    const double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(text.substr(c2 + 1));
    return make_axis(lo, hi, step);
}

PulsePhase parse_phase(const std::string& text) {
    if (text == "end" || text == "end_of_block") return PulsePhase::end_of_block;
    if (text == "start" || text == "start_of_block") return PulsePhase::start_of_block;
    throw std::invalid_argument("phase must be end or start");
}

ControlFamily parse_family(const std::string& text) {
    if (text == "none") return ControlFamily::none;
    if (text == "pbc") return ControlFamily::pbc;
    if (text == "toc") return ControlFamily::toc;
    throw std::invalid_argument("control must be none, pbc or toc");
}

struct MapArgs {
    std::string name = "ricker";
    double r = 2.0;
    bool has_r = false;

    MapModel build() const {
        if (has_r) return make_map(name, {{"r", r}});
        return make_map(name);
    }
};

void add_map_flags(CLI::App* cmd, MapArgs& args) {
    cmd->add_option("--map", args.name, "map name: ricker, logistic, maynard_smith");
    cmd->add_option("--r", args.r, "map parameter r")->each([&args](const std::string&) {
        args.has_r = true;
    });
}

struct ControlArgs {
    std::string family = "none";
    double alpha = 0.0, l = 0.0;
    int k = 1, m = 1, d = 1;
    std::string phase = "end";
    std::string noise = "none";
    int truncate = 1;
    double target = 0.0;

    ControlSpec build() const {
        ControlSpec spec;
        spec.family = parse_family(family);
        spec.alpha = alpha;
        spec.l = l;
        spec.k = k;
        spec.m = m;
        spec.d = d;
        spec.phase = parse_phase(phase);
        spec.noise = parse_noise(noise);
        spec.truncate = truncate != 0;
        spec.target = target;
        validate(spec);
        return spec;
    }
};

void add_control_flags(CLI::App* cmd, ControlArgs& args, bool with_alpha_l = true) {
    cmd->add_option("--control", args.family, "control family: none, pbc, toc");
    if (with_alpha_l) {
        cmd->add_option("--alpha", args.alpha, "control parameter alpha in [0,1)");
        cmd->add_option("--l", args.l, "noise intensity l >= 0");
    }
    cmd->add_option("--k", args.k, "pulse period (control every kth step)");
    cmd->add_option("--m", args.m, "blocks per pulse for cycle control (k = m*d)");
    cmd->add_option("--d", args.d, "cycle period of the stabilization target");
    cmd->add_option("--phase", args.phase, "pulse phase: end (n = sk-1) or start (n = k(s-1))");
    cmd->add_option("--noise", args.noise,
                    "noise: bernoulli|uniform|none|discrete:<v1:p1,v2:p2,...>");
    cmd->add_option("--truncate", args.truncate, "clamp states at zero (default 1)");
    cmd->add_option("--target", args.target, "TOC target (equilibrium or one cycle point)");
}

struct TargetArgs {
    std::optional<double> K;
    std::optional<int> cycle_d;
    double cycle_lo = 0.0, cycle_hi = 5.0;

    Target build(const MapModel& map) const {
        if (K && cycle_d) throw std::invalid_argument("give either --K or --cycle-d, not both");
        if (K) return PointTarget{*K};
        if (cycle_d) {
            auto cycles = find_cycle(map, *cycle_d, SearchGrid{cycle_lo, cycle_hi});
            if (cycles.empty())
                throw std::invalid_argument("no period-" + std::to_string(*cycle_d) +
                                            " cycle found in the search interval");
            if (cycles.size() > 1)
                throw std::invalid_argument("multiple cycles found; narrow --cycle-lo/--cycle-hi");
            return cycles.front();
        }
        throw std::invalid_argument("a convergence target is required: --K or --cycle-d");
    }
};

void add_target_flags(CLI::App* cmd, TargetArgs& args) {
    cmd->add_option("--K", args.K, "point target for convergence detection");
    cmd->add_option("--cycle-d", args.cycle_d, "detect convergence to a period-d cycle of the map");
    cmd->add_option("--cycle-lo", args.cycle_lo, "cycle search interval lower end");
    cmd->add_option("--cycle-hi", args.cycle_hi, "cycle search interval upper end");
}

void print_report(const ConditionReport& rep) {
    std::cout << rep.condition_id << " lambda=" << fmt17(rep.lambda)
              << " threshold=" << fmt17(rep.threshold) << " satisfied=" << (rep.satisfied ? 1 : 0)
              << " margin=" << fmt17(rep.margin) << " M=" << fmt17(rep.m_factor);
    if (rep.vacuous) std::cout << " vacuous=1 (scale factor has an atom at zero)";
    std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic pulsed PBC/TOC stabilization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    std::string out;
    int threads = 1;
    std::string format = "csv";
    app.add_option("--seed", seed, "base seed for all random streams");
    app.add_option("--out", out, "output file (or directory for reproduce)");
    app.add_option("--threads", threads, "worker threads for ensembles and sweeps");
    app.add_option("--format", format, "output format (csv)");

    // check ------------------------------------------------------------------
    auto* check = app.add_subcommand("check", "evaluate one stabilization condition");
    std::string condition_id;
    MapArgs check_map;
    ControlArgs check_ctl;
    std::optional<double> opt_L, opt_A, opt_M;
    std::string method = "auto";
    std::uint64_t mc_samples = 1'000'000;
    check->add_option("condition", condition_id,
                      "toc_point|toc_cycle|pbc_smooth|pbc_cycle|pbc_max|pbc_signchange|ml_contraction")
        ->required();
    add_map_flags(check, check_map);
    add_control_flags(check, check_ctl);
    check->add_option("--L", opt_L, "Lipschitz constant (L, L(d) for cycle conditions)");
    check->add_option("--A", opt_A, "multiplier (A, A(d) for cycle conditions)");
    check->add_option("--M", opt_M, "sup factor for ml_contraction");
    check->add_option("--method", method, "auto|closed|quadrature|mc");
    check->add_option("--mc-samples", mc_samples, "samples for --method mc");

    // cycles -----------------------------------------------------------------
    auto* cycles_cmd = app.add_subcommand("cycles", "find period-d cycles with multipliers");
    MapArgs cyc_map;
    int cyc_d = 1;
    double cyc_lo = 0.0, cyc_hi = 10.0, cyc_tol = 1e-12;
    int cyc_seeds = 1000;
    std::optional<double> cyc_u0;
    add_map_flags(cycles_cmd, cyc_map);
    cycles_cmd->add_option("--d", cyc_d, "cycle period");
    cycles_cmd->add_option("--lo", cyc_lo, "search interval lower end");
    cycles_cmd->add_option("--hi", cyc_hi, "search interval upper end");
    cycles_cmd->add_option("--grid", cyc_seeds, "number of Newton seeds");
    cycles_cmd->add_option("--tol", cyc_tol, "Newton tolerance on f^d(x) - x");
    cycles_cmd->add_option("--u0", cyc_u0, "Lipschitz radius (default: automatic)");

    // simulate ---------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "run one controlled trajectory");
    MapArgs sim_map;
    ControlArgs sim_ctl;
    double sim_x0 = 0.5;
    std::int64_t sim_steps = 100;
    std::uint64_t sim_stream = 0;
    add_map_flags(sim, sim_map);
    add_control_flags(sim, sim_ctl);
    sim->add_option("--x0", sim_x0, "initial state");
    sim->add_option("--steps", sim_steps, "number of transitions");
    sim->add_option("--stream", sim_stream, "stream index within the base seed");

    // ensemble ---------------------------------------------------------------
    auto* ens = app.add_subcommand("ensemble", "run many paths and report convergence");
    MapArgs ens_map;
    ControlArgs ens_ctl;
    TargetArgs ens_target;
    double ens_x0 = 0.5, ens_tol = 1e-3;
    std::int64_t ens_steps = 500, ens_window = 0;
    int ens_paths = 100;
    add_map_flags(ens, ens_map);
    add_control_flags(ens, ens_ctl);
    add_target_flags(ens, ens_target);
    ens->add_option("--x0", ens_x0, "initial state");
    ens->add_option("--steps", ens_steps, "number of transitions per path");
    ens->add_option("--paths", ens_paths, "number of independent paths");
    ens->add_option("--tol", ens_tol, "convergence tolerance");
    ens->add_option("--window", ens_window, "sustained window (default max(20, 2d))");

    // sweep ------------------------------------------------------------------
    auto* swp = app.add_subcommand("sweep", "scan an (alpha, l) grid");
    MapArgs swp_map;
    ControlArgs swp_ctl;
    TargetArgs swp_target;
    std::string swp_alpha = "0:0:1", swp_l = "0:1:0.1", swp_condition = "toc_point";
    std::optional<double> swp_L, swp_A, swp_M;
    double swp_x0 = 0.5, swp_tol = 1e-3;
    std::int64_t swp_steps = 500, swp_window = 0;
    int swp_paths = 100;
    add_map_flags(swp, swp_map);
    add_control_flags(swp, swp_ctl, /*with_alpha_l=*/false);
    add_target_flags(swp, swp_target);
    swp->add_option("--alpha", swp_alpha, "alpha axis lo:hi:step (or a single value)")->required();
    swp->add_option("--l", swp_l, "l axis lo:hi:step (or a single value)")->required();
    swp->add_option("--condition", swp_condition, "condition id evaluated per cell");
    swp->add_option("--L", swp_L, "Lipschitz constant for the condition");
    swp->add_option("--A", swp_A, "multiplier for the condition");
    swp->add_option("--M", swp_M, "sup factor for ml_contraction");
    swp->add_option("--x0", swp_x0, "initial state");
    swp->add_option("--steps", swp_steps, "transitions per path");
    swp->add_option("--paths", swp_paths, "paths per cell");
    swp->add_option("--tol", swp_tol, "convergence tolerance");
    swp->add_option("--window", swp_window, "sustained window");

    // reproduce --------------------------------------------------------------
    auto* rep = app.add_subcommand("reproduce", "write an example's CSV bundle and manifest");
    std::string example_id;
    rep->add_option("example", example_id, "example1|example2|example3|example4")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (format != "csv") throw std::invalid_argument("unsupported --format '" + format + "'");
        if (*check) {
            ConditionQuery query{condition_id, check_ctl.k, check_ctl.m, opt_L, opt_A, opt_M};
            std::optional<EvalMethod> ev;
            if (method == "closed") ev = ClosedForm{};
            else if (method == "quadrature") ev = Quadrature{};
            else if (method == "mc") ev = MonteCarlo{mc_samples, seed};
            else if (method != "auto") throw std::invalid_argument("unknown --method " + method);
            const auto report = evaluate_condition(query, parse_noise(check_ctl.noise),
                                                   check_ctl.alpha, check_ctl.l, ev);
            print_report(report);
            return report.satisfied ? 0 : 2;
        }
        if (*cycles_cmd) {
            const auto map = cyc_map.build();
            const auto found = find_cycle(map, cyc_d, SearchGrid{cyc_lo, cyc_hi, cyc_seeds},
                                          cyc_tol, cyc_u0);
            if (out.empty()) {
                write_cycles_csv(std::cout, found);
            } else {
                auto os = open_csv(out);
                write_cycles_csv(os, found);
            }
            return 0;
        }
        if (*sim) {
            const auto map = sim_map.build();
            const auto traj = run_trajectory(map, sim_ctl.build(), sim_x0, sim_steps,
                                             RngStream(seed, sim_stream));
            if (out.empty()) {
                write_trajectory_csv(std::cout, traj);
            } else {
                auto os = open_csv(out);
                write_trajectory_csv(os, traj);
            }
            return 0;
        }
        if (*ens) {
            const auto map = ens_map.build();
            const auto target = ens_target.build(map);
            const auto stats = ensemble(map, ens_ctl.build(), ens_x0, ens_steps, ens_paths, seed,
                                        target, ens_tol, ens_window, threads);
            if (out.empty()) {
                write_ensemble_csv(std::cout, stats);
            } else {
                auto os = open_csv(out);
                write_ensemble_csv(os, stats);
                std::cout << "paths=" << stats.paths
                          << " success_fraction=" << fmt17(stats.success_fraction)
                          << " mean_hit_step=" << fmt17(stats.mean_hit_step) << '\n';
            }
            return 0;
        }
        if (*swp) {
            const auto map = swp_map.build();
            EnsembleConfig cfg{swp_x0, swp_steps, swp_paths, seed, swp_target.build(map), swp_tol,
                               swp_window};
            ConditionQuery query{swp_condition, swp_ctl.k, swp_ctl.m, swp_L, swp_A, swp_M};
            const auto grid = sweep(map, swp_ctl.build(), parse_grid(swp_alpha), parse_grid(swp_l),
                                    cfg, query, threads);
            if (out.empty()) {
                write_sweep_csv(std::cout, grid);
            } else {
                auto os = open_csv(out);
                write_sweep_csv(os, grid);
            }
            return 0;
        }
        if (*rep) {
            const std::string dir = out.empty() ? "reproduce_" + example_id : out;
            write_example_bundle(example_id, dir, seed, threads);
            std::cout << "wrote " << dir << "/manifest.json\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
