#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cyclestab/conditions.hpp"
#include "cyclestab/control.hpp"
#include "cyclestab/maps.hpp"
#include "cyclestab/noise.hpp"

namespace cyclestab {

struct TrajectoryRecord {
    std::vector<double> states;               // x_0 .. x_N
    std::vector<std::int64_t> control_steps;  // n at which the pulse fired
    bool diverged = false;
};

/// Simulate `steps` transitions from x0. Deterministic given all inputs,
/// including the stream. On divergence the record stops at the last finite
/// state.
inline TrajectoryRecord run_trajectory(const MapModel& map, const ControlSpec& spec, double x0,
                                       std::int64_t steps, RngStream stream) {
    if (steps < 1) throw std::invalid_argument("run_trajectory: steps must be >= 1");
    TrajectoryRecord rec;
    rec.states.reserve(static_cast<std::size_t>(steps) + 1);
    rec.states.push_back(x0);
    SystemState state = make_state(spec, x0, stream);
    for (std::int64_t n = 0; n < steps; ++n) {
        const bool fired = control_fires_at(spec, n);
        const double next = controlled_step(map, spec, state);
        if (state.diverged) {
            rec.diverged = true;
            break;
        }
        if (fired) rec.control_steps.push_back(n);
        rec.states.push_back(next);
    }
    return rec;
}

struct PointTarget {
    double value = 0.0;
};
using Target = std::variant<PointTarget, CycleInfo>;

struct ConvergenceResult {
    bool converged = false;
    std::int64_t hit_step = -1;  // start of the sustained in-tolerance suffix
    double residual = std::numeric_limits<double>::infinity();
    std::string target_kind = "point";
    int phase = 0;  // cycle phase alignment: x_n is compared to K_{((n+phase) mod d)+1}
};

namespace detail {
inline const std::vector<double>& target_points(const Target& target) {
    static const std::vector<double> empty;
    if (const auto* p = std::get_if<CycleInfo>(&target)) return p->points;
    return empty;
}
}  // namespace detail

/// Sustained-suffix convergence test. The trajectory converged when the
/// residual stays below tol over the final `window` states; hit_step is where
/// that suffix begins. Cycle targets are phase aligned first: the offset
/// minimizing the suffix start wins, and the residual is the max over the last
/// d states of the aligned point distances. window = 0 selects max(20, 2d).
inline ConvergenceResult detect_convergence(const TrajectoryRecord& traj, const Target& target,
                                            double tol = 1e-3, std::int64_t window = 0) {
    std::vector<double> pts;
    std::string kind = "point";
    if (const auto* p = std::get_if<PointTarget>(&target)) {
        pts = {p->value};
    } else {
        pts = std::get<CycleInfo>(target).points;
        kind = "cycle";
    }
    const auto d = static_cast<std::int64_t>(pts.size());
    if (d < 1) throw std::invalid_argument("detect_convergence: empty target");
    if (window <= 0) window = std::max<std::int64_t>(20, 2 * d);
    if (window < d) throw std::invalid_argument("detect_convergence: window must be >= d");

    ConvergenceResult best;
    best.target_kind = kind;
    if (traj.diverged || traj.states.empty()) return best;
    const auto N = static_cast<std::int64_t>(traj.states.size()) - 1;

    for (std::int64_t phase = 0; phase < d; ++phase) {
        auto res_at = [&](std::int64_t n) {
            return std::abs(traj.states[static_cast<std::size_t>(n)] -
                            pts[static_cast<std::size_t>((n + phase) % d)]);
        };
        std::int64_t h = N + 1;
        while (h > 0 && res_at(h - 1) < tol) --h;
        double terminal = 0.0;
        for (std::int64_t n = std::max<std::int64_t>(0, N - d + 1); n <= N; ++n)
            terminal = std::max(terminal, res_at(n));
        if (phase == 0 || h < best.hit_step) {
            best.converged = (N + 1 - h) >= window;
            best.hit_step = h;
            best.residual = terminal;
            best.phase = static_cast<int>(phase);
        }
    }
    if (!best.converged) best.hit_step = -1;
    return best;
}

struct PathOutcome {
    bool converged = false;
    std::int64_t hit_step = -1;
    double residual = std::numeric_limits<double>::infinity();
};

struct EnsembleStats {
    int paths = 0;
    double success_fraction = 0.0;
    double mean_hit_step = std::numeric_limits<double>::quiet_NaN();  // over successes
    std::uint64_t base_seed = 0;
    std::vector<PathOutcome> outcomes;
};

/// Run `paths` independent trajectories with streams (base_seed, path_index)
/// and reduce in index order, so the result does not depend on the thread
/// count. threads = 1 is the reference single-threaded mode.
inline EnsembleStats ensemble(const MapModel& map, const ControlSpec& spec, double x0,
                              std::int64_t steps, int paths, std::uint64_t base_seed,
                              const Target& target, double tol = 1e-3, std::int64_t window = 0,
                              int threads = 1) {
    if (paths < 1) throw std::invalid_argument("ensemble: paths must be >= 1");
    EnsembleStats stats;
    stats.paths = paths;
    stats.base_seed = base_seed;
    stats.outcomes.resize(static_cast<std::size_t>(paths));

    auto run_range = [&](int lo, int hi) {
        for (int p = lo; p < hi; ++p) {
            const auto traj = run_trajectory(map, spec, x0, steps,
                                             RngStream(base_seed, static_cast<std::uint64_t>(p)));
            const auto conv = detect_convergence(traj, target, tol, window);
            stats.outcomes[static_cast<std::size_t>(p)] =
                PathOutcome{conv.converged, conv.hit_step, conv.residual};
        }
    };

    threads = std::max(1, std::min(threads, paths));
    if (threads == 1) {
        run_range(0, paths);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (paths + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk, hi = std::min(paths, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    int successes = 0;
    double hit_sum = 0.0;
    for (const auto& o : stats.outcomes) {
        if (o.converged) {
            ++successes;
            hit_sum += static_cast<double>(o.hit_step);
        }
    }
    stats.success_fraction = static_cast<double>(successes) / static_cast<double>(paths);
    if (successes > 0) stats.mean_hit_step = hit_sum / successes;
    return stats;
}

/// Empirical per-block contraction exponent: least-squares slope of
/// ln(distance to target) sampled at block boundaries n = 0, k, 2k, ...,
/// truncated before the distance reaches 1e-12. NaN when the trajectory does
/// not converge (or leaves fewer than two usable blocks).
inline double estimate_contraction_rate(const MapModel& map, const ControlSpec& spec, double x0,
                                        std::int64_t steps, RngStream stream, const Target& target,
                                        double tol = 1e-3, std::int64_t window = 0) {
    const auto traj = run_trajectory(map, spec, x0, steps, stream);
    const auto conv = detect_convergence(traj, target, tol, window);
    if (!conv.converged) return std::numeric_limits<double>::quiet_NaN();

    std::vector<double> pts;
    if (const auto* p = std::get_if<PointTarget>(&target)) pts = {p->value};
    else pts = std::get<CycleInfo>(target).points;
    const auto d = static_cast<std::int64_t>(pts.size());

    std::vector<double> logz;
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(traj.states.size()); n += spec.k) {
        const double z = std::abs(traj.states[static_cast<std::size_t>(n)] -
                                  pts[static_cast<std::size_t>((n + conv.phase) % d)]);
        if (z <= 1e-12) break;
        logz.push_back(std::log(z));
    }
    if (logz.size() < 2) return std::numeric_limits<double>::quiet_NaN();

    const auto n = static_cast<double>(logz.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < logz.size(); ++i) {
        const auto x = static_cast<double>(i);
        sx += x;
        sy += logz[i];
        sxx += x * x;
        sxy += x * logz[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct SweepCell {
    double success_fraction = std::numeric_limits<double>::quiet_NaN();
    double lambda = std::numeric_limits<double>::quiet_NaN();
    bool satisfied = false;
    bool error = false;
};

/// Rectangular (alpha, l) grid, row-major with alpha as the row axis.
struct SweepGrid {
    std::vector<double> alpha_axis;
    std::vector<double> l_axis;
    std::vector<SweepCell> cells;

    const SweepCell& at(std::size_t i, std::size_t j) const { return cells[i * l_axis.size() + j]; }
};

struct EnsembleConfig {
    double x0 = 0.5;
    std::int64_t steps = 500;
    int paths = 100;
    std::uint64_t base_seed = 1;
    Target target = PointTarget{1.0};
    double tol = 1e-3;
    std::int64_t window = 0;
};

/// Inclusive uniform axis lo..hi with spacing `step`; hi is kept when it lands
/// within 1e-12 of a grid node. lo == hi collapses to a single value.
inline std::vector<double> make_axis(double lo, double hi, double step) {
    if (hi < lo) throw std::invalid_argument("make_axis: hi < lo");
    if (lo == hi) return {lo};
    if (!(step > 0.0)) throw std::invalid_argument("make_axis: step must be > 0");
    std::vector<double> axis;
    const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i) axis.push_back(lo + static_cast<double>(i) * step);
    if (std::abs(axis.back() - hi) <= 1e-12) axis.back() = hi;
    return axis;
}

/// Per-cell analytic verdict plus empirical ensemble over an (alpha, l) grid.
/// Cell errors are recorded in the cell and never abort the sweep.
inline SweepGrid sweep(const MapModel& map, const ControlSpec& spec_template,
                       std::vector<double> alpha_axis, std::vector<double> l_axis,
                       const EnsembleConfig& cfg, const ConditionQuery& query,
                       int threads = 1) {
    if (alpha_axis.empty() || l_axis.empty()) throw std::invalid_argument("sweep: empty grid");
    SweepGrid grid;
    grid.alpha_axis = std::move(alpha_axis);
    grid.l_axis = std::move(l_axis);
    grid.cells.resize(grid.alpha_axis.size() * grid.l_axis.size());
    for (std::size_t i = 0; i < grid.alpha_axis.size(); ++i) {
        for (std::size_t j = 0; j < grid.l_axis.size(); ++j) {
            SweepCell cell;
            ControlSpec spec = spec_template;
            spec.alpha = grid.alpha_axis[i];
            spec.l = grid.l_axis[j];
            try {
                const auto rep = evaluate_condition(query, spec.noise, spec.alpha, spec.l);
                cell.lambda = rep.lambda;
                cell.satisfied = rep.satisfied;
                const auto stats = ensemble(map, spec, cfg.x0, cfg.steps, cfg.paths, cfg.base_seed,
                                            cfg.target, cfg.tol, cfg.window, threads);
                cell.success_fraction = stats.success_fraction;
            } catch (const std::exception&) {
                cell.error = true;
            }
            grid.cells[i * grid.l_axis.size() + j] = cell;
        }
    }
    return grid;
}

}  // namespace cyclestab
