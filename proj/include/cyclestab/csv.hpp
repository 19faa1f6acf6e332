#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "cyclestab/engine.hpp"

namespace cyclestab {

/// Shortest form with 17 significant digits; round-trips every double.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Trajectory CSV `n,x,controlled`: one row per state; controlled = 1 marks a
/// state produced by a control application.
inline void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj) {
    os << "n,x,controlled\n";
    std::size_t c = 0;
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
        bool controlled = false;
        if (n > 0) {
            while (c < traj.control_steps.size() &&
                   traj.control_steps[c] < static_cast<std::int64_t>(n) - 1)
                ++c;
            controlled = c < traj.control_steps.size() &&
                         traj.control_steps[c] == static_cast<std::int64_t>(n) - 1;
        }
        os << n << ',' << fmt17(traj.states[n]) << ',' << (controlled ? 1 : 0) << '\n';
    }
}

/// Ensemble CSV `path,converged,hit_step,residual`.
inline void write_ensemble_csv(std::ostream& os, const EnsembleStats& stats) {
    os << "path,converged,hit_step,residual\n";
    for (std::size_t p = 0; p < stats.outcomes.size(); ++p) {
        const auto& o = stats.outcomes[p];
        os << p << ',' << (o.converged ? 1 : 0) << ',' << o.hit_step << ',' << fmt17(o.residual)
           << '\n';
    }
}

/// Sweep CSV `alpha,l,success_fraction,lambda,satisfied`, row-major in alpha.
inline void write_sweep_csv(std::ostream& os, const SweepGrid& grid) {
    os << "alpha,l,success_fraction,lambda,satisfied\n";
    for (std::size_t i = 0; i < grid.alpha_axis.size(); ++i) {
        for (std::size_t j = 0; j < grid.l_axis.size(); ++j) {
            const auto& cell = grid.at(i, j);
            os << fmt17(grid.alpha_axis[i]) << ',' << fmt17(grid.l_axis[j]) << ','
               << fmt17(cell.success_fraction) << ',' << fmt17(cell.lambda) << ','
               << (cell.satisfied ? 1 : 0) << '\n';
        }
    }
}

/// Cycle CSV `cycle,d,i,K,A_i,L_i,u0,A_d,L_d`, one row per cycle point.
inline void write_cycles_csv(std::ostream& os, const std::vector<CycleInfo>& cycles) {
    os << "cycle,d,i,K,A_i,L_i,u0,A_d,L_d\n";
    for (std::size_t c = 0; c < cycles.size(); ++c) {
        const auto& cy = cycles[c];
        for (std::size_t i = 0; i < cy.points.size(); ++i) {
            os << c << ',' << cy.d << ',' << i + 1 << ',' << fmt17(cy.points[i]) << ','
               << fmt17(cy.multipliers[i]) << ',' << fmt17(cy.lipschitz[i]) << ','
               << fmt17(cy.u0) << ',' << fmt17(cy.multiplier_product) << ','
               << fmt17(cy.lipschitz_product) << '\n';
        }
    }
}

/// Binary mode keeps line endings LF everywhere.
inline std::ofstream open_csv(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
    return os;
}

}  // namespace cyclestab
