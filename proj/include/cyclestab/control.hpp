#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cyclestab/maps.hpp"
#include "cyclestab/noise.hpp"

namespace cyclestab {

enum class ControlFamily { none, pbc, toc };

/// end_of_block applies control when computing x_{n+1} at n = sk-1 (the form
/// used throughout the main analysis); start_of_block applies it at n = k(s-1),
/// so the first controlled transition happens immediately.
enum class PulsePhase { end_of_block, start_of_block };

/// Control family and parameters. For cycle stabilization set d > 1 and m with
/// k = m*d; PBC then blends with the state md steps back, while point control
/// (d = 1) blends with the current state regardless of k. `target` is the TOC
/// target (an equilibrium or one cycle point); PBC ignores it.
struct ControlSpec {
    ControlFamily family = ControlFamily::none;
    double alpha = 0.0;
    double l = 0.0;
    int k = 1;
    int m = 1;
    int d = 1;
    PulsePhase phase = PulsePhase::end_of_block;
    double target = 0.0;
    bool truncate = true;
    NoiseSpec noise = NoiseSpec::none();
};

inline void validate(const ControlSpec& spec) {
    // alpha = 1 is the degenerate hard reset; the analysis assumes [0, 1).
    if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0))
        throw std::invalid_argument("control: alpha must be in [0, 1]");
    if (spec.l < 0.0) throw std::invalid_argument("control: l must be >= 0");
    if (spec.k < 1 || spec.m < 1 || spec.d < 1)
        throw std::invalid_argument("control: k, m, d must be >= 1");
    if (spec.d > 1 && spec.k != spec.m * spec.d)
        throw std::invalid_argument("control: cycle stabilization requires k = m*d");
}

inline bool control_fires_at(const ControlSpec& spec, std::int64_t n) {
    if (spec.family == ControlFamily::none) return false;
    if (spec.phase == PulsePhase::end_of_block) return (n + 1) % spec.k == 0;
    return n % spec.k == 0;
}

/// Trajectory state: step counter, current value, and (for delayed PBC) a ring
/// buffer holding the last m*d states. The buffer is primed by replicating x0
/// so the first block is well defined.
struct SystemState {
    std::int64_t n = 0;
    double x = 0.0;
    std::vector<double> window;
    std::size_t head = 0;
    RngStream stream;
    bool diverged = false;
};

inline SystemState make_state(const ControlSpec& spec, double x0, RngStream stream) {
    validate(spec);
    SystemState state{0, x0, {}, 0, stream, false};
    const std::size_t depth =
        (spec.family == ControlFamily::pbc && spec.d > 1) ? static_cast<std::size_t>(spec.m * spec.d) : 1;
    state.window.assign(depth, x0);
    return state;
}

inline constexpr double kDivergenceBound = 1e12;

/// Advance one step and return the new state value. At control steps the pulse
/// draws xi from the stream and applies the family formula; other steps apply
/// the raw map. With truncate=true every emitted state is clamped at zero.
/// Non-finite intermediates or |x| > 1e12 mark the state diverged instead of
/// throwing; the caller stops iterating.
inline double controlled_step(const MapModel& map, const ControlSpec& spec, SystemState& state) {
    if (state.diverged) return state.x;
    double fx;
    try {
        fx = eval(map, state.x);
    } catch (const std::domain_error&) {
        state.diverged = true;
        return state.x;
    }
    double next = fx;
    if (control_fires_at(spec, state.n)) {
        const double xi = sample(spec.noise, state.stream);
        const double c = spec.alpha + spec.l * xi;
        const double ref =
            (spec.family == ControlFamily::toc) ? spec.target : state.window[state.head];
        // (1-c) f(x) + c ref, written so that ref == f(x) reproduces it exactly.
        next = fx - c * (fx - ref);
    }
    if (spec.truncate) next = std::max(next, 0.0);
    if (!std::isfinite(next) || std::abs(next) > kDivergenceBound) {
        state.diverged = true;
        return state.x;
    }
    state.window[state.head] = next;
    state.head = (state.head + 1) % state.window.size();
    state.x = next;
    state.n += 1;
    return next;
}

/// Per-family Lipschitz data for the local scale factor: TOC needs the
/// Lipschitz bound L (or L^m(d)); smooth PBC needs the multiplier A (or
/// A^m(d)); sign-change PBC needs L. Exactly one of the two fields selects the
/// PBC variant.
struct LocalScaleData {
    std::optional<double> L;
    std::optional<double> A;
};

/// The u = 0 Lipschitz factor of the controlled step at the equilibrium:
///   toc             |1 - alpha - l v| L
///   pbc smooth      |(1-alpha) A + alpha + (1-A) l v|
///   pbc sign-change max{ |alpha + l v|, |1 - alpha - l v| L }
inline double local_scale_factor(const ControlSpec& spec, double v, const LocalScaleData& data) {
    const double c = spec.alpha + spec.l * v;
    switch (spec.family) {
        case ControlFamily::toc:
            if (!data.L) throw std::invalid_argument("local_scale_factor: toc requires L");
            return std::abs(1.0 - c) * (*data.L);
        case ControlFamily::pbc:
            if (data.A && !data.L) {
                const double A = *data.A;
                return std::abs((1.0 - spec.alpha) * A + spec.alpha + (1.0 - A) * spec.l * v);
            }
            if (data.L && !data.A)
                return std::max(std::abs(c), std::abs(1.0 - c) * (*data.L));
            throw std::invalid_argument("local_scale_factor: pbc requires exactly one of A, L");
        case ControlFamily::none:
            throw std::invalid_argument("local_scale_factor: no control family");
    }
    return 0.0;
}

}  // namespace cyclestab
