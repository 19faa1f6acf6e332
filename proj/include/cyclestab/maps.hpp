#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cyclestab {

/// A one-dimensional map x -> f(x) with named parameters and an optional
/// analytic derivative. When `df` is empty, derivatives fall back to a
/// central finite difference with step 1e-6.
struct MapModel {
    std::string name;
    std::vector<std::pair<std::string, double>> params;
    std::function<double(double)> f;
    std::function<double(double)> df;
};

inline double eval(const MapModel& map, double x) {
    const double y = map.f(x);
    if (!std::isfinite(y)) {
        throw std::domain_error("map '" + map.name + "' produced a non-finite value at x=" +
                                std::to_string(x));
    }
    return y;
}

inline double deriv(const MapModel& map, double x) {
    if (map.df) {
        const double y = map.df(x);
        if (!std::isfinite(y)) {
            throw std::domain_error("map '" + map.name + "' derivative non-finite at x=" +
                                    std::to_string(x));
        }
        return y;
    }
    const double h = 1e-6;
    return (eval(map, x + h) - eval(map, x - h)) / (2.0 * h);
}

/// f^n(x); f^0 is the identity.
inline double iterate(const MapModel& map, double x, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("iterate: n must be >= 0");
    for (std::int64_t i = 0; i < n; ++i) x = eval(map, x);
    return x;
}

inline MapModel make_ricker(double r) {
    return MapModel{
        "ricker",
        {{"r", r}},
        [r](double x) { return x * std::exp(r * (1.0 - x)); },
        [r](double x) { return std::exp(r * (1.0 - x)) * (1.0 - r * x); },
    };
}

inline MapModel make_logistic(double r) {
    return MapModel{
        "logistic",
        {{"r", r}},
        [r](double x) { return r * x * (1.0 - x); },
        [r](double x) { return r * (1.0 - 2.0 * x); },
    };
}

/// Maynard Smith model f(x) = 3x / (2 + (x-3)^2); equilibria at 0, 2, 4.
inline MapModel make_maynard_smith() {
    return MapModel{
        "maynard_smith",
        {},
        [](double x) {
            const double q = x - 3.0;
            return 3.0 * x / (2.0 + q * q);
        },
        [](double x) {
            const double q = x - 3.0;
            const double den = 2.0 + q * q;
            return 3.0 * (11.0 - x * x) / (den * den);
        },
    };
}

/// Look up a built-in map by name. Parameters not named here are rejected.
inline MapModel make_map(const std::string& name,
                         const std::vector<std::pair<std::string, double>>& params = {}) {
    auto get_r = [&params]() {
        for (const auto& [k, v] : params)
            if (k == "r") return v;
        throw std::invalid_argument("map requires parameter r");
    };
    if (name == "ricker") return make_ricker(get_r());
    if (name == "logistic") return make_logistic(get_r());
    if (name == "maynard_smith") return make_maynard_smith();
    throw std::invalid_argument("unknown map '" + name + "'");
}

/// A period-d orbit K_1..K_d with f(K_i) = K_{i+1} (indices mod d), the
/// multipliers A_i = f'(K_i), and per-point Lipschitz constants L_i valid on
/// [K_i - u0, K_i + u0] pinned at K_i: |f(x) - K_{i+1}| <= L_i |x - K_i|.
struct CycleInfo {
    int d = 1;
    std::vector<double> points;
    std::vector<double> multipliers;
    std::vector<double> lipschitz;
    double u0 = 0.0;
    double multiplier_product = 0.0;  // A(d) = prod A_i
    double lipschitz_product = 1.0;   // L(d) = prod max(1, L_i)
};

inline double cycle_multiplier(const CycleInfo& cycle) {
    double p = 1.0;
    for (double a : cycle.multipliers) p *= a;
    return p;
}

inline double lipschitz_product(const CycleInfo& cycle) {
    double p = 1.0;
    for (double L : cycle.lipschitz) p *= std::max(1.0, L);
    return p;
}

/// Best Lipschitz constant pinned at `center` over [center-radius, center+radius],
/// estimated as the sup of |f(x) - f(center)| / |x - center| on a uniform grid
/// with spacing `step`. The grid estimate lower-bounds the true sup; the result
/// is inflated by 1e-7 relative so it remains a usable upper bound for smooth maps.
inline double estimate_lipschitz(const MapModel& map, double center, double radius,
                                 double step = 0.0) {
    if (!(radius > 0.0)) throw std::invalid_argument("estimate_lipschitz: radius must be > 0");
    if (step <= 0.0) step = radius / 5e4;
    const double fc = eval(map, center);
    const auto n = static_cast<std::int64_t>(std::llround(2.0 * radius / step));
    double sup = 0.0;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double x = (i == n) ? center + radius
                                  : center - radius + static_cast<double>(i) * step;
        const double dx = x - center;
        if (std::abs(dx) < 0.5 * step) continue;  // pin point excluded
        const double ratio = std::abs(eval(map, x) - fc) / std::abs(dx);
        sup = std::max(sup, ratio);
    }
    return sup * (1.0 + 1e-7);
}

/// Domain-wide variant on [0, hi]; the default range covers the built-in maps,
/// which decay beyond x = 50.
inline double estimate_lipschitz_global(const MapModel& map, double center, double hi = 50.0,
                                        double step = 1e-4) {
    if (!(hi > 0.0) || step <= 0.0) throw std::invalid_argument("estimate_lipschitz_global: bad range");
    const double fc = eval(map, center);
    const auto n = static_cast<std::int64_t>(std::llround(hi / step));
    double sup = 0.0;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double x = (i == n) ? hi : static_cast<double>(i) * step;
        const double dx = x - center;
        if (std::abs(dx) < 0.5 * step) continue;
        const double ratio = std::abs(eval(map, x) - fc) / std::abs(dx);
        sup = std::max(sup, ratio);
    }
    return sup * (1.0 + 1e-7);
}

/// Seed interval and density for the cycle search.
struct SearchGrid {
    double lo = 0.0;
    double hi = 10.0;
    int seeds = 1000;
};

namespace detail {

inline double fpow(const MapModel& map, double x, int d) { return iterate(map, x, d); }

inline double fpow_deriv(const MapModel& map, double x, int d) {
    double prod = 1.0;
    for (int j = 0; j < d; ++j) {
        prod *= deriv(map, x);
        x = eval(map, x);
    }
    return prod;
}

/// Newton refinement of a fixed point of f^d. Returns nullopt when the
/// iteration leaves the guard region, stalls, or fails to meet `tol`.
inline std::optional<double> newton_fixed_point(const MapModel& map, int d, double seed,
                                                double lo, double hi, double tol) {
    const double span = hi - lo;
    const double guard_lo = lo - span - 1.0, guard_hi = hi + span + 1.0;
    double x = seed;
    try {
        for (int it = 0; it < 100; ++it) {
            const double g = fpow(map, x, d) - x;
            if (std::abs(g) <= tol) return x;
            const double dg = fpow_deriv(map, x, d) - 1.0;
            if (std::abs(dg) < 1e-14) return std::nullopt;
            x -= g / dg;
            if (!std::isfinite(x) || x < guard_lo || x > guard_hi) return std::nullopt;
        }
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
    return std::nullopt;
}

inline int minimal_period(const MapModel& map, double x, int d, double tol) {
    for (int dp = 1; dp < d; ++dp) {
        if (d % dp != 0) continue;
        if (std::abs(fpow(map, x, dp) - x) <= 10.0 * tol) return dp;
    }
    return d;
}

}  // namespace detail

/// All period-d cycles of `map` whose f^d fixed points lie in [grid.lo, grid.hi].
/// Uniform grid seeding plus Newton on f^d(x) - x; roots whose minimal period
/// divides d properly are dropped. Each orbit is reported once, starting from
/// its smallest point (images may lie outside the search interval).
/// When u0 is not given it is chosen automatically: at most 0.5, at most 45% of
/// the smallest gap between cycle points, and (for positive cycles) at most 90%
/// of the smallest point.
inline std::vector<CycleInfo> find_cycle(const MapModel& map, int d, const SearchGrid& grid,
                                         double tol = 1e-12,
                                         std::optional<double> u0 = std::nullopt) {
    if (d < 1) throw std::invalid_argument("find_cycle: d must be >= 1");
    if (!(grid.hi > grid.lo) || grid.seeds < 2) throw std::invalid_argument("find_cycle: bad search grid");

    const double root_merge = std::max(1e-7, 100.0 * tol);
    std::vector<double> roots;
    for (int i = 0; i <= grid.seeds; ++i) {
        const double seed = grid.lo + (grid.hi - grid.lo) * static_cast<double>(i) /
                                          static_cast<double>(grid.seeds);
        auto x = detail::newton_fixed_point(map, d, seed, grid.lo, grid.hi, tol);
        if (!x) continue;
        if (*x < grid.lo - root_merge || *x > grid.hi + root_merge) continue;
        bool known = false;
        for (double r : roots)
            if (std::abs(r - *x) <= root_merge) { known = true; break; }
        if (!known) roots.push_back(*x);
    }
    std::sort(roots.begin(), roots.end());

    std::vector<CycleInfo> out;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        if (detail::minimal_period(map, roots[i], d, tol) != d) continue;

        // Collect the orbit, polishing each image back onto a root of f^d.
        std::vector<double> orbit{roots[i]};
        for (int j = 1; j < d; ++j) {
            double img = eval(map, orbit.back());
            if (auto ref = detail::newton_fixed_point(map, d, img, grid.lo, grid.hi, tol)) img = *ref;
            orbit.push_back(img);
            for (std::size_t r = 0; r < roots.size(); ++r)
                if (std::abs(roots[r] - img) <= root_merge) used[r] = true;
        }
        const auto smallest =
            std::min_element(orbit.begin(), orbit.end()) - orbit.begin();
        std::rotate(orbit.begin(), orbit.begin() + smallest, orbit.end());

        CycleInfo info;
        info.d = d;
        info.points = orbit;
        double radius = 0.5;
        double min_gap = std::numeric_limits<double>::infinity();
        double min_pt = *std::min_element(orbit.begin(), orbit.end());
        for (std::size_t a = 0; a < orbit.size(); ++a)
            for (std::size_t b = a + 1; b < orbit.size(); ++b)
                min_gap = std::min(min_gap, std::abs(orbit[a] - orbit[b]));
        if (std::isfinite(min_gap)) radius = std::min(radius, 0.45 * min_gap);
        if (min_pt > 0.0) radius = std::min(radius, 0.9 * min_pt);
        info.u0 = u0.value_or(radius);
        for (double K : orbit) {
            info.multipliers.push_back(deriv(map, K));
            info.lipschitz.push_back(estimate_lipschitz(map, K, info.u0));
        }
        info.multiplier_product = cycle_multiplier(info);
        info.lipschitz_product = lipschitz_product(info);
        out.push_back(std::move(info));
    }
    return out;
}

}  // namespace cyclestab
