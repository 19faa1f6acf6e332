#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "cyclestab/noise.hpp"

namespace cyclestab {

/// Verdict of one sufficient stabilization condition. `satisfied` is the
/// strict comparison lambda > threshold with no tolerance; `margin` carries
/// the slack for callers that want their own. lambda = +inf (an atom of the
/// scale factor exactly at zero) is reported as vacuously satisfied with the
/// `vacuous` flag raised.
struct ConditionReport {
    std::string condition_id;
    double lambda = 0.0;
    double threshold = 0.0;
    bool satisfied = false;
    double m_factor = 0.0;  // sup of the local scale factor over the noise range
    double margin = 0.0;
    bool vacuous = false;
};

namespace detail {
inline ConditionReport make_report(std::string id, double lambda, double threshold, double m) {
    ConditionReport rep;
    rep.condition_id = std::move(id);
    rep.lambda = lambda == 0.0 ? 0.0 : lambda;  // normalize -0
    rep.threshold = threshold;
    rep.satisfied = lambda > threshold;
    rep.m_factor = m;
    rep.margin = lambda - threshold;
    rep.vacuous = std::isinf(lambda) && lambda > 0.0;
    return rep;
}

/// Checkers evaluate atoms in closed form and the continuous uniform by
/// quadrature; Monte Carlo only on explicit request.
inline EvalMethod default_method(const NoiseSpec& noise) {
    if (noise.kind == NoiseKind::uniform) return Quadrature{};
    return ClosedForm{};
}
}  // namespace detail

/// Half-open or open parameter interval; `empty` flags a window that closed up
/// (width below 1e-12).
struct ParamRange {
    std::string variable;
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = true;
    bool hi_open = true;
    bool empty = false;

    bool contains(double v) const {
        if (empty) return false;
        const bool above = lo_open ? v > lo : v >= lo;
        const bool below = hi_open ? v < hi : v <= hi;
        return above && below;
    }
};

/// TOC at a point equilibrium: -E ln|1 - alpha - l xi| > k ln L.
inline ConditionReport check_toc_point(const NoiseSpec& noise, double alpha, double l, int k,
                                       double L, std::optional<EvalMethod> method = {}) {
    if (!(L >= 1.0)) throw std::invalid_argument("check_toc_point: L must be >= 1");
    if (k < 1) throw std::invalid_argument("check_toc_point: k must be >= 1");
    const double lambda =
        -expected_log_abs(noise, 1.0 - alpha, -l, method.value_or(detail::default_method(noise)));
    const double M = L * (std::abs(1.0 - alpha) + l);
    return detail::make_report("toc_point", lambda, k * std::log(L), M);
}

/// TOC at a d-cycle: same lambda, threshold m ln L(d).
inline ConditionReport check_toc_cycle(const NoiseSpec& noise, double alpha, double l, int m,
                                       double L_of_d, std::optional<EvalMethod> method = {}) {
    if (!(L_of_d >= 1.0)) throw std::invalid_argument("check_toc_cycle: L(d) must be >= 1");
    if (m < 1) throw std::invalid_argument("check_toc_cycle: m must be >= 1");
    const double lambda =
        -expected_log_abs(noise, 1.0 - alpha, -l, method.value_or(detail::default_method(noise)));
    const double M = (1.0 - alpha + l) * std::pow(L_of_d, m);
    auto rep = detail::make_report("toc_cycle", lambda, m * std::log(L_of_d), M);
    return rep;
}

/// Deterministic TOC ranges: alpha in (1 - L^-k, 1), and for a given alpha
/// l <= min{1 - alpha, alpha - 1 + L^-k}.
inline ParamRange toc_deterministic_alpha_range(double L, int k) {
    if (!(L >= 1.0)) throw std::invalid_argument("toc_deterministic_alpha_range: L must be >= 1");
    ParamRange r{"alpha", 1.0 - std::pow(L, -k), 1.0, true, true, false};
    if (r.hi - r.lo <= 1e-12) r.empty = true;
    return r;
}

inline ParamRange toc_deterministic_l_range(double alpha, double L, int k) {
    const double hi = std::min(1.0 - alpha, alpha - 1.0 + std::pow(L, -k));
    ParamRange r{"l", 0.0, hi, false, false, hi < 0.0};
    return r;
}

/// Bernoulli-noise l window for TOC:
/// sqrt((1-alpha)^2 - L^-2k) < l < sqrt((1-alpha)^2 + L^-2k), lower end
/// clipped at zero when the radicand is negative.
inline ParamRange toc_bernoulli_l_window(double alpha, double L, int k) {
    const double c2 = (1.0 - alpha) * (1.0 - alpha);
    const double t = std::pow(L, -2.0 * k);
    const double lo2 = c2 - t;
    ParamRange r{"l", lo2 > 0.0 ? std::sqrt(lo2) : 0.0, std::sqrt(c2 + t),
                 lo2 > 0.0, true, false};
    if (r.hi - r.lo <= 1e-12) r.empty = true;
    return r;
}

/// Smooth PBC at an equilibrium with multiplier A:
/// -E ln|(1-alpha) A + alpha + (1-A) l xi| > (k-1) ln|A|.
inline ConditionReport check_pbc_smooth(const NoiseSpec& noise, double alpha, double l, int k,
                                        double A, std::optional<EvalMethod> method = {}) {
    if (k < 1) throw std::invalid_argument("check_pbc_smooth: k must be >= 1");
    const double a = (1.0 - alpha) * A + alpha;
    const double b = (1.0 - A) * l;
    const double lambda =
        -expected_log_abs(noise, a, b, method.value_or(detail::default_method(noise)));
    const double M = std::abs(a) + std::abs(b);
    return detail::make_report("pbc_smooth", lambda, (k - 1) * std::log(std::abs(A)), M);
}

/// Bernoulli-noise l window for smooth PBC: the satisfied set is an interval
/// in l^2, returned as an l interval with the lower end clipped at zero.
inline ParamRange pbc_bernoulli_l_window(double alpha, double A, int k) {
    if (A == 1.0) throw std::invalid_argument("pbc_bernoulli_l_window: A must differ from 1");
    const double a = (1.0 - alpha) * A + alpha;
    const double den = (1.0 - A) * (1.0 - A);
    const double t = std::pow(std::abs(A), -2.0 * (k - 1));
    const double lo2 = (a * a - t) / den;
    const double hi2 = (a * a + t) / den;
    ParamRange r{"l", lo2 > 0.0 ? std::sqrt(lo2) : 0.0, std::sqrt(hi2), lo2 > 0.0, true, false};
    if (r.hi - r.lo <= 1e-12) r.empty = true;
    return r;
}

/// PBC at a d-cycle: delegates to the smooth check with A := A(d)^m, k := 1
/// (threshold 0).
inline ConditionReport check_pbc_cycle(const NoiseSpec& noise, double alpha, double l,
                                       double A_of_d, int m,
                                       std::optional<EvalMethod> method = {}) {
    if (m < 1) throw std::invalid_argument("check_pbc_cycle: m must be >= 1");
    auto rep = check_pbc_smooth(noise, alpha, l, 1, std::pow(A_of_d, m), method);
    rep.condition_id = "pbc_cycle";
    return rep;
}

/// Sign-change PBC: -E max{ln|alpha + l xi|, ln(|1 - alpha - l xi| L)} > (k-1) ln L.
inline ConditionReport check_pbc_max(const NoiseSpec& noise, double alpha, double l, int k,
                                     double L, std::optional<EvalMethod> method = {}) {
    if (!(L >= 1.0)) throw std::invalid_argument("check_pbc_max: L must be >= 1");
    if (k < 1) throw std::invalid_argument("check_pbc_max: k must be >= 1");
    EvalMethod m = method.value_or(detail::default_method(noise));
    if (std::holds_alternative<ClosedForm>(m)) m = Quadrature{};  // atom-wise either way
    const double lambda = -expected_max_log(noise, alpha, l, L, m);
    const double M = std::max((1.0 - alpha + l) * L, alpha + l);
    return detail::make_report("pbc_max", lambda, (k - 1) * std::log(L), M);
}

enum class SignChangeRule { none, tpia, tpib };

struct SignChangeVerdict {
    bool satisfied = false;
    SignChangeRule rule = SignChangeRule::none;
};

inline const char* to_string(SignChangeRule rule) {
    switch (rule) {
        case SignChangeRule::tpia: return "tpia";
        case SignChangeRule::tpib: return "tpib";
        default: return "none";
    }
}

/// Deterministic-dominant sign-change PBC test:
///   k = 1: alpha > 1 - 1/L and l < 1/L - 1 + alpha
///   k > 1: 1 < L^k < L + 1, alpha in (1 - L^-k, L^{-k+1}),
///          l in (0, min{L^-k - 1 + alpha, L^{-k+1} - alpha})
/// Requires l < min{alpha, 1 - alpha}.
inline SignChangeVerdict check_pbc_deterministic_signchange(double alpha, double l, int k, double L) {
    if (k < 1) throw std::invalid_argument("check_pbc_deterministic_signchange: k must be >= 1");
    if (!(L > 0.0)) throw std::invalid_argument("check_pbc_deterministic_signchange: L must be > 0");
    if (!(l < std::min(alpha, 1.0 - alpha))) return {false, SignChangeRule::none};
    if (k == 1) {
        const bool ok = alpha > 1.0 - 1.0 / L && l < 1.0 / L - 1.0 + alpha;
        return {ok, ok ? SignChangeRule::tpia : SignChangeRule::none};
    }
    const double Lk = std::pow(L, k);
    const double Lk1 = std::pow(L, -(k - 1));
    const bool ok = Lk > 1.0 && Lk < L + 1.0 && alpha > 1.0 - 1.0 / Lk && alpha < Lk1 &&
                    l > 0.0 && l < std::min(1.0 / Lk - 1.0 + alpha, Lk1 - alpha);
    return {ok, ok ? SignChangeRule::tpib : SignChangeRule::none};
}

/// Stability threshold alpha* = (r - 2)/r for every-step PBC on unimodal maps
/// with negative Schwarzian derivative; stabilization once
/// (alpha - l, alpha + l) lies inside (alpha*, 1).
inline double pbc_schwarzian_threshold(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("pbc_schwarzian_threshold: r must be > 0");
    return (r - 2.0) / r;
}

/// Almost-sure contraction branch: M L^{k-1} < 1.
inline bool check_ml_contraction(double M, double L, int k) {
    if (!(M > 0.0) || !(L > 0.0)) throw std::invalid_argument("check_ml_contraction: M, L must be > 0");
    if (k < 1) throw std::invalid_argument("check_ml_contraction: k must be >= 1");
    return M * std::pow(L, k - 1) < 1.0;
}

/// Named condition with the constants it needs, for the CLI and region sweeps.
struct ConditionQuery {
    std::string id;
    int k = 1;
    int m = 1;
    std::optional<double> L;
    std::optional<double> A;
    std::optional<double> M;
};

inline ConditionReport evaluate_condition(const ConditionQuery& q, const NoiseSpec& noise,
                                          double alpha, double l,
                                          std::optional<EvalMethod> method = {}) {
    auto need = [&q](const std::optional<double>& v, const char* what) {
        if (!v) throw std::invalid_argument("condition '" + q.id + "' requires " + what);
        return *v;
    };
    if (q.id == "toc_point") return check_toc_point(noise, alpha, l, q.k, need(q.L, "L"), method);
    if (q.id == "toc_cycle") return check_toc_cycle(noise, alpha, l, q.m, need(q.L, "L"), method);
    if (q.id == "pbc_smooth") return check_pbc_smooth(noise, alpha, l, q.k, need(q.A, "A"), method);
    if (q.id == "pbc_cycle") return check_pbc_cycle(noise, alpha, l, need(q.A, "A"), q.m, method);
    if (q.id == "pbc_max") return check_pbc_max(noise, alpha, l, q.k, need(q.L, "L"), method);
    if (q.id == "pbc_signchange") {
        auto v = check_pbc_deterministic_signchange(alpha, l, q.k, need(q.L, "L"));
        ConditionReport rep;
        rep.condition_id = std::string("pbc_signchange_") + to_string(v.rule);
        rep.lambda = std::numeric_limits<double>::quiet_NaN();
        rep.threshold = std::numeric_limits<double>::quiet_NaN();
        rep.satisfied = v.satisfied;
        rep.m_factor = std::max((1.0 - alpha + l) * need(q.L, "L"), alpha + l);
        rep.margin = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    if (q.id == "ml_contraction") {
        const double M = need(q.M, "M"), L = need(q.L, "L");
        // expressed as lambda > 0 so the usual report invariant applies
        const double lambda = -std::log(M * std::pow(L, q.k - 1));
        auto rep = detail::make_report("ml_contraction", lambda, 0.0, M);
        return rep;
    }
    throw std::invalid_argument("unknown condition '" + q.id + "'");
}

}  // namespace cyclestab
