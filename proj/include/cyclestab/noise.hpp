#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cyclestab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class NoiseKind { none, bernoulli, uniform, discrete };

/// Bounded i.i.d. noise on [-1, 1].
///   none      - degenerate, always 0
///   bernoulli - +1/-1 with probability 1/2 each
///   uniform   - continuous uniform on [-1, 1]
///   discrete  - finite atoms (value, prob), values in [-1, 1], probs summing to 1
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    std::vector<std::pair<double, double>> atoms;

    static NoiseSpec none() { return {NoiseKind::none, {}}; }
    static NoiseSpec bernoulli() { return {NoiseKind::bernoulli, {}}; }
    static NoiseSpec uniform() { return {NoiseKind::uniform, {}}; }
    static NoiseSpec discrete(std::vector<std::pair<double, double>> atoms) {
        double total = 0.0;
        for (const auto& [v, p] : atoms) {
            if (std::abs(v) > 1.0) throw std::invalid_argument("discrete noise value outside [-1,1]");
            if (p < 0.0) throw std::invalid_argument("discrete noise probability < 0");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("discrete noise probabilities must sum to 1");
        return {NoiseKind::discrete, std::move(atoms)};
    }
};

namespace detail {
// splitmix64 finalizer, used only to spread (base_seed, stream_index) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic per-path random stream. The generator is std::mt19937_64
/// (sequence fixed by the C++ standard) seeded with
///   mix64(mix64(base_seed) ^ (0x9E3779B97F4A7C15 * (stream_index + 1)))
/// where mix64 is the splitmix64 finalizer. Draws map raw 64-bit outputs to
/// doubles explicitly, so a (base_seed, stream_index) pair yields the same
/// sample sequence on every run and thread schedule.
class RngStream {
  public:
    RngStream(std::uint64_t base_seed, std::uint64_t stream_index)
        : base_(base_seed),
          index_(stream_index),
          gen_(detail::mix64(detail::mix64(base_seed) ^
                             (0x9E3779B97F4A7C15ull * (stream_index + 1)))) {}

    std::uint64_t next_u64() { return gen_(); }

    /// [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// [-1, 1).
    double symmetric_uniform() { return 2.0 * uniform01() - 1.0; }

    bool coin() { return (next_u64() >> 63) != 0; }

    std::uint64_t base_seed() const { return base_; }
    std::uint64_t stream_index() const { return index_; }

  private:
    std::uint64_t base_;
    std::uint64_t index_;
    std::mt19937_64 gen_;
};

/// Next variate of the given distribution. "none" consumes no randomness.
inline double sample(const NoiseSpec& noise, RngStream& stream) {
    switch (noise.kind) {
        case NoiseKind::none: return 0.0;
        case NoiseKind::bernoulli: return stream.coin() ? 1.0 : -1.0;
        case NoiseKind::uniform: return stream.symmetric_uniform();
        case NoiseKind::discrete: {
            const double u = stream.uniform01();
            double acc = 0.0;
            for (const auto& [v, p] : noise.atoms) {
                acc += p;
                if (u < acc) return v;
            }
            return noise.atoms.back().first;
        }
    }
    return 0.0;
}

// --- evaluation methods for the expectation functionals ----------------------

struct ClosedForm {};
struct Quadrature {
    double tol = 1e-12;
};
struct MonteCarlo {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0x5eedb0b5ull;
};
using EvalMethod = std::variant<ClosedForm, Quadrature, MonteCarlo>;

namespace detail {

// 15-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
inline constexpr double kGL15Node[8] = {
    0.0,
    0.2011940939974345223006283033945962078128,
    0.3941513470775633698972073709810454683627,
    0.5709721726085388475372267372539106412383,
    0.7244177313601700474161860546139380096308,
    0.8482065834104272162006483207742168513662,
    0.9372733924007059043077589477102094712439,
    0.9879925180204854284895657185866125811469,
};
inline constexpr double kGL15Weight[8] = {
    0.2025782419255612728806201999675193148386,
    0.1984314853271115764561183264438393248186,
    0.1861610000155622110268005618664228245062,
    0.1662692058169939335532008604812088111309,
    0.1395706779261543144478047945110283225208,
    0.1071592204671719350118695466858693034155,
    0.0703660474881081247092674164506673384667,
    0.0307532419961172683546283935772044177217,
};

template <class F>
double gl15(const F& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double acc = kGL15Weight[0] * f(c);
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kGL15Node[i];
        acc += kGL15Weight[i] * (f(c - dx) + f(c + dx));
    }
    return acc * h;
}

// Adaptive bisection with a GL15 panel per node. Endpoint log singularities
// are integrable and never evaluated (nodes are interior), so the recursion
// resolves them by depth alone. Child tolerances halve but are floored near
// machine precision; the unresolved remainder at the depth cap scales with
// the interval width and stays far below the floor.
template <class F>
double adaptive_gl(const F& f, double lo, double hi, double tol, int depth = 0) {
    const double whole = gl15(f, lo, hi);
    const double mid = 0.5 * (lo + hi);
    const double split = gl15(f, lo, mid) + gl15(f, mid, hi);
    // The width floor keeps nodes clear of exact cancellation at a log
    // singularity; the unresolved remainder is O(h ln h) ~ 3e-11.
    if (std::abs(whole - split) <= tol || depth >= 44 || hi - lo <= 1e-12) return split;
    const double child_tol = std::max(0.5 * tol, 1e-16);
    return adaptive_gl(f, lo, mid, child_tol, depth + 1) +
           adaptive_gl(f, mid, hi, child_tol, depth + 1);
}

/// Integrate f over [-1,1], splitting at the given interior break points.
template <class F>
double integrate_split(const F& f, std::vector<double> breaks, double tol) {
    breaks.push_back(-1.0);
    breaks.push_back(1.0);
    std::sort(breaks.begin(), breaks.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = std::clamp(breaks[i], -1.0, 1.0);
        const double b = std::clamp(breaks[i + 1], -1.0, 1.0);
        if (b - a > 1e-15) acc += adaptive_gl(f, a, b, tol);
    }
    return acc;
}

inline double xlnx(double t) { return t == 0.0 ? 0.0 : t * std::log(std::abs(t)); }

}  // namespace detail

/// E ln|a + b xi|.
///
/// Closed forms: bernoulli (ln|a+b| + ln|a-b|)/2; uniform
/// ((a+b)ln|a+b| - (a-b)ln|a-b|)/(2b) - 1; discrete sum of p_i ln|a + b v_i|.
/// An atom exactly at zero yields -inf, which condition checkers report as a
/// vacuously satisfied lambda = +inf. For the continuous uniform the
/// singularity is integrable; the quadrature route splits the interval at
/// xi* = -a/b before integrating adaptively.
inline double expected_log_abs(const NoiseSpec& noise, double a, double b,
                               const EvalMethod& method = ClosedForm{}) {
    if (a == 0.0 && b == 0.0) throw std::invalid_argument("expected_log_abs: a and b both zero");

    if (const auto* mc = std::get_if<MonteCarlo>(&method)) {
        RngStream stream(mc->seed, 0);
        double acc = 0.0;
        for (std::uint64_t i = 0; i < mc->samples; ++i)
            acc += std::log(std::abs(a + b * sample(noise, stream)));
        return acc / static_cast<double>(mc->samples);
    }

    const bool quad = std::holds_alternative<Quadrature>(method);
    switch (noise.kind) {
        case NoiseKind::none: return std::log(std::abs(a));
        case NoiseKind::bernoulli:
            return 0.5 * (std::log(std::abs(a + b)) + std::log(std::abs(a - b)));
        case NoiseKind::discrete: {
            double acc = 0.0;
            for (const auto& [v, p] : noise.atoms)
                if (p > 0.0) acc += p * std::log(std::abs(a + b * v));
            return acc;
        }
        case NoiseKind::uniform: {
            if (b == 0.0) return std::log(std::abs(a));
            if (quad) {
                const double tol = std::get<Quadrature>(method).tol;
                std::vector<double> breaks;
                const double sing = -a / b;
                if (std::abs(sing) < 1.0) breaks.push_back(sing);
                auto f = [a, b](double v) { return 0.5 * std::log(std::abs(a + b * v)); };
                return detail::integrate_split(f, std::move(breaks), tol);
            }
            return (detail::xlnx(a + b) - detail::xlnx(a - b)) / (2.0 * b) - 1.0;
        }
    }
    return 0.0;
}

/// E max{ ln|alpha + l xi|, ln(|1 - alpha - l xi| L) }.
/// Atom-wise for discrete distributions; quadrature (default) or Monte Carlo
/// for the uniform. The two arguments cannot both be -inf at the same atom
/// because the linear forms sum to 1.
inline double expected_max_log(const NoiseSpec& noise, double alpha, double l, double L,
                               const EvalMethod& method = Quadrature{}) {
    if (!(L > 0.0)) throw std::invalid_argument("expected_max_log: L must be > 0");
    const double logL = std::log(L);
    auto term = [alpha, l, logL](double v) {
        return std::max(std::log(std::abs(alpha + l * v)),
                        std::log(std::abs(1.0 - alpha - l * v)) + logL);
    };

    if (const auto* mc = std::get_if<MonteCarlo>(&method)) {
        RngStream stream(mc->seed, 0);
        double acc = 0.0;
        for (std::uint64_t i = 0; i < mc->samples; ++i) acc += term(sample(noise, stream));
        return acc / static_cast<double>(mc->samples);
    }

    switch (noise.kind) {
        case NoiseKind::none: return term(0.0);
        case NoiseKind::bernoulli: return 0.5 * (term(1.0) + term(-1.0));
        case NoiseKind::discrete: {
            double acc = 0.0;
            for (const auto& [v, p] : noise.atoms)
                if (p > 0.0) acc += p * term(v);
            return acc;
        }
        case NoiseKind::uniform: {
            if (l == 0.0) return term(0.0);
            const double tol =
                std::holds_alternative<Quadrature>(method) ? std::get<Quadrature>(method).tol : 1e-12;
            // Split at the log singularities and at the crossings
            // alpha + lv = +-(1 - alpha - lv) L, where the max switches branch.
            std::vector<double> breaks;
            auto push = [&breaks](double v) {
                if (std::isfinite(v) && std::abs(v) < 1.0) breaks.push_back(v);
            };
            push(-alpha / l);
            push((1.0 - alpha) / l);
            push((L * (1.0 - alpha) - alpha) / (l * (1.0 + L)));
            if (L != 1.0) push((-L * (1.0 - alpha) - alpha) / (l * (1.0 - L)));
            auto f = [&term](double v) { return 0.5 * term(v); };
            return detail::integrate_split(f, std::move(breaks), tol);
        }
    }
    return 0.0;
}

}  // namespace cyclestab
