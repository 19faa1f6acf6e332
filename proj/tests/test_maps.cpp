#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cyclestab/maps.hpp"

using namespace cyclestab;

namespace {

const double kRicker19 = std::log(19.0) / 0.9;  // 2-cycle at {0.1, 1.9}

MapModel linear_map(double slope) {
    return MapModel{"linear", {{"a", slope}}, [slope](double x) { return slope * x; },
                    [slope](double) { return slope; }};
}

// Closed-form logistic 2-cycle: roots of x^2 - (1 + 1/r)x + (1 + 1/r)/r.
std::pair<double, double> logistic_two_cycle(double r) {
    const double disc = std::sqrt((r - 3.0) * (r + 1.0));
    return {(1.0 + r - disc) / (2.0 * r), (1.0 + r + disc) / (2.0 * r)};
}

}  // namespace

TEST(Maps, EvalBuiltins) {
    EXPECT_NEAR(eval(make_ricker(kRicker19), 0.1), 1.9, 1e-12);
    EXPECT_EQ(eval(make_logistic(3.5), 0.0), 0.0);
    EXPECT_EQ(eval(make_maynard_smith(), 2.0), 2.0);
}

TEST(Maps, EvalOverflowIsDomainError) {
    EXPECT_THROW(eval(make_ricker(5.0), -500.0), std::domain_error);
}

TEST(Maps, RegistryLookup) {
    EXPECT_NEAR(eval(make_map("ricker", {{"r", 2.0}}), 1.0), 1.0, 1e-15);
    EXPECT_THROW(make_map("ricker"), std::invalid_argument);   // r missing
    EXPECT_THROW(make_map("henon", {{"a", 1.0}}), std::invalid_argument);
}

TEST(Maps, IterateIdentityAndCycles) {
    const auto ricker = make_ricker(kRicker19);
    EXPECT_EQ(iterate(ricker, 0.37, 0), 0.37);
    EXPECT_NEAR(iterate(ricker, 0.1, 2), 0.1, 1e-9);

    const auto [k1, k2] = logistic_two_cycle(3.5);
    EXPECT_NEAR(k1, 3.0 / 7.0, 1e-12);
    EXPECT_NEAR(k2, 6.0 / 7.0, 1e-12);
    EXPECT_NEAR(iterate(make_logistic(3.5), 3.0 / 7.0, 2), 3.0 / 7.0, 1e-9);
    EXPECT_THROW(iterate(ricker, 0.1, -1), std::invalid_argument);
}

TEST(Maps, DerivativeMatchesFiniteDifference) {
    for (const auto& map : {make_ricker(kRicker19), make_logistic(3.5), make_maynard_smith()}) {
        MapModel fd = map;
        fd.df = nullptr;
        for (double x = 0.0; x <= 10.0; x += 0.1) {
            EXPECT_NEAR(deriv(map, x), deriv(fd, x), 1e-6) << map.name << " at x=" << x;
        }
    }
}

TEST(Maps, FindCycleRickerExample1) {
    const auto cycles = find_cycle(make_ricker(kRicker19), 2, {0.0, 5.0});
    ASSERT_EQ(cycles.size(), 1u);
    ASSERT_EQ(cycles[0].points.size(), 2u);
    EXPECT_NEAR(cycles[0].points[0], 0.1, 1e-8);
    EXPECT_NEAR(cycles[0].points[1], 1.9, 1e-8);
}

TEST(Maps, FindCycleRicker32) {
    const auto cycles = find_cycle(make_ricker(3.2), 2, {0.0, 5.0});
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_NEAR(cycles[0].points[0], 0.11, 0.01);
    EXPECT_NEAR(cycles[0].points[1], 1.89, 0.01);
}

TEST(Maps, FindCycleLogisticClosedForm) {
    const auto cycles = find_cycle(make_logistic(3.5), 2, {0.0, 1.0});
    ASSERT_EQ(cycles.size(), 1u);
    const auto [k1, k2] = logistic_two_cycle(3.5);
    EXPECT_NEAR(cycles[0].points[0], k1, 1e-9);
    EXPECT_NEAR(cycles[0].points[1], k2, 1e-9);
}

TEST(Maps, FindCycleMaynardEquilibria) {
    const auto eq = find_cycle(make_maynard_smith(), 1, {0.0, 10.0});
    ASSERT_EQ(eq.size(), 3u);  // sorted by smallest point: 0, 2, 4
    EXPECT_NEAR(eq[0].points[0], 0.0, 1e-10);
    EXPECT_NEAR(eq[1].points[0], 2.0, 1e-10);
    EXPECT_NEAR(eq[2].points[0], 4.0, 1e-10);
    EXPECT_NEAR(eq[1].multipliers[0], 7.0 / 3.0, 1e-9);
}

TEST(Maps, FindCycleFiltersLowerPeriods) {
    // Fixed points of the logistic map are roots of f^2 as well; they must not
    // be reported as 2-cycles.
    const auto fixed = find_cycle(make_logistic(3.5), 1, {0.0, 1.0});
    ASSERT_EQ(fixed.size(), 2u);
    EXPECT_NEAR(fixed[0].points[0], 0.0, 1e-10);
    EXPECT_NEAR(fixed[1].points[0], 5.0 / 7.0, 1e-10);
    const auto cycles = find_cycle(make_logistic(3.5), 2, {0.0, 1.0});
    EXPECT_EQ(cycles.size(), 1u);
}

TEST(Maps, CycleInvariants) {
    const MapModel maps[] = {make_ricker(kRicker19), make_ricker(3.2), make_logistic(3.5)};
    const int periods[] = {1, 2};
    for (const auto& map : maps) {
        for (int d : periods) {
            for (const auto& cy : find_cycle(map, d, {0.0, 5.0})) {
                ASSERT_EQ(static_cast<int>(cy.points.size()), cy.d);
                for (int i = 0; i < cy.d; ++i) {
                    const double next = cy.points[(i + 1) % cy.d];
                    EXPECT_NEAR(eval(map, cy.points[i]), next, 1e-9);
                    EXPECT_NEAR(iterate(map, cy.points[i], cy.d), cy.points[i], 1e-8);
                    EXPECT_GE(cy.lipschitz[i], std::abs(cy.multipliers[i]) - 1e-6);
                    for (int j = i + 1; j < cy.d; ++j)
                        EXPECT_GT(std::abs(cy.points[i] - cy.points[j]), 1e-6);
                }
                EXPECT_DOUBLE_EQ(cy.multiplier_product, cycle_multiplier(cy));
                EXPECT_DOUBLE_EQ(cy.lipschitz_product, lipschitz_product(cy));
                EXPECT_GE(cy.lipschitz_product, 1.0);
                EXPECT_GT(cy.u0, 0.0);
            }
        }
    }
}

TEST(Maps, CycleMultiplierLogisticIdentity) {
    const double r = 3.5;
    const auto cycles = find_cycle(make_logistic(r), 2, {0.0, 1.0});
    ASSERT_EQ(cycles.size(), 1u);
    const double identity = 4.0 + 2.0 * r - r * r;  // -1.25
    EXPECT_NEAR(identity, -1.25, 1e-12);
    EXPECT_NEAR(cycles[0].multiplier_product, identity, 1e-9);
    const auto [k1, k2] = logistic_two_cycle(r);
    const auto map = make_logistic(r);
    EXPECT_NEAR(deriv(map, k1) * deriv(map, k2), identity, 1e-12);
}

TEST(Maps, FixedPointMultiplierRicker241) {
    const auto eq = find_cycle(make_ricker(2.41), 1, {0.5, 5.0});
    ASSERT_EQ(eq.size(), 1u);
    EXPECT_NEAR(eq[0].points[0], 1.0, 1e-10);
    EXPECT_NEAR(eq[0].multiplier_product, -1.41, 1e-10);
}

TEST(Maps, LipschitzProductClampsAtOne) {
    CycleInfo cy;
    cy.d = 3;
    cy.points = {0.1, 0.2, 0.3};
    cy.multipliers = {0.5, 0.5, 0.5};
    cy.lipschitz = {0.5, 0.5, 0.5};
    EXPECT_DOUBLE_EQ(lipschitz_product(cy), 1.0);
    cy.lipschitz = {2.0, 0.5, 3.0};
    EXPECT_DOUBLE_EQ(lipschitz_product(cy), 6.0);
}

TEST(Maps, EstimateLipschitzLinear) {
    EXPECT_NEAR(estimate_lipschitz(linear_map(0.5), 0.0, 1.0), 0.5, 1e-6);
    EXPECT_THROW(estimate_lipschitz(linear_map(0.5), 0.0, -1.0), std::invalid_argument);
}

TEST(Maps, EstimateLipschitzMaynardLocal) {
    EXPECT_NEAR(estimate_lipschitz(make_maynard_smith(), 2.0, 1e-3), 7.0 / 3.0, 5e-3);
}

TEST(Maps, EstimateLipschitzRickerGlobal) {
    const double L = estimate_lipschitz_global(make_ricker(2.41), 1.0);
    EXPECT_NEAR(L, 1.48, 0.01);
    EXPECT_LE(L, 1.5);
}

// |f^d(x) - K_i| <= L(d) |x - K_i| for |x - K_i| <= u0 / L(d).
TEST(Maps, LipschitzCompositionBruteForce) {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (const auto& map : {make_ricker(kRicker19), make_logistic(3.5)}) {
        for (const auto& cy : find_cycle(map, 2, {0.0, 5.0})) {
            const double radius = cy.u0 / cy.lipschitz_product;
            for (int i = 0; i < cy.d; ++i) {
                for (int s = 0; s < 200; ++s) {
                    const double x = cy.points[i] + radius * unit(gen);
                    EXPECT_LE(std::abs(iterate(map, x, cy.d) - cy.points[i]),
                              cy.lipschitz_product * std::abs(x - cy.points[i]) + 1e-9);
                }
            }
        }
    }
}

// sup |f^d(x) - K_1 - A(d)(x - K_1)| / |x - K_1| over |x - K_1| <= u vanishes
// with u.
TEST(Maps, MultiplierLinearization) {
    const auto map = make_ricker(kRicker19);
    const auto cycles = find_cycle(map, 2, {0.0, 5.0});
    ASSERT_EQ(cycles.size(), 1u);
    const auto& cy = cycles[0];
    double prev = std::numeric_limits<double>::infinity();
    for (double u : {1e-2, 1e-3, 1e-4}) {
        double sup = 0.0;
        for (int s = -200; s <= 200; ++s) {
            if (s == 0) continue;
            const double x = cy.points[0] + u * s / 200.0;
            const double err =
                std::abs(iterate(map, x, 2) - cy.points[0] -
                         cy.multiplier_product * (x - cy.points[0]));
            sup = std::max(sup, err / std::abs(x - cy.points[0]));
        }
        EXPECT_LT(sup, prev);
        prev = sup;
    }
    EXPECT_LT(prev, 1e-2);
}
