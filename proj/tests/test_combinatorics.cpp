#include "regvar/combinatorics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace regvar;
using regvar::testing::Big;
using regvar::testing::random_cardinality;
using regvar::testing::rel_diff;

namespace {

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double hi = 10.0) {
    std::uniform_real_distribution<double> u(0.0, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

UpsilonArgs make_args(double missed, double total, std::span<const double> ratios, const CardinalityDistribution& c) {
    UpsilonArgs a;
    a.mass_missed = missed;
    a.mass_total = total;
    a.ratios = ratios;
    a.clutter = &c;
    return a;
}

} // namespace

// ---- elementary symmetric functions ----

TEST(Esf, EmptyAndTwoValues) {
    EXPECT_EQ(esf_all({}).values, std::vector<double>{1.0});
    const std::vector<double> xi{2.0, 3.0};
    EXPECT_EQ(esf_all(xi).values, (std::vector<double>{1.0, 5.0, 6.0}));
}

TEST(Esf, MatchesSubsetEnumeration) {
    std::mt19937_64 rng(11);
    for (int draw = 0; draw < 100; ++draw) {
        const auto xi = random_values(rng, static_cast<std::size_t>(draw % 9));
        const auto got = esf_all(xi).values;
        const auto ref = regvar::testing::esf_subsets(xi);
        ASSERT_EQ(got.size(), ref.size());
        for (std::size_t d = 0; d < ref.size(); ++d) EXPECT_LE(rel_diff(got[d], ref[d]), 1e-12) << "d=" << d;
    }
}

TEST(Esf, SixValuesInZeroToTen) {
    std::mt19937_64 rng(6);
    const auto xi = random_values(rng, 6);
    const auto got = esf_all(xi).values;
    const auto ref = regvar::testing::esf_subsets(xi);
    for (std::size_t d = 0; d <= 6; ++d) EXPECT_LE(rel_diff(got[d], ref[d]), 1e-12);
}

TEST(Esf, PermutationInvariant) {
    std::mt19937_64 rng(5);
    auto xi = random_values(rng, 12);
    const auto base = esf_all(xi).values;
    for (int i = 0; i < 5; ++i) {
        std::shuffle(xi.begin(), xi.end(), rng);
        const auto again = esf_all(xi).values;
        for (std::size_t d = 0; d < base.size(); ++d) EXPECT_LE(rel_diff(base[d], again[d]), 1e-13);
    }
}

TEST(Esf, AppendMatchesRecomputation) {
    std::mt19937_64 rng(9);
    const auto xi = random_values(rng, 10);
    std::vector<double> incremental{1.0};
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const std::vector<double> before = incremental;
        esf_append(incremental, xi[k]);
        for (std::size_t d = 1; d < before.size(); ++d)
            EXPECT_DOUBLE_EQ(incremental[d], before[d] + xi[k] * before[d - 1]);
        const auto fresh = esf_all(std::span<const double>(xi.data(), k + 1)).values;
        ASSERT_EQ(fresh.size(), incremental.size());
        for (std::size_t d = 0; d < fresh.size(); ++d) EXPECT_DOUBLE_EQ(fresh[d], incremental[d]);
    }
}

TEST(Esf, RejectsBadInputs) {
    EXPECT_THROW((void)esf_all(std::vector<double>{1.0, -0.5}), InvalidInput);
    EXPECT_THROW((void)esf_all(std::vector<double>{NAN}), InvalidInput);
    EXPECT_THROW((void)esf_all(std::vector<double>{INFINITY}), InvalidInput);
}

TEST(Esf, ZeroValuesTruncateTable) {
    const std::vector<double> xi{0.0, 4.0, 0.0};
    EXPECT_EQ(esf_all(xi).values, (std::vector<double>{1.0, 4.0, 0.0, 0.0}));
}

TEST(EsfLeaveOneOut, MatchesSubsetEnumerationWithoutEachValue) {
    std::mt19937_64 rng(21);
    for (std::size_t m = 1; m <= 9; ++m) {
        const auto xi = random_values(rng, m);
        const auto loo = esf_leave_one_out(xi);
        ASSERT_EQ(loo.size(), m);
        for (std::size_t k = 0; k < m; ++k) {
            std::vector<double> rest = xi;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
            const auto ref = regvar::testing::esf_subsets(rest);
            ASSERT_EQ(loo[k].size(), ref.size());
            for (std::size_t d = 0; d < ref.size(); ++d) EXPECT_LE(rel_diff(loo[k][d], ref[d]), 1e-12);
        }
    }
}

TEST(EsfLeaveOneOut, OutsideFactorMultipliesIn) {
    std::mt19937_64 rng(22);
    const auto head = random_values(rng, 3);
    const auto tail = random_values(rng, 5);
    const auto outside = esf_all(head).values;
    const auto tables = esf_leave_one_out(tail, outside);
    for (std::size_t k = 0; k < tail.size(); ++k) {
        std::vector<double> all = head;
        for (std::size_t j = 0; j < tail.size(); ++j)
            if (j != k) all.push_back(tail[j]);
        const auto ref = regvar::testing::esf_subsets(all);
        ASSERT_EQ(tables[k].size(), ref.size());
        for (std::size_t d = 0; d < ref.size(); ++d) EXPECT_LE(rel_diff(tables[k][d], ref[d]), 1e-12);
    }
}

TEST(EsfLeaveOneOut, VisitorWithReusedWorkspaceAgrees) {
    std::mt19937_64 rng(23);
    EsfWorkspace ws;
    for (std::size_t m : {1u, 2u, 7u, 16u, 3u}) {
        const auto xi = random_values(rng, m);
        const auto stored = esf_leave_one_out(xi);
        std::vector<bool> seen(m, false);
        const double one = 1.0;
        esf_leave_one_out_each(
            xi, std::span<const double>(&one, 1),
            [&](std::size_t k, std::span<const double> t) {
                seen[k] = true;
                ASSERT_EQ(t.size(), stored[k].size());
                for (std::size_t d = 0; d < t.size(); ++d) EXPECT_EQ(t[d], stored[k][d]);
            },
            ws);
        EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
    }
    EXPECT_TRUE(esf_leave_one_out({}).empty());
}

// ---- Upsilon ----

TEST(Upsilon, EmptyMeasurementSetIsSingleTerm) {
    const CardinalityDistribution clutter({0.3, 0.5, 0.2});
    const double missed = 0.7, total = 2.0;
    for (std::size_t n = 0; n < 8; ++n) {
        const auto args = make_args(missed, total, {}, clutter);
        EXPECT_NEAR(upsilon(0, args, n), 0.3 * std::pow(missed / total, double(n)), 1e-14);
    }
}

TEST(Upsilon, OrderOneAtZeroTargetsVanishes) {
    const CardinalityDistribution clutter({0.3, 0.5, 0.2});
    const std::vector<double> ratios{1.5, 0.2};
    const auto args = make_args(0.5, 1.0, ratios, clutter);
    EXPECT_EQ(upsilon(1, args, 0), 0.0);
    EXPECT_EQ(upsilon(2, args, 1), 0.0);
}

TEST(Upsilon, OrderTwoMatchesExtendedPrecision) {
    std::mt19937_64 rng(31);
    const auto clutter = random_cardinality(rng, 6);
    const auto ratios = random_values(rng, 3, 5.0);
    const double missed = 0.4, total = 1.7;
    const auto args = make_args(missed, total, ratios, clutter);
    const Big ref = regvar::testing::upsilon_big(2, missed, total, ratios, clutter, 5);
    EXPECT_LE(rel_diff(Big(upsilon(2, args, 5)), ref), 1e-10);
}

TEST(Upsilon, RandomSweepMatchesExtendedPrecision) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int draw = 0; draw < 60; ++draw) {
        const std::size_t m = static_cast<std::size_t>(draw % 7);
        const auto clutter = random_cardinality(rng, 2 + static_cast<std::size_t>(draw % 9));
        const auto ratios = random_values(rng, m, 20.0);
        const double total = 0.1 + 5.0 * u(rng);
        const double missed = total * u(rng);
        const auto args = make_args(missed, total, ratios, clutter);
        const std::size_t n_max = 12;
        for (int order = 0; order <= 2; ++order) {
            const UpsilonVector uv = upsilon_vector(order, args, n_max);
            for (std::size_t n = 0; n <= n_max; ++n) {
                const Big ref = regvar::testing::upsilon_big(order, missed, total, ratios, clutter, n);
                EXPECT_LE(rel_diff(Big(uv.at(n)), ref), 1e-10) << "u=" << order << " n=" << n;
                EXPECT_LE(rel_diff(Big(upsilon(order, args, n)), ref), 1e-10);
            }
        }
    }
}

TEST(Upsilon, ZeroMissedMassUsesZeroToTheZero) {
    const CardinalityDistribution clutter({0.2, 0.3, 0.5});
    const std::vector<double> ratios{2.0, 3.0};
    const auto args = make_args(0.0, 1.0, ratios, clutter);
    for (int order = 0; order <= 2; ++order)
        for (std::size_t n = 0; n <= 4; ++n) {
            const Big ref = regvar::testing::upsilon_big(order, 0.0, 1.0, ratios, clutter, n);
            EXPECT_LE(rel_diff(Big(upsilon(order, args, n)), ref), 1e-12);
        }
    // n = d + u is the only surviving term
    EXPECT_GT(upsilon(0, args, 2), 0.0);
    EXPECT_EQ(upsilon(0, args, 3), 0.0);
}

TEST(Upsilon, LargeCardinalityRangeStaysFinite) {
    std::mt19937_64 rng(33);
    const auto clutter = CardinalityDistribution::poisson(20.0, 80);
    const auto ratios = random_values(rng, 10, 50.0);
    const double missed = 30.0, total = 60.0;
    const auto args = make_args(missed, total, ratios, clutter);
    const UpsilonVector uv = upsilon_vector(1, args, 400);
    for (std::size_t n = 0; n <= 400; n += 37) {
        const double lv = uv.log_values[n];
        const double ls = log_upsilon(1, args, n);
        if (std::isinf(ls)) {
            EXPECT_EQ(lv, ls);
            continue;
        }
        EXPECT_NEAR(lv, ls, 1e-9 * std::max(1.0, std::abs(ls))) << n;
    }
    // exact at a moderate n
    const Big ref = regvar::testing::upsilon_big(1, missed, total, ratios, clutter, 150);
    EXPECT_LE(rel_diff(log(ref).convert_to<double>(), log_upsilon(1, args, 150)), 1e-12);
}

TEST(Upsilon, Errors) {
    const CardinalityDistribution clutter({1.0});
    EXPECT_THROW((void)upsilon(0, make_args(0.0, 0.0, {}, clutter), 1), DegenerateModel);
    EXPECT_THROW((void)upsilon(3, make_args(0.5, 1.0, {}, clutter), 1), InvalidInput);
    EXPECT_THROW((void)upsilon(-1, make_args(0.5, 1.0, {}, clutter), 1), InvalidInput);
    UpsilonArgs no_clutter = make_args(0.5, 1.0, {}, clutter);
    no_clutter.clutter = nullptr;
    EXPECT_THROW((void)upsilon(0, no_clutter, 1), InvalidInput);
}

TEST(Upsilon, ClutterSupportSmallerThanMeasurementCount) {
    // rho_c(j) = 0 for j > 1: at least |Z| - 1 measurements must be target-borne
    const CardinalityDistribution clutter({0.5, 0.5});
    const std::vector<double> ratios{1.0, 2.0, 3.0};
    const auto args = make_args(0.5, 1.0, ratios, clutter);
    EXPECT_EQ(upsilon(0, args, 1), 0.0);
    EXPECT_GT(upsilon(0, args, 2), 0.0);
    const Big ref = regvar::testing::upsilon_big(0, 0.5, 1.0, ratios, clutter, 4);
    EXPECT_LE(rel_diff(Big(upsilon(0, args, 4)), ref), 1e-12);
}

// ---- inner products ----

TEST(UpsilonInner, ZeroVectorAndPointMass) {
    const auto rho = CardinalityDistribution::point_mass(3, 6);
    UpsilonVector zero;
    zero.log_values.assign(7, -INFINITY);
    EXPECT_EQ(upsilon_inner(zero, rho), 0.0);

    const CardinalityDistribution clutter({0.4, 0.6});
    const std::vector<double> ratios{0.7};
    const auto args = make_args(0.3, 1.2, ratios, clutter);
    const UpsilonVector uv = upsilon_vector(1, args, 6);
    EXPECT_NEAR(upsilon_inner(uv, rho), upsilon(1, args, 3), 1e-14 * upsilon(1, args, 3));
}

TEST(UpsilonInner, MatchesReversedSummation) {
    std::mt19937_64 rng(41);
    for (int draw = 0; draw < 20; ++draw) {
        const auto rho = random_cardinality(rng, 15);
        const auto values = random_values(rng, 16, 3.0);
        UpsilonVector uv;
        for (double v : values) uv.log_values.push_back(std::log(v) + 2.5);
        double reversed = 0.0;
        for (std::size_t n = 16; n-- > 0;) reversed += values[n] * rho(n);
        reversed *= std::exp(2.5);
        EXPECT_LE(rel_diff(upsilon_inner(uv, rho), reversed), 1e-12);
    }
}

TEST(UpsilonInner, LengthMismatchThrows) {
    UpsilonVector uv;
    uv.log_values.assign(4, 0.0);
    EXPECT_THROW((void)upsilon_inner(uv, CardinalityDistribution::point_mass(0, 5)), InvalidInput);
}

TEST(UpsilonInnerProducts, AgreeWithExtendedPrecisionOnSubsets) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int draw = 0; draw < 25; ++draw) {
        const auto rho = random_cardinality(rng, 10);
        const auto clutter = random_cardinality(rng, 8);
        const auto ratios = random_values(rng, 5, 4.0);
        const double total = 0.5 + 3.0 * u(rng);
        const double missed = total * u(rng);
        const UpsilonInnerProducts inner(rho, missed, total, clutter, ratios.size());
        // full set and every leave-one-out subset
        for (std::size_t skip = 0; skip <= ratios.size(); ++skip) {
            std::vector<double> subset;
            for (std::size_t j = 0; j < ratios.size(); ++j)
                if (j != skip) subset.push_back(ratios[j]);
            const double scale = 2.0;
            std::vector<double> scaled = subset;
            for (double& v : scaled) v /= scale;
            const auto esf = esf_all(scaled).values;
            for (int order = 0; order <= 2; ++order) {
                const double got = inner.log_inner(order, esf, std::log(scale));
                const Big ref = regvar::testing::upsilon_inner_big(order, missed, total, subset, clutter, rho);
                if (ref == 0) {
                    EXPECT_TRUE(std::isinf(got));
                    continue;
                }
                EXPECT_NEAR(got, log(ref).convert_to<double>(), 1e-11) << "u=" << order;
            }
        }
    }
}

TEST(UpsilonInnerProducts, ExtremeMissedRatioFallsBackToLogs) {
    // rho concentrated far from k with q tiny: the linear sums underflow
    const auto rho = CardinalityDistribution::point_mass(40, 45);
    const CardinalityDistribution clutter({0.5, 0.3, 0.2});
    const std::vector<double> ratios{3.0, 0.5};
    const double total = 40.0, missed = 40.0 * 1e-12;
    const UpsilonInnerProducts inner(rho, missed, total, clutter, ratios.size());
    const auto esf = esf_all(ratios).values;
    for (int order = 0; order <= 2; ++order) {
        const double got = inner.log_inner(order, esf, 0.0);
        const Big ref = regvar::testing::upsilon_inner_big(order, missed, total, ratios, clutter, rho);
        ASSERT_TRUE(std::isfinite(got));
        EXPECT_NEAR(got, log(ref).convert_to<double>(), 1e-9 * std::abs(got));
    }
    const auto args = make_args(missed, total, ratios, clutter);
    const UpsilonVector uv = upsilon_vector(0, args, 45);
    const Big ref40 = regvar::testing::upsilon_big(0, missed, total, ratios, clutter, 40);
    EXPECT_LE(rel_diff(Big(uv.log_values[40]), log(ref40)), 1e-12);
}

TEST(UpsilonInnerProducts, PoissonFirstOrderRatioIsOne) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int draw = 0; draw < 10; ++draw) {
        const double total = 1.0 + 9.0 * u(rng);
        const double missed = total * (0.05 + 0.9 * u(rng));
        const double lambda = 20.0 * u(rng) + 0.1;
        const auto rho = CardinalityDistribution::poisson(total, 80);
        const auto clutter = CardinalityDistribution::poisson(lambda, 80);
        const auto ratios = random_values(rng, 6, 5.0);
        const UpsilonInnerProducts inner(rho, missed, total, clutter, ratios.size());
        const auto esf = esf_all(ratios).values;
        const double l1 = std::exp(inner.log_inner(1, esf, 0.0) - inner.log_inner(0, esf, 0.0));
        const double l2 = std::exp(inner.log_inner(2, esf, 0.0) - inner.log_inner(0, esf, 0.0));
        EXPECT_NEAR(l1, 1.0, 1e-6);
        EXPECT_NEAR(l2, 1.0, 1e-6);
    }
}

TEST(UpsilonInnerProducts, RejectsOversizedSubset) {
    const UpsilonInnerProducts inner(CardinalityDistribution::point_mass(1, 3), 0.5, 1.0,
                                     CardinalityDistribution({1.0}), 2);
    const std::vector<double> esf{1.0, 1.0, 1.0, 1.0};
    EXPECT_THROW((void)inner.log_inner(0, esf, 0.0), InvalidInput);
    EXPECT_THROW((void)inner.log_inner(0, std::vector<double>{}, 0.0), InvalidInput);
    EXPECT_THROW(UpsilonInnerProducts(CardinalityDistribution{}, 0.0, 0.0, CardinalityDistribution{}, 1),
                 DegenerateModel);
}

TEST(LogSumExp, Basics) {
    EXPECT_EQ(log_sum_exp({}), -INFINITY);
    const std::vector<double> all_inf{-INFINITY, -INFINITY};
    EXPECT_EQ(log_sum_exp(all_inf), -INFINITY);
    const std::vector<double> x{1000.0, 1000.0};
    EXPECT_NEAR(log_sum_exp(x), 1000.0 + std::log(2.0), 1e-12);
    const std::vector<double> y{-INFINITY, 0.0};
    EXPECT_DOUBLE_EQ(log_sum_exp(y), 0.0);
}
