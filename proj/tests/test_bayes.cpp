#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "ppbt/bayes.hpp"
#include "ppbt/error.hpp"

using namespace ppbt;

TEST_CASE("posterior is conjugate update") {
    CHECK(posterior({0.5, 0.5}, {0, 0}) == BetaParams{0.5, 0.5});
    CHECK(posterior({0.5, 0.5}, {10, 3}) == BetaParams{3.5, 7.5});
    CHECK(posterior({1, 1}, {50, 5}) == BetaParams{6, 46});
}

TEST_CASE("type invariants are enforced") {
    CHECK_THROWS_AS(BetaParams(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(BetaParams(1.0, -2.0), ConfigError);
    CHECK_THROWS_AS(BetaParams(std::nan(""), 1.0), ConfigError);
    CHECK_THROWS_AS(ArmData(3, 4), ConfigError);
    CHECK_THROWS_AS(ArmData(3, -1), ConfigError);
    CHECK_THROWS_AS(ThresholdPair(1.0, 0.1), ConfigError);
    CHECK_THROWS_AS(ThresholdPair(0.9, 0.0), ConfigError);
    CHECK_NOTHROW(ThresholdPair(0.99, 0.05));
}

TEST_CASE("prob_greater spec examples") {
    const double tol = kDefaultQuadTol;
    CHECK(std::abs(prob_greater({0.5, 0.5}, {0.5, 0.5}) - 0.5) <= tol);
    CHECK(std::abs(prob_greater({2, 1}, {1, 1}) - 2.0 / 3.0) <= tol);

    const auto mc = oracle::prob_greater_mc({3.5, 7.5}, {1.5, 9.5}, 1'000'000, 7);
    CHECK(std::abs(prob_greater({3.5, 7.5}, {1.5, 9.5}) - mc.mean) <= 3 * mc.se);
}

TEST_CASE("prob_greater agrees with the integer closed form") {
    for (int a1 = 1; a1 <= 30; a1 += 3) {
        for (double b1 : {1.0, 2.5, 20.5, 60.0}) {
            for (double a0 : {0.5, 3.0, 11.5}) {
                for (double b0 : {0.5, 8.0, 45.5}) {
                    const BetaParams p1{double(a1), b1}, p0{a0, b0};
                    CHECK(std::abs(prob_greater(p1, p0) -
                                   oracle::prob_greater_integer_a(p1, p0)) <= 1e-8);
                }
            }
        }
    }
}

TEST_CASE("prob_greater agrees with tanh-sinh quadrature on trial posteriors") {
    for (int xt = 0; xt <= 50; xt += 7) {
        for (int xc = 0; xc <= 50; xc += 9) {
            const BetaParams t{0.5 + xt, 0.5 + 50 - xt}, c{0.5 + xc, 0.5 + 50 - xc};
            CHECK(std::abs(prob_greater(t, c) - oracle::prob_greater(t, c)) <= 1e-8);
        }
    }
    // Stage-2 shaped comparison (100 vs 50).
    const BetaParams t{0.5 + 31, 0.5 + 69}, c{0.5 + 4, 0.5 + 46};
    CHECK(std::abs(prob_greater(t, c) - oracle::prob_greater(t, c)) <= 1e-8);
}

TEST_CASE("prob_greater rejects a non-positive tolerance") {
    CHECK_THROWS(prob_greater({1, 1}, {1, 1}, 0.0));
}

TEST_CASE("property: prob_greater complement and symmetry") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> shape(0.5, 80.0);
    for (int i = 0; i < 200; ++i) {
        const BetaParams a{shape(gen), shape(gen)}, b{shape(gen), shape(gen)};
        const double s = prob_greater(a, b) + prob_greater(b, a);
        CHECK(std::abs(s - 1.0) <= 2 * kDefaultQuadTol);
        CHECK(std::abs(prob_greater(a, a) - 0.5) <= 2 * kDefaultQuadTol);
    }
}

TEST_CASE("prob_greater converges for small non-half-integer shapes") {
    const BetaParams cases[][2] = {
        {{42.775836834438778, 42.332338789469198}, {0.65005296825846315, 73.03441916330749}},
        {{0.3, 0.7}, {0.45, 2.2}},
        {{0.1, 5.0}, {3.0, 0.15}},
        {{1.7, 0.9}, {12.3, 0.6}},
    };
    for (const auto& c : cases) {
        const double got = prob_greater(c[0], c[1]);
        CHECK(std::abs(got - oracle::prob_greater(c[0], c[1])) <= 1e-8);
        CHECK(std::abs(got + prob_greater(c[1], c[0]) - 1.0) <= 2 * kDefaultQuadTol);
    }
}

TEST_CASE("property: prob_greater strictly increasing in post_trt.a") {
    for (double b1 : {1.5, 10.5, 45.5}) {
        for (const BetaParams ctl : {BetaParams{1.5, 9.5}, BetaParams{20.5, 30.5}}) {
            double prev = -1.0;
            for (double a1 = 0.5; a1 <= 60.5; a1 += 1.0) {
                const double v = prob_greater({a1, b1}, ctl);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                // Tail values saturate at 1 in double precision.
                if (prev < 1.0 - 1e-12) CHECK(v > prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("beta_binomial_pmf spec examples") {
    const auto p0 = beta_binomial_pmf(0, {3.5, 7.5});
    REQUIRE(p0.size() == 1);
    CHECK(p0[0] == 1.0);

    const auto u = beta_binomial_pmf(2, {1, 1});
    REQUIRE(u.size() == 3);
    for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    const auto p5 = beta_binomial_pmf(5, {3.5, 7.5});
    CHECK(std::abs(std::accumulate(p5.begin(), p5.end(), 0.0) - 1.0) <= 1e-12);

    CHECK_THROWS(beta_binomial_pmf(-1, {1, 1}));
}

TEST_CASE("beta_binomial_pmf matches the lgamma closed form") {
    for (int n : {1, 7, 40, 100}) {
        for (const BetaParams p : {BetaParams{0.5, 0.5}, BetaParams{3.5, 47.5},
                                   BetaParams{120.0, 2.0}}) {
            const auto got = beta_binomial_pmf(n, p);
            const auto want = oracle::beta_binomial(n, p);
            for (int k = 0; k <= n; ++k) {
                CHECK(std::abs(got[k] - want[k]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("property: beta_binomial_pmf normalization up to n=500, shapes up to 1e3") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> log_shape(std::log(0.05), std::log(1000.0));
    for (int n : {0, 1, 2, 10, 49, 100, 250, 500}) {
        for (int i = 0; i < 25; ++i) {
            const BetaParams p{std::exp(log_shape(gen)), std::exp(log_shape(gen))};
            const auto pmf = beta_binomial_pmf(n, p);
            REQUIRE(pmf.size() == static_cast<std::size_t>(n) + 1);
            double total = 0.0;
            for (double v : pmf) {
                CHECK(v >= 0.0);
                total += v;
            }
            CHECK(std::abs(total - 1.0) <= 1e-12);
        }
        for (const BetaParams p : {BetaParams{1000, 1000}, BetaParams{1000, 0.5},
                                   BetaParams{0.5, 1000}}) {
            const auto pmf = beta_binomial_pmf(n, p);
            CHECK(std::abs(std::accumulate(pmf.begin(), pmf.end(), 0.0) - 1.0) <=
                  1e-12);
        }
    }
}

TEST_CASE("futility_decision is strict") {
    CHECK(futility_decision(0.04, {0.9, 0.05}) == Decision::Stop);
    CHECK(futility_decision(0.05, {0.9, 0.05}) == Decision::Continue);
    CHECK(futility_decision(0.9, {0.9, 0.2}) == Decision::Continue);
}

TEST_CASE("ppp_two_sample spec examples") {
    const BetaParams prior{0.5, 0.5};
    SUBCASE("no remaining patients gives the end-of-trial indicator") {
        for (int xt = 0; xt <= 20; ++xt) {
            for (int xc = 0; xc <= 20; xc += 4) {
                const double pg = prob_greater(posterior(prior, {20, xt}),
                                               posterior(prior, {20, xc}));
                const double want = pg > 0.9 ? 1.0 : 0.0;
                CHECK(ppp_two_sample({20, xt}, {20, xc}, 20, 20, prior, 0.9) == want);
            }
        }
    }
    SUBCASE("extreme separation") {
        const double v = ppp_two_sample({10, 10}, {10, 0}, 50, 50, prior, 0.9);
        CHECK(v > 0.99);
        const auto o = oracle::ppp({10, 10}, {10, 0}, 50, 50, prior, 0.9);
        CHECK(v >= o.lo - 1e-12);
        CHECK(v <= o.hi + 1e-12);
    }
    SUBCASE("equal weak arms against brute force") {
        const double v = ppp_two_sample({10, 1}, {10, 1}, 50, 50, prior, 0.9);
        const auto o = oracle::ppp({10, 1}, {10, 1}, 50, 50, prior, 0.9);
        CHECK(v >= o.lo - 1e-12);
        CHECK(v <= o.hi + 1e-12);
    }
    SUBCASE("precondition") {
        CHECK_THROWS(ppp_two_sample({11, 1}, {10, 1}, 10, 10, prior, 0.9));
    }
}

TEST_CASE("grid and direct PPP are bit-identical") {
    const BetaParams prior{0.5, 0.5};
    const FinalAnalysisGrid grid(16, 20, prior);
    for (int n = 0; n <= 16; n += 4) {
        for (int xt = 0; xt <= n; xt += 3) {
            for (int xc = 0; xc <= n; xc += 4) {
                const double direct =
                    ppp_two_sample({n, xt}, {n, xc}, 16, 20, prior, 0.93);
                const double gridded = ppp_two_sample({n, xt}, {n, xc}, grid, 0.93);
                CHECK(direct == gridded);
            }
        }
    }
}

TEST_CASE("property: cached and uncached PPP are bit-identical") {
    const PPPEngine engine({0.5, 0.5});
    const FinalAnalysisGrid grid(50, 50, {0.5, 0.5});
    for (int n = 10; n <= 40; n += 10) {
        for (int xt = 0; xt <= n; xt += 3) {
            for (int xc = 0; xc <= n; xc += 5) {
                const double first = engine.ppp({n, xt}, {n, xc}, 50, 50, 0.9);
                const double second = engine.ppp({n, xt}, {n, xc}, 50, 50, 0.9);
                const double uncached = ppp_two_sample({n, xt}, {n, xc}, grid, 0.9);
                CHECK(first == second);
                CHECK(first == uncached);
            }
        }
    }
    const auto size = engine.cache_size();
    engine.ppp({10, 3}, {10, 5}, 50, 50, 0.9);
    CHECK(engine.cache_size() == size);
}

TEST_CASE("property: PPP monotone in trt.x and ctl.x on exhaustive small grids") {
    // The success sets are nested exactly; the weights summed over them are
    // different floating-point vectors, so equal sums may differ by rounding.
    const double slack = 1e-12;
    const BetaParams prior{0.5, 0.5};
    for (int max = 4; max <= 10; max += 3) {
        const FinalAnalysisGrid grid(max, max, prior);
        for (double theta : {0.8, 0.9, 0.95}) {
            for (int nt = 0; nt <= max; ++nt) {
                for (int nc = 0; nc <= max; ++nc) {
                    for (int xc = 0; xc <= nc; ++xc) {
                        for (int xt = 1; xt <= nt; ++xt) {
                            CHECK(ppp_two_sample({nt, xt}, {nc, xc}, grid, theta) >=
                                  ppp_two_sample({nt, xt - 1}, {nc, xc}, grid, theta) -
                                      slack);
                        }
                    }
                    for (int xt = 0; xt <= nt; ++xt) {
                        for (int xc = 1; xc <= nc; ++xc) {
                            CHECK(ppp_two_sample({nt, xt}, {nc, xc}, grid, theta) <=
                                  ppp_two_sample({nt, xt}, {nc, xc - 1}, grid, theta) +
                                      slack);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("PPP lies in [0, 1]") {
    const PPPEngine engine;
    for (int xt = 0; xt <= 20; ++xt) {
        for (int xc = 0; xc <= 20; xc += 2) {
            const double v = engine.ppp({20, xt}, {20, xc}, 50, 50, 0.9);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
