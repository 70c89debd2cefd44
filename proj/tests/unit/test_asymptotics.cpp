#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sfd/asymptotics.hpp"
#include "sfd/errors.hpp"

using namespace sfd;

TEST_CASE("norm index") {
    CHECK(NormIndex::infinity().is_infinite());
    CHECK(NormIndex::parse("inf") == NormIndex::infinity());
    CHECK(NormIndex::parse("2").value() == 2.0);
    CHECK(NormIndex::finite(1.5).label() == "1.5");
    CHECK(NormIndex::infinity().label() == "inf");
    CHECK_THROWS_AS(NormIndex::parse("-1"), FormatError);
    CHECK_THROWS_AS(NormIndex::parse("two"), FormatError);
    CHECK_THROWS_AS(NormIndex::finite(0.0), DomainError);
}

TEST_CASE("rates") {
    CHECK(rate_lq(2.0, 1, 1.0, NormIndex::finite(2.0)) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(rate_lq(2.0, 2, 1.0, NormIndex::infinity()) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(rate_nu(2.0, 1, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(rate_nu(1.0, 3, 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(rate_fast(2.0) == 0.5);
    CHECK(rate_gamma(2.0, 1, 2.0, NormIndex::infinity()) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(rate_gamma(2.0, 1, 2.0, NormIndex::finite(1.0)) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(rate_gamma(2.0, 1, 2.0, NormIndex::finite(0.4)), DomainError);
    CHECK_THROWS_AS(rate_lq(2.0, 1, 1.0, NormIndex::finite(1.0)), DomainError);
}

TEST_CASE("rate limits") {
    CHECK(rate_lq(2.0, 1, 1.0, NormIndex::finite(1.0 + 1e-9)) < 1e-9);
    CHECK(rate_nu(2.0, 3, 1e-12) == doctest::Approx(rate_fast(2.0)).epsilon(1e-10));
    CHECK(rate_gamma(2.0, 1, 1e12, NormIndex::infinity()) == doctest::Approx(rate_fast(2.0)).epsilon(1e-10));
}

TEST_CASE("rate at q = infinity is nu exactly, and rates increase in q") {
    for (double p : {1.0, 1.5, 2.0, 3.0, 7.0}) {
        for (int n : {1, 2, 3, 5}) {
            for (double q0 : {0.5, 1.0, 2.0, 3.0}) {
                const double nu = rate_nu(p, n, q0);
                CHECK(rate_lq(p, n, q0, NormIndex::infinity()) == nu);
                CHECK(nu < rate_fast(p));
                double prev = 0.0;
                for (double q : {1.01 * q0, 1.5 * q0, 2 * q0, 10 * q0, 1e3 * q0}) {
                    const double r = rate_lq(p, n, q0, NormIndex::finite(q));
                    CHECK(r >= prev);
                    CHECK(r <= nu);
                    prev = r;
                }
            }
        }
    }
}

TEST_CASE("vartheta") {
    CHECK(vartheta(2.0, -1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(vartheta(3.0, -1.0) > vartheta(2.0, -1.0));
    CHECK(vartheta(2.0, -0.5) > vartheta(2.0, -1.0));
    CHECK(vartheta(1.0, -1e8) < 1e-7);
    for (double theta : {0.05, 0.5, 2.0, 20.0}) {
        for (double m : {-20.0, -3.0, -1.0, -0.05}) {
            const double v = vartheta(theta, m);
            CHECK(v > 0.0);
            CHECK(v < 1.0);
            CHECK(v < 1.0 / (1.0 - m));
            CHECK(exponent_roundtrip(theta, m) < 1e-15);
        }
    }
    CHECK_THROWS_AS(vartheta(2.0, 0.5), DomainError);
    CHECK_THROWS_AS(vartheta(-2.0, -1.0), DomainError);
}

TEST_CASE("exact exponent roundtrip") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> num(1, 400);
    std::uniform_int_distribution<int> den(1, 37);
    for (int k = 0; k < 50; ++k) {
        const Rational theta(num(rng), den(rng));
        const Rational m(-num(rng), den(rng));
        CHECK(exponent_roundtrip_exact(theta, m) == 0);
    }
}

TEST_CASE("exponent table") {
    const ExponentTable t = exponent_table(2.0, 1, 1.0, NormIndex::infinity(), 2.0);
    CHECK(t.lq_rate == t.nu);
    CHECK(t.gamma_rate == doctest::Approx(1.0 / 3.0));
    CHECK(t.growth_rate == 0.5);
    const ExponentTable f = with_fast_diffusion(t);
    CHECK(f.m == doctest::Approx(-1.0));
    CHECK(f.theta == doctest::Approx(2.0));
    CHECK(f.vartheta == doctest::Approx(f.gamma_rate).epsilon(1e-15));
    const auto j = to_json(f);
    CHECK(j.at("q").get<std::string>() == "inf");
    CHECK(j.contains("vartheta"));
}

TEST_CASE("heat polynomials") {
    const HeatPolynomial h2(2);
    CHECK(h2(Rational(3), Rational(1)) == 11);
    CHECK(heat_polynomial(2, 3.0, 1.0) == 11.0);
    CHECK(heat_poly_inf(2, 5.0) == 10.0);
    const HeatPolynomial h4(4);
    CHECK(h4.coefficients() == std::vector<BigInt>{1, 12, 12});
    CHECK(h4.inf_coefficient() == 12);
    CHECK(heat_poly_inf(4, 1.0) == 12.0);
    CHECK(HeatPolynomial(6).inf_coefficient() == 120);
    CHECK(HeatPolynomial(8).inf_coefficient() == 1680);
    for (int k : {2, 4, 6, 8}) {
        CHECK(heat_poly_inf(k, 2.0) / std::pow(2.0, k / 2) ==
              static_cast<double>(HeatPolynomial(k).inf_coefficient()));
        // the infimum is attained at x = 0 and nowhere lower
        for (double x : {-1.0, -0.1, 0.3, 2.0}) CHECK(heat_polynomial(k, x, 1.5) >= heat_poly_inf(k, 1.5));
    }
    CHECK_THROWS_AS(HeatPolynomial(3), DomainError);
    CHECK_THROWS_AS(HeatPolynomial(0), DomainError);
}

TEST_CASE("heat polynomials solve the heat equation exactly") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> num(-50, 50);
    std::uniform_int_distribution<int> den(1, 17);
    for (int k : {2, 4, 6, 8, 12}) {
        const HeatPolynomial h(k);
        for (int i = 0; i < 100; ++i) {
            const Rational x(num(rng), den(rng));
            const Rational t(std::abs(num(rng)) + 1, den(rng));
            CHECK(h.heat_residual(x, t) == 0);
        }
    }
}

TEST_CASE("decay fits of synthetic series") {
    std::vector<double> t, v, w;
    for (int k = 0; k <= 60; ++k) {
        const double s = std::pow(10.0, 1.0 + 0.05 * k);
        t.push_back(s);
        v.push_back(5.0 * std::pow(s, -0.3));
        w.push_back(std::pow(s, -0.3) * (1.0 + 0.1 / std::sqrt(s)));
    }
    const DecayFit a = fit_decay(t, v, {10.0, 1e4}, "l1");
    CHECK(std::abs(a.slope + 0.3) < 1e-12);
    CHECK(std::isfinite(a.slope_stderr));
    CHECK(a.norm_id == "l1");
    CHECK(a.count == 61);
    const DecayFit b = fit_decay(t, w, {1e2, 1e4});
    CHECK(std::abs(b.slope + 0.3) < 0.005);

    CHECK_THROWS_AS(fit_decay(t, v, {10.0, 500.0}), WindowError);
    CHECK_THROWS_AS(fit_decay(t, v, {0.5, 1e3}), WindowError);
    const std::vector<double> few_t{10.0, 100.0, 1000.0};
    const std::vector<double> few_v{1.0, 0.5, 0.25};
    CHECK_THROWS_AS(fit_decay(few_t, few_v, {10.0, 1e3}), WindowError);

    const auto j = to_json(a);
    CHECK(j.at("norm") == "l1");
    CHECK(j.at("t_lo") == 10.0);
    CHECK(j.at("t_hi") == 1e4);
}

TEST_CASE("decay fit of a self-similar run") {
    const auto pp = ProfileParams::self_similar(2.0, 0.25, 1.0, 1);
    const Profile pr = integrate_profile(pp, 1e3, 1e-10);
    EvolveConfig c;
    c.R = 200.0;
    c.nodes = 801;
    c.eps = 1e-6;
    c.t_start = 1.0;
    c.t_end = 1e3;
    c.dt_rel = 5e-3;
    c.norm_qs = {2.0};
    c.keep_snapshots = false;
    const EvolutionRun run = evolve(InitialDatum::self_similar_slice(pr, 1.0), c);
    const DecayFit fit = fit_decay(run, NormIndex::infinity(), {1.0, 1e3});
    CHECK(fit.norm_id == "linf");
    CHECK(fit.slope == doctest::Approx(-0.25).epsilon(0.03));
    CHECK_THROWS_AS(fit_decay(run, NormIndex::finite(3.0), {1.0, 1e3}), DomainError);
}
