#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sfd/errors.hpp"
#include "sfd/radial_pde.hpp"

using namespace sfd;

namespace {

EvolveConfig small_config(double R, double t_end) {
    EvolveConfig c;
    c.R = R;
    c.nodes = 401;
    c.t_end = t_end;
    c.eps = 1e-4;
    c.dt_rel = 1e-2;
    c.dt_min_sched = 1e-3;
    return c;
}

}  // namespace

TEST_CASE("build_grid") {
    const auto g = build_grid(1.0, 16, 1.0);
    REQUIRE(g.size() == 16);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] - g[i - 1] == doctest::Approx(1.0 / 15.0));

    const auto s = build_grid(10.0, 512, 2.0);
    CHECK(s.back() == 10.0);
    const double first = s[1] - s[0];
    const double last = s[511] - s[510];
    CHECK(last / first == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::is_sorted(s.begin(), s.end()));

    CHECK_THROWS_AS(build_grid(1.0, 15), DomainError);
    CHECK_THROWS_AS(build_grid(1.0, 64, 0.5), DomainError);
    CHECK_THROWS_AS(build_grid(-1.0, 64), DomainError);
}

TEST_CASE("initial data") {
    const auto a = InitialDatum::algebraic(2.0, 3.0);
    for (double r : {0.0, 0.5, 7.0}) CHECK(a(r) == doctest::Approx(3.0 * std::pow(1.0 + r, -2.0)));
    const auto g = InitialDatum::gaussian(2.0, 0.5);
    CHECK(g(0.0) == doctest::Approx(0.5));
    CHECK(g(2.0) == doctest::Approx(0.5 * std::exp(-0.5)));
    const auto t = InitialDatum::from_table({0.0, 1.0, 2.0}, {3.0, 2.0, 1.0});
    CHECK(t(0.5) == doctest::Approx(2.5));
    CHECK(t(5.0) == doctest::Approx(1.0));
    CHECK_FALSE(a.description().empty());
    CHECK_THROWS_AS(InitialDatum::algebraic(-1.0), DomainError);

    const auto pp = ProfileParams::self_similar(2.0, 0.25, 1.0, 1);
    const Profile pr = integrate_profile(pp, 100.0, 1e-10);
    const auto s = InitialDatum::self_similar_slice(pr, 2.0);
    CHECK(s(3.0) == doctest::Approx(eval_self_similar(pp, pr, 3.0, 2.0)).epsilon(1e-10));
}

TEST_CASE("initial field") {
    const auto f = RadialField::initial(InitialDatum::algebraic(2.0), 2.0, 1, build_grid(10.0, 101), 1e-3);
    CHECK(f.u.back() == 1e-3);
    CHECK(f.u.front() == doctest::Approx(1.0 + 1e-3));
    CHECK(f.R == 10.0);
    for (double x : f.u) CHECK(x >= 1e-3);
    CHECK_THROWS_AS(RadialField::initial(InitialDatum::algebraic(2.0), 0.5, 1, build_grid(10.0, 101), 1e-3),
                    DomainError);
}

TEST_CASE("constant state is a fixed point") {
    const auto flat = InitialDatum::from_table({0.0, 1.0}, {0.3, 0.3});
    for (int n : {1, 2, 3}) {
        auto f = RadialField::initial(flat, 2.0, n, build_grid(5.0, 64, 1.5), 0.0, 0.0, 0.0);
        f.eps = 0.3;
        f.u.back() = 0.3;
        const RadialField g = step_implicit(f, 0.7);
        CHECK(g.t == doctest::Approx(0.7));
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.u[i] == doctest::Approx(0.3).epsilon(1e-14));
    }
    const auto f = RadialField::initial(flat, 2.0, 1, build_grid(5.0, 64), 0.3);
    CHECK_THROWS_AS(step_implicit(f, 0.0), DomainError);
}

TEST_CASE("norms") {
    const auto one = InitialDatum::from_table({0.0, 1.0}, {1.0, 1.0});
    for (int n : {1, 2, 3}) {
        auto f = RadialField::initial(one, 2.0, n, build_grid(1.0, 2001), 0.0, 0.0, 0.0);
        f.u.back() = 1.0;
        const double vol = std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
        CHECK(lq_norm(f, 1.0) == doctest::Approx(vol).epsilon(1e-6));
        CHECK(lq_norm(f, 2.0) == doctest::Approx(std::sqrt(vol)).epsilon(1e-6));
        CHECK(linf_norm(f) == 1.0);
    }
    const auto f = RadialField::initial(InitialDatum::algebraic(1.0), 2.0, 1, build_grid(10.0, 101), 0.0, 0.0, 0.0);
    CHECK(min_inner(f, 1.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(lq_norm(f, 0.0), DomainError);
}

TEST_CASE("sample times") {
    EvolveConfig c;
    c.t_start = 0.0;
    c.t_end = 100.0;
    const auto ts = sample_times(c);
    CHECK(ts.front() == 0.0);
    CHECK(ts.back() == 100.0);
    CHECK(ts[1] == doctest::Approx(1e-2));
    CHECK(std::adjacent_find(ts.begin(), ts.end(), std::greater_equal<>()) == ts.end());
    // 4 decades of 20 samples plus t_start and t_end
    CHECK(ts.size() == 82);
}

TEST_CASE("algebraic run: maximum principle, monotone norms, semi-convexity") {
    const EvolveConfig c = small_config(20.0, 10.0);
    const auto u0 = InitialDatum::algebraic(2.0);
    const EvolutionRun run = evolve(u0, c);
    REQUIRE(run.norms.size() >= 20);
    CHECK(run.norms.back().t == doctest::Approx(10.0));
    const double top = 1.0 + c.eps;
    for (const Snapshot& s : run.snapshots) {
        for (double x : s.field.u) {
            CHECK(x >= c.eps * (1.0 - 1e-12));
            CHECK(x <= top * (1.0 + 1e-12));
        }
    }
    for (std::size_t k = 1; k < run.norms.size(); ++k) {
        CHECK(run.norms[k].t > run.norms[k - 1].t);
        for (std::size_t j = 0; j < run.norms[k].lq.size(); ++j) {
            CHECK(run.norms[k].lq[j].second <= run.norms[k - 1].lq[j].second * (1.0 + 1e-12));
        }
        CHECK(run.norms[k].linf <= run.norms[k - 1].linf * (1.0 + 1e-12));
    }
    for (const Snapshot& s : run.snapshots) {
        if (s.field.t >= 1.0 && !s.dudt.empty()) CHECK(semi_convexity_margin(s) >= -1e-3);
    }
}

TEST_CASE("eps ladder is ordered") {
    EvolveConfig c = small_config(20.0, 5.0);
    const auto u0 = InitialDatum::algebraic(2.0);
    c.eps = 1e-2;
    const EvolutionRun hi = evolve(u0, c);
    c.eps = 1e-3;
    const EvolutionRun lo = evolve(u0, c);
    REQUIRE(hi.snapshots.size() == lo.snapshots.size());
    for (std::size_t k = 0; k < hi.snapshots.size(); ++k) {
        const auto& a = lo.snapshots[k].field;
        const auto& b = hi.snapshots[k].field;
        REQUIRE(a.t == doctest::Approx(b.t));
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.u[i] <= b.u[i] + 1e-6);
    }
}

TEST_CASE("radius ladder is ordered") {
    const auto u0 = InitialDatum::algebraic(2.0);
    EvolveConfig c = small_config(10.0, 5.0);
    c.eps = 1e-4;
    c.nodes = 201;
    const EvolutionRun small = evolve(u0, c);
    c.R = 20.0;
    c.nodes = 401;
    const EvolutionRun big = evolve(u0, c);
    for (std::size_t k = 0; k < small.snapshots.size(); ++k) {
        const auto& a = small.snapshots[k].field;
        const auto& b = big.snapshots[k].field;
        REQUIRE(a.t == doctest::Approx(b.t));
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.u[i] <= b.u[i] + 1e-6);
    }
}

TEST_CASE("self-similar slice is reproduced over one doubling of time") {
    const auto pp = ProfileParams::self_similar(2.0, 0.25, 1.0, 1);
    const Profile pr = integrate_profile(pp, 100.0, 1e-10);
    EvolveConfig c;
    c.R = 60.0;
    c.nodes = 1201;
    c.eps = 1e-4;
    c.t_start = 1.0;
    c.t_end = 2.0;
    c.dt_rel = 2e-3;
    const EvolutionRun run = evolve(InitialDatum::self_similar_slice(pr, 1.0), c);
    const RadialField& f = run.snapshots.back().field;
    REQUIRE(f.t == doctest::Approx(2.0));
    double err = 0.0;
    double top = 0.0;
    for (std::size_t i = 0; i < f.size() && f.r[i] <= 0.5 * c.R; ++i) {
        const double exact = eval_self_similar(pp, pr, f.r[i], 2.0);
        err = std::max(err, std::abs(f.u[i] - exact));
        top = std::max(top, exact);
    }
    CHECK(err / top < 0.01);
    for (const Snapshot& s : run.snapshots) {
        if (!s.dudt.empty()) CHECK(semi_convexity_margin(s) >= -1e-3);
    }
}

TEST_CASE("rescaled variables") {
    EvolveConfig c = small_config(20.0, 10.0);
    const auto u0 = InitialDatum::algebraic(2.0);
    const EvolutionRun run = evolve(u0, c);
    const RescaledRun v = rescale_to_v(run);
    REQUIRE(v.slices.size() == run.snapshots.size());
    CHECK(v.slices.front().t == 0.0);
    for (std::size_t i = 0; i < v.slices.front().v.size(); ++i) {
        CHECK(v.slices.front().v[i] == run.snapshots.front().field.u[i]);
    }
    for (std::size_t k = 0; k < v.norms.size(); ++k) {
        const double tau = v.norms[k].tau;
        CHECK(tau == doctest::Approx(std::log1p(run.norms[k].t)));
        CHECK(v.norms[k].linf == doctest::Approx(std::exp(tau / c.p) * run.norms[k].linf).epsilon(1e-13));
        CHECK(v.norms[k].min_inner == doctest::Approx(std::exp(tau / c.p) * run.norms[k].min_inner).epsilon(1e-13));
    }
    CHECK_FALSE(v.transform.empty());
    CHECK_THROWS_AS(rescale_to_v(EvolutionRun{}), DomainError);
}

TEST_CASE("separated subsolution") {
    const double gamma = 2.0;
    const double C0 = 1.0;
    const SteadyProfile unit = shoot_unit_profile(2.0, 1);
    for (double tau0 : {0.5, 2.0, 6.0}) {
        const SeparatedSubsolution s = separated_subsolution(unit, gamma, C0, tau0);
        CHECK(s.R == doctest::Approx(std::exp(tau0 / 6.0)));
        CHECK(s.y(0.0) == doctest::Approx(s.delta).epsilon(1e-14));
        CHECK(s.y(50.0) == doctest::Approx(1.0).epsilon(1e-12));
        const double floor = std::pow(std::pow(std::pow(2.0, gamma) * s.c1 / C0, 2.0) + 1.0, -0.5);
        CHECK(s.y(tau0) >= floor * (1.0 - 1e-14));
        CHECK(s(s.R, 1.0) == 0.0);
        CHECK(s(0.0, 0.0) == doctest::Approx(s.delta * s.w_R.center_value));
        // the initial slice lies below the algebraic datum
        for (double r = 0.0; r < s.R; r += 0.01 * s.R) CHECK(s(r, 0.0) <= C0 * std::pow(1.0 + r, -gamma));
    }
    CHECK_THROWS_AS(separated_subsolution(unit, 0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("self-similar supersolution dominates the datum at t = 0") {
    const SelfSimilarSupersolution s = self_similar_supersolution(2.0, 1, 2.0, 1.0);
    CHECK(s.params.alpha == doctest::Approx(2.0 / 6.0));
    for (double r : {0.0, 0.5, 1.0, 5.0, 50.0, 500.0, 5e4}) CHECK(s(r, 0.0) >= 1.1 * std::pow(1.0 + r, -2.0));
    CHECK_THROWS_AS(self_similar_supersolution(1.0, 1, 2.0, 1.0), DomainError);
}
