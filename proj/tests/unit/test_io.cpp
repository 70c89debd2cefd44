#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sfd/errors.hpp"
#include "sfd/io.hpp"

using namespace sfd;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sfd_test_io" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("profile csv and sidecar") {
    const fs::path dir = scratch("profile");
    const auto pp = ProfileParams::self_similar(2.0, 0.25, 1.5, 2);
    ProfileOptions o;
    o.xi_max = 20.0;
    const Profile pr = integrate_profile(pp, o);
    save_profile(pr, o, dir / "atlas" / "p2");
    REQUIRE(fs::exists(dir / "atlas" / "p2.csv"));
    REQUIRE(fs::exists(dir / "atlas" / "p2.json"));

    std::ifstream in(dir / "atlas" / "p2.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "xi,f,fp");

    const Profile back = load_profile(dir / "atlas" / "p2");
    CHECK(back.params.A == pp.A);
    CHECK(back.params.n == pp.n);
    CHECK(back.params.beta == pp.beta);
    REQUIRE(back.size() == pr.size());
    for (std::size_t i = 0; i < pr.size(); ++i) {
        CHECK(back.xi[i] == pr.xi[i]);
        CHECK(back.f[i] == pr.f[i]);
        CHECK(back.fp[i] == pr.fp[i]);
    }
    const auto meta = nlohmann::json::parse(read_text(dir / "atlas" / "p2.json"));
    CHECK(meta.at("params").at("p") == 2.0);
    CHECK(meta.at("solver").at("tol") == o.tol);
}

TEST_CASE("malformed csv is rejected") {
    const fs::path dir = scratch("bad");
    write_text(dir / "a.csv", "xi,f\n0,1\n");
    CHECK_THROWS_AS(read_profile_csv(dir / "a.csv", ProfileParams{}), FormatError);
    write_text(dir / "b.csv", "xi,f,fp\n0,1\n");
    CHECK_THROWS_AS(read_profile_csv(dir / "b.csv", ProfileParams{}), FormatError);
    write_text(dir / "c.csv", "xi,f,fp\n0,1,zero\n");
    CHECK_THROWS_AS(read_profile_csv(dir / "c.csv", ProfileParams{}), FormatError);
    CHECK_THROWS_AS(read_text(dir / "missing.csv"), FormatError);
}

TEST_CASE("steady csv and sidecar") {
    const fs::path dir = scratch("steady");
    const SteadyProfile w = shoot_unit_profile(2.0, 3);
    save_steady(w, SteadyOptions{}, dir / "w");
    std::ifstream in(dir / "w.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "r,w");
    const SteadyProfile back = load_steady(dir / "w");
    CHECK(back.p == 2.0);
    CHECK(back.n == 3);
    CHECK(back.R == w.R);
    CHECK(back.center_value == w.center_value);
    CHECK(back.wp.empty());
    REQUIRE(back.size() == w.size());
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(back.w[i] == w.w[i]);
    CHECK(back.interpolant()(0.5) == doctest::Approx(w.interpolant()(0.5)).epsilon(1e-6));
}

TEST_CASE("run json lines with fits") {
    const fs::path dir = scratch("run");
    EvolveConfig c;
    c.R = 20.0;
    c.nodes = 201;
    c.t_end = 100.0;
    c.dt_rel = 1e-2;
    c.dt_min_sched = 1e-3;
    const EvolutionRun run = evolve(InitialDatum::algebraic(2.0), c);
    write_run_jsonl(run, dir / "run.jsonl");

    std::ifstream in(dir / "run.jsonl");
    std::string first;
    std::getline(in, first);
    const auto j = nlohmann::json::parse(first);
    for (const char* key : {"t", "tau", "linf", "lq", "min_inner"}) CHECK(j.contains(key));
    CHECK(j.at("lq").contains("1"));
    CHECK(j.at("lq").contains("2"));

    const std::vector<DecayFit> fits{fit_decay(run, NormIndex::infinity(), {1.0, 100.0}),
                                     fit_decay(run, NormIndex::finite(2.0), {1.0, 100.0})};
    append_fits_jsonl(fits, dir / "run.jsonl");
    const RunFile rf = read_run_jsonl(dir / "run.jsonl");
    REQUIRE(rf.norms.size() == run.norms.size());
    for (std::size_t k = 0; k < rf.norms.size(); ++k) {
        CHECK(rf.norms[k].t == run.norms[k].t);
        CHECK(rf.norms[k].linf == run.norms[k].linf);
        CHECK(rf.norms[k].min_inner == run.norms[k].min_inner);
        CHECK(rf.norms[k].lq == run.norms[k].lq);
    }
    REQUIRE(rf.fits.size() == 2);
    CHECK(rf.fits[0].at("norm") == "linf");
    CHECK(rf.fits[1].at("slope") == fits[1].slope);

    const auto snaps = write_snapshots(run, dir / "fields");
    CHECK(snaps.size() == run.snapshots.size());
    std::ifstream s0(snaps.front());
    std::getline(s0, first);
    CHECK(first == "r,u");

    write_text(dir / "broken.jsonl", "{\"t\": 1\n");
    CHECK_THROWS_AS(read_run_jsonl(dir / "broken.jsonl"), FormatError);
}

TEST_CASE("evolve config json") {
    EvolveConfig c;
    c.p = 3.0;
    c.n = 2;
    c.norm_qs = {1.0, 4.0};
    c.newton.tol = 1e-11;
    const EvolveConfig back = evolve_config_from_json(to_json(c));
    CHECK(back.p == 3.0);
    CHECK(back.n == 2);
    CHECK(back.norm_qs == c.norm_qs);
    CHECK(back.newton.tol == 1e-11);
    CHECK(std::isinf(back.dt_max));

    const EvolveConfig partial = evolve_config_from_json({{"R", 40.0}});
    CHECK(partial.R == 40.0);
    CHECK(partial.nodes == EvolveConfig{}.nodes);
    CHECK_THROWS_AS(evolve_config_from_json({{"radius", 40.0}}), FormatError);
}
