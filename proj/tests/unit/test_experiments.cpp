#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "sfd/errors.hpp"
#include "sfd/experiments.hpp"
#include "sfd/io.hpp"

using namespace sfd;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sfd_test_experiments" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentManifest manifest(const std::string& name, const std::string& scenario, json params = json::object()) {
    return ExperimentManifest::from_json(
        {{"schema", 1}, {"name", name}, {"scenario", scenario}, {"parameters", std::move(params)}});
}

json small_evolution() {
    return {{"R", 20.0}, {"nodes", 201}, {"dt_rel", 1e-2}, {"eps", 1e-4}};
}

}  // namespace

TEST_CASE("manifest parsing") {
    const auto m = ExperimentManifest::from_json(
        {{"schema", 1}, {"name", "heat"}, {"scenario", "remark_heat"}, {"output_dir", "somewhere/heat"}});
    CHECK(m.name == "heat");
    CHECK(m.output_dir == fs::path("somewhere/heat"));
    CHECK(m.parameters.is_object());
    CHECK(ExperimentManifest::from_json(m.to_json()).to_json() == m.to_json());

    CHECK_THROWS_AS(ExperimentManifest::from_json({{"schema", 1}, {"scenario", "nope"}}), FormatError);
    CHECK_THROWS_AS(ExperimentManifest::from_json({{"schema", 2}, {"scenario", "remark_heat"}}), FormatError);
    CHECK_THROWS_AS(ExperimentManifest::from_json({{"scenario", "remark_heat"}}), FormatError);
    CHECK_THROWS_AS(ExperimentManifest::from_json({{"schema", 1}, {"scenario", "remark_heat"}, {"extra", 1}}),
                    FormatError);
    CHECK_THROWS_AS(ExperimentManifest::from_json(json::array()), FormatError);

    const fs::path dir = scratch("load");
    write_text(dir / "bad.json", "{ not json");
    CHECK_THROWS_AS(ExperimentManifest::load(dir / "bad.json"), FormatError);
}

TEST_CASE("scenario registry and defaults") {
    const auto names = scenario_names();
    for (const char* s : {"profile_atlas", "steady_scaling", "theorem200", "theorem100", "theorem2000_upper",
                          "theorem2000_lower", "prop103", "remark_heat", "vartheta_table"}) {
        CHECK(std::find(names.begin(), names.end(), s) != names.end());
        CHECK(default_parameters(s).is_object());
    }
    CHECK(default_parameters("theorem2000_upper").at("gamma") == 2.0);
}

TEST_CASE("manifest hash") {
    const auto a = manifest("x", "remark_heat");
    const auto b = manifest("x", "remark_heat", {{"seed", 2}});
    CHECK(manifest_hash(a).size() == 16);
    CHECK(manifest_hash(a) == manifest_hash(manifest("x", "remark_heat")));
    CHECK(manifest_hash(a) != manifest_hash(b));
}

TEST_CASE("unknown parameters are reported as a failed run") {
    const fs::path dir = scratch("unknown");
    const ResultRecord r = run(manifest("u", "remark_heat", {{"k_lsit", {2}}}), {1.0, dir});
    CHECK(r.failed);
    CHECK(r.error.find("k_lsit") != std::string::npos);
    CHECK_FALSE(r.all_pass());
    CHECK(fs::exists(dir / "u" / "result.json"));
}

TEST_CASE("heat scenario") {
    const fs::path dir = scratch("heat");
    const ResultRecord r = run(manifest("heat", "remark_heat", {{"k_list", {4}}}), {1.0, dir});
    CHECK_FALSE(r.failed);
    CHECK(r.all_pass());
    bool saw_inf = false;
    for (const Verdict& v : r.verdicts) {
        CHECK_FALSE(v.anchor.empty());
        if (v.name.find("inf") != std::string::npos && v.name.find("4") != std::string::npos) {
            saw_inf = true;
            CHECK(v.measured == 12.0);
            CHECK(v.theory == 12.0);
        }
    }
    CHECK(saw_inf);
    const ResultRecord back = ResultRecord::from_json(json::parse(read_text(dir / "heat" / "result.json")));
    CHECK(back.payload() == r.payload());
    for (const std::string& f : r.files) CHECK(fs::exists(r.output_dir / f));
}

TEST_CASE("scenarios with an evolution write run files") {
    const fs::path dir = scratch("evolution");
    json p = small_evolution();
    p["window"] = {10.0, 1000.0};
    const ResultRecord r = run(manifest("t200", "theorem200", p), {1.0, dir});
    REQUIRE_FALSE(r.failed);
    const RunFile rf = read_run_jsonl(dir / "t200" / "run.jsonl");
    CHECK(rf.norms.size() > 40);
    CHECK(rf.fits.size() == 2);
    for (const Verdict& v : r.verdicts) CHECK_FALSE(v.anchor.empty());
    CHECK_FALSE(r.overlays.empty());
}

TEST_CASE("sweep is deterministic and order preserving") {
    std::vector<ExperimentManifest> ms{
        manifest("a_heat", "remark_heat"),
        manifest("b_vartheta", "vartheta_table"),
        manifest("c_atlas", "profile_atlas", {{"p_list", {2.0}}, {"alpha_fractions", {0.25, 0.5}}}),
        manifest("d_t100", "theorem100", small_evolution()),
    };
    const fs::path d1 = scratch("sweep1");
    const fs::path d2 = scratch("sweep3");
    const auto one = sweep(ms, 1, {1.0, d1});
    const auto many = sweep(ms, 3, {1.0, d2});
    REQUIRE(one.size() == ms.size());
    REQUIRE(many.size() == ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
        CHECK(one[i].name == ms[i].name);
        json a = one[i].payload();
        json b = many[i].payload();
        CHECK(a == b);
    }
    const ResultRecord single = run(ms[0], {1.0, scratch("single")});
    CHECK(single.payload() == one[0].payload());

    const auto records = load_records(d1);
    CHECK(records.size() == ms.size());
}

TEST_CASE("report") {
    const fs::path dir = scratch("report");
    const ResultRecord ok = run(manifest("ok", "remark_heat", {{"k_list", {2}}}), {1.0, dir});
    const Report one = report(std::span<const ResultRecord>(&ok, 1), dir / "r1");
    CHECK(one.all_pass);
    CHECK(one.table.find("PASS") != std::string::npos);
    CHECK(fs::exists(dir / "r1" / "summary.txt"));

    ResultRecord bad = ok;
    bad.name = "bad";
    bad.verdicts.front().pass = false;
    const std::vector<ResultRecord> mixed{ok, bad};
    const Report two = report(mixed, dir / "r2");
    CHECK_FALSE(two.all_pass);
    CHECK(two.table.find("FAIL") != std::string::npos);

    const ResultRecord t = run(manifest("t200", "theorem200", small_evolution()), {1.0, dir});
    const Report three = report(std::span<const ResultRecord>(&t, 1), dir / "r3");
    CHECK(fs::exists(dir / "r3" / "t200_linf.csv"));
    CHECK(fs::exists(dir / "r3" / "t200_linf_overlay.csv"));
    CHECK(read_text(dir / "r3" / "t200_linf.csv").rfind("t,linf\n", 0) == 0);
}

TEST_CASE("load_manifest_dir") {
    const fs::path dir = scratch("manifests");
    write_text(dir / "b.json", manifest("b", "remark_heat").to_json().dump());
    write_text(dir / "a.json", manifest("a", "vartheta_table").to_json().dump());
    write_text(dir / "notes.txt", "ignored");
    const auto ms = load_manifest_dir(dir);
    REQUIRE(ms.size() == 2);
    CHECK(ms[0].name == "a");
    CHECK(ms[1].name == "b");
}
