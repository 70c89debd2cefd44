#include "sfd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sfd/errors.hpp"

namespace sfd {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
}

namespace {

double parse_double(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError(where + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

/// Reads a numeric CSV with the exact header `expected`.
std::vector<std::vector<double>> read_csv(const fs::path& path, const std::string& expected) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) throw FormatError(path.string() + ": expected header '" + expected + "', got '" + line + "'");
    const std::size_t cols = static_cast<std::size_t>(std::count(expected.begin(), expected.end(), ',')) + 1;
    std::vector<std::vector<double>> data(cols);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::string_view rest(line);
        for (std::size_t c = 0; c < cols; ++c) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (c + 1 == cols)) {
                throw FormatError(path.string() + ": wrong column count on line " + std::to_string(row));
            }
            data[c].push_back(parse_double(rest.substr(0, comma), path.string()));
            if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
        }
    }
    return data;
}

fs::path with_ext(const fs::path& stem, const char* ext) {
    fs::path p = stem;
    p += ext;
    return p;
}

nlohmann::json read_json(const fs::path& path) {
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace

nlohmann::json profile_metadata(const Profile& profile, const ProfileOptions& options) {
    const ProfileParams& pp = profile.params;
    return {{"kind", "self_similar_profile"},
            {"params", {{"p", pp.p}, {"alpha", pp.alpha}, {"beta", pp.beta}, {"A", pp.A}, {"n", pp.n}}},
            {"solver",
             {{"xi_max", options.xi_max},
              {"tol", options.tol},
              {"spacing", options.spacing},
              {"f_floor", options.f_floor},
              {"method", "rosenbrock4(3) in (ln xi, ln f, xi f'/f)"}}},
            {"nodes", profile.size()}};
}

void write_profile_csv(const Profile& profile, const fs::path& csv) {
    std::string text = "xi,f,fp\n";
    for (std::size_t i = 0; i < profile.size(); ++i) {
        text += format_double(profile.xi[i]) + ',' + format_double(profile.f[i]) + ',' + format_double(profile.fp[i]) + '\n';
    }
    write_text(csv, text);
}

Profile read_profile_csv(const fs::path& csv, const ProfileParams& params) {
    auto cols = read_csv(csv, "xi,f,fp");
    Profile p;
    p.params = params;
    p.xi = std::move(cols[0]);
    p.f = std::move(cols[1]);
    p.fp = std::move(cols[2]);
    return p;
}

void save_profile(const Profile& profile, const ProfileOptions& options, const fs::path& stem) {
    write_profile_csv(profile, with_ext(stem, ".csv"));
    write_text(with_ext(stem, ".json"), profile_metadata(profile, options).dump(2) + "\n");
}

Profile load_profile(const fs::path& stem) {
    const nlohmann::json meta = read_json(with_ext(stem, ".json"));
    ProfileParams pp;
    try {
        const auto& j = meta.at("params");
        pp = ProfileParams{j.at("p").get<double>(), j.at("alpha").get<double>(), j.at("beta").get<double>(),
                           j.at("A").get<double>(), j.at("n").get<int>()};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(stem.string() + ".json: " + e.what());
    }
    return read_profile_csv(with_ext(stem, ".csv"), pp);
}

nlohmann::json steady_metadata(const SteadyProfile& profile, const SteadyOptions& options) {
    return {{"kind", "steady_profile"},
            {"p", profile.p},
            {"n", profile.n},
            {"R", profile.R},
            {"center_value", profile.center_value},
            {"solver",
             {{"tol", options.tol},
              {"switch_fraction", options.switch_fraction},
              {"end_fraction", options.end_fraction},
              {"method", "dopri5 outward, ln w inverted near the boundary"}}},
            {"nodes", profile.size()}};
}

void write_steady_csv(const SteadyProfile& profile, const fs::path& csv) {
    std::string text = "r,w\n";
    for (std::size_t i = 0; i < profile.size(); ++i) {
        text += format_double(profile.r[i]) + ',' + format_double(profile.w[i]) + '\n';
    }
    write_text(csv, text);
}

void save_steady(const SteadyProfile& profile, const SteadyOptions& options, const fs::path& stem) {
    write_steady_csv(profile, with_ext(stem, ".csv"));
    write_text(with_ext(stem, ".json"), steady_metadata(profile, options).dump(2) + "\n");
}

SteadyProfile load_steady(const fs::path& stem) {
    const nlohmann::json meta = read_json(with_ext(stem, ".json"));
    SteadyProfile s;
    try {
        s.p = meta.at("p").get<double>();
        s.n = meta.at("n").get<int>();
        s.R = meta.at("R").get<double>();
        s.center_value = meta.at("center_value").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(stem.string() + ".json: " + e.what());
    }
    auto cols = read_csv(with_ext(stem, ".csv"), "r,w");
    s.r = std::move(cols[0]);
    s.w = std::move(cols[1]);
    return s;
}

nlohmann::json norm_record(const NormSample& sample) {
    nlohmann::json lq = nlohmann::json::object();
    for (const auto& [q, v] : sample.lq) lq[NormIndex::finite(q).label()] = v;
    return {{"t", sample.t}, {"tau", std::log1p(sample.t)}, {"linf", sample.linf}, {"lq", lq},
            {"min_inner", sample.min_inner}};
}

NormSample parse_norm_record(const nlohmann::json& record) {
    NormSample s;
    try {
        s.t = record.at("t").get<double>();
        s.linf = record.at("linf").get<double>();
        s.min_inner = record.at("min_inner").get<double>();
        for (const auto& [key, value] : record.at("lq").items()) {
            s.lq.emplace_back(NormIndex::parse(key).value(), value.get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("run record: ") + e.what());
    }
    return s;
}

void write_run_jsonl(const EvolutionRun& run, const fs::path& path) {
    std::string text;
    for (const NormSample& s : run.norms) text += norm_record(s).dump() + '\n';
    write_text(path, text);
}

void append_fits_jsonl(std::span<const DecayFit> fits, const fs::path& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const DecayFit& f : fits) arr.push_back(to_json(f));
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw FormatError("cannot append to " + path.string());
    out << nlohmann::json{{"fits", arr}}.dump() << '\n';
}

RunFile read_run_jsonl(const fs::path& path) {
    RunFile rf;
    std::istringstream in(read_text(path));
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(row) + ": " + e.what());
        }
        if (j.contains("fits")) {
            for (const auto& f : j["fits"]) rf.fits.push_back(f);
        } else {
            rf.norms.push_back(parse_norm_record(j));
        }
    }
    return rf;
}

void write_field_csv(const RadialField& field, const fs::path& path) {
    std::string text = "r,u\n";
    for (std::size_t i = 0; i < field.size(); ++i) {
        text += format_double(field.r[i]) + ',' + format_double(field.u[i]) + '\n';
    }
    write_text(path, text);
}

std::vector<fs::path> write_snapshots(const EvolutionRun& run, const fs::path& dir) {
    std::vector<fs::path> out;
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04zu.csv", k);
        out.push_back(dir / name);
        write_field_csv(run.snapshots[k].field, out.back());
    }
    return out;
}

nlohmann::json to_json(const EvolveConfig& c) {
    nlohmann::json qs = nlohmann::json::array();
    for (double q : c.norm_qs) qs.push_back(q);
    return {{"p", c.p},
            {"n", c.n},
            {"R", c.R},
            {"eps", c.eps},
            {"t_start", c.t_start},
            {"t_end", c.t_end},
            {"nodes", c.nodes},
            {"stretch", c.stretch},
            {"taper", c.taper},
            {"dt_rel", c.dt_rel},
            {"dt_min_sched", c.dt_min_sched},
            {"dt_max", std::isfinite(c.dt_max) ? nlohmann::json(c.dt_max) : nlohmann::json(nullptr)},
            {"dt_floor", c.dt_floor},
            {"samples_per_decade", c.samples_per_decade},
            {"sample_from", c.sample_from},
            {"inner_radius", c.inner_radius},
            {"norm_qs", qs},
            {"newton_tol", c.newton.tol}};
}

EvolveConfig evolve_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("evolve config: expected an object");
    EvolveConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "p") c.p = v.get<double>();
            else if (key == "n") c.n = v.get<int>();
            else if (key == "R") c.R = v.get<double>();
            else if (key == "eps") c.eps = v.get<double>();
            else if (key == "t_start") c.t_start = v.get<double>();
            else if (key == "t_end") c.t_end = v.get<double>();
            else if (key == "nodes") c.nodes = v.get<std::size_t>();
            else if (key == "stretch") c.stretch = v.get<double>();
            else if (key == "taper") c.taper = v.get<double>();
            else if (key == "dt_rel") c.dt_rel = v.get<double>();
            else if (key == "dt_min_sched") c.dt_min_sched = v.get<double>();
            else if (key == "dt_max") c.dt_max = v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
            else if (key == "dt_floor") c.dt_floor = v.get<double>();
            else if (key == "samples_per_decade") c.samples_per_decade = v.get<int>();
            else if (key == "sample_from") c.sample_from = v.get<double>();
            else if (key == "inner_radius") c.inner_radius = v.get<double>();
            else if (key == "norm_qs") c.norm_qs = v.get<std::vector<double>>();
            else if (key == "newton_tol") c.newton.tol = v.get<double>();
            else throw FormatError("evolve config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("evolve config: ") + e.what());
    }
    return c;
}

}  // namespace sfd
