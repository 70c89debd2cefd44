// sfdlab: command line front end for the fast diffusion laboratory.
//
//   sfdlab profile --p 2 --alpha 0.25
//   sfdlab steady --p 2 --n 1 --R 3
//   sfdlab evolve --datum algebraic --gamma 2 --t-end 100
//   sfdlab fit out/run.jsonl --norm inf --window 10 1000
//   sfdlab run manifests/theorem200.json
//   sfdlab sweep manifests --workers 4
//   sfdlab report out
//
// Exit status is 0 when every assertion passes, 1 when one fails and 2 on errors.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "sfd/asymptotics.hpp"
#include "sfd/errors.hpp"
#include "sfd/experiments.hpp"
#include "sfd/io.hpp"
#include "sfd/profile_ode.hpp"
#include "sfd/radial_pde.hpp"
#include "sfd/steady_state.hpp"

namespace {

using json = nlohmann::json;

struct Globals {
    std::string out;
    int workers = 1;
    double tol_scale = 1.0;

    [[nodiscard]] sfd::fs::path out_dir() const { return out.empty() ? sfd::fs::path("out") : sfd::fs::path(out); }
};

int cmd_profile(const Globals& g, double p, double alpha, double A, int n, double xi_max, double tol,
                double spacing, const std::string& name) {
    const sfd::ProfileParams pp = sfd::ProfileParams::self_similar(p, alpha, A, n);
    sfd::ProfileOptions opts;
    opts.xi_max = xi_max;
    opts.tol = tol * g.tol_scale;
    opts.spacing = spacing;
    const sfd::Profile prof = sfd::integrate_profile(pp, opts);
    sfd::save_profile(prof, opts, g.out_dir() / name);
    json summary{{"file", (g.out_dir() / (name + ".csv")).generic_string()},
                 {"nodes", prof.size()},
                 {"beta", pp.beta},
                 {"tail_exponent", pp.tail_exponent()},
                 {"f_end", prof.f.back()}};
    if (p > 1.0) summary["identity_residual"] = sfd::check_integral_identity(prof);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_steady(const Globals& g, double p, int n, double R, double tol, const std::string& name) {
    sfd::SteadyOptions opts;
    opts.tol = tol * g.tol_scale;
    const sfd::SteadyProfile unit = sfd::shoot_unit_profile(p, n, opts.tol);
    const sfd::SteadyProfile w = sfd::scale_profile(unit, R);
    sfd::save_steady(w, opts, g.out_dir() / name);
    std::cout << json{{"file", (g.out_dir() / (name + ".csv")).generic_string()},
                      {"nodes", w.size()},
                      {"center_value", w.center_value},
                      {"unit_center_value", unit.center_value},
                      {"residual", sfd::steady_residual(w)}}
                     .dump(2)
              << '\n';
    return 0;
}

struct EvolveArgs {
    std::string config;
    std::string datum = "algebraic";
    double gamma = 2.0, C0 = 1.0, sigma = 1.0, amplitude = 1.0, alpha = 0.25, A = 1.0;
    std::optional<double> p, R, eps, t_start, t_end;
    std::optional<int> n;
    std::optional<std::size_t> nodes;
    std::vector<double> qs;
    bool snapshots = false;
    std::string name = "run";
};

int cmd_evolve(const Globals& g, const EvolveArgs& a) {
    sfd::EvolveConfig c;
    if (!a.config.empty()) c = sfd::evolve_config_from_json(json::parse(sfd::read_text(a.config)));
    if (a.p) c.p = *a.p;
    if (a.n) c.n = *a.n;
    if (a.R) c.R = *a.R;
    if (a.eps) c.eps = *a.eps;
    if (a.t_start) c.t_start = *a.t_start;
    if (a.t_end) c.t_end = *a.t_end;
    if (a.nodes) c.nodes = *a.nodes;
    if (!a.qs.empty()) c.norm_qs = a.qs;
    c.newton.tol *= g.tol_scale;
    c.keep_snapshots = a.snapshots;

    sfd::InitialDatum u0;
    if (a.datum == "algebraic") {
        u0 = sfd::InitialDatum::algebraic(a.gamma, a.C0);
    } else if (a.datum == "gaussian") {
        u0 = sfd::InitialDatum::gaussian(a.sigma, a.amplitude);
    } else if (a.datum == "self_similar") {
        if (!(c.t_start > 0.0)) throw sfd::DomainError("self_similar datum needs --t-start > 0");
        const sfd::ProfileParams pp = sfd::ProfileParams::self_similar(c.p, a.alpha, a.A, c.n);
        sfd::ProfileOptions po;
        po.xi_max = 1.01 * c.R * std::pow(c.t_start, -pp.beta);
        po.tol = 1e-10 * g.tol_scale;
        u0 = sfd::InitialDatum::self_similar_slice(sfd::integrate_profile(pp, po), c.t_start);
    } else {
        throw sfd::DomainError("unknown datum '" + a.datum + "' (algebraic, gaussian, self_similar)");
    }
    const sfd::EvolutionRun run = sfd::evolve(u0, c);
    const sfd::fs::path file = g.out_dir() / (a.name + ".jsonl");
    sfd::write_run_jsonl(run, file);
    sfd::write_text(g.out_dir() / (a.name + "_config.json"), sfd::to_json(run.config).dump(2) + "\n");
    if (a.snapshots) sfd::write_snapshots(run, g.out_dir() / (a.name + "_fields"));
    std::cout << json{{"file", file.generic_string()},
                      {"datum", run.datum},
                      {"samples", run.norms.size()},
                      {"steps", run.steps},
                      {"rejected_steps", run.rejected},
                      {"linf_end", run.norms.back().linf}}
                     .dump(2)
              << '\n';
    return 0;
}

int cmd_fit(const std::string& file, const std::vector<std::string>& norms, const std::vector<double>& window,
            const std::optional<double>& expect, double tolerance) {
    if (window.size() != 2) throw sfd::DomainError("--window takes two values");
    const sfd::RunFile rf = sfd::read_run_jsonl(file);
    sfd::EvolutionRun run;
    run.norms = rf.norms;
    std::vector<sfd::DecayFit> fits;
    for (const std::string& s : norms) fits.push_back(sfd::fit_decay(run, sfd::NormIndex::parse(s), {window[0], window[1]}));
    sfd::append_fits_jsonl(fits, file);
    int status = 0;
    for (const sfd::DecayFit& f : fits) {
        json j = sfd::to_json(f);
        if (expect) {
            const bool pass = std::abs(f.slope - *expect) <= tolerance;
            j["expected"] = *expect;
            j["tolerance"] = tolerance;
            j["pass"] = pass;
            if (!pass) status = 1;
        }
        std::cout << j.dump() << '\n';
    }
    return status;
}

int finish(const std::vector<sfd::ResultRecord>& records, const sfd::fs::path& report_dir) {
    const sfd::Report rep = sfd::report(records, report_dir);
    std::cout << rep.table;
    return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for u_t = u^p Laplace(u)"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--out", g.out, "Output directory (default: out, or the manifest's output_dir)");
    app.add_option("--workers", g.workers, "Worker threads for sweep")->check(CLI::PositiveNumber);
    app.add_option("--tol-scale", g.tol_scale, "Multiplier for solver tolerances")->check(CLI::PositiveNumber);

    double p = 2.0, alpha = 0.25, A = 1.0, xi_max = 50.0, tol = 1e-10, spacing = 2.5e-4, R = 1.0, stol = 1e-13;
    int n = 1;
    std::string name;
    auto* profile = app.add_subcommand("profile", "Integrate a self-similar profile to CSV + JSON");
    profile->add_option("--p", p, "Exponent p");
    profile->add_option("--alpha", alpha, "Decay exponent alpha in (0, 1/p)");
    profile->add_option("--A", A, "Center value f(0)");
    profile->add_option("--n", n, "Dimension");
    profile->add_option("--xi-max", xi_max, "End of the integration range");
    profile->add_option("--tol", tol, "Relative tolerance");
    profile->add_option("--spacing", spacing, "Relative node spacing");
    profile->add_option("--name", name, "Output stem")->default_val("profile");

    auto* steady = app.add_subcommand("steady", "Shoot the steady Dirichlet profile on a ball");
    steady->add_option("--p", p, "Exponent p");
    steady->add_option("--n", n, "Dimension");
    steady->add_option("--R", R, "Ball radius");
    steady->add_option("--tol", stol, "Relative tolerance");
    steady->add_option("--name", name, "Output stem")->default_val("steady");

    EvolveArgs ea;
    auto* evolve = app.add_subcommand("evolve", "Evolve radial data and record norms as JSON lines");
    evolve->add_option("--config", ea.config, "JSON file with solver settings");
    evolve->add_option("--datum", ea.datum, "algebraic | gaussian | self_similar");
    evolve->add_option("--gamma", ea.gamma, "algebraic: decay exponent");
    evolve->add_option("--C0", ea.C0, "algebraic: amplitude");
    evolve->add_option("--sigma", ea.sigma, "gaussian: width");
    evolve->add_option("--amplitude", ea.amplitude, "gaussian: height");
    evolve->add_option("--alpha", ea.alpha, "self_similar: alpha");
    evolve->add_option("--A", ea.A, "self_similar: center value");
    evolve->add_option("--p", ea.p, "Exponent p");
    evolve->add_option("--n", ea.n, "Dimension");
    evolve->add_option("--R", ea.R, "Domain radius");
    evolve->add_option("--eps", ea.eps, "Boundary value");
    evolve->add_option("--t-start", ea.t_start, "Initial time");
    evolve->add_option("--t-end", ea.t_end, "Final time");
    evolve->add_option("--nodes", ea.nodes, "Grid nodes");
    evolve->add_option("--q", ea.qs, "Finite norm exponents to record");
    evolve->add_flag("--snapshots", ea.snapshots, "Dump r,u CSV at every sampled time");
    evolve->add_option("--name", ea.name, "Output stem");

    std::string fit_file;
    std::vector<std::string> fit_norms{"inf"};
    std::vector<double> fit_window{10.0, 1000.0};
    std::optional<double> fit_expect;
    double fit_tol = 0.05;
    auto* fit = app.add_subcommand("fit", "Fit log-log decay slopes and append them to a run file");
    fit->add_option("file", fit_file, "run.jsonl")->required()->check(CLI::ExistingFile);
    fit->add_option("--norm", fit_norms, "inf or a finite q");
    fit->add_option("--window", fit_window, "t_lo t_hi")->expected(2);
    fit->add_option("--expect", fit_expect, "Expected slope; sets the exit status");
    fit->add_option("--tolerance", fit_tol, "Allowed |slope - expect|");

    std::string manifest_path;
    auto* runc = app.add_subcommand("run", "Run one experiment manifest");
    runc->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);

    std::string sweep_dir;
    auto* sweepc = app.add_subcommand("sweep", "Run every manifest in a directory");
    sweepc->add_option("dir", sweep_dir, "Directory of manifests")->required()->check(CLI::ExistingDirectory);

    std::string report_dir;
    auto* reportc = app.add_subcommand("report", "Summarize result.json files below a directory");
    reportc->add_option("dir", report_dir, "Output tree")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        sfd::RunOptions ro;
        ro.tol_scale = g.tol_scale;
        if (!g.out.empty()) ro.out_root = g.out;
        if (profile->parsed()) return cmd_profile(g, p, alpha, A, n, xi_max, tol, spacing, name);
        if (steady->parsed()) return cmd_steady(g, p, n, R, stol, name);
        if (evolve->parsed()) return cmd_evolve(g, ea);
        if (fit->parsed()) return cmd_fit(fit_file, fit_norms, fit_window, fit_expect, fit_tol);
        if (runc->parsed()) {
            const sfd::ResultRecord rec = sfd::run(sfd::ExperimentManifest::load(manifest_path), ro);
            return finish({rec}, rec.output_dir / "report");
        }
        if (sweepc->parsed()) {
            const auto manifests = sfd::load_manifest_dir(sweep_dir);
            if (manifests.empty()) throw sfd::FormatError("no manifests in " + sweep_dir);
            const auto records = sfd::sweep(manifests, g.workers, ro);
            return finish(records, g.out_dir() / "report");
        }
        if (reportc->parsed()) {
            const auto records = sfd::load_records(report_dir);
            if (records.empty()) throw sfd::FormatError("no result.json below " + report_dir);
            return finish(records, g.out.empty() ? sfd::fs::path(report_dir) / "report" : sfd::fs::path(g.out));
        }
    } catch (const std::exception& e) {
        std::cerr << "sfdlab: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
