#include "sfd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "sfd/asymptotics.hpp"
#include "sfd/errors.hpp"
#include "sfd/io.hpp"
#include "sfd/profile_ode.hpp"
#include "sfd/radial_pde.hpp"
#include "sfd/steady_state.hpp"

namespace sfd {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// manifests and records

ExperimentManifest ExperimentManifest::from_json(const json& j) {
    ExperimentManifest m;
    try {
        if (!j.is_object()) throw FormatError("manifest: expected a JSON object");
        m.schema = j.at("schema").get<int>();
        if (m.schema != 1) throw FormatError("manifest: unsupported schema " + std::to_string(m.schema));
        m.scenario = j.at("scenario").get<std::string>();
        m.name = j.value("name", m.scenario);
        if (j.contains("parameters")) m.parameters = j.at("parameters");
        if (!m.parameters.is_object()) throw FormatError("manifest: parameters must be an object");
        m.output_dir = j.value("output_dir", std::string("out/") + m.name);
        for (const auto& [key, _] : j.items()) {
            if (key != "schema" && key != "name" && key != "scenario" && key != "parameters" && key != "output_dir") {
                throw FormatError("manifest: unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    const auto names = scenario_names();
    if (std::find(names.begin(), names.end(), m.scenario) == names.end()) {
        throw FormatError("manifest: unknown scenario '" + m.scenario + "'");
    }
    if (m.name.empty() || m.name.find('/') != std::string::npos) throw FormatError("manifest: bad name");
    return m;
}

ExperimentManifest ExperimentManifest::load(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentManifest::to_json() const {
    return {{"schema", schema},
            {"name", name},
            {"scenario", scenario},
            {"parameters", parameters},
            {"output_dir", output_dir.generic_string()}};
}

bool ResultRecord::all_pass() const {
    if (failed || verdicts.empty()) return false;
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace {

json verdict_json(const Verdict& v) {
    return {{"name", v.name},          {"anchor", v.anchor},       {"measured", v.measured},
            {"theory", v.theory},      {"tolerance", v.tolerance}, {"pass", v.pass}};
}

}  // namespace

json ResultRecord::payload() const {
    json vs = json::array();
    for (const Verdict& v : verdicts) vs.push_back(verdict_json(v));
    json ov = json::array();
    for (const Overlay& o : overlays) ov.push_back({{"norm", o.norm}, {"slope", o.slope}, {"t_anchor", o.t_anchor}});
    return {{"schema", 1},
            {"name", name},
            {"scenario", scenario},
            {"manifest_hash", manifest_hash},
            {"files", files},
            {"verdicts", vs},
            {"overlays", ov},
            {"parameters", parameters},
            {"failed", failed},
            {"error", error},
            {"all_pass", all_pass()}};
}

json ResultRecord::to_json() const {
    json j = payload();
    j["started"] = started;
    j["finished"] = finished;
    return j;
}

ResultRecord ResultRecord::from_json(const json& j) {
    ResultRecord r;
    try {
        r.name = j.at("name").get<std::string>();
        r.scenario = j.at("scenario").get<std::string>();
        r.manifest_hash = j.at("manifest_hash").get<std::string>();
        r.started = j.value("started", "");
        r.finished = j.value("finished", "");
        r.files = j.at("files").get<std::vector<std::string>>();
        for (const auto& v : j.at("verdicts")) {
            r.verdicts.push_back({v.at("name").get<std::string>(), v.at("anchor").get<std::string>(),
                                  v.at("measured").get<double>(), v.at("theory").get<double>(),
                                  v.at("tolerance").get<double>(), v.at("pass").get<bool>()});
        }
        if (j.contains("overlays")) {
            for (const auto& o : j.at("overlays")) {
                r.overlays.push_back({o.at("norm").get<std::string>(), o.at("slope").get<double>(),
                                      o.at("t_anchor").get<double>()});
            }
        }
        r.parameters = j.value("parameters", json::object());
        r.failed = j.at("failed").get<bool>();
        r.error = j.value("error", "");
    } catch (const json::exception& e) {
        throw FormatError(std::string("result record: ") + e.what());
    }
    return r;
}

std::string manifest_hash(const ExperimentManifest& manifest) {
    const std::string text = manifest.to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// scenario plumbing

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Context {
    json params;
    fs::path dir;
    double tol_scale;
    ResultRecord& rec;

    double num(const char* key) const { return params.at(key).get<double>(); }
    int integer(const char* key) const { return params.at(key).get<int>(); }
    std::vector<double> nums(const char* key) const { return params.at(key).get<std::vector<double>>(); }
    std::vector<int> ints(const char* key) const { return params.at(key).get<std::vector<int>>(); }

    void file(const fs::path& rel) { rec.files.push_back(rel.generic_string()); }

    /// |measured - theory| <= tolerance
    void close(std::string name, std::string anchor, double measured, double theory, double tolerance) {
        rec.verdicts.push_back({std::move(name), std::move(anchor), measured, theory, tolerance,
                                std::abs(measured - theory) <= tolerance});
    }
    /// measured <= bound + tolerance
    void at_most(std::string name, std::string anchor, double measured, double bound, double tolerance) {
        rec.verdicts.push_back({std::move(name), std::move(anchor), measured, bound, tolerance,
                                measured <= bound + tolerance});
    }
    /// measured >= bound - tolerance
    void at_least(std::string name, std::string anchor, double measured, double bound, double tolerance) {
        rec.verdicts.push_back({std::move(name), std::move(anchor), measured, bound, tolerance,
                                measured >= bound - tolerance});
    }
    /// measured < bound strictly
    void below(std::string name, std::string anchor, double measured, double bound) {
        rec.verdicts.push_back({std::move(name), std::move(anchor), measured, 0.0, bound, measured < bound});
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

std::vector<NormIndex> parse_norms(const json& arr) {
    std::vector<NormIndex> out;
    for (const auto& v : arr) out.push_back(v.is_string() ? NormIndex::parse(v.get<std::string>()) : NormIndex::finite(v.get<double>()));
    return out;
}

EvolveConfig evolution_config(const Context& ctx) {
    EvolveConfig c;
    c.p = ctx.num("p");
    c.n = ctx.integer("n");
    c.R = ctx.num("R");
    c.eps = ctx.num("eps");
    c.t_end = ctx.num("t_end");
    c.nodes = ctx.params.at("nodes").get<std::size_t>();
    c.dt_rel = ctx.num("dt_rel");
    c.inner_radius = ctx.num("inner_radius");
    c.newton.tol *= ctx.tol_scale;
    return c;
}

EvolutionRun evolve_and_save(Context& ctx, const InitialDatum& u0, EvolveConfig config,
                             const std::vector<NormIndex>& norms) {
    config.norm_qs.clear();
    for (const NormIndex& q : norms) {
        if (!q.is_infinite()) config.norm_qs.push_back(q.value());
    }
    EvolutionRun run = evolve(u0, config);
    write_run_jsonl(run, ctx.dir / "run.jsonl");
    ctx.file("run.jsonl");
    write_text(ctx.dir / "config.json", to_json(run.config).dump(2) + "\n");
    ctx.file("config.json");
    if (ctx.params.value("dump_fields", false)) {
        for (const fs::path& p : write_snapshots(run, ctx.dir / "fields")) ctx.file(fs::relative(p, ctx.dir));
    }
    return run;
}

void save_fits(Context& ctx, const std::vector<DecayFit>& fits) {
    if (!fits.empty()) append_fits_jsonl(fits, ctx.dir / "run.jsonl");
}

double min_semi_convexity(const EvolutionRun& run, double t_lo, double t_hi) {
    double m = std::numeric_limits<double>::infinity();
    for (const Snapshot& s : run.snapshots) {
        if (s.dudt.empty() || s.field.t < t_lo || s.field.t > t_hi) continue;
        m = std::min(m, semi_convexity_margin(s));
    }
    return m;
}

// ---------------------------------------------------------------------------
// scenarios

const char* kIdentityAnchor =
    "xi^{n-1} f' + k (n + (p-1) alpha/beta) int_0^xi s^{n-1} f^{1-p} ds - k xi^n f^{1-p} = 0, k = beta/(p-1)";
const char* kTailAnchor = "c (1+xi)^{-alpha/beta} <= f(xi) <= C (1+xi)^{-alpha/beta}";
const char* kCosineAnchor = "f(xi) >= A cos(sqrt(alpha) xi) for xi < pi/(2 sqrt(alpha))";
const char* kHalfAnchor = "f_A(xi) >= A/2 at xi = pi/(3 sqrt(alpha))";
const char* kScalingAnchor = "w_R(x) = R^{2/p} w_1(x/R)";
const char* kClosedFormAnchor = "w_R(r) = (R^2 - r^2)/(2n) for p = 1";
const char* kUpperAnchor = "||u(t)||_q <= C t^{-(1-q0/q)/(p+2q0/n)}";
const char* kLowerAnchor = "||u(t)||_q >= C(delta) t^{-(1-q0/q)/(p+2q0/n)-delta} for t > 1";
const char* kMassAnchor = "||u(t)||_{q0} <= ||u0||_{q0}";
const char* kGammaAnchor = "||u(t)||_inf ~ t^{-gamma/(p gamma+2)} for u0 ~ (1+|x|)^{-gamma}";
const char* kSuperAnchor = "u(x,t) <= (t+1)^{-alpha} f_A((t+1)^{-beta}|x|)";
const char* kSemiAnchor = "u_t/u >= -1/(p t)";
const char* kSubAnchor = "v(x,tau) >= y(tau) w_{R(tau)}(x)";
const char* kYAnchor = "y(tau0) >= {(2^gamma c1/C0)^p + 1}^{-1/p}";
const char* kProp103Anchor = "inf_{|x|<R} t^{1/p} u(x,t) -> +infinity";
const char* kHeatInfAnchor = "inf_x H_k(x,t) = k!/(k/2)! t^{k/2}";
const char* kHeatEqAnchor = "H_t = H_xx";
const char* kVarthetaBoundsAnchor = "0 < vartheta(theta,m) < 1 and vartheta(theta,m) < 1/(1-m)";
const char* kVarthetaMonoAnchor = "vartheta is increasing in both variables";
const char* kRoundtripAnchor = "|m| vartheta(theta,m) = gamma/(p gamma+2) with p = (m-1)/m, gamma = -m theta";
const char* kNuAnchor = "rate_lq(q = inf) = n/(np + 2 q0)";

void scenario_profile_atlas(Context& ctx) {
    const double tol = ctx.num("tol") * ctx.tol_scale;
    const Window tail_window{ctx.nums("tail_window").at(0), ctx.nums("tail_window").at(1)};
    const double identity_xi = ctx.num("identity_xi_max");
    const int stride = std::max(1, ctx.integer("save_stride"));
    for (double p : ctx.nums("p_list")) {
        for (double frac : ctx.nums("alpha_fractions")) {
            for (double A : ctx.nums("A_list")) {
                for (int n : ctx.ints("n_list")) {
                    const ProfileParams pp = ProfileParams::self_similar(p, frac / p, A, n);
                    const std::string cell = "p=" + fmt(p) + ",alpha=" + fmt(pp.alpha) + ",A=" + fmt(A) + ",n=" +
                                             std::to_string(n);
                    ProfileOptions near;
                    near.xi_max = identity_xi;
                    near.tol = tol;
                    const Profile core = integrate_profile(pp, near);
                    ctx.below("identity[" + cell + "]", kIdentityAnchor, check_integral_identity(core),
                              ctx.num("identity_tol"));

                    const double sa = std::sqrt(pp.alpha);
                    const double xi_cos = std::numbers::pi / (2.0 * sa);
                    double cos_margin = std::numeric_limits<double>::infinity();
                    for (std::size_t i = 1; i < core.size() && core.xi[i] < xi_cos; ++i) {
                        cos_margin = std::min(cos_margin, (core.f[i] - A * std::cos(sa * core.xi[i])) / A);
                    }
                    ctx.at_least("cosine_minorant[" + cell + "]", kCosineAnchor, cos_margin, 0.0,
                                 ctx.num("interp_tol"));
                    const double xi_half = std::numbers::pi / (3.0 * sa);
                    if (xi_half <= core.xi_max()) {
                        ctx.at_least("half_bound[" + cell + "]", kHalfAnchor, core.interpolant()(xi_half) / A, 0.5,
                                     ctx.num("interp_tol"));
                    }

                    ProfileOptions far;
                    far.xi_max = tail_window.hi;
                    far.tol = tol;
                    const Profile full = integrate_profile(pp, far);
                    const LinearFit fit = fit_tail_exponent(full, tail_window);
                    const double expected = -pp.tail_exponent();
                    ctx.close("tail_slope[" + cell + "]", kTailAnchor, fit.slope, expected,
                              ctx.num("tail_tol") * std::abs(expected));

                    Profile thin;
                    thin.params = pp;
                    for (std::size_t i = 0; i < core.size(); i += static_cast<std::size_t>(stride)) {
                        thin.xi.push_back(core.xi[i]);
                        thin.f.push_back(core.f[i]);
                        thin.fp.push_back(core.fp[i]);
                    }
                    char stem[96];
                    std::snprintf(stem, sizeof stem, "profile_p%g_a%.4g_A%g_n%d", p, pp.alpha, A, n);
                    save_profile(thin, near, ctx.dir / stem);
                    ctx.file(std::string(stem) + ".csv");
                    ctx.file(std::string(stem) + ".json");
                }
            }
        }
    }
}

void scenario_steady_scaling(Context& ctx) {
    const double tol = ctx.num("tol") * ctx.tol_scale;
    const std::vector<double> radii = ctx.nums("radii");
    for (double p : ctx.nums("p_list")) {
        for (int n : ctx.ints("n_list")) {
            const std::string cell = "p=" + fmt(p) + ",n=" + std::to_string(n);
            SteadyOptions opts;
            opts.tol = tol;
            const SteadyProfile unit = shoot_unit_profile(p, n, tol);
            ctx.below("scaling[" + cell + "]", kScalingAnchor, verify_scaling_law(p, n, radii, tol),
                      ctx.num("scaling_tol"));
            if (p == 1.0) {
                double err = 0.0;
                for (double R : radii) {
                    const SteadyProfile w = scale_profile(unit, R);
                    for (std::size_t i = 0; i < w.size(); ++i) {
                        err = std::max(err, std::abs(w.w[i] - steady_closed_form_p1(n, R, w.r[i])));
                    }
                }
                ctx.below("closed_form[" + cell + "]", kClosedFormAnchor, err, ctx.num("closed_form_tol"));
            }
            const std::string stem = "steady_p" + fmt(p) + "_n" + std::to_string(n);
            save_steady(unit, opts, ctx.dir / stem);
            ctx.file(stem + ".csv");
            ctx.file(stem + ".json");
        }
    }
}

std::string norm_key(const NormIndex& q) { return q.is_infinite() ? "linf" : "l" + q.label(); }

void decay_bound_scenario(Context& ctx, bool upper) {
    const double p = ctx.num("p");
    const int n = ctx.integer("n");
    const double q0 = ctx.num("q0");
    const double delta = ctx.num("delta");
    const std::vector<NormIndex> norms = parse_norms(ctx.params.at("norms"));
    const Window window{ctx.nums("window").at(0), ctx.nums("window").at(1)};
    std::vector<NormIndex> recorded = norms;
    recorded.push_back(NormIndex::finite(q0));
    const EvolutionRun run = evolve_and_save(ctx, InitialDatum::algebraic(ctx.num("gamma"), ctx.num("C0")),
                                             evolution_config(ctx), recorded);
    std::vector<DecayFit> fits;
    for (const NormIndex& q : norms) {
        const double rate = rate_lq(p, n, q0, q);
        const DecayFit fit = fit_decay(run, q, window);
        fits.push_back(fit);
        if (upper) {
            ctx.at_most("decay_upper[" + norm_key(q) + "]", kUpperAnchor, fit.slope, -rate, delta);
        } else {
            ctx.at_least("decay_lower[" + norm_key(q) + "]", kLowerAnchor, fit.slope, -rate, delta);
        }
        ctx.rec.overlays.push_back({norm_key(q), -rate, window.lo});
    }
    save_fits(ctx, fits);

    // L^{q0} never increases between samples
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < run.norms.size(); ++k) {
        double prev = 0.0, cur = 0.0;
        for (const auto& [q, v] : run.norms[k - 1].lq) if (q == q0) prev = v;
        for (const auto& [q, v] : run.norms[k].lq) if (q == q0) cur = v;
        worst = std::max(worst, (cur - prev) / prev);
    }
    ctx.at_most("lq0_nonincreasing", kMassAnchor, worst, 0.0, ctx.num("monotone_tol"));
}

void scenario_theorem200(Context& ctx) { decay_bound_scenario(ctx, true); }
void scenario_theorem100(Context& ctx) { decay_bound_scenario(ctx, false); }

void scenario_theorem2000_upper(Context& ctx) {
    const double p = ctx.num("p");
    const int n = ctx.integer("n");
    const double gamma = ctx.num("gamma");
    const double C1 = ctx.num("C1");
    const Window window{ctx.nums("window").at(0), ctx.nums("window").at(1)};
    const EvolutionRun run = evolve_and_save(ctx, InitialDatum::algebraic(gamma, C1), evolution_config(ctx),
                                             {NormIndex::infinity(), NormIndex::finite(1.0)});
    const double rate = rate_gamma(p, n, gamma, NormIndex::infinity());
    const DecayFit fit = fit_decay(run, NormIndex::infinity(), window);
    save_fits(ctx, {fit});
    ctx.close("linf_slope", kGammaAnchor, fit.slope, -rate, ctx.num("delta"));
    ctx.rec.overlays.push_back({"linf", -rate, window.lo});

    const SelfSimilarSupersolution sup = self_similar_supersolution(p, n, gamma, C1, ctx.num("margin"));
    double worst = std::numeric_limits<double>::infinity();
    for (const Snapshot& s : run.snapshots) {
        for (std::size_t i = 0; i < s.field.size(); ++i) {
            const double ub = sup(s.field.r[i], s.field.t);
            worst = std::min(worst, (ub - s.field.u[i]) / ub);
        }
    }
    ctx.at_least("below_supersolution", kSuperAnchor, worst, 0.0, 0.0);
    const double sc_lo = ctx.nums("semi_convexity_window").at(0);
    const double sc_hi = ctx.nums("semi_convexity_window").at(1);
    ctx.at_least("semi_convexity", kSemiAnchor, min_semi_convexity(run, sc_lo, sc_hi), 0.0,
                 ctx.num("semi_convexity_tol"));
}

void scenario_theorem2000_lower(Context& ctx) {
    const double p = ctx.num("p");
    const int n = ctx.integer("n");
    const double gamma = ctx.num("gamma");
    const double C0 = ctx.num("C0");
    const Window window{ctx.nums("window").at(0), ctx.nums("window").at(1)};
    const EvolutionRun run = evolve_and_save(ctx, InitialDatum::algebraic(gamma, C0), evolution_config(ctx),
                                             {NormIndex::infinity()});
    const double rate = rate_gamma(p, n, gamma, NormIndex::infinity());
    const DecayFit fit = fit_decay(run, NormIndex::infinity(), window);
    save_fits(ctx, {fit});
    ctx.at_least("linf_slope_lower", kGammaAnchor, fit.slope, -rate, ctx.num("delta"));
    ctx.rec.overlays.push_back({"linf", -rate, window.lo});

    const SteadyProfile unit = shoot_unit_profile(p, n, 1e-13 * ctx.tol_scale);
    const RescaledRun v = rescale_to_v(run);
    double worst = std::numeric_limits<double>::infinity();
    double y_margin = std::numeric_limits<double>::infinity();
    for (const RescaledSlice& s : v.slices) {
        if (!(s.tau > 0.0)) continue;
        const SeparatedSubsolution sub = separated_subsolution(unit, gamma, C0, s.tau);
        if (sub.R >= run.config.R) continue;
        for (std::size_t i = 0; i < s.r.size() && s.r[i] < sub.R; ++i) {
            worst = std::min(worst, (s.v[i] - sub(s.r[i], s.tau)) / s.v[i]);
        }
        const double bound = std::pow(std::pow(std::pow(2.0, gamma) * sub.c1 / C0, p) + 1.0, -1.0 / p);
        y_margin = std::min(y_margin, sub.y(s.tau) - bound);
    }
    ctx.at_least("above_subsolution", kSubAnchor, worst, 0.0, 0.0);
    ctx.at_least("y_lower_bound", kYAnchor, y_margin, 0.0, 1e-14);
}

void scenario_prop103(Context& ctx) {
    const EvolutionRun run = evolve_and_save(ctx, InitialDatum::gaussian(ctx.num("sigma"), ctx.num("amplitude")),
                                             evolution_config(ctx), {NormIndex::infinity(), NormIndex::finite(1.0)});
    const RescaledRun v = rescale_to_v(run);
    std::vector<double> mins;
    for (double t : ctx.nums("check_times")) {
        auto it = std::find_if(v.norms.begin(), v.norms.end(),
                               [t](const RescaledSample& s) { return std::abs(s.t - t) <= 1e-9 * t; });
        if (it == v.norms.end()) throw DomainError("prop103: check time " + fmt(t) + " was not sampled");
        mins.push_back(it->min_inner);
    }
    double smallest_gain = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < mins.size(); ++k) smallest_gain = std::min(smallest_gain, mins[k] - mins[k - 1]);
    ctx.rec.verdicts.push_back({"inner_min_v_increasing", kProp103Anchor, smallest_gain, 0.0, 0.0, smallest_gain > 0.0});
    ctx.rec.overlays.push_back({"linf", -rate_fast(ctx.num("p")), 1.0});
}

void scenario_remark_heat(Context& ctx) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.integer("seed")));
    std::uniform_int_distribution<int> num(-50, 50), den(1, 20);
    json table = json::array();
    for (int k : ctx.ints("k_list")) {
        const HeatPolynomial h(k);
        BigInt expected = 1;
        for (int i = k / 2 + 1; i <= k; ++i) expected *= i;
        const BigInt& lead_t = h.coefficients().back();
        const bool exact = lead_t == expected && h.inf_coefficient() == expected;
        ctx.rec.verdicts.push_back({"inf_coefficient[k=" + std::to_string(k) + "]", kHeatInfAnchor,
                                    lead_t.convert_to<double>(), expected.convert_to<double>(), 0.0, exact});
        // the minimum over a fine x grid at t = 1 is attained at x = 0
        double grid_min = std::numeric_limits<double>::infinity();
        for (int i = -400; i <= 400; ++i) grid_min = std::min(grid_min, h(i / 100.0, 1.0));
        ctx.close("grid_minimum[k=" + std::to_string(k) + "]", kHeatInfAnchor, grid_min, heat_poly_inf(k, 1.0), 0.0);
        int nonzero = 0;
        for (int i = 0; i < ctx.integer("random_points"); ++i) {
            const Rational x(num(rng), den(rng));
            Rational t(std::abs(num(rng)) + 1, den(rng));
            if (h.heat_residual(x, t) != 0) ++nonzero;
        }
        ctx.rec.verdicts.push_back({"heat_equation[k=" + std::to_string(k) + "]", kHeatEqAnchor,
                                    static_cast<double>(nonzero), 0.0, 0.0, nonzero == 0});
        json coeffs = json::array();
        for (const BigInt& c : h.coefficients()) coeffs.push_back(c.str());
        table.push_back({{"k", k}, {"coefficients", coeffs}, {"inf_coefficient", h.inf_coefficient().str()}});
    }
    write_text(ctx.dir / "heat_polynomials.json", table.dump(2) + "\n");
    ctx.file("heat_polynomials.json");
}

void scenario_vartheta_table(Context& ctx) {
    const int nt = ctx.integer("theta_count");
    const int nm = ctx.integer("m_count");
    const double th_lo = ctx.nums("theta_range").at(0), th_hi = ctx.nums("theta_range").at(1);
    const double m_lo = ctx.nums("m_range").at(0), m_hi = ctx.nums("m_range").at(1);
    if (nt < 2 || nm < 2 || !(th_lo > 0.0) || !(m_hi < 0.0) || !(m_lo < m_hi)) {
        throw DomainError("vartheta_table: bad grid");
    }
    std::vector<double> th(nt), ms(nm);
    for (int i = 0; i < nt; ++i) th[i] = th_lo * std::pow(th_hi / th_lo, i / double(nt - 1));
    for (int j = 0; j < nm; ++j) ms[j] = m_lo + (m_hi - m_lo) * j / double(nm - 1);

    int bound_violations = 0, mono_violations = 0;
    double roundtrip = 0.0;
    std::string csv = "theta,m,vartheta\n";
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < nm; ++j) {
            const double v = vartheta(th[i], ms[j]);
            if (!(v > 0.0 && v < 1.0 && v < 1.0 / (1.0 - ms[j]))) ++bound_violations;
            if (i > 0 && !(v > vartheta(th[i - 1], ms[j]))) ++mono_violations;
            if (j > 0 && !(v > vartheta(th[i], ms[j - 1]))) ++mono_violations;
            roundtrip = std::max(roundtrip, exponent_roundtrip(th[i], ms[j]));
            csv += format_double(th[i]) + ',' + format_double(ms[j]) + ',' + format_double(v) + '\n';
        }
    }
    write_text(ctx.dir / "vartheta_table.csv", csv);
    ctx.file("vartheta_table.csv");
    ctx.rec.verdicts.push_back({"vartheta_bounds", kVarthetaBoundsAnchor, double(bound_violations), 0.0, 0.0,
                                bound_violations == 0});
    ctx.rec.verdicts.push_back({"vartheta_monotone", kVarthetaMonoAnchor, double(mono_violations), 0.0, 0.0,
                                mono_violations == 0});
    ctx.below("roundtrip_residual", kRoundtripAnchor, roundtrip, ctx.num("roundtrip_tol"));

    int exact_nonzero = 0;
    for (int a = 1; a <= 10; ++a) {
        for (int b = 1; b <= 10; ++b) {
            if (exponent_roundtrip_exact(Rational(a, 3), Rational(-b, 4)) != 0) ++exact_nonzero;
        }
    }
    ctx.rec.verdicts.push_back({"roundtrip_exact", kRoundtripAnchor, double(exact_nonzero), 0.0, 0.0, exact_nonzero == 0});

    int nu_mismatch = 0;
    json exps = json::array();
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        for (int n : {1, 2, 3}) {
            for (double q0 : {0.5, 1.0, 2.0}) {
                if (rate_lq(p, n, q0, NormIndex::infinity()) != rate_nu(p, n, q0)) ++nu_mismatch;
                if (p > 1.0) {
                    exps.push_back(to_json(with_fast_diffusion(exponent_table(p, n, q0, NormIndex::infinity(), 2.0))));
                }
            }
        }
    }
    ctx.rec.verdicts.push_back({"lq_rate_at_infinity_is_nu", kNuAnchor, double(nu_mismatch), 0.0, 0.0, nu_mismatch == 0});
    write_text(ctx.dir / "exponents.json", exps.dump(2) + "\n");
    ctx.file("exponents.json");
}

json evolution_defaults() {
    return {{"p", 2.0},   {"n", 1},           {"R", 100.0},       {"eps", 1e-6},
            {"nodes", 2001}, {"t_end", 1000.0}, {"dt_rel", 1e-3},   {"inner_radius", 1.0},
            {"dump_fields", false}};
}

struct ScenarioEntry {
    std::function<void(Context&)> body;
    std::function<json()> defaults;
};

const std::map<std::string, ScenarioEntry>& registry() {
    static const std::map<std::string, ScenarioEntry> table{
        {"profile_atlas",
         {scenario_profile_atlas,
          [] {
              return json{{"p_list", {1.5, 2.0, 3.0}},      {"alpha_fractions", {0.125, 0.25, 0.5}},
                          {"A_list", {1.0}},                {"n_list", {1}},
                          {"tol", 1e-10},                   {"identity_xi_max", 50.0},
                          {"identity_tol", 1e-6},           {"tail_window", {100.0, 10000.0}},
                          {"tail_tol", 0.02},               {"interp_tol", 1e-8},
                          {"save_stride", 10}};
          }}},
        {"steady_scaling",
         {scenario_steady_scaling,
          [] {
              return json{{"p_list", {1.0, 2.0}},   {"n_list", {1, 2, 3}},     {"radii", {0.5, 2.0, 10.0}},
                          {"tol", 1e-13},           {"scaling_tol", 1e-5},     {"closed_form_tol", 1e-8}};
          }}},
        {"theorem200",
         {scenario_theorem200,
          [] {
              json j = evolution_defaults();
              j.update({{"q0", 1.0}, {"gamma", 1.2}, {"C0", 1.0}, {"norms", {"inf", 2.0}},
                        {"window", {10.0, 1000.0}}, {"delta", 0.05}, {"monotone_tol", 1e-9}});
              return j;
          }}},
        {"theorem100",
         {scenario_theorem100,
          [] {
              json j = evolution_defaults();
              j.update({{"q0", 1.0}, {"gamma", 1.2}, {"C0", 1.0}, {"norms", {"inf", 2.0}},
                        {"window", {10.0, 1000.0}}, {"delta", 0.05}, {"monotone_tol", 1e-9}});
              return j;
          }}},
        {"theorem2000_upper",
         {scenario_theorem2000_upper,
          [] {
              json j = evolution_defaults();
              j.update({{"gamma", 2.0}, {"C1", 1.0}, {"window", {10.0, 1000.0}}, {"delta", 0.05},
                        {"margin", 1.1}, {"semi_convexity_window", {1.0, 100.0}}, {"semi_convexity_tol", 1e-3}});
              return j;
          }}},
        {"theorem2000_lower",
         {scenario_theorem2000_lower,
          [] {
              json j = evolution_defaults();
              j.update({{"gamma", 2.0}, {"C0", 1.0}, {"window", {10.0, 1000.0}}, {"delta", 0.05}});
              return j;
          }}},
        {"prop103",
         {scenario_prop103,
          [] {
              json j = evolution_defaults();
              j.update({{"sigma", 1.0}, {"amplitude", 1.0}, {"check_times", {10.0, 100.0, 1000.0}}});
              return j;
          }}},
        {"remark_heat",
         {scenario_remark_heat,
          [] { return json{{"k_list", {2, 4, 6, 8}}, {"random_points", 100}, {"seed", 1}}; }}},
        {"vartheta_table",
         {scenario_vartheta_table,
          [] {
              return json{{"theta_count", 20},        {"m_count", 20},          {"theta_range", {0.05, 20.0}},
                          {"m_range", {-20.0, -0.05}}, {"roundtrip_tol", 1e-15}};
          }}},
    };
    return table;
}

json merged_parameters(const ExperimentManifest& m) {
    json params = default_parameters(m.scenario);
    for (const auto& [key, value] : m.parameters.items()) {
        if (!params.contains(key)) throw FormatError("manifest '" + m.name + "': unknown parameter '" + key + "'");
        params[key] = value;
    }
    return params;
}

}  // namespace

std::vector<std::string> scenario_names() {
    std::vector<std::string> names;
    for (const auto& [name, _] : registry()) names.push_back(name);
    return names;
}

json default_parameters(const std::string& scenario) {
    const auto& reg = registry();
    auto it = reg.find(scenario);
    if (it == reg.end()) throw FormatError("unknown scenario '" + scenario + "'");
    return it->second.defaults();
}

ResultRecord run(const ExperimentManifest& manifest, const RunOptions& options) {
    ResultRecord rec;
    rec.name = manifest.name;
    rec.scenario = manifest.scenario;
    rec.manifest_hash = manifest_hash(manifest);
    rec.started = utc_now();
    rec.output_dir = options.out_root.empty() ? manifest.output_dir : options.out_root / manifest.name;
    try {
        rec.parameters = merged_parameters(manifest);
        fs::create_directories(rec.output_dir);
        Context ctx{rec.parameters, rec.output_dir, options.tol_scale, rec};
        registry().at(manifest.scenario).body(ctx);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = manifest.scenario + ": " + e.what();
    }
    rec.finished = utc_now();
    try {
        write_text(rec.output_dir / "result.json", rec.to_json().dump(2) + "\n");
    } catch (const std::exception& e) {
        rec.failed = true;
        if (rec.error.empty()) rec.error = e.what();
    }
    return rec;
}

std::vector<ResultRecord> sweep(std::span<const ExperimentManifest> manifests, int workers, const RunOptions& options) {
    std::vector<ResultRecord> out(manifests.size());
    if (manifests.empty()) return out;
    const std::size_t nthreads = std::clamp<std::size_t>(workers < 1 ? 1 : static_cast<std::size_t>(workers), 1,
                                                         manifests.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < manifests.size(); i = next++) out[i] = run(manifests[i], options);
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < nthreads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

std::vector<ExperimentManifest> load_manifest_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FormatError(dir.string() + " is not a directory");
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<ExperimentManifest> out;
    for (const auto& p : paths) out.push_back(ExperimentManifest::load(p));
    return out;
}

std::vector<ResultRecord> load_records(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FormatError(dir.string() + " is not a directory");
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().filename() == "result.json") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<ResultRecord> out;
    for (const auto& p : paths) {
        json j;
        try {
            j = json::parse(read_text(p));
        } catch (const json::exception& e) {
            throw FormatError(p.string() + ": " + e.what());
        }
        ResultRecord r = ResultRecord::from_json(j);
        r.output_dir = p.parent_path();
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

Report report(std::span<const ResultRecord> records, const fs::path& out_dir) {
    Report rep;
    fs::create_directories(out_dir);
    struct Row {
        std::string cols[7];
    };
    std::vector<Row> rows;
    rows.push_back({{"assertion", "anchor", "measured", "theory", "tolerance", "verdict", "record"}});
    for (const ResultRecord& r : records) {
        if (r.failed || r.verdicts.empty()) {
            rows.push_back({{"(scenario)", r.error.empty() ? "no verdicts" : r.error, "-", "-", "-", "FAIL", r.name}});
            rep.all_pass = false;
        }
        for (const Verdict& v : r.verdicts) {
            rows.push_back({{v.name, v.anchor, short_num(v.measured), short_num(v.theory), short_num(v.tolerance),
                             v.pass ? "PASS" : "FAIL", r.name}});
            rep.all_pass = rep.all_pass && v.pass;
        }

        // plot data: ln t against ln norm for every recorded series, plus overlays
        const fs::path run_file = r.output_dir / "run.jsonl";
        if (!fs::exists(run_file)) continue;
        const RunFile rf = read_run_jsonl(run_file);
        std::map<std::string, std::vector<std::pair<double, double>>> series;
        for (const NormSample& s : rf.norms) {
            if (!(s.t > 0.0)) continue;
            series["linf"].emplace_back(s.t, s.linf);
            for (const auto& [q, v] : s.lq) series["l" + NormIndex::finite(q).label()].emplace_back(s.t, v);
        }
        for (const auto& [key, pts] : series) {
            std::string text = "t," + key + "\n";
            for (const auto& [t, v] : pts) text += format_double(t) + ',' + format_double(v) + '\n';
            const fs::path f = out_dir / (r.name + "_" + key + ".csv");
            write_text(f, text);
            rep.plot_files.push_back(f);
        }
        for (const Overlay& o : r.overlays) {
            auto it = series.find(o.norm);
            if (it == series.end() || it->second.empty()) continue;
            const auto& pts = it->second;
            auto anchor = std::min_element(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
                return std::abs(std::log(a.first / o.t_anchor)) < std::abs(std::log(b.first / o.t_anchor));
            });
            std::string text = "t,overlay\n";
            for (const auto& [t, v] : pts) {
                if (t < anchor->first) continue;
                text += format_double(t) + ',' + format_double(anchor->second * std::pow(t / anchor->first, o.slope)) + '\n';
            }
            const fs::path f = out_dir / (r.name + "_" + o.norm + "_overlay.csv");
            write_text(f, text);
            rep.plot_files.push_back(f);
        }
    }
    std::size_t width[7] = {0};
    for (const Row& row : rows) {
        for (int c = 0; c < 7; ++c) width[c] = std::max(width[c], row.cols[c].size());
    }
    std::ostringstream os;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (int c = 0; c < 7; ++c) os << pad(rows[k].cols[c], c == 6 ? 0 : width[c] + 2);
        os << '\n';
        if (k == 0) {
            std::size_t total = 0;
            for (int c = 0; c < 7; ++c) total += width[c] + (c == 6 ? 0 : 2);
            os << std::string(total, '-') << '\n';
        }
    }
    os << (rep.all_pass ? "ALL PASS" : "FAILURES PRESENT") << '\n';
    rep.table = os.str();
    write_text(out_dir / "summary.txt", rep.table);
    return rep;
}

}  // namespace sfd
