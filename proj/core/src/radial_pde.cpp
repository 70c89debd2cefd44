#include "sfd/radial_pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sfd/errors.hpp"

namespace sfd {

InitialDatum InitialDatum::algebraic(double gamma, double C0) {
    if (!(gamma > 0.0) || !(C0 > 0.0)) throw DomainError("algebraic datum: gamma and C0 must be positive");
    InitialDatum d;
    d.kind = Kind::algebraic;
    d.gamma = gamma;
    d.C0 = C0;
    d.label = "algebraic";
    return d;
}

InitialDatum InitialDatum::gaussian(double sigma, double amplitude) {
    if (!(sigma > 0.0) || !(amplitude > 0.0)) throw DomainError("gaussian datum: sigma and amplitude must be positive");
    InitialDatum d;
    d.kind = Kind::gaussian;
    d.sigma = sigma;
    d.amplitude = amplitude;
    d.label = "gaussian";
    return d;
}

InitialDatum InitialDatum::from_table(std::vector<double> r, std::vector<double> u, std::string label) {
    if (r.size() < 2 || r.size() != u.size()) throw DomainError("table datum: need matching r and u with >= 2 entries");
    if (r.front() != 0.0) throw DomainError("table datum: first abscissa must be 0");
    for (double v : u) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("table datum: values must be positive");
    }
    InitialDatum d;
    d.kind = Kind::table;
    d.table = MonotoneCubic(std::move(r), std::move(u));
    d.label = std::move(label);
    return d;
}

InitialDatum InitialDatum::self_similar_slice(const Profile& profile, double t) {
    if (!(t > 0.0)) throw DomainError("self_similar_slice: t must be positive");
    const ProfileParams& pp = profile.params;
    const double stretch = std::pow(t, pp.beta);
    const double scale = std::pow(t, -pp.alpha);
    std::vector<double> r(profile.size()), u(profile.size()), up(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        r[i] = profile.xi[i] * stretch;
        u[i] = profile.f[i] * scale;
        up[i] = profile.fp[i] * scale / stretch;
    }
    InitialDatum d;
    d.kind = Kind::table;
    d.table = MonotoneCubic(std::move(r), std::move(u), std::move(up));
    std::ostringstream os;
    os << "self_similar(p=" << pp.p << ",alpha=" << pp.alpha << ",A=" << pp.A << ",n=" << pp.n << ",t=" << t << ")";
    d.label = os.str();
    return d;
}

double InitialDatum::operator()(double r) const {
    switch (kind) {
    case Kind::algebraic:
        return C0 * std::pow(1.0 + r, -gamma);
    case Kind::gaussian:
        return amplitude * std::exp(-0.5 * r * r / (sigma * sigma));
    case Kind::table:
        return table(r);
    }
    return 0.0;
}

std::string InitialDatum::description() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::algebraic:
        os << "algebraic(gamma=" << gamma << ",C0=" << C0 << ")";
        break;
    case Kind::gaussian:
        os << "gaussian(sigma=" << sigma << ",amplitude=" << amplitude << ")";
        break;
    case Kind::table:
        os << label;
        break;
    }
    return os.str();
}

std::vector<double> build_grid(double R, std::size_t N, double stretch) {
    if (N < 16) throw DomainError("build_grid: need at least 16 nodes");
    if (!(R > 0.0)) throw DomainError("build_grid: R must be positive");
    if (!(stretch >= 1.0)) throw DomainError("build_grid: stretch must be >= 1");
    const std::size_t cells = N - 1;
    std::vector<double> h(cells);
    // h_k = h_0 q^k with q^{cells-1} = stretch
    const double q = std::pow(stretch, 1.0 / static_cast<double>(cells - 1));
    double sum = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        h[k] = std::pow(q, static_cast<double>(k));
        sum += h[k];
    }
    std::vector<double> r(N);
    r[0] = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        acc += h[k];
        r[k + 1] = R * acc / sum;
    }
    r[N - 1] = R;
    return r;
}

RadialField RadialField::initial(const InitialDatum& u0, double p, int n, std::vector<double> grid, double eps,
                                 double t0, double taper) {
    if (!(p >= 1.0)) throw DomainError("RadialField: p must be >= 1");
    if (n < 1) throw DomainError("RadialField: n must be >= 1");
    if (!(eps >= 0.0)) throw DomainError("RadialField: eps must be >= 0");
    if (grid.size() < 16 || grid.front() != 0.0) throw DomainError("RadialField: grid must start at 0 with >= 16 nodes");
    RadialField f;
    f.p = p;
    f.n = n;
    f.R = grid.back();
    f.eps = eps;
    f.t = t0;
    f.r = std::move(grid);
    f.u.resize(f.r.size());
    for (std::size_t i = 0; i + 1 < f.r.size(); ++i) {
        const double cut = taper > 0.0 ? 1.0 - std::pow(f.r[i] / f.R, taper) : 1.0;
        f.u[i] = u0(f.r[i]) * cut + eps;
    }
    f.u.back() = eps;
    if (eps == 0.0) {
        for (std::size_t i = 0; i + 1 < f.u.size(); ++i) {
            if (!(f.u[i] > 0.0)) throw DomainError("RadialField: eps = 0 needs data positive off the boundary");
        }
    }
    return f;
}

namespace {

/// (L u)_i = a_i (u_{i-1} - u_i) + c_i (u_{i+1} - u_i) from face fluxes over cell volumes.
struct Stencil {
    std::vector<double> a;
    std::vector<double> c;
};

Stencil make_stencil(const std::vector<double>& r, int n) {
    const std::size_t N = r.size();
    Stencil s;
    s.a.assign(N, 0.0);
    s.c.assign(N, 0.0);
    const double dim = n;
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double rm = i == 0 ? 0.0 : 0.5 * (r[i - 1] + r[i]);
        const double rp = 0.5 * (r[i] + r[i + 1]);
        const double vol = (std::pow(rp, dim) - std::pow(rm, dim)) / dim;
        s.c[i] = std::pow(rp, dim - 1.0) / ((r[i + 1] - r[i]) * vol);
        if (i > 0) s.a[i] = std::pow(rm, dim - 1.0) / ((r[i] - r[i - 1]) * vol);
    }
    return s;
}

double laplacian_at(const Stencil& s, const std::vector<double>& u, std::size_t i) {
    const double left = i == 0 ? 0.0 : s.a[i] * (u[i - 1] - u[i]);
    return left + s.c[i] * (u[i + 1] - u[i]);
}

double residual(const Stencil& s, const std::vector<double>& u, const std::vector<double>& u_old, double p,
                double dt, std::vector<double>& F) {
    const std::size_t m = u.size() - 1;
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        F[i] = u[i] - u_old[i] - dt * std::pow(u[i], p) * laplacian_at(s, u, i);
        norm = std::max(norm, std::abs(F[i]));
    }
    return norm;
}

}  // namespace

RadialField step_implicit(const RadialField& field, double dt, const NewtonSettings& newton) {
    if (!(dt > 0.0)) throw DomainError("step_implicit: dt must be positive");
    const std::size_t N = field.size();
    if (N < 3) throw DomainError("step_implicit: field too small");
    const std::size_t m = N - 1;  // unknowns 0..m-1, node m is the boundary
    const Stencil s = make_stencil(field.r, field.n);
    const double p = field.p;

    RadialField out = field;
    out.t = field.t + dt;
    out.u.back() = field.eps;
    std::vector<double>& u = out.u;

    const double scale = std::max(*std::max_element(field.u.begin(), field.u.end()), field.eps);
    const double target = newton.tol * scale;

    std::vector<double> F(N), lo(m), di(m), up(m), delta(m), trial;
    double fnorm = residual(s, u, field.u, p, dt, F);

    for (int it = 0; it < newton.max_iter; ++it) {
        if (fnorm <= target) return out;
        for (std::size_t i = 0; i < m; ++i) {
            const double up_ = std::pow(u[i], p);
            const double lap = laplacian_at(s, u, i);
            const double dpow = p * std::pow(u[i], p - 1.0);
            di[i] = 1.0 - dt * (dpow * lap - up_ * (s.a[i] + s.c[i]));
            lo[i] = i == 0 ? 0.0 : -dt * up_ * s.a[i];
            up[i] = i + 1 < m ? -dt * up_ * s.c[i] : 0.0;
            delta[i] = -F[i];
        }
        // Thomas algorithm
        for (std::size_t i = 1; i < m; ++i) {
            const double w = lo[i] / di[i - 1];
            di[i] -= w * up[i - 1];
            delta[i] -= w * delta[i - 1];
        }
        delta[m - 1] /= di[m - 1];
        for (std::size_t i = m - 1; i-- > 0;) delta[i] = (delta[i] - up[i] * delta[i + 1]) / di[i];

        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= newton.max_halvings; ++h, lambda *= 0.5) {
            trial = u;
            bool positive = true;
            for (std::size_t i = 0; i < m; ++i) {
                trial[i] = u[i] + lambda * delta[i];
                if (!(trial[i] > 0.0)) {
                    positive = false;
                    break;
                }
            }
            if (!positive) continue;
            const double tnorm = residual(s, trial, field.u, p, dt, F);
            if (tnorm < fnorm || tnorm <= target) {
                u.swap(trial);
                fnorm = tnorm;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Residual can no longer decrease: accept only if it sits at rounding level.
            if (fnorm <= 1e3 * target) return out;
            throw NewtonDivergence("step_implicit: damping failed at residual " + std::to_string(fnorm));
        }
    }
    if (fnorm <= target) return out;
    throw NewtonDivergence("step_implicit: no convergence, residual " + std::to_string(fnorm));
}

namespace {

double sphere_area(int n) {
    const double dim = n;
    return dim * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

}  // namespace

double lq_norm(const RadialField& field, double q) {
    if (!(q > 0.0)) throw DomainError("lq_norm: q must be positive");
    const double dim = field.n;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < field.size(); ++i) {
        const double g0 = std::pow(field.u[i], q) * std::pow(field.r[i], dim - 1.0);
        const double g1 = std::pow(field.u[i + 1], q) * std::pow(field.r[i + 1], dim - 1.0);
        sum += 0.5 * (g0 + g1) * (field.r[i + 1] - field.r[i]);
    }
    return std::pow(sphere_area(field.n) * sum, 1.0 / q);
}

double linf_norm(const RadialField& field) {
    return field.u.empty() ? 0.0 : *std::max_element(field.u.begin(), field.u.end());
}

double min_inner(const RadialField& field, double radius) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < field.size() && field.r[i] <= radius; ++i) m = std::min(m, field.u[i]);
    return m;
}

std::vector<double> sample_times(const EvolveConfig& config) {
    if (config.samples_per_decade < 1) throw DomainError("sample_times: samples_per_decade must be >= 1");
    std::vector<double> ts{config.t_start};
    const double from = std::max(config.t_start, config.sample_from);
    const double spd = config.samples_per_decade;
    long k = static_cast<long>(std::floor(std::log10(from) * spd));
    for (;; ++k) {
        const double t = std::pow(10.0, static_cast<double>(k) / spd);
        if (t >= config.t_end * (1.0 - 1e-12)) break;
        if (t > ts.back() * (1.0 + 1e-12) && t > from * (1.0 - 1e-12)) ts.push_back(t);
    }
    if (config.t_end > ts.back()) ts.push_back(config.t_end);
    return ts;
}

namespace {

NormSample measure(const RadialField& f, const EvolveConfig& config) {
    NormSample s;
    s.t = f.t;
    s.linf = linf_norm(f);
    for (double q : config.norm_qs) s.lq.emplace_back(q, lq_norm(f, q));
    s.min_inner = min_inner(f, config.inner_radius);
    return s;
}

}  // namespace

EvolutionRun evolve(const InitialDatum& u0, const EvolveConfig& config) {
    RadialField start = RadialField::initial(u0, config.p, config.n, build_grid(config.R, config.nodes, config.stretch),
                                             config.eps, config.t_start, config.taper);
    return evolve(start, config, u0.description());
}

EvolutionRun evolve(const RadialField& start, const EvolveConfig& cfg, std::string datum) {
    EvolutionRun run;
    run.config = cfg;
    run.config.t_start = start.t;
    run.config.p = start.p;
    run.config.n = start.n;
    run.config.R = start.R;
    run.config.eps = start.eps;
    run.config.nodes = start.size();
    run.datum = std::move(datum);
    const EvolveConfig& config = run.config;
    if (!(config.t_end > config.t_start)) throw DomainError("evolve: t_end must exceed the start time");
    if (!(config.dt_rel > 0.0) || !(config.dt_min_sched > 0.0)) throw DomainError("evolve: invalid dt schedule");

    const std::vector<double> ts = sample_times(config);
    RadialField field = start;
    run.norms.push_back(measure(field, config));
    if (config.keep_snapshots) run.snapshots.push_back({field, {}, 0.0});

    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double target = ts[k];
        RadialField prev = field;
        double last_dt = 0.0;
        while (field.t < target) {
            const double sched = std::clamp(config.dt_rel * field.t, config.dt_min_sched, config.dt_max);
            double dt = sched;
            bool lands = false;
            if (field.t + dt >= target - 0.25 * sched) {
                dt = target - field.t;
                lands = true;
            }
            for (;;) {
                if (dt < config.dt_floor) {
                    throw StepTooSmall("evolve: dt fell below " + std::to_string(config.dt_floor) + " at t = " +
                                       std::to_string(field.t));
                }
                try {
                    RadialField next = step_implicit(field, dt, config.newton);
                    if (lands) next.t = target;
                    prev = std::move(field);
                    field = std::move(next);
                    last_dt = dt;
                    ++run.steps;
                    break;
                } catch (const NewtonDivergence&) {
                    ++run.rejected;
                    dt *= 0.5;
                    lands = false;
                }
            }
        }
        run.norms.push_back(measure(field, config));
        if (config.keep_snapshots) {
            Snapshot snap{field, std::vector<double>(field.size()), last_dt};
            for (std::size_t i = 0; i < field.size(); ++i) snap.dudt[i] = (field.u[i] - prev.u[i]) / last_dt;
            run.snapshots.push_back(std::move(snap));
        }
    }
    return run;
}

double semi_convexity_margin(const Snapshot& snapshot) {
    const RadialField& f = snapshot.field;
    if (snapshot.dudt.size() != f.size() || !(snapshot.dt > 0.0)) {
        throw DomainError("semi_convexity_margin: snapshot carries no step rate");
    }
    const double t_mid = f.t - 0.5 * snapshot.dt;
    if (!(t_mid > 0.0)) throw DomainError("semi_convexity_margin: needs t > 0");
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double u_mid = f.u[i] - 0.5 * snapshot.dt * snapshot.dudt[i];
        margin = std::min(margin, snapshot.dudt[i] / u_mid + 1.0 / (f.p * t_mid));
    }
    return margin;
}

RescaledRun rescale_to_v(const EvolutionRun& run) {
    if (run.norms.empty()) throw DomainError("rescale_to_v: empty run");
    RescaledRun out;
    const double p = run.config.p;
    out.p = p;
    for (const Snapshot& s : run.snapshots) {
        RescaledSlice slice;
        slice.t = s.field.t;
        slice.tau = std::log1p(s.field.t);
        const double factor = std::pow(s.field.t + 1.0, 1.0 / p);
        slice.r = s.field.r;
        slice.v.resize(s.field.size());
        for (std::size_t i = 0; i < s.field.size(); ++i) slice.v[i] = factor * s.field.u[i];
        out.slices.push_back(std::move(slice));
    }
    for (const NormSample& n : run.norms) {
        const double factor = std::pow(n.t + 1.0, 1.0 / p);
        RescaledSample r;
        r.t = n.t;
        r.tau = std::log1p(n.t);
        r.linf = factor * n.linf;
        r.min_inner = factor * n.min_inner;
        for (const auto& [q, v] : n.lq) r.lq.emplace_back(q, factor * v);
        out.norms.push_back(std::move(r));
    }
    return out;
}

double SeparatedSubsolution::y(double tau) const {
    const double e = std::exp(-tau);
    return std::pow(std::pow(delta, -p) * e + 1.0 - e, -1.0 / p);
}

double SeparatedSubsolution::operator()(double r, double tau) const {
    if (r >= R) return 0.0;
    return y(tau) * w(r);
}

SeparatedSubsolution separated_subsolution(const SteadyProfile& unit, double gamma, double C0, double tau0) {
    if (!(gamma > 0.0) || !(C0 > 0.0) || !(tau0 > 0.0)) {
        throw DomainError("separated_subsolution: gamma, C0 and tau0 must be positive");
    }
    SeparatedSubsolution s;
    s.p = unit.p;
    s.n = unit.n;
    s.gamma = gamma;
    s.C0 = C0;
    s.tau0 = tau0;
    s.R = std::exp(tau0 / (s.p * gamma + 2.0));
    s.c1 = unit.center_value;
    s.delta = C0 / (std::pow(2.0, gamma) * s.c1) * std::pow(s.R, -gamma - 2.0 / s.p);
    s.w_R = scale_profile(unit, s.R);
    s.w = s.w_R.interpolant();
    return s;
}

SeparatedSubsolution separated_subsolution(double p, int n, double gamma, double C0, double tau0) {
    return separated_subsolution(shoot_unit_profile(p, n), gamma, C0, tau0);
}

double SelfSimilarSupersolution::operator()(double r, double t) const {
    const double s = t + 1.0;
    const double xi = std::pow(s, -params.beta) * r;
    const double xm = profile.xi_max();
    const double f_xi = xi <= xm ? f(xi) : profile.f.back() * std::pow((1.0 + xm) / (1.0 + xi), tail.exponent);
    return std::pow(s, -params.alpha) * f_xi;
}

SelfSimilarSupersolution self_similar_supersolution(double p, int n, double gamma, double C1, double margin,
                                                    double xi_max) {
    if (!(p > 1.0)) throw DomainError("self_similar_supersolution: requires p > 1");
    if (!(gamma > 0.0) || !(C1 > 0.0) || !(margin >= 1.0)) {
        throw DomainError("self_similar_supersolution: gamma, C1 must be positive and margin >= 1");
    }
    const double alpha = gamma / (p * gamma + 2.0);
    const double goal = margin * C1;
    // m(A) = min f_A (1+xi)^gamma grows at least like A and at most like A^{1 + p gamma/2}.
    const double max_power = 1.0 + 0.5 * p * gamma;
    double A = C1;
    SelfSimilarSupersolution out;
    for (int iter = 0; iter < 30; ++iter) {
        out.params = ProfileParams::self_similar(p, alpha, A, n);
        ProfileOptions opts;
        opts.xi_max = xi_max;
        out.profile = integrate_profile(out.params, opts);
        out.tail = certify_tail_bounds(out.profile, {0.0, xi_max});
        const double m = out.tail.lower_const;
        if (m >= goal && m <= 1.05 * goal) break;
        A *= m < goal ? goal / m : std::pow(goal / m, 1.0 / max_power);
    }
    if (out.tail.lower_const < goal) throw ToleranceError("self_similar_supersolution: could not reach the bound");
    out.f = out.profile.interpolant();
    return out;
}

}  // namespace sfd
