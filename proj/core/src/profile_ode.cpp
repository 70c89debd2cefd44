#include "sfd/profile_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sfd/detail/rosenbrock.hpp"
#include "sfd/errors.hpp"

namespace sfd {

ProfileParams ProfileParams::self_similar(double p, double alpha, double A, int n) {
    if (!(p >= 1.0)) throw DomainError("self_similar: p must be >= 1");
    if (!(alpha > 0.0 && p * alpha < 1.0)) {
        throw DomainError("self_similar: alpha must lie in (0, 1/p)");
    }
    ProfileParams params{p, alpha, 0.5 * (1.0 - p * alpha), A, n};
    params.validate();
    return params;
}

void ProfileParams::validate() const {
    if (!(p >= 1.0)) throw DomainError("profile: p must be >= 1");
    if (!(A > 0.0)) throw DomainError("profile: A must be positive");
    if (!(alpha > 0.0)) throw DomainError("profile: alpha must be positive");
    if (!(beta > 0.0)) throw DomainError("profile: beta must be positive");
    if (n < 1) throw DomainError("profile: dimension n must be >= 1");
}

bool ProfileParams::is_self_similar(double tol) const {
    return std::abs(beta - 0.5 * (1.0 - p * alpha)) <= tol;
}

double ProfileParams::core_length() const {
    return std::pow(A, 0.5 * p) / std::sqrt(alpha);
}

TaylorStart taylor_start(const ProfileParams& params, double xi0) {
    if (!(xi0 > 0.0)) throw DomainError("taylor_start: xi0 must be positive");
    const double c = -params.alpha * std::pow(params.A, 1.0 - params.p) / (2.0 * params.n);
    return {params.A + c * xi0 * xi0, 2.0 * c * xi0};
}

double default_taylor_offset(const ProfileParams& params) {
    const double cap = std::max(1.0, 1.0 / std::sqrt(params.alpha));
    return 1e-4 * std::min(cap, params.core_length());
}

namespace {

using State = detail::Vec<2>;
using Matrix = detail::Mat<2>;

// y = ln f, z = xi f'/f, independent variable s = ln xi:
//   y' = z
//   z' = -z^2 - (n-2) z - K (beta z + alpha),   K = exp(2 s - p y)
struct LogSystem {
    double p, alpha, beta, n;

    void rhs(const State& x, double s, State& dxds) const {
        const double K = std::exp(2.0 * s - p * x[0]);
        dxds[0] = x[1];
        dxds[1] = -x[1] * x[1] - (n - 2.0) * x[1] - K * (beta * x[1] + alpha);
    }

    void jacobian(const State& x, double s, Matrix& J, State& dfds) const {
        const double K = std::exp(2.0 * s - p * x[0]);
        const double g = beta * x[1] + alpha;
        J[0][0] = 0.0;
        J[0][1] = 1.0;
        J[1][0] = p * K * g;
        J[1][1] = -2.0 * x[1] - (n - 2.0) - K * beta;
        dfds[0] = 0.0;
        dfds[1] = -2.0 * K * g;
    }
};

std::vector<double> profile_nodes(const ProfileParams& params, const ProfileOptions& options) {
    const double ell = params.core_length();
    std::vector<double> nodes{0.0};
    double xi = 0.0;
    while (xi < options.xi_max) {
        xi += options.spacing * std::max(ell, xi);
        nodes.push_back(std::min(xi, options.xi_max));
    }
    return nodes;
}

}  // namespace

Profile integrate_profile(const ProfileParams& params, const ProfileOptions& options) {
    params.validate();
    if (!(options.xi_max > 0.0)) throw DomainError("integrate_profile: xi_max must be positive");
    if (!(options.tol > 1e-14 && options.tol < 1e-3)) {
        throw DomainError("integrate_profile: tol must lie in (1e-14, 1e-3)");
    }
    if (!(options.spacing > 0.0 && options.spacing <= 0.1)) {
        throw DomainError("integrate_profile: spacing must lie in (0, 0.1]");
    }

    Profile out;
    out.params = params;
    out.xi = profile_nodes(params, options);
    out.f.assign(out.xi.size(), params.A);
    out.fp.assign(out.xi.size(), 0.0);

    const double xi0 = std::min(default_taylor_offset(params), 0.5 * out.xi[1]);
    const TaylorStart start = taylor_start(params, xi0);

    const auto n = static_cast<double>(params.n);
    detail::Rosenbrock43<2, LogSystem> stepper(LogSystem{params.p, params.alpha, params.beta, n},
                                               1e-2 * options.tol, options.tol);

    State x{};
    x[0] = std::log(start.f);
    x[1] = xi0 * start.fp / start.f;
    double s = std::log(xi0);
    double ds = 0.1 * (std::log(out.xi[1]) - s);
    const double log_floor = std::log(options.f_floor);

    for (std::size_t k = 1; k < out.xi.size(); ++k) {
        const double s_next = std::log(out.xi[k]);
        while (s < s_next) {
            const double remaining = s_next - s;
            const bool clamped = ds >= remaining;
            double h = clamped ? remaining : ds;
            if (stepper.try_step(x, s, h)) {
                if (clamped) s = s_next;
                ds = clamped ? std::max(h, ds) : h;
                if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || x[0] < log_floor) {
                    throw SingularityError("integrate_profile: f fell below the positivity floor at xi = " +
                                           std::to_string(std::exp(s)));
                }
            } else {
                ds = h;
                if (ds < 1e-14 * std::max(1.0, std::abs(s))) {
                    throw ToleranceError("integrate_profile: step size underflow at xi = " +
                                         std::to_string(std::exp(s)));
                }
            }
        }
        const double f = std::exp(x[0]);
        out.f[k] = f;
        out.fp[k] = f * x[1] / out.xi[k];
    }
    return out;
}

Profile integrate_profile(const ProfileParams& params, double xi_max, double tol) {
    ProfileOptions options;
    options.xi_max = xi_max;
    options.tol = tol;
    return integrate_profile(params, options);
}

namespace {

void require_identity_domain(const Profile& profile) {
    if (!(profile.params.p > 1.0)) {
        throw DomainError("integral identity requires p > 1");
    }
    if (profile.size() < 3 || profile.xi.front() != 0.0) {
        throw DomainError("integral identity needs a profile sampled from xi = 0");
    }
}

double identity_residual(const Profile& profile, std::span<const std::size_t> idx,
                         std::span<const double> g) {
    const ProfileParams& pp = profile.params;
    const double k = pp.beta / (pp.p - 1.0);
    const double kn = pp.n + (pp.p - 1.0) * pp.alpha / pp.beta;
    double max_res = 0.0;
    double max_term = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const std::size_t i = idx[j];
        const double xi = profile.xi[i];
        const double t1 = std::pow(xi, pp.n - 1) * profile.fp[i];
        const double t2 = k * kn * g[j];
        const double t3 = -k * std::pow(xi, pp.n) * std::pow(profile.f[i], 1.0 - pp.p);
        max_res = std::max(max_res, std::abs(t1 + t2 + t3));
        max_term = std::max({max_term, std::abs(t1), std::abs(t2), std::abs(t3)});
    }
    return max_term > 0.0 ? max_res / max_term : 0.0;
}

double g_integrand(const Profile& profile, std::size_t i) {
    const ProfileParams& pp = profile.params;
    return std::pow(profile.xi[i], pp.n - 1) * std::pow(profile.f[i], 1.0 - pp.p);
}

}  // namespace

double check_integral_identity(const Profile& profile) {
    require_identity_domain(profile);
    std::vector<std::size_t> idx(profile.size());
    std::vector<double> g(profile.size(), 0.0);
    for (std::size_t i = 0; i < profile.size(); ++i) {
        idx[i] = i;
        if (i > 0) {
            g[i] = g[i - 1] + 0.5 * (profile.xi[i] - profile.xi[i - 1]) *
                                  (g_integrand(profile, i) + g_integrand(profile, i - 1));
        }
    }
    return identity_residual(profile, idx, g);
}

double check_integral_identity_richardson(const Profile& profile) {
    require_identity_domain(profile);
    std::vector<std::size_t> idx;
    std::vector<double> g;
    double fine = 0.0;
    double coarse = 0.0;
    idx.push_back(0);
    g.push_back(0.0);
    for (std::size_t i = 2; i < profile.size(); i += 2) {
        const double a = g_integrand(profile, i - 2);
        const double b = g_integrand(profile, i - 1);
        const double c = g_integrand(profile, i);
        fine += 0.5 * (profile.xi[i - 1] - profile.xi[i - 2]) * (a + b) +
                0.5 * (profile.xi[i] - profile.xi[i - 1]) * (b + c);
        coarse += 0.5 * (profile.xi[i] - profile.xi[i - 2]) * (a + c);
        idx.push_back(i);
        g.push_back((4.0 * fine - coarse) / 3.0);
    }
    return identity_residual(profile, idx, g);
}

LinearFit fit_tail_exponent(const Profile& profile, Window window) {
    if (!(window.lo > 0.0) || !(window.hi >= 100.0 * window.lo)) {
        throw WindowError("fit_tail_exponent: window must be positive and span at least two decades");
    }
    if (profile.size() == 0 || window.hi > profile.xi_max() * (1.0 + 1e-12)) {
        throw WindowError("fit_tail_exponent: window extends past the end of the profile");
    }
    std::vector<double> lx;
    std::vector<double> lf;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double xi = profile.xi[i];
        if (xi >= window.lo && xi <= window.hi) {
            lx.push_back(std::log(xi));
            lf.push_back(std::log(profile.f[i]));
        }
    }
    if (lx.size() < 10) throw WindowError("fit_tail_exponent: fewer than 10 nodes in window");
    return least_squares(lx, lf);
}

TailBound certify_tail_bounds(const Profile& profile, Window window) {
    if (!(profile.params.p > 1.0)) throw DomainError("certify_tail_bounds: requires p > 1");
    if (profile.size() == 0 || window.lo < 0.0 || window.hi < window.lo ||
        window.hi > profile.xi_max() * (1.0 + 1e-12)) {
        throw WindowError("certify_tail_bounds: window outside the profile grid");
    }
    const double gamma = profile.params.tail_exponent();
    TailBound bound{std::numeric_limits<double>::infinity(), 0.0, gamma, window};
    std::size_t used = 0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double xi = profile.xi[i];
        if (xi < window.lo || xi > window.hi) continue;
        const double v = profile.f[i] * std::pow(1.0 + xi, gamma);
        bound.lower_const = std::min(bound.lower_const, v);
        bound.upper_const = std::max(bound.upper_const, v);
        ++used;
    }
    if (used == 0) throw WindowError("certify_tail_bounds: no grid nodes inside window");
    return bound;
}

double eval_self_similar(const ProfileParams& params, const MonotoneCubic& f, double x, double t) {
    if (!(t > 0.0)) throw DomainError("eval_self_similar: t must be positive");
    const double xi = std::pow(t, -params.beta) * std::abs(x);
    if (xi > f.x_max()) {
        throw RangeError("eval_self_similar: similarity coordinate " + std::to_string(xi) +
                         " exceeds xi_max " + std::to_string(f.x_max()));
    }
    return std::pow(t, -params.alpha) * f(xi);
}

double eval_self_similar(const ProfileParams& params, const Profile& profile, double x, double t) {
    return eval_self_similar(params, profile.interpolant(), x, t);
}

double self_similar_residual(const ProfileParams& params, const Profile& profile,
                             std::span<const SamplePoint> samples, double interp_tol) {
    const MonotoneCubic f = profile.interpolant();
    const double step = std::cbrt(interp_tol);
    auto u = [&](double x, double t) { return eval_self_similar(params, f, x, t); };
    const double dim = profile.params.n;

    double max_res = 0.0;
    double max_ut = 0.0;
    for (const SamplePoint& sp : samples) {
        if (!(sp.x > 0.0) || !(sp.t > 0.0)) {
            throw RangeError("self_similar_residual: samples must have x > 0 and t > 0");
        }
        const double hx = step * std::max(1.0, sp.x);
        const double ht = step * sp.t;
        const double um2 = u(sp.x - 2 * hx, sp.t);
        const double um1 = u(sp.x - hx, sp.t);
        const double u0 = u(sp.x, sp.t);
        const double up1 = u(sp.x + hx, sp.t);
        const double up2 = u(sp.x + 2 * hx, sp.t);
        const double ur = (-up2 + 8.0 * up1 - 8.0 * um1 + um2) / (12.0 * hx);
        const double urr = (-up2 + 16.0 * up1 - 30.0 * u0 + 16.0 * um1 - um2) / (12.0 * hx * hx);
        const double ut = (-u(sp.x, sp.t + 2 * ht) + 8.0 * u(sp.x, sp.t + ht) -
                           8.0 * u(sp.x, sp.t - ht) + u(sp.x, sp.t - 2 * ht)) /
                          (12.0 * ht);
        const double lap = urr + (dim - 1.0) / sp.x * ur;
        max_res = std::max(max_res, std::abs(ut - std::pow(u0, params.p) * lap));
        max_ut = std::max(max_ut, std::abs(ut));
    }
    return max_ut > 0.0 ? max_res / max_ut : max_res;
}

Profile rescale_center_value(const Profile& profile, double A) {
    if (!(A > 0.0)) throw DomainError("rescale_center_value: A must be positive");
    const double lambda = A / profile.params.A;
    const double stretch = std::pow(lambda, 0.5 * profile.params.p);
    Profile out = profile;
    out.params.A = A;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.xi[i] *= stretch;
        out.f[i] *= lambda;
        out.fp[i] *= lambda / stretch;
    }
    return out;
}

}  // namespace sfd
