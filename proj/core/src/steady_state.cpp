#include "sfd/steady_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "sfd/errors.hpp"

namespace sfd {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

void check_params(double p, int n) {
    if (!(p >= 1.0)) throw DomainError("steady profile: p must be >= 1");
    if (n < 1) throw DomainError("steady profile: n must be >= 1");
}

}  // namespace

SteadyProfile shoot_from_center(double p, int n, double center, const SteadyOptions& options) {
    check_params(p, n);
    if (!(center > 0.0)) throw DomainError("shoot_from_center: center value must be positive");

    const double dim = n;
    const double length = std::pow(center, 0.5 * p);
    const double h_max = options.max_step_fraction * length;
    const double w_switch = options.switch_fraction * center;

    SteadyProfile out;
    out.p = p;
    out.n = n;
    out.center_value = center;
    out.r.push_back(0.0);
    out.w.push_back(center);
    out.wp.push_back(0.0);

    // Outward phase in r: w' = v, v' = -(n-1)/r v - (1/p) w^{1-p}.
    auto outward = [p, dim](const State& x, State& dxdr, double r) {
        dxdr[0] = x[1];
        dxdr[1] = -(dim - 1.0) / r * x[1] - std::pow(x[0], 1.0 - p) / p;
    };
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(options.tol * center,
                                                                              options.tol);
    const double r0 = 1e-4 * length;
    const double c = std::pow(center, 1.0 - p) / (2.0 * dim * p);
    State x{center - c * r0 * r0, -2.0 * c * r0};
    double r = r0;
    double dr = std::min(h_max, r0);
    out.r.push_back(r);
    out.w.push_back(x[0]);
    out.wp.push_back(x[1]);

    while (x[0] > w_switch) {
        if (r > options.r_guard * length) {
            throw NoCrossingError("shoot_from_center: no zero crossing before r = " + std::to_string(r));
        }
        const State saved = x;
        const double r_saved = r;
        const double attempted = std::min(dr, h_max);
        double h = attempted;
        if (stepper.try_step(outward, x, r, h) != odeint::success) {
            dr = h;
            if (dr < 1e-15 * length) throw ToleranceError("shoot_from_center: step size underflow");
            continue;
        }
        if (!(x[0] > 0.0) || !(x[1] < 0.0) || !std::isfinite(x[1])) {
            // Overshot the boundary layer; retry closer.
            x = saved;
            r = r_saved;
            dr = 0.5 * attempted;
            if (dr < 1e-15 * length) throw ToleranceError("shoot_from_center: step size underflow");
            continue;
        }
        dr = h;
        out.r.push_back(r);
        out.w.push_back(x[0]);
        out.wp.push_back(x[1]);
    }

    // Inverted phase in sigma = ln w, integrated downward:
    //   dr/dsigma = w / v,  dv/dsigma = -(n-1) w / r - (1/p) w^{2-p} / v.
    auto inward = [p, dim](const State& y, State& dyds, double sigma) {
        const double w = std::exp(sigma);
        dyds[0] = w / y[1];
        dyds[1] = -(dim - 1.0) * w / y[0] - std::pow(w, 2.0 - p) / (p * y[1]);
    };
    auto inverted = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(options.tol * length,
                                                                               options.tol);
    State y{r, x[1]};
    double sigma = std::log(x[0]);
    const double sigma_end = std::log(options.end_fraction * center);
    double ds = -options.max_log_step;
    std::array<double, 3> last{r, x[0], x[1]};
    while (sigma > sigma_end) {
        double h = std::max(ds, sigma_end - sigma);
        h = std::max(h, -options.max_log_step);
        if (inverted.try_step(inward, y, sigma, h) != odeint::success) {
            ds = h;
            if (-ds < 1e-14) throw ToleranceError("shoot_from_center: step underflow near the boundary");
            continue;
        }
        ds = h;
        if (!(y[1] < 0.0) || !std::isfinite(y[0])) {
            throw NoCrossingError("shoot_from_center: slope lost its sign near the boundary");
        }
        last = {y[0], std::exp(sigma), y[1]};
        // Near the boundary r stops moving in floating point; keep distinct nodes only.
        if (y[0] > out.r.back() + 1e-12 * length) {
            out.r.push_back(y[0]);
            out.w.push_back(std::exp(sigma));
            out.wp.push_back(y[1]);
        }
    }

    out.R = last[0] + last[1] / std::abs(last[2]);
    if (out.R <= out.r.back() + 1e-12 * length) {
        out.r.pop_back();
        out.w.pop_back();
        out.wp.pop_back();
    }
    out.r.push_back(out.R);
    out.w.push_back(0.0);
    out.wp.push_back(out.wp.back());
    return out;
}

SteadyProfile scale_profile(const SteadyProfile& unit, double R) {
    if (!(R > 0.0)) throw DomainError("scale_profile: target radius must be positive");
    const double lambda = R / unit.R;
    const double amp = std::pow(lambda, 2.0 / unit.p);
    SteadyProfile out = unit;
    out.R = R;
    out.center_value = unit.center_value * amp;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.r[i] = unit.r[i] * lambda;
        out.w[i] = unit.w[i] * amp;
    }
    for (double& d : out.wp) d *= amp / lambda;
    out.r.back() = R;
    return out;
}

SteadyProfile shoot_unit_profile(double p, int n, double tol) {
    SteadyOptions options;
    options.tol = tol;
    return scale_profile(shoot_from_center(p, n, 1.0, options), 1.0);
}

SteadyProfile reshoot_radius(double p, int n, double R, const SteadyOptions& options) {
    check_params(p, n);
    if (!(R > 0.0)) throw DomainError("reshoot_radius: radius must be positive");
    auto crossing = [&](double b) { return shoot_from_center(p, n, b, options).R; };

    double lo = 1.0;
    double hi = 1.0;
    double r_lo = crossing(lo);
    double r_hi = r_lo;
    while (r_lo > R) {
        hi = lo;
        r_hi = r_lo;
        lo *= 0.25;
        r_lo = crossing(lo);
    }
    while (r_hi < R) {
        lo = hi;
        r_lo = r_hi;
        hi *= 4.0;
        r_hi = crossing(hi);
    }
    if (r_lo == R) return shoot_from_center(p, n, lo, options);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (crossing(mid) < R) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return shoot_from_center(p, n, std::sqrt(lo * hi), options);
}

double verify_scaling_law(double p, int n, std::span<const double> radii, double tol) {
    if (radii.empty()) throw DomainError("verify_scaling_law: radius list is empty");
    SteadyOptions options;
    options.tol = tol;
    const SteadyProfile unit = shoot_unit_profile(p, n, tol);
    double worst = 0.0;
    for (double R : radii) {
        const SteadyProfile direct = reshoot_radius(p, n, R, options);
        const SteadyProfile scaled = scale_profile(unit, R);
        const MonotoneCubic interp = scaled.interpolant();
        double dev = 0.0;
        for (std::size_t i = 0; i < direct.size(); ++i) {
            dev = std::max(dev, std::abs(direct.w[i] - interp(direct.r[i])));
        }
        worst = std::max(worst, dev / scaled.center_value);
    }
    return worst;
}

double steady_residual(const SteadyProfile& profile, double floor_fraction) {
    if (profile.wp.size() != profile.size()) throw DomainError("steady_residual: profile carries no derivatives");
    const double p = profile.p;
    const double dim = profile.n;
    auto g = [&](std::size_t i) {
        return std::pow(profile.r[i], dim - 1.0) * std::pow(profile.w[i], 1.0 - p);
    };
    auto dg = [&](std::size_t i) {
        const double r = profile.r[i];
        const double lead = dim > 1.0 ? (dim - 1.0) * std::pow(r, dim - 2.0) * std::pow(profile.w[i], 1.0 - p) : 0.0;
        return lead + (1.0 - p) * std::pow(r, dim - 1.0) * std::pow(profile.w[i], -p) * profile.wp[i];
    };
    const double w_floor = floor_fraction * profile.center_value;
    double integral = 0.0;
    double max_res = 0.0;
    double max_flux = 0.0;
    for (std::size_t i = 1; i < profile.size() && profile.w[i] >= w_floor; ++i) {
        const double h = profile.r[i] - profile.r[i - 1];
        // Trapezoid with endpoint derivative correction: fourth order.
        integral += 0.5 * h * (g(i - 1) + g(i)) + h * h / 12.0 * (dg(i - 1) - dg(i));
        const double flux = std::pow(profile.r[i], dim - 1.0) * profile.wp[i];
        max_res = std::max(max_res, std::abs(flux + integral / p));
        max_flux = std::max(max_flux, std::abs(flux));
    }
    return max_flux > 0.0 ? max_res / max_flux : 0.0;
}

double steady_closed_form_p1(int n, double R, double r) {
    return (R * R - r * r) / (2.0 * n);
}

}  // namespace sfd
