#pragma once

#include <span>
#include <vector>

#include "sfd/interpolation.hpp"
#include "sfd/regression.hpp"

namespace sfd {

/// Parameters of the self-similar profile equation
///
///     f^p (f'' + (n-1)/xi f') + beta xi f' + alpha f = 0,   f(0) = A, f'(0) = 0.
///
/// `n` is the spatial dimension. In self-similar mode beta = (1 - p alpha)/2, which
/// turns t^{-alpha} f(t^{-beta}|x|) into a solution of u_t = u^p Laplace(u).
struct ProfileParams {
    double p = 2.0;
    double alpha = 0.25;
    double beta = 0.25;
    double A = 1.0;
    int n = 1;

    /// beta = (1 - p alpha)/2; throws DomainError unless 0 < alpha < 1/p.
    static ProfileParams self_similar(double p, double alpha, double A, int n);

    /// Throws DomainError when p < 1, A <= 0, alpha <= 0, beta <= 0 or n < 1.
    void validate() const;

    [[nodiscard]] bool is_self_similar(double tol = 1e-14) const;

    /// alpha / beta, the algebraic decay exponent of the profile tail.
    [[nodiscard]] double tail_exponent() const { return alpha / beta; }

    /// Natural length scale A^{p/2} / sqrt(alpha) of the profile near its center.
    [[nodiscard]] double core_length() const;
};

/// Sampled profile. `xi` starts at 0 and is strictly increasing.
struct Profile {
    ProfileParams params;
    std::vector<double> xi;
    std::vector<double> f;
    std::vector<double> fp;

    [[nodiscard]] double xi_max() const { return xi.empty() ? 0.0 : xi.back(); }
    [[nodiscard]] std::size_t size() const { return xi.size(); }
    [[nodiscard]] MonotoneCubic interpolant() const { return MonotoneCubic(xi, f, fp); }
};

struct TaylorStart {
    double f;
    double fp;
};

/// Two-term regular series at the singular point xi = 0:
/// f = A + c xi^2, f' = 2 c xi with c = -alpha A^{1-p} / (2n).
TaylorStart taylor_start(const ProfileParams& params, double xi0);

/// Largest admissible series offset for the given parameters.
double default_taylor_offset(const ProfileParams& params);

struct ProfileOptions {
    double xi_max = 50.0;
    double tol = 1e-10;
    /// Output node spacing: h = spacing * max(core_length, xi).
    double spacing = 2.5e-4;
    /// Positivity guard; falling below it raises SingularityError.
    double f_floor = 1e-300;
};

/// Integrates the profile equation from the series start to `xi_max`.
///
/// Internally the equation is written for y = ln f and z = xi f'/f against
/// s = ln xi. In these variables the solution is smooth on the whole half line,
/// while the tail is stiff (relaxation rate xi^2 / f^p), so an L-stable
/// Rosenbrock pair with analytic Jacobian is used. Node values are hit exactly.
Profile integrate_profile(const ProfileParams& params, const ProfileOptions& options);
Profile integrate_profile(const ProfileParams& params, double xi_max, double tol);

/// Checks the integral identity satisfied by every profile when p > 1:
///
///     xi^{n-1} f' + k (n + (p-1) alpha/beta) g(xi) - k xi^n f^{1-p} = 0,
///     k = beta/(p-1),  g(xi) = int_0^xi s^{n-1} f^{1-p} ds,
///
/// with g by cumulative trapezoid quadrature. Returns max |residual| divided by
/// the largest magnitude of any of the three terms.
double check_integral_identity(const Profile& profile);

/// Same identity with g from Richardson-extrapolated trapezoid sums on every
/// other node; used to show that the plain residual is quadrature error.
double check_integral_identity_richardson(const Profile& profile);

struct Window {
    double lo;
    double hi;
};

/// Least-squares slope of ln f against ln xi over a window spanning at least two decades.
LinearFit fit_tail_exponent(const Profile& profile, Window window);

struct TailBound {
    double lower_const;
    double upper_const;
    double exponent;
    Window window;
};

/// min and max of f(xi) (1 + xi)^{alpha/beta} over the grid nodes inside `window`.
TailBound certify_tail_bounds(const Profile& profile, Window window);

/// t^{-alpha} f(t^{-beta} |x|) with alpha, beta taken from `params`.
double eval_self_similar(const ProfileParams& params, const Profile& profile, double x, double t);

/// Same, reusing a prebuilt interpolant of `profile`.
double eval_self_similar(const ProfileParams& params, const MonotoneCubic& f, double x, double t);

struct SamplePoint {
    double x;
    double t;
};

/// Max over samples of |u_t - u^p Laplace(u)| normalized by max |u_t|, where
/// u = eval_self_similar and derivatives are fourth-order central differences.
double self_similar_residual(const ProfileParams& params, const Profile& profile,
                             std::span<const SamplePoint> samples, double interp_tol = 1e-12);

/// Exact profile rescaling f_A(xi) = A f_1(xi A^{-p/2}) applied to an existing profile.
Profile rescale_center_value(const Profile& profile, double A);

}  // namespace sfd
