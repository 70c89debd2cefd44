#pragma once

#include <span>
#include <vector>

#include "sfd/interpolation.hpp"

namespace sfd {

/// Positive radial solution of  -Laplace(w) = (1/p) w^{1-p}  in the ball B_R with w = 0 on the boundary.
struct SteadyProfile {
    double p = 1.0;
    int n = 1;
    double R = 1.0;
    std::vector<double> r;   ///< ascending, r.front() == 0, r.back() == R
    std::vector<double> w;
    std::vector<double> wp;  ///< dw/dr, may be empty (e.g. read back from CSV); unbounded at R for p >= 2
    double center_value = 0.0;

    [[nodiscard]] MonotoneCubic interpolant() const {
        return wp.empty() ? MonotoneCubic(r, w) : MonotoneCubic(r, w, wp);
    }
    [[nodiscard]] std::size_t size() const { return r.size(); }
};

struct SteadyOptions {
    double tol = 1e-13;
    /// Switch to w as the independent variable once w drops below this fraction of w(0).
    double switch_fraction = 1e-4;
    /// The inverted integration stops at this fraction of w(0); the rest is a linear remainder.
    double end_fraction = 1e-15;
    /// Step cap in the outward phase, relative to the natural length w(0)^{p/2}.
    double max_step_fraction = 2e-3;
    /// Step cap in ln w during the inverted phase.
    double max_log_step = 0.05;
    /// Give up when r exceeds this multiple of the natural length.
    double r_guard = 1e3;
};

/// Shoots from w(0) = center, w'(0) = 0 to the first zero; the returned profile's R is the crossing radius.
SteadyProfile shoot_from_center(double p, int n, double center, const SteadyOptions& options = {});

/// Shoots from w(0) = 1 and rescales onto the unit ball.
SteadyProfile shoot_unit_profile(double p, int n, double tol = 1e-13);

/// r -> R^{2/p} w(r/R) applied to a profile on the unit ball. Pure arithmetic, no re-solve.
SteadyProfile scale_profile(const SteadyProfile& unit, double R);

/// Independent route to w_R: bisects on the center value until the shot crosses zero at R.
SteadyProfile reshoot_radius(double p, int n, double R, const SteadyOptions& options = {});

/// Max relative sup-norm deviation between reshoot_radius and scale_profile over `radii`.
double verify_scaling_law(double p, int n, std::span<const double> radii, double tol = 1e-13);

/// Residual of the divergence form r^{n-1} w' = -(1/p) int_0^r s^{n-1} w^{1-p} ds,
/// normalized by max |r^{n-1} w'|, over nodes with w >= floor_fraction * w(0).
double steady_residual(const SteadyProfile& profile, double floor_fraction = 1e-3);

/// Closed form (R^2 - r^2)/(2n) for p = 1.
double steady_closed_form_p1(int n, double R, double r);

}  // namespace sfd
