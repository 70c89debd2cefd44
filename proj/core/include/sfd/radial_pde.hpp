#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sfd/interpolation.hpp"
#include "sfd/profile_ode.hpp"
#include "sfd/steady_state.hpp"

namespace sfd {

/// Radial initial data u0(r).
struct InitialDatum {
    enum class Kind { algebraic, gaussian, table };

    Kind kind = Kind::algebraic;
    double gamma = 2.0;      ///< algebraic: C0 (1+r)^{-gamma}
    double C0 = 1.0;
    double sigma = 1.0;      ///< gaussian: amplitude exp(-r^2 / (2 sigma^2))
    double amplitude = 1.0;
    MonotoneCubic table;     ///< table: interpolated values, clamped beyond the last node
    std::string label;

    static InitialDatum algebraic(double gamma, double C0 = 1.0);
    static InitialDatum gaussian(double sigma, double amplitude = 1.0);
    static InitialDatum from_table(std::vector<double> r, std::vector<double> u, std::string label = "table");
    /// The slice r -> t^{-alpha} f(t^{-beta} r) of a self-similar solution.
    static InitialDatum self_similar_slice(const Profile& profile, double t);

    [[nodiscard]] double operator()(double r) const;
    [[nodiscard]] std::string description() const;
};

/// Nodes 0 = r_0 < ... < r_{N-1} = R. Spacings grow geometrically towards R with
/// h_last / h_first = stretch (stretch = 1 is uniform). Throws DomainError for N < 16.
std::vector<double> build_grid(double R, std::size_t N, double stretch = 1.0);

struct RadialField {
    double p = 2.0;
    int n = 1;
    double R = 1.0;
    double eps = 0.0;
    std::vector<double> r;
    std::vector<double> u;
    double t = 0.0;

    /// Samples u0 (1 - (r/R)^taper) + eps on `grid`, with u = eps at r = R.
    /// taper <= 0 keeps u0 unchanged in the interior.
    static RadialField initial(const InitialDatum& u0, double p, int n, std::vector<double> grid, double eps,
                               double t0 = 0.0, double taper = 8.0);

    [[nodiscard]] std::size_t size() const { return r.size(); }
};

struct NewtonSettings {
    double tol = 1e-12;   ///< residual bound relative to max(u)
    int max_iter = 40;
    int max_halvings = 30;
};

/// One backward Euler step of u_t = u^p Laplace(u) with a conservative second-order
/// radial stencil, symmetric closure at r = 0 and u(R) = eps. Damped Newton on the
/// tridiagonal linearization; throws NewtonDivergence when it stalls.
RadialField step_implicit(const RadialField& field, double dt, const NewtonSettings& newton = {});

/// (|S| int u^q r^{n-1} dr)^{1/q} by trapezoid, |S| = n pi^{n/2} / Gamma(n/2+1).
double lq_norm(const RadialField& field, double q);
double linf_norm(const RadialField& field);
/// min of u over nodes with r <= radius.
double min_inner(const RadialField& field, double radius);

struct EvolveConfig {
    double p = 2.0;
    int n = 1;
    double R = 100.0;
    double eps = 1e-4;
    double t_start = 0.0;
    double t_end = 10.0;
    std::size_t nodes = 2001;
    double stretch = 1.0;
    double taper = 8.0;
    /// dt = clamp(dt_rel t, dt_min_sched, dt_max), then cut to land on sample times.
    /// The schedule depends on t only, so runs with equal settings take identical steps.
    double dt_rel = 1e-3;
    double dt_min_sched = 1e-4;
    double dt_max = std::numeric_limits<double>::infinity();
    double dt_floor = 1e-14;
    int samples_per_decade = 20;
    double sample_from = 1e-2;   ///< first geometric sample time (t_start is always sampled)
    double inner_radius = 1.0;
    std::vector<double> norm_qs{1.0, 2.0};
    bool keep_snapshots = true;
    NewtonSettings newton;
};

struct NormSample {
    double t = 0.0;
    double linf = 0.0;
    std::vector<std::pair<double, double>> lq;  ///< (q, norm)
    double min_inner = 0.0;
};

struct Snapshot {
    RadialField field;
    std::vector<double> dudt;  ///< (u - u_prev)/dt of the last step; empty for the first snapshot
    double dt = 0.0;
};

struct EvolutionRun {
    EvolveConfig config;
    std::string datum;
    std::vector<Snapshot> snapshots;
    std::vector<NormSample> norms;
    std::size_t steps = 0;
    std::size_t rejected = 0;
};

/// Sample times: t_start, every 10^{k/samples_per_decade} in (max(t_start, sample_from), t_end), and t_end.
std::vector<double> sample_times(const EvolveConfig& config);

EvolutionRun evolve(const InitialDatum& u0, const EvolveConfig& config);
/// Same, starting from an explicit field (its t overrides config.t_start).
EvolutionRun evolve(const RadialField& start, const EvolveConfig& config, std::string datum = "field");

/// min over interior nodes of dudt/u_mid + 1/(p t_mid) for a snapshot produced by evolve.
/// Nonnegative when the discrete rate respects the semi-convexity bound.
double semi_convexity_margin(const Snapshot& snapshot);

struct RescaledSlice {
    double t = 0.0;
    double tau = 0.0;
    std::vector<double> r;
    std::vector<double> v;
};

struct RescaledSample {
    double t = 0.0;
    double tau = 0.0;
    double linf = 0.0;
    std::vector<std::pair<double, double>> lq;
    double min_inner = 0.0;
};

/// v = (t+1)^{1/p} u against tau = ln(t+1).
struct RescaledRun {
    std::string transform = "v=(t+1)^(1/p)*u, tau=ln(t+1)";
    double p = 2.0;
    std::vector<RescaledSlice> slices;
    std::vector<RescaledSample> norms;
};

RescaledRun rescale_to_v(const EvolutionRun& run);

/// y(tau) w_R(x), a subsolution of the rescaled equation below C0 (1+|x|)^{-gamma}.
struct SeparatedSubsolution {
    double p = 2.0;
    int n = 1;
    double gamma = 2.0;
    double C0 = 1.0;
    double tau0 = 1.0;
    double R = 1.0;      ///< e^{tau0/(p gamma + 2)}
    double c1 = 0.0;     ///< sup of the unit-ball steady profile
    double delta = 0.0;  ///< C0 / (2^gamma c1) R^{-gamma-2/p}
    SteadyProfile w_R;
    MonotoneCubic w;     ///< interpolant of w_R

    [[nodiscard]] double y(double tau) const;
    /// y(tau) w_R(r), zero outside the ball.
    [[nodiscard]] double operator()(double r, double tau) const;
};

SeparatedSubsolution separated_subsolution(double p, int n, double gamma, double C0, double tau0);
/// Reuses an already computed unit-ball profile.
SeparatedSubsolution separated_subsolution(const SteadyProfile& unit, double gamma, double C0, double tau0);

/// (t+1)^{-alpha} f_A((t+1)^{-beta} r) with alpha = gamma/(p gamma + 2), a supersolution
/// above C1 (1+r)^{-gamma} at t = 0.
struct SelfSimilarSupersolution {
    ProfileParams params;
    Profile profile;      ///< f_A on [0, xi_max]
    TailBound tail;       ///< bounds of f_A (1+xi)^gamma on the grid
    MonotoneCubic f;

    /// Beyond xi_max the tail continues as f(xi_max) ((1+xi_max)/(1+xi))^gamma.
    [[nodiscard]] double operator()(double r, double t) const;
};

/// Picks the center value A so that min f_A(xi) (1+xi)^gamma >= margin * C1 on [0, xi_max].
SelfSimilarSupersolution self_similar_supersolution(double p, int n, double gamma, double C1,
                                                    double margin = 1.1, double xi_max = 1e4);

}  // namespace sfd
