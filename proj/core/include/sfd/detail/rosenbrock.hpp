#pragma once

// Embedded Rosenbrock 4(3) stepper for small dense systems.
//
// Coefficients are Shampine's L-stable set, as in odeint's rosenbrock4 except
// for the sign of d4 (odeint has +0.0362, which drops the method to first
// order on non-autonomous systems). The odeint class itself is not usable
// here: its ublas storage relies on std::allocator::construct, which C++20
// removed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace sfd::detail {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

/// In-place LU with partial pivoting for a small dense matrix.
template <std::size_t N>
class SmallLU {
public:
    explicit SmallLU(Mat<N> a) : a_(a) {
        for (std::size_t i = 0; i < N; ++i) perm_[i] = i;
        for (std::size_t k = 0; k < N; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < N; ++i) {
                if (std::abs(a_[i][k]) > std::abs(a_[piv][k])) piv = i;
            }
            std::swap(a_[k], a_[piv]);
            std::swap(perm_[k], perm_[piv]);
            for (std::size_t i = k + 1; i < N; ++i) {
                a_[i][k] /= a_[k][k];
                for (std::size_t j = k + 1; j < N; ++j) a_[i][j] -= a_[i][k] * a_[k][j];
            }
        }
    }

    [[nodiscard]] Vec<N> solve(const Vec<N>& b) const {
        Vec<N> x{};
        for (std::size_t i = 0; i < N; ++i) {
            double s = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j) s -= a_[i][j] * x[j];
            x[i] = s;
        }
        for (std::size_t i = N; i-- > 0;) {
            double s = x[i];
            for (std::size_t j = i + 1; j < N; ++j) s -= a_[i][j] * x[j];
            x[i] = s / a_[i][i];
        }
        return x;
    }

private:
    Mat<N> a_;
    std::array<std::size_t, N> perm_{};
};

/// System must provide
///   void rhs(const Vec<N>& x, double t, Vec<N>& dxdt) const;
///   void jacobian(const Vec<N>& x, double t, Mat<N>& J, Vec<N>& dfdt) const;
template <std::size_t N, class System>
class Rosenbrock43 {
public:
    Rosenbrock43(const System& system, double atol, double rtol)
        : sys_(system), atol_(atol), rtol_(rtol) {}

    /// Attempts one step of size `dt`. On success advances x and t and stores
    /// the suggested next step in dt; on failure leaves x, t untouched and
    /// shrinks dt. Returns true on success.
    bool try_step(Vec<N>& x, double& t, double& dt) {
        Vec<N> xout{};
        Vec<N> xerr{};
        step(x, t, dt, xout, xerr);
        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            if (!std::isfinite(xout[i]) || !std::isfinite(xerr[i])) finite = false;
            const double sc = atol_ + rtol_ * std::max(std::abs(x[i]), std::abs(xout[i]));
            err = std::max(err, std::abs(xerr[i]) / sc);
        }
        if (!finite) {
            dt *= 0.2;
            return false;
        }
        if (err > 1.0) {
            dt *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 3.0));
            return false;
        }
        x = xout;
        t += dt;
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.25) : 5.0;
        dt *= std::clamp(grow, 1.0, 5.0);
        return true;
    }

private:
    void step(const Vec<N>& x, double t, double dt, Vec<N>& xout, Vec<N>& xerr) const {
        constexpr double gamma = 0.25;
        constexpr double d1 = 0.25, d2 = -0.1043, d3 = 0.1035, d4 = -0.3620000000000023e-01;
        constexpr double c2 = 0.386, c3 = 0.21, c4 = 0.63;
        constexpr double c21 = -0.5668800000000000e+01;
        constexpr double a21 = 0.1544000000000000e+01;
        constexpr double c31 = -0.2430093356833875e+01, c32 = -0.2063599157091915e+00;
        constexpr double a31 = 0.9466785280815826e+00, a32 = 0.2557011698983284e+00;
        constexpr double c41 = -0.1073529058151375e+00, c42 = -0.9594562251023355e+01,
                         c43 = -0.2047028614809616e+02;
        constexpr double a41 = 0.3314825187068521e+01, a42 = 0.2896124015972201e+01,
                         a43 = 0.9986419139977817e+00;
        constexpr double c51 = 0.7496443313967647e+01, c52 = -0.1024680431464352e+02,
                         c53 = -0.3399990352819905e+02, c54 = 0.1170890893206160e+02;
        constexpr double a51 = 0.1221224509226641e+01, a52 = 0.6019134481288629e+01,
                         a53 = 0.1253708332932087e+02, a54 = -0.6878860361058950e+00;
        constexpr double c61 = 0.8083246795921522e+01, c62 = -0.7981132988064893e+01,
                         c63 = -0.3152159432874371e+02, c64 = 0.1631930543123136e+02,
                         c65 = -0.6058818238834054e+01;

        Vec<N> f{};
        Vec<N> dfdt{};
        Mat<N> J{};
        sys_.rhs(x, t, f);
        sys_.jacobian(x, t, J, dfdt);
        Mat<N> M{};
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) M[i][j] = -J[i][j];
            M[i][i] += 1.0 / (gamma * dt);
        }
        const SmallLU<N> lu(M);

        Vec<N> g1{}, g2{}, g3{}, g4{}, g5{}, xt{}, rhs{};
        for (std::size_t i = 0; i < N; ++i) rhs[i] = f[i] + dt * d1 * dfdt[i];
        g1 = lu.solve(rhs);

        for (std::size_t i = 0; i < N; ++i) xt[i] = x[i] + a21 * g1[i];
        sys_.rhs(xt, t + c2 * dt, f);
        for (std::size_t i = 0; i < N; ++i) rhs[i] = f[i] + dt * d2 * dfdt[i] + c21 * g1[i] / dt;
        g2 = lu.solve(rhs);

        for (std::size_t i = 0; i < N; ++i) xt[i] = x[i] + a31 * g1[i] + a32 * g2[i];
        sys_.rhs(xt, t + c3 * dt, f);
        for (std::size_t i = 0; i < N; ++i) {
            rhs[i] = f[i] + dt * d3 * dfdt[i] + (c31 * g1[i] + c32 * g2[i]) / dt;
        }
        g3 = lu.solve(rhs);

        for (std::size_t i = 0; i < N; ++i) xt[i] = x[i] + a41 * g1[i] + a42 * g2[i] + a43 * g3[i];
        sys_.rhs(xt, t + c4 * dt, f);
        for (std::size_t i = 0; i < N; ++i) {
            rhs[i] = f[i] + dt * d4 * dfdt[i] + (c41 * g1[i] + c42 * g2[i] + c43 * g3[i]) / dt;
        }
        g4 = lu.solve(rhs);

        for (std::size_t i = 0; i < N; ++i) {
            xt[i] = x[i] + a51 * g1[i] + a52 * g2[i] + a53 * g3[i] + a54 * g4[i];
        }
        sys_.rhs(xt, t + dt, f);
        for (std::size_t i = 0; i < N; ++i) {
            rhs[i] = f[i] + (c51 * g1[i] + c52 * g2[i] + c53 * g3[i] + c54 * g4[i]) / dt;
        }
        g5 = lu.solve(rhs);

        for (std::size_t i = 0; i < N; ++i) xt[i] += g5[i];
        sys_.rhs(xt, t + dt, f);
        for (std::size_t i = 0; i < N; ++i) {
            rhs[i] = f[i] + (c61 * g1[i] + c62 * g2[i] + c63 * g3[i] + c64 * g4[i] + c65 * g5[i]) / dt;
        }
        xerr = lu.solve(rhs);
        for (std::size_t i = 0; i < N; ++i) xout[i] = xt[i] + xerr[i];
    }

    System sys_;
    double atol_;
    double rtol_;
};

}  // namespace sfd::detail
