#pragma once

#include <span>
#include <vector>

namespace sfd {

/// Piecewise cubic Hermite interpolant that preserves monotonicity of the data.
///
/// Node slopes are either supplied (e.g. exact derivatives from an ODE solve) or
/// estimated with the Fritsch-Carlson harmonic-mean rule. In both cases slopes are
/// limited so that every cell stays monotone, which also keeps positive data positive.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    /// Slopes estimated from the data. Requires at least two strictly increasing abscissae.
    MonotoneCubic(std::span<const double> x, std::span<const double> y);

    /// Slopes taken from `dydx`, then limited cell by cell.
    MonotoneCubic(std::span<const double> x, std::span<const double> y, std::span<const double> dydx);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double derivative(double x) const;

    [[nodiscard]] double x_min() const { return x_.front(); }
    [[nodiscard]] double x_max() const { return x_.back(); }
    [[nodiscard]] bool empty() const { return x_.empty(); }

private:
    void limit_slopes();
    [[nodiscard]] std::size_t cell(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

}  // namespace sfd
