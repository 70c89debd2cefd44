#include "sfd/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "sfd/errors.hpp"

namespace sfd {

namespace {

void check_nodes(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || x.size() != y.size()) {
        throw DomainError("MonotoneCubic: need at least two nodes with matching values");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw DomainError("MonotoneCubic: abscissae must be strictly increasing");
        }
    }
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
    check_nodes(x, y);
    const std::size_t n = x_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    m_[0] = delta[0];
    m_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            m_[i] = 0.0;
            continue;
        }
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        const double w0 = 2.0 * h1 + h0;
        const double w1 = h1 + 2.0 * h0;
        m_[i] = (w0 + w1) / (w0 / delta[i - 1] + w1 / delta[i]);
    }
    limit_slopes();
}

MonotoneCubic::MonotoneCubic(std::span<const double> x, std::span<const double> y,
                             std::span<const double> dydx)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(dydx.begin(), dydx.end()) {
    check_nodes(x, y);
    if (dydx.size() != x.size()) {
        throw DomainError("MonotoneCubic: slope count does not match node count");
    }
    limit_slopes();
}

// Fritsch-Carlson: zero slopes that disagree in sign with the secant and shrink
// slope pairs lying outside the circle of radius 3.
void MonotoneCubic::limit_slopes() {
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
        const double d = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        if (d == 0.0) {
            m_[i] = 0.0;
            m_[i + 1] = 0.0;
            continue;
        }
        if (m_[i] * d < 0.0) m_[i] = 0.0;
        if (m_[i + 1] * d < 0.0) m_[i + 1] = 0.0;
        const double a = m_[i] / d;
        const double b = m_[i + 1] / d;
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m_[i] = tau * a * d;
            m_[i + 1] = tau * b * d;
        }
    }
}

std::size_t MonotoneCubic::cell(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    if (x_.empty()) throw DomainError("MonotoneCubic: empty interpolant");
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = cell(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
    if (x_.empty()) throw DomainError("MonotoneCubic: empty interpolant");
    if (x <= x_.front()) return m_.front();
    if (x >= x_.back()) return m_.back();
    const std::size_t i = cell(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s;
    const double d00 = (6.0 * s2 - 6.0 * s) / h;
    const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
    const double d01 = (-6.0 * s2 + 6.0 * s) / h;
    const double d11 = 3.0 * s2 - 2.0 * s;
    return d00 * y_[i] + d10 * m_[i] + d01 * y_[i + 1] + d11 * m_[i + 1];
}

}  // namespace sfd
