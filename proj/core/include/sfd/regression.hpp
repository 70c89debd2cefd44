#pragma once

#include <cstddef>
#include <span>

namespace sfd {

/// Ordinary least-squares line y = intercept + slope * x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;  ///< standard error of the slope; 0 for two points or an exact fit
    double residual_rms = 0.0;
    std::size_t count = 0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace sfd
