#pragma once

#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "sfd/radial_pde.hpp"

namespace sfd {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Norm exponent q in (0, inf]. Infinity is a separate state, never a large number.
class NormIndex {
public:
    static NormIndex finite(double q);
    static NormIndex infinity() { return NormIndex(); }

    [[nodiscard]] bool is_infinite() const { return infinite_; }
    /// Throws DomainError for the infinite index.
    [[nodiscard]] double value() const;
    /// "inf" or the shortest round-trip decimal form ("1", "2.5").
    [[nodiscard]] std::string label() const;
    /// Inverse of label(); throws FormatError.
    static NormIndex parse(const std::string& text);

    bool operator==(const NormIndex&) const = default;

private:
    NormIndex() = default;
    bool infinite_ = true;
    double q_ = 0.0;
};

/// (1 - q0/q) / (p + 2 q0/n): the L^q decay rate from L^{q0} data. Throws DomainError unless q > q0 > 0.
double rate_lq(double p, int n, double q0, NormIndex q);
/// n / (n p + 2 q0)
double rate_nu(double p, int n, double q0);
/// 1/p
double rate_fast(double p);
/// (gamma - n/q) / (p gamma + 2), gamma/(p gamma + 2) for q = inf. Throws DomainError unless q > n/gamma.
double rate_gamma(double p, int n, double gamma, NormIndex q);
/// theta / ((1-m) theta + 2) for m < 0, theta > 0.
double vartheta(double theta, double m);
/// |  |m| vartheta(theta, m) - rate_gamma((m-1)/m, 1, -m theta, inf)  |
double exponent_roundtrip(double theta, double m);
/// The same identity in exact rational arithmetic; returns the (zero) difference.
Rational exponent_roundtrip_exact(const Rational& theta, const Rational& m);

struct ExponentTable {
    double p = 2.0;
    int n = 1;
    double q0 = 1.0;
    NormIndex q = NormIndex::infinity();
    double gamma = 0.0;  ///< 0 when no algebraic datum is attached
    double theta = 0.0;  ///< 0 when not applicable
    double m = 0.0;

    double lq_rate = 0.0;
    double nu = 0.0;
    double growth_rate = 0.0;  ///< 1/p, the rate of t^{1/p} growth lost for rapidly decaying data
    double gamma_rate = 0.0;
    double vartheta = 0.0;
};

ExponentTable exponent_table(double p, int n, double q0, NormIndex q, double gamma = 0.0);
/// Fills m = 1/(1-p), theta = gamma (p-1) and vartheta(theta, m); needs p > 1 and gamma > 0.
ExponentTable with_fast_diffusion(ExponentTable table);

nlohmann::json to_json(const ExponentTable& table);

/// H_k(x,t) = sum_{i=0}^{k/2} k!/(i!(k-2i)!) x^{k-2i} t^i with exact integer coefficients.
class HeatPolynomial {
public:
    /// Throws DomainError for odd or non-positive k.
    explicit HeatPolynomial(int k);

    [[nodiscard]] int degree() const { return k_; }
    /// Coefficient of x^{k-2i} t^i.
    [[nodiscard]] const std::vector<BigInt>& coefficients() const { return coeff_; }

    [[nodiscard]] Rational operator()(const Rational& x, const Rational& t) const;
    [[nodiscard]] double operator()(double x, double t) const;
    /// H_t - H_xx evaluated exactly.
    [[nodiscard]] Rational heat_residual(const Rational& x, const Rational& t) const;
    /// k!/(k/2)!, the coefficient of t^{k/2} and the minimum over x divided by t^{k/2}.
    [[nodiscard]] BigInt inf_coefficient() const;

private:
    int k_;
    std::vector<BigInt> coeff_;
};

double heat_polynomial(int k, double x, double t);
/// inf_x H_k(x,t) = k!/(k/2)! t^{k/2} for t > 0.
double heat_poly_inf(int k, double t);

struct DecayFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    Window window{0.0, 0.0};
    std::string norm_id;
    std::size_t count = 0;
    double residual_rms = 0.0;
};

/// OLS of ln(value) against ln(t) over samples with t in [window.lo, window.hi].
/// Throws WindowError when window.lo < 1, hi/lo < 100, or fewer than 10 samples fall inside.
DecayFit fit_decay(std::span<const double> t, std::span<const double> values, Window window,
                   std::string norm_id = "");

/// Fits the norm named by `q` (infinity means the sup norm) from a run's samples.
DecayFit fit_decay(const EvolutionRun& run, NormIndex q, Window window);

nlohmann::json to_json(const DecayFit& fit);

}  // namespace sfd
