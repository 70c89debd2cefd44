#include "sfd/asymptotics.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "sfd/errors.hpp"
#include "sfd/regression.hpp"

namespace sfd {

NormIndex NormIndex::finite(double q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("NormIndex: q must be positive and finite");
    NormIndex idx;
    idx.infinite_ = false;
    idx.q_ = q;
    return idx;
}

double NormIndex::value() const {
    if (infinite_) throw DomainError("NormIndex: infinite index has no finite value");
    return q_;
}

std::string NormIndex::label() const {
    if (infinite_) return "inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, q_);
    return std::string(buf, res.ptr);
}

NormIndex NormIndex::parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
    double q = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), q);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !(q > 0.0) || !std::isfinite(q)) {
        throw FormatError("NormIndex: cannot parse '" + text + "'");
    }
    return finite(q);
}

namespace {

void check_p(double p) {
    if (!(p >= 1.0)) throw DomainError("exponent: p must be >= 1");
}

void check_n(int n) {
    if (n < 1) throw DomainError("exponent: n must be >= 1");
}

}  // namespace

double rate_nu(double p, int n, double q0) {
    check_p(p);
    check_n(n);
    if (!(q0 > 0.0)) throw DomainError("rate_nu: q0 must be positive");
    const double dim = n;
    return dim / (dim * p + 2.0 * q0);
}

double rate_lq(double p, int n, double q0, NormIndex q) {
    check_p(p);
    check_n(n);
    if (!(q0 > 0.0)) throw DomainError("rate_lq: q0 must be positive");
    if (q.is_infinite()) return rate_nu(p, n, q0);
    if (!(q.value() > q0)) throw DomainError("rate_lq: requires q > q0");
    const double dim = n;
    return (1.0 - q0 / q.value()) / (p + 2.0 * q0 / dim);
}

double rate_fast(double p) {
    check_p(p);
    return 1.0 / p;
}

double rate_gamma(double p, int n, double gamma, NormIndex q) {
    check_p(p);
    check_n(n);
    if (!(gamma > 0.0)) throw DomainError("rate_gamma: gamma must be positive");
    if (q.is_infinite()) return gamma / (p * gamma + 2.0);
    const double dim = n;
    if (!(q.value() > dim / gamma)) throw DomainError("rate_gamma: requires q > n/gamma");
    return (gamma - dim / q.value()) / (p * gamma + 2.0);
}

double vartheta(double theta, double m) {
    if (!(m < 0.0)) throw DomainError("vartheta: requires m < 0");
    if (!(theta > 0.0)) throw DomainError("vartheta: requires theta > 0");
    return theta / ((1.0 - m) * theta + 2.0);
}

double exponent_roundtrip(double theta, double m) {
    const double lhs = -m * vartheta(theta, m);
    const double p = (m - 1.0) / m;
    const double gamma = -m * theta;
    return std::abs(lhs - rate_gamma(p, 1, gamma, NormIndex::infinity()));
}

Rational exponent_roundtrip_exact(const Rational& theta, const Rational& m) {
    if (!(m < 0)) throw DomainError("exponent_roundtrip_exact: requires m < 0");
    if (!(theta > 0)) throw DomainError("exponent_roundtrip_exact: requires theta > 0");
    const Rational lhs = -m * theta / ((1 - m) * theta + 2);
    const Rational p = (m - 1) / m;
    const Rational gamma = -m * theta;
    return lhs - gamma / (p * gamma + 2);
}

ExponentTable exponent_table(double p, int n, double q0, NormIndex q, double gamma) {
    ExponentTable t;
    t.p = p;
    t.n = n;
    t.q0 = q0;
    t.q = q;
    t.gamma = gamma;
    t.lq_rate = rate_lq(p, n, q0, q);
    t.nu = rate_nu(p, n, q0);
    t.growth_rate = rate_fast(p);
    if (gamma > 0.0) t.gamma_rate = rate_gamma(p, n, gamma, q);
    return t;
}

ExponentTable with_fast_diffusion(ExponentTable table) {
    if (!(table.p > 1.0)) throw DomainError("with_fast_diffusion: requires p > 1");
    if (!(table.gamma > 0.0)) throw DomainError("with_fast_diffusion: requires gamma > 0");
    table.m = 1.0 / (1.0 - table.p);
    table.theta = table.gamma * (table.p - 1.0);
    table.vartheta = vartheta(table.theta, table.m);
    return table;
}

nlohmann::json to_json(const ExponentTable& t) {
    nlohmann::json j{{"p", t.p},         {"n", t.n},   {"q0", t.q0},
                     {"q", t.q.label()}, {"lq_rate", t.lq_rate}, {"nu", t.nu},
                     {"growth_rate", t.growth_rate}};
    if (t.gamma > 0.0) {
        j["gamma"] = t.gamma;
        j["gamma_rate"] = t.gamma_rate;
    }
    if (t.m < 0.0) {
        j["theta"] = t.theta;
        j["m"] = t.m;
        j["vartheta"] = t.vartheta;
    }
    return j;
}

namespace {

BigInt factorial(int k) {
    BigInt f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

Rational power(const Rational& x, int e) {
    Rational r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace

HeatPolynomial::HeatPolynomial(int k) : k_(k) {
    if (k < 2 || k % 2 != 0) throw DomainError("HeatPolynomial: k must be even and >= 2");
    const BigInt kf = factorial(k);
    for (int i = 0; i <= k / 2; ++i) coeff_.push_back(kf / (factorial(i) * factorial(k - 2 * i)));
}

Rational HeatPolynomial::operator()(const Rational& x, const Rational& t) const {
    Rational sum = 0;
    for (int i = 0; i <= k_ / 2; ++i) sum += Rational(coeff_[i]) * power(x, k_ - 2 * i) * power(t, i);
    return sum;
}

double HeatPolynomial::operator()(double x, double t) const {
    double sum = 0.0;
    for (int i = 0; i <= k_ / 2; ++i) {
        sum += coeff_[i].convert_to<double>() * std::pow(x, k_ - 2 * i) * std::pow(t, i);
    }
    return sum;
}

Rational HeatPolynomial::heat_residual(const Rational& x, const Rational& t) const {
    Rational ht = 0;
    Rational hxx = 0;
    for (int i = 0; i <= k_ / 2; ++i) {
        const Rational c(coeff_[i]);
        const int e = k_ - 2 * i;
        if (i > 0) ht += c * i * power(x, e) * power(t, i - 1);
        if (e >= 2) hxx += c * e * (e - 1) * power(x, e - 2) * power(t, i);
    }
    return ht - hxx;
}

BigInt HeatPolynomial::inf_coefficient() const { return factorial(k_) / factorial(k_ / 2); }

double heat_polynomial(int k, double x, double t) { return HeatPolynomial(k)(x, t); }

double heat_poly_inf(int k, double t) {
    if (!(t > 0.0)) throw DomainError("heat_poly_inf: requires t > 0");
    const HeatPolynomial h(k);
    return h.inf_coefficient().convert_to<double>() * std::pow(t, k / 2);
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> values, Window window, std::string norm_id) {
    if (t.size() != values.size()) throw WindowError("fit_decay: series length mismatch");
    if (!(window.lo >= 1.0)) throw WindowError("fit_decay: window must start at t >= 1");
    if (!(window.hi >= 100.0 * window.lo * (1.0 - 1e-12))) throw WindowError("fit_decay: window spans less than two decades");
    std::vector<double> x, y;
    const double lo = window.lo * (1.0 - 1e-12);
    const double hi = window.hi * (1.0 + 1e-12);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi) continue;
        if (!(values[i] > 0.0)) throw WindowError("fit_decay: nonpositive value inside the window");
        x.push_back(std::log(t[i]));
        y.push_back(std::log(values[i]));
    }
    if (x.size() < 10) throw WindowError("fit_decay: fewer than 10 samples inside the window");
    const LinearFit lf = least_squares(x, y);
    DecayFit fit;
    fit.slope = lf.slope;
    fit.slope_stderr = lf.slope_stderr;
    fit.window = window;
    fit.norm_id = std::move(norm_id);
    fit.count = lf.count;
    fit.residual_rms = lf.residual_rms;
    return fit;
}

DecayFit fit_decay(const EvolutionRun& run, NormIndex q, Window window) {
    std::vector<double> t, v;
    for (const NormSample& s : run.norms) {
        t.push_back(s.t);
        if (q.is_infinite()) {
            v.push_back(s.linf);
            continue;
        }
        bool found = false;
        for (const auto& [qq, val] : s.lq) {
            if (qq == q.value()) {
                v.push_back(val);
                found = true;
                break;
            }
        }
        if (!found) throw DomainError("fit_decay: run did not record the L^" + q.label() + " norm");
    }
    return fit_decay(t, v, window, q.is_infinite() ? "linf" : "l" + q.label());
}

nlohmann::json to_json(const DecayFit& fit) {
    return {{"norm", fit.norm_id},       {"slope", fit.slope},        {"stderr", fit.slope_stderr},
            {"t_lo", fit.window.lo},     {"t_hi", fit.window.hi},     {"count", fit.count},
            {"residual_rms", fit.residual_rms}};
}

}  // namespace sfd
