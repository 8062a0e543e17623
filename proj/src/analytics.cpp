#include "mcvd/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mcvd/quadrature.hpp"
#include "mcvd/specfun.hpp"

namespace mcvd {

double ChannelParams::grain_fill_factor() const {
    return lambda * (4.0 / 3.0) * std::numbers::pi * a * a * a;
}

}  // namespace mcvd

namespace mcvd::analytics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.7724538509055160273;

// sqrt(1+x) - 1 without cancellation for small x.
inline double sqrt1p_minus_1(double x) {
    return x / (1.0 + std::sqrt(1.0 + x));
}

// Linear coefficient A = 4*pi*lambda*D*a of the swept-volume growth [1/s].
inline double rate_linear(const ChannelParams& p) {
    return 4.0 * kPi * p.lambda * p.D * p.a;
}

// Sqrt coefficient B = 4*a^2*lambda*sqrt(pi*D); exponent is A*t + 2*B*sqrt(t).
inline double rate_sqrt(const ChannelParams& p) {
    return 4.0 * p.a * p.a * p.lambda * std::sqrt(kPi * p.D);
}

inline void require_time(double t, const char* what) {
    if (!(t >= 0.0)) throw std::invalid_argument(std::string(what) + ": t must be >= 0");
}

}  // namespace

double mean_sausage_volume(const ChannelParams& p, double t) {
    p.validate();
    require_time(t, "mean_sausage_volume");
    return 4.0 * kPi * p.D * p.a * t + 8.0 * p.a * p.a * std::sqrt(kPi * p.D * t);
}

double mean_sausage_volume_degradable(const ChannelParams& p, double t) {
    p.validate();
    require_time(t, "mean_sausage_volume_degradable");
    if (p.mu == 0.0) return mean_sausage_volume(p, t);
    const double mut = p.mu * t;
    return 4.0 * kPi * p.a * (p.D / p.mu) * (-std::expm1(-mut)) +
           4.0 * kPi * p.a * p.a * std::sqrt(p.D / p.mu) * specfun::erf(std::sqrt(mut));
}

double hitting_prob(const ChannelParams& p, double t) {
    p.validate();
    require_time(t, "hitting_prob");
    return -std::expm1(-p.lambda * mean_sausage_volume(p, t));
}

double hitting_rate(const ChannelParams& p, double t) {
    p.validate();
    if (!(t > 0.0)) throw std::invalid_argument("hitting_rate: t must be > 0");
    const double A = rate_linear(p);
    const double B = rate_sqrt(p);
    const double st = std::sqrt(t);
    return (A + B / st) * std::exp(-A * t - 2.0 * B * st);
}

AlphaBeta alpha_beta(const ChannelParams& p) {
    p.validate();
    AlphaBeta ab;
    ab.alpha = rate_linear(p) + p.mu;
    // beta = 4 a^2 lambda sqrt(pi D / alpha); zero density short-circuits the
    // 0/0 that would otherwise appear when mu is also zero.
    ab.beta = (p.lambda == 0.0) ? 0.0
                                : 4.0 * p.a * p.a * p.lambda * std::sqrt(kPi * p.D / ab.alpha);
    return ab;
}

double hitting_prob_degradable(const ChannelParams& p, double t) {
    p.validate();
    require_time(t, "hitting_prob_degradable");
    if (p.mu == 0.0) return hitting_prob(p, t);
    if (p.lambda == 0.0 || t == 0.0) return 0.0;
    const auto [alpha, beta] = alpha_beta(p);
    const double u = std::sqrt(alpha * t);
    // Shared exponent of both terms; equals A*t + 2*B*sqrt(t) + mu*t.
    const double expo = 2.0 * beta * u + alpha * t;
    const double E = std::exp(-expo);
    const double hit_share = rate_linear(p) / alpha;  // 1 - mu/alpha
    const double term1 = -std::expm1(-expo) * hit_share;
    const double term2 = kSqrtPi * beta * (p.mu / alpha) *
                         (specfun::erfcx(beta) - specfun::erfcx(beta + u) * E);
    return std::clamp(term1 + term2, 0.0, 1.0);
}

double hitting_prob_quadrature(const ChannelParams& p, double t, double abs_tol) {
    p.validate();
    require_time(t, "hitting_prob_quadrature");
    if (t == 0.0 || p.lambda == 0.0) return 0.0;
    const double A = rate_linear(p);
    const double B = rate_sqrt(p);
    const double mu = p.mu;
    // s = u^2 turns the integrand f_H(s) e^{-mu s} into a bounded function:
    //   2*(A*u + B) * exp(-(A+mu)*u^2 - 2*B*u)
    auto integrand = [&](double u) {
        return 2.0 * (A * u + B) * std::exp(-(A + mu) * u * u - 2.0 * B * u);
    };
    const auto r = quad::integrate(integrand, 0.0, std::sqrt(t), abs_tol);
    if (!r.converged) {
        throw std::runtime_error("hitting_prob_quadrature: adaptive quadrature did not converge");
    }
    return std::clamp(r.value, 0.0, 1.0);
}

double hitting_prob_limit(const ChannelParams& p) {
    p.validate();
    if (p.mu == 0.0) return p.lambda > 0.0 ? 1.0 : 0.0;
    if (p.lambda == 0.0) return 0.0;
    const auto [alpha, beta] = alpha_beta(p);
    const double hit_share = rate_linear(p) / alpha;  // 1 - mu/alpha
    return std::clamp(hit_share + kSqrtPi * beta * (p.mu / alpha) * specfun::erfcx(beta), 0.0,
                      1.0);
}

double time_constant(const ChannelParams& p) {
    p.validate();
    if (p.lambda <= 0.0) {
        throw std::invalid_argument("time_constant: requires lambda > 0");
    }
    const double x = 1.0 / (4.0 * p.a * p.a * p.a * p.lambda);
    const double root = sqrt1p_minus_1(x);  // sqrt(1+x) - 1, stable for small x
    return p.a * p.a / (kPi * p.D) * root * root;
}

double time_constant_degradable(const ChannelParams& p) {
    p.validate();
    if (p.lambda <= 0.0) {
        throw std::invalid_argument("time_constant_degradable: requires lambda > 0");
    }
    const auto [alpha, beta] = alpha_beta(p);
    // beta^2/alpha * (1 - sqrt(1 + 1/beta^2))^2 = (sqrt(1+beta^2) - beta)^2 / alpha,
    // computed as 1/(sqrt(1+beta^2)+beta)^2 / alpha to stay stable for large beta.
    const double s = 1.0 / (std::hypot(1.0, beta) + beta);
    return s * s / alpha;
}

OrderBounds time_constant_order_bounds(const ChannelParams& p) {
    p.validate();
    if (p.lambda <= 0.0) {
        throw std::invalid_argument("time_constant_order_bounds: requires lambda > 0");
    }
    const double A = rate_linear(p);
    const double crowding = 1.0 / (16.0 * p.a * p.a * p.a * p.lambda);
    OrderBounds b;
    b.nodeg = std::min(1.0, crowding) / A;
    b.deg = std::min(A / (A + p.mu), crowding) / A;
    return b;
}

double event_detection_prob(const ChannelParams& p, const DetectionSpec& spec) {
    p.validate();
    spec.validate();
    return event_detection_prob_real(p, static_cast<double>(spec.n_molecules), spec.t);
}

double event_detection_prob_real(const ChannelParams& p, double n_molecules, double t) {
    p.validate();
    require_time(t, "event_detection_prob");
    if (!(n_molecules > 0.0)) {
        throw std::invalid_argument("event_detection_prob: molecule count must be > 0");
    }
    if (p.mu == 0.0) {
        // 1 - exp(-N*lambda*V(t)): the exponent is linear in N*lambda, so
        // scaling lambda or N by the same factor gives the same value.
        return -std::expm1(-(n_molecules * p.lambda) * mean_sausage_volume(p, t));
    }
    const double ph = hitting_prob_degradable(p, t);
    if (ph >= 1.0) return 1.0;
    return std::clamp(-std::expm1(n_molecules * std::log1p(-ph)), 0.0, 1.0);
}

double threshold_prob(const ChannelParams& p, const DetectionSpec& spec) {
    p.validate();
    spec.validate();
    const long long n = spec.n_molecules;
    const long long eta = spec.threshold;
    const double ph = hitting_prob_degradable(p, spec.t);
    if (ph <= 0.0) return 0.0;
    if (ph >= 1.0) return 1.0;
    const double log_p = std::log(ph);
    const double log_q = std::log1p(-ph);
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    double below = 0.0;
    for (long long k = 0; k < eta; ++k) {
        const double lg = lgn - std::lgamma(static_cast<double>(k) + 1.0) -
                          std::lgamma(static_cast<double>(n - k) + 1.0);
        below += std::exp(lg + static_cast<double>(k) * log_p +
                          static_cast<double>(n - k) * log_q);
    }
    return std::clamp(1.0 - below, 0.0, 1.0);
}

long long required_molecules(const ChannelParams& p, double target_p, double t) {
    p.validate();
    require_time(t, "required_molecules");
    if (!(target_p > 0.0 && target_p < 1.0)) {
        throw std::invalid_argument("required_molecules: target_p must be in (0, 1)");
    }
    const double ph = hitting_prob_degradable(p, t);
    if (ph <= 0.0) {
        throw std::runtime_error("required_molecules: infeasible, hitting probability is zero");
    }
    if (ph >= 1.0) return 1;
    const double ratio = std::log1p(-target_p) / std::log1p(-ph);
    long long n = static_cast<long long>(std::ceil(ratio));
    if (n < 1) n = 1;
    auto edp = [&](long long count) {
        return event_detection_prob_real(p, static_cast<double>(count), t);
    };
    // ceil() can land one off at representation boundaries; settle exactly.
    while (edp(n) < target_p) ++n;
    while (n > 1 && edp(n - 1) >= target_p) --n;
    return n;
}

double edp_small_lambda_asymptote(const ChannelParams& p, const DetectionSpec& spec) {
    p.validate();
    spec.validate();
    if (p.mu == 0.0) {
        throw std::invalid_argument(
            "edp_small_lambda_asymptote: requires mu > 0 (mu == 0 has an exact closed form)");
    }
    return static_cast<double>(spec.n_molecules) * p.lambda *
           mean_sausage_volume_degradable(p, spec.t);
}

double edp_large_lambda_asymptote(const ChannelParams& p, const DetectionSpec& spec) {
    p.validate();
    spec.validate();
    if (!(p.lambda > 0.0)) {
        throw std::invalid_argument("edp_large_lambda_asymptote: requires lambda > 0");
    }
    const double log_tail = static_cast<double>(spec.n_molecules) *
                            (std::log(0.0095 * p.mu / (p.a * p.D)) - std::log(p.lambda));
    return -std::expm1(log_tail);
}

double sausage_volume_quadrature(const ChannelParams& p, double t, double trunc_mult) {
    p.validate();
    if (!(t > 0.0)) throw std::invalid_argument("sausage_volume_quadrature: t must be > 0");
    if (!(trunc_mult > 0.0)) {
        throw std::invalid_argument("sausage_volume_quadrature: trunc_mult must be > 0");
    }
    const double h = std::sqrt(4.0 * p.D * t);
    // r = a + s*h maps the radial integral onto s in [0, trunc_mult] where the
    // erfc factor decays; beyond ~10 the remainder is below 1e-10 relative.
    auto integrand = [&](double s) {
        return 4.0 * kPi * p.a * (p.a + s * h) * specfun::erfc(s) * h;
    };
    // One coarse pass fixes the scale for the absolute tolerance.
    const auto coarse = quad::integrate(integrand, 0.0, trunc_mult, 1.0, 2);
    const double tol = std::max(1e-13 * std::fabs(coarse.value), 1e-300);
    const auto r = quad::integrate(integrand, 0.0, trunc_mult, tol);
    if (!r.converged) {
        throw std::runtime_error("sausage_volume_quadrature: adaptive quadrature did not converge");
    }
    return r.value;
}

}  // namespace mcvd::analytics
