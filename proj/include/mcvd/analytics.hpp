#pragma once

#include "mcvd/channel.hpp"

/// Closed-form channel quantities for a point transmitter and a Poisson
/// field of fully-absorbing spherical receivers, plus the quadrature
/// counterparts used as independent numerical oracles.
///
/// All probabilities returned lie in [0, 1].  Functions taking a time t
/// throw std::invalid_argument for t outside their documented domain.

namespace mcvd::analytics {

/// Mean swept volume of the a-dilated Brownian path up to time t (no
/// degradation): 4*pi*D*a*t + 8*a^2*sqrt(pi*D*t)  [um^3].
double mean_sausage_volume(const ChannelParams& p, double t);

/// Mean swept volume when the molecule degrades at rate mu:
/// 4*pi*a*(D/mu)*(1-e^{-mu t}) + 4*pi*a^2*sqrt(D/mu)*erf(sqrt(mu t)).
/// Delegates to mean_sausage_volume for mu == 0.  Bounded above by the
/// non-degradable volume and saturates as t -> infinity.
double mean_sausage_volume_degradable(const ChannelParams& p, double t);

/// Probability that a non-degradable molecule hits any receiver by time t:
/// 1 - exp(-4*pi*lambda*D*a*t - 8*a^2*lambda*sqrt(pi*D*t)).
double hitting_prob(const ChannelParams& p, double t);

/// Density of the hitting time (derivative of hitting_prob), t > 0 only;
/// the t^{-1/2} singularity at the origin is integrable.
double hitting_rate(const ChannelParams& p, double t);

/// alpha = 4*a*pi*lambda*D + mu, beta = 4*a^2*lambda*sqrt(pi*D/alpha).
/// Branches explicitly on lambda == 0 (beta = 0) so no 0/0 arises.
AlphaBeta alpha_beta(const ChannelParams& p);

/// Hitting probability for a degradable molecule (hit before degrading,
/// both by time t).  Equals hitting_prob when mu == 0.  Internally uses
/// the overflow-safe erfcx form
///   e^{b^2}(erf(b+u) - erf(b)) = erfcx(b) - erfcx(b+u)*e^{-2bu-u^2},
/// which stays finite for arbitrarily large beta.
double hitting_prob_degradable(const ChannelParams& p, double t);

/// Numerical realization of the same probability as the time integral of
/// hitting_rate(s)*exp(-mu*s) over (0, t].  The substitution s = u^2
/// removes the endpoint singularity.  Used as the independent oracle for
/// hitting_prob_degradable; throws std::runtime_error if the adaptive
/// quadrature fails to converge to abs_tol.
double hitting_prob_quadrature(const ChannelParams& p, double t, double abs_tol = 1e-10);

/// t -> infinity limit of hitting_prob_degradable: probability that the
/// molecule is ever absorbed before degrading.  For mu == 0 this is 1
/// when lambda > 0 and 0 otherwise.
double hitting_prob_limit(const ChannelParams& p);

/// Time for the non-degradable hitting process to reach 1 - 1/e:
/// t_c = a^2/(pi*D) * (1 - sqrt(1 + 1/(4*a^3*lambda)))^2.
/// Satisfies hitting_prob(p, t_c) == 1 - 1/e exactly.  Requires lambda > 0.
double time_constant(const ChannelParams& p);

/// Approximate time constant of the degradable hitting process:
/// t_c ~= beta^2/alpha * (1 - sqrt(1 + 1/beta^2))^2.  Reduces to
/// time_constant as mu -> 0.  Requires lambda > 0.
double time_constant_degradable(const ChannelParams& p);

/// Order-of-magnitude envelopes for the two time constants.
struct OrderBounds {
    double nodeg = 0.0;  ///< (1/(4 pi lambda D a)) * min(1, 1/(16 a^3 lambda))
    double deg = 0.0;    ///< same prefactor, min(A/(A+mu), 1/(16 a^3 lambda)) with A = 4 pi lambda D a
};
OrderBounds time_constant_order_bounds(const ChannelParams& p);

/// Probability that at least one of spec.n_molecules independent molecules
/// is absorbed by time spec.t:  1 - (1 - p_H)^N, evaluated in log space.
double event_detection_prob(const ChannelParams& p, const DetectionSpec& spec);

/// Same closed form with a real-valued molecule count; supports sweeps
/// holding N*lambda fixed where N is not an integer.
double event_detection_prob_real(const ChannelParams& p, double n_molecules, double t);

/// Probability that at least spec.threshold of spec.n_molecules molecules
/// are absorbed by spec.t (binomial tail, log-gamma stabilized).
double threshold_prob(const ChannelParams& p, const DetectionSpec& spec);

/// Smallest integer N whose event detection probability reaches target_p
/// at horizon t.  Throws std::runtime_error when the single-molecule
/// hitting probability is zero (lambda == 0).
long long required_molecules(const ChannelParams& p, double target_p, double t);

/// Small-density expansion of the event detection probability,
/// N*lambda*mean_sausage_volume_degradable(p, t); accurate as lambda -> 0.
/// Requires mu > 0 (the mu == 0 case already has an exact closed form).
double edp_small_lambda_asymptote(const ChannelParams& p, const DetectionSpec& spec);

/// Large-density expansion 1 - (0.0095*mu/(a*D))^N * lambda^{-N}.
/// Documented-accuracy helper: the 0.0095 constant is adopted verbatim
/// and is only meaningful for large lambda (roughly > 1e-2 per um^3 at
/// the reference parameters a=5, D=100, mu=1).
double edp_large_lambda_asymptote(const ChannelParams& p, const DetectionSpec& spec);

/// Radial-quadrature evaluation of the mean sausage volume,
///   integral over r in (a, inf) of 4*pi*r*a*erfc((r-a)/sqrt(4 D t)) dr,
/// truncated where the erfc tail is negligible (trunc_mult standard
/// deviations past the surface).  Independent check of
/// mean_sausage_volume; throws std::runtime_error on convergence failure.
double sausage_volume_quadrature(const ChannelParams& p, double t, double trunc_mult = 12.0);

}  // namespace mcvd::analytics
