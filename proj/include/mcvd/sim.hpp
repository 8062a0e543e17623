#pragma once

#include <cstdint>
#include <vector>

#include "mcvd/channel.hpp"
#include "mcvd/geometry.hpp"

/// Particle-based Monte Carlo estimator for the hitting and detection
/// probabilities.  This is the ground-truth oracle the closed forms are
/// validated against: molecules start at the origin, take Gaussian steps of
/// per-axis standard deviation sqrt(2*D*dt), degrade at an exactly-sampled
/// exponential lifetime, and are absorbed on first receiver contact.
///
/// Determinism contract: particle i always consumes RNG stream
/// (seed, particle-stream(i)) and, under fresh fields, field stream
/// (seed, field-stream(i)); outcomes are stored by particle index and
/// reduced in index order, so results are bit-identical for any worker
/// count.

namespace mcvd::sim {

enum class AbsorptionMode {
    endpoint,  ///< test molecule position at each step end (reference methodology)
    segment    ///< test the continuous step segment for surface crossings
};

enum class Fate { absorbed, degraded, survived };

struct SimConfig {
    double dt = 1e-4;                ///< step size [s]
    double t_end = 1.0;              ///< simulation horizon [s]
    long long n_particles = 10000;   ///< particles (or replications for EDP runs)
    double domain_multiplier = 12.0; ///< truncation: R = a + multiplier*sqrt(2*D*t_end)
    std::uint64_t seed = 0;
    AbsorptionMode absorption_mode = AbsorptionMode::endpoint;
    bool fresh_field_per_particle = true;
    int n_workers = 0;  ///< 0 = hardware concurrency; never affects results

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
        if (!(t_end >= dt)) throw std::invalid_argument("SimConfig: t_end must be >= dt");
        if (n_particles < 1) throw std::invalid_argument("SimConfig: n_particles must be >= 1");
        if (!(domain_multiplier > 0.0)) {
            throw std::invalid_argument("SimConfig: domain_multiplier must be > 0");
        }
        if (n_workers < 0) throw std::invalid_argument("SimConfig: n_workers must be >= 0");
    }
};

struct ParticleOutcome {
    Fate fate = Fate::survived;
    double time = 0.0;     ///< absorption or degradation time, else t_end [s]
    bool escaped = false;  ///< left the truncation domain (bias sentinel)
};

/// Empirical hitting CDF on a time grid with the matching analytic curve.
struct HittingCurve {
    std::vector<double> time_grid;
    std::vector<double> estimate;      ///< empirical CDF of absorption times
    std::vector<double> ci_halfwidth;  ///< 95% half-width (Wilson at small counts)
    std::vector<double> analytic;      ///< closed-form probabilities
    long long n_particles = 0;
    double escape_rate = 0.0;
};

struct EstimateWithCi {
    double estimate = 0.0;
    double ci_halfwidth = 0.0;
    long long n = 0;
};

/// Comparison record for the density-truncation study of the closed form.
struct SausageComparison {
    double mc_estimate = 0.0;
    double ci_halfwidth = 0.0;
    double analytic = 0.0;
    double abs_error = 0.0;
    long long n = 0;
};

/// Default truncation radius a + domain_multiplier*sqrt(2*D*horizon); the
/// probability a particle ever reaches it within the horizon is negligible
/// at the default multiplier of 12.
double default_domain_radius(const ChannelParams& p, double horizon, double domain_multiplier);

/// 95% binomial half-width: 1.96*sqrt(p(1-p)/n), replaced by the Wilson
/// half-width when either success or failure count drops below 10.
double binomial_ci_halfwidth(double p_hat, long long n);

/// Walks one molecule through the given field.  The degradation time is
/// drawn once from Exp(mu) (exact under first-order decay, no per-step
/// Bernoulli bias); absorption and degradation are ordered by time within
/// the step.  Escaping the truncation domain ends the walk as survived
/// with the escape flag set.
ParticleOutcome simulate_particle(const ChannelParams& p, const geom::ReceiverField& field,
                                  const SimConfig& cfg, const geom::RngStream& rng);

/// Runs cfg.n_particles independent molecules and returns the empirical
/// hitting CDF on time_grid (strictly increasing, within (0, t_end]).
/// With cfg.fresh_field_per_particle each molecule sees its own Poisson
/// realization, matching the ensemble average the closed forms compute.
/// Throws std::runtime_error if the escape rate exceeds 1e-3.
HittingCurve estimate_hitting_curve(const ChannelParams& p, const SimConfig& cfg,
                                    const std::vector<double>& time_grid);

/// Event-detection estimate: cfg.n_particles replications, each drawing one
/// field shared by spec.n_molecules independent molecules (the physical
/// deployment); success when at least spec.threshold are absorbed by spec.t.
EstimateWithCi estimate_edp(const ChannelParams& p, const SimConfig& cfg,
                            const DetectionSpec& spec);

/// Fresh-field estimate of the exact hitting probability at cfg.t_end in
/// the sparse regime, reported against the closed form whose truncation
/// error it measures.  Requires lambda*(4/3)*pi*a^3 < 0.1.
SausageComparison estimate_sausage_hitprob_smalllambda(const ChannelParams& p,
                                                       const SimConfig& cfg);

}  // namespace mcvd::sim
