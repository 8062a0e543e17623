#include "mcvd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mcvd/analytics.hpp"

namespace mcvd::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Disjoint stream-id namespaces so field draws and particle walks never
// share a sequence.
constexpr std::uint64_t kFieldStreamBase = 1ULL << 62;

std::uint64_t field_stream(std::uint64_t index) { return kFieldStreamBase | index; }
std::uint64_t particle_stream(std::uint64_t index) { return index; }

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition; body(i) must only touch slot i of its outputs.
template <class Body>
void parallel_for(long long n, int workers, const Body& body) {
    workers = std::min<long long>(workers, n);
    if (workers <= 1) {
        for (long long i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        const long long lo = n * w / workers;
        const long long hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (long long i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double escape_rate_of(const std::vector<ParticleOutcome>& outcomes) {
    long long escaped = 0;
    for (const auto& o : outcomes) escaped += o.escaped ? 1 : 0;
    return outcomes.empty() ? 0.0 : static_cast<double>(escaped) / outcomes.size();
}

void check_escape_rate(double rate) {
    if (rate > 1e-3) {
        throw std::runtime_error(
            "monte carlo run unreliable: escape rate " + std::to_string(rate) +
            " exceeds 1e-3; increase domain_multiplier");
    }
}

}  // namespace

double default_domain_radius(const ChannelParams& p, double horizon, double domain_multiplier) {
    return p.a + domain_multiplier * std::sqrt(2.0 * p.D * horizon);
}

double binomial_ci_halfwidth(double p_hat, long long n) {
    constexpr double z = 1.96;
    const double k = p_hat * static_cast<double>(n);
    if (k >= 10.0 && static_cast<double>(n) - k >= 10.0) {
        return z * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
    }
    const double nn = static_cast<double>(n);
    return z * std::sqrt(p_hat * (1.0 - p_hat) / nn + z * z / (4.0 * nn * nn)) /
           (1.0 + z * z / nn);
}

ParticleOutcome simulate_particle(const ChannelParams& p, const geom::ReceiverField& field,
                                  const SimConfig& cfg, const geom::RngStream& rng) {
    p.validate();
    cfg.validate();
    if (field.radius != p.a) {
        throw std::invalid_argument("simulate_particle: field radius does not match params.a");
    }

    auto engine = rng.make_engine();
    std::normal_distribution<double> gauss;
    double degrade_at = kInf;
    if (p.mu > 0.0) {
        std::exponential_distribution<double> lifetime(p.mu);
        degrade_at = lifetime(engine);
    }

    const double escape2 = field.domain_radius * field.domain_radius;
    const bool segment_mode = cfg.absorption_mode == AbsorptionMode::segment;

    geom::Point3 pos{0.0, 0.0, 0.0};
    // Budget of guaranteed-collision-free travel; refreshed on every full
    // geometry check.  A step shorter than the budget cannot touch a sphere.
    double budget = field.local_clearance(pos);

    const long long full_steps = static_cast<long long>(std::floor(cfg.t_end / cfg.dt + 1e-9));
    const double remainder = cfg.t_end - static_cast<double>(full_steps) * cfg.dt;
    const bool has_partial = remainder > 1e-12 * cfg.t_end;
    const double sigma_full = std::sqrt(2.0 * p.D * cfg.dt);
    const double sigma_partial = has_partial ? std::sqrt(2.0 * p.D * remainder) : 0.0;
    const long long total_steps = full_steps + (has_partial ? 1 : 0);

    for (long long k = 0; k < total_steps; ++k) {
        const bool partial = k == full_steps;
        const double sigma = partial ? sigma_partial : sigma_full;
        const double step_dt = partial ? remainder : cfg.dt;
        const double t_prev = static_cast<double>(k) * cfg.dt;
        const double t_next = partial ? cfg.t_end : static_cast<double>(k + 1) * cfg.dt;

        const double dx = sigma * gauss(engine);
        const double dy = sigma * gauss(engine);
        const double dz = sigma * gauss(engine);
        const geom::Point3 next{pos.x + dx, pos.y + dy, pos.z + dz};
        const double step_len = std::sqrt(dx * dx + dy * dy + dz * dz);

        if (budget > step_len) {
            // No receiver reachable this step in either absorption mode.
            budget -= step_len;
            if (degrade_at <= t_next) return {Fate::degraded, degrade_at, false};
            pos = next;
            if (geom::norm2(pos) > escape2) return {Fate::survived, cfg.t_end, true};
            continue;
        }

        if (segment_mode) {
            if (const auto hit = geom::first_hit_on_segment(field, pos, next)) {
                const double t_hit = t_prev + hit->fraction * step_dt;
                if (degrade_at < t_hit) return {Fate::degraded, degrade_at, false};
                return {Fate::absorbed, t_hit, false};
            }
            budget = field.local_clearance(next);
        } else {
            const double clearance = field.local_clearance(next);
            if (clearance <= 0.0) {
                // Endpoint landed inside/on a receiver: absorbed at step end.
                if (degrade_at < t_next) return {Fate::degraded, degrade_at, false};
                return {Fate::absorbed, t_next, false};
            }
            budget = clearance;
        }

        if (degrade_at <= t_next) return {Fate::degraded, degrade_at, false};
        pos = next;
        if (geom::norm2(pos) > escape2) return {Fate::survived, cfg.t_end, true};
    }
    return {Fate::survived, cfg.t_end, false};
}

namespace {

// Shared driver: runs one particle per index, fresh or shared field.
std::vector<ParticleOutcome> run_particles(const ChannelParams& p, const SimConfig& cfg,
                                           double domain_radius) {
    std::vector<ParticleOutcome> outcomes(static_cast<std::size_t>(cfg.n_particles));
    const geom::ReceiverField shared =
        cfg.fresh_field_per_particle
            ? geom::ReceiverField{}
            : geom::sample_receiver_field(p, domain_radius, {cfg.seed, field_stream(0)});
    parallel_for(cfg.n_particles, resolve_workers(cfg.n_workers), [&](long long i) {
        const geom::RngStream walk{cfg.seed, particle_stream(static_cast<std::uint64_t>(i))};
        if (cfg.fresh_field_per_particle) {
            const auto field = geom::sample_receiver_field(
                p, domain_radius, {cfg.seed, field_stream(static_cast<std::uint64_t>(i))});
            outcomes[static_cast<std::size_t>(i)] = simulate_particle(p, field, cfg, walk);
        } else {
            outcomes[static_cast<std::size_t>(i)] = simulate_particle(p, shared, cfg, walk);
        }
    });
    return outcomes;
}

}  // namespace

HittingCurve estimate_hitting_curve(const ChannelParams& p, const SimConfig& cfg,
                                    const std::vector<double>& time_grid) {
    p.validate();
    cfg.validate();
    if (time_grid.empty()) {
        throw std::invalid_argument("estimate_hitting_curve: time grid must be nonempty");
    }
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        if (!(time_grid[i] > 0.0) || time_grid[i] > cfg.t_end * (1.0 + 1e-12)) {
            throw std::invalid_argument("estimate_hitting_curve: grid times must lie in (0, t_end]");
        }
        if (i > 0 && !(time_grid[i] > time_grid[i - 1])) {
            throw std::invalid_argument("estimate_hitting_curve: grid must be strictly increasing");
        }
    }

    const double R = default_domain_radius(p, cfg.t_end, cfg.domain_multiplier);
    const auto outcomes = run_particles(p, cfg, R);

    HittingCurve curve;
    curve.time_grid = time_grid;
    curve.n_particles = cfg.n_particles;
    curve.escape_rate = escape_rate_of(outcomes);

    std::vector<long long> counts(time_grid.size(), 0);
    for (const auto& o : outcomes) {
        if (o.fate != Fate::absorbed) continue;
        const auto it = std::lower_bound(time_grid.begin(), time_grid.end(), o.time);
        if (it != time_grid.end()) ++counts[static_cast<std::size_t>(it - time_grid.begin())];
    }
    long long cumulative = 0;
    const double n = static_cast<double>(cfg.n_particles);
    for (std::size_t j = 0; j < time_grid.size(); ++j) {
        cumulative += counts[j];
        const double p_hat = static_cast<double>(cumulative) / n;
        curve.estimate.push_back(p_hat);
        curve.ci_halfwidth.push_back(binomial_ci_halfwidth(p_hat, cfg.n_particles));
        curve.analytic.push_back(analytics::hitting_prob_degradable(p, time_grid[j]));
    }
    check_escape_rate(curve.escape_rate);
    return curve;
}

EstimateWithCi estimate_edp(const ChannelParams& p, const SimConfig& cfg,
                            const DetectionSpec& spec) {
    p.validate();
    cfg.validate();
    spec.validate();
    if (!(spec.t > 0.0)) throw std::invalid_argument("estimate_edp: spec.t must be > 0");

    // One replication = one shared receiver deployment seen by all N
    // molecules (physically mandated); cfg.n_particles counts replications.
    SimConfig run_cfg = cfg;
    run_cfg.t_end = spec.t;
    const double R = default_domain_radius(p, spec.t, cfg.domain_multiplier);
    const long long reps = cfg.n_particles;
    const long long n_mol = spec.n_molecules;

    std::vector<std::uint8_t> success(static_cast<std::size_t>(reps), 0);
    std::vector<std::uint8_t> escaped(static_cast<std::size_t>(reps), 0);
    parallel_for(reps, resolve_workers(cfg.n_workers), [&](long long r) {
        const auto field = geom::sample_receiver_field(
            p, R, {cfg.seed, field_stream(static_cast<std::uint64_t>(r))});
        long long absorbed = 0;
        bool any_escape = false;
        for (long long j = 0; j < n_mol; ++j) {
            const geom::RngStream walk{
                cfg.seed, particle_stream(static_cast<std::uint64_t>(r) *
                                              static_cast<std::uint64_t>(n_mol) +
                                          static_cast<std::uint64_t>(j))};
            const auto out = simulate_particle(p, field, run_cfg, walk);
            absorbed += (out.fate == Fate::absorbed && out.time <= spec.t) ? 1 : 0;
            any_escape |= out.escaped;
        }
        success[static_cast<std::size_t>(r)] = absorbed >= spec.threshold ? 1 : 0;
        escaped[static_cast<std::size_t>(r)] = any_escape ? 1 : 0;
    });

    long long hits = 0, any_escape = 0;
    for (long long r = 0; r < reps; ++r) {
        hits += success[static_cast<std::size_t>(r)];
        any_escape += escaped[static_cast<std::size_t>(r)];
    }
    check_escape_rate(static_cast<double>(any_escape) / static_cast<double>(reps));
    const double p_hat = static_cast<double>(hits) / static_cast<double>(reps);
    return {p_hat, binomial_ci_halfwidth(p_hat, reps), reps};
}

SausageComparison estimate_sausage_hitprob_smalllambda(const ChannelParams& p,
                                                       const SimConfig& cfg) {
    p.validate();
    cfg.validate();
    if (!p.sparse_regime()) {
        throw std::invalid_argument(
            "estimate_sausage_hitprob_smalllambda: requires the sparse regime "
            "lambda*(4/3)*pi*a^3 < 0.1");
    }
    SimConfig run_cfg = cfg;
    run_cfg.fresh_field_per_particle = true;  // ensemble average over deployments
    const double R = default_domain_radius(p, cfg.t_end, cfg.domain_multiplier);
    const auto outcomes = run_particles(p, run_cfg, R);
    check_escape_rate(escape_rate_of(outcomes));

    long long absorbed = 0;
    for (const auto& o : outcomes) absorbed += o.fate == Fate::absorbed ? 1 : 0;
    SausageComparison cmp;
    cmp.n = cfg.n_particles;
    cmp.mc_estimate = static_cast<double>(absorbed) / static_cast<double>(cfg.n_particles);
    cmp.ci_halfwidth = binomial_ci_halfwidth(cmp.mc_estimate, cfg.n_particles);
    cmp.analytic = analytics::hitting_prob_degradable(p, cfg.t_end);
    cmp.abs_error = std::fabs(cmp.analytic - cmp.mc_estimate);
    return cmp;
}

}  // namespace mcvd::sim
