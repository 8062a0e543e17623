#pragma once

#include <optional>
#include <stdexcept>

/// Shared physical parameter types.
///
/// Units are fixed repo-wide: lengths in um, time in s, diffusion in um^2/s,
/// receiver density in 1/um^3, degradation rate in 1/s.  Any unit conversion
/// belongs at the CLI boundary, never here.

namespace mcvd {

/// Physical channel parameters shared by the closed forms and the simulator.
struct ChannelParams {
    double a = 1.0;       ///< receiver radius [um]
    double D = 1.0;       ///< diffusion coefficient [um^2/s]
    double lambda = 0.0;  ///< receiver center density [1/um^3]
    double mu = 0.0;      ///< first-order degradation rate [1/s]

    void validate() const {
        if (!(a > 0.0)) throw std::invalid_argument("ChannelParams: a must be > 0");
        if (!(D > 0.0)) throw std::invalid_argument("ChannelParams: D must be > 0");
        if (!(lambda >= 0.0)) throw std::invalid_argument("ChannelParams: lambda must be >= 0");
        if (!(mu >= 0.0)) throw std::invalid_argument("ChannelParams: mu must be >= 0");
    }

    /// Fraction of space occupied by receiver grains, lambda*(4/3)*pi*a^3.
    double grain_fill_factor() const;

    /// The closed forms assume a dilute receiver field.  When this returns
    /// false callers should surface a validity warning to the user.
    bool sparse_regime() const { return grain_fill_factor() < 0.1; }
};

/// Composite rate/shape parameters of the degradable hitting process:
/// alpha = 4*a*pi*lambda*D + mu [1/s], beta = 4*a^2*lambda*sqrt(pi*D/alpha).
struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Inputs for event-detection computations.
struct DetectionSpec {
    long long n_molecules = 1;         ///< number of emitted molecules N
    long long threshold = 1;           ///< detection threshold eta
    double t = 1.0;                    ///< observation horizon [s]
    std::optional<double> target_p{};  ///< target detection probability (sizing only)

    void validate() const {
        if (n_molecules < 1) throw std::invalid_argument("DetectionSpec: n_molecules must be >= 1");
        if (threshold < 1 || threshold > n_molecules)
            throw std::invalid_argument("DetectionSpec: threshold must be in [1, n_molecules]");
        if (!(t >= 0.0)) throw std::invalid_argument("DetectionSpec: t must be >= 0");
        if (target_p && !(*target_p > 0.0 && *target_p < 1.0))
            throw std::invalid_argument("DetectionSpec: target_p must be in (0, 1)");
    }
};

}  // namespace mcvd
