#pragma once

#include <string>
#include <vector>

#include "mcvd/channel.hpp"
#include "mcvd/sim.hpp"

/// Experiment runner behind the CLI: config parsing, parameter sweeps,
/// analytic-vs-Monte-Carlo comparison reports, and the figure-reproduction
/// pipelines.  All outputs are CSV with one leading '#' comment line that
/// records the full configuration and seed; values are printed with 17
/// significant digits so every file re-parses bit exactly.

namespace mcvd::harness {

enum class Mode { analytic, simulate, compare, figure };

/// A one-variable sweep; grid() expands to sweep_points values between
/// min and max, spaced linearly or logarithmically.
struct SweepSpec {
    std::string variable = "t";  ///< one of t, lambda, a, mu, N
    double min = 1.0;
    double max = 1.0;
    int points = 1;
    bool log_scale = false;

    void validate() const;
    std::vector<double> grid() const;
};

struct ExperimentConfig {
    Mode mode = Mode::analytic;
    ChannelParams params{};
    sim::SimConfig simcfg{};
    DetectionSpec detect{};
    SweepSpec sweep{};
    std::string quantity = "hitting_prob";  ///< analytic-mode quantity
    std::string figure;                     ///< fig3 | fig4 | fig5 | fig6
    std::string output_path;                ///< empty = stdout
    double max_abs_error = 0.05;            ///< compare-mode acceptance threshold
    double min_inside_ci = 0.9;             ///< compare-mode acceptance threshold

    void validate() const;
    static ExperimentConfig from_json_file(const std::string& path);
    /// Single-line key=value rendering embedded in CSV comment headers.
    std::string comment_line() const;
};

struct ComparisonRow {
    double sweep_value = 0.0;
    double analytic = 0.0;
    double mc_estimate = 0.0;
    double ci_halfwidth = 0.0;
    double abs_error = 0.0;  ///< |analytic - mc_estimate|

    static ComparisonRow make(double sweep_value, double analytic, double mc, double ci);
};

struct CompareSummary {
    double max_abs_error = 0.0;
    double inside_ci_fraction = 0.0;
    std::size_t n_rows = 0;
};

/// Aggregates comparison rows: max absolute error and the fraction of rows
/// whose analytic value lies inside the Monte Carlo confidence interval.
CompareSummary compare_report(const std::vector<ComparisonRow>& rows);

/// Runs the configured experiment.  Returns 0 on success and 3 when a
/// compare run violates the configured acceptance thresholds.  Invalid
/// configurations throw std::invalid_argument (the CLI maps those to exit
/// code 2).
int run(const ExperimentConfig& config);

// --- CSV utilities ---------------------------------------------------------

/// 17-significant-digit rendering; round-trips any finite double bit exactly.
std::string format_g17(double v);

void write_csv(const std::string& path, const std::string& comment,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct CsvContent {
    std::vector<std::string> comments;  ///< '#' lines, prefix stripped
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvContent read_csv(const std::string& path);

}  // namespace mcvd::harness
