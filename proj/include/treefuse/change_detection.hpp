#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "treefuse/bandit.hpp"

namespace treefuse {

// Upper quantile of the chi-squared distribution with one degree of freedom,
// computed as the square of the standard normal quantile at (1+p)/2.
double chi2_quantile_1dof(double p);

// Inverse standard normal CDF (AS241 rational approximation, double
// precision). Exposed because the quantile above is just its square.
double normal_quantile(double p);

struct IrConfig {
    int window_width = 20;   // w
    double quantile_u = 0.2; // rejection at the (1-u) chi-squared quantile
    double threshold = 0.0;  // cached chi2_quantile_1dof(1-u)

    static IrConfig make(int w, double u);
};

struct SwblrtResult {
    double lambda_win = 0.0;
    double lambda_all = 0.0;
    double statistic = 0.0;
    bool reject = false;
};

// Sliding-window binomial likelihood-ratio statistic:
//   Λ = 2 [ S log(λ_win/λ_all) + (w−S) log((1−λ_win)/(1−λ_all)) ]
// with S = window successes, λ_win = S/w, λ_all over the full history
// (window included), and the 0·log(0/x) = 0 convention. The window being a
// suffix of the history keeps the logs finite: λ_all can only hit 0 or 1
// when λ_win equals it.
//
// Requires history_count > window length (WindowTooShort) and counts that a
// real history could produce (InconsistentCounts).
SwblrtResult swblrt_statistic(std::span<const std::uint8_t> window,
                              std::int64_t history_successes,
                              std::int64_t history_count,
                              const IrConfig& config);

struct IrOutcome {
    DomainId arm = 0;
    std::optional<SwblrtResult> result;  // absent when the arm was skipped
    bool reset_applied = false;
};

// Tests every live non-unk arm whose epoch has outgrown the window; on
// rejection the posterior restarts from the window contents:
//   Beta(max(1, S), max(1, w−S)), history := window, window retained.
// Arms with history_count <= w are reported untested; deactivated arms are
// frozen and skipped entirely.
std::vector<IrOutcome> ir_sweep(const KnowledgeTree& tree,
                                PosteriorTable& table,
                                const IrConfig& config);

}  // namespace treefuse
