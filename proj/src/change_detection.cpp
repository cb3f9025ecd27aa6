#include "treefuse/change_detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace treefuse {

// AS241 algorithm PPND16 (Wichura 1988): rational approximations for the
// inverse standard normal CDF, |error| ~ 1e-16 over (0,1).
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw OutOfRange("normal_quantile requires 0 < p < 1, got " + std::to_string(p));

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }

    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                    3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                  4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                  2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                  5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -value : value;
}

double chi2_quantile_1dof(double p) {
    const double z = normal_quantile((1.0 + p) / 2.0);
    return z * z;
}

IrConfig IrConfig::make(int w, double u) {
    IrConfig c;
    c.window_width = w;
    c.quantile_u = u;
    c.threshold = chi2_quantile_1dof(1.0 - u);
    return c;
}

SwblrtResult swblrt_statistic(std::span<const std::uint8_t> window,
                              std::int64_t history_successes,
                              std::int64_t history_count,
                              const IrConfig& config) {
    const std::int64_t w = static_cast<std::int64_t>(window.size());
    if (history_count <= w)
        throw WindowTooShort("history_count " + std::to_string(history_count) +
                             " must exceed window length " + std::to_string(w));
    const std::int64_t s =
        std::accumulate(window.begin(), window.end(), std::int64_t{0});
    // The window is the suffix of the history: its successes (and failures)
    // can't exceed the history's.
    if (history_successes < s || (history_count - w) < (history_successes - s))
        throw InconsistentCounts(
            "window " + std::to_string(s) + "/" + std::to_string(w) +
            " cannot be a suffix of history " + std::to_string(history_successes) +
            "/" + std::to_string(history_count));

    SwblrtResult out;
    out.lambda_win = static_cast<double>(s) / static_cast<double>(w);
    out.lambda_all = static_cast<double>(history_successes) /
                     static_cast<double>(history_count);

    // 0·log(0/x) = 0; suffix consistency (asserted above) guarantees that
    // λ_all ∈ {0,1} forces λ_win to match, so no log blows up.
    double stat = 0.0;
    if (s > 0)
        stat += static_cast<double>(s) *
                (std::log(out.lambda_win) - std::log(out.lambda_all));
    if (s < w)
        stat += static_cast<double>(w - s) *
                (std::log(1.0 - out.lambda_win) - std::log(1.0 - out.lambda_all));
    out.statistic = 2.0 * stat;
    out.reject = out.statistic > config.threshold;
    return out;
}

std::vector<IrOutcome> ir_sweep(const KnowledgeTree& tree,
                                PosteriorTable& table,
                                const IrConfig& config) {
    std::vector<IrOutcome> outcomes;
    for (DomainId id = kRootId + 1; id < table.size(); ++id) {
        if (!tree.has(id) || tree.domain(id).is_unk) continue;
        ArmPosterior& a = table.arm(id);
        if (a.deactivated) continue;

        IrOutcome o;
        o.arm = id;
        if (a.history_count > config.window_width) {
            std::vector<std::uint8_t> win(a.window.begin(), a.window.end());
            SwblrtResult r =
                swblrt_statistic(win, a.history_successes, a.history_count, config);
            o.result = r;
            if (r.reject) {
                const std::int64_t w = static_cast<std::int64_t>(win.size());
                const std::int64_t s =
                    std::accumulate(win.begin(), win.end(), std::int64_t{0});
                a.alpha = static_cast<double>(std::max<std::int64_t>(1, s));
                a.beta = static_cast<double>(std::max<std::int64_t>(1, w - s));
                a.history_successes = s;
                a.history_count = w;  // window retained; a new epoch starts
                o.reset_applied = true;
            }
        }
        outcomes.push_back(o);
    }
    return outcomes;
}

}  // namespace treefuse
