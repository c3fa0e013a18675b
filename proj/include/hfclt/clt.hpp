#pragma once

// Exact chi2 trajectory of Y_n = (X_1 + ... + X_n) / sqrt(n) through the
// recursion f_{n+1} = K_{a_{n+1}}(f_n, phi_{n+1}), a_n = sqrt(1 - 1/n).

#include "hfclt/density.hpp"
#include "hfclt/hermite.hpp"
#include "hfclt/operators.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

namespace hfclt {

/// Which density drives step i >= 1.
class InnovationSchedule {
public:
    enum class Rule { Constant, RoundRobin, FixedList };

    static InnovationSchedule constant(PolynomialDensity phi);
    /// Step i uses densities[(i - 1) % size].
    static InnovationSchedule round_robin(std::vector<PolynomialDensity> densities);
    /// Step i uses densities[assignment[(i - 1) % assignment.size()]].
    static InnovationSchedule fixed_list(std::vector<PolynomialDensity> densities,
                                         std::vector<std::size_t> assignment);

    [[nodiscard]] Rule rule() const noexcept { return rule_; }
    [[nodiscard]] const std::vector<PolynomialDensity>& densities() const noexcept {
        return densities_;
    }
    /// Density of step `step` (1-based).
    [[nodiscard]] const PolynomialDensity& at(std::size_t step) const;

    /// Shared matched-moment order, if every density has the same r.
    [[nodiscard]] std::optional<int> common_r() const;
    /// Smallest r over the densities.
    [[nodiscard]] int min_r() const;
    [[nodiscard]] int max_N() const;
    [[nodiscard]] bool all_gaussian() const;
    /// True if every density passes (H).
    [[nodiscard]] bool all_hypothesis() const;
    /// max_j ceil(1 / (1 - a_{phi_j}^2)) v 2.
    [[nodiscard]] int n0() const;

private:
    InnovationSchedule(Rule rule, std::vector<PolynomialDensity> densities,
                       std::vector<std::size_t> assignment);

    Rule rule_;
    std::vector<PolynomialDensity> densities_;
    std::vector<std::size_t> assignment_;
};

inline constexpr double kTailFlagThreshold = 1e-12;

struct ChainStep {
    std::size_t n = 0;
    double a_n = 0.0;          // sqrt(1 - 1/n); 0 at n = 1
    HermiteCoeffs coeffs;      // f_n, truncated to dim
    double chi2 = 0.0;
    double envelope = 0.0;     // NaN where undefined
    double tail_dropped = 0.0; // dropped l2 mass relative to ||f_n||
    bool flagged = false;      // tail_dropped >= kTailFlagThreshold
};

struct ChainTrajectory {
    std::vector<ChainStep> steps; // steps[n - 1]
    std::size_t dim = 0;

    [[nodiscard]] const ChainStep& at(std::size_t n) const { return steps.at(n - 1); }
    [[nodiscard]] std::size_t n_max() const noexcept { return steps.size(); }
    [[nodiscard]] double tail_max() const noexcept;
    [[nodiscard]] bool any_flagged() const noexcept;
};

/// Runs the chain for n = 1..n_max. Envelopes are left NaN; see
/// attach_envelope. Throws PreconditionViolated if n_max < 1 and
/// DimensionTooSmall if dim <= max N.
[[nodiscard]] ChainTrajectory run_chain(const InnovationSchedule& schedule, std::size_t n_max,
                                        std::size_t dim = kDefaultDim);

struct ErStep {
    std::size_t n = 0; // the step producing f_n from f_{n-1}
    double a = 0.0;
    double lhs = 0.0;  // chi2(f_n)
    double rhs = 0.0;  // a^K (1 + d(a)) chi2(f_{n-1}) + n^{-K/2} chi2(phi)
    double margin = 0.0;
    bool holds = false;
};

/// (E_r) along the trajectory for every step n >= 2 whose density passes
/// (H) and whose a_n exceeds that density's threshold.
[[nodiscard]] std::vector<ErStep> per_step_er(const ChainTrajectory& traj,
                                              const InnovationSchedule& schedule);

/// Envelope of the recursion chi2(f_n) <= c_n chi2(f_{n-1}) + d_n, seeded with
/// the exact chi2(f_{n0-1}); max-forms over the schedule's densities.
/// Entry n - 1 holds the bound at n; NaN for n < n0 - 1.
/// Throws RateNotApplicable unless the densities share r >= 2 and pass (H).
[[nodiscard]] std::vector<double> theorem1_envelope(const ChainTrajectory& traj,
                                                    const InnovationSchedule& schedule);

/// Fills ChainStep::envelope from theorem1_envelope.
void attach_envelope(ChainTrajectory& traj, const InnovationSchedule& schedule);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // rms of the fit residuals in log space
};

/// Least squares of log chi2(f_n) on log n over [n_lo, n_hi]. Throws
/// DegenerateWindow if the window is empty, exceeds the trajectory, or any
/// chi2 in it is not positive.
[[nodiscard]] RateFit fit_rate(const ChainTrajectory& traj, std::size_t n_lo, std::size_t n_hi);

/// max over [n_lo, n_hi] of n^{(r-1)/2} chi2(f_n), and the max/min ratio.
struct ScaledChi2 {
    double sup = 0.0;
    double ratio = 0.0;
};
[[nodiscard]] ScaledChi2 scaled_chi2(const ChainTrajectory& traj, int r, std::size_t n_lo,
                                     std::size_t n_hi);

struct MomentDiagnostics {
    bool ok = true;
    std::optional<std::size_t> first_bad_step;
    double max_mass_error = 0.0;   // max_n |f_{n,0} - 1|
    double max_moment_error = 0.0; // max_n max_{1<=k<=r} |f_{n,k}|
};

/// Checks f_{n,0} = 1 and f_{n,k} = 0 for 1 <= k <= r within 1e-12.
[[nodiscard]] MomentDiagnostics mass_and_moment_diagnostics(const ChainTrajectory& traj, int r);

/// `n,a_n,chi2,envelope,tail_dropped`, 17 significant digits.
void write_trajectory_csv(const ChainTrajectory& traj, std::ostream& out);

} // namespace hfclt
