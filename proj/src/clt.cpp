#include "hfclt/clt.hpp"

#include "hfclt/bounds.hpp"
#include "hfclt/error.hpp"
#include "hfclt/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace hfclt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double step_parameter(std::size_t n) {
    return std::sqrt(1.0 - 1.0 / static_cast<double>(n));
}

} // namespace

InnovationSchedule::InnovationSchedule(Rule rule, std::vector<PolynomialDensity> densities,
                                       std::vector<std::size_t> assignment)
    : rule_(rule), densities_(std::move(densities)), assignment_(std::move(assignment)) {
    if (densities_.empty())
        throw Error(ErrorKind::InvalidConfig, "schedule needs at least one density");
    for (std::size_t j : assignment_) {
        if (j >= densities_.size())
            throw Error(ErrorKind::InvalidConfig, "assignment index out of range");
    }
}

InnovationSchedule InnovationSchedule::constant(PolynomialDensity phi) {
    return InnovationSchedule(Rule::Constant, {std::move(phi)}, {});
}

InnovationSchedule InnovationSchedule::round_robin(std::vector<PolynomialDensity> densities) {
    return InnovationSchedule(Rule::RoundRobin, std::move(densities), {});
}

InnovationSchedule InnovationSchedule::fixed_list(std::vector<PolynomialDensity> densities,
                                                  std::vector<std::size_t> assignment) {
    if (assignment.empty())
        throw Error(ErrorKind::InvalidConfig, "fixed list assignment is empty");
    for (std::size_t idx : assignment) {
        if (idx >= densities.size())
            throw Error(ErrorKind::IndexOutOfRange, "assignment refers to density " +
                                                        std::to_string(idx));
    }
    return InnovationSchedule(Rule::FixedList, std::move(densities), std::move(assignment));
}

const PolynomialDensity& InnovationSchedule::at(std::size_t step) const {
    if (step == 0)
        throw Error(ErrorKind::IndexOutOfRange, "steps are numbered from 1");
    switch (rule_) {
    case Rule::Constant: return densities_.front();
    case Rule::RoundRobin: return densities_[(step - 1) % densities_.size()];
    case Rule::FixedList: return densities_[assignment_[(step - 1) % assignment_.size()]];
    }
    return densities_.front();
}

std::optional<int> InnovationSchedule::common_r() const {
    const int r = densities_.front().r();
    for (const auto& d : densities_) {
        if (d.r() != r)
            return std::nullopt;
    }
    return r;
}

int InnovationSchedule::min_r() const {
    int r = PolynomialDensity::kInfinite;
    for (const auto& d : densities_)
        r = std::min(r, d.r());
    return r;
}

int InnovationSchedule::max_N() const {
    int n = 0;
    for (const auto& d : densities_)
        n = std::max(n, d.N());
    return n;
}

bool InnovationSchedule::all_gaussian() const {
    return std::all_of(densities_.begin(), densities_.end(),
                       [](const PolynomialDensity& d) { return d.is_gaussian(); });
}

bool InnovationSchedule::all_hypothesis() const {
    return std::all_of(densities_.begin(), densities_.end(),
                       [](const PolynomialDensity& d) { return check_hypothesis(d).overall; });
}

int InnovationSchedule::n0() const {
    int out = 2;
    for (const auto& d : densities_)
        out = std::max(out, hfclt::n0(d));
    return out;
}

double ChainTrajectory::tail_max() const noexcept {
    double m = 0.0;
    for (const auto& s : steps)
        m = std::max(m, s.tail_dropped);
    return m;
}

bool ChainTrajectory::any_flagged() const noexcept {
    return std::any_of(steps.begin(), steps.end(), [](const ChainStep& s) { return s.flagged; });
}

ChainTrajectory run_chain(const InnovationSchedule& schedule, std::size_t n_max,
                          std::size_t dim) {
    if (n_max < 1)
        throw Error(ErrorKind::PreconditionViolated, "n_max must be >= 1");
    const auto max_N = static_cast<std::size_t>(schedule.max_N());
    if (dim <= max_N) {
        throw Error(ErrorKind::DimensionTooSmall,
                    "dim " + std::to_string(dim) + " <= N = " + std::to_string(max_N));
    }
    ChainTrajectory traj;
    traj.dim = dim;
    traj.steps.reserve(n_max);

    // f_1 = K_0(1, phi_1) = phi_1.
    {
        const auto cut = truncate(schedule.at(1).coeffs(), dim);
        ChainStep s;
        s.n = 1;
        s.a_n = 0.0;
        s.coeffs = cut.coeffs;
        s.chi2 = s.coeffs.tail_norm(1);
        s.envelope = kNaN;
        const double full = schedule.at(1).coeffs().norm();
        s.tail_dropped = full > 0.0 ? cut.dropped_norm / full : 0.0;
        s.flagged = s.tail_dropped >= kTailFlagThreshold;
        traj.steps.push_back(std::move(s));
    }

    for (std::size_t n = 2; n <= n_max; ++n) {
        const auto& phi = schedule.at(n);
        const double a = step_parameter(n);
        const auto& prev = traj.steps.back().coeffs;
        const std::size_t q_dim = prev.degree() + static_cast<std::size_t>(phi.N()) + 1;
        const auto q = build_q_matrix(phi, a, q_dim);
        const auto g = apply_adjoint(q, prev);
        const auto cut = truncate(g, dim);

        ChainStep s;
        s.n = n;
        s.a_n = a;
        s.coeffs = cut.coeffs;
        s.chi2 = s.coeffs.tail_norm(1);
        s.envelope = kNaN;
        const double full = g.norm();
        s.tail_dropped = full > 0.0 ? cut.dropped_norm / full : 0.0;
        s.flagged = s.tail_dropped >= kTailFlagThreshold;
        traj.steps.push_back(std::move(s));
    }
    return traj;
}

std::vector<ErStep> per_step_er(const ChainTrajectory& traj, const InnovationSchedule& schedule) {
    std::vector<ErStep> out;
    for (std::size_t n = 2; n <= traj.n_max(); ++n) {
        const auto& phi = schedule.at(n);
        const double a = traj.at(n).a_n;
        if (!(a > barycenter_threshold(phi)) || !check_hypothesis(phi).overall)
            continue;
        const auto& prev = traj.at(n - 1);
        int r = phi.r();
        if (phi.is_gaussian())
            r = matched_order(prev.coeffs, 1e-12 * std::max(1.0, prev.coeffs.norm()));
        ErStep e;
        e.n = n;
        e.a = a;
        e.lhs = traj.at(n).chi2;
        if (r != PolynomialDensity::kInfinite) {
            const double K = r + 1.0;
            e.rhs = std::pow(a, K) * (1.0 + d_phi(phi, a)) * prev.chi2 +
                    std::pow(static_cast<double>(n), -0.5 * K) * phi.chi2();
        }
        const auto c = make_check(e.lhs, e.rhs);
        e.margin = c.margin;
        e.holds = c.holds;
        out.push_back(e);
    }
    return out;
}

std::vector<double> theorem1_envelope(const ChainTrajectory& traj,
                                      const InnovationSchedule& schedule) {
    const auto r = schedule.common_r();
    if (!r || *r < 2) {
        throw Error(ErrorKind::RateNotApplicable,
                    "densities must share a matched-moment order r >= 2");
    }
    if (!schedule.all_hypothesis())
        throw Error(ErrorKind::RateNotApplicable, "a density fails (H)");

    const std::size_t n_max = traj.n_max();
    std::vector<double> env(n_max, kNaN);
    const auto n0 = static_cast<std::size_t>(schedule.n0());
    if (n0 - 1 > n_max)
        return env;
    env[n0 - 2] = traj.at(n0 - 1).chi2;
    if (schedule.all_gaussian()) {
        for (std::size_t n = n0; n <= n_max; ++n)
            env[n - 1] = 0.0;
        return env;
    }

    const double K = *r + 1.0;
    double max_chi = 0.0;
    for (const auto& d : schedule.densities())
        max_chi = std::max(max_chi, d.chi2());
    for (std::size_t n = n0; n <= n_max; ++n) {
        const double a = step_parameter(n);
        double worst = 1.0;
        for (const auto& d : schedule.densities())
            worst = std::max(worst, 1.0 + d_phi(d, a));
        const double c = std::pow(1.0 - 1.0 / static_cast<double>(n), 0.5 * K) * worst;
        const double dn = std::pow(static_cast<double>(n), -0.5 * K) * max_chi;
        env[n - 1] = c * env[n - 2] + dn;
    }
    return env;
}

void attach_envelope(ChainTrajectory& traj, const InnovationSchedule& schedule) {
    const auto env = theorem1_envelope(traj, schedule);
    for (std::size_t i = 0; i < env.size(); ++i)
        traj.steps[i].envelope = env[i];
}

RateFit fit_rate(const ChainTrajectory& traj, std::size_t n_lo, std::size_t n_hi) {
    if (n_lo < 1 || n_hi <= n_lo || n_hi > traj.n_max()) {
        throw Error(ErrorKind::DegenerateWindow,
                    "window [" + std::to_string(n_lo) + ", " + std::to_string(n_hi) +
                        "] does not fit a trajectory of length " + std::to_string(traj.n_max()));
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t n = n_lo; n <= n_hi; ++n) {
        const double c = traj.at(n).chi2;
        if (!(c > 0.0) || !std::isfinite(c))
            throw Error(ErrorKind::DegenerateWindow, "chi2 vanishes at n = " + std::to_string(n));
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(c));
    }
    const double m = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / m);
    return fit;
}

ScaledChi2 scaled_chi2(const ChainTrajectory& traj, int r, std::size_t n_lo, std::size_t n_hi) {
    if (n_lo < 1 || n_hi < n_lo || n_hi > traj.n_max())
        throw Error(ErrorKind::DegenerateWindow, "window outside the trajectory");
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t n = n_lo; n <= n_hi; ++n) {
        const double v =
            std::pow(static_cast<double>(n), 0.5 * (r - 1)) * traj.at(n).chi2;
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    return {hi, lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()};
}

MomentDiagnostics mass_and_moment_diagnostics(const ChainTrajectory& traj, int r) {
    constexpr double kTol = 1e-12;
    MomentDiagnostics d;
    const std::size_t top =
        r == PolynomialDensity::kInfinite ? traj.dim : static_cast<std::size_t>(r);
    for (const auto& s : traj.steps) {
        const double mass = std::abs(s.coeffs[0] - 1.0);
        double mom = 0.0;
        for (std::size_t k = 1; k <= top && k < s.coeffs.size(); ++k)
            mom = std::max(mom, std::abs(s.coeffs[k]));
        d.max_mass_error = std::max(d.max_mass_error, mass);
        d.max_moment_error = std::max(d.max_moment_error, mom);
        if ((mass > kTol || mom > kTol) && !d.first_bad_step) {
            d.ok = false;
            d.first_bad_step = s.n;
        }
    }
    return d;
}

void write_trajectory_csv(const ChainTrajectory& traj, std::ostream& out) {
    out << "n,a_n,chi2,envelope,tail_dropped\n";
    char buf[160];
    for (const auto& s : traj.steps) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", s.n, s.a_n, s.chi2,
                      s.envelope, s.tail_dropped);
        out << buf;
    }
}

} // namespace hfclt
