#include "hfclt/hypothesis.hpp"

#include "hfclt/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hfclt {

namespace {

constexpr double kRelTol = 1e-12;

double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

double ratio_NK(const PolynomialDensity& phi) {
    return phi.is_gaussian() ? 0.0 : static_cast<double>(phi.N()) / phi.K();
}

double log_gamma_k(const PolynomialDensity& phi, int k) {
    const double c = std::abs(phi[static_cast<std::size_t>(k)]);
    if (c == 0.0)
        return -std::numeric_limits<double>::infinity();
    return 0.5 * k * std::log1p(ratio_NK(phi)) + std::log(c) - 0.5 * log_factorial(k);
}

bool leq(double lhs, double rhs) { return lhs <= rhs + kRelTol * std::abs(rhs); }

void check_a(double a) {
    if (!(a > 0.0 && a <= 1.0))
        throw Error(ErrorKind::PreconditionViolated, "a = " + std::to_string(a) + " outside (0, 1]");
}

// Both products of (H2a) are instances of (beta/m)^m (q/alpha)^q; returns its
// log, or nullopt when alpha = 0 with q > 0.
std::optional<double> log_lemma_product(int m, int q, double log_half_alpha, double log_beta_over_m) {
    double v = m * log_beta_over_m;
    if (q > 0) {
        if (std::isinf(log_half_alpha))
            return std::nullopt;
        v += q * (std::log(static_cast<double>(q)) - std::log(2.0) - log_half_alpha);
    }
    return v;
}

} // namespace

const char* to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotApplicable: return "n/a";
    }
    return "?";
}

double a_phi(const PolynomialDensity& phi) noexcept {
    return std::pow(1.0 + ratio_NK(phi), -0.25);
}

double barycenter_threshold(const PolynomialDensity& phi) noexcept {
    return phi.is_gaussian() ? 0.0 : a_phi(phi);
}

double C_k(const PolynomialDensity& phi, int k) noexcept {
    return std::pow(1.0 + ratio_NK(phi), 0.5 * k);
}

double gamma_k(const PolynomialDensity& phi, int k) noexcept {
    return std::exp(log_gamma_k(phi, k));
}

PredicateResult check_h1(const PolynomialDensity& phi) {
    PredicateResult out;
    if (phi.is_gaussian() || phi.K() > phi.N() - 2) {
        out.note = "K > N - 2";
        return out;
    }
    out.verdict = Verdict::Pass;
    for (int k = phi.K(); k <= phi.N() - 2; ++k) {
        const double lhs = (k + 2) * gamma_k(phi, k + 2);
        const double rhs = gamma_k(phi, k);
        if (!leq(lhs, rhs)) {
            out.verdict = Verdict::Fail;
            out.first_violation = k;
            out.lhs = lhs;
            out.rhs = rhs;
            out.note = "(k+2) gamma_{k+2} > gamma_k at k = " + std::to_string(k);
            return out;
        }
    }
    return out;
}

PredicateResult check_h1prime(const PolynomialDensity& phi) {
    PredicateResult out;
    if (phi.is_gaussian() || phi.K() > phi.N() - 2) {
        out.note = "K > N - 2";
        return out;
    }
    const double K = phi.K();
    const double rho = std::sqrt(std::sqrt(1.0 - 1.0 / (K + 2.0)) / (1.0 + ratio_NK(phi)));
    out.verdict = Verdict::Pass;
    out.rhs = rho;
    for (int k = phi.K(); k <= phi.N(); ++k) {
        const double next = std::abs(phi[static_cast<std::size_t>(k + 1)]);
        const double cur = std::abs(phi[static_cast<std::size_t>(k)]);
        if (!leq(next, rho * cur)) {
            out.verdict = Verdict::Fail;
            out.first_violation = k;
            out.lhs = next;
            out.rhs = rho * cur;
            out.note = "|phi_{k+1}| > rho |phi_k| at k = " + std::to_string(k);
            return out;
        }
    }
    return out;
}

PredicateResult check_h2a(const PolynomialDensity& phi) {
    PredicateResult out;
    if (phi.is_gaussian() || phi.K() > phi.N() - 1) {
        out.note = "K > N - 1";
        return out;
    }
    const int K = phi.K();
    const int N = phi.N();
    const double log_rhs = -(N - K + 1) * std::log(static_cast<double>(N - K + 1));
    out.rhs = std::exp(log_rhs);
    if (K == 1) {
        // gamma_1 sqrt(2u) makes h increase near u = 0.
        out.verdict = Verdict::Fail;
        out.lhs = std::numeric_limits<double>::infinity();
        out.note = "K = 1: the exponent K - 2 is negative";
        return out;
    }
    const auto t1 = log_lemma_product(
        N, K - 1, log_gamma_k(phi, N),
        std::log(2.0 * (K + 1)) + log_gamma_k(phi, K + 1) - std::log(static_cast<double>(N)));
    const auto t2 = log_lemma_product(
        N - 1, K - 2, log_gamma_k(phi, N - 1),
        std::log(2.0 * K) + log_gamma_k(phi, K) - std::log(static_cast<double>(N - 1)));
    if (!t1 || !t2) {
        out.verdict = Verdict::Fail;
        out.lhs = std::numeric_limits<double>::infinity();
        out.note = "fail (degenerate): gamma_{N-1} = 0 appears in a denominator";
        return out;
    }
    const double log_lhs = std::max(*t1, *t2);
    out.lhs = std::exp(log_lhs);
    out.verdict = log_lhs <= log_rhs + kRelTol ? Verdict::Pass : Verdict::Fail;
    return out;
}

PredicateResult check_h2b(const PolynomialDensity& phi) {
    PredicateResult out;
    if (phi.is_gaussian() || phi.K() != phi.N()) {
        out.note = "K != N";
        return out;
    }
    const int N = phi.N();
    out.lhs = gamma_k(phi, N);
    out.rhs = N == 2 ? 0.5 : 0.5 * std::pow(static_cast<double>(N - 2), -0.5 * (N - 2));
    out.verdict = leq(out.lhs, out.rhs) ? Verdict::Pass : Verdict::Fail;
    return out;
}

PredicateResult check_h2(const PolynomialDensity& phi) {
    if (phi.is_gaussian())
        return check_h2b(phi);
    return phi.K() == phi.N() ? check_h2b(phi) : check_h2a(phi);
}

HypothesisReport check_hypothesis(const PolynomialDensity& phi) {
    HypothesisReport rep;
    rep.a_phi = a_phi(phi);
    if (!phi.is_gaussian()) {
        for (int k = phi.K(); k <= phi.N(); ++k) {
            rep.gammas[k] = gamma_k(phi, k);
            rep.C[k] = C_k(phi, k);
        }
    }
    rep.h1 = check_h1(phi);
    rep.h1prime = check_h1prime(phi);
    rep.h2a = check_h2a(phi);
    rep.h2b = check_h2b(phi);
    rep.overall = rep.h1.ok() && rep.h2a.ok() && rep.h2b.ok();
    return rep;
}

double d_phi(const PolynomialDensity& phi, double a) {
    check_a(a);
    if (phi.is_gaussian())
        return 0.0;
    const double base =
        -2.0 * (phi.K() + phi.N()) * (1.0 + ratio_NK(phi)) * std::log(a);
    double acc = 0.0;
    for (int k = phi.K(); k <= phi.N(); ++k) {
        const double c = std::abs(phi[static_cast<std::size_t>(k)]);
        if (c != 0.0)
            acc += std::exp(std::log(c) - 0.5 * log_factorial(k) + 0.5 * k * std::log(base));
    }
    return acc;
}

double d_phi_gamma_form(const PolynomialDensity& phi, double a) {
    check_a(a);
    if (phi.is_gaussian())
        return 0.0;
    const double base = -2.0 * (phi.K() + phi.N()) * std::log(a);
    double acc = 0.0;
    for (int k = phi.K(); k <= phi.N(); ++k)
        acc += gamma_k(phi, k) * std::pow(base, 0.5 * k);
    return acc;
}

double d_phi_limit(const PolynomialDensity& phi) {
    if (phi.is_gaussian())
        return 0.0;
    return gamma_k(phi, phi.K()) * std::pow(2.0 * (phi.K() + phi.N()), 0.5 * phi.K());
}

double h_function(const PolynomialDensity& phi, double u) {
    double acc = 1.0;
    if (!phi.is_gaussian()) {
        for (int k = phi.K(); k <= phi.N(); ++k)
            acc += gamma_k(phi, k) * std::pow(2.0 * u, 0.5 * k);
    }
    return std::exp(-u) * acc;
}

bool lemma_polynom_predicate(int m, int q, double alpha, double beta) {
    if (!(m > q && q >= 1 && alpha > 0.0 && beta > 0.0))
        throw Error(ErrorKind::PreconditionViolated, "need m > q >= 1 and alpha, beta > 0");
    const double lhs = m * std::log(beta / m) + q * std::log(q / alpha);
    const double rhs = -(m - q) * std::log(static_cast<double>(m - q));
    return lhs <= rhs + kRelTol * std::max(1.0, std::abs(rhs));
}

DoubleProdSides double_prod_sides(int K, int N, int i, int k, int l, double a) {
    const bool ok_indices = K >= 1 && N >= K && k >= 0 && k <= N - 1 && i + k >= K &&
                            i + k <= N && i >= 1 && i <= N && l >= K;
    const double threshold = std::pow(1.0 + static_cast<double>(N) / K, -0.25);
    if (!ok_indices || !(a > threshold && a < 1.0)) {
        throw Error(ErrorKind::PreconditionViolated,
                    "double product lemma outside its domain (K=" + std::to_string(K) +
                        ", N=" + std::to_string(N) + ", i=" + std::to_string(i) +
                        ", k=" + std::to_string(k) + ", l=" + std::to_string(l) + ")");
    }
    const auto uk = static_cast<std::size_t>(k);
    const auto ui = static_cast<std::size_t>(i);
    const auto ul = static_cast<std::size_t>(l);
    const double la = std::log(a);
    DoubleProdSides s;
    if (l >= i + K) {
        s.lhs += std::exp(-i * la + 0.5 * log_binomial(uk + ul, uk) +
                          0.5 * log_binomial(uk + ul, uk + ui));
    }
    s.lhs += std::exp(i * la + 0.5 * log_binomial(uk + ul + ui, uk) +
                      0.5 * log_binomial(uk + ul + ui, uk + ui));
    const double log_c = 0.5 * (2 * k + i) * std::log1p(static_cast<double>(N) / K);
    s.rhs = 2.0 * std::exp(log_c + 0.5 * log_binomial(uk + ul, uk) +
                           0.5 * log_binomial(uk + ul + ui, uk + ui));
    return s;
}

bool double_prod_check(int K, int N, int i, int k, int l, double a) {
    return double_prod_sides(K, N, i, k, l, a).holds();
}

int n0_from_threshold(double threshold) noexcept {
    // 1 / (1 - t^2) lands a few ulps above an integer for t^2 = 1/2 and the like
    const double v = std::ceil(1.0 / (1.0 - threshold * threshold) * (1.0 - 1e-14));
    return std::max(2, static_cast<int>(v));
}

int n0(const PolynomialDensity& phi) noexcept {
    return n0_from_threshold(barycenter_threshold(phi));
}

} // namespace hfclt
