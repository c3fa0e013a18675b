#pragma once

// Coefficient conditions (H1), (H1'), (H2a), (H2b) on a polynomial density,
// the constants C_k, gamma_k, a_phi, the correction d_phi(a), and the two
// auxiliary inequalities used to bound the Gershgorin row sums.

#include "hfclt/density.hpp"

#include <map>
#include <optional>
#include <string>

namespace hfclt {

enum class Verdict { Pass, Fail, NotApplicable };

const char* to_string(Verdict v) noexcept;

struct PredicateResult {
    Verdict verdict = Verdict::NotApplicable;
    std::optional<int> first_violation; // index k where a per-k condition fails
    double lhs = 0.0;
    double rhs = 0.0;
    std::string note;

    [[nodiscard]] bool ok() const noexcept { return verdict != Verdict::Fail; }
};

struct HypothesisReport {
    double a_phi = 1.0;
    std::map<int, double> gammas; // K <= k <= N
    std::map<int, double> C;      // K <= k <= N
    PredicateResult h1;
    PredicateResult h1prime;
    PredicateResult h2a;
    PredicateResult h2b;
    bool overall = false;
};

/// (1 + N/K)^{-1/4}; equals 1 for the Gaussian.
[[nodiscard]] double a_phi(const PolynomialDensity& phi) noexcept;

/// Lower end of the admissible range of a: a_phi, except 0 for the Gaussian
/// (every a in (0, 1) is admissible there).
[[nodiscard]] double barycenter_threshold(const PolynomialDensity& phi) noexcept;

/// (1 + N/K)^{k/2}; 1 for the Gaussian.
[[nodiscard]] double C_k(const PolynomialDensity& phi, int k) noexcept;

/// C_k |phi_k| / sqrt(k!).
[[nodiscard]] double gamma_k(const PolynomialDensity& phi, int k) noexcept;

[[nodiscard]] PredicateResult check_h1(const PolynomialDensity& phi);
[[nodiscard]] PredicateResult check_h1prime(const PolynomialDensity& phi);
[[nodiscard]] PredicateResult check_h2a(const PolynomialDensity& phi);
[[nodiscard]] PredicateResult check_h2b(const PolynomialDensity& phi);
/// Whichever of (H2a), (H2b) applies; NotApplicable for the Gaussian.
[[nodiscard]] PredicateResult check_h2(const PolynomialDensity& phi);

/// Full report. `overall` is (H1 or n/a) and (H2 or n/a).
[[nodiscard]] HypothesisReport check_hypothesis(const PolynomialDensity& phi);

/// sum_k |phi_k| / sqrt(k!) (-2 (K+N)(1+N/K) log a)^{k/2}; 0 for the Gaussian.
/// Throws PreconditionViolated unless 0 < a <= 1.
[[nodiscard]] double d_phi(const PolynomialDensity& phi, double a);

/// Same quantity as sum_k gamma_k (-2 (K+N) log a)^{k/2}.
[[nodiscard]] double d_phi_gamma_form(const PolynomialDensity& phi, double a);

/// lim_{a -> 1} |log a|^{-K/2} d_phi(a) = gamma_K (2 (K+N))^{K/2}.
[[nodiscard]] double d_phi_limit(const PolynomialDensity& phi);

/// exp(-u) (1 + sum_k gamma_k (2u)^{k/2}).
[[nodiscard]] double h_function(const PolynomialDensity& phi, double u);

/// (beta/m)^m (q/alpha)^q <= 1/(m-q)^{m-q}, evaluated in logs. This is
/// equivalent to -alpha x^m + beta x^q - 1 <= 0 on [0, inf).
/// Throws PreconditionViolated unless m > q >= 1 and alpha, beta > 0.
[[nodiscard]] bool lemma_polynom_predicate(int m, int q, double alpha, double beta);

struct DoubleProdSides {
    double lhs = 0.0;
    double rhs = 0.0;
    [[nodiscard]] bool holds() const noexcept { return lhs <= rhs * (1.0 + 1e-12); }
};

/// Both sides of
///   a^{-i} C(k+l,k)^{1/2} C(k+l,k+i)^{1/2} 1{l >= i+K}
///     + a^i C(k+l+i,k)^{1/2} C(k+l+i,k+i)^{1/2}
///   <= 2 C_k C_{k+i} C(k+l,k)^{1/2} C(k+l+i,k+i)^{1/2}
/// with C_k = (1+N/K)^{k/2}. Throws PreconditionViolated outside
/// 0 <= k <= N-1, K <= i+k <= N, 1 <= i <= N, l >= K, a in (a_phi, 1).
[[nodiscard]] DoubleProdSides double_prod_sides(int K, int N, int i, int k, int l, double a);
[[nodiscard]] bool double_prod_check(int K, int N, int i, int k, int l, double a);

/// ceil(1 / (1 - threshold^2)) v 2, the first chain index n with
/// a_n = sqrt(1 - 1/n) above the threshold.
[[nodiscard]] int n0(const PolynomialDensity& phi) noexcept;
[[nodiscard]] int n0_from_threshold(double threshold) noexcept;

} // namespace hfclt
