#pragma once

// Computable forms of the contraction inequalities: improved Poincare for the
// Ornstein-Uhlenbeck semigroup, Gershgorin row sums of M̂, the Poincare-like
// factor on V_K, the chi2 convolution inequality, and the alternative bound
// with an explicit constant c_r.

#include "hfclt/density.hpp"
#include "hfclt/hermite.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace hfclt {

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0; // rhs - lhs
    bool holds = false;  // lhs <= rhs (1 + 1e-10) + 1e-14
    std::string context;
};

[[nodiscard]] BoundCheck make_check(double lhs, double rhs, std::string context = {});

/// Var(P_t f) <= exp(-2(r+1)t) Var(f) for f with f_1 = ... = f_r = 0.
/// Throws SpectralGapViolation if a forbidden coefficient is nonzero.
[[nodiscard]] BoundCheck improved_poincare(const HermiteCoeffs& f, double t, int r);

/// Sigma(l) = sum_{j >= K} |M̂(l, j)|, over the band j in [l-N, l+N].
/// For the Gaussian this is a^{2l}.
[[nodiscard]] double gershgorin_row_sum(const PolynomialDensity& phi, double a, std::size_t l);

struct RowSumSup {
    double value = 0.0;       // max of Sigma(l) over the scanned range
    std::size_t argmax = 0;
    std::size_t last_l = 0;   // last row scanned
    bool certified = false;   // true if a decay bound covers all l > last_l
};

/// sup_{l >= K} Sigma(l). Rows are scanned upward from K until the bound
/// Sigma(l) <= a^{2l-N} (sum_k |phi_k| ((l+2N)(1-a^2))^{k/2} / sqrt(k!))^2,
/// decreasing once l > N / (-2 log a) - 2N, drops below the running max.
/// `K` overrides the density's K (needed for the Gaussian).
[[nodiscard]] RowSumSup sup_row_sum(const PolynomialDensity& phi, double a,
                                    std::optional<int> K = std::nullopt);

/// a^K (1 + d_phi(a))^2, the factor on squared norms as stated for the
/// Poincare-like inequality. Throws HypothesisNotSatisfied if (H) fails and
/// BarycenterOutOfRange unless a_phi < a < 1.
[[nodiscard]] double poincare_like_bound(const PolynomialDensity& phi, double a,
                                         std::optional<int> K = std::nullopt);

/// a^{2K} (1 + d_phi(a))^2, the bound on sup_l Sigma(l) reached in its proof.
/// Same preconditions.
[[nodiscard]] double poincare_proof_bound(const PolynomialDensity& phi, double a,
                                          std::optional<int> K = std::nullopt);

/// Matched-moment order of a density-like coefficient vector: the largest r
/// with f_1 = ... = f_r = 0 (|f_k| <= tol). PolynomialDensity::kInfinite if
/// f is constant.
[[nodiscard]] int matched_order(const HermiteCoeffs& f, double tol = 0.0);

/// chi2 of the barycentric convolution against
/// a^K (1 + d_phi(a)) chi2(f) + (1 - a^2)^{K/2} chi2(phi), with K = r + 1 of
/// phi (of f when phi is Gaussian). Throws PreconditionViolated if f[0] != 1
/// or f does not match moments to r, HypothesisNotSatisfied, or
/// BarycenterOutOfRange.
[[nodiscard]] BoundCheck er_inequality(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                       double a);

/// ||D^{m} (g - g_0)||, i.e. sqrt(sum_k k(k-1)...(k-m+1) g_k^2).
[[nodiscard]] double derivative_norm(const HermiteCoeffs& g, std::size_t m);
/// ||D^{-m} (g - g_0)||, i.e. sqrt(sum_k g_k^2 / ((k+m)...(k+1))).
[[nodiscard]] double antiderivative_norm(const HermiteCoeffs& g, std::size_t m);

/// Default constant in the alternative bound. Calibrated over the example
/// densities; see alternative_required_constant.
inline constexpr double kDefaultAlternativeConstant = 1.0;

/// chi2(K_a(f, phi)) <= a^{r+1} chi2(f) + (1-a^2)^{(r+1)/2} chi2(phi)
///   + c_r (1-a^2)^{(r+1)/2} (chi2(f) chi2(phi) + ||D^{r+1} f|| ||D^{-(r+1)} phi||).
[[nodiscard]] BoundCheck alternative_bound(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                           double a, int r,
                                           double c_r = kDefaultAlternativeConstant);

/// Smallest c_r making the alternative bound hold for this (f, phi, a, r);
/// 0 if the first two terms already suffice.
[[nodiscard]] double alternative_required_constant(const HermiteCoeffs& f,
                                                   const PolynomialDensity& phi, double a, int r);

/// ||Q*[1] - 1|| = (sum_k (1-a^2)^k phi_k^2)^{1/2}.
[[nodiscard]] double mass_defect(const PolynomialDensity& phi, double a);

struct TriangleSplit {
    double total = 0.0;    // chi2(Q*[f])
    double centered = 0.0; // ||Q*[f - 1]||
    double defect = 0.0;   // ||Q*[1] - 1||
    [[nodiscard]] bool holds() const noexcept {
        return total <= (centered + defect) * (1.0 + 1e-12) + 1e-15;
    }
};

/// The three quantities of chi2(Q*[f]) <= ||Q*[f-1]|| + ||Q*[1]-1||, each
/// from its own convolution.
[[nodiscard]] TriangleSplit triangle_split(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                           double a);

} // namespace hfclt
