#pragma once

#include "hfclt/hermite.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace hfclt {

/// A certified density phi = 1 + sum_{k=K}^{N} phi_k H̄_k with respect to the
/// standard Gaussian. Only build_density() produces one.
///
/// The Gaussian itself (phi = 1) uses the convention K = r = infinity, N = 0;
/// query is_gaussian() before doing arithmetic with K or r.
class PolynomialDensity {
public:
    static constexpr int kInfinite = std::numeric_limits<int>::max();

    [[nodiscard]] const HermiteCoeffs& coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] double operator[](std::size_t k) const noexcept { return coeffs_[k]; }
    [[nodiscard]] bool is_gaussian() const noexcept { return N_ == 0; }
    [[nodiscard]] int K() const noexcept { return K_; }
    [[nodiscard]] int N() const noexcept { return N_; }
    /// Matched-moment order K - 1.
    [[nodiscard]] int r() const noexcept { return is_gaussian() ? kInfinite : K_ - 1; }
    /// chi2 distance to the Gaussian: sqrt(sum_{k>=1} phi_k^2).
    [[nodiscard]] double chi2() const noexcept { return chi2_; }
    [[nodiscard]] double max_abs_coeff() const noexcept;
    [[nodiscard]] double evaluate(double x) const noexcept { return coeffs_.evaluate(x); }

private:
    friend PolynomialDensity build_density(const HermiteCoeffs& raw);
    PolynomialDensity() = default;

    HermiteCoeffs coeffs_;
    int K_ = kInfinite;
    int N_ = 0;
    double chi2_ = 0.0;
};

/// Validates `raw` and derives K, N, r, chi2.
///
/// Nonnegativity is certified by isolating the real roots of the monomial
/// form (companion matrix eigenvalues) and requiring each to have even
/// multiplicity, then scanning a 10^4 point grid on [-R, R] with
/// R = 2 sqrt(2N + 2).
///
/// Throws MassNotOne, or NotADensityError (kind NotADensity or
/// OddLeadingDegree) carrying a point where the candidate is negative.
[[nodiscard]] PolynomialDensity build_density(const HermiteCoeffs& raw);

/// Raw moments E[X^k], k = 0..up_to, for X ~ phi mu; exact Gauss quadrature.
[[nodiscard]] std::vector<double> moments(const PolynomialDensity& phi, std::size_t up_to);

/// Closed form CDF: Phi(x) - rho(x) sum_{k>=1} phi_k H̄_{k-1}(x) / sqrt(k),
/// from d/dx[H_{k-1} rho] = -H_k rho.
[[nodiscard]] double density_cdf(const PolynomialDensity& phi, double x) noexcept;
/// 1 - density_cdf, computed without cancellation.
[[nodiscard]] double density_upper_tail(const PolynomialDensity& phi, double x) noexcept;
/// Lebesgue density phi(x) exp(-x^2/2) / sqrt(2 pi).
[[nodiscard]] double density_pdf(const PolynomialDensity& phi, double x) noexcept;

struct CdfTable {
    std::vector<double> abscissae; // increasing on [-R, R]
    std::vector<double> cdf;       // strictly increasing
    double tail_mass = 0.0;        // mass outside [-R, R]
};

[[nodiscard]] CdfTable build_cdf_table(const PolynomialDensity& phi);

/// Inverse-CDF sampler: table lookup by bisection, linear interpolation for
/// the first guess, then safeguarded Newton on the exact CDF.
class DensitySampler {
public:
    explicit DensitySampler(const PolynomialDensity& phi);

    /// Quantile of u in (0, 1).
    [[nodiscard]] double quantile(double u) const noexcept;
    [[nodiscard]] const CdfTable& table() const noexcept { return table_; }

private:
    PolynomialDensity phi_;
    CdfTable table_;
};

/// Uniform in (0, 1) from the top 53 bits of a 64-bit word.
[[nodiscard]] inline double unit_uniform(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// `count` i.i.d. draws from phi mu, deterministic in `seed`.
[[nodiscard]] std::vector<double> sample(const PolynomialDensity& phi, std::size_t count,
                                         std::uint64_t seed);

/// Diagnostics comparing chi2 with the distances it dominates.
struct DistanceDiagnostics {
    double chi2 = 0.0;               // from coefficients
    double chi2_quadrature = 0.0;    // sqrt(int (phi-1)^2 dmu)
    double total_variation = 0.0;    // int |phi - 1| dmu
    double relative_entropy = 0.0;   // int phi log phi dmu
};

[[nodiscard]] DistanceDiagnostics distance_diagnostics(const PolynomialDensity& phi);

/// Parses {"coeffs": [1, 0, ..., phi_N]}.
[[nodiscard]] HermiteCoeffs parse_density_json(const std::string& text);
[[nodiscard]] HermiteCoeffs read_density_file(const std::filesystem::path& path);

} // namespace hfclt
