#pragma once

// Hermite-domain matrices of the barycentric convolution operators
//   Q[f](x)  = int f(a x + sqrt(1-a^2) y) phi(y) dmu(y)
//   Q*[f]    = density of aU + sqrt(1-a^2)V, U ~ f mu, V ~ phi mu
//   M        = Q Q*
// on the truncated index range [0, dim).

#include "hfclt/density.hpp"
#include "hfclt/hermite.hpp"

#include <cstddef>
#include <vector>

namespace hfclt {

inline constexpr std::size_t kDefaultDim = 512;
inline constexpr double kUnderflowFloor = 1e-300;

enum class OperatorKind { Q, QStar, M, OU };

const char* to_string(OperatorKind kind) noexcept;

/// Square banded matrix on indices [0, dim). Entries outside the band are 0.
class BandedOperator {
public:
    BandedOperator(OperatorKind kind, std::size_t dim, std::size_t lower, std::size_t upper);

    [[nodiscard]] OperatorKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t lower_bandwidth() const noexcept { return lower_; }
    [[nodiscard]] std::size_t upper_bandwidth() const noexcept { return upper_; }

    [[nodiscard]] double operator()(std::size_t row, std::size_t col) const noexcept;
    void set(std::size_t row, std::size_t col, double value);

    /// Matrix-vector product; throws TruncationOverflow if degree(f) >= dim.
    [[nodiscard]] HermiteCoeffs apply(const HermiteCoeffs& f) const;
    /// Transpose; Q becomes QStar and vice versa.
    [[nodiscard]] BandedOperator transpose() const;
    /// Multiplies every stored entry by `factor` (fault injection in tests).
    void scale(double factor) noexcept;

private:
    [[nodiscard]] bool in_band(std::size_t row, std::size_t col) const noexcept {
        return col + lower_ >= row && col <= row + upper_ && row < dim_ && col < dim_;
    }

    OperatorKind kind_;
    std::size_t dim_;
    std::size_t lower_;
    std::size_t upper_;
    std::vector<double> band_; // row-major, width lower + upper + 1
};

/// Q̂(m, n) = C(n,m)^{1/2} a^m (1-a^2)^{(n-m)/2} phi_{n-m} for m <= n, else 0.
/// Evaluated in log domain.
[[nodiscard]] double q_entry(const HermiteCoeffs& phi, double a, std::size_t m, std::size_t n);

/// M̂(l, j) from the closed-form series, symmetric in (l, j).
[[nodiscard]] double m_entry(const HermiteCoeffs& phi, double a, std::size_t l, std::size_t j);

/// Upper-triangular Q̂ with bandwidth N. Throws DimensionTooSmall if dim <= N.
[[nodiscard]] BandedOperator build_q_matrix(const PolynomialDensity& phi, double a,
                                            std::size_t dim);
[[nodiscard]] BandedOperator build_q_star_matrix(const PolynomialDensity& phi, double a,
                                                 std::size_t dim);
/// Symmetric M̂ with bandwidth N from the closed form.
[[nodiscard]] BandedOperator build_m_matrix(const PolynomialDensity& phi, double a,
                                            std::size_t dim);
/// Q̂ Q̂ᵀ restricted to [0, dim); differs from the closed form only in the
/// last N rows and columns.
[[nodiscard]] BandedOperator m_matrix_by_product(const PolynomialDensity& phi, double a,
                                                 std::size_t dim);
/// Diagonal exp(-n t).
[[nodiscard]] BandedOperator build_ou_matrix(double t, std::size_t dim);

/// Q̂ᵀ f for an operator of kind Q, i.e. the coefficients of the barycentric
/// convolution of f with phi. Output degree is degree(f) + N. Throws
/// TruncationOverflow when degree(f) + N >= dim.
[[nodiscard]] HermiteCoeffs apply_adjoint(const BandedOperator& q, const HermiteCoeffs& f);

/// Output of a truncation to [0, dim) with the underflow floor applied.
struct Truncated {
    HermiteCoeffs coeffs;
    double dropped_norm = 0.0; // l2 norm of everything removed
};

[[nodiscard]] Truncated truncate(const HermiteCoeffs& g, std::size_t dim,
                                 double floor = kUnderflowFloor);

/// Coefficients of the barycentric convolution computed straight from q_entry,
/// with no size limit.
[[nodiscard]] HermiteCoeffs barycentric_convolution(const HermiteCoeffs& f,
                                                    const PolynomialDensity& phi, double a);

/// Ornstein-Uhlenbeck semigroup: coefficient k scaled by exp(-k t).
[[nodiscard]] HermiteCoeffs ou_apply(const HermiteCoeffs& f, double t);

struct HilbertSchmidtSum {
    double partial = 0.0;       // sum_{n < dim} M̂(n, n)
    double tail_estimate = 0.0; // geometric extrapolation of the remainder
    bool converged = false;
    [[nodiscard]] double total() const noexcept { return partial + tail_estimate; }
};

/// Trace of M̂; tends to ||phi||^2 / (1 - a^2). Flags a >= 0.999 as not
/// converged.
[[nodiscard]] HilbertSchmidtSum hilbert_schmidt_sum(const PolynomialDensity& phi, double a,
                                                    std::size_t dim);

struct VkNorm {
    double norm = 0.0; // sqrt of the top eigenvalue of M̂ restricted to [K, dim)
    std::size_t dim = 0;
    std::size_t iterations = 0;
};

/// Operator norm of Q* restricted to span{H̄_k : k >= K}, truncated to
/// [K, dim), by power iteration on the symmetric block of M̂.
/// Non-decreasing in dim. Throws DimensionTooSmall if dim < K + 4N and
/// NoConvergence after 1e5 iterations.
[[nodiscard]] VkNorm operator_norm_on_vk(const PolynomialDensity& phi, double a, std::size_t K,
                                         std::size_t dim);

} // namespace hfclt
