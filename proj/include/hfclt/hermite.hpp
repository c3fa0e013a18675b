#pragma once

// Renormalized (probabilists') Hermite basis H̄_n = H_n / sqrt(n!), orthonormal
// in L2 of the standard Gaussian measure. Everything downstream works on
// coefficient sequences in this basis.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace hfclt {

/// Coefficients (g_0, g_1, ...) of a function g = sum_k g_k H̄_k.
///
/// Trailing zeros are trimmed on construction, so `size() == degree() + 1`
/// for any nonzero function. Reads past the end return 0.
class HermiteCoeffs {
public:
    HermiteCoeffs() = default;
    explicit HermiteCoeffs(std::vector<double> coeffs);
    HermiteCoeffs(std::initializer_list<double> coeffs);

    /// value * H̄_n
    static HermiteCoeffs basis(std::size_t n, double value = 1.0);

    [[nodiscard]] double operator[](std::size_t k) const noexcept {
        return k < coeffs_.size() ? coeffs_[k] : 0.0;
    }
    [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }
    [[nodiscard]] bool is_zero() const noexcept { return coeffs_.empty(); }
    /// Largest index with a nonzero coefficient; 0 for the zero function.
    [[nodiscard]] std::size_t degree() const noexcept {
        return coeffs_.empty() ? 0 : coeffs_.size() - 1;
    }
    [[nodiscard]] std::span<const double> values() const noexcept { return coeffs_; }

    /// L2(mu) norm, equal to the Euclidean norm of the coefficients.
    [[nodiscard]] double norm() const noexcept;
    /// Euclidean norm of coefficients with index >= `from`.
    [[nodiscard]] double tail_norm(std::size_t from) const noexcept;
    /// Pointwise value sum_k g_k H̄_k(x).
    [[nodiscard]] double evaluate(double x) const noexcept;

    friend bool operator==(const HermiteCoeffs&, const HermiteCoeffs&) = default;

private:
    std::vector<double> coeffs_;
};

/// H̄_n(x) by the normalized three-term recurrence
/// H̄_{n+1} = (x H̄_n - sqrt(n) H̄_{n-1}) / sqrt(n+1).
[[nodiscard]] double eval_hermite(std::size_t n, double x) noexcept;

/// H̄_0(x), ..., H̄_{n_max}(x) written into `out` (size n_max + 1).
void eval_hermite_all(std::size_t n_max, double x, std::span<double> out) noexcept;

inline constexpr std::size_t kMaxMonomialDegree = 64;

/// Monomial coefficients (index = power) of sum_k g_k H̄_k.
/// Throws DegreeTooLarge past kMaxMonomialDegree.
[[nodiscard]] std::vector<double> to_monomial(const HermiteCoeffs& g);

/// Inverse of to_monomial, through x^n = sum_j n!/(j!(n-2j)!2^j) H_{n-2j}.
[[nodiscard]] HermiteCoeffs from_monomial(std::span<const double> monomial);

/// ln C(n, k). Exact integer arithmetic for n <= 30, log-gamma otherwise.
[[nodiscard]] double log_binomial(std::size_t n, std::size_t k);

/// D^times g using D H̄_n = sqrt(n) H̄_{n-1}.
[[nodiscard]] HermiteCoeffs derivative(const HermiteCoeffs& g, std::size_t times = 1);

/// Primitive with vanishing mean, applied `times` times: H̄_n -> H̄_{n+1}/sqrt(n+1).
[[nodiscard]] HermiteCoeffs antiderivative(const HermiteCoeffs& g, std::size_t times = 1);

/// Gauss rule for the standard Gaussian weight exp(-x^2/2)/sqrt(2 pi).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights; // positive, summing to 1

    [[nodiscard]] std::size_t order() const noexcept { return nodes.size(); }

    template <class F>
    [[nodiscard]] double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

inline constexpr std::size_t kMaxQuadratureOrder = 256;

/// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix with zero
/// diagonal and off-diagonals sqrt(1), sqrt(2), ...; weights are the squared
/// first components of the normalized eigenvectors.
[[nodiscard]] QuadratureRule gauss_hermite(std::size_t order);

/// Rule of the given order, cached per order. Thread-safe.
[[nodiscard]] const QuadratureRule& cached_gauss_hermite(std::size_t order);

} // namespace hfclt
