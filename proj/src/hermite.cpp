#include "hfclt/hermite.hpp"

#include "hfclt/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace hfclt {

namespace {

void trim_trailing_zeros(std::vector<double>& c) {
    while (!c.empty() && c.back() == 0.0)
        c.pop_back();
}

} // namespace

HermiteCoeffs::HermiteCoeffs(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    trim_trailing_zeros(coeffs_);
}

HermiteCoeffs::HermiteCoeffs(std::initializer_list<double> coeffs) : coeffs_(coeffs) {
    trim_trailing_zeros(coeffs_);
}

HermiteCoeffs HermiteCoeffs::basis(std::size_t n, double value) {
    std::vector<double> c(n + 1, 0.0);
    c[n] = value;
    return HermiteCoeffs(std::move(c));
}

double HermiteCoeffs::norm() const noexcept { return tail_norm(0); }

double HermiteCoeffs::tail_norm(std::size_t from) const noexcept {
    double acc = 0.0;
    for (std::size_t k = from; k < coeffs_.size(); ++k)
        acc += coeffs_[k] * coeffs_[k];
    return std::sqrt(acc);
}

double HermiteCoeffs::evaluate(double x) const noexcept {
    if (coeffs_.empty())
        return 0.0;
    double prev = 0.0; // H̄_{-1}
    double cur = 1.0;  // H̄_0
    double acc = coeffs_[0];
    for (std::size_t n = 0; n + 1 < coeffs_.size(); ++n) {
        const double next = (x * cur - std::sqrt(static_cast<double>(n)) * prev) /
                            std::sqrt(static_cast<double>(n + 1));
        prev = cur;
        cur = next;
        acc += coeffs_[n + 1] * cur;
    }
    return acc;
}

double eval_hermite(std::size_t n, double x) noexcept {
    double prev = 0.0;
    double cur = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                            std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

void eval_hermite_all(std::size_t n_max, double x, std::span<double> out) noexcept {
    out[0] = 1.0;
    if (n_max == 0)
        return;
    out[1] = x;
    for (std::size_t k = 1; k < n_max; ++k) {
        out[k + 1] = (x * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                     std::sqrt(static_cast<double>(k + 1));
    }
}

std::vector<double> to_monomial(const HermiteCoeffs& g) {
    const std::size_t deg = g.degree();
    if (deg > kMaxMonomialDegree) {
        throw Error(ErrorKind::DegreeTooLarge,
                    "degree " + std::to_string(deg) + " exceeds " +
                        std::to_string(kMaxMonomialDegree));
    }
    std::vector<double> out(deg + 1, 0.0);
    // Monomial coefficients of H̄_{k-1} and H̄_k, advanced by the normalized
    // recurrence.
    std::vector<double> prev(deg + 2, 0.0);
    std::vector<double> cur(deg + 2, 0.0);
    cur[0] = 1.0;
    for (std::size_t k = 0;; ++k) {
        for (std::size_t p = 0; p <= k; ++p)
            out[p] += g[k] * cur[p];
        if (k == deg)
            break;
        std::vector<double> next(deg + 2, 0.0);
        const double sk = std::sqrt(static_cast<double>(k));
        const double sk1 = std::sqrt(static_cast<double>(k + 1));
        for (std::size_t p = 0; p <= k; ++p)
            next[p + 1] += cur[p] / sk1;
        for (std::size_t p = 0; p + 1 <= k; ++p)
            next[p] -= sk * prev[p] / sk1;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return out;
}

HermiteCoeffs from_monomial(std::span<const double> monomial) {
    std::size_t deg = monomial.size();
    while (deg > 0 && monomial[deg - 1] == 0.0)
        --deg;
    if (deg == 0)
        return {};
    --deg;
    if (deg > kMaxMonomialDegree) {
        throw Error(ErrorKind::DegreeTooLarge,
                    "degree " + std::to_string(deg) + " exceeds " +
                        std::to_string(kMaxMonomialDegree));
    }
    std::vector<double> out(deg + 1, 0.0);
    for (std::size_t n = 0; n <= deg; ++n) {
        if (monomial[n] == 0.0)
            continue;
        for (std::size_t j = 0; 2 * j <= n; ++j) {
            const std::size_t m = n - 2 * j;
            // x^n -> n!/(j! m! 2^j) H_m = n!/(j! sqrt(m!) 2^j) H̄_m
            const double log_c = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                                 0.5 * std::lgamma(m + 1.0) - j * std::log(2.0);
            out[m] += monomial[n] * std::exp(log_c);
        }
    }
    return HermiteCoeffs(std::move(out));
}

double log_binomial(std::size_t n, std::size_t k) {
    if (k > n) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "C(" + std::to_string(n) + ", " + std::to_string(k) + ")");
    }
    if (n <= 30) {
        std::uint64_t c = 1;
        const std::size_t kk = std::min(k, n - k);
        for (std::size_t i = 1; i <= kk; ++i)
            c = c * (n - kk + i) / i; // exact: c * (n-kk+i) is divisible by i
        return std::log(static_cast<double>(c));
    }
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

HermiteCoeffs derivative(const HermiteCoeffs& g, std::size_t times) {
    if (times > g.degree() || g.is_zero())
        return {};
    std::vector<double> out(g.size() - times);
    for (std::size_t m = 0; m < out.size(); ++m) {
        // D^t H̄_{m+t} = sqrt((m+t)!/m!) H̄_m
        double log_f = 0.0;
        for (std::size_t j = m + 1; j <= m + times; ++j)
            log_f += std::log(static_cast<double>(j));
        out[m] = g[m + times] * std::exp(0.5 * log_f);
    }
    return HermiteCoeffs(std::move(out));
}

HermiteCoeffs antiderivative(const HermiteCoeffs& g, std::size_t times) {
    if (g.is_zero())
        return {};
    std::vector<double> out(g.size() + times, 0.0);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double log_f = 0.0;
        for (std::size_t j = n + 1; j <= n + times; ++j)
            log_f += std::log(static_cast<double>(j));
        out[n + times] = g[n] * std::exp(-0.5 * log_f);
    }
    return HermiteCoeffs(std::move(out));
}

QuadratureRule gauss_hermite(std::size_t order) {
    if (order < 1 || order > kMaxQuadratureOrder) {
        throw Error(ErrorKind::OrderOutOfRange,
                    "order " + std::to_string(order) + " outside [1, " +
                        std::to_string(kMaxQuadratureOrder) + "]");
    }
    QuadratureRule rule;
    if (order == 1) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(order - 1));
    for (Eigen::Index i = 0; i < sub.size(); ++i)
        sub[i] = std::sqrt(static_cast<double>(i + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::NoConvergence, "Jacobi eigenproblem failed");

    const auto n = static_cast<Eigen::Index>(order);
    rule.nodes.resize(order);
    rule.weights.resize(order);
    // Eigenvector components only carry absolute accuracy, which ruins the
    // tiny outer weights. Polish each node by Newton on H̄_order and take the
    // Christoffel weight 1 / sum_k H̄_k(x)^2 instead.
    std::vector<double> h(order + 1);
    const double s_order = std::sqrt(static_cast<double>(order));
    for (Eigen::Index i = 0; i < n; ++i) {
        double x = solver.eigenvalues()[i];
        for (int it = 0; it < 3; ++it) {
            eval_hermite_all(order, x, h);
            const double dh = s_order * h[order - 1];
            if (dh == 0.0)
                break;
            x -= h[order] / dh;
        }
        eval_hermite_all(order - 1, x, std::span<double>(h.data(), order));
        double sum = 0.0;
        for (std::size_t k = 0; k < order; ++k)
            sum += h[k] * h[k];
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 1.0 / sum;
    }
    // Enforce the exact symmetry of the rule about 0.
    for (std::size_t i = 0; i < order / 2; ++i) {
        const std::size_t j = order - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (order % 2 == 1)
        rule.nodes[order / 2] = 0.0;
    double total = 0.0;
    for (double w : rule.weights)
        total += w;
    for (double& w : rule.weights)
        w /= total;
    return rule;
}

const QuadratureRule& cached_gauss_hermite(std::size_t order) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot)
        slot = std::make_unique<QuadratureRule>(gauss_hermite(order));
    return *slot;
}

} // namespace hfclt
