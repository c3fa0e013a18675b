#include "hfclt/operators.hpp"

#include "hfclt/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hfclt {

namespace {

// exponent * log(base) with 0 * log(0) = 0.
double log_pow(double base, double exponent) noexcept {
    if (exponent == 0.0)
        return 0.0;
    if (base <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return exponent * std::log(base);
}

void check_parameter(double a) {
    if (!(a >= 0.0 && a <= 1.0))
        throw Error(ErrorKind::PreconditionViolated, "a = " + std::to_string(a) + " outside [0, 1]");
}

void check_dim(const PolynomialDensity& phi, std::size_t dim) {
    if (dim < static_cast<std::size_t>(phi.N()) + 1) {
        throw Error(ErrorKind::DimensionTooSmall,
                    "dim " + std::to_string(dim) + " < N + 1 = " + std::to_string(phi.N() + 1));
    }
}

} // namespace

const char* to_string(OperatorKind kind) noexcept {
    switch (kind) {
    case OperatorKind::Q: return "Q";
    case OperatorKind::QStar: return "Qstar";
    case OperatorKind::M: return "M";
    case OperatorKind::OU: return "OU";
    }
    return "?";
}

BandedOperator::BandedOperator(OperatorKind kind, std::size_t dim, std::size_t lower,
                               std::size_t upper)
    : kind_(kind), dim_(dim), lower_(lower), upper_(upper),
      band_(dim * (lower + upper + 1), 0.0) {}

double BandedOperator::operator()(std::size_t row, std::size_t col) const noexcept {
    if (!in_band(row, col))
        return 0.0;
    return band_[row * (lower_ + upper_ + 1) + (col + lower_ - row)];
}

void BandedOperator::set(std::size_t row, std::size_t col, double value) {
    if (!in_band(row, col)) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "(" + std::to_string(row) + ", " + std::to_string(col) + ") outside band");
    }
    band_[row * (lower_ + upper_ + 1) + (col + lower_ - row)] = value;
}

HermiteCoeffs BandedOperator::apply(const HermiteCoeffs& f) const {
    if (!f.is_zero() && f.degree() >= dim_) {
        throw Error(ErrorKind::TruncationOverflow,
                    "degree " + std::to_string(f.degree()) + " >= dim " + std::to_string(dim_));
    }
    std::vector<double> out(dim_, 0.0);
    for (std::size_t row = 0; row < dim_; ++row) {
        const std::size_t lo = row >= lower_ ? row - lower_ : 0;
        const std::size_t hi = std::min(dim_ - 1, row + upper_);
        double acc = 0.0;
        for (std::size_t col = lo; col <= hi && col < f.size(); ++col)
            acc += (*this)(row, col) * f[col];
        out[row] = acc;
    }
    return HermiteCoeffs(std::move(out));
}

BandedOperator BandedOperator::transpose() const {
    OperatorKind k = kind_;
    if (k == OperatorKind::Q)
        k = OperatorKind::QStar;
    else if (k == OperatorKind::QStar)
        k = OperatorKind::Q;
    BandedOperator t(k, dim_, upper_, lower_);
    for (std::size_t row = 0; row < dim_; ++row) {
        const std::size_t lo = row >= lower_ ? row - lower_ : 0;
        const std::size_t hi = std::min(dim_ - 1, row + upper_);
        for (std::size_t col = lo; col <= hi; ++col)
            t.set(col, row, (*this)(row, col));
    }
    return t;
}

void BandedOperator::scale(double factor) noexcept {
    for (double& v : band_)
        v *= factor;
}

double q_entry(const HermiteCoeffs& phi, double a, std::size_t m, std::size_t n) {
    if (m > n)
        return 0.0;
    const double c = phi[n - m];
    if (c == 0.0)
        return 0.0;
    const double log_v = 0.5 * log_binomial(n, m) + log_pow(a, static_cast<double>(m)) +
                         log_pow(1.0 - a * a, 0.5 * static_cast<double>(n - m)) +
                         std::log(std::abs(c));
    return std::copysign(std::exp(log_v), c);
}

double m_entry(const HermiteCoeffs& phi, double a, std::size_t l, std::size_t j) {
    if (j > l)
        std::swap(l, j);
    const std::size_t i = l - j; // entry (l, l - i)
    const std::size_t N = phi.degree();
    if (i > N)
        return 0.0;
    const double one_minus = 1.0 - a * a;
    const double log_a = log_pow(a, static_cast<double>(2 * l - i));
    double acc = 0.0;
    for (std::size_t k = 0; k + i <= N; ++k) {
        const double p = phi[k + i] * phi[k];
        if (p == 0.0)
            continue;
        const double log_v = 0.5 * log_binomial(k + l, k) + 0.5 * log_binomial(k + l, k + i) +
                             log_pow(one_minus, 0.5 * static_cast<double>(2 * k + i)) + log_a +
                             std::log(std::abs(p));
        acc += std::copysign(std::exp(log_v), p);
    }
    return acc;
}

BandedOperator build_q_matrix(const PolynomialDensity& phi, double a, std::size_t dim) {
    check_parameter(a);
    check_dim(phi, dim);
    const auto N = static_cast<std::size_t>(phi.N());
    BandedOperator q(OperatorKind::Q, dim, 0, N);
    for (std::size_t m = 0; m < dim; ++m) {
        for (std::size_t n = m; n < dim && n <= m + N; ++n)
            q.set(m, n, q_entry(phi.coeffs(), a, m, n));
    }
    return q;
}

BandedOperator build_q_star_matrix(const PolynomialDensity& phi, double a, std::size_t dim) {
    return build_q_matrix(phi, a, dim).transpose();
}

BandedOperator build_m_matrix(const PolynomialDensity& phi, double a, std::size_t dim) {
    check_parameter(a);
    check_dim(phi, dim);
    const auto N = static_cast<std::size_t>(phi.N());
    BandedOperator m(OperatorKind::M, dim, N, N);
    for (std::size_t l = 0; l < dim; ++l) {
        for (std::size_t j = l >= N ? l - N : 0; j <= l; ++j) {
            const double v = m_entry(phi.coeffs(), a, l, j);
            m.set(l, j, v);
            m.set(j, l, v);
        }
    }
    return m;
}

BandedOperator m_matrix_by_product(const PolynomialDensity& phi, double a, std::size_t dim) {
    const auto q = build_q_matrix(phi, a, dim);
    const auto N = static_cast<std::size_t>(phi.N());
    BandedOperator m(OperatorKind::M, dim, N, N);
    for (std::size_t l = 0; l < dim; ++l) {
        for (std::size_t j = l >= N ? l - N : 0; j <= l; ++j) {
            double acc = 0.0;
            for (std::size_t n = l; n < dim && n <= j + N; ++n)
                acc += q(l, n) * q(j, n);
            m.set(l, j, acc);
            m.set(j, l, acc);
        }
    }
    return m;
}

BandedOperator build_ou_matrix(double t, std::size_t dim) {
    BandedOperator ou(OperatorKind::OU, dim, 0, 0);
    for (std::size_t n = 0; n < dim; ++n)
        ou.set(n, n, std::exp(-static_cast<double>(n) * t));
    return ou;
}

HermiteCoeffs apply_adjoint(const BandedOperator& q, const HermiteCoeffs& f) {
    if (q.kind() != OperatorKind::Q)
        throw Error(ErrorKind::PreconditionViolated, "apply_adjoint expects an operator of kind Q");
    const std::size_t N = q.upper_bandwidth();
    if (!f.is_zero() && f.degree() + N >= q.dim()) {
        throw Error(ErrorKind::TruncationOverflow,
                    "degree " + std::to_string(f.degree()) + " + N " + std::to_string(N) +
                        " does not fit in dim " + std::to_string(q.dim()));
    }
    const std::size_t out_size = f.is_zero() ? 0 : f.degree() + N + 1;
    std::vector<double> out(out_size, 0.0);
    for (std::size_t m = 0; m < f.size(); ++m) {
        const double fm = f[m];
        if (fm == 0.0)
            continue;
        for (std::size_t l = m; l <= m + N; ++l)
            out[l] += q(m, l) * fm;
    }
    return HermiteCoeffs(std::move(out));
}

Truncated truncate(const HermiteCoeffs& g, std::size_t dim, double floor) {
    std::vector<double> kept(std::min(dim, g.size()), 0.0);
    double dropped_sq = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double v = g[k];
        if (k < dim && std::abs(v) >= floor)
            kept[k] = v;
        else
            dropped_sq += v * v;
    }
    return {HermiteCoeffs(std::move(kept)), std::sqrt(dropped_sq)};
}

HermiteCoeffs barycentric_convolution(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                      double a) {
    check_parameter(a);
    if (f.is_zero())
        return {};
    const auto N = static_cast<std::size_t>(phi.N());
    std::vector<double> out(f.degree() + N + 1, 0.0);
    for (std::size_t m = 0; m < f.size(); ++m) {
        if (f[m] == 0.0)
            continue;
        for (std::size_t l = m; l <= m + N; ++l)
            out[l] += q_entry(phi.coeffs(), a, m, l) * f[m];
    }
    return HermiteCoeffs(std::move(out));
}

HermiteCoeffs ou_apply(const HermiteCoeffs& f, double t) {
    if (!(t >= 0.0))
        throw Error(ErrorKind::PreconditionViolated, "t must be >= 0");
    std::vector<double> out(f.values().begin(), f.values().end());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] *= std::exp(-static_cast<double>(k) * t);
    return HermiteCoeffs(std::move(out));
}

HilbertSchmidtSum hilbert_schmidt_sum(const PolynomialDensity& phi, double a, std::size_t dim) {
    check_parameter(a);
    HilbertSchmidtSum out;
    double last = 0.0;
    double before_last = 0.0;
    for (std::size_t n = 0; n < dim; ++n) {
        const double d = m_entry(phi.coeffs(), a, n, n);
        out.partial += d;
        before_last = last;
        last = d;
    }
    // Diagonal entries behave like poly(n) a^{2n}; extrapolate geometrically
    // with the observed ratio of the last two terms.
    const double ratio = before_last > 0.0 ? last / before_last : 0.0;
    if (a >= 0.999 || ratio >= 1.0) {
        out.tail_estimate = std::numeric_limits<double>::infinity();
        out.converged = false;
        return out;
    }
    out.tail_estimate = last * ratio / (1.0 - ratio);
    out.converged = out.tail_estimate <= 1e-8 * out.partial;
    return out;
}

VkNorm operator_norm_on_vk(const PolynomialDensity& phi, double a, std::size_t K,
                           std::size_t dim) {
    check_parameter(a);
    const auto N = static_cast<std::size_t>(phi.N());
    if (dim < K + 4 * N || dim <= K) {
        throw Error(ErrorKind::DimensionTooSmall,
                    "dim " + std::to_string(dim) + " < K + 4N = " + std::to_string(K + 4 * N));
    }
    const auto m = build_m_matrix(phi, a, dim);
    const std::size_t size = dim - K;

    std::vector<double> v(size);
    for (std::size_t i = 0; i < size; ++i)
        v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
    auto normalize = [](std::vector<double>& x) {
        double s = 0.0;
        for (double e : x)
            s += e * e;
        s = std::sqrt(s);
        if (s > 0.0)
            for (double& e : x)
                e /= s;
        return s;
    };
    normalize(v);

    std::vector<double> w(size);
    double lambda = 0.0;
    VkNorm out;
    out.dim = dim;
    constexpr std::size_t kMaxIterations = 100000;
    for (std::size_t it = 1; it <= kMaxIterations; ++it) {
        for (std::size_t i = 0; i < size; ++i) {
            const std::size_t row = i + K;
            const std::size_t lo = std::max(K, row >= N ? row - N : 0);
            const std::size_t hi = std::min(dim - 1, row + N);
            double acc = 0.0;
            for (std::size_t col = lo; col <= hi; ++col)
                acc += m(row, col) * v[col - K];
            w[i] = acc;
        }
        double rq = 0.0;
        for (std::size_t i = 0; i < size; ++i)
            rq += v[i] * w[i];
        const double wn = normalize(w);
        if (wn == 0.0) {
            out.norm = 0.0;
            out.iterations = it;
            return out;
        }
        std::swap(v, w);
        if (it > 1 && std::abs(rq - lambda) <= 1e-12 * std::abs(rq)) {
            out.norm = std::sqrt(std::max(0.0, rq));
            out.iterations = it;
            return out;
        }
        lambda = rq;
    }
    throw Error(ErrorKind::NoConvergence, "power iteration did not converge");
}

} // namespace hfclt
