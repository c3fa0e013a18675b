#include "hfclt/bounds.hpp"

#include "hfclt/error.hpp"
#include "hfclt/hypothesis.hpp"
#include "hfclt/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hfclt {

namespace {

constexpr std::size_t kMaxRows = 2'000'000;

double row_sum(const PolynomialDensity& phi, double a, std::size_t l, std::size_t K) {
    if (phi.is_gaussian())
        return std::pow(a, 2.0 * static_cast<double>(l));
    const auto N = static_cast<std::size_t>(phi.N());
    const std::size_t lo = std::max(K, l >= N ? l - N : 0);
    double acc = 0.0;
    for (std::size_t j = lo; j <= l + N; ++j)
        acc += std::abs(m_entry(phi.coeffs(), a, l, j));
    return acc;
}

// Upper bound on Sigma(l) valid for every a in (0, 1).
double row_sum_envelope(const PolynomialDensity& phi, double a, std::size_t l) {
    const double N = phi.N();
    const double base = (static_cast<double>(l) + 2.0 * N) * (1.0 - a * a);
    double s = 1.0;
    for (int k = phi.K(); k <= phi.N(); ++k) {
        const double c = std::abs(phi[static_cast<std::size_t>(k)]);
        if (c != 0.0)
            s += std::exp(std::log(c) + 0.5 * k * std::log(base) -
                          0.5 * std::lgamma(k + 1.0));
    }
    return std::exp((2.0 * static_cast<double>(l) - N) * std::log(a) + 2.0 * std::log(s));
}

std::size_t resolve_K(const PolynomialDensity& phi, std::optional<int> K) {
    if (K)
        return static_cast<std::size_t>(*K);
    if (phi.is_gaussian())
        throw Error(ErrorKind::PreconditionViolated, "K must be given for the Gaussian");
    return static_cast<std::size_t>(phi.K());
}

void require_domain(const PolynomialDensity& phi, double a) {
    if (!check_hypothesis(phi).overall)
        throw Error(ErrorKind::HypothesisNotSatisfied, "density fails (H)");
    const double t = barycenter_threshold(phi);
    if (!(a > t && a < 1.0)) {
        throw Error(ErrorKind::BarycenterOutOfRange,
                    "a = " + std::to_string(a) + " outside (" + std::to_string(t) + ", 1)");
    }
}

HermiteCoeffs centered(const HermiteCoeffs& g) {
    std::vector<double> v(g.values().begin(), g.values().end());
    if (!v.empty())
        v[0] = 0.0;
    return HermiteCoeffs(std::move(v));
}

struct AlternativeTerms {
    double lhs;
    double base;
    double extra;
};

AlternativeTerms alternative_terms(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                   double a, int r) {
    if (!(a > 0.0 && a < 1.0))
        throw Error(ErrorKind::PreconditionViolated, "a must lie in (0, 1)");
    if (r < 0)
        throw Error(ErrorKind::PreconditionViolated, "r must be >= 0");
    const auto K = static_cast<std::size_t>(r + 1);
    const double chi_f = f.tail_norm(1);
    const double chi_phi = phi.chi2();
    const double s = std::pow(1.0 - a * a, 0.5 * static_cast<double>(K));
    AlternativeTerms t{};
    t.lhs = barycentric_convolution(f, phi, a).tail_norm(1);
    t.base = std::pow(a, static_cast<double>(K)) * chi_f + s * chi_phi;
    t.extra = s * (chi_f * chi_phi +
                   derivative_norm(f, K) * antiderivative_norm(phi.coeffs(), K));
    return t;
}

} // namespace

BoundCheck make_check(double lhs, double rhs, std::string context) {
    BoundCheck c;
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = rhs - lhs;
    c.holds = lhs <= rhs * (1.0 + 1e-10) + 1e-14;
    c.context = std::move(context);
    return c;
}

BoundCheck improved_poincare(const HermiteCoeffs& f, double t, int r) {
    if (!(t >= 0.0))
        throw Error(ErrorKind::PreconditionViolated, "t must be >= 0");
    for (int k = 1; k <= r; ++k) {
        if (f[static_cast<std::size_t>(k)] != 0.0) {
            throw Error(ErrorKind::SpectralGapViolation,
                        "coefficient " + std::to_string(k) + " is nonzero");
        }
    }
    double lhs = 0.0;
    double var = 0.0;
    for (std::size_t k = static_cast<std::size_t>(r) + 1; k < f.size(); ++k) {
        const double c2 = f[k] * f[k];
        lhs += c2 * std::exp(-2.0 * static_cast<double>(k) * t);
        var += c2;
    }
    const double rhs = std::exp(-2.0 * (r + 1) * t) * var;
    return make_check(lhs, rhs, "t=" + std::to_string(t) + " r=" + std::to_string(r));
}

double gershgorin_row_sum(const PolynomialDensity& phi, double a, std::size_t l) {
    if (!(a > 0.0 && a < 1.0))
        throw Error(ErrorKind::PreconditionViolated, "a must lie in (0, 1)");
    const std::size_t K = phi.is_gaussian() ? 0 : static_cast<std::size_t>(phi.K());
    return row_sum(phi, a, l, K);
}

RowSumSup sup_row_sum(const PolynomialDensity& phi, double a, std::optional<int> K) {
    if (!(a > 0.0 && a < 1.0))
        throw Error(ErrorKind::PreconditionViolated, "a must lie in (0, 1)");
    const std::size_t k0 = resolve_K(phi, K);
    RowSumSup out;
    out.value = -1.0;
    if (phi.is_gaussian()) {
        out.value = std::pow(a, 2.0 * static_cast<double>(k0));
        out.argmax = out.last_l = k0;
        out.certified = true;
        return out;
    }
    const double turn = phi.N() / (-2.0 * std::log(a)) - 2.0 * phi.N();
    for (std::size_t l = k0; l < k0 + kMaxRows; ++l) {
        const double s = row_sum(phi, a, l, k0);
        if (s > out.value) {
            out.value = s;
            out.argmax = l;
        }
        out.last_l = l;
        if (static_cast<double>(l) > turn && row_sum_envelope(phi, a, l + 1) <= out.value) {
            out.certified = true;
            break;
        }
    }
    return out;
}

double poincare_like_bound(const PolynomialDensity& phi, double a, std::optional<int> K) {
    require_domain(phi, a);
    const double k = static_cast<double>(resolve_K(phi, K));
    const double d = d_phi(phi, a);
    return std::pow(a, k) * (1.0 + d) * (1.0 + d);
}

double poincare_proof_bound(const PolynomialDensity& phi, double a, std::optional<int> K) {
    require_domain(phi, a);
    const double k = static_cast<double>(resolve_K(phi, K));
    const double d = d_phi(phi, a);
    return std::pow(a, 2.0 * k) * (1.0 + d) * (1.0 + d);
}

int matched_order(const HermiteCoeffs& f, double tol) {
    for (std::size_t k = 1; k < f.size(); ++k) {
        if (std::abs(f[k]) > tol)
            return static_cast<int>(k) - 1;
    }
    return PolynomialDensity::kInfinite;
}

BoundCheck er_inequality(const HermiteCoeffs& f, const PolynomialDensity& phi, double a) {
    if (std::abs(f[0] - 1.0) > 1e-12)
        throw Error(ErrorKind::PreconditionViolated, "f is not normalized (f_0 != 1)");
    require_domain(phi, a);
    const double tol = 1e-12 * std::max(1.0, f.norm());
    const int r_f = matched_order(f, tol);
    int r = phi.r();
    if (phi.is_gaussian())
        r = r_f;
    else if (r_f < r)
        throw Error(ErrorKind::PreconditionViolated,
                    "f matches moments only to order " + std::to_string(r_f) +
                        " < " + std::to_string(r));

    const double lhs = barycentric_convolution(f, phi, a).tail_norm(1);
    double rhs = 0.0;
    if (r != PolynomialDensity::kInfinite) {
        const double K = r + 1.0;
        rhs = std::pow(a, K) * (1.0 + d_phi(phi, a)) * f.tail_norm(1) +
              std::pow(1.0 - a * a, 0.5 * K) * phi.chi2();
    }
    return make_check(lhs, rhs, "a=" + std::to_string(a));
}

double derivative_norm(const HermiteCoeffs& g, std::size_t m) {
    return derivative(centered(g), m).norm();
}

double antiderivative_norm(const HermiteCoeffs& g, std::size_t m) {
    return antiderivative(centered(g), m).norm();
}

BoundCheck alternative_bound(const HermiteCoeffs& f, const PolynomialDensity& phi, double a,
                             int r, double c_r) {
    const auto t = alternative_terms(f, phi, a, r);
    return make_check(t.lhs, t.base + c_r * t.extra,
                      "a=" + std::to_string(a) + " c_r=" + std::to_string(c_r));
}

double alternative_required_constant(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                     double a, int r) {
    const auto t = alternative_terms(f, phi, a, r);
    if (t.lhs <= t.base)
        return 0.0;
    if (t.extra <= 0.0)
        return std::numeric_limits<double>::infinity();
    return (t.lhs - t.base) / t.extra;
}

double mass_defect(const PolynomialDensity& phi, double a) {
    const double s = 1.0 - a * a;
    double acc = 0.0;
    double p = 1.0;
    for (std::size_t k = 1; k < phi.coeffs().size(); ++k) {
        p *= s;
        acc += p * phi[k] * phi[k];
    }
    return std::sqrt(acc);
}

TriangleSplit triangle_split(const HermiteCoeffs& f, const PolynomialDensity& phi, double a) {
    TriangleSplit t;
    t.total = barycentric_convolution(f, phi, a).tail_norm(1);
    t.centered = barycentric_convolution(centered(f), phi, a).norm();
    t.defect = barycentric_convolution(HermiteCoeffs{1.0}, phi, a).tail_norm(1);
    return t;
}

} // namespace hfclt
