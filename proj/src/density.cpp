#include "hfclt/density.hpp"

#include "hfclt/error.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace hfclt {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr std::size_t kGridPoints = 10000;
constexpr double kRootImagTol = 1e-7;
constexpr double kRootPairTol = 1e-7;
constexpr double kTailTarget = 1e-13;

double gaussian_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double horner(std::span<const double> poly, double x) noexcept {
    double acc = 0.0;
    for (std::size_t i = poly.size(); i-- > 0;)
        acc = acc * x + poly[i];
    return acc;
}

// sum_{k>=1} phi_k H̄_{k-1}(x) / sqrt(k)
double cdf_correction(const HermiteCoeffs& c, double x) noexcept {
    double acc = 0.0;
    double prev = 0.0;
    double cur = 1.0; // H̄_0
    for (std::size_t k = 1; k < c.size(); ++k) {
        acc += c[k] * cur / std::sqrt(static_cast<double>(k));
        const double next = (x * cur - std::sqrt(static_cast<double>(k - 1)) * prev) /
                            std::sqrt(static_cast<double>(k));
        prev = cur;
        cur = next;
    }
    return acc;
}

// Real roots of the monomial polynomial (leading coefficient nonzero),
// including near-real complex pairs that stand for a double root.
std::vector<double> near_real_roots(std::span<const double> poly) {
    const std::size_t deg = poly.size() - 1;
    if (deg == 0)
        return {};
    const auto n = static_cast<Eigen::Index>(deg);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i)
        companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        companion(i, n - 1) = -poly[static_cast<std::size_t>(i)] / poly[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::NoConvergence, "companion eigenvalues failed");
    std::vector<double> roots;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto z = solver.eigenvalues()[i];
        if (std::abs(z.imag()) <= kRootImagTol * (1.0 + std::abs(z.real())))
            roots.push_back(z.real());
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Most negative point of `f` on a uniform grid over [lo, hi].
template <class F>
std::pair<double, double> grid_minimum(F&& f, double lo, double hi, std::size_t points) {
    double best_x = lo;
    double best_v = f(lo);
    for (std::size_t i = 1; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const double v = f(x);
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return {best_x, best_v};
}

} // namespace

double PolynomialDensity::max_abs_coeff() const noexcept {
    double m = 0.0;
    for (std::size_t k = 1; k < coeffs_.size(); ++k)
        m = std::max(m, std::abs(coeffs_[k]));
    return m;
}

PolynomialDensity build_density(const HermiteCoeffs& raw) {
    if (raw.is_zero() || std::abs(raw[0] - 1.0) > 1e-12) {
        throw Error(ErrorKind::MassNotOne,
                    "coefficient of H̄_0 must be 1, got " + std::to_string(raw[0]));
    }
    std::vector<double> c(raw.values().begin(), raw.values().end());
    c[0] = 1.0;

    PolynomialDensity phi;
    phi.coeffs_ = HermiteCoeffs(std::move(c));
    phi.N_ = static_cast<int>(phi.coeffs_.degree());
    if (phi.N_ == 0)
        return phi;

    for (std::size_t k = 1; k < phi.coeffs_.size(); ++k) {
        if (phi.coeffs_[k] != 0.0) {
            phi.K_ = static_cast<int>(k);
            break;
        }
    }
    phi.chi2_ = phi.coeffs_.tail_norm(1);

    const double lead = phi.coeffs_[static_cast<std::size_t>(phi.N_)];
    if (phi.N_ % 2 == 1) {
        // H̄_N is odd: the sign of phi at -inf is -sign(lead).
        double x = lead > 0 ? -1.0 : 1.0;
        while (phi.evaluate(x) >= 0.0 && std::abs(x) < 1e6)
            x *= 2.0;
        throw NotADensityError(x, "odd leading degree " + std::to_string(phi.N_) +
                                      " forces negativity at infinity",
                               ErrorKind::OddLeadingDegree);
    }
    if (lead < 0.0) {
        double x = 1.0;
        while (phi.evaluate(x) >= 0.0 && x < 1e6)
            x *= 2.0;
        throw NotADensityError(x, "negative leading coefficient");
    }

    const auto poly = to_monomial(phi.coeffs_);
    const auto f = [&](double x) { return horner(poly, x); };

    // Every real root must come in pairs (even multiplicity).
    const auto roots = near_real_roots(poly);
    for (std::size_t i = 0; i < roots.size();) {
        std::size_t j = i + 1;
        while (j < roots.size() &&
               roots[j] - roots[j - 1] <= kRootPairTol * (1.0 + std::abs(roots[j])))
            ++j;
        if ((j - i) % 2 == 1) {
            const double center = roots[i];
            auto [wx, wv] = grid_minimum(f, center - 1e-2, center + 1e-2, 2001);
            (void)wv;
            throw NotADensityError(wx, "real root of odd multiplicity near " +
                                           std::to_string(center));
        }
        i = j;
    }

    const double R = 2.0 * std::sqrt(2.0 * phi.N_ + 2.0);
    const double tol = -1e-10 * (1.0 + phi.max_abs_coeff());
    auto [wx, wv] = grid_minimum([&](double x) { return phi.evaluate(x); }, -R, R, kGridPoints);
    if (wv < tol) {
        throw NotADensityError(wx, "density value " + std::to_string(wv) + " at x = " +
                                       std::to_string(wx));
    }
    return phi;
}

std::vector<double> moments(const PolynomialDensity& phi, std::size_t up_to) {
    const std::size_t order = (static_cast<std::size_t>(phi.N()) + up_to) / 2 + 1;
    const auto& rule = cached_gauss_hermite(order);
    std::vector<double> out(up_to + 1, 0.0);
    for (std::size_t i = 0; i < rule.order(); ++i) {
        const double x = rule.nodes[i];
        const double w = rule.weights[i] * phi.evaluate(x);
        double p = 1.0;
        for (std::size_t k = 0; k <= up_to; ++k) {
            out[k] += w * p;
            p *= x;
        }
    }
    return out;
}

double density_cdf(const PolynomialDensity& phi, double x) noexcept {
    const double base = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    return base - gaussian_pdf(x) * cdf_correction(phi.coeffs(), x);
}

double density_upper_tail(const PolynomialDensity& phi, double x) noexcept {
    const double base = 0.5 * std::erfc(x / std::numbers::sqrt2);
    return base + gaussian_pdf(x) * cdf_correction(phi.coeffs(), x);
}

double density_pdf(const PolynomialDensity& phi, double x) noexcept {
    return phi.evaluate(x) * gaussian_pdf(x);
}

CdfTable build_cdf_table(const PolynomialDensity& phi) {
    double R = 2.0 * std::sqrt(2.0 * phi.N() + 2.0);
    while (density_cdf(phi, -R) + density_upper_tail(phi, R) > kTailTarget)
        R += 0.25;

    constexpr std::size_t kIntervals = 4096;
    CdfTable table;
    table.tail_mass = std::max(0.0, density_cdf(phi, -R)) +
                      std::max(0.0, density_upper_tail(phi, R));
    table.abscissae.reserve(kIntervals + 1);
    table.cdf.reserve(kIntervals + 1);
    for (std::size_t i = 0; i <= kIntervals; ++i) {
        const double x = -R + 2.0 * R * static_cast<double>(i) / kIntervals;
        const double F = x <= 0.0 ? density_cdf(phi, x) : 1.0 - density_upper_tail(phi, x);
        // Drop points that do not increase in floating point.
        if (!table.cdf.empty() && F <= table.cdf.back())
            continue;
        table.abscissae.push_back(x);
        table.cdf.push_back(F);
    }
    return table;
}

DensitySampler::DensitySampler(const PolynomialDensity& phi)
    : phi_(phi), table_(build_cdf_table(phi)) {}

double DensitySampler::quantile(double u) const noexcept {
    const auto& xs = table_.abscissae;
    const auto& Fs = table_.cdf;
    if (u <= Fs.front())
        return xs.front();
    if (u >= Fs.back())
        return xs.back();
    const auto it = std::upper_bound(Fs.begin(), Fs.end(), u);
    const auto hi = static_cast<std::size_t>(it - Fs.begin());
    const std::size_t lo = hi - 1;
    double a = xs[lo];
    double b = xs[hi];
    double x = a + (b - a) * (u - Fs[lo]) / (Fs[hi] - Fs[lo]);
    for (int iter = 0; iter < 60; ++iter) {
        const double F = x <= 0.0 ? density_cdf(phi_, x) : 1.0 - density_upper_tail(phi_, x);
        const double g = F - u;
        if (g > 0.0)
            b = x;
        else
            a = x;
        const double p = density_pdf(phi_, x);
        double next = p > 0.0 ? x - g / p : 0.5 * (a + b);
        if (!(next > a && next < b))
            next = 0.5 * (a + b);
        if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x)) || b - a <= 1e-15 * (1.0 + std::abs(x)))
            return next;
        x = next;
    }
    return x;
}

std::vector<double> sample(const PolynomialDensity& phi, std::size_t count, std::uint64_t seed) {
    DensitySampler sampler(phi);
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (auto& x : out)
        x = sampler.quantile(unit_uniform(rng()));
    return out;
}

DistanceDiagnostics distance_diagnostics(const PolynomialDensity& phi) {
    DistanceDiagnostics d;
    d.chi2 = phi.chi2();
    const std::size_t order = static_cast<std::size_t>(phi.N()) + 1;
    const auto& rule = cached_gauss_hermite(std::max<std::size_t>(order, 2));
    const double sq = rule.integrate([&](double x) {
        const double v = phi.evaluate(x) - 1.0;
        return v * v;
    });
    d.chi2_quadrature = std::sqrt(std::max(0.0, sq));

    // |phi - 1| and phi log phi are not polynomial: composite Simpson in
    // Lebesgue measure over a range carrying all but ~1e-13 of the mass.
    double L = 2.0 * std::sqrt(2.0 * phi.N() + 2.0);
    while (0.5 * std::erfc(L / std::numbers::sqrt2) > kTailTarget ||
           density_cdf(phi, -L) + density_upper_tail(phi, L) > kTailTarget)
        L += 0.25;
    constexpr std::size_t kPanels = 40000;
    const double h = 2.0 * L / kPanels;
    double tv = 0.0;
    double ent = 0.0;
    for (std::size_t i = 0; i <= kPanels; ++i) {
        const double x = -L + h * static_cast<double>(i);
        const double w = (i == 0 || i == kPanels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double v = phi.evaluate(x);
        const double g = gaussian_pdf(x);
        tv += w * std::abs(v - 1.0) * g;
        if (v > 0.0)
            ent += w * v * std::log(v) * g;
    }
    d.total_variation = tv * h / 3.0;
    d.relative_entropy = ent * h / 3.0;
    return d;
}

HermiteCoeffs parse_density_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("density JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array())
        throw Error(ErrorKind::InvalidConfig, "density JSON must be {\"coeffs\": [...]}");
    std::vector<double> c;
    for (const auto& v : j["coeffs"]) {
        if (!v.is_number())
            throw Error(ErrorKind::InvalidConfig, "density coefficients must be numbers");
        c.push_back(v.get<double>());
    }
    return HermiteCoeffs(std::move(c));
}

HermiteCoeffs read_density_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_density_json(ss.str());
}

} // namespace hfclt
