#include "hfclt/oracle.hpp"

#include "hfclt/error.hpp"
#include "hfclt/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>

namespace hfclt {

namespace {

constexpr std::size_t kChunk = 8192;

std::size_t required_order(const HermiteCoeffs& f, const PolynomialDensity& phi) {
    return (f.degree() + static_cast<std::size_t>(phi.N())) / 2 + 1;
}

void check_order(const HermiteCoeffs& f, const PolynomialDensity& phi, std::size_t order) {
    const std::size_t need = required_order(f, phi);
    if (order < need) {
        throw Error(ErrorKind::OrderTooSmall,
                    "order " + std::to_string(order) + " < " + std::to_string(need));
    }
}

// Running mean and co-moment matrix of the vector (H̄_0(y), ..., H̄_k(y)).
struct Moments {
    std::size_t count = 0;
    std::vector<double> mean;
    std::vector<double> comoment; // row-major (k+1) x (k+1)

    explicit Moments(std::size_t width) : mean(width, 0.0), comoment(width * width, 0.0) {}

    void add(const std::vector<double>& v) {
        ++count;
        const std::size_t w = mean.size();
        std::vector<double> delta(w);
        for (std::size_t i = 0; i < w; ++i) {
            delta[i] = v[i] - mean[i];
            mean[i] += delta[i] / static_cast<double>(count);
        }
        for (std::size_t i = 0; i < w; ++i)
            for (std::size_t j = 0; j < w; ++j)
                comoment[i * w + j] += delta[i] * (v[j] - mean[j]);
    }

    void merge(const Moments& o) {
        if (o.count == 0)
            return;
        const std::size_t w = mean.size();
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(o.count);
        const double nt = na + nb;
        std::vector<double> delta(w);
        for (std::size_t i = 0; i < w; ++i)
            delta[i] = o.mean[i] - mean[i];
        for (std::size_t i = 0; i < w; ++i)
            for (std::size_t j = 0; j < w; ++j)
                comoment[i * w + j] += o.comoment[i * w + j] + delta[i] * delta[j] * na * nb / nt;
        for (std::size_t i = 0; i < w; ++i)
            mean[i] += delta[i] * nb / nt;
        count += o.count;
    }
};

} // namespace

double quadrature_qstar(const HermiteCoeffs& f, const PolynomialDensity& phi, double a, double x,
                        std::size_t order) {
    check_order(f, phi, order);
    const auto& rule = cached_gauss_hermite(order);
    const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
    return rule.integrate(
        [&](double y) { return f.evaluate(a * x - b * y) * phi.evaluate(b * x + a * y); });
}

double quadrature_q(const HermiteCoeffs& f, const PolynomialDensity& phi, double a, double x,
                    std::size_t order) {
    check_order(f, phi, order);
    const auto& rule = cached_gauss_hermite(order);
    const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
    return rule.integrate([&](double y) { return f.evaluate(a * x + b * y) * phi.evaluate(y); });
}

double quadrature_q_entry(const PolynomialDensity& phi, double a, std::size_t m, std::size_t n) {
    const auto hn = HermiteCoeffs::basis(n);
    const std::size_t inner = required_order(hn, phi);
    const auto& outer = cached_gauss_hermite((m + n) / 2 + 1);
    return outer.integrate(
        [&](double x) { return quadrature_q(hn, phi, a, x, inner) * eval_hermite(m, x); });
}

HermiteCoeffs quadrature_project(const std::function<double(double)>& F, std::size_t k_max,
                                 std::size_t order) {
    const auto& rule = cached_gauss_hermite(order);
    std::vector<double> out(k_max + 1, 0.0);
    std::vector<double> h(k_max + 1);
    for (std::size_t i = 0; i < rule.order(); ++i) {
        const double x = rule.nodes[i];
        const double v = F(x) * rule.weights[i];
        eval_hermite_all(k_max, x, h);
        for (std::size_t k = 0; k <= k_max; ++k)
            out[k] += v * h[k];
    }
    return HermiteCoeffs(std::move(out));
}

HermiteCoeffs quadrature_convolution(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                     double a) {
    const std::size_t deg = f.degree() + static_cast<std::size_t>(phi.N());
    const std::size_t inner = required_order(f, phi);
    auto g = quadrature_project(
        [&](double x) { return quadrature_qstar(f, phi, a, x, inner); }, deg, deg + 1);
    // Round-off leaves ~1e-17 entries in place of exact zeros.
    std::vector<double> v(g.values().begin(), g.values().end());
    const double scale = g.norm();
    for (double& c : v) {
        if (std::abs(c) < 1e-15 * scale)
            c = 0.0;
    }
    return HermiteCoeffs(std::move(v));
}

HermiteCoeffs quadrature_chain(const InnovationSchedule& schedule, std::size_t n) {
    HermiteCoeffs f{1.0};
    for (std::size_t i = 1; i <= n; ++i) {
        const double a = std::sqrt(1.0 - 1.0 / static_cast<double>(i));
        f = quadrature_convolution(f, schedule.at(i), a);
    }
    return f;
}

McEstimate mc_coefficients(const InnovationSchedule& schedule, std::size_t n, std::size_t k_max,
                           std::size_t reps, std::uint64_t seed, unsigned threads) {
    if (reps < 10000)
        throw Error(ErrorKind::PreconditionViolated, "reps must be >= 10^4");
    if (n < 1)
        throw Error(ErrorKind::PreconditionViolated, "n must be >= 1");

    const auto& dens = schedule.densities();
    std::vector<DensitySampler> samplers;
    samplers.reserve(dens.size());
    for (const auto& d : dens)
        samplers.emplace_back(d);
    std::vector<std::size_t> which(n);
    for (std::size_t i = 1; i <= n; ++i)
        which[i - 1] = static_cast<std::size_t>(&schedule.at(i) - dens.data());

    const std::size_t width = k_max + 1;
    const std::size_t chunks = (reps + kChunk - 1) / kChunk;
    std::vector<Moments> partial(chunks, Moments(width));
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

    auto run_chunk = [&](std::size_t c) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
        std::mt19937_64 rng(seq);
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(reps, begin + kChunk);
        std::vector<double> h(width);
        for (std::size_t rep = begin; rep < end; ++rep) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                sum += samplers[which[i]].quantile(unit_uniform(rng()));
            eval_hermite_all(k_max, sum * inv_sqrt_n, h);
            partial[c].add(h);
        }
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < chunks; c += workers)
                    run_chunk(c);
            });
        }
        for (auto& t : pool)
            t.join();
    }

    Moments total(width);
    for (const auto& p : partial)
        total.merge(p);

    McEstimate est;
    est.reps = total.count;
    est.mean = total.mean;
    est.se.resize(width);
    const double denom = static_cast<double>(total.count - 1) * static_cast<double>(total.count);
    for (std::size_t k = 0; k < width; ++k)
        est.se[k] = std::sqrt(std::max(0.0, total.comoment[k * width + k] / denom));

    double s = 0.0;
    double se2 = 0.0;
    for (std::size_t k = 1; k < width; ++k) {
        s += est.mean[k] * est.mean[k] - est.se[k] * est.se[k];
        se2 += est.se[k] * est.se[k];
    }
    est.chi2 = std::sqrt(std::max(0.0, s));
    if (est.chi2 > 0.0) {
        double var = 0.0;
        for (std::size_t i = 1; i < width; ++i)
            for (std::size_t j = 1; j < width; ++j)
                var += est.mean[i] * est.mean[j] * total.comoment[i * width + j] / denom;
        est.chi2_se = std::sqrt(std::max(0.0, var)) / est.chi2;
    } else {
        est.chi2_se = std::sqrt(se2);
    }
    return est;
}

OracleComparison compare(std::string id, double spectral, double oracle, double tolerance) {
    OracleComparison c;
    c.id = std::move(id);
    c.spectral = spectral;
    c.oracle = oracle;
    c.abs_diff = std::abs(spectral - oracle);
    c.tolerance = tolerance;
    c.pass = c.abs_diff <= tolerance;
    return c;
}

std::vector<OracleComparison> oracle_suite(const PolynomialDensity& phi,
                                           const OracleOptions& options) {
    std::vector<OracleComparison> out;
    const auto N = static_cast<std::size_t>(phi.N());

    for (double a : options.a_values) {
        auto q = build_q_matrix(phi, a, std::max<std::size_t>(11, 2 * N + 1));
        if (options.flip_q)
            q.scale(-1.0);
        for (std::size_t m = 0; m <= 10; ++m) {
            for (std::size_t n = 0; n <= 10; ++n) {
                char id[64];
                std::snprintf(id, sizeof id, "q_entry a=%g m=%zu n=%zu", a, m, n);
                out.push_back(compare(id, q(m, n), quadrature_q_entry(phi, a, m, n), 1e-8));
            }
        }
        const auto g = apply_adjoint(q, phi.coeffs());
        const std::size_t order = required_order(phi.coeffs(), phi);
        for (int i = 0; i <= 20; ++i) {
            const double x = -4.0 + 0.4 * i;
            char id[64];
            std::snprintf(id, sizeof id, "qstar a=%g x=%g", a, x);
            out.push_back(
                compare(id, g.evaluate(x), quadrature_qstar(phi.coeffs(), phi, a, x, order), 1e-9));
        }
    }

    const auto schedule = InnovationSchedule::constant(phi);
    std::size_t n_needed = 2;
    for (std::size_t n : options.mc_steps)
        n_needed = std::max(n_needed, n);
    const auto traj = run_chain(schedule, n_needed);

    const auto f2 = quadrature_chain(schedule, 2);
    out.push_back(compare("chi2 f2 quadrature", traj.at(2).chi2, f2.tail_norm(1), 1e-9));

    for (std::size_t n : options.mc_steps) {
        const auto est =
            mc_coefficients(schedule, n, options.mc_k_max, options.reps, options.seed + n);
        for (std::size_t k = 1; k <= options.mc_k_max; ++k) {
            char id[64];
            std::snprintf(id, sizeof id, "mc n=%zu k=%zu", n, k);
            out.push_back(compare(id, traj.at(n).coeffs[k], est.mean[k], 5.0 * est.se[k]));
        }
        if (n == 2)
            out.push_back(compare("mc chi2 f2", traj.at(2).chi2, est.chi2,
                                  std::max(5.0 * est.chi2_se, 1e-12)));
    }
    return out;
}

} // namespace hfclt
