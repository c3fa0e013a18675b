#pragma once

// Independent paths to the quantities computed in the Hermite domain:
// Gauss-Hermite quadrature of the integral forms of Q and Q*, and Monte Carlo
// estimates of f_{n,k} = E[H̄_k(Y_n)].

#include "hfclt/clt.hpp"
#include "hfclt/density.hpp"
#include "hfclt/hermite.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hfclt {

/// Q*[f](x) = int f(a x - sqrt(1-a^2) y) phi(sqrt(1-a^2) x + a y) dmu(y).
/// Throws OrderTooSmall if order < (degree(f) + N)/2 + 1.
[[nodiscard]] double quadrature_qstar(const HermiteCoeffs& f, const PolynomialDensity& phi,
                                      double a, double x, std::size_t order);

/// Q[f](x) = int f(a x + sqrt(1-a^2) y) phi(y) dmu(y). Same order rule.
[[nodiscard]] double quadrature_q(const HermiteCoeffs& f, const PolynomialDensity& phi, double a,
                                  double x, std::size_t order);

/// int Q[H̄_n] H̄_m dmu by nested quadrature, orders chosen for exactness.
[[nodiscard]] double quadrature_q_entry(const PolynomialDensity& phi, double a, std::size_t m,
                                        std::size_t n);

/// int F H̄_k dmu for k = 0..k_max with a rule of the given order.
[[nodiscard]] HermiteCoeffs quadrature_project(const std::function<double(double)>& F,
                                               std::size_t k_max, std::size_t order);

/// Coefficients of Q*[f] obtained by projecting quadrature_qstar.
[[nodiscard]] HermiteCoeffs quadrature_convolution(const HermiteCoeffs& f,
                                                   const PolynomialDensity& phi, double a);

/// f_n from f_0 = 1 by repeated quadrature_convolution (a_1 = 0).
[[nodiscard]] HermiteCoeffs quadrature_chain(const InnovationSchedule& schedule, std::size_t n);

struct McEstimate {
    std::size_t reps = 0;
    std::vector<double> mean; // k = 0..k_max
    std::vector<double> se;
    double chi2 = 0.0;        // sqrt(sum_{k>=1} (mean_k^2 - se_k^2)), clipped at 0
    double chi2_se = 0.0;     // delta method with the full covariance
};

/// Empirical mean and standard error of H̄_k((X_1 + ... + X_n)/sqrt(n)) over
/// `reps` sums, X_i ~ schedule.at(i). Replications are split into fixed
/// chunks, each with its own generator seeded from (seed, chunk); chunk
/// results are merged in chunk order, so output does not depend on the
/// number of threads. Throws PreconditionViolated if reps < 10^4.
[[nodiscard]] McEstimate mc_coefficients(const InnovationSchedule& schedule, std::size_t n,
                                         std::size_t k_max, std::size_t reps,
                                         std::uint64_t seed, unsigned threads = 0);

struct OracleComparison {
    std::string id;
    double spectral = 0.0;
    double oracle = 0.0;
    double abs_diff = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

[[nodiscard]] OracleComparison compare(std::string id, double spectral, double oracle,
                                       double tolerance);

struct OracleOptions {
    std::vector<double> a_values{0.3, 0.6, 0.9};
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    std::vector<std::size_t> mc_steps{2, 5, 10};
    std::size_t mc_k_max = 8;
    bool flip_q = false; // negate Q̂ before comparing (fault injection)
};

/// Matrix entries, pointwise convolution, f_2 and Monte Carlo coefficient
/// comparisons for one density.
[[nodiscard]] std::vector<OracleComparison> oracle_suite(const PolynomialDensity& phi,
                                                         const OracleOptions& options);

} // namespace hfclt
