// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "hfclt/bounds.hpp"
#include "hfclt/clt.hpp"
#include "hfclt/commands.hpp"
#include "hfclt/density.hpp"
#include "hfclt/error.hpp"
#include "hfclt/hermite.hpp"
#include "hfclt/hypothesis.hpp"
#include "hfclt/operators.hpp"
#include "hfclt/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hfclt;
namespace fs = std::filesystem;

namespace {

const fs::path kData = HFCLT_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

PolynomialDensity load(const std::string& name) {
    return build_density(read_density_file(kData / name));
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit_s <= 0.0 || secs < limit_s;
    const bool pass = out.pass && in_time;
    if (!pass)
        ++failures;
    std::printf("%s %2d %-34s %s; %.2fs%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                out.detail.c_str(), secs,
                in_time ? "" : (" exceeds " + fmt("%.0f", limit_s) + "s").c_str());
    std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

int main() {
    criterion(1, "orthonormality", 1.0, [] {
        const auto& r = cached_gauss_hermite(64);
        double worst = 0.0;
        std::vector<std::vector<double>> table(r.order(), std::vector<double>(21));
        for (std::size_t i = 0; i < r.order(); ++i)
            eval_hermite_all(20, r.nodes[i], table[i]);
        for (std::size_t m = 0; m <= 20; ++m)
            for (std::size_t n = 0; n <= 20; ++n) {
                double acc = 0.0;
                for (std::size_t i = 0; i < r.order(); ++i)
                    acc += r.weights[i] * table[i][m] * table[i][n];
                worst = std::max(worst, std::abs(acc - (m == n ? 1.0 : 0.0)));
            }
        return Outcome{worst <= 1e-10, "max error " + fmt("%.2e", worst) + " (tol 1e-10)"};
    });

    criterion(2, "operator formula equivalence", 5.0, [] {
        double worst = 0.0;
        for (const char* name : {"gauss.json", "xsquared.json", "quartic025.json"}) {
            const auto phi = load(name);
            for (double a : {0.3, 0.6, 0.9}) {
                const auto q = build_q_matrix(phi, a, 16);
                for (std::size_t m = 0; m <= 10; ++m)
                    for (std::size_t n = 0; n <= 10; ++n)
                        worst = std::max(worst, std::abs(q(m, n) - quadrature_q_entry(phi, a, m, n)));
            }
        }
        return Outcome{worst <= 1e-8, "max |diff| " + fmt("%.2e", worst) + " (tol 1e-8)"};
    });

    criterion(3, "Hilbert-Schmidt identity", 1.0, [] {
        double worst = 0.0;
        for (const char* name : {"gauss.json", "xsquared.json", "quartic025.json", "sextic.json"}) {
            const auto phi = load(name);
            const double nrm2 = phi.coeffs().norm() * phi.coeffs().norm();
            for (double a : {0.1, 0.3, 0.5, 0.7, 0.8, 0.9}) {
                const double target = nrm2 / (1.0 - a * a);
                const double partial = hilbert_schmidt_sum(phi, a, 512).partial;
                worst = std::max(worst, std::abs(partial / target - 1.0));
            }
        }
        return Outcome{worst <= 1e-8, "max rel error " + fmt("%.2e", worst) + " (tol 1e-8)"};
    });

    criterion(4, "Gershgorin chain", 10.0, [] {
        const auto phi = load("quartic025.json");
        double slack = 1e300;
        for (double a : {0.85, 0.9, 0.95, 0.99}) {
            const double norm = operator_norm_on_vk(phi, a, phi.K(), 512).norm;
            const auto sup = sup_row_sum(phi, a);
            const double bound = poincare_proof_bound(phi, a);
            if (!sup.certified)
                return Outcome{false, "row scan not certified at a = " + fmt("%.2f", a)};
            slack = std::min({slack, sup.value - norm * norm, bound - sup.value});
        }
        return Outcome{slack >= -1e-9, "min slack " + fmt("%.3e", slack) + " (tol -1e-9)"};
    });

    criterion(5, "chi2(f_2) closed value", 30.0, [] {
        const auto phi = load("quartic025.json");
        const auto sched = InnovationSchedule::constant(phi);
        const double exact = std::sqrt(0.125 * 0.125 + 70.0 * std::pow(0.25, 4) / 256.0);
        const double spectral = run_chain(sched, 2).at(2).chi2;
        const double quad = quadrature_chain(sched, 2).tail_norm(1);
        const auto mc = mc_coefficients(sched, 2, 8, 1000000, 1);
        const double z = std::abs(mc.chi2 - exact) / mc.chi2_se;
        const bool ok = std::abs(spectral - exact) <= 1e-12 && std::abs(quad - exact) <= 1e-9 &&
                        z <= 5.0;
        return Outcome{ok, "exact " + fmt("%.10f", exact) + ", spectral diff " +
                               fmt("%.1e", spectral - exact) + ", quadrature diff " +
                               fmt("%.1e", quad - exact) + ", MC " + fmt("%.6f", mc.chi2) +
                               " (" + fmt("%.2f", z) + " SE)"};
    });

    criterion(6, "per-step convolution inequality", 10.0, [] {
        std::size_t checked = 0, violations = 0, densities = 0;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(kData))
            if (e.path().extension() == ".json")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            PolynomialDensity phi = build_density(HermiteCoeffs{1.0});
            try {
                phi = build_density(read_density_file(f));
            } catch (const Error&) {
                continue; // not a density
            }
            if (!check_hypothesis(phi).overall)
                continue;
            ++densities;
            const auto sched = InnovationSchedule::constant(phi);
            const auto traj = run_chain(sched, 200);
            for (const auto& s : per_step_er(traj, sched)) {
                ++checked;
                violations += s.holds ? 0 : 1;
            }
        }
        return Outcome{violations == 0 && checked > 0,
                       std::to_string(violations) + " violations in " + std::to_string(checked) +
                           " steps over " + std::to_string(densities) + " certified densities"};
    });

    criterion(7, "rate reproduction", 10.0, [] {
        const auto phi = load("quartic025.json");
        const auto traj = run_chain(InnovationSchedule::constant(phi), 200);
        const auto fit = fit_rate(traj, 20, 200);
        const auto sc = scaled_chi2(traj, phi.r(), 20, 200);
        const bool ok = fit.slope >= -1.15 && fit.slope <= -0.90 && sc.ratio < 3.0;
        return Outcome{ok, "slope " + fmt("%.4f", fit.slope) + " in [-1.15, -0.90], max/min of n chi2 " +
                               fmt("%.4f", sc.ratio) + " < 3"};
    });

    criterion(8, "non-identical innovations", 10.0, [] {
        const auto sched =
            InnovationSchedule::round_robin({load("quartic025.json"), load("quartic020.json")});
        auto traj = run_chain(sched, 200);
        const auto fit = fit_rate(traj, 20, 200);
        attach_envelope(traj, sched);
        std::size_t bad = 0;
        for (std::size_t n = static_cast<std::size_t>(sched.n0()); n <= 200; ++n)
            bad += traj.at(n).chi2 <= traj.at(n).envelope * (1.0 + 1e-12) ? 0 : 1;
        const bool ok = fit.slope >= -1.15 && fit.slope <= -0.90 && bad == 0;
        return Outcome{ok, "slope " + fmt("%.4f", fit.slope) + ", n0 " + std::to_string(sched.n0()) +
                               ", envelope violations " + std::to_string(bad)};
    });

    criterion(9, "improved Poincare equality", 1.0, [] {
        double worst = 0.0;
        for (int r : {1, 2, 3, 5, 8})
            for (double t : {0.1, 1.0, 3.0}) {
                const auto c = improved_poincare(HermiteCoeffs::basis(r + 1), t, r);
                worst = std::max(worst, std::abs(c.lhs - c.rhs) / c.rhs);
            }
        return Outcome{worst <= 1e-15, "max rel gap " + fmt("%.1e", worst) + " (tol 1e-15)"};
    });

    criterion(10, "technical lemmas", 30.0, [] {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int agree = 0, disagree = 0;
        for (int t = 0; t < 200; ++t) {
            const int m = 2 + static_cast<int>(u(rng) * 7);
            const int q = 1 + static_cast<int>(u(rng) * (m - 1));
            const double alpha = std::exp(4.0 * u(rng) - 2.0);
            const double beta = std::exp(4.0 * u(rng) - 2.0);
            // P(x) = -alpha x^m + beta x^q - 1 is negative beyond x*
            const double x_star = std::max(1.0, std::pow(2.0 * beta / alpha, 1.0 / (m - q)));
            double best = -1e300;
            for (int i = 0; i <= 200000; ++i) {
                const double x = x_star * i / 200000.0;
                best = std::max(best, -alpha * std::pow(x, m) + beta * std::pow(x, q) - 1.0);
            }
            (lemma_polynom_predicate(m, q, alpha, beta) == (best <= 0.0) ? agree : disagree)++;
        }
        std::size_t grid = 0, fails = 0;
        for (int N = 1; N <= 8; ++N)
            for (int K = 1; K <= N; ++K) {
                const double th = std::pow(1.0 + double(N) / K, -0.25);
                for (double a : {th + 1e-6, 0.5 * (th + 1.0), 1.0 - 1e-6})
                    for (int i = 1; i <= N; ++i)
                        for (int k = 0; k <= N - 1; ++k) {
                            if (i + k < K || i + k > N)
                                continue;
                            for (int l = K; l <= 20; ++l) {
                                ++grid;
                                fails += double_prod_check(K, N, i, k, l, a) ? 0 : 1;
                            }
                        }
            }
        return Outcome{disagree == 0 && fails == 0,
                       "polynomial lemma " + std::to_string(agree) + "/200 agree; double product " +
                           std::to_string(grid - fails) + "/" + std::to_string(grid) + " hold"};
    });

    criterion(11, "correction term limit", 1.0, [] {
        const auto phi = load("quartic025.json");
        const double limit = gamma_k(phi, phi.K()) * std::pow(2.0 * (phi.K() + phi.N()), 0.5 * phi.K());
        double last = 0.0, hi = 0.0;
        for (int j = 2; j <= 8; ++j) {
            const double a = 1.0 - std::pow(10.0, -j);
            last = std::pow(-std::log(a), -0.5 * (phi.r() + 1)) * d_phi(phi, a);
            hi = std::max(hi, last);
        }
        const double rel = std::abs(last / limit - 1.0);
        return Outcome{rel <= 1e-4 && std::isfinite(hi),
                       "limit " + fmt("%.8f", limit) + ", rel error at j = 8 " + fmt("%.2e", rel) +
                           " (tol 1e-4)"};
    });

    criterion(12, "determinism", 0.0, [] {
        const auto base = fs::temp_directory_path() / "hfclt_acceptance_determinism";
        fs::remove_all(base);
        std::vector<fs::path> dirs{base / "a", base / "b"};
        for (const auto& d : dirs) {
            fs::create_directories(d);
            RunConfig c;
            c.densities = {kData / "quartic025.json"};
            c.out = d;
            c.seed = 7;
            std::ostringstream log;
            if (run_command("run", c, log) != kExitOk)
                return Outcome{false, "run did not exit 0"};
        }
        std::size_t same = 0, files = 0;
        for (const auto& e : fs::directory_iterator(dirs[0])) {
            ++files;
            same += slurp(e.path()) == slurp(dirs[1] / e.path().filename()) ? 1 : 0;
        }
        return Outcome{files == 3 && same == files,
                       std::to_string(same) + "/" + std::to_string(files) + " output files byte-identical"};
    });

    std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
