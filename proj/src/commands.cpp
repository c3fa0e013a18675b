#include "hfclt/commands.hpp"

#include "hfclt/bounds.hpp"
#include "hfclt/clt.hpp"
#include "hfclt/density.hpp"
#include "hfclt/error.hpp"
#include "hfclt/hypothesis.hpp"
#include "hfclt/operators.hpp"
#include "hfclt/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hfclt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<double> kDefaultGrid{0.5, 0.7, 0.85, 0.9, 0.95, 0.99};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json order_json(int v) {
    return v == PolynomialDensity::kInfinite ? json(nullptr) : json(v);
}

json predicate_json(const PredicateResult& p) {
    json j;
    j["verdict"] = to_string(p.verdict);
    j["lhs"] = finite_or_null(p.lhs);
    j["rhs"] = finite_or_null(p.rhs);
    j["first_violation"] = p.first_violation ? json(*p.first_violation) : json(nullptr);
    j["note"] = p.note;
    return j;
}

PolynomialDensity load_density(const fs::path& path) {
    return build_density(read_density_file(path));
}

struct Row {
    std::string bound;
    std::string density;
    double a = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
    bool theorem = true; // failure means an implementation bug
    std::string note;
};

std::string rows_csv(const std::vector<Row>& rows) {
    std::ostringstream os;
    os << "density,bound,a,lhs,rhs,margin,holds,note\n";
    for (const auto& r : rows) {
        os << r.density << ',' << r.bound << ',' << num(r.a) << ',' << num(r.lhs) << ','
           << num(r.rhs) << ',' << num(r.rhs - r.lhs) << ',' << (r.holds ? 1 : 0) << ','
           << r.note << '\n';
    }
    return os.str();
}

std::string rows_json(const std::vector<Row>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"density", r.density},
                       {"bound", r.bound},
                       {"a", r.a},
                       {"lhs", finite_or_null(r.lhs)},
                       {"rhs", finite_or_null(r.rhs)},
                       {"margin", finite_or_null(r.rhs - r.lhs)},
                       {"holds", r.holds},
                       {"note", r.note}});
    }
    return arr.dump(2) + "\n";
}

std::size_t parse_size(const std::string& s) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidConfig, "not a natural number: '" + s + "'");
    }
    if (pos != s.size() || s.empty() || s[0] == '-')
        throw Error(ErrorKind::InvalidConfig, "not a natural number: '" + s + "'");
    return static_cast<std::size_t>(v);
}

std::vector<Row> verify_density(const PolynomialDensity& phi, const std::string& id,
                                const std::vector<double>& grid, std::size_t dim,
                                std::ostream& log) {
    std::vector<Row> rows;
    const bool hyp = check_hypothesis(phi).overall;
    const double threshold = barycenter_threshold(phi);
    // K has no finite value for the Gaussian; any K >= 1 works, report K = 2.
    const int K = phi.is_gaussian() ? 2 : phi.K();
    const int r = K - 1;

    for (double t : {0.1, 1.0, 3.0}) {
        const auto eq = improved_poincare(HermiteCoeffs::basis(static_cast<std::size_t>(K)), t, r);
        rows.push_back({"improved_poincare_equality", id, t, eq.lhs, eq.rhs, eq.holds, true,
                        "f = H_K; t in the a column"});
        if (!phi.is_gaussian()) {
            const auto c = improved_poincare(phi.coeffs(), t, r);
            rows.push_back({"improved_poincare_phi", id, t, c.lhs, c.rhs, c.holds, true,
                            "t in the a column"});
        }
    }

    for (double a : grid) {
        if (!(a > threshold && a < 1.0)) {
            log << "  a = " << a << " skipped: not above the threshold " << threshold << "\n";
            rows.push_back({"skipped", id, a, 0.0, 0.0, true, false, "a <= a_phi"});
            continue;
        }
        const auto sup = sup_row_sum(phi, a, K);
        const std::size_t vk_dim =
            std::max<std::size_t>(dim, static_cast<std::size_t>(K + 4 * phi.N()) + 1);
        const auto vk = operator_norm_on_vk(phi, a, static_cast<std::size_t>(K), vk_dim);
        const double norm2 = vk.norm * vk.norm;
        rows.push_back({"gershgorin_norm_vs_rowsum", id, a, norm2, sup.value,
                        norm2 <= sup.value + 1e-9, true,
                        sup.certified ? "" : "row scan not certified"});

        const auto split = triangle_split(phi.coeffs(), phi, a);
        rows.push_back({"triangle_split", id, a, split.total, split.centered + split.defect,
                        split.holds(), true, ""});
        const double defect = mass_defect(phi, a);
        const double defect_bound = std::pow(1.0 - a * a, 0.5 * K) * phi.chi2();
        rows.push_back({"mass_defect", id, a, defect, defect_bound,
                        make_check(defect, defect_bound).holds, true, ""});

        if (!hyp) {
            rows.push_back({"er_inequality", id, a, 0.0, 0.0, true, false, "skipped: fails (H)"});
            continue;
        }
        const double proof = poincare_proof_bound(phi, a, K);
        const double stated = poincare_like_bound(phi, a, K);
        rows.push_back({"rowsum_vs_proof_bound", id, a, sup.value, proof,
                        sup.value <= proof + 1e-9, true, ""});
        rows.push_back({"proof_vs_stated_factor", id, a, proof, stated,
                        make_check(proof, stated).holds, true, ""});

        const auto e1 = er_inequality(HermiteCoeffs{1.0}, phi, a);
        rows.push_back({"er_gaussian_start", id, a, e1.lhs, e1.rhs, e1.holds, true, ""});
        const auto e2 = er_inequality(phi.coeffs(), phi, a);
        rows.push_back({"er_inequality", id, a, e2.lhs, e2.rhs, e2.holds, true, "f = phi"});

        if (!phi.is_gaussian()) {
            const auto alt = alternative_bound(phi.coeffs(), phi, a, r);
            const double need = alternative_required_constant(phi.coeffs(), phi, a, r);
            rows.push_back({"alternative_bound", id, a, alt.lhs, alt.rhs, alt.holds, false,
                            "required c_r = " + num(need)});
        }
    }
    return rows;
}

} // namespace

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw Error(ErrorKind::Io, "cannot open " + tmp.string());
        os << content;
        if (!os)
            throw Error(ErrorKind::Io, "write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorKind::Io, "rename to " + path.string() + ": " + ec.message());
}

std::pair<std::size_t, std::size_t> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw Error(ErrorKind::InvalidConfig, "window must be lo:hi, got '" + text + "'");
    const std::size_t lo = parse_size(text.substr(0, colon));
    const std::size_t hi = parse_size(text.substr(colon + 1));
    if (lo >= hi)
        throw Error(ErrorKind::InvalidConfig, "window needs lo < hi, got '" + text + "'");
    return {lo, hi};
}

RunConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorKind::Io, "cannot read config " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
    }
    if (!j.is_object())
        throw Error(ErrorKind::InvalidConfig, "config must be a JSON object");

    RunConfig c;
    try {
        const fs::path base = path.parent_path();
        if (j.contains("densities")) {
            for (const auto& d : j.at("densities")) {
                fs::path p = d.get<std::string>();
                c.densities.push_back(p.is_relative() ? base / p : p);
            }
        }
        if (j.contains("n_max"))
            c.n_max = j.at("n_max").get<std::size_t>();
        if (j.contains("dim"))
            c.dim = j.at("dim").get<std::size_t>();
        if (j.contains("a_grid"))
            c.a_grid = j.at("a_grid").get<std::vector<double>>();
        if (j.contains("window")) {
            const auto& w = j.at("window");
            if (w.is_string())
                c.window = parse_window(w.get<std::string>());
            else
                c.window = std::pair{w.at(0).get<std::size_t>(), w.at(1).get<std::size_t>()};
        }
        if (j.contains("reps"))
            c.reps = j.at("reps").get<std::size_t>();
        if (j.contains("seed"))
            c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out"))
            c.out = j.at("out").get<std::string>();
        if (j.contains("format"))
            c.format = j.at("format").get<std::string>();
        if (j.contains("slope_tol"))
            c.slope_tol = j.at("slope_tol").get<double>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
    }
    return c;
}

void validate(const RunConfig& c) {
    if (c.densities.empty())
        throw Error(ErrorKind::InvalidConfig, "at least one --density is required");
    if (c.n_max < 2 || c.n_max > 100000)
        throw Error(ErrorKind::InvalidConfig, "n_max must lie in [2, 100000]");
    if (c.dim < 8 || c.dim > 100000)
        throw Error(ErrorKind::InvalidConfig, "dim must lie in [8, 100000]");
    for (double a : c.a_grid) {
        if (!(a > 0.0 && a < 1.0))
            throw Error(ErrorKind::InvalidConfig, "a-grid values must lie in (0, 1)");
    }
    if (c.window && (c.window->first < 1 || c.window->second <= c.window->first))
        throw Error(ErrorKind::InvalidConfig, "window must satisfy 1 <= lo < hi");
    if (c.reps < 10000 || c.reps > 100000000)
        throw Error(ErrorKind::InvalidConfig, "reps must lie in [10^4, 10^8]");
    if (c.format != "csv" && c.format != "json")
        throw Error(ErrorKind::InvalidConfig, "format must be csv or json");
    if (!(c.slope_tol > 0.0))
        throw Error(ErrorKind::InvalidConfig, "slope tolerance must be positive");
    for (const auto& p : c.densities) {
        if (!fs::exists(p))
            throw Error(ErrorKind::Io, "no such density file: " + p.string());
    }
}

int cmd_check(const RunConfig& config, std::ostream& log) {
    int code = kExitOk;
    json all = json::array();
    for (const auto& path : config.densities) {
        json entry;
        entry["path"] = path.string();
        try {
            const auto phi = load_density(path);
            const auto rep = check_hypothesis(phi);
            entry["gaussian"] = phi.is_gaussian();
            entry["K"] = order_json(phi.K());
            entry["N"] = phi.N();
            entry["r"] = order_json(phi.r());
            entry["chi2"] = phi.chi2();
            entry["a_phi"] = rep.a_phi;
            entry["n0"] = n0(phi);
            json gam = json::object();
            json cs = json::object();
            for (const auto& [k, g] : rep.gammas)
                gam[std::to_string(k)] = g;
            for (const auto& [k, c] : rep.C)
                cs[std::to_string(k)] = c;
            entry["gamma"] = gam;
            entry["C"] = cs;
            entry["h1"] = predicate_json(rep.h1);
            entry["h1prime"] = predicate_json(rep.h1prime);
            entry["h2a"] = predicate_json(rep.h2a);
            entry["h2b"] = predicate_json(rep.h2b);
            entry["hypothesis"] = rep.overall;

            log << path.string() << ": ";
            if (phi.is_gaussian())
                log << "Gaussian (K = r = inf, N = 0)";
            else
                log << "K=" << phi.K() << " N=" << phi.N() << " r=" << phi.r();
            log << " chi2=" << num(phi.chi2()) << " a_phi=" << num(rep.a_phi)
                << " n0=" << n0(phi) << "\n";
            for (const auto& [k, g] : rep.gammas)
                log << "  gamma_" << k << " = " << num(g) << "  C_" << k << " = "
                    << num(rep.C.at(k)) << "\n";
            log << "  H1 " << to_string(rep.h1.verdict) << ", H1' " << to_string(rep.h1prime.verdict)
                << ", H2a " << to_string(rep.h2a.verdict) << ", H2b "
                << to_string(rep.h2b.verdict) << " -> (H) " << (rep.overall ? "holds" : "fails")
                << "\n";
            if (!rep.overall && code == kExitOk)
                code = kExitHypothesis;
        } catch (const NotADensityError& e) {
            entry["error"] = e.what();
            entry["witness"] = e.witness();
            log << path.string() << ": not a density (" << e.what() << ", negative at x = "
                << num(e.witness()) << ")\n";
            code = kExitNotADensity;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::MassNotOne)
                throw;
            entry["error"] = e.what();
            log << path.string() << ": " << e.what() << "\n";
            code = kExitNotADensity;
        }
        all.push_back(entry);
    }
    fs::create_directories(config.out);
    write_atomic(config.out / "check.json", all.dump(2) + "\n");
    return code;
}

int cmd_run(const RunConfig& config, std::ostream& log) {
    std::vector<PolynomialDensity> dens;
    for (const auto& p : config.densities)
        dens.push_back(load_density(p));
    const auto schedule = dens.size() == 1 ? InnovationSchedule::constant(dens.front())
                                           : InnovationSchedule::round_robin(dens);

    auto traj = run_chain(schedule, config.n_max, config.dim);
    json summary;
    json notes = json::array();
    const auto r = schedule.common_r();
    const bool claims = r && *r >= 2 && schedule.all_hypothesis();

    double a_max = 0.0;
    int K_min = PolynomialDensity::kInfinite;
    for (const auto& d : dens) {
        a_max = std::max(a_max, a_phi(d));
        K_min = std::min(K_min, d.K());
    }
    const int n0v = schedule.n0();
    summary["r"] = r ? order_json(*r) : json(nullptr);
    summary["K"] = order_json(K_min);
    summary["N"] = schedule.max_N();
    summary["a_phi"] = a_max;
    summary["n0"] = n0v;

    std::size_t envelope_violations = 0;
    if (claims) {
        attach_envelope(traj, schedule);
        for (const auto& s : traj.steps) {
            if (std::isfinite(s.envelope) && !make_check(s.chi2, s.envelope).holds)
                ++envelope_violations;
        }
    } else {
        notes.push_back(r && *r < 2 ? "r < 2: Theorem 1 inapplicable"
                                    : "densities do not share r or fail (H): no rate claims");
    }

    const auto er = per_step_er(traj, schedule);
    std::size_t er_violations = 0;
    double er_min_margin = std::numeric_limits<double>::infinity();
    for (const auto& e : er) {
        er_violations += e.holds ? 0 : 1;
        er_min_margin = std::min(er_min_margin, e.margin);
    }

    std::size_t lo = std::max<std::size_t>(20, 2 * static_cast<std::size_t>(n0v));
    std::size_t hi = std::min<std::size_t>(200, config.n_max);
    if (config.window) {
        lo = config.window->first;
        hi = config.window->second;
    }

    json slope = nullptr;
    json target = nullptr;
    json sup_scaled = nullptr;
    bool slope_miss = false;
    if (schedule.all_gaussian()) {
        notes.push_back("chi2 is identically zero: no fit");
    } else if (hi <= lo || hi > config.n_max) {
        notes.push_back("rate window does not fit n_max: no fit");
    } else {
        try {
            const auto fit = fit_rate(traj, lo, hi);
            slope = fit.slope;
            summary["fit_residual"] = fit.residual;
            if (claims) {
                const double t = -0.5 * (*r - 1);
                target = t;
                const auto sc = scaled_chi2(traj, *r, lo, hi);
                sup_scaled = sc.sup;
                summary["scaled_ratio"] = sc.ratio;
                slope_miss = std::abs(fit.slope - t) > config.slope_tol;
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateWindow)
                throw;
            notes.push_back(std::string("no fit: ") + e.what());
        }
    }
    summary["window"] = {lo, hi};
    summary["slope"] = slope;
    summary["slope_target"] = target;
    summary["slope_tol"] = config.slope_tol;
    summary["sup_scaled_chi2"] = sup_scaled;
    summary["er_checked"] = er.size();
    summary["er_violations"] = er_violations;
    summary["er_min_margin"] = finite_or_null(er_min_margin);
    summary["envelope_violations"] = envelope_violations;
    summary["tail_max"] = traj.tail_max();
    summary["flagged_steps"] = std::count_if(traj.steps.begin(), traj.steps.end(),
                                             [](const ChainStep& s) { return s.flagged; });
    summary["notes"] = notes;

    std::ostringstream csv;
    write_trajectory_csv(traj, csv);
    std::ostringstream loglog;
    loglog << "log_n,log_chi2\n";
    for (const auto& s : traj.steps) {
        if (s.chi2 > 0.0)
            loglog << num(std::log(static_cast<double>(s.n))) << ',' << num(std::log(s.chi2))
                   << '\n';
    }
    fs::create_directories(config.out);
    write_atomic(config.out / "trajectory.csv", csv.str());
    write_atomic(config.out / "loglog.csv", loglog.str());
    write_atomic(config.out / "summary.json", summary.dump(2) + "\n");

    log << "n_max=" << config.n_max << " n0=" << n0v << " chi2(f_n_max)="
        << num(traj.steps.back().chi2) << "\n";
    if (slope.is_number())
        log << "slope=" << num(slope.get<double>())
            << (target.is_number() ? " target=" + num(target.get<double>()) : std::string())
            << "\n";
    log << "(E_r) checked on " << er.size() << " steps, " << er_violations << " violations\n";
    for (const auto& n : notes)
        log << "note: " << n.get<std::string>() << "\n";

    if (er_violations > 0 || envelope_violations > 0)
        return kExitTheoremViolation;
    if (traj.any_flagged())
        return kExitFlaggedTruncation;
    if (slope_miss)
        return kExitSlopeMiss;
    return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& log) {
    const auto& grid = config.a_grid.empty() ? kDefaultGrid : config.a_grid;
    std::vector<Row> rows;
    for (const auto& path : config.densities) {
        const auto phi = load_density(path);
        log << path.string() << "\n";
        auto r = verify_density(phi, path.filename().string(), grid, config.dim, log);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    int code = kExitOk;
    std::size_t failures = 0;
    for (const auto& r : rows) {
        if (!r.holds) {
            log << "  " << (r.theorem ? "VIOLATION " : "not satisfied ") << r.bound
                << " a=" << num(r.a) << " lhs=" << num(r.lhs) << " rhs=" << num(r.rhs) << "\n";
            if (r.theorem) {
                code = kExitTheoremViolation;
                ++failures;
            }
        }
    }
    log << rows.size() << " checks, " << failures << " theorem violations\n";
    fs::create_directories(config.out);
    if (config.format == "json")
        write_atomic(config.out / "verify.json", rows_json(rows));
    else
        write_atomic(config.out / "verify.csv", rows_csv(rows));
    return code;
}

int cmd_oracle(const RunConfig& config, std::ostream& log) {
    OracleOptions opt;
    opt.reps = config.reps;
    opt.seed = config.seed;
    opt.flip_q = config.flip_q;
    std::vector<std::pair<std::string, OracleComparison>> all;
    for (const auto& path : config.densities) {
        const auto phi = load_density(path);
        for (auto& c : oracle_suite(phi, opt))
            all.emplace_back(path.filename().string(), std::move(c));
    }
    std::size_t failed = 0;
    for (const auto& [d, c] : all) {
        if (!c.pass) {
            ++failed;
            log << "  DISAGREE " << d << " " << c.id << " spectral=" << num(c.spectral)
                << " oracle=" << num(c.oracle) << " tol=" << num(c.tolerance) << "\n";
        }
    }
    log << all.size() << " comparisons, " << failed << " disagreements\n";

    fs::create_directories(config.out);
    if (config.format == "json") {
        json arr = json::array();
        for (const auto& [d, c] : all) {
            arr.push_back({{"density", d},
                           {"id", c.id},
                           {"spectral", c.spectral},
                           {"oracle", c.oracle},
                           {"abs_diff", c.abs_diff},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass}});
        }
        write_atomic(config.out / "oracle.json", arr.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "density,id,spectral,oracle,abs_diff,tolerance,pass\n";
        for (const auto& [d, c] : all) {
            os << d << ',' << c.id << ',' << num(c.spectral) << ',' << num(c.oracle) << ','
               << num(c.abs_diff) << ',' << num(c.tolerance) << ',' << (c.pass ? 1 : 0) << '\n';
        }
        write_atomic(config.out / "oracle.csv", os.str());
    }
    return failed > 0 ? kExitOracleDisagreement : kExitOk;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& log) {
    try {
        validate(config);
        if (name == "check")
            return cmd_check(config, log);
        if (name == "run")
            return cmd_run(config, log);
        if (name == "verify")
            return cmd_verify(config, log);
        if (name == "oracle")
            return cmd_oracle(config, log);
        throw Error(ErrorKind::InvalidConfig, "unknown command " + name);
    } catch (const NotADensityError& e) {
        log << "error: " << e.what() << " (negative at x = " << num(e.witness()) << ")\n";
        return kExitNotADensity;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::MassNotOne:
        case ErrorKind::NotADensity:
        case ErrorKind::OddLeadingDegree: return kExitNotADensity;
        default: return kExitIo;
        }
    } catch (const fs::filesystem_error& e) {
        log << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

} // namespace hfclt
