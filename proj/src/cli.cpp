#include "dwg/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dwg/analysis.hpp"
#include "dwg/graph_io.hpp"
#include "dwg/report.hpp"

namespace dwg {

using nlohmann::json;

void RunConfig::check() const {
    if (!(tol > 0.0)) throw ValidationError("--tol must be positive");
    if (workers < 1) throw ValidationError("--workers must be at least 1");
    if (method != "flower" && method != "scattering" && method != "both")
        throw ValidationError("--method must be flower, scattering or both");
    if (format != "csv" && format != "json") throw ValidationError("--format must be csv or json");
    if (re_min && re_max && !(*re_max > *re_min)) throw ValidationError("empty window: re-max <= re-min");
    if (im_min && im_max && !(*im_max > *im_min)) throw ValidationError("empty window: im-max <= im-min");
    for (double R : radii)
        if (!(R > 0.0)) throw ValidationError("cutoffs must be positive");
}

namespace {

// Data goes to --out when given, else to `out`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ValidationError("cannot open output file " + path);
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

CoupledGraph load_valid(const RunConfig& cfg) {
    if (cfg.graph_path.empty()) throw ValidationError("--graph is required");
    CoupledGraph g = load_graph(cfg.graph_path);
    require_valid(g);
    return g;
}

double max_potential(const CoupledGraph& g) {
    double bmax = 0.0;
    for (const auto& e : g.graph.edges()) {
        if (e.potential.is_piecewise_constant())
            for (const auto& p : e.potential.pieces()) bmax = std::max(bmax, p.value);
        else
            for (double v : e.potential.values()) bmax = std::max(bmax, v);
    }
    return bmax;
}

ComplexWindow spectrum_default_window(const RunConfig& cfg, const CoupledGraph& g) {
    const auto [lo, hi] = damping_range(g);
    const double pad = 1.0 + std::sqrt(max_potential(g));
    ComplexWindow w{cfg.re_min.value_or(-2.0 * std::max(hi, 0.0) - pad),
                    cfg.re_max.value_or(-std::min(lo, 0.0) + pad), cfg.im_min.value_or(0.0),
                    cfg.im_max.value_or(kTwoPi * 10.0)};
    w.check();
    return w;
}

struct Backends {
    SecularSystem flower;
    std::optional<SecularSystem> scattering;
    RootOptions options;
};

Backends make_backends(const RunConfig& cfg, const CoupledGraph& g, std::ostream& err) {
    Backends b{SecularSystem(g, Backend::flower), std::nullopt, {}};
    b.options.tol = cfg.tol;
    b.options.workers = cfg.workers;
    if (cfg.method != "flower") {
        if (!has_piecewise_constant_profiles(g.graph)) {
            if (cfg.method == "scattering")
                throw ValidationError("the scattering backend needs piecewise-constant profiles");
            err << "note: sampled profiles present; scattering certification skipped\n";
        } else {
            b.scattering.emplace(g, Backend::scattering);
        }
    }
    return b;
}

void wire(Backends& b, const RunConfig& cfg) {
    if (!b.scattering) return;
    b.options.certify = {&*b.scattering};
    if (cfg.method == "scattering") b.options.polish = &*b.scattering;
}

std::optional<AbscissaReport> small_abscissa_report(const CoupledGraph& g, std::size_t max_two_n = 64) {
    const auto eq = equilateral_version(g);
    if (!eq || 2 * eq->graph.edge_count() > max_two_n) return std::nullopt;
    return abscissa_report(characteristic_polynomial(*eq));
}

json seed_json(const RunConfig& cfg) { return cfg.seed ? json(*cfg.seed) : json(nullptr); }

}  // namespace

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.check();
    const CoupledGraph g = load_valid(cfg);
    const ComplexWindow window = spectrum_default_window(cfg, g);
    Backends b = make_backends(cfg, g, err);
    wire(b, cfg);
    const EigenvalueSet set = find_roots(b.flower, window, b.options);

    const auto [alo, ahi] = damping_range(g);
    std::vector<double> rayleigh;
    int violations = 0, nonreal = 0;
    double worst_rayleigh = 0.0, worst_backend = -1.0;
    for (const auto& r : set.roots) {
        worst_backend = std::max(worst_backend, r.backend_residual);
        if (std::abs(r.lambda.imag()) <= 1e-6) {
            rayleigh.push_back(NAN);
            continue;
        }
        ++nonreal;
        if (r.lambda.real() < -ahi - 1e-6 || r.lambda.real() > -alo + 1e-6) ++violations;
        if (r.residual > 1e-6) {
            rayleigh.push_back(NAN);
            continue;
        }
        const double res = rayleigh_identity_residual(eigenfunction_at(b.flower, r.lambda), g);
        rayleigh.push_back(res);
        worst_rayleigh = std::max(worst_rayleigh, res);
    }

    json summary{{"winding_number", set.count},
                 {"roots", set.roots.size()},
                 {"total_multiplicity", set.total_multiplicity()},
                 {"nonreal", nonreal},
                 {"bound", {-ahi, -alo}},
                 {"bound_violations", violations},
                 {"max_rayleigh_residual", worst_rayleigh},
                 {"max_backend_residual", worst_backend}};
    if (const auto rep = small_abscissa_report(g)) {
        json assign = json::array();
        std::vector<int> counts(rep->clusters.size(), 0);
        double farthest = 0.0;
        for (const auto& r : set.roots) {
            if (std::abs(r.lambda.imag()) <= 1e-6) continue;
            std::size_t best = 0;
            for (std::size_t k = 1; k < rep->clusters.size(); ++k)
                if (std::abs(r.lambda.real() - rep->clusters[k].re) < std::abs(r.lambda.real() - rep->clusters[best].re))
                    best = k;
            counts[best] += r.multiplicity;
            farthest = std::max(farthest, std::abs(r.lambda.real() - rep->clusters[best].re));
        }
        for (std::size_t k = 0; k < rep->clusters.size(); ++k)
            assign.push_back(json{{"abscissa", rep->clusters[k].re}, {"weight", rep->clusters[k].mu}, {"roots", counts[k]}});
        summary["abscissas"] = std::move(assign);
        summary["max_distance_to_abscissa"] = farthest;
    }

    Sink sink(cfg.out, out);
    if (cfg.format == "json") {
        json doc{{"graph", cfg.graph_path}, {"method", cfg.method}, {"seed", seed_json(cfg)},
                 {"spectrum", to_json(set)}, {"rayleigh_residuals", rayleigh}, {"summary", summary}};
        *sink << doc.dump(2) << '\n';
    } else {
        write_spectrum_csv(*sink, set, rayleigh);
        (cfg.out.empty() ? err : out) << "summary " << summary.dump() << '\n';
    }
    return exit_ok;
}

int cmd_abscissas(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.check();
    const CoupledGraph g = load_valid(cfg);
    const auto eq = equilateral_version(g);
    if (!eq)
        throw IncommensurateError("edge lengths are incommensurate; the abscissa polynomial does not exist. "
                                  "Use `dwgs spectrum` to inspect the eigenvalues directly");
    const std::size_t two_n = 2 * eq->graph.edge_count();
    if (two_n > cfg.max_degree)
        throw IncommensurateError("the common length unit gives 2N = " + std::to_string(two_n) + " > " +
                                  std::to_string(cfg.max_degree) +
                                  "; treated as incommensurate. Use `dwgs spectrum` to inspect the eigenvalues "
                                  "directly or raise --max-degree");
    const AbscissaPolynomial ch = characteristic_polynomial(*eq);
    std::optional<AbscissaPolynomial> orb;
    std::optional<PolynomialComparison> cmp;
    if (two_n <= 24) {
        orb = orbit_polynomial(*eq);
        cmp = compare_polynomials(*orb, ch);
    }
    const AbscissaReport rep = abscissa_report(orb ? *orb : ch);

    Sink sink(cfg.out, out);
    if (cfg.format == "json") {
        json polys{{"characteristic", to_json(ch)}};
        if (orb) polys["orbit"] = to_json(*orb);
        json doc{{"graph", cfg.graph_path}, {"two_n", two_n}, {"l0", ch.l0},
                 {"bipartite", is_bipartite(eq->graph)}, {"polynomials", polys}, {"report", to_json(rep)}};
        if (cmp) doc["comparison"] = to_json(*cmp);
        *sink << doc.dump(2) << '\n';
    } else {
        write_abscissa_csv(*sink, rep);
        std::ostream& s = cfg.out.empty() ? err : out;
        s << "summary two_n=" << two_n << " l0=" << format_number(ch.l0) << " clusters=" << rep.clusters.size()
          << " total_multiplicity=" << rep.total_multiplicity();
        if (cmp) s << " methods_agree=" << (cmp->agree ? "yes" : "no") << " max_relative=" << format_number(cmp->max_relative);
        s << '\n';
    }
    if (cmp && !cmp->agree) {
        err << "error: orbit and characteristic polynomials disagree (max relative "
            << format_number(cmp->max_relative) << ")\n";
        return exit_polynomial_mismatch;
    }
    return exit_ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.check();
    if (cfg.graph_path.empty()) throw ValidationError("--graph is required");
    const CoupledGraph g = load_graph(cfg.graph_path);
    VerifyOptions opt;
    opt.strips = cfg.strips;
    opt.tol = cfg.tol;
    opt.workers = cfg.workers;
    const VerificationReport rep = verify_graph(g, opt);

    Sink sink(cfg.out, out);
    if (cfg.format == "json") {
        json doc = to_json(rep);
        doc["graph"] = cfg.graph_path;
        *sink << doc.dump(2) << '\n';
    } else {
        write_verify_csv(*sink, rep);
    }
    for (const auto& c : rep.checks)
        if (!c.passed && !c.skipped) err << "FAIL " << c.name << ": " << c.detail << " (value " << format_number(c.value) << ")\n";
    (cfg.out.empty() ? err : out) << "verify " << (rep.passed() ? "PASS" : "FAIL") << ' ' << cfg.graph_path << '\n';
    return rep.passed() ? exit_ok : exit_verify_failed;
}

int cmd_mu(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.check();
    if (!(cfg.hi > cfg.lo)) throw ValidationError("--interval needs lo < hi");
    const CoupledGraph g = load_valid(cfg);
    std::vector<double> radii = cfg.radii;
    if (radii.empty()) radii = {kTwoPi * 20, kTwoPi * 40, kTwoPi * 60};
    const double rmax = *std::max_element(radii.begin(), radii.end());
    Backends b = make_backends(cfg, g, err);
    ComplexWindow window;
    if (cfg.re_min && cfg.re_max)
        window = {*cfg.re_min, *cfg.re_max, -rmax - 1.0, rmax + 1.0};
    else
        window = spectrum_window(b.flower, rmax + 1.0, b.options);
    const EigenvalueSet set = find_roots(b.flower, window, b.options);
    MuSweep sweep = mu_sweep(set, cfg.lo, cfg.hi, radii);
    if (const auto rep = small_abscissa_report(g)) attach_prediction(sweep, *rep);

    Sink sink(cfg.out, out);
    if (cfg.format == "json") {
        json doc = to_json(sweep);
        doc["graph"] = cfg.graph_path;
        doc["window"] = to_json(set.window);
        *sink << doc.dump(2) << '\n';
    } else {
        write_mu_csv(*sink, sweep);
        (cfg.out.empty() ? err : out) << "summary limit=" << sweep.limit
                                      << " stabilized=" << (sweep.stabilized ? "yes" : "no")
                                      << " prediction=" << (sweep.predicted_weight ? sweep.prediction() : "none") << '\n';
    }
    return exit_ok;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectra of damped wave operators on metric graphs", "dwgs"};
    app.require_subcommand(1);
    RunConfig cfg;
    if (const char* s = std::getenv("DWGS_SEED")) {
        try {
            cfg.seed = std::stol(s);
        } catch (const std::exception&) {
            err << "error: DWGS_SEED must be an integer\n";
            return exit_validation;
        }
    }
    std::vector<double> interval;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--graph", cfg.graph_path, "graph JSON file")->required();
        sub->add_option("--tol", cfg.tol, "root tolerance")->capture_default_str();
        sub->add_option("--method", cfg.method, "flower, scattering or both")->capture_default_str();
        sub->add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
        sub->add_option("--out", cfg.out, "output file (default: standard output)");
        sub->add_option("--format", cfg.format, "csv or json")->capture_default_str();
    };
    auto window = [&](CLI::App* sub) {
        sub->add_option("--re-min", cfg.re_min);
        sub->add_option("--re-max", cfg.re_max);
        sub->add_option("--im-min", cfg.im_min);
        sub->add_option("--im-max", cfg.im_max);
    };

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues in a window");
    common(spectrum);
    window(spectrum);
    auto* abscissas = app.add_subcommand("abscissas", "high-frequency abscissas of a commensurate graph");
    common(abscissas);
    abscissas->add_option("--max-degree", cfg.max_degree, "largest 2N handled")->capture_default_str();
    auto* verify = app.add_subcommand("verify", "run the invariant suite");
    common(verify);
    verify->add_option("--strips", cfg.strips, "window height in units of 2 pi")->capture_default_str();
    auto* mu = app.add_subcommand("mu", "fraction of eigenvalues with real part in an interval");
    common(mu);
    window(mu);
    mu->add_option("--interval", interval, "lo hi")->expected(2)->required();
    mu->add_option("--radii", cfg.radii, "cutoffs R (default 2 pi * {20, 40, 60})");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_validation;
    }
    if (interval.size() == 2) {
        cfg.lo = interval[0];
        cfg.hi = interval[1];
    }

    try {
        if (spectrum->parsed()) {
            cfg.subcommand = "spectrum";
            return cmd_spectrum(cfg, out, err);
        }
        if (abscissas->parsed()) {
            cfg.subcommand = "abscissas";
            return cmd_abscissas(cfg, out, err);
        }
        if (verify->parsed()) {
            cfg.subcommand = "verify";
            return cmd_verify(cfg, out, err);
        }
        cfg.subcommand = "mu";
        return cmd_mu(cfg, out, err);
    } catch (const IncommensurateError& e) {
        err << "error: " << e.what() << '\n';
        return exit_incommensurate;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_solver;
    }
}

}  // namespace dwg
