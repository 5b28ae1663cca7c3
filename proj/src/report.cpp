#include "dwg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace dwg {

using nlohmann::json;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // drop the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

json complex_to_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const ComplexWindow& w) {
    return json{{"re_min", w.re_min}, {"re_max", w.re_max}, {"im_min", w.im_min}, {"im_max", w.im_max}};
}

json to_json(const EigenvalueSet& set) {
    json roots = json::array();
    for (const auto& r : set.roots) {
        json j{{"lambda", complex_to_json(r.lambda)}, {"multiplicity", r.multiplicity}, {"residual", r.residual}};
        if (r.backend_residual >= 0.0) j["backend_residual"] = r.backend_residual;
        roots.push_back(std::move(j));
    }
    return json{{"window", to_json(set.window)},
                {"winding_number", set.count},
                {"total_multiplicity", set.total_multiplicity()},
                {"roots", std::move(roots)}};
}

json to_json(const AbscissaPolynomial& p) {
    json coeffs = json::array();
    for (const auto& c : p.coeffs) coeffs.push_back(complex_to_json(c));
    return json{{"method", p.method}, {"two_n", p.two_n}, {"l0", p.l0}, {"coefficients", std::move(coeffs)}};
}

json to_json(const AbscissaReport& r) {
    json roots = json::array(), c0 = json::array(), clusters = json::array(), sens = json::array();
    for (const auto& y : r.roots) roots.push_back(complex_to_json(y));
    for (const auto& z : r.c0) c0.push_back(complex_to_json(z));
    for (const auto& c : r.clusters) {
        json members = json::array();
        for (const auto& z : c.c0) members.push_back(complex_to_json(z));
        clusters.push_back(json{{"re", c.re}, {"multiplicity", c.multiplicity}, {"mu", c.mu}, {"c0", std::move(members)}});
    }
    for (const auto& [tol, n] : r.sensitivity) sens.push_back(json{{"tolerance", tol}, {"clusters", n}});
    return json{{"polynomial", to_json(r.polynomial)},
                {"roots", std::move(roots)},
                {"c0", std::move(c0)},
                {"cluster_tolerance", r.cluster_tol},
                {"clusters", std::move(clusters)},
                {"total_multiplicity", r.total_multiplicity()},
                {"sensitivity", std::move(sens)}};
}

json to_json(const PolynomialComparison& c) {
    return json{{"max_relative", c.max_relative}, {"max_absolute_zero", c.max_absolute_zero}, {"agree", c.agree}};
}

json to_json(const SequenceFit& f) {
    json lambdas = json::array();
    for (const auto& z : f.lambdas) lambdas.push_back(complex_to_json(z));
    return json{{"n", f.n},
                {"lambdas", std::move(lambdas)},
                {"c0", complex_to_json(f.c0)},
                {"c1", complex_to_json(f.c1)},
                {"max_fit_error", f.max_fit_error},
                {"jumps", f.jumps}};
}

json to_json(const AbscissaCrosscheck& c) {
    json entries = json::array();
    for (const auto& e : c.entries)
        entries.push_back(json{{"c0_guess", complex_to_json(e.c0_guess)},
                               {"original", to_json(e.original)},
                               {"averaged", to_json(e.averaged)},
                               {"difference", e.difference}});
    return json{{"entries", std::move(entries)},
                {"max_difference", c.max_difference},
                {"tolerance", c.tolerance},
                {"agree", c.agree}};
}

json to_json(const MuSweep& s) {
    json table = json::array(), inc = json::array();
    for (const auto& m : s.table)
        table.push_back(json{{"R", m.R},
                             {"numerator", m.numerator},
                             {"denominator", m.denominator},
                             {"mu", m.value()},
                             {"rational", m.rational()}});
    for (const auto& [dn, dd] : s.increments) inc.push_back(json{{"numerator", dn}, {"denominator", dd}});
    json j{{"interval", {s.lo, s.hi}}, {"table", std::move(table)}, {"increments", std::move(inc)},
           {"limit", s.limit}, {"stabilized", s.stabilized}};
    if (s.predicted_weight) j["prediction"] = s.prediction();
    return j;
}

json to_json(const CheckResult& c) {
    return json{{"name", c.name},
                {"status", c.skipped ? "skipped" : (c.passed ? "pass" : "fail")},
                {"value", c.value},
                {"threshold", c.threshold},
                {"detail", c.detail}};
}

json to_json(const VerificationReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    json j{{"passed", r.passed()}, {"checks", std::move(checks)}, {"spectrum", to_json(r.roots)}};
    j["rayleigh_residuals"] = r.rayleigh;
    j["gradient_ratios"] = r.gradient_ratios;
    if (r.abscissas) j["abscissas"] = to_json(*r.abscissas);
    return j;
}

void write_spectrum_csv(std::ostream& os, const EigenvalueSet& set, const std::vector<double>& rayleigh) {
    std::vector<std::size_t> order(set.roots.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Complex x = set.roots[a].lambda, y = set.roots[b].lambda;
        return x.imag() != y.imag() ? x.imag() < y.imag() : x.real() < y.real();
    });
    os << "re,im,multiplicity,residual,rayleigh_residual\n";
    for (std::size_t k : order) {
        const auto& r = set.roots[k];
        os << format_number(r.lambda.real()) << ',' << format_number(r.lambda.imag()) << ',' << r.multiplicity << ','
           << format_number(r.residual) << ',' << format_number(k < rayleigh.size() ? rayleigh[k] : NAN) << '\n';
    }
}

void write_abscissa_csv(std::ostream& os, const AbscissaReport& r) {
    os << "re,im,cluster,multiplicity,mu\n";
    for (std::size_t c = 0; c < r.clusters.size(); ++c)
        for (const auto& z : r.clusters[c].c0)
            os << format_number(z.real()) << ',' << format_number(z.imag()) << ',' << c << ','
               << r.clusters[c].multiplicity << ',' << r.clusters[c].mu << '\n';
}

void write_mu_csv(std::ostream& os, const MuSweep& s) {
    os << "R,numerator,denominator,mu,rational\n";
    for (const auto& m : s.table)
        os << format_number(m.R) << ',' << m.numerator << ',' << m.denominator << ',' << format_number(m.value()) << ','
           << m.rational() << '\n';
}

void write_verify_csv(std::ostream& os, const VerificationReport& r) {
    os << "name,status,value,threshold,detail\n";
    for (const auto& c : r.checks) {
        std::string detail = c.detail;
        std::replace(detail.begin(), detail.end(), '"', '\'');
        os << c.name << ',' << (c.skipped ? "skipped" : (c.passed ? "pass" : "fail")) << ','
           << format_number(c.value) << ',' << format_number(c.threshold) << ",\"" << detail << "\"\n";
    }
}

}  // namespace dwg
