#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dwg/analysis.hpp"

namespace dwg {

/// Fixed 12-significant-digit rendering used by every CSV writer.
std::string format_number(double x);

nlohmann::json complex_to_json(Complex z);
nlohmann::json to_json(const ComplexWindow& w);
nlohmann::json to_json(const EigenvalueSet& set);
nlohmann::json to_json(const AbscissaPolynomial& p);
nlohmann::json to_json(const AbscissaReport& r);
nlohmann::json to_json(const PolynomialComparison& c);
nlohmann::json to_json(const SequenceFit& f);
nlohmann::json to_json(const AbscissaCrosscheck& c);
nlohmann::json to_json(const MuSweep& s);
nlohmann::json to_json(const CheckResult& c);
nlohmann::json to_json(const VerificationReport& r);

/// Spectrum rows re, im, multiplicity, residual, rayleigh_residual, sorted by
/// (im, re). `rayleigh` is indexed like set.roots; NaN renders as "nan".
void write_spectrum_csv(std::ostream& os, const EigenvalueSet& set, const std::vector<double>& rayleigh);
/// c0 rows re, im, cluster, multiplicity, mu.
void write_abscissa_csv(std::ostream& os, const AbscissaReport& r);
/// R, numerator, denominator, mu, rational.
void write_mu_csv(std::ostream& os, const MuSweep& s);
/// name, status, value, threshold, detail.
void write_verify_csv(std::ostream& os, const VerificationReport& r);

}  // namespace dwg
