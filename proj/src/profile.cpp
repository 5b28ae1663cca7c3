#include "dwg/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dwg/types.hpp"

namespace dwg {

CoefficientProfile CoefficientProfile::constant(double value, double length) {
    if (!(length > 0.0)) throw ValidationError("profile length must be positive");
    if (!std::isfinite(value)) throw ValidationError("profile value must be finite");
    CoefficientProfile p;
    p.kind_ = Kind::constant;
    p.length_ = length;
    p.values_ = {value};
    p.breakpoints_.clear();
    p.average_ = value;
    return p;
}

CoefficientProfile CoefficientProfile::piecewise(std::vector<double> breakpoints,
                                                 std::vector<double> values, double length) {
    if (!(length > 0.0)) throw ValidationError("profile length must be positive");
    if (values.size() != breakpoints.size() + 1)
        throw ValidationError("piecewise profile needs one more value than breakpoints");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        const double b = breakpoints[i];
        if (!(b > 0.0 && b < length))
            throw ValidationError("piecewise breakpoints must lie inside (0, length)");
        if (i > 0 && !(b > breakpoints[i - 1]))
            throw ValidationError("piecewise breakpoints must be strictly increasing");
    }
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("profile value must be finite");
    CoefficientProfile p;
    p.kind_ = Kind::piecewise;
    p.length_ = length;
    p.breakpoints_ = std::move(breakpoints);
    p.values_ = std::move(values);
    p.compute_average();
    return p;
}

CoefficientProfile CoefficientProfile::sampled(std::vector<double> values, double length) {
    if (!(length > 0.0)) throw ValidationError("profile length must be positive");
    if (values.size() < 4) throw ValidationError("sampled profile needs at least 4 grid points");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("profile value must be finite");
    CoefficientProfile p;
    p.kind_ = Kind::sampled;
    p.length_ = length;
    p.values_ = std::move(values);
    p.grid_length_ = length;
    p.compute_slopes();
    p.compute_average();
    return p;
}

bool CoefficientProfile::is_constant() const {
    if (kind_ == Kind::constant) return true;
    if (kind_ == Kind::piecewise)
        return std::all_of(values_.begin(), values_.end(),
                           [&](double v) { return v == values_.front(); });
    return false;
}

int CoefficientProfile::grid_points() const {
    if (kind_ != Kind::sampled) return 0;
    return static_cast<int>(values_.size());
}

void CoefficientProfile::compute_slopes() {
    const int n = static_cast<int>(values_.size());
    const double h = grid_length_ / (n - 1);
    const auto& f = values_;
    slopes_.assign(n, 0.0);
    if (n < 5) {
        for (int i = 0; i < n; ++i) {
            if (i == 0)
                slopes_[i] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
            else if (i == n - 1)
                slopes_[i] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h);
            else
                slopes_[i] = (f[i + 1] - f[i - 1]) / (2 * h);
        }
        return;
    }
    for (int i = 0; i < n; ++i) {
        double d;
        if (i >= 2 && i <= n - 3)
            d = f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2];
        else if (i == 0)
            d = -25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4];
        else if (i == 1)
            d = -3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4];
        else if (i == n - 2)
            d = 3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] + 6 * f[n - 4] - f[n - 5];
        else
            d = 25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] - 16 * f[n - 4] + 3 * f[n - 5];
        slopes_[i] = d / (12 * h);
    }
}

namespace {

// Cubic Hermite basis on a cell of width h, local coordinate s in [0, 1].
struct Hermite {
    double f0, f1, m0, m1, h;
    double value(double s) const {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * h * m0 +
               (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * h * m1;
    }
    double slope(double s) const {
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * f0 + (3 * s2 - 4 * s + 1) * h * m0 + (-6 * s2 + 6 * s) * f1 +
                (3 * s2 - 2 * s) * h * m1) /
               h;
    }
};

}  // namespace

double CoefficientProfile::sample_interp(double t) const {
    const int n = static_cast<int>(values_.size());
    const double h = grid_length_ / (n - 1);
    t = std::clamp(t, 0.0, grid_length_);
    int k = std::min(static_cast<int>(t / h), n - 2);
    const double s = (t - k * h) / h;
    return Hermite{values_[k], values_[k + 1], slopes_[k], slopes_[k + 1], h}.value(s);
}

double CoefficientProfile::sample_slope(double t) const {
    const int n = static_cast<int>(values_.size());
    const double h = grid_length_ / (n - 1);
    t = std::clamp(t, 0.0, grid_length_);
    int k = std::min(static_cast<int>(t / h), n - 2);
    const double s = (t - k * h) / h;
    return Hermite{values_[k], values_[k + 1], slopes_[k], slopes_[k + 1], h}.slope(s);
}

double CoefficientProfile::integrate_sampled(double t0, double t1) const {
    // Exact integral of the Hermite interpolant; cells cut by the limits use
    // three-point Gauss-Legendre, which is exact for cubics.
    const int n = static_cast<int>(values_.size());
    const double h = grid_length_ / (n - 1);
    static constexpr std::array<double, 3> gx{-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr std::array<double, 3> gw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double total = 0.0;
    for (int k = 0; k < n - 1; ++k) {
        const double c0 = k * h, c1 = (k + 1) * h;
        const double lo = std::max(c0, t0), hi = std::min(c1, t1);
        if (hi <= lo) continue;
        const Hermite cell{values_[k], values_[k + 1], slopes_[k], slopes_[k + 1], h};
        if (lo == c0 && hi == c1) {
            total += h * (cell.f0 + cell.f1) / 2 + h * h * (cell.m0 - cell.m1) / 12;
        } else {
            const double mid = (lo + hi) / 2, half = (hi - lo) / 2;
            for (int q = 0; q < 3; ++q) total += half * gw[q] * cell.value((mid + half * gx[q] - c0) / h);
        }
    }
    return total;
}

void CoefficientProfile::compute_average() {
    switch (kind_) {
    case Kind::constant:
        average_ = values_.front();
        return;
    case Kind::piecewise: {
        double acc = 0.0;
        for (const auto& p : pieces()) acc += (p.end - p.begin) * p.value;
        average_ = acc / length_;
        return;
    }
    case Kind::sampled: {
        const double t0 = offset_, t1 = offset_ + length_ / stretch_;
        const int n = static_cast<int>(values_.size());
        double integral;
        if (t0 == 0.0 && std::abs(t1 - grid_length_) <= 1e-14 * grid_length_) {
            // Composite Simpson on the sample grid (3/8 rule on the last
            // three intervals when the interval count is odd).
            const double h = grid_length_ / (n - 1);
            const int intervals = n - 1;
            const int simpson = (intervals % 2 == 0) ? intervals : intervals - 3;
            integral = 0.0;
            for (int k = 0; k + 2 <= simpson; k += 2)
                integral += h / 3 * (values_[k] + 4 * values_[k + 1] + values_[k + 2]);
            if (simpson != intervals) {
                const int k = simpson;
                integral += 3 * h / 8 *
                            (values_[k] + 3 * values_[k + 1] + 3 * values_[k + 2] + values_[k + 3]);
            }
        } else {
            integral = integrate_sampled(t0, t1);
        }
        average_ = scale_ * integral / (t1 - t0);
        return;
    }
    }
}

double CoefficientProfile::operator()(double x) const {
    switch (kind_) {
    case Kind::constant:
        return values_.front();
    case Kind::piecewise: {
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }
    case Kind::sampled: {
        const double t = reversed_ ? offset_ + (length_ - x) / stretch_ : offset_ + x / stretch_;
        return scale_ * sample_interp(t);
    }
    }
    return 0.0;
}

double CoefficientProfile::derivative(double x) const {
    if (kind_ != Kind::sampled) return 0.0;
    const double t = reversed_ ? offset_ + (length_ - x) / stretch_ : offset_ + x / stretch_;
    const double dtdx = (reversed_ ? -1.0 : 1.0) / stretch_;
    return scale_ * sample_slope(t) * dtdx;
}

std::vector<ProfilePiece> CoefficientProfile::pieces() const {
    if (kind_ == Kind::sampled) throw Error("pieces() requires a piecewise-constant profile");
    std::vector<ProfilePiece> out;
    double begin = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double end = i < breakpoints_.size() ? breakpoints_[i] : length_;
        out.push_back({begin, end, values_[i]});
        begin = end;
    }
    return out;
}

CoefficientProfile CoefficientProfile::restricted(double x0, double x1) const {
    if (!(x0 >= 0.0 && x1 <= length_ * (1 + 1e-12) && x1 > x0))
        throw Error("restriction interval outside the profile domain");
    x1 = std::min(x1, length_);
    const double len = x1 - x0;
    switch (kind_) {
    case Kind::constant:
        return constant(values_.front(), len);
    case Kind::piecewise: {
        std::vector<double> bps, vals;
        for (const auto& p : pieces()) {
            const double lo = std::max(p.begin, x0), hi = std::min(p.end, x1);
            // Pieces narrower than a rounding error are dropped.
            if (hi - lo <= 1e-12 * len) continue;
            if (!vals.empty()) bps.push_back(lo - x0);
            vals.push_back(p.value);
        }
        if (vals.size() == 1) return constant(vals.front(), len);
        return piecewise(std::move(bps), std::move(vals), len);
    }
    case Kind::sampled: {
        CoefficientProfile p = *this;
        p.length_ = len;
        p.offset_ = reversed_ ? offset_ + (length_ - x1) / stretch_ : offset_ + x0 / stretch_;
        p.compute_average();
        return p;
    }
    }
    return *this;
}

CoefficientProfile CoefficientProfile::transformed(double factor, double stretch) const {
    if (!(stretch > 0.0)) throw Error("stretch must be positive");
    switch (kind_) {
    case Kind::constant:
        return constant(factor * values_.front(), stretch * length_);
    case Kind::piecewise: {
        std::vector<double> bps = breakpoints_, vals = values_;
        for (double& b : bps) b *= stretch;
        for (double& v : vals) v *= factor;
        return piecewise(std::move(bps), std::move(vals), stretch * length_);
    }
    case Kind::sampled: {
        CoefficientProfile p = *this;
        p.length_ = stretch * length_;
        p.stretch_ = stretch_ * stretch;
        p.scale_ = scale_ * factor;
        p.average_ = average_ * factor;
        return p;
    }
    }
    return *this;
}

CoefficientProfile CoefficientProfile::reversed() const {
    switch (kind_) {
    case Kind::constant:
        return *this;
    case Kind::piecewise: {
        std::vector<double> bps, vals(values_.rbegin(), values_.rend());
        for (auto it = breakpoints_.rbegin(); it != breakpoints_.rend(); ++it)
            bps.push_back(length_ - *it);
        return piecewise(std::move(bps), std::move(vals), length_);
    }
    case Kind::sampled: {
        CoefficientProfile p = *this;
        p.reversed_ = !reversed_;
        return p;
    }
    }
    return *this;
}

}  // namespace dwg
