#pragma once

#include <vector>

namespace dwg {

/// A constant-valued piece [begin, end) of a profile.
struct ProfilePiece {
    double begin;
    double end;
    double value;
};

/// A real coefficient function on an edge [0, length]: damping a_j(x) or
/// potential b_j(x).
///
/// Three representations are supported:
///  - constant,
///  - piecewise constant with interior breakpoints,
///  - samples on a uniform grid, evaluated through a C^1 cubic Hermite
///    interpolant whose nodal slopes are fourth-order finite differences.
///
/// The edge average is cached on construction. Profiles are immutable.
class CoefficientProfile {
public:
    enum class Kind { constant, piecewise, sampled };

    CoefficientProfile() : values_{0.0} {}

    static CoefficientProfile constant(double value, double length);
    /// `breakpoints` are strictly increasing interior points of (0, length);
    /// `values.size() == breakpoints.size() + 1`.
    static CoefficientProfile piecewise(std::vector<double> breakpoints,
                                        std::vector<double> values, double length);
    /// `values` sampled at length * k / (n - 1), k = 0..n-1, n >= 4.
    static CoefficientProfile sampled(std::vector<double> values, double length);

    Kind kind() const { return kind_; }
    double length() const { return length_; }
    double average() const { return average_; }
    bool is_constant() const;
    /// Constant or piecewise constant.
    bool is_piecewise_constant() const { return kind_ != Kind::sampled; }

    double operator()(double x) const;
    /// Derivative of the interpolant; zero away from breakpoints for
    /// piecewise-constant profiles.
    double derivative(double x) const;

    /// Constant pieces covering [0, length]; only for piecewise-constant kinds.
    std::vector<ProfilePiece> pieces() const;
    /// Interior discontinuities (piecewise kind only).
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

    /// The profile on [x0, x1], re-parameterized to [0, x1 - x0].
    CoefficientProfile restricted(double x0, double x1) const;
    /// x -> factor * p(x / stretch) on [0, stretch * length].
    CoefficientProfile transformed(double factor, double stretch) const;
    /// Same profile with the coordinate reversed: x -> p(length - x).
    CoefficientProfile reversed() const;

    /// Number of grid points of a sampled profile restricted to this domain
    /// (constant: 0).
    int grid_points() const;

private:
    double sample_interp(double t) const;  // t in original grid coordinates
    double sample_slope(double t) const;
    double integrate_sampled(double t0, double t1) const;
    void compute_slopes();
    void compute_average();

    Kind kind_ = Kind::constant;
    double length_ = 1.0;
    double average_ = 0.0;
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    // Sampled representation: grid spans [0, grid_length_] of the original
    // coordinate; this profile covers [offset_, offset_ + length_], optionally
    // reversed and scaled.
    std::vector<double> slopes_;
    double grid_length_ = 0.0;
    double offset_ = 0.0;
    double scale_ = 1.0;    // value multiplier
    double stretch_ = 1.0;  // physical x = stretch * original coordinate
    bool reversed_ = false;
};

}  // namespace dwg
