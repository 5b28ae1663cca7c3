#pragma once

#include <string>
#include <vector>

#include "dwg/secular.hpp"

namespace dwg {

struct ComplexWindow {
    double re_min = -1.0;
    double re_max = 1.0;
    double im_min = -1.0;
    double im_max = 1.0;

    bool contains(Complex z, double margin = 0.0) const {
        return z.real() >= re_min - margin && z.real() <= re_max + margin && z.imag() >= im_min - margin &&
               z.imag() <= im_max + margin;
    }
    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
    /// Throws ValidationError for an empty or non-finite window.
    void check() const;
};

struct Root {
    Complex lambda;
    int multiplicity = 1;
    double residual = 0.0;          // normalized singular ratio, primary backend
    double backend_residual = -1.0;  // worst over certifying backends; -1 if none ran
};

struct EigenvalueSet {
    ComplexWindow window;  // after boundary nudging
    std::vector<Root> roots;  // sorted by Im, then Re
    int count = 0;            // argument-principle count over `window`
    int total_multiplicity() const;
};

struct RootOptions {
    double tol = 1e-8;
    int workers = 1;
    double strip_height = kTwoPi;  // the window is cut into horizontal strips no taller than this
    bool symmetrize = true;        // average conjugate pairs when the problem is conjugate-symmetric
    std::vector<const SecularSystem*> certify;  // extra backends evaluated at every root
    const SecularSystem* polish = nullptr;      // optional second Newton pass on another backend
};

/// Winding number of the flower determinant around the window boundary.
/// The window sides are nudged (deterministically, at most 1e-2) off zeros.
int count_zeros(const SecularSystem& flower, const ComplexWindow& window, const RootOptions& opt = {});

/// All zeros in the window with multiplicities. Requires a flower-backend
/// system (entire determinant). Throws SolverError when the refined roots do
/// not account for the argument-principle count.
EigenvalueSet find_roots(const SecularSystem& flower, const ComplexWindow& window, const RootOptions& opt = {});

/// Newton iteration on the secular determinant with central differences.
/// Returns false when 100 steps do not converge.
bool newton_refine(const SecularSystem& system, Complex& lambda, double tol, int max_iter = 100);

struct SequenceFit {
    std::vector<int> n;
    std::vector<Complex> lambdas;
    Complex c0;  // fitted constant term of lambda_n - i period n
    Complex c1;  // fitted coefficient of 1/n
    double max_fit_error = 0.0;
    std::vector<std::string> jumps;  // diagnostics: duplicate limits, large offsets, failed Newton
};

/// Follows lambda_n = i period n + c0 + O(1/n) for each n, fitting {1, 1/n}.
SequenceFit track_sequence(const SecularSystem& system, Complex c0_guess, const std::vector<int>& n_values,
                           double period = kTwoPi, double tol = 1e-10);

std::vector<int> n_range(int first, int last);

}  // namespace dwg
