#include "dwg/linalg.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace dwg {

ScaledComplex log_determinant(const CMatrix& A) {
    if (A.rows() == 0) return ScaledComplex{Complex{1.0, 0.0}};
    // Row equilibration keeps the elimination free of overflow in |z|^2.
    CMatrix B = A;
    double log_scale = 0.0;
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        const double r = B.row(i).cwiseAbs().maxCoeff();
        if (r == 0.0) return ScaledComplex{};
        B.row(i) /= r;
        log_scale += std::log(r);
    }
    Eigen::PartialPivLU<CMatrix> lu(B);
    const CMatrix& LU = lu.matrixLU();
    Complex mant{lu.permutationP().determinant() > 0 ? 1.0 : -1.0, 0.0};
    for (Eigen::Index i = 0; i < LU.rows(); ++i) {
        const Complex p = LU(i, i);
        const double a = std::abs(p);
        if (a == 0.0) return ScaledComplex{};
        mant *= p / a;
        log_scale += std::log(a);
    }
    ScaledComplex out;
    out.mantissa = mant / std::abs(mant);
    out.log_scale = log_scale;
    return out;
}

Eigen::VectorXd singular_values(const CMatrix& A) {
    if (A.rows() <= 48) return Eigen::JacobiSVD<CMatrix>(A).singularValues();
    return Eigen::BDCSVD<CMatrix>(A).singularValues();
}

double normalized_singular_ratio(const CMatrix& A) {
    CMatrix B = A;
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        const double n = B.row(i).norm();
        if (n == 0.0) return 0.0;
        B.row(i) /= n;
    }
    const Eigen::VectorXd s = singular_values(B);
    return s(s.size() - 1) / s(0);
}

Complex polynomial_value(const std::vector<Complex>& c, Complex y) {
    Complex acc{0.0, 0.0};
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * y + *it;
    return acc;
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
    std::size_t deg = coeffs.size();
    while (deg > 0 && coeffs[deg - 1] == Complex{0.0, 0.0}) --deg;
    if (deg <= 1) return {};
    const Eigen::Index n = static_cast<Eigen::Index>(deg - 1);
    const Complex lead = coeffs[deg - 1];
    const bool real = std::all_of(coeffs.begin(), coeffs.begin() + static_cast<long>(deg),
                                  [](Complex z) { return z.imag() == 0.0; });

    std::vector<Complex> roots;
    if (real) {
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 1; i < n; ++i) C(i, i - 1) = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) C(i, n - 1) = -coeffs[static_cast<std::size_t>(i)].real() / lead.real();
        Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
        for (Eigen::Index i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
    } else {
        CMatrix C = CMatrix::Zero(n, n);
        for (Eigen::Index i = 1; i < n; ++i) C(i, i - 1) = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) C(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / lead;
        Eigen::ComplexEigenSolver<CMatrix> es(C, false);
        for (Eigen::Index i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
    }

    std::vector<Complex> dc;
    for (std::size_t k = 1; k < deg; ++k) dc.push_back(static_cast<double>(k) * coeffs[k]);
    const std::vector<Complex> p(coeffs.begin(), coeffs.begin() + static_cast<long>(deg));
    for (auto& r : roots) {
        // Accept a Newton step only while it reduces |p|; multiple roots stall gracefully.
        double best = std::abs(polynomial_value(p, r));
        for (int it = 0; it < 8 && best > 0.0; ++it) {
            const Complex d = polynomial_value(dc, r);
            if (d == Complex{0.0, 0.0}) break;
            const Complex next = r - polynomial_value(p, r) / d;
            const double v = std::abs(polynomial_value(p, next));
            if (!(v < best)) break;
            r = next;
            best = v;
        }
    }
    return roots;
}

}  // namespace dwg
