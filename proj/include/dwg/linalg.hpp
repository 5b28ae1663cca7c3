#pragma once

#include <vector>

#include "dwg/types.hpp"

namespace dwg {

/// det(A) by partial-pivot LU with the exponent carried separately.
ScaledComplex log_determinant(const CMatrix& A);

/// sigma_min / sigma_max after scaling each row to unit 2-norm; 0 for a zero row.
double normalized_singular_ratio(const CMatrix& A);

/// Singular values of A in decreasing order.
Eigen::VectorXd singular_values(const CMatrix& A);

/// Roots of sum_k c[k] y^k (ascending coefficients, leading one nonzero) from
/// the companion matrix, each polished by Newton on the original polynomial.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs);

Complex polynomial_value(const std::vector<Complex>& coeffs, Complex y);

}  // namespace dwg
