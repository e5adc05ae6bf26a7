#pragma once

#include <Eigen/Dense>

namespace sufcast {

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
struct SortedEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // unit columns, sign-fixed
};

/// Flips each column so that its largest-magnitude entry (first one on ties)
/// is nonnegative.
void fix_column_signs(Eigen::MatrixXd& m);

/// Index of the first entry of maximal magnitude.
Eigen::Index first_max_abs_index(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Symmetric eigendecomposition with eigenvalues sorted descending, columns
/// sign-fixed, and eigenvalues equal within `tie_tolerance` (relative to the
/// largest magnitude) ordered by the first index of each vector's maximal entry.
SortedEigen sorted_symmetric_eigen(const Eigen::MatrixXd& m, double tie_tolerance = 1e-12);

/// Orthonormal basis for the column space of a full-column-rank matrix.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m);

}  // namespace sufcast
