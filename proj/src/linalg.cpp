#include "sufcast/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sufcast/error.hpp"

namespace sufcast {

Eigen::Index first_max_abs_index(const Eigen::Ref<const Eigen::VectorXd>& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    }
    return best;
}

void fix_column_signs(Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m.rows() == 0) break;
        if (m(first_max_abs_index(m.col(j)), j) < 0.0) m.col(j) *= -1.0;
    }
}

SortedEigen sorted_symmetric_eigen(const Eigen::MatrixXd& m, double tie_tolerance) {
    if (m.rows() != m.cols()) throw ConfigError("eigendecomposition needs a square matrix");
    if (!m.allFinite()) throw NumericalError("eigendecomposition of a non-finite matrix");
    const Eigen::Index n = m.rows();
    SortedEigen out;
    if (n == 0) return out;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

    Eigen::MatrixXd vectors = solver.eigenvectors();
    fix_column_signs(vectors);
    const Eigen::VectorXd& values = solver.eigenvalues();

    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    const double tol = tie_tolerance * scale;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::vector<Eigen::Index> lead(order.size());
    for (Eigen::Index j = 0; j < n; ++j) lead[static_cast<std::size_t>(j)] = first_max_abs_index(vectors.col(j));

    // Sort descending, then reorder runs of tied eigenvalues by leading index.
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t stop = start + 1;
        while (stop < order.size() && values(order[start]) - values(order[stop]) <= tol) ++stop;
        std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop),
                         [&](Eigen::Index a, Eigen::Index b) {
                             return lead[static_cast<std::size_t>(a)] < lead[static_cast<std::size_t>(b)];
                         });
        start = stop;
    }

    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values(j) = values(order[static_cast<std::size_t>(j)]);
        out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
    }
    return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    if (qr.rank() < m.cols()) throw NumericalError("basis matrix is rank deficient");
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return q;
}

}  // namespace sufcast
