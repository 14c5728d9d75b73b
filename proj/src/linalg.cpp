#include "projcon/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace projcon {

namespace {

void require_finite(const Matrix& M, const char* who) {
    if (!M.allFinite()) throw invalid_input(std::string(who) + ": non-finite entries");
}

}  // namespace

Subspace Subspace::zero(int ambient) {
    Subspace s;
    s.ambient = ambient;
    s.basis = Matrix::Zero(ambient, 0);
    return s;
}

Subspace Subspace::full(int ambient) {
    Subspace s;
    s.ambient = ambient;
    s.basis = Matrix::Identity(ambient, ambient);
    return s;
}

bool Subspace::valid() const {
    if (basis.rows() != ambient || dim() < 0 || dim() > ambient) return false;
    if (dim() == 0) return true;
    Matrix gram = basis.transpose() * basis;
    return (gram - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff() <= 1e-10;
}

bool Projector::valid() const {
    if (mat.rows() != mat.cols()) return false;
    if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-10) return false;
    return (mat * mat - mat).cwiseAbs().maxCoeff() <= 1e-9;
}

BlockMatrix::BlockMatrix(int m, int n, std::vector<Matrix> blocks)
    : m_(m), n_(n), blocks_(std::move(blocks)) {
    if (m < 0 || n < 0 || blocks_.size() != static_cast<size_t>(m) * m)
        throw invalid_input("BlockMatrix: expected m*m blocks");
    for (const Matrix& b : blocks_)
        if (b.rows() != n || b.cols() != n)
            throw invalid_input("BlockMatrix: ragged block structure");
}

BlockMatrix BlockMatrix::zero(int m, int n) {
    std::vector<Matrix> blocks(static_cast<size_t>(m) * m, Matrix::Zero(n, n));
    return BlockMatrix(m, n, std::move(blocks));
}

BlockMatrix BlockMatrix::identity(int m, int n) {
    BlockMatrix q = zero(m, n);
    for (int i = 0; i < m; ++i) q.block(i, i) = Matrix::Identity(n, n);
    return q;
}

BlockMatrix BlockMatrix::from_dense(const Matrix& dense, int m, int n) {
    if (dense.rows() != static_cast<long>(m) * n || dense.cols() != static_cast<long>(m) * n)
        throw invalid_input("BlockMatrix::from_dense: size mismatch");
    BlockMatrix q = zero(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) q.block(i, j) = dense.block(i * n, j * n, n, n);
    return q;
}

Matrix BlockMatrix::dense() const {
    Matrix out = Matrix::Zero(static_cast<long>(m_) * n_, static_cast<long>(m_) * n_);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j) out.block(i * n_, j * n_, n_, n_) = block(i, j);
    return out;
}

BlockMatrix BlockMatrix::multiply(const BlockMatrix& rhs) const {
    if (rhs.m_ != m_ || rhs.n_ != n_) throw invalid_input("BlockMatrix::multiply: size mismatch");
    BlockMatrix out = zero(m_, n_);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j) {
            Matrix acc = Matrix::Zero(n_, n_);
            for (int k = 0; k < m_; ++k) acc.noalias() += block(i, k) * rhs.block(k, j);
            out.block(i, j) = std::move(acc);
        }
    return out;
}

Subspace kernel_basis(const Matrix& A, double rel_tol) {
    require_finite(A, "kernel_basis");
    if (A.cols() < 1) throw invalid_input("kernel_basis: need at least one column");
    if (rel_tol <= 0) throw invalid_input("kernel_basis: rel_tol must be positive");
    const int n = static_cast<int>(A.cols());
    if (A.rows() == 0) return Subspace::full(n);

    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff =
        rel_tol * (sv.size() ? sv(0) : 0.0) * static_cast<double>(std::max(A.rows(), A.cols()));
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff && sv(i) > 0.0) ++rank;

    Subspace s;
    s.ambient = n;
    s.basis = svd.matrixV().rightCols(n - rank);
    return s;
}

Projector projector_onto(const Subspace& S) {
    Projector p;
    p.mat = S.dim() == 0 ? Matrix::Zero(S.ambient, S.ambient)
                         : Matrix(S.basis * S.basis.transpose());
    return p;
}

Subspace intersect(const std::vector<Subspace>& subspaces, double rel_tol) {
    if (subspaces.empty()) throw invalid_input("intersect: empty list");
    const int n = subspaces.front().ambient;
    for (const Subspace& s : subspaces)
        if (s.ambient != n) throw invalid_input("intersect: mismatched ambient dimensions");

    // x lies in every S_i iff (I - P_i) x = 0 for every i.
    Matrix stacked(static_cast<long>(subspaces.size()) * n, n);
    for (size_t i = 0; i < subspaces.size(); ++i) {
        Matrix complement = Matrix::Identity(n, n) - projector_onto(subspaces[i]).mat;
        stacked.middleRows(static_cast<long>(i) * n, n) = complement;
    }
    return kernel_basis(stacked, rel_tol);
}

bool subspace_equal(const Subspace& a, const Subspace& b, double tol) {
    if (a.ambient != b.ambient) throw invalid_input("subspace_equal: mismatched ambient dimensions");
    if (a.dim() != b.dim()) return false;
    return induced_two_norm(projector_onto(a).mat - projector_onto(b).mat) <= tol;
}

double induced_two_norm(const Matrix& M) {
    require_finite(M, "induced_two_norm");
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

double spectral_radius(const Matrix& M, int size_cap) {
    require_finite(M, "spectral_radius");
    if (M.rows() != M.cols()) throw invalid_input("spectral_radius: matrix must be square");
    if (M.rows() > size_cap)
        throw capacity_error("spectral_radius: dimension " + std::to_string(M.rows()) +
                             " exceeds cap " + std::to_string(size_cap));
    if (M.rows() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double mixed_matrix_norm(const BlockMatrix& Q) {
    double worst = 0.0;
    for (int i = 0; i < Q.block_rows(); ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < Q.block_rows(); ++j) row_sum += induced_two_norm(Q.block(i, j));
        worst = std::max(worst, row_sum);
    }
    return worst;
}

Vector least_norm_solution(const Matrix& A, const Vector& b, double rel_tol) {
    require_finite(A, "least_norm_solution");
    if (A.rows() != b.size()) throw invalid_input("least_norm_solution: row count mismatch");
    if (A.rows() == 0) return Vector::Zero(A.cols());
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    cod.setThreshold(rel_tol * static_cast<double>(std::max(A.rows(), A.cols())));
    return cod.solve(b);
}

}  // namespace projcon
