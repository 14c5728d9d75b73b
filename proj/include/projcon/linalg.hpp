#pragma once

#include <Eigen/Dense>
#include <vector>

#include "projcon/errors.hpp"

namespace projcon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative singular-value threshold used for all rank decisions.
inline constexpr double kDefaultRankTol = 1e-10;

// Hard cap on the side length of dense eigendecompositions.
inline constexpr int kEigenSizeCap = 512;

// Linear subspace of R^n stored as an orthonormal column basis.
// k == 0 encodes the zero subspace; k == ambient the full space.
struct Subspace {
    int ambient = 0;
    Matrix basis;  // ambient x k, B'B = I_k

    int dim() const { return static_cast<int>(basis.cols()); }
    bool is_zero() const { return dim() == 0; }
    bool is_full() const { return dim() == ambient; }

    static Subspace zero(int ambient);
    static Subspace full(int ambient);
    // Checks orthonormality of the stored basis (1e-10 entrywise).
    bool valid() const;
};

// Orthogonal projector: symmetric and idempotent.
struct Projector {
    Matrix mat;

    int dim() const { return static_cast<int>(mat.rows()); }
    Vector apply(const Vector& x) const { return mat * x; }
    bool valid() const;
};

// m x m grid of n x n blocks, row-major block storage.
class BlockMatrix {
public:
    BlockMatrix() = default;
    // Throws invalid_input on ragged block shapes.
    BlockMatrix(int m, int n, std::vector<Matrix> blocks);

    static BlockMatrix zero(int m, int n);
    static BlockMatrix identity(int m, int n);
    static BlockMatrix from_dense(const Matrix& dense, int m, int n);

    int block_rows() const { return m_; }
    int block_dim() const { return n_; }
    const Matrix& block(int i, int j) const { return blocks_[static_cast<size_t>(i) * m_ + j]; }
    Matrix& block(int i, int j) { return blocks_[static_cast<size_t>(i) * m_ + j]; }

    Matrix dense() const;
    BlockMatrix multiply(const BlockMatrix& rhs) const;

private:
    int m_ = 0, n_ = 0;
    std::vector<Matrix> blocks_;
};

// Orthonormal basis of {x : Ax = 0}. A may have zero rows (kernel is all of R^n).
// Numerical rank counts singular values above rel_tol * sigma_max * max(rows, cols).
Subspace kernel_basis(const Matrix& A, double rel_tol = kDefaultRankTol);

// B B' for the stored basis B.
Projector projector_onto(const Subspace& S);

// Intersection of subspaces with common ambient dimension, computed as the
// kernel of the vertically stacked complementary projectors I - P_i.
Subspace intersect(const std::vector<Subspace>& subspaces, double rel_tol = kDefaultRankTol);

// Equal dimension and projector distance |P_a - P_b|_2 <= tol.
bool subspace_equal(const Subspace& a, const Subspace& b, double tol = 1e-8);

// Largest singular value.
double induced_two_norm(const Matrix& M);

// Max |eigenvalue| of a square matrix via dense eigendecomposition.
// Throws capacity_error when the side length exceeds size_cap.
double spectral_radius(const Matrix& M, int size_cap = kEigenSizeCap);

// |<Q>|_inf where <Q>_ij = |Q_ij|_2: the max block-row sum of blockwise
// induced two-norms. Sub-multiplicative; non-expansive operators have norm <= 1.
double mixed_matrix_norm(const BlockMatrix& Q);

// Minimum-norm x with Ax ~= b (pseudo-inverse solve).
Vector least_norm_solution(const Matrix& A, const Vector& b, double rel_tol = kDefaultRankTol);

}  // namespace projcon
