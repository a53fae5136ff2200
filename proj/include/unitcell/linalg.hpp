#pragma once

#include <functional>
#include <vector>

#include "unitcell/dense.hpp"

namespace unitcell {

// Block compressed-sparse-row matrix with a uniform square block size.
// The sparsity pattern is fixed at construction; block columns within a
// row are sorted and every row carries its diagonal block.
class SparseBlockMatrix {
public:
    SparseBlockMatrix() = default;
    // adjacency[i] lists the off-diagonal block columns of block row i
    // (duplicates and the diagonal entry are tolerated)
    SparseBlockMatrix(int n_block_rows, int block_size,
                      const std::vector<std::vector<int>>& adjacency);

    int n_block_rows() const { return nbr_; }
    int block_size() const { return bs_; }
    int rows() const { return nbr_ * bs_; }
    int n_blocks() const { return int(col_idx_.size()); }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }

    // dense storage of block k, row-major bs x bs
    double* block(int k) { return blocks_.data() + size_t(k) * bs_ * bs_; }
    const double* block(int k) const { return blocks_.data() + size_t(k) * bs_ * bs_; }

    // index of block (brow, bcol), or -1 if not in the pattern
    int find(int brow, int bcol) const;
    // checked accessor into block (brow, bcol)
    double& at(int brow, int bcol, int i, int j);

    void set_zero();
    // y = A x (OpenMP over block rows) and the serial reference kernel
    void matvec(const double* x, double* y) const;
    void matvec_serial(const double* x, double* y) const;

    Dense to_dense() const;

private:
    int nbr_ = 0, bs_ = 0;
    std::vector<int> row_ptr_, col_idx_;
    std::vector<double> blocks_;
};

// Block ILU(0) preconditioner on the matrix pattern. If a pivot block is
// singular the factorization retries with a scaled diagonal shift.
class BlockILU0 {
public:
    explicit BlockILU0(const SparseBlockMatrix& A) { factor(A); }
    // refresh the factors for new values on the same pattern
    void factor(const SparseBlockMatrix& A);
    // z = M^-1 r
    void apply(const double* r, double* z) const;
    double diagonal_shift() const { return shift_; }

private:
    int nbr_ = 0, bs_ = 0;
    std::vector<int> row_ptr_, col_idx_, diag_;
    std::vector<double> blocks_;   // unit-lower L (scaled) and U factors
    std::vector<double> diag_inv_; // explicit inverses of the pivot blocks
    double shift_ = 0.0;

    bool try_factor(const SparseBlockMatrix& A, double shift);
};

using LinOp = std::function<void(const double* x, double* y)>;

struct GmresOptions {
    int restart = 100;
    int max_iters = 2000;
    double tol = 1e-10; // relative residual
};

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
};

// Right-preconditioned restarted GMRES. `precond` may be null (identity).
// x holds the initial guess on entry and the solution on return.
GmresResult gmres(int n, const LinOp& A, const LinOp& precond, const double* b, double* x,
                  const GmresOptions& opts = {});

GmresResult gmres(const SparseBlockMatrix& A, const BlockILU0* precond, const double* b,
                  double* x, const GmresOptions& opts = {});

} // namespace unitcell
