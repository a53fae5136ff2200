#include "unitcell/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace unitcell {

SparseBlockMatrix::SparseBlockMatrix(int n_block_rows, int block_size,
                                     const std::vector<std::vector<int>>& adjacency)
    : nbr_(n_block_rows), bs_(block_size) {
    if (int(adjacency.size()) != n_block_rows)
        throw std::invalid_argument("SparseBlockMatrix: adjacency size mismatch");
    row_ptr_.assign(nbr_ + 1, 0);
    std::vector<int> cols;
    for (int i = 0; i < nbr_; ++i) {
        cols.assign(adjacency[i].begin(), adjacency[i].end());
        cols.push_back(i);
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        for (int c : cols) {
            if (c < 0 || c >= nbr_)
                throw std::invalid_argument("SparseBlockMatrix: block column out of range");
            col_idx_.push_back(c);
        }
        row_ptr_[i + 1] = int(col_idx_.size());
    }
    blocks_.assign(size_t(col_idx_.size()) * bs_ * bs_, 0.0);
}

int SparseBlockMatrix::find(int brow, int bcol) const {
    const int lo = row_ptr_[brow], hi = row_ptr_[brow + 1];
    auto it = std::lower_bound(col_idx_.begin() + lo, col_idx_.begin() + hi, bcol);
    if (it == col_idx_.begin() + hi || *it != bcol) return -1;
    return int(it - col_idx_.begin());
}

double& SparseBlockMatrix::at(int brow, int bcol, int i, int j) {
    const int k = find(brow, bcol);
    if (k < 0) throw std::out_of_range("SparseBlockMatrix: block not in pattern");
    return block(k)[i * bs_ + j];
}

void SparseBlockMatrix::set_zero() { std::fill(blocks_.begin(), blocks_.end(), 0.0); }

namespace {

inline void block_gemv_acc(const double* a, const double* x, double* y, int bs) {
    for (int i = 0; i < bs; ++i) {
        double s = 0.0;
        const double* row = a + size_t(i) * bs;
        for (int j = 0; j < bs; ++j) s += row[j] * x[j];
        y[i] += s;
    }
}

// C -= A * B for bs x bs row-major blocks
inline void block_gemm_sub(const double* a, const double* b, double* c, int bs) {
    for (int i = 0; i < bs; ++i)
        for (int k = 0; k < bs; ++k) {
            const double aik = a[size_t(i) * bs + k];
            if (aik == 0.0) continue;
            const double* brow = b + size_t(k) * bs;
            double* crow = c + size_t(i) * bs;
            for (int j = 0; j < bs; ++j) crow[j] -= aik * brow[j];
        }
}

// C = A * B
inline void block_gemm(const double* a, const double* b, double* c, int bs) {
    std::memset(c, 0, sizeof(double) * bs * bs);
    for (int i = 0; i < bs; ++i)
        for (int k = 0; k < bs; ++k) {
            const double aik = a[size_t(i) * bs + k];
            if (aik == 0.0) continue;
            const double* brow = b + size_t(k) * bs;
            double* crow = c + size_t(i) * bs;
            for (int j = 0; j < bs; ++j) crow[j] += aik * brow[j];
        }
}

} // namespace

void SparseBlockMatrix::matvec(const double* x, double* y) const {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nbr_; ++i) {
        double* yi = y + size_t(i) * bs_;
        std::memset(yi, 0, sizeof(double) * bs_);
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            block_gemv_acc(block(k), x + size_t(col_idx_[k]) * bs_, yi, bs_);
    }
}

void SparseBlockMatrix::matvec_serial(const double* x, double* y) const {
    for (int i = 0; i < nbr_; ++i) {
        double* yi = y + size_t(i) * bs_;
        std::memset(yi, 0, sizeof(double) * bs_);
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            block_gemv_acc(block(k), x + size_t(col_idx_[k]) * bs_, yi, bs_);
    }
}

Dense SparseBlockMatrix::to_dense() const {
    Dense D(rows(), rows());
    for (int i = 0; i < nbr_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const int j = col_idx_[k];
            const double* b = block(k);
            for (int ii = 0; ii < bs_; ++ii)
                for (int jj = 0; jj < bs_; ++jj)
                    D(i * bs_ + ii, j * bs_ + jj) = b[ii * bs_ + jj];
        }
    return D;
}

bool BlockILU0::try_factor(const SparseBlockMatrix& A, double shift) {
    const int bs = bs_, bsq = bs * bs;
    blocks_.assign(A.block(0), A.block(0) + size_t(A.n_blocks()) * bsq);
    diag_inv_.assign(size_t(nbr_) * bsq, 0.0);
    if (shift != 0.0)
        for (int i = 0; i < nbr_; ++i) {
            double* d = blocks_.data() + size_t(diag_[i]) * bsq;
            for (int ii = 0; ii < bs; ++ii) d[ii * bs + ii] += shift;
        }

    std::vector<double> tmp(bsq);
    for (int i = 0; i < nbr_; ++i) {
        for (int kk = row_ptr_[i]; kk < row_ptr_[i + 1]; ++kk) {
            const int k = col_idx_[kk];
            if (k >= i) break;
            // L_ik = A_ik * inv(U_kk)
            double* aik = blocks_.data() + size_t(kk) * bsq;
            block_gemm(aik, diag_inv_.data() + size_t(k) * bsq, tmp.data(), bs);
            std::memcpy(aik, tmp.data(), sizeof(double) * bsq);
            // update the remainder of row i on the shared pattern
            for (int jj = kk + 1; jj < row_ptr_[i + 1]; ++jj) {
                const int j = col_idx_[jj];
                // entry (k, j) of the U part
                int pos = -1;
                for (int q = row_ptr_[k]; q < row_ptr_[k + 1]; ++q)
                    if (col_idx_[q] == j) { pos = q; break; }
                if (pos < 0) continue;
                block_gemm_sub(aik, blocks_.data() + size_t(pos) * bsq,
                               blocks_.data() + size_t(jj) * bsq, bs);
            }
        }
        Dense d(bs, bs);
        std::memcpy(d.data(), blocks_.data() + size_t(diag_[i]) * bsq, sizeof(double) * bsq);
        try {
            Dense dinv = DenseLU(d).inverse();
            std::memcpy(diag_inv_.data() + size_t(i) * bsq, dinv.data(), sizeof(double) * bsq);
        } catch (const std::runtime_error&) {
            return false;
        }
    }
    return true;
}

void BlockILU0::factor(const SparseBlockMatrix& A) {
    nbr_ = A.n_block_rows();
    bs_ = A.block_size();
    row_ptr_ = A.row_ptr();
    col_idx_ = A.col_idx();
    diag_.resize(nbr_);
    for (int i = 0; i < nbr_; ++i) {
        diag_[i] = A.find(i, i);
        if (diag_[i] < 0) throw std::runtime_error("BlockILU0: missing diagonal block");
    }
    double max_diag = 0.0;
    for (int i = 0; i < nbr_; ++i) {
        const double* d = A.block(diag_[i]);
        for (int k = 0; k < bs_ * bs_; ++k) max_diag = std::max(max_diag, std::fabs(d[k]));
    }
    shift_ = 0.0;
    if (try_factor(A, 0.0)) return;
    for (double s = 1e-12; s <= 1e-2; s *= 100.0) {
        shift_ = s * std::max(max_diag, 1.0);
        if (try_factor(A, shift_)) return;
    }
    throw std::runtime_error("BlockILU0: factorization failed even with diagonal shift");
}

void BlockILU0::apply(const double* r, double* z) const {
    const int bs = bs_, bsq = bs * bs;
    // forward sweep with unit-lower L
    std::vector<double> y(size_t(nbr_) * bs);
    for (int i = 0; i < nbr_; ++i) {
        double* yi = y.data() + size_t(i) * bs;
        std::memcpy(yi, r + size_t(i) * bs, sizeof(double) * bs);
        for (int kk = row_ptr_[i]; kk < row_ptr_[i + 1]; ++kk) {
            const int k = col_idx_[kk];
            if (k >= i) break;
            const double* lik = blocks_.data() + size_t(kk) * bsq;
            const double* yk = y.data() + size_t(k) * bs;
            for (int ii = 0; ii < bs; ++ii) {
                double s = 0.0;
                for (int jj = 0; jj < bs; ++jj) s += lik[ii * bs + jj] * yk[jj];
                yi[ii] -= s;
            }
        }
    }
    // backward sweep with U
    std::vector<double> t(bs);
    for (int i = nbr_ - 1; i >= 0; --i) {
        double* yi = y.data() + size_t(i) * bs;
        for (int kk = row_ptr_[i + 1] - 1; kk >= row_ptr_[i]; --kk) {
            const int j = col_idx_[kk];
            if (j <= i) break;
            const double* uij = blocks_.data() + size_t(kk) * bsq;
            const double* zj = z + size_t(j) * bs;
            for (int ii = 0; ii < bs; ++ii) {
                double s = 0.0;
                for (int jj = 0; jj < bs; ++jj) s += uij[ii * bs + jj] * zj[jj];
                yi[ii] -= s;
            }
        }
        const double* dinv = diag_inv_.data() + size_t(i) * bsq;
        for (int ii = 0; ii < bs; ++ii) {
            double s = 0.0;
            for (int jj = 0; jj < bs; ++jj) s += dinv[ii * bs + jj] * yi[jj];
            t[ii] = s;
        }
        std::memcpy(z + size_t(i) * bs, t.data(), sizeof(double) * bs);
    }
}

namespace {

double dot(int n, const double* a, const double* b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double nrm2(int n, const double* a) { return std::sqrt(dot(n, a, a)); }

} // namespace

GmresResult gmres(int n, const LinOp& A, const LinOp& precond, const double* b, double* x,
                  const GmresOptions& opts) {
    GmresResult res;
    const int m = std::min(opts.restart, n);
    const double bnorm = nrm2(n, b);
    if (bnorm == 0.0) {
        std::fill(x, x + n, 0.0);
        res.converged = true;
        return res;
    }

    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
    std::vector<std::vector<double>> Z(m, std::vector<double>(n));
    std::vector<double> H((m + 1) * m, 0.0);
    std::vector<double> cs(m), sn(m), g(m + 1);
    std::vector<double> w(n), r(n);

    auto Hm = [&](int i, int j) -> double& { return H[size_t(i) * m + j]; };

    int total_iters = 0;
    while (total_iters < opts.max_iters) {
        // r = b - A x
        A(x, r.data());
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double beta = nrm2(n, r.data());
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= opts.tol) {
            res.converged = true;
            return res;
        }
        for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        for (; j < m && total_iters < opts.max_iters; ++j, ++total_iters) {
            if (precond)
                precond(V[j].data(), Z[j].data());
            else
                std::copy(V[j].begin(), V[j].end(), Z[j].begin());
            A(Z[j].data(), w.data());
            // modified Gram-Schmidt
            for (int i = 0; i <= j; ++i) {
                Hm(i, j) = dot(n, w.data(), V[i].data());
                for (int k = 0; k < n; ++k) w[k] -= Hm(i, j) * V[i][k];
            }
            Hm(j + 1, j) = nrm2(n, w.data());
            if (Hm(j + 1, j) > 0.0)
                for (int k = 0; k < n; ++k) V[j + 1][k] = w[k] / Hm(j + 1, j);
            // apply stored rotations, then the new one
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * Hm(i, j) + sn[i] * Hm(i + 1, j);
                Hm(i + 1, j) = -sn[i] * Hm(i, j) + cs[i] * Hm(i + 1, j);
                Hm(i, j) = t;
            }
            const double denom = std::hypot(Hm(j, j), Hm(j + 1, j));
            if (denom == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = Hm(j, j) / denom;
                sn[j] = Hm(j + 1, j) / denom;
            }
            Hm(j, j) = denom;
            Hm(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            res.iterations = total_iters + 1;
            res.relative_residual = std::fabs(g[j + 1]) / bnorm;
            if (res.relative_residual <= opts.tol) {
                ++j;
                ++total_iters;
                break;
            }
        }
        // back substitution and update
        std::vector<double> ym(j);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= Hm(i, k) * ym[k];
            ym[i] = s / Hm(i, i);
        }
        for (int i = 0; i < j; ++i)
            for (int k = 0; k < n; ++k) x[k] += ym[i] * Z[i][k];
        if (res.relative_residual <= opts.tol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

GmresResult gmres(const SparseBlockMatrix& A, const BlockILU0* precond, const double* b,
                  double* x, const GmresOptions& opts) {
    LinOp op = [&A](const double* in, double* out) { A.matvec(in, out); };
    LinOp pc;
    if (precond) pc = [precond](const double* in, double* out) { precond->apply(in, out); };
    return gmres(A.rows(), op, pc, b, x, opts);
}

} // namespace unitcell
