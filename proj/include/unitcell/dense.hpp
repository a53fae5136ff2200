#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace unitcell {

// Small dense row-major matrix used for reference-element tables and the
// dense blocks of the block-sparse systems. Sizes stay below ~100.
class Dense {
public:
    Dense() = default;
    Dense(int rows, int cols) : r_(rows), c_(cols), a_(size_t(rows) * cols, 0.0) {}

    int rows() const { return r_; }
    int cols() const { return c_; }

    double& operator()(int i, int j) { return a_[size_t(i) * c_ + j]; }
    double operator()(int i, int j) const { return a_[size_t(i) * c_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    static Dense identity(int n) {
        Dense I(n, n);
        for (int i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    Dense transposed() const {
        Dense t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend Dense operator*(const Dense& A, const Dense& B) {
        assert(A.c_ == B.r_);
        Dense C(A.r_, B.c_);
        for (int i = 0; i < A.r_; ++i)
            for (int k = 0; k < A.c_; ++k) {
                const double aik = A(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < B.c_; ++j) C(i, j) += aik * B(k, j);
            }
        return C;
    }

    friend Dense operator+(const Dense& A, const Dense& B) {
        assert(A.r_ == B.r_ && A.c_ == B.c_);
        Dense C(A.r_, A.c_);
        for (size_t i = 0; i < A.a_.size(); ++i) C.a_[i] = A.a_[i] + B.a_[i];
        return C;
    }

    friend Dense operator-(const Dense& A, const Dense& B) {
        assert(A.r_ == B.r_ && A.c_ == B.c_);
        Dense C(A.r_, A.c_);
        for (size_t i = 0; i < A.a_.size(); ++i) C.a_[i] = A.a_[i] - B.a_[i];
        return C;
    }

    friend Dense operator*(double s, const Dense& A) {
        Dense C(A.r_, A.c_);
        for (size_t i = 0; i < A.a_.size(); ++i) C.a_[i] = s * A.a_[i];
        return C;
    }

    std::vector<double> matvec(const std::vector<double>& x) const {
        assert(int(x.size()) == c_);
        std::vector<double> y(r_, 0.0);
        for (int i = 0; i < r_; ++i) {
            double s = 0.0;
            for (int j = 0; j < c_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    int r_ = 0, c_ = 0;
    std::vector<double> a_;
};

// LU factorization with partial pivoting; row-major in-place factors.
class DenseLU {
public:
    explicit DenseLU(Dense A) : lu_(std::move(A)), piv_(lu_.rows()) {
        const int n = lu_.rows();
        assert(lu_.cols() == n);
        for (int i = 0; i < n; ++i) piv_[i] = i;
        for (int k = 0; k < n; ++k) {
            int p = k;
            double best = std::fabs(lu_(k, k));
            for (int i = k + 1; i < n; ++i) {
                const double v = std::fabs(lu_(i, k));
                if (v > best) { best = v; p = i; }
            }
            if (best == 0.0) throw std::runtime_error("DenseLU: singular matrix");
            if (p != k) {
                for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
                std::swap(piv_[k], piv_[p]);
            }
            const double d = lu_(k, k);
            for (int i = k + 1; i < n; ++i) {
                lu_(i, k) /= d;
                const double lik = lu_(i, k);
                if (lik == 0.0) continue;
                for (int j = k + 1; j < n; ++j) lu_(i, j) -= lik * lu_(k, j);
            }
        }
    }

    void solve_inplace(double* b) const {
        const int n = lu_.rows();
        std::vector<double> t(n);
        for (int i = 0; i < n; ++i) t[i] = b[piv_[i]];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) t[i] -= lu_(i, j) * t[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) t[i] -= lu_(i, j) * t[j];
            t[i] /= lu_(i, i);
        }
        for (int i = 0; i < n; ++i) b[i] = t[i];
    }

    std::vector<double> solve(std::vector<double> b) const {
        solve_inplace(b.data());
        return b;
    }

    Dense solve(const Dense& B) const {
        const int n = lu_.rows();
        Dense X(n, B.cols());
        std::vector<double> col(n);
        for (int j = 0; j < B.cols(); ++j) {
            for (int i = 0; i < n; ++i) col[i] = B(i, j);
            solve_inplace(col.data());
            for (int i = 0; i < n; ++i) X(i, j) = col[i];
        }
        return X;
    }

    Dense inverse() const { return solve(Dense::identity(lu_.rows())); }

private:
    Dense lu_;
    std::vector<int> piv_;
};

inline Dense inverse(const Dense& A) { return DenseLU(A).inverse(); }

} // namespace unitcell
