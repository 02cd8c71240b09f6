#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "nlglrt/errors.hpp"

namespace nlglrt {

using cxd = std::complex<double>;

// Dense row-major complex matrix. In snapshot matrices rows are antenna
// elements and columns are time samples.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    cxd& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cxd& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<cxd>& data() { return data_; }
    const std::vector<cxd>& data() const { return data_; }

    bool all_finite() const {
        for (const cxd& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cxd> data_;
};

// Conjugate transpose.
inline ComplexMatrix hermitian(const ComplexMatrix& a) {
    ComplexMatrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            out(c, r) = std::conj(a(r, c));
    return out;
}

inline ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("multiply: inner dimensions differ (" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cxd aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

// A * A^H. Hermitian positive-semidefinite, with an exactly real diagonal.
inline ComplexMatrix gram(const ComplexMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    ComplexMatrix g(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        double diag = 0.0;
        for (std::size_t t = 0; t < n; ++t) diag += std::norm(a(i, t));
        g(i, i) = diag;
        for (std::size_t j = 0; j < i; ++j) {
            cxd s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += a(i, t) * std::conj(a(j, t));
            g(i, j) = s;
            g(j, i) = std::conj(s);
        }
    }
    return g;
}

inline cxd trace(const ComplexMatrix& a) {
    if (a.rows() != a.cols())
        throw NonSquare("trace: matrix is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
    cxd s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
    return s;
}

struct HpdInverseOptions {
    double loading_epsilon = 0.0;        // absolute value added to every diagonal entry
    double diag_relative_loading = 0.0;  // extra loading as a fraction of mean(real(diag))
};

// (R + eps I)^-1 through a complex Cholesky factorization. Throws
// NotPositiveDefinite when a pivot fails even after loading, which signals
// rank-deficient or degenerate data upstream. The result is exactly Hermitian.
inline ComplexMatrix hpd_inverse(const ComplexMatrix& r, const HpdInverseOptions& opts = {}) {
    if (r.rows() != r.cols())
        throw NonSquare("hpd_inverse: matrix is " + std::to_string(r.rows()) + "x" +
                        std::to_string(r.cols()));
    if (opts.loading_epsilon < 0.0 || opts.diag_relative_loading < 0.0)
        throw InvalidConfig("hpd_inverse: loading must be >= 0");
    const std::size_t n = r.rows();
    if (n == 0) return {};

    double eps = opts.loading_epsilon;
    if (opts.diag_relative_loading > 0.0) {
        double mean_diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_diag += r(i, i).real();
        mean_diag /= static_cast<double>(n);
        eps += opts.diag_relative_loading * mean_diag;
    }

    // lower-triangular factor L of (R + eps I) = L L^H
    ComplexMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = r(j, j).real() + eps;
        for (std::size_t p = 0; p < j; ++p) d -= std::norm(l(j, p));
        if (!(d > 0.0) || !std::isfinite(d))
            throw NotPositiveDefinite("hpd_inverse: pivot " + std::to_string(j) +
                                      " is not positive (" + std::to_string(d) + ")");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cxd s = r(i, j);
            for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * std::conj(l(j, p));
            l(i, j) = s / ljj;
        }
    }

    // column-by-column solve: L y = e_c, then L^H x = y
    ComplexMatrix inv(n, n);
    std::vector<cxd> y(n), x(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            cxd s = (i == c) ? cxd(1.0) : cxd(0.0);
            for (std::size_t p = 0; p < i; ++p) s -= l(i, p) * y[p];
            y[i] = s / l(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            cxd s = y[ii];
            for (std::size_t p = ii + 1; p < n; ++p) s -= std::conj(l(p, ii)) * x[p];
            x[ii] = s / l(ii, ii);
        }
        for (std::size_t i = 0; i < n; ++i) inv(i, c) = x[i];
    }

    // the inverse of an HPD matrix is Hermitian; enforce it exactly
    for (std::size_t i = 0; i < n; ++i) {
        inv(i, i) = inv(i, i).real();
        for (std::size_t j = 0; j < i; ++j) {
            const cxd avg = 0.5 * (inv(i, j) + std::conj(inv(j, i)));
            inv(i, j) = avg;
            inv(j, i) = std::conj(avg);
        }
    }
    return inv;
}

// Copy of columns [begin, begin + count).
inline ComplexMatrix columns(const ComplexMatrix& a, std::size_t begin, std::size_t count) {
    if (begin + count > a.cols())
        throw DimensionMismatch("columns: range [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") exceeds " +
                                std::to_string(a.cols()) + " columns");
    ComplexMatrix out(a.rows(), count);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < count; ++c)
            out(r, c) = a(r, begin + c);
    return out;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

inline double frobenius_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (const cxd& v : a.data()) s += std::norm(v);
    return std::sqrt(s);
}

}  // namespace nlglrt
