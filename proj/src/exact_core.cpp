#include "blocklab/exact_core.hpp"

#include <algorithm>
#include <stdexcept>

namespace blocklab {

GramMatrix::GramMatrix(IntMatrix m) : mat_(std::move(m)) {
    if (!mat_.is_symmetric()) throw std::invalid_argument("GramMatrix: not symmetric");
    if (!is_pos_def(mat_)) throw std::invalid_argument("GramMatrix: not positive definite");
}

SmithNormalForm snf(const IntMatrix& m) {
    SmithNormalForm out;
    out.s = m;
    out.u = IntMatrix::identity(m.rows());
    out.v = IntMatrix::identity(m.cols());
    IntMatrix& s = out.s;
    IntMatrix& u = out.u;
    IntMatrix& v = out.v;
    const std::size_t rows = m.rows(), cols = m.cols();

    auto add_row = [&](std::size_t dst, std::size_t src, const Int& f) {
        for (std::size_t j = 0; j < cols; ++j) s(dst, j) += f * s(src, j);
        for (std::size_t j = 0; j < rows; ++j) u(dst, j) += f * u(src, j);
    };
    auto add_col = [&](std::size_t dst, std::size_t src, const Int& f) {
        for (std::size_t i = 0; i < rows; ++i) s(i, dst) += f * s(i, src);
        for (std::size_t i = 0; i < cols; ++i) v(i, dst) += f * v(i, src);
    };
    auto negate_row = [&](std::size_t i) {
        for (std::size_t j = 0; j < cols; ++j) s(i, j) = -s(i, j);
        for (std::size_t j = 0; j < rows; ++j) u(i, j) = -u(i, j);
    };

    std::size_t t = 0;
    const std::size_t nmin = std::min(rows, cols);
    while (t < nmin) {
        // smallest nonzero |entry| in the trailing block, first in scan order
        std::size_t bi = t, bj = t;
        bool found = false;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j)
                if (s(i, j) != 0 && (!found || abs(s(i, j)) < abs(s(bi, bj)))) {
                    bi = i;
                    bj = j;
                    found = true;
                }
        if (!found) break;
        if (bi != t) {
            s.swap_rows(t, bi);
            u.swap_rows(t, bi);
        }
        if (bj != t) {
            s.swap_cols(t, bj);
            v.swap_cols(t, bj);
        }
        bool clean = true;
        for (std::size_t i = t + 1; i < rows; ++i) {
            if (s(i, t) == 0) continue;
            Int q = round_div(s(i, t), s(t, t));
            if (q != 0) add_row(i, t, -q);
            if (s(i, t) != 0) clean = false;
        }
        for (std::size_t j = t + 1; j < cols; ++j) {
            if (s(t, j) == 0) continue;
            Int q = round_div(s(t, j), s(t, t));
            if (q != 0) add_col(j, t, -q);
            if (s(t, j) != 0) clean = false;
        }
        if (!clean) continue;
        // enforce divisibility of the trailing block by the pivot
        bool retry = false;
        for (std::size_t i = t + 1; i < rows && !retry; ++i)
            for (std::size_t j = t + 1; j < cols && !retry; ++j)
                if (!divides(s(t, t), s(i, j))) {
                    add_row(t, i, Int(1));
                    retry = true;
                }
        if (retry) continue;
        if (s(t, t) < 0) negate_row(t);
        ++t;
    }
    return out;
}

std::vector<Int> elementary_divisors(const IntMatrix& m) {
    SmithNormalForm f = snf(m);
    std::vector<Int> d;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i)
        if (f.s(i, i) != 0) d.push_back(f.s(i, i));
    return d;
}

std::size_t rank(const IntMatrix& m) { return elementary_divisors(m).size(); }

Int det(const IntMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("det: not square");
    // fraction-free Bareiss elimination
    const std::size_t n = m.rows();
    if (n == 0) return 1;
    IntMatrix a = m;
    Int prev(1);
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && a(p, k) == 0) ++p;
            if (p == n) return 0;
            a.swap_rows(k, p);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                Int t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
                a(i, j) = t / prev;  // exact by Bareiss
            }
        prev = a(k, k);
    }
    return sign > 0 ? a(n - 1, n - 1) : -a(n - 1, n - 1);
}

namespace {

// in-place column Hermite normalization (lower-triangular-style, unique form)
IntMatrix column_hnf(IntMatrix b) {
    const std::size_t rows = b.rows(), cols = b.cols();
    std::size_t col = 0;
    for (std::size_t r = 0; r < rows && col < cols; ++r) {
        // eliminate right of position (r, col) using gcd steps
        std::size_t piv = col;
        bool nonzero = false;
        for (std::size_t j = col; j < cols; ++j)
            if (b(r, j) != 0) {
                nonzero = true;
                break;
            }
        if (!nonzero) continue;
        for (std::size_t j = col + 1; j < cols; ++j) {
            while (b(r, j) != 0) {
                if (b(r, col) == 0) {
                    b.swap_cols(col, j);
                    continue;
                }
                Int q = fdiv_q(b(r, j), b(r, col));
                for (std::size_t i = 0; i < rows; ++i) b(i, j) -= q * b(i, col);
                if (b(r, j) != 0) b.swap_cols(col, j);
            }
        }
        (void)piv;
        if (b(r, col) < 0)
            for (std::size_t i = 0; i < rows; ++i) b(i, col) = -b(i, col);
        if (b(r, col) != 0) {
            // reduce earlier columns at this row into [0, pivot)
            for (std::size_t j = 0; j < col; ++j) {
                Int q = fdiv_q(b(r, j), b(r, col));
                if (q != 0)
                    for (std::size_t i = 0; i < rows; ++i) b(i, j) -= q * b(i, col);
            }
            ++col;
        }
    }
    return b;
}

}  // namespace

IntMatrix kernel_lattice(const IntMatrix& a) {
    SmithNormalForm f = snf(a);
    std::size_t r = 0;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i)
        if (f.s(i, i) != 0) ++r;
    const std::size_t k = a.rows();
    IntMatrix basis(k, k - r);
    // rows r..k-1 of U span {v : v^t A = 0}; U unimodular makes the basis saturated
    for (std::size_t i = r; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) basis(j, i - r) = f.u(i, j);
    return column_hnf(std::move(basis));
}

RatMatrix rat_inverse(const RatMatrix& c) {
    if (c.rows() != c.cols()) throw DimensionMismatch("rat_inverse: not square");
    const std::size_t n = c.rows();
    RatMatrix a = c;
    RatMatrix inv = RatMatrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col) == 0) ++piv;
        if (piv == n) throw std::domain_error("rat_inverse: singular matrix");
        if (piv != col) {
            a.swap_rows(piv, col);
            inv.swap_rows(piv, col);
        }
        Rat p = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a(i, col) == 0) continue;
            Rat f = a(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

RatMatrix rat_inverse(const IntMatrix& c) { return rat_inverse(to_rational(c)); }

bool is_pos_def(const RatMatrix& m) {
    if (!m.is_symmetric()) throw std::invalid_argument("is_pos_def: not symmetric");
    // rational LDL^t; positive definite iff all pivots positive
    const std::size_t n = m.rows();
    RatMatrix a = m;
    for (std::size_t k = 0; k < n; ++k) {
        if (a(k, k) <= 0) return false;
        for (std::size_t i = k + 1; i < n; ++i) {
            Rat f = a(i, k) / a(k, k);
            if (f == 0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return true;
}

bool is_pos_def(const IntMatrix& m) { return is_pos_def(to_rational(m)); }

IntMatrix herm_transform(const EisMatrix& h, const EisMatrix& t) {
    if (h.rows() != h.cols() || t.rows() != t.cols() || h.rows() != t.rows())
        throw DimensionMismatch("herm_transform: shapes");
    const std::size_t n = h.rows();
    EisRatMatrix tinv = eis_inverse(to_eisrat(t));
    EisRatMatrix tinv_conj(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) tinv_conj(i, j) = tinv(i, j).conj();
    EisRatMatrix out = tinv.transposed() * to_eisrat(h) * tinv_conj;
    IntMatrix result(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const EisRat& e = out(i, j);
            if (!e.num.is_rational() || e.den != 1)
                throw NonIntegralResult("herm_transform: entry (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") is not a rational integer");
            result(i, j) = e.num.a;
        }
    if (!result.is_symmetric()) throw NonIntegralResult("herm_transform: result not symmetric");
    return result;
}

}  // namespace blocklab
