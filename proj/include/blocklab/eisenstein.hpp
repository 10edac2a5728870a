#ifndef BLOCKLAB_EISENSTEIN_HPP
#define BLOCKLAB_EISENSTEIN_HPP

#include <iosfwd>
#include <string>

#include "blocklab/matrix.hpp"
#include "blocklab/numeric.hpp"

namespace blocklab {

// Element a + b*z of Z[z] with z^2 + z + 1 = 0 (z = e^{2 pi i / 3}).
struct Eisenstein {
    Int a, b;

    Eisenstein() : a(0), b(0) {}
    Eisenstein(Int a_, Int b_ = 0) : a(std::move(a_)), b(std::move(b_)) {}
    Eisenstein(long a_) : a(a_), b(0) {}
    Eisenstein(int a_) : a(a_), b(0) {}

    static Eisenstein zeta() { return Eisenstein(Int(0), Int(1)); }
    static Eisenstein zeta_bar() { return Eisenstein(Int(-1), Int(-1)); }

    bool operator==(const Eisenstein& o) const { return a == o.a && b == o.b; }
    bool operator!=(const Eisenstein& o) const { return !(*this == o); }

    Eisenstein operator+(const Eisenstein& o) const { return {a + o.a, b + o.b}; }
    Eisenstein operator-(const Eisenstein& o) const { return {a - o.a, b - o.b}; }
    Eisenstein operator-() const { return {-a, -b}; }
    // (a + bz)(c + dz) with z^2 = -1 - z
    Eisenstein operator*(const Eisenstein& o) const {
        return {a * o.a - b * o.b, a * o.b + b * o.a - b * o.b};
    }
    Eisenstein& operator+=(const Eisenstein& o) { a += o.a; b += o.b; return *this; }
    Eisenstein& operator-=(const Eisenstein& o) { a -= o.a; b -= o.b; return *this; }
    Eisenstein& operator*=(const Eisenstein& o) { *this = *this * o; return *this; }

    Eisenstein conj() const { return {a - b, -b}; }
    Int norm() const { return a * a - a * b + b * b; }
    bool is_zero() const { return a == 0 && b == 0; }
    bool is_rational() const { return b == 0; }

    std::string str() const;
};

using EisMatrix = Matrix<Eisenstein>;

// Element of Q(z): num / den with den > 0.
struct EisRat {
    Eisenstein num;
    Int den;

    EisRat() : num(), den(1) {}
    EisRat(Eisenstein n, Int d = Int(1));
    EisRat(int n) : num(Int(n)), den(1) {}

    void canonicalize();
    bool operator==(const EisRat& o) const { return num == o.num && den == o.den; }
    EisRat operator+(const EisRat& o) const;
    EisRat operator-(const EisRat& o) const;
    EisRat operator-() const { return EisRat(-num, den); }
    EisRat operator*(const EisRat& o) const;
    EisRat operator/(const EisRat& o) const;
    EisRat& operator+=(const EisRat& o) { *this = *this + o; return *this; }
    EisRat& operator-=(const EisRat& o) { *this = *this - o; return *this; }
    EisRat conj() const { return EisRat(num.conj(), den); }
    bool is_zero() const { return num.is_zero(); }
};

using EisRatMatrix = Matrix<EisRat>;

inline EisRatMatrix to_eisrat(const EisMatrix& m) {
    EisRatMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = EisRat(m(i, j));
    return r;
}

// Gauss-Jordan inverse over Q(z); throws DimensionMismatch / std::domain_error if singular.
EisRatMatrix eis_inverse(const EisRatMatrix& m);

// "a+b*z" text form, e.g. "2", "-1+3*z", "z", "-z", "1-z".
std::ostream& operator<<(std::ostream& os, const Eisenstein& e);
Eisenstein parse_eisenstein(const std::string& token);

void write_matrix(std::ostream& os, const EisMatrix& m);
EisMatrix read_eis_matrix(std::istream& is);

}  // namespace blocklab

#endif
