#include "blocklab/eisenstein.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace blocklab {

std::string Eisenstein::str() const {
    std::ostringstream os;
    os << *this;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Eisenstein& e) {
    if (e.b == 0) return os << e.a;
    std::string zpart;
    if (e.b == 1) zpart = "z";
    else if (e.b == -1) zpart = "-z";
    else zpart = e.b.get_str() + "*z";
    if (e.a == 0) return os << zpart;
    os << e.a;
    if (e.b > 0) os << '+';
    return os << zpart;
}

Eisenstein parse_eisenstein(const std::string& token) {
    // grammar: [int][(+|-)[int*]z] ; examples: "5", "z", "-z", "2*z", "1+z", "-1-3*z"
    auto fail = [&]() -> Eisenstein {
        throw std::runtime_error("bad Eisenstein literal: '" + token + "'");
    };
    std::size_t zpos = token.find('z');
    if (zpos == std::string::npos) return Eisenstein(Int(token));
    if (zpos + 1 != token.size()) fail();
    std::string head = token.substr(0, zpos);  // ends with the z-coefficient
    // strip optional '*'
    if (!head.empty() && head.back() == '*') head.pop_back();
    // split head into a-part and b-part at the last sign that separates terms
    std::size_t split = std::string::npos;
    for (std::size_t i = head.size(); i-- > 1;) {
        if (head[i] == '+' || head[i] == '-') {
            split = i;
            break;
        }
    }
    std::string astr, bstr;
    if (split == std::string::npos) {
        astr = "0";
        bstr = head;
    } else {
        astr = head.substr(0, split);
        bstr = head.substr(split);
    }
    if (bstr.empty() || bstr == "+") bstr = "1";
    else if (bstr == "-") bstr = "-1";
    if (astr.empty()) astr = "0";
    try {
        return Eisenstein(Int(astr), Int(bstr));
    } catch (const std::invalid_argument&) {
        return fail();
    }
}

EisRat::EisRat(Eisenstein n, Int d) : num(std::move(n)), den(std::move(d)) {
    if (den == 0) throw std::domain_error("EisRat with zero denominator");
    canonicalize();
}

void EisRat::canonicalize() {
    if (den < 0) {
        den = -den;
        num = -num;
    }
    Int g = gcd(gcd(abs(num.a), abs(num.b)), den);
    if (g > 1) {
        num.a /= g;
        num.b /= g;
        den /= g;
    }
}

EisRat EisRat::operator+(const EisRat& o) const {
    return EisRat(num * Eisenstein(o.den) + o.num * Eisenstein(den), den * o.den);
}

EisRat EisRat::operator-(const EisRat& o) const {
    return EisRat(num * Eisenstein(o.den) - o.num * Eisenstein(den), den * o.den);
}

EisRat EisRat::operator*(const EisRat& o) const { return EisRat(num * o.num, den * o.den); }

EisRat EisRat::operator/(const EisRat& o) const {
    if (o.is_zero()) throw std::domain_error("EisRat division by zero");
    // 1/(c+dz) = conj(c+dz) / norm(c+dz)
    return EisRat(num * o.num.conj() * Eisenstein(o.den), den * o.num.norm());
}

EisRatMatrix eis_inverse(const EisRatMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("eis_inverse: not square");
    const std::size_t n = m.rows();
    EisRatMatrix a = m;
    EisRatMatrix inv = EisRatMatrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col).is_zero()) ++piv;
        if (piv == n) throw std::domain_error("eis_inverse: singular matrix");
        if (piv != col) {
            a.swap_rows(piv, col);
            inv.swap_rows(piv, col);
        }
        EisRat p = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) = a(col, j) / p;
            inv(col, j) = inv(col, j) / p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a(i, col).is_zero()) continue;
            EisRat f = a(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

void write_matrix(std::ostream& os, const EisMatrix& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << m(i, j);
        }
        os << '\n';
    }
}

EisMatrix read_eis_matrix(std::istream& is) {
    long r = -1, c = -1;
    if (!(is >> r >> c) || r < 0 || c < 0) throw std::runtime_error("matrix header: expected \"rows cols\"");
    EisMatrix m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) {
            std::string tok;
            if (!(is >> tok)) throw std::runtime_error("matrix body: too few entries");
            m(i, j) = parse_eisenstein(tok);
        }
    return m;
}

}  // namespace blocklab
