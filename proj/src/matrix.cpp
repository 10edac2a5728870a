#include "blocklab/matrix.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace blocklab {

IntMatrix to_integral(const RatMatrix& m) {
    IntMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (!is_integer(m(i, j)))
                throw NonIntegralResult("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") = " + m(i, j).get_str() + " is not an integer");
            r(i, j) = m(i, j).get_num();
        }
    return r;
}

namespace {

template <typename T>
void write_impl(std::ostream& os, const Matrix<T>& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << m(i, j);
        }
        os << '\n';
    }
}

void read_header(std::istream& is, std::size_t& rows, std::size_t& cols) {
    long r = -1, c = -1;
    if (!(is >> r >> c) || r < 0 || c < 0) throw std::runtime_error("matrix header: expected \"rows cols\"");
    rows = static_cast<std::size_t>(r);
    cols = static_cast<std::size_t>(c);
}

}  // namespace

void write_matrix(std::ostream& os, const IntMatrix& m) { write_impl(os, m); }
void write_matrix(std::ostream& os, const RatMatrix& m) { write_impl(os, m); }

IntMatrix read_int_matrix(std::istream& is) {
    std::size_t rows, cols;
    read_header(is, rows, cols);
    IntMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            std::string tok;
            if (!(is >> tok)) throw std::runtime_error("matrix body: too few entries");
            m(i, j) = Int(tok);
        }
    return m;
}

RatMatrix read_rat_matrix(std::istream& is) {
    std::size_t rows, cols;
    read_header(is, rows, cols);
    RatMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            std::string tok;
            if (!(is >> tok)) throw std::runtime_error("matrix body: too few entries");
            Rat q(tok);
            q.canonicalize();
            m(i, j) = q;
        }
    return m;
}

IntMatrix read_int_matrix_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_int_matrix(f);
}

RatMatrix read_rat_matrix_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_rat_matrix(f);
}

}  // namespace blocklab
