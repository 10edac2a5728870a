#ifndef BLOCKLAB_EXACT_CORE_HPP
#define BLOCKLAB_EXACT_CORE_HPP

#include <vector>

#include "blocklab/eisenstein.hpp"
#include "blocklab/matrix.hpp"

namespace blocklab {

// Square symmetric positive definite integer matrix.  Construction checks both.
class GramMatrix {
public:
    GramMatrix() = default;
    explicit GramMatrix(IntMatrix m);

    const IntMatrix& mat() const { return mat_; }
    std::size_t dim() const { return mat_.rows(); }
    const Int& operator()(std::size_t i, std::size_t j) const { return mat_(i, j); }
    bool operator==(const GramMatrix& o) const { return mat_ == o.mat_; }

private:
    IntMatrix mat_;
};

struct SmithNormalForm {
    IntMatrix s;  // diagonal, d1 | d2 | ... >= 0
    IntMatrix u;  // unimodular, u * m * v = s
    IntMatrix v;  // unimodular
};

// Smallest-pivot elimination; deterministic scan order.
SmithNormalForm snf(const IntMatrix& m);

std::vector<Int> elementary_divisors(const IntMatrix& m);

std::size_t rank(const IntMatrix& m);

Int det(const IntMatrix& m);

// Saturated basis of {v in Z^k : v^t A = 0}, returned as k x (k - rank A)
// columns in column-Hermite-normalized form.
IntMatrix kernel_lattice(const IntMatrix& a);

// Exact inverse; requires square nonsingular.
RatMatrix rat_inverse(const IntMatrix& c);
RatMatrix rat_inverse(const RatMatrix& c);

// Sylvester criterion over the rationals; input must be symmetric.
bool is_pos_def(const IntMatrix& m);
bool is_pos_def(const RatMatrix& m);

// T^{-t} * H * conj(T)^{-1}; result must be symmetric with rational-integer
// entries or NonIntegralResult is thrown.
IntMatrix herm_transform(const EisMatrix& h, const EisMatrix& t);

}  // namespace blocklab

#endif
