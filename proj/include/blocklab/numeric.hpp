#ifndef BLOCKLAB_NUMERIC_HPP
#define BLOCKLAB_NUMERIC_HPP

#include <gmpxx.h>
#include <stdexcept>
#include <string>

namespace blocklab {

// Exact arbitrary-precision scalars.  All core computations run on these;
// no floating point enters any result path.
using Int = mpz_class;
using Rat = mpq_class;

inline Int gcd(const Int& a, const Int& b) {
    Int r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline bool divides(const Int& d, const Int& a) {
    if (d == 0) return a == 0;
    return mpz_divisible_p(a.get_mpz_t(), d.get_mpz_t()) != 0;
}

// floor + exact-division helpers for the elimination loops
inline Int fdiv_q(const Int& a, const Int& b) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

// nearest-integer quotient, ties toward zero (used by LLL size reduction)
inline Int round_div(const Int& a, const Int& b) {
    Int q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    Int babs = abs(b);
    if (2 * r > babs || (2 * r == babs && q >= 0)) q += 1;
    return q;
}

inline Int round_rat(const Rat& x) {
    return round_div(x.get_num(), x.get_den());
}

inline bool is_integer(const Rat& x) { return x.get_den() == 1; }

inline long to_long(const Int& a) {
    if (!a.fits_slong_p()) throw std::overflow_error("integer too large for machine word: " + a.get_str());
    return a.get_si();
}

class NonIntegralResult : public std::runtime_error {
public:
    explicit NonIntegralResult(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public std::runtime_error {
public:
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blocklab

#endif
