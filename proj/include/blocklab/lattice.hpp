#ifndef BLOCKLAB_LATTICE_HPP
#define BLOCKLAB_LATTICE_HPP

#include <optional>
#include <vector>

#include "blocklab/exact_core.hpp"

namespace blocklab {

struct ReducedGram {
    GramMatrix gram;      // LLL-reduced (delta = 3/4)
    IntMatrix transform;  // unimodular; transform^t * original * transform = gram
};

// Exact rational LLL on a Gram matrix.
ReducedGram lll_reduce(const GramMatrix& c);

// All x != 0 with x C x^t <= bound, one representative per +-pair (first
// nonzero entry positive), sorted lexicographically.  Exact enumeration.
std::vector<std::vector<Int>> short_vectors(const RatMatrix& form, const Rat& bound);
std::vector<std::vector<Int>> short_vectors(const GramMatrix& c, const Rat& bound);

struct FormMinimum {
    Rat value;
    std::vector<std::vector<Int>> witnesses;  // canonical reps per +-pair
};

// Minimum of x F x^t over nonzero integer x; F positive definite rational.
FormMinimum form_minimum(const RatMatrix& f);

// Z-congruence witness: S unimodular with S^t C1 S = C2, or nullopt.
// Complete backtracking over short vectors; intended for dimension <= 12.
std::optional<IntMatrix> isometric(const GramMatrix& c1, const GramMatrix& c2);

struct AutomorphismGroup {
    std::vector<IntMatrix> generators;
    Int order;
};

class DimensionTooLarge : public std::runtime_error {
public:
    explicit DimensionTooLarge(const std::string& what) : std::runtime_error(what) {}
};

// {A in GL(n,Z) : A^t C A = C}.  Closed form for (d + delta_ij) matrices,
// complete enumeration otherwise (dimension <= 12).
AutomorphismGroup automorphism_group(const GramMatrix& c);

// Every element of the full group, enumerated; order must stay below `limit`.
std::vector<IntMatrix> automorphism_list(const GramMatrix& c, std::size_t limit);

}  // namespace blocklab

#endif
