#ifndef BLOCKLAB_EMBEDDING_HPP
#define BLOCKLAB_EMBEDDING_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blocklab/lattice.hpp"

namespace blocklab {

// Admissible rows r with D_order * r * C_star^-1 * r^t an integer in
// [1, D_order] not divisible by p.  Both signs of each row are returned.
std::vector<std::vector<Int>> admissible_rows(const GramMatrix& c_star, const Int& d_order,
                                              const Int& p);

struct RowConstraint {
    // either an explicit admissible set (both signs implied), or the
    // admissibility-lemma parameters
    std::vector<std::vector<Int>> explicit_rows;
    std::optional<Int> lemma_d_order;
    std::optional<Int> lemma_p;
    std::optional<std::size_t> row_count;  // exact number of rows when present
};

struct EmbeddingSolution {
    IntMatrix q;  // canonical: rows sign-normalized, sorted descending lexicographically
};

// canonical form of a solution matrix: each row's first nonzero entry made
// positive, then rows sorted descending lexicographically
IntMatrix canonical_rows(const IntMatrix& q);

// Complete set of solutions of Q^t Q = C with rows from the constraint, one
// canonical representative per row-permutation/sign class, sorted.
std::vector<EmbeddingSolution> solve_embedding(const GramMatrix& c_star, const RowConstraint& rc);

bool is_unique_solution(const std::vector<EmbeddingSolution>& sols);
bool rows_pairwise_independent(const IntMatrix& q);

// ---------------------------------------------------------------------------
// Constrained multi-block solver used by the Cartan-method pipeline.
// Internally works on machine words; inputs are range-checked on entry.

enum class BlockPattern { Nonzero, Zero, Free };

struct JointBlock {
    std::string label;
    IntMatrix gram;  // the (fake) Cartan matrix of this block
};

struct RowClassSpec {
    // number of rows of this class (resolved per solve)
    std::size_t count = 0;
    // per block: pattern; divisor > 1 additionally requires entries divisible by it
    std::map<std::string, BlockPattern> patterns;
    std::map<std::string, Int> divisors;
    bool m1_coprime_to_p = true;  // else: m1 divisible by p
};

struct StarConstraint {
    std::map<std::string, Int> coeffs;  // label -> coefficient; "1" = complement term
    Int modulus;
};

struct DiagConstraint {
    std::map<std::string, Int> coeffs;
    std::vector<Int> allowed;  // allowed values of the combination on each diagonal entry
};

struct JointProblem {
    Int p;
    Int d_order;
    std::vector<JointBlock> blocks;
    std::vector<RowClassSpec> classes;
    std::vector<StarConstraint> star;
    std::vector<DiagConstraint> diag;
    std::vector<std::vector<std::string>> stages;  // 1 or 2 stages
    std::optional<Int> k_modulus;                  // subsample solutions by total row count
    std::size_t thread_count = 1;                  // root-split workers for stage 1
};

struct JointSolution {
    // rows of the assembled matrix (block columns in problem order); one row
    // per character, classes in declared order, canonical within each class
    IntMatrix q;
    std::vector<std::size_t> class_of_row;
};

// Enumerate all solutions.  If classes have fixed counts the total row count
// is forced; otherwise every feasible row count is explored.
std::vector<JointSolution> solve_joint(const JointProblem& prob);

}  // namespace blocklab

#endif
