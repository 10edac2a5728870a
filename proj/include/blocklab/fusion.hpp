#ifndef BLOCKLAB_FUSION_HPP
#define BLOCKLAB_FUSION_HPP

#include <string>
#include <utility>
#include <vector>

#include "blocklab/exact_core.hpp"

namespace blocklab {

class InconsistentSpec : public std::runtime_error {
public:
    explicit InconsistentSpec(const std::string& what) : std::runtime_error(what) {}
};

class UnsupportedOrder : public std::runtime_error {
public:
    explicit UnsupportedOrder(const std::string& what) : std::runtime_error(what) {}
};

// Local data of one subsection (u, b_u).
struct SubsectionSpec {
    std::string label;
    Int order_of_u = 3;
    std::size_t l = 0;                           // l(b_u)
    GramMatrix cartan;                           // l x l
    bool fused_with_inverse = true;
    std::vector<std::pair<int, int>> cycle_type; // transpositions on {1..l}, 1-based

    std::size_t galois_orbit() const { return fused_with_inverse ? 1 : 2; }
    std::size_t fake_columns() const { return l * galois_orbit(); }

    void validate() const;
};

struct HermitianAssembly {
    EisMatrix h;        // Hermitian Gram of the true columns over the Galois orbit
    EisMatrix t;        // block change of basis, [[1,1],[z,zbar]] on paired positions
    // which column indices (0-based, in the assembled order) were zeta-combined
    std::vector<std::pair<std::size_t, std::size_t>> pairing;
};

HermitianAssembly assemble_hermitian(const SubsectionSpec& spec);

struct FakeCartan {
    GramMatrix gram;
    std::vector<std::pair<std::size_t, std::size_t>> pairing;
};

// herm_transform of the assembly; integrality asserted.
FakeCartan fake_cartan(const SubsectionSpec& spec);

// D_order * Q~ * C~^-1 * Q~^t, exact and integral (NonIntegralResult otherwise).
IntMatrix fake_contribution(const IntMatrix& q_tilde, const GramMatrix& c_tilde, const Int& d_order);

}  // namespace blocklab

#endif
