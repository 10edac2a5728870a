#include "blocklab/fusion.hpp"

#include <algorithm>

namespace blocklab {

void SubsectionSpec::validate() const {
    if (order_of_u != 3)
        throw UnsupportedOrder("subsection '" + label + "': only order-3 elements are supported");
    if (cartan.dim() != l)
        throw InconsistentSpec("subsection '" + label + "': cartan dimension != l");
    std::vector<bool> seen(l, false);
    for (const auto& [i, j] : cycle_type) {
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > l || static_cast<std::size_t>(j) > l || i == j)
            throw InconsistentSpec("subsection '" + label + "': bad cycle pair");
        if (seen[i - 1] || seen[j - 1])
            throw InconsistentSpec("subsection '" + label + "': cycle pairs overlap");
        seen[i - 1] = seen[j - 1] = true;
    }
    if (!fused_with_inverse && !cycle_type.empty())
        throw InconsistentSpec("subsection '" + label +
                               "': inertial pairing requires fusion with the inverse");
    if (fused_with_inverse) {
        // the pairing permutation must preserve the Cartan matrix
        std::vector<std::size_t> perm(l);
        for (std::size_t i = 0; i < l; ++i) perm[i] = i;
        for (const auto& [i, j] : cycle_type) std::swap(perm[i - 1], perm[j - 1]);
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j)
                if (cartan(i, j) != cartan(perm[i], perm[j]))
                    throw InconsistentSpec("subsection '" + label +
                                           "': cycle type does not preserve the Cartan matrix");
    }
}

HermitianAssembly assemble_hermitian(const SubsectionSpec& spec) {
    spec.validate();
    HermitianAssembly out;
    const Eisenstein zeta = Eisenstein::zeta();
    const Eisenstein zbar = Eisenstein::zeta_bar();
    if (spec.fused_with_inverse) {
        // true columns are the l columns of Q_u; conjugation permutes them by the
        // cycle type, so H is the Cartan matrix itself
        const std::size_t n = spec.l;
        out.h = EisMatrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out.h(i, j) = Eisenstein(spec.cartan(i, j));
        out.t = EisMatrix(n, n);
        std::vector<bool> used(n, false);
        for (const auto& [a, b] : spec.cycle_type) {
            std::size_t i = a - 1, j = b - 1;
            out.t(i, i) = Eisenstein(Int(1));
            out.t(i, j) = Eisenstein(Int(1));
            out.t(j, i) = zeta;
            out.t(j, j) = zbar;
            used[i] = used[j] = true;
            out.pairing.push_back({i, j});
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i]) out.t(i, i) = Eisenstein(Int(1));
        return out;
    }
    // orbit of size two: true columns (q_1, conj q_1, q_2, conj q_2, ...);
    // cross products between the subsection and its inverse vanish
    const std::size_t n = 2 * spec.l;
    out.h = EisMatrix(n, n);
    for (std::size_t i = 0; i < spec.l; ++i)
        for (std::size_t j = 0; j < spec.l; ++j) {
            out.h(2 * i, 2 * j) = Eisenstein(spec.cartan(i, j));
            out.h(2 * i + 1, 2 * j + 1) = Eisenstein(spec.cartan(i, j));
        }
    out.t = EisMatrix(n, n);
    for (std::size_t i = 0; i < spec.l; ++i) {
        out.t(2 * i, 2 * i) = Eisenstein(Int(1));
        out.t(2 * i, 2 * i + 1) = Eisenstein(Int(1));
        out.t(2 * i + 1, 2 * i) = zeta;
        out.t(2 * i + 1, 2 * i + 1) = zbar;
        out.pairing.push_back({2 * i, 2 * i + 1});
    }
    return out;
}

FakeCartan fake_cartan(const SubsectionSpec& spec) {
    HermitianAssembly asmb = assemble_hermitian(spec);
    IntMatrix g = herm_transform(asmb.h, asmb.t);
    return {GramMatrix(std::move(g)), std::move(asmb.pairing)};
}

IntMatrix fake_contribution(const IntMatrix& q_tilde, const GramMatrix& c_tilde, const Int& d_order) {
    if (q_tilde.cols() != c_tilde.dim())
        throw DimensionMismatch("fake_contribution: column count mismatch");
    RatMatrix inv = rat_inverse(c_tilde.mat());
    RatMatrix q = to_rational(q_tilde);
    RatMatrix m = q * inv * q.transposed();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= Rat(d_order);
    return to_integral(m);
}

}  // namespace blocklab
