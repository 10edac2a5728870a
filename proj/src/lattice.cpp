#include "blocklab/lattice.hpp"

#include <algorithm>
#include <map>

namespace blocklab {

namespace {

// rational Gram-Schmidt data of a Gram matrix: B[i] = |b_i*|^2, mu[i][j]
struct GSData {
    std::vector<Rat> b;
    std::vector<std::vector<Rat>> mu;
};

GSData gram_schmidt(const RatMatrix& g) {
    const std::size_t n = g.rows();
    GSData d;
    d.b.assign(n, Rat(0));
    d.mu.assign(n, std::vector<Rat>(n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i) {
        d.b[i] = g(i, i);
        for (std::size_t j = 0; j < i; ++j) {
            Rat m = g(i, j);
            for (std::size_t k = 0; k < j; ++k) m -= d.mu[i][k] * d.mu[j][k] * d.b[k];
            d.mu[i][j] = m / d.b[j];
            d.b[i] -= d.mu[i][j] * d.mu[i][j] * d.b[j];
        }
        if (d.b[i] <= 0) throw std::invalid_argument("gram_schmidt: form not positive definite");
    }
    return d;
}

}  // namespace

ReducedGram lll_reduce(const GramMatrix& c) {
    const std::size_t n = c.dim();
    IntMatrix t = IntMatrix::identity(n);
    RatMatrix g = to_rational(c.mat());

    auto recompute = [&]() {
        RatMatrix orig = to_rational(c.mat());
        RatMatrix tr(n, n), prod(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) tr(i, j) = Rat(t(i, j));
        g = tr.transposed() * orig * tr;
    };

    // translate b_k -> b_k - q b_j
    auto size_reduce = [&](std::size_t k, std::size_t j, const Int& q) {
        if (q == 0) return;
        for (std::size_t i = 0; i < n; ++i) t(i, k) -= q * t(i, j);
        // update Gram: row/col k
        std::vector<Rat> newrow(n);
        for (std::size_t i = 0; i < n; ++i) newrow[i] = g(k, i) - Rat(q) * g(j, i);
        Rat kk = g(k, k) - Rat(2 * q) * g(k, j) + Rat(q * q) * g(j, j);
        for (std::size_t i = 0; i < n; ++i) {
            g(k, i) = newrow[i];
            g(i, k) = newrow[i];
        }
        g(k, k) = kk;
    };

    const Rat delta(3, 4);
    std::size_t k = 1;
    GSData gs = gram_schmidt(g);
    while (k < n) {
        for (std::size_t j = k; j-- > 0;) {
            Int q = round_rat(gs.mu[k][j]);
            if (q != 0) {
                size_reduce(k, j, q);
                gs = gram_schmidt(g);
            }
        }
        if (gs.b[k] >= (delta - gs.mu[k][k - 1] * gs.mu[k][k - 1]) * gs.b[k - 1]) {
            ++k;
        } else {
            t.swap_cols(k, k - 1);
            g.swap_rows(k, k - 1);
            g.swap_cols(k, k - 1);
            gs = gram_schmidt(g);
            k = k > 1 ? k - 1 : 1;
        }
    }
    (void)recompute;
    ReducedGram out{GramMatrix(to_integral(g)), t};
    return out;
}

std::vector<std::vector<Int>> short_vectors(const RatMatrix& form, const Rat& bound) {
    if (!form.is_symmetric()) throw std::invalid_argument("short_vectors: form not symmetric");
    const std::size_t n = form.rows();
    GSData gs = gram_schmidt(form);  // also validates positive definiteness
    std::vector<std::vector<Int>> out;
    std::vector<Int> x(n, 0);
    std::vector<std::vector<Rat>> center(n + 1, std::vector<Rat>(n, Rat(0)));

    // enumerate level i from n-1 down to 0; center[i][j] holds sum_{t>i} mu[t][j] x_t
    auto rec = [&](auto&& self, std::size_t level, const Rat& budget) -> void {
        if (level == 0 && n == 0) return;
        std::size_t i = level - 1;
        const Rat& ci = center[level][i];
        // D_i (x_i + c_i)^2 <= budget; walk outward from the center
        Int base = round_rat(-ci);
        for (int dir = 0; dir < 2; ++dir) {
            Int xi = dir == 0 ? base : base - 1;
            while (true) {
                Rat off = Rat(xi) + ci;
                Rat val = gs.b[i] * off * off;
                if (val > budget) break;
                x[i] = xi;
                if (i == 0) {
                    bool nonzero = false;
                    for (const Int& e : x)
                        if (e != 0) {
                            nonzero = true;
                            break;
                        }
                    if (nonzero) out.push_back(x);
                } else {
                    for (std::size_t j = 0; j < i; ++j)
                        center[level - 1][j] = center[level][j] + gs.mu[i][j] * Rat(xi);
                    self(self, level - 1, budget - val);
                }
                if (dir == 0) xi += 1;
                else xi -= 1;
            }
        }
        x[i] = 0;
    };
    if (n > 0 && bound >= 0) rec(rec, n, bound);

    // canonicalize +- pairs and sort
    std::vector<std::vector<Int>> canon;
    canon.reserve(out.size() / 2 + 1);
    for (auto& v : out) {
        std::size_t lead = 0;
        while (lead < n && v[lead] == 0) ++lead;
        if (lead < n && v[lead] < 0) continue;  // keep the +representative only
        canon.push_back(std::move(v));
    }
    std::sort(canon.begin(), canon.end());
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    return canon;
}

std::vector<std::vector<Int>> short_vectors(const GramMatrix& c, const Rat& bound) {
    return short_vectors(to_rational(c.mat()), bound);
}

FormMinimum form_minimum(const RatMatrix& f) {
    if (f.rows() == 0) throw std::invalid_argument("form_minimum: empty form");
    Rat bound = f(0, 0);
    for (std::size_t i = 1; i < f.rows(); ++i) bound = std::min(bound, f(i, i));
    auto vs = short_vectors(f, bound);
    FormMinimum out;
    out.value = bound;
    for (const auto& v : vs) {
        Rat val(0);
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) val += f(i, j) * Rat(v[i] * v[j]);
        if (val < out.value) out.value = val;
    }
    for (const auto& v : vs) {
        Rat val(0);
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) val += f(i, j) * Rat(v[i] * v[j]);
        if (val == out.value) out.witnesses.push_back(v);
    }
    return out;
}

namespace {

struct IsoSearch {
    const IntMatrix& c1;
    const IntMatrix& c2;
    std::size_t n;
    std::vector<std::vector<Int>> cands;                 // both signs
    std::vector<std::vector<Int>> c1_times;              // C1 * cand (column form), per candidate
    std::vector<IntMatrix> found;
    std::size_t limit = 1;                               // stop after this many
    std::vector<std::size_t> cols;

    bool value_ok(std::size_t ci, std::size_t j) const {
        // candidate quadratic value equals C2(j,j) checked by caller
        for (std::size_t t = 0; t < cols.size(); ++t) {
            // <cand[cols[t]], cand[ci]>_C1 == C2(t, j)
            const auto& w = c1_times[cols[t]];
            Int ip(0);
            for (std::size_t r = 0; r < n; ++r) ip += w[r] * cands[ci][r];
            if (ip != c2(t, j)) return false;
        }
        return true;
    }

    void rec(std::size_t j, const std::vector<std::vector<std::size_t>>& by_norm) {
        if (found.size() >= limit) return;
        if (j == n) {
            IntMatrix s(n, n);
            for (std::size_t col = 0; col < n; ++col)
                for (std::size_t row = 0; row < n; ++row) s(row, col) = cands[cols[col]][row];
            found.push_back(std::move(s));
            return;
        }
        for (std::size_t ci : by_norm[j]) {
            if (!value_ok(ci, j)) continue;
            cols.push_back(ci);
            rec(j + 1, by_norm);
            cols.pop_back();
            if (found.size() >= limit) return;
        }
    }
};

std::vector<IntMatrix> isometry_search(const GramMatrix& c1g, const GramMatrix& c2g, std::size_t limit) {
    const IntMatrix& c1 = c1g.mat();
    const IntMatrix& c2 = c2g.mat();
    const std::size_t n = c1.rows();
    if (c2.rows() != n) throw DimensionMismatch("isometric: dimension mismatch");
    if (n == 0) return {IntMatrix(0, 0)};
    if (elementary_divisors(c1) != elementary_divisors(c2)) return {};

    Int maxdiag = c2(0, 0);
    for (std::size_t i = 1; i < n; ++i) maxdiag = std::max(maxdiag, c2(i, i));
    auto half = short_vectors(c1g, Rat(maxdiag));

    IsoSearch s{c1, c2, n, {}, {}, {}, limit, {}};
    s.cands.reserve(2 * half.size());
    for (auto& v : half) {
        std::vector<Int> neg(n);
        for (std::size_t i = 0; i < n; ++i) neg[i] = -v[i];
        s.cands.push_back(std::move(v));
        s.cands.push_back(std::move(neg));
    }
    s.c1_times.resize(s.cands.size());
    std::vector<Int> norms(s.cands.size());
    for (std::size_t ci = 0; ci < s.cands.size(); ++ci) {
        std::vector<Int> w(n, Int(0));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t col = 0; col < n; ++col) w[r] += c1(r, col) * s.cands[ci][col];
        Int q(0);
        for (std::size_t r = 0; r < n; ++r) q += w[r] * s.cands[ci][r];
        norms[ci] = q;
        s.c1_times[ci] = std::move(w);
    }
    std::vector<std::vector<std::size_t>> by_norm(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t ci = 0; ci < s.cands.size(); ++ci)
            if (norms[ci] == c2(j, j)) by_norm[j].push_back(ci);
    for (std::size_t j = 0; j < n; ++j)
        if (by_norm[j].empty()) return {};
    s.rec(0, by_norm);
    return std::move(s.found);
}

// (d + delta_ij) detection: returns d if the matrix has that exact shape
std::optional<Int> dplusdelta_shape(const IntMatrix& c) {
    const std::size_t n = c.rows();
    if (n == 0) return std::nullopt;
    Int d = c(0, 0) - 1;
    if (d <= 0) return std::nullopt;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Int want = (i == j) ? d + 1 : d;
            if (c(i, j) != want) return std::nullopt;
        }
    return d;
}

Int factorial(std::size_t n) {
    Int f(1);
    for (std::size_t i = 2; i <= n; ++i) f *= Int(static_cast<long>(i));
    return f;
}

}  // namespace

std::optional<IntMatrix> isometric(const GramMatrix& c1, const GramMatrix& c2) {
    auto found = isometry_search(c1, c2, 1);
    if (found.empty()) return std::nullopt;
    return found.front();
}

std::vector<IntMatrix> automorphism_list(const GramMatrix& c, std::size_t limit) {
    return isometry_search(c, c, limit);
}

AutomorphismGroup automorphism_group(const GramMatrix& c) {
    const std::size_t n = c.dim();
    if (n > 12) throw DimensionTooLarge("automorphism_group: dimension > 12");
    AutomorphismGroup out;
    if (auto d = dplusdelta_shape(c.mat())) {
        // Aut((d+delta)) = S_n x {+-1} for d > 1 or n = 1, else S_{n+1} x {+-1}.
        IntMatrix neg(n, n);
        for (std::size_t i = 0; i < n; ++i) neg(i, i) = -1;
        if (*d > 1 || n == 1) {
            if (n > 1) {
                IntMatrix swap01 = IntMatrix::identity(n);
                swap01(0, 0) = swap01(1, 1) = 0;
                swap01(0, 1) = swap01(1, 0) = 1;
                IntMatrix cyc(n, n);
                for (std::size_t i = 0; i < n; ++i) cyc((i + 1) % n, i) = 1;
                out.generators = {swap01, cyc, neg};
            } else {
                out.generators = {neg};
            }
            out.order = 2 * factorial(n);
        } else {
            // d = 1 < n: images of the transposition (1 2) and the (n+1)-cycle
            // under the embedding from the unique decomposition Q (rows e_i and -(1,..,1))
            IntMatrix swap01 = IntMatrix::identity(n);
            swap01(0, 0) = swap01(1, 1) = 0;
            swap01(0, 1) = swap01(1, 0) = 1;
            // (n+1)-cycle sends e_1->e_2->...->e_n->(-1,...,-1)->e_1
            IntMatrix cyc(n, n);
            for (std::size_t i = 0; i + 1 < n; ++i) cyc((i + 1), i) = 1;
            for (std::size_t i = 0; i < n; ++i) cyc(i, n - 1) = -1;
            out.generators = {swap01, cyc, neg};
            out.order = 2 * factorial(n + 1);
        }
        // paranoia: generators must preserve the form
        for (const auto& g : out.generators) {
            if (g.transposed() * c.mat() * g != c.mat())
                throw std::logic_error("automorphism_group: closed-form generator check failed");
        }
        return out;
    }
    auto all = automorphism_list(c, 4000000);
    out.order = Int(static_cast<long>(all.size()));
    out.generators = std::move(all);
    return out;
}

}  // namespace blocklab
