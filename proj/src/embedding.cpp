#include "blocklab/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <numeric>
#include <thread>

namespace blocklab {

std::vector<std::vector<Int>> admissible_rows(const GramMatrix& c_star, const Int& d_order,
                                              const Int& p) {
    RatMatrix inv = rat_inverse(c_star.mat());
    auto half = short_vectors(inv, Rat(1));
    std::vector<std::vector<Int>> out;
    for (const auto& r : half) {
        Rat m(0);
        for (std::size_t i = 0; i < inv.rows(); ++i)
            for (std::size_t j = 0; j < inv.cols(); ++j) m += inv(i, j) * Rat(r[i] * r[j]);
        m *= Rat(d_order);
        if (!is_integer(m)) continue;
        Int mi = m.get_num();
        if (mi < 1 || mi > d_order || divides(p, mi)) continue;
        out.push_back(r);
        std::vector<Int> neg(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
        out.push_back(std::move(neg));
    }
    std::sort(out.begin(), out.end());
    return out;
}

IntMatrix canonical_rows(const IntMatrix& q) {
    std::vector<std::vector<Int>> rows(q.rows(), std::vector<Int>(q.cols()));
    for (std::size_t i = 0; i < q.rows(); ++i) {
        for (std::size_t j = 0; j < q.cols(); ++j) rows[i][j] = q(i, j);
        for (std::size_t j = 0; j < q.cols(); ++j) {
            if (rows[i][j] == 0) continue;
            if (rows[i][j] < 0)
                for (std::size_t t = 0; t < q.cols(); ++t) rows[i][t] = -rows[i][t];
            break;
        }
    }
    std::sort(rows.begin(), rows.end(), std::greater<>());
    IntMatrix out(q.rows(), q.cols());
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) out(i, j) = rows[i][j];
    return out;
}

bool is_unique_solution(const std::vector<EmbeddingSolution>& sols) { return sols.size() == 1; }

bool rows_pairwise_independent(const IntMatrix& q) {
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = i + 1; j < q.rows(); ++j) {
            // r_i, r_j dependent iff r_i * q_jt - r_j * q_it == 0 for the 2x2 minors
            bool dep = true;
            for (std::size_t a = 0; a < q.cols() && dep; ++a)
                for (std::size_t b = a + 1; b < q.cols() && dep; ++b)
                    if (q(i, a) * q(j, b) != q(i, b) * q(j, a)) dep = false;
            if (dep) return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// shared search core (machine-word arithmetic; inputs range-checked on entry)

namespace {

constexpr long kEntryLimit = 1'000'000;  // keeps every product far below int64 overflow

struct Cand {
    std::vector<long> vec;          // full row over all solver columns
    std::vector<long> m;            // per block: D * r C^-1 r^t (integral)
    long mtot = 0;
    std::size_t cls = 0;
    std::size_t lead = 0;
};

struct CoreProblem {
    std::size_t width = 0;
    std::vector<std::pair<std::size_t, std::size_t>> block_span;  // offset, dim
    std::vector<std::vector<long>> target;                        // width x width
    std::vector<long> mbudget;                                    // per block (or empty)
    std::vector<Cand> cands;
    std::vector<std::vector<std::uint64_t>> compat;               // pairwise bitsets
    std::optional<std::vector<std::size_t>> class_counts;
    std::optional<long> k_modulus;
    std::size_t threads = 1;
};

struct CoreState {
    const CoreProblem* p;
    std::vector<std::vector<long>> r;
    std::vector<long> mbud;
    std::vector<std::size_t> cnt;
    std::vector<std::size_t> used;
    std::vector<std::uint64_t> alive;
    std::vector<std::vector<std::size_t>> by_lead;
    long mmin = 0, mmax = 0;
    std::vector<std::vector<std::size_t>>* out;

    explicit CoreState(const CoreProblem& prob, std::vector<std::vector<std::size_t>>* sink)
        : p(&prob), r(prob.target), mbud(prob.mbudget), out(sink) {
        cnt.assign(prob.class_counts ? prob.class_counts->size() : 1, 0);
        alive.assign((prob.cands.size() + 63) / 64, ~std::uint64_t(0));
        by_lead.assign(prob.width + 1, {});
        for (std::size_t i = 0; i < prob.cands.size(); ++i) by_lead[prob.cands[i].lead].push_back(i);
        if (!prob.cands.empty()) {
            mmin = prob.cands.front().mtot;
            mmax = mmin;
            for (const auto& c : prob.cands) {
                mmin = std::min(mmin, c.mtot);
                mmax = std::max(mmax, c.mtot);
            }
        }
    }

    bool count_feasible() const {
        if (!p->class_counts) return true;
        long rem_m = 0;
        for (long b : mbud) rem_m += b;
        long need = 0;
        for (std::size_t c = 0; c < cnt.size(); ++c) {
            if (cnt[c] > (*p->class_counts)[c]) return false;
            need += static_cast<long>((*p->class_counts)[c] - cnt[c]);
        }
        if (need == 0) return rem_m == 0;
        if (!mbud.empty()) {
            if (rem_m < 0) return false;
            if (need * mmax < rem_m) return false;
            if (need * mmin > rem_m) return false;
        }
        return true;
    }

    void place(const Cand& c, int sign) {
        for (std::size_t a = 0; a < p->width; ++a) {
            if (!c.vec[a]) continue;
            long va = sign * c.vec[a];
            auto& row = r[a];
            for (std::size_t b2 = 0; b2 < p->width; ++b2)
                if (c.vec[b2]) row[b2] -= va * c.vec[b2];
        }
        for (std::size_t b = 0; b < mbud.size(); ++b) mbud[b] -= sign * c.m[b];
    }

    bool diag_fits(const Cand& c) const {
        for (std::size_t a = 0; a < p->width; ++a)
            if (c.vec[a] && c.vec[a] * c.vec[a] > r[a][a]) return false;
        for (std::size_t b = 0; b < mbud.size(); ++b)
            if (c.m[b] > mbud[b]) return false;
        return true;
    }

    bool alive_bit(std::size_t i) const { return (alive[i >> 6] >> (i & 63)) & 1; }

    void rec(std::size_t pos, std::size_t start) {
        while (pos < p->width && r[pos][pos] == 0) {
            for (std::size_t j = 0; j < p->width; ++j)
                if (r[pos][j] != 0) return;
            pos += 1;
            start = 0;
        }
        if (pos == p->width) {
            if (p->class_counts) {
                for (std::size_t c = 0; c < cnt.size(); ++c)
                    if (cnt[c] != (*p->class_counts)[c]) return;
            } else if (p->k_modulus && static_cast<long>(used.size()) % *p->k_modulus != 0) {
                return;
            }
            out->push_back(used);
            return;
        }
        const auto& bucket = by_lead[pos];
        // restart index within this position's bucket
        auto it = std::lower_bound(bucket.begin(), bucket.end(), start);
        for (; it != bucket.end(); ++it) {
            std::size_t i = *it;
            if (!alive_bit(i)) continue;
            const Cand& c = p->cands[i];
            if (p->class_counts && cnt[c.cls] >= (*p->class_counts)[c.cls]) continue;
            if (!diag_fits(c)) continue;
            place(c, +1);
            used.push_back(i);
            cnt[c.cls] += 1;
            std::vector<std::uint64_t> saved = alive;
            const auto& mask = p->compat[i];
            for (std::size_t w = 0; w < alive.size(); ++w) alive[w] &= mask[w];
            if (count_feasible()) rec(pos, i);
            alive = saved;
            cnt[c.cls] -= 1;
            used.pop_back();
            place(c, -1);
        }
    }
};

std::vector<std::vector<std::size_t>> run_core(const CoreProblem& prob) {
    std::vector<std::vector<std::size_t>> sols;
    std::size_t nthreads = std::max<std::size_t>(1, prob.threads);
    if (nthreads <= 1 || prob.cands.empty()) {
        CoreState st(prob, &sols);
        if (st.count_feasible() || !prob.class_counts) st.rec(0, 0);
        return sols;
    }
    // split on the first choice at the first open position
    std::size_t pos0 = 0;
    while (pos0 < prob.width && prob.target[pos0][pos0] == 0) ++pos0;
    std::vector<std::size_t> roots;
    {
        CoreState probe(prob, &sols);
        for (std::size_t i : probe.by_lead[pos0]) roots.push_back(i);
    }
    std::vector<std::vector<std::vector<std::size_t>>> partial(roots.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= roots.size()) break;
            CoreState st(prob, &partial[t]);
            std::size_t i = roots[t];
            const Cand& c = prob.cands[i];
            if (prob.class_counts && (*prob.class_counts)[c.cls] == 0) continue;
            if (!st.diag_fits(c)) continue;
            st.place(c, +1);
            st.used.push_back(i);
            st.cnt[c.cls] += 1;
            const auto& mask = prob.compat[i];
            for (std::size_t w = 0; w < st.alive.size(); ++w) st.alive[w] &= mask[w];
            // forbid every earlier candidate of this bucket (they belong to other roots)
            for (std::size_t e = 0; e < t; ++e) {
                std::size_t j = roots[e];
                st.alive[j >> 6] &= ~(std::uint64_t(1) << (j & 63));
            }
            if (st.count_feasible()) st.rec(pos0, i);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& part : partial)
        for (auto& s : part) sols.push_back(std::move(s));
    return sols;
}

long checked_long(const Int& v, const char* what) {
    if (!v.fits_slong_p() || abs(v) > kEntryLimit)
        throw std::overflow_error(std::string(what) + " exceeds solver word range: " + v.get_str());
    return v.get_si();
}

}  // namespace

std::vector<EmbeddingSolution> solve_embedding(const GramMatrix& c_star, const RowConstraint& rc) {
    std::vector<std::vector<Int>> rows = rc.explicit_rows;
    if (rows.empty() && rc.lemma_d_order && rc.lemma_p)
        rows = admissible_rows(c_star, *rc.lemma_d_order, *rc.lemma_p);
    const std::size_t n = c_star.dim();

    CoreProblem prob;
    prob.width = n;
    prob.block_span = {{0, n}};
    prob.target.assign(n, std::vector<long>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) prob.target[i][j] = checked_long(c_star(i, j), "gram entry");
    // canonical representatives only: the gram is sign-invariant row-wise
    std::vector<std::vector<long>> canon;
    for (const auto& r : rows) {
        if (r.size() != n) throw DimensionMismatch("row constraint width");
        std::vector<long> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = checked_long(r[i], "row entry");
        std::size_t lead = 0;
        while (lead < n && v[lead] == 0) ++lead;
        if (lead == n) continue;
        if (v[lead] < 0)
            for (auto& x : v) x = -x;
        canon.push_back(std::move(v));
    }
    std::sort(canon.begin(), canon.end(), std::greater<>());
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    for (auto& v : canon) {
        Cand c;
        c.vec = std::move(v);
        c.mtot = 0;
        c.cls = 0;
        c.lead = 0;
        while (c.lead < n && c.vec[c.lead] == 0) ++c.lead;
        prob.cands.push_back(std::move(c));
    }
    // candidate order: leading position, then heavy first (by norm), then lex desc
    std::stable_sort(prob.cands.begin(), prob.cands.end(), [&](const Cand& a, const Cand& b) {
        if (a.lead != b.lead) return a.lead < b.lead;
        return a.vec > b.vec;
    });
    prob.compat.assign(prob.cands.size(),
                       std::vector<std::uint64_t>((prob.cands.size() + 63) / 64, ~std::uint64_t(0)));
    if (rc.row_count) prob.class_counts = std::vector<std::size_t>{*rc.row_count};

    auto raw = run_core(prob);
    std::vector<EmbeddingSolution> out;
    for (const auto& sol : raw) {
        IntMatrix q(sol.size(), n);
        for (std::size_t i = 0; i < sol.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) q(i, j) = Int(prob.cands[sol[i]].vec[j]);
        out.push_back({canonical_rows(q)});
    }
    std::sort(out.begin(), out.end(), [](const EmbeddingSolution& a, const EmbeddingSolution& b) {
        if (a.q.rows() != b.q.rows()) return a.q.rows() < b.q.rows();
        for (std::size_t i = 0; i < a.q.rows(); ++i)
            for (std::size_t j = 0; j < a.q.cols(); ++j)
                if (a.q(i, j) != b.q(i, j)) return a.q(i, j) > b.q(i, j);
        return false;
    });
    return out;
}

// ---------------------------------------------------------------------------
// joint multi-block solve

namespace {

struct BlockData {
    std::string label;
    std::size_t offset = 0, dim = 0;
    IntMatrix gram;
    IntMatrix adj_scaled;  // d_order * adjugate
    Int det;
};

struct Builder {
    const JointProblem& jp;
    std::vector<BlockData> blocks;
    std::size_t width = 0;
    long d_order = 0;
    long p = 0;

    explicit Builder(const JointProblem& prob) : jp(prob) {
        d_order = checked_long(prob.d_order, "defect order");
        p = checked_long(prob.p, "prime");
        std::size_t off = 0;
        for (const auto& b : prob.blocks) {
            BlockData bd;
            bd.label = b.label;
            bd.offset = off;
            bd.dim = b.gram.rows();
            bd.gram = b.gram;
            bd.det = det(b.gram);
            RatMatrix inv = rat_inverse(b.gram);
            bd.adj_scaled = IntMatrix(bd.dim, bd.dim);
            for (std::size_t i = 0; i < bd.dim; ++i)
                for (std::size_t j = 0; j < bd.dim; ++j) {
                    Rat e = inv(i, j) * Rat(bd.det) * Rat(prob.d_order);
                    if (!is_integer(e)) throw std::logic_error("adjugate scaling not integral");
                    bd.adj_scaled(i, j) = e.get_num();
                }
            off += bd.dim;
            blocks.push_back(std::move(bd));
        }
        width = off;
    }

    std::size_t block_index(const std::string& label) const {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            if (blocks[i].label == label) return i;
        throw std::invalid_argument("unknown block label: " + label);
    }

    // D * r C_b^-1 s^t if integral
    std::optional<Int> pair_m(std::size_t b, const std::vector<Int>& r, const std::vector<Int>& s) const {
        const BlockData& bd = blocks[b];
        Int num(0);
        for (std::size_t i = 0; i < bd.dim; ++i) {
            if (r[i] == 0) continue;
            Int acc(0);
            for (std::size_t j = 0; j < bd.dim; ++j)
                if (s[j] != 0) acc += bd.adj_scaled(i, j) * s[j];
            num += r[i] * acc;
        }
        if (!divides(bd.det, num)) return std::nullopt;
        return num / bd.det;
    }

    // admissible segments for one block under a class pattern, both signs
    std::vector<std::vector<Int>> block_segments(std::size_t b, const RowClassSpec& cls, const Int& bound) const {
        const BlockData& bd = blocks[b];
        auto pit = cls.patterns.find(bd.label);
        BlockPattern pat = pit == cls.patterns.end() ? BlockPattern::Nonzero : pit->second;
        std::vector<std::vector<Int>> segs;
        if (pat == BlockPattern::Zero) {
            segs.push_back(std::vector<Int>(bd.dim, Int(0)));
            return segs;
        }
        RatMatrix form(bd.dim, bd.dim);
        RatMatrix inv = rat_inverse(bd.gram);
        for (std::size_t i = 0; i < bd.dim; ++i)
            for (std::size_t j = 0; j < bd.dim; ++j) form(i, j) = inv(i, j) * Rat(jp.d_order);
        auto half = short_vectors(form, Rat(bound));
        Int divisor(1);
        auto dit = cls.divisors.find(bd.label);
        if (dit != cls.divisors.end()) divisor = dit->second;
        for (const auto& r : half) {
            if (divisor > 1) {
                bool ok = true;
                for (const auto& x : r)
                    if (!divides(divisor, x)) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
            }
            if (!pair_m(b, r, r)) continue;  // diagonal must be integral
            segs.push_back(r);
            std::vector<Int> neg(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
            segs.push_back(std::move(neg));
        }
        if (pat == BlockPattern::Free) segs.push_back(std::vector<Int>(bd.dim, Int(0)));
        return segs;
    }

    Int min_nonzero_m(std::size_t b, const RowClassSpec& cls) const {
        auto pit = cls.patterns.find(blocks[b].label);
        BlockPattern pat = pit == cls.patterns.end() ? BlockPattern::Nonzero : pit->second;
        if (pat != BlockPattern::Nonzero) return Int(0);
        auto segs = block_segments(b, cls, jp.d_order - 1);
        std::optional<Int> best;
        for (const auto& s : segs) {
            bool zero = true;
            for (const auto& x : s)
                if (x != 0) zero = false;
            if (zero) continue;
            auto m = pair_m(b, s, s);
            if (m && (!best || *m < *best)) best = *m;
        }
        return best ? *best : Int(0);
    }
};

struct FullRow {
    std::vector<Int> vec;                 // all solver columns
    std::map<std::string, Int> m;
    Int mtot;
    std::size_t cls;
};

bool diag_row_ok(const JointProblem& jp, const std::map<std::string, Int>& m, bool complete,
                 const Int& mtot, const RowClassSpec* cls) {
    for (const auto& sc : jp.star) {
        bool uses_m1 = sc.coeffs.count("1") > 0;
        bool have_all = true;
        for (const auto& [label, coeff] : sc.coeffs)
            if (label != "1" && !m.count(label)) have_all = false;
        if (!have_all) continue;
        if (uses_m1 && !complete) continue;
        Int s(0);
        for (const auto& [label, coeff] : sc.coeffs)
            s += coeff * (label == "1" ? jp.d_order - mtot : m.at(label));
        if (!divides(sc.modulus, s)) return false;
    }
    for (const auto& dc : jp.diag) {
        bool have_all = true;
        for (const auto& [label, coeff] : dc.coeffs)
            if (!m.count(label)) have_all = false;
        if (!have_all) continue;
        Int s(0);
        for (const auto& [label, coeff] : dc.coeffs) s += coeff * m.at(label);
        if (std::find(dc.allowed.begin(), dc.allowed.end(), s) == dc.allowed.end()) return false;
    }
    if (complete && cls) {
        Int m1 = jp.d_order - mtot;
        if (m1 < 1) return false;
        if (cls->m1_coprime_to_p) {
            if (divides(jp.p, m1)) return false;
        } else {
            if (!divides(jp.p, m1)) return false;
        }
    }
    return true;
}

bool pair_ok(const JointProblem& jp, const std::map<std::string, std::optional<Int>>& mv) {
    for (const auto& [label, v] : mv)
        if (!v) return false;
    for (const auto& sc : jp.star) {
        if (sc.coeffs.count("1")) continue;  // complement terms handled on full matrices
        bool have_all = true;
        for (const auto& [label, coeff] : sc.coeffs)
            if (!mv.count(label)) have_all = false;
        if (!have_all) continue;
        Int s(0);
        for (const auto& [label, coeff] : sc.coeffs) s += coeff * *mv.at(label);
        if (!divides(sc.modulus, s)) return false;
    }
    return true;
}

struct StagedRow {
    std::vector<Int> vec;  // stage-1 columns only
    std::map<std::string, Int> m;
    Int mtot;
    std::size_t cls;
};

}  // namespace

std::vector<JointSolution> solve_joint(const JointProblem& jp) {
    Builder bld(jp);
    if (jp.stages.empty() || jp.stages.size() > 2)
        throw std::invalid_argument("solve_joint: expected 1 or 2 stages");

    // ---- stage-1 block set and candidate rows
    std::vector<std::size_t> s1blocks;
    for (const auto& label : jp.stages[0]) s1blocks.push_back(bld.block_index(label));
    std::vector<std::size_t> s2blocks;
    if (jp.stages.size() == 2)
        for (const auto& label : jp.stages[1]) s2blocks.push_back(bld.block_index(label));
    const bool single_stage = s2blocks.empty();

    std::size_t s1width = 0;
    std::vector<std::size_t> s1off(bld.blocks.size(), 0);
    for (std::size_t b : s1blocks) {
        s1off[b] = s1width;
        s1width += bld.blocks[b].dim;
    }

    // per-class minimal future m (blocks outside the stage)
    auto future_min = [&](const RowClassSpec& cls, const std::vector<std::size_t>& inside) {
        Int tot(0);
        for (std::size_t b = 0; b < bld.blocks.size(); ++b) {
            if (std::find(inside.begin(), inside.end(), b) != inside.end()) continue;
            tot += bld.min_nonzero_m(b, cls);
        }
        return tot;
    };

    struct S1Cand {
        std::vector<Int> vec;
        std::map<std::string, Int> m;
        Int mtot;
        std::size_t cls;
    };
    std::vector<S1Cand> s1cands;
    for (std::size_t ci = 0; ci < jp.classes.size(); ++ci) {
        const RowClassSpec& cls = jp.classes[ci];
        bool all_zero = true;
        for (std::size_t b : s1blocks) {
            auto pit = cls.patterns.find(bld.blocks[b].label);
            if (pit == cls.patterns.end() || pit->second != BlockPattern::Zero) all_zero = false;
        }
        if (all_zero && !single_stage) continue;  // such rows enter in stage 2
        Int bound = jp.d_order - 1 - future_min(cls, s1blocks);
        std::vector<std::vector<std::vector<Int>>> per;
        for (std::size_t b : s1blocks) per.push_back(bld.block_segments(b, cls, bound));
        std::vector<std::size_t> idx(per.size(), 0);
        // cartesian product over block segments
        for (;;) {
            std::vector<Int> vec(s1width, Int(0));
            std::map<std::string, Int> m;
            Int mtot(0);
            bool ok = true, zero = true;
            for (std::size_t t = 0; t < per.size(); ++t) {
                std::size_t b = s1blocks[t];
                const auto& seg = per[t][idx[t]];
                for (std::size_t i = 0; i < seg.size(); ++i) {
                    vec[s1off[b] + i] = seg[i];
                    if (seg[i] != 0) zero = false;
                }
                auto mm = bld.pair_m(b, seg, seg);
                if (!mm) {
                    ok = false;
                    break;
                }
                m[bld.blocks[b].label] = *mm;
                mtot += *mm;
            }
            if (ok && !zero && mtot <= bound &&
                diag_row_ok(jp, m, single_stage, mtot, single_stage ? &cls : nullptr)) {
                // canonical global sign on the stage row
                std::size_t lead = 0;
                while (lead < s1width && vec[lead] == 0) ++lead;
                if (vec[lead] > 0) s1cands.push_back({std::move(vec), std::move(m), mtot, ci});
            }
            std::size_t t = 0;
            while (t < per.size()) {
                if (++idx[t] < per[t].size()) break;
                idx[t] = 0;
                ++t;
            }
            if (t == per.size()) break;
        }
    }

    // resolve class counts (fixed when any class has nonzero declared count)
    std::optional<std::vector<std::size_t>> counts;
    bool have_counts = false;
    for (const auto& c : jp.classes)
        if (c.count > 0) have_counts = true;
    if (have_counts) {
        counts = std::vector<std::size_t>();
        for (const auto& c : jp.classes) counts->push_back(c.count);
    }

    auto make_core = [&](std::size_t widthv, const std::vector<std::size_t>& blockids,
                         const std::vector<std::size_t>& offs) {
        CoreProblem prob;
        prob.width = widthv;
        prob.target.assign(widthv, std::vector<long>(widthv, 0));
        for (std::size_t b : blockids) {
            const BlockData& bd = bld.blocks[b];
            for (std::size_t i = 0; i < bd.dim; ++i)
                for (std::size_t j = 0; j < bd.dim; ++j)
                    prob.target[offs[b] + i][offs[b] + j] = checked_long(bd.gram(i, j), "gram entry");
            prob.block_span.push_back({offs[b], bd.dim});
            prob.mbudget.push_back(checked_long(jp.d_order * Int(static_cast<long>(bd.dim)), "m budget"));
        }
        prob.k_modulus = jp.k_modulus ? std::optional<long>(checked_long(*jp.k_modulus, "k modulus"))
                                      : std::nullopt;
        prob.threads = jp.thread_count;
        return prob;
    };

    auto fill_core_rows = [&](CoreProblem& prob, const std::vector<std::size_t>& blockids,
                              auto&& rows, auto&& vec_of, auto&& m_of, auto&& cls_of) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Cand c;
            const auto& vec = vec_of(rows[i]);
            c.vec.resize(prob.width);
            for (std::size_t j = 0; j < prob.width; ++j) c.vec[j] = checked_long(vec[j], "row entry");
            for (std::size_t bi = 0; bi < blockids.size(); ++bi)
                c.m.push_back(checked_long(m_of(rows[i], bld.blocks[blockids[bi]].label), "m value"));
            c.mtot = std::accumulate(c.m.begin(), c.m.end(), 0L);
            c.cls = cls_of(rows[i]);
            c.lead = 0;
            while (c.lead < prob.width && c.vec[c.lead] == 0) ++c.lead;
            prob.cands.push_back(std::move(c));
        }
        std::stable_sort(prob.cands.begin(), prob.cands.end(), [](const Cand& a, const Cand& b) {
            if (a.lead != b.lead) return a.lead < b.lead;
            if (a.mtot != b.mtot) return a.mtot > b.mtot;
            return a.vec > b.vec;
        });
    };

    auto build_compat = [&](CoreProblem& prob, const std::vector<std::size_t>& blockids,
                            auto&& seg_of) {
        const std::size_t n = prob.cands.size();
        prob.compat.assign(n, std::vector<std::uint64_t>((n + 63) / 64, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                std::map<std::string, std::optional<Int>> mv;
                for (std::size_t b : blockids) {
                    auto ri = seg_of(prob.cands[i], b);
                    auto rj = seg_of(prob.cands[j], b);
                    mv[bld.blocks[b].label] = bld.pair_m(b, ri, rj);
                }
                if (pair_ok(jp, mv)) {
                    prob.compat[i][j >> 6] |= std::uint64_t(1) << (j & 63);
                    prob.compat[j][i >> 6] |= std::uint64_t(1) << (i & 63);
                }
            }
    };

    auto seg_from_vec = [&](const Cand& c, std::size_t b, const std::vector<std::size_t>& offs) {
        std::vector<Int> seg(bld.blocks[b].dim);
        for (std::size_t i = 0; i < seg.size(); ++i) seg[i] = Int(c.vec[offs[b] + i]);
        return seg;
    };

    // ---- stage-1 solve
    CoreProblem prob1 = make_core(s1width, s1blocks, s1off);
    std::optional<std::vector<std::size_t>> s1counts;
    if (counts) {
        s1counts = std::vector<std::size_t>(jp.classes.size(), 0);
        for (std::size_t ci = 0; ci < jp.classes.size(); ++ci) {
            bool all_zero = true;
            for (std::size_t b : s1blocks) {
                auto pit = jp.classes[ci].patterns.find(bld.blocks[b].label);
                if (pit == jp.classes[ci].patterns.end() || pit->second != BlockPattern::Zero)
                    all_zero = false;
            }
            (*s1counts)[ci] = (all_zero && !single_stage) ? 0 : (*counts)[ci];
        }
    }
    prob1.class_counts = s1counts;
    fill_core_rows(
        prob1, s1blocks, s1cands, [](const S1Cand& r) -> const std::vector<Int>& { return r.vec; },
        [](const S1Cand& r, const std::string& l) { return r.m.at(l); },
        [](const S1Cand& r) { return r.cls; });
    build_compat(prob1, s1blocks,
                 [&](const Cand& c, std::size_t b) { return seg_from_vec(c, b, s1off); });
    auto raw1 = run_core(prob1);

    // ---- assemble solutions: widths in problem block order
    std::vector<std::size_t> full_off(bld.blocks.size(), 0);
    for (std::size_t b = 0; b < bld.blocks.size(); ++b) full_off[b] = bld.blocks[b].offset;

    std::vector<JointSolution> out;
    auto emit = [&](const std::vector<FullRow>& rows) {
        // full star constraints with the complement term
        const std::size_t k = rows.size();
        bool need_full = false;
        for (const auto& sc : jp.star)
            if (sc.coeffs.count("1")) need_full = true;
        if (need_full) {
            for (const auto& sc : jp.star) {
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) {
                        Int s(0);
                        for (const auto& [label, coeff] : sc.coeffs) {
                            if (label == "1") {
                                Int m1 = (i == j ? jp.d_order : Int(0));
                                for (const auto& bdd : bld.blocks) {
                                    std::vector<Int> ri(bdd.dim), rj(bdd.dim);
                                    for (std::size_t t = 0; t < bdd.dim; ++t) {
                                        ri[t] = rows[i].vec[bdd.offset + t];
                                        rj[t] = rows[j].vec[bdd.offset + t];
                                    }
                                    auto mm = bld.pair_m(bld.block_index(bdd.label), ri, rj);
                                    if (!mm) return;
                                    m1 -= *mm;
                                }
                                s += coeff * m1;
                            } else {
                                std::size_t b = bld.block_index(label);
                                const BlockData& bd = bld.blocks[b];
                                std::vector<Int> ri(bd.dim), rj(bd.dim);
                                for (std::size_t t = 0; t < bd.dim; ++t) {
                                    ri[t] = rows[i].vec[bd.offset + t];
                                    rj[t] = rows[j].vec[bd.offset + t];
                                }
                                auto mm = bld.pair_m(b, ri, rj);
                                if (!mm) return;
                                s += coeff * *mm;
                            }
                        }
                        if (!divides(sc.modulus, s)) return;
                    }
            }
        }
        JointSolution js;
        js.q = IntMatrix(k, bld.width);
        // canonical: sign-normalize each row, group by class, sort descending inside
        std::vector<FullRow> canon = rows;
        for (auto& r : canon)
            for (const auto& x : r.vec) {
                if (x == 0) continue;
                if (x < 0)
                    for (auto& y : r.vec) y = -y;
                break;
            }
        std::vector<std::vector<const FullRow*>> bycls(jp.classes.size());
        for (const auto& r : canon) bycls[r.cls].push_back(&r);
        for (auto& grp : bycls)
            std::sort(grp.begin(), grp.end(),
                      [](const FullRow* a, const FullRow* b) { return a->vec > b->vec; });
        std::size_t row = 0;
        for (std::size_t ci = 0; ci < bycls.size(); ++ci)
            for (const FullRow* r : bycls[ci]) {
                for (std::size_t j = 0; j < bld.width; ++j) js.q(row, j) = r->vec[j];
                js.class_of_row.push_back(ci);
                ++row;
            }
        out.push_back(std::move(js));
    };

    if (single_stage) {
        for (const auto& sol : raw1) {
            std::vector<FullRow> rows;
            for (std::size_t idx : sol) {
                const Cand& c = prob1.cands[idx];
                FullRow fr;
                fr.vec.assign(bld.width, Int(0));
                for (std::size_t b : s1blocks) {
                    const BlockData& bd = bld.blocks[b];
                    for (std::size_t t = 0; t < bd.dim; ++t) fr.vec[bd.offset + t] = Int(c.vec[s1off[b] + t]);
                }
                fr.cls = c.cls;
                fr.mtot = Int(c.mtot);
                rows.push_back(std::move(fr));
            }
            emit(rows);
        }
    } else {
        // ---- stage-2: extend each stage-1 class to the full width
        for (const auto& sol1 : raw1) {
            // distinct slot values with multiplicities
            std::map<std::pair<std::vector<long>, std::size_t>, std::size_t> slots;
            for (std::size_t idx : sol1) {
                const Cand& c = prob1.cands[idx];
                slots[{c.vec, c.cls}] += 1;
            }
            if (counts) {
                for (std::size_t ci = 0; ci < jp.classes.size(); ++ci) {
                    bool all_zero = true;
                    for (std::size_t b : s1blocks) {
                        auto pit = jp.classes[ci].patterns.find(bld.blocks[b].label);
                        if (pit == jp.classes[ci].patterns.end() || pit->second != BlockPattern::Zero)
                            all_zero = false;
                    }
                    if (all_zero && (*counts)[ci] > 0)
                        slots[{std::vector<long>(s1width, 0), ci}] += (*counts)[ci];
                }
            }
            std::vector<std::pair<std::vector<long>, std::size_t>> slotvals;
            std::vector<std::size_t> slotmult;
            for (const auto& [key, mult] : slots) {
                slotvals.push_back(key);
                slotmult.push_back(mult);
            }
            // extension candidates
            struct ExtRow {
                std::vector<Int> vec;
                std::map<std::string, Int> m;
                Int mtot;
                std::size_t slot;
            };
            std::vector<ExtRow> ext;
            for (std::size_t si = 0; si < slotvals.size(); ++si) {
                const auto& [s1vec, ci] = slotvals[si];
                const RowClassSpec& cls = jp.classes[ci];
                std::vector<std::vector<std::vector<Int>>> per;
                for (std::size_t b : s2blocks)
                    per.push_back(bld.block_segments(b, cls, jp.d_order - 1));
                std::map<std::string, Int> base_m;
                Int base_mtot(0);
                bool s1zero = true;
                for (long x : s1vec)
                    if (x) s1zero = false;
                for (std::size_t b : s1blocks) {
                    std::vector<Int> seg(bld.blocks[b].dim);
                    for (std::size_t t = 0; t < seg.size(); ++t) seg[t] = Int(s1vec[s1off[b] + t]);
                    base_m[bld.blocks[b].label] = *bld.pair_m(b, seg, seg);
                    base_mtot += base_m[bld.blocks[b].label];
                }
                std::vector<std::size_t> idx(per.size(), 0);
                if (per.empty()) continue;
                for (;;) {
                    std::map<std::string, Int> m = base_m;
                    Int mtot = base_mtot;
                    bool ok = true, extzero = true;
                    for (std::size_t t = 0; t < per.size(); ++t) {
                        std::size_t b = s2blocks[t];
                        const auto& seg = per[t][idx[t]];
                        for (const auto& x : seg)
                            if (x != 0) extzero = false;
                        auto mm = bld.pair_m(b, seg, seg);
                        if (!mm) {
                            ok = false;
                            break;
                        }
                        m[bld.blocks[b].label] = *mm;
                        mtot += *mm;
                    }
                    if (ok && !(s1zero && extzero) && mtot <= jp.d_order - 1 &&
                        diag_row_ok(jp, m, true, mtot, &cls)) {
                        // canonical sign for zero-prefix rows
                        bool sign_ok = true;
                        if (s1zero) {
                            for (std::size_t t = 0; t < per.size() && sign_ok; ++t) {
                                for (const auto& x : per[t][idx[t]]) {
                                    if (x == 0) continue;
                                    if (x < 0) sign_ok = false;
                                    break;
                                }
                                bool any = false;
                                for (const auto& x : per[t][idx[t]])
                                    if (x != 0) any = true;
                                if (any) break;
                            }
                        }
                        if (sign_ok) {
                            ExtRow er;
                            er.vec.assign(bld.width, Int(0));
                            for (std::size_t b : s1blocks) {
                                const BlockData& bd = bld.blocks[b];
                                for (std::size_t t = 0; t < bd.dim; ++t)
                                    er.vec[bd.offset + t] = Int(s1vec[s1off[b] + t]);
                            }
                            for (std::size_t t = 0; t < per.size(); ++t) {
                                const BlockData& bd = bld.blocks[s2blocks[t]];
                                for (std::size_t u = 0; u < bd.dim; ++u)
                                    er.vec[bd.offset + u] = per[t][idx[t]][u];
                            }
                            er.m = std::move(m);
                            er.mtot = mtot;
                            er.slot = si;
                            ext.push_back(std::move(er));
                        }
                    }
                    std::size_t t = 0;
                    while (t < per.size()) {
                        if (++idx[t] < per[t].size()) break;
                        idx[t] = 0;
                        ++t;
                    }
                    if (t == per.size()) break;
                }
            }
            // full-width core with one count-class per slot
            std::vector<std::size_t> allblocks(bld.blocks.size());
            std::iota(allblocks.begin(), allblocks.end(), 0);
            CoreProblem prob2 = make_core(bld.width, allblocks, full_off);
            prob2.class_counts = slotmult;
            prob2.k_modulus.reset();
            prob2.threads = 1;
            fill_core_rows(
                prob2, allblocks, ext, [](const ExtRow& r) -> const std::vector<Int>& { return r.vec; },
                [](const ExtRow& r, const std::string& l) { return r.m.at(l); },
                [](const ExtRow& r) { return r.slot; });
            build_compat(prob2, allblocks,
                         [&](const Cand& c, std::size_t b) { return seg_from_vec(c, b, full_off); });
            auto raw2 = run_core(prob2);
            for (const auto& sol2 : raw2) {
                std::vector<FullRow> rows;
                for (std::size_t idx2 : sol2) {
                    const Cand& c = prob2.cands[idx2];
                    FullRow fr;
                    fr.vec.assign(bld.width, Int(0));
                    for (std::size_t j = 0; j < bld.width; ++j) fr.vec[j] = Int(c.vec[j]);
                    fr.cls = slotvals[c.cls].second;
                    fr.mtot = Int(c.mtot);
                    rows.push_back(std::move(fr));
                }
                emit(rows);
            }
        }
    }

    // dedupe identical canonical solutions (different stage-1 classes can
    // produce the same full multiset)
    std::sort(out.begin(), out.end(), [](const JointSolution& a, const JointSolution& b) {
        if (a.q.rows() != b.q.rows()) return a.q.rows() < b.q.rows();
        for (std::size_t i = 0; i < a.q.rows(); ++i)
            for (std::size_t j = 0; j < a.q.cols(); ++j)
                if (a.q(i, j) != b.q(i, j)) return a.q(i, j) < b.q(i, j);
        return false;
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const JointSolution& a, const JointSolution& b) { return a.q == b.q; }),
              out.end());
    return out;
}

}  // namespace blocklab
