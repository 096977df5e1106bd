#include "dioph/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace dioph {

namespace {

mpz_class det2(const mpz_class& a, const mpz_class& b, const mpz_class& c, const mpz_class& d) {
    return a * d - b * c;
}

mpz_class det3(const std::array<std::array<mpz_class, 3>, 3>& m) {
    return m[0][0] * det2(m[1][1], m[1][2], m[2][1], m[2][2]) -
           m[0][1] * det2(m[1][0], m[1][2], m[2][0], m[2][2]) +
           m[0][2] * det2(m[1][0], m[1][1], m[2][0], m[2][1]);
}

mpz_class det_small(const std::vector<std::vector<mpz_class>>& m) {
    size_t n = m.size();
    if (n == 1) return m[0][0];
    if (n == 2) return det2(m[0][0], m[0][1], m[1][0], m[1][1]);
    if (n == 3) {
        std::array<std::array<mpz_class, 3>, 3> a;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a[i][j] = m[i][j];
        return det3(a);
    }
    mpz_class d = 0;
    for (size_t j = 0; j < n; ++j) {
        if (m[0][j] == 0) continue;
        std::vector<std::vector<mpz_class>> sub(n - 1, std::vector<mpz_class>(n - 1));
        for (size_t r = 1; r < n; ++r) {
            size_t cc = 0;
            for (size_t c = 0; c < n; ++c)
                if (c != j) sub[r - 1][cc++] = m[r][c];
        }
        mpz_class t = m[0][j] * det_small(sub);
        if (j % 2)
            d -= t;
        else
            d += t;
    }
    return d;
}

std::vector<std::vector<mpz_class>> as_rows(const VecList& vs) {
    std::vector<std::vector<mpz_class>> m;
    m.reserve(vs.size());
    for (const auto& v : vs) m.push_back({v.q, v.a[0], v.a[1], v.a[2]});
    return m;
}

mpz_class gcd_all(const std::vector<mpz_class>& xs) {
    mpz_class g = 0;
    for (const auto& x : xs) g = gcd(g, x);
    return g;
}

} // namespace

int rank(const VecList& vs) {
    if (vs.empty() || vs.size() > 4) throw std::domain_error("rank: need 1..4 vectors");
    auto m = as_rows(vs);
    size_t rows = m.size(), cols = 4, r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && m[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        for (size_t i = r + 1; i < rows; ++i) {
            if (m[i][c] == 0) continue;
            // fraction-free row update keeps everything integral
            for (size_t j = c + 1; j < cols; ++j) m[i][j] = m[i][j] * m[r][c] - m[r][j] * m[i][c];
            m[i][c] = 0;
        }
        ++r;
    }
    return static_cast<int>(r);
}

mpz_class det4(const IntVec& v1, const IntVec& v2, const IntVec& v3, const IntVec& v4) {
    // Laplace expansion by complementary 2x2 minors of rows (v1,v2) and (v3,v4).
    auto m2 = [&](const IntVec& x, const IntVec& y, int i, int j) {
        return det2(x.coord(i), x.coord(j), y.coord(i), y.coord(j));
    };
    return m2(v1, v2, 0, 1) * m2(v3, v4, 2, 3) - m2(v1, v2, 0, 2) * m2(v3, v4, 1, 3) +
           m2(v1, v2, 0, 3) * m2(v3, v4, 1, 2) + m2(v1, v2, 1, 2) * m2(v3, v4, 0, 3) -
           m2(v1, v2, 1, 3) * m2(v3, v4, 0, 2) + m2(v1, v2, 2, 3) * m2(v3, v4, 0, 1);
}

std::array<mpz_class, 4> cross4(const IntVec& v1, const IntVec& v2, const IntVec& v3) {
    std::array<mpz_class, 4> n;
    for (int j = 0; j < 4; ++j) {
        std::array<std::array<mpz_class, 3>, 3> m;
        const IntVec* vs[3] = {&v1, &v2, &v3};
        for (int r = 0; r < 3; ++r) {
            int cc = 0;
            for (int c = 0; c < 4; ++c)
                if (c != j) m[r][cc++] = vs[r]->coord(c);
        }
        mpz_class mj = det3(m);
        n[j] = (j % 2 == 0) ? -mj : mj;
    }
    return n;
}

bool is_primitive(const VecList& vs) {
    if (vs.empty() || vs.size() > 3) throw std::domain_error("is_primitive: need 1..3 vectors");
    std::vector<mpz_class> minors;
    if (vs.size() == 1) {
        for (int i = 0; i < 4; ++i) minors.push_back(vs[0].coord(i));
    } else if (vs.size() == 2) {
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                minors.push_back(det2(vs[0].coord(i), vs[0].coord(j), vs[1].coord(i), vs[1].coord(j)));
    } else {
        auto n = cross4(vs[0], vs[1], vs[2]);
        minors.assign(n.begin(), n.end());
    }
    mpz_class g = gcd_all(minors);
    if (g == 0) throw std::domain_error("is_primitive: linearly dependent input");
    return g == 1;
}

void hnf_cols(std::vector<std::vector<mpz_class>>& M, std::vector<std::vector<mpz_class>>& U) {
    size_t r = M.size();
    size_t c = r ? M[0].size() : U.size();
    U.assign(c, std::vector<mpz_class>(c, 0));
    for (size_t i = 0; i < c; ++i) U[i][i] = 1;
    auto colsub = [&](size_t dst, size_t src, const mpz_class& t) {
        if (t == 0) return;
        for (size_t i = 0; i < r; ++i) M[i][dst] -= t * M[i][src];
        for (size_t i = 0; i < c; ++i) U[i][dst] -= t * U[i][src];
    };
    auto colswap = [&](size_t x, size_t y) {
        if (x == y) return;
        for (size_t i = 0; i < r; ++i) std::swap(M[i][x], M[i][y]);
        for (size_t i = 0; i < c; ++i) std::swap(U[i][x], U[i][y]);
    };
    auto colneg = [&](size_t x) {
        for (size_t i = 0; i < r; ++i) M[i][x] = -M[i][x];
        for (size_t i = 0; i < c; ++i) U[i][x] = -U[i][x];
    };
    size_t pc = 0;
    for (size_t row = 0; row < r && pc < c; ++row) {
        while (true) {
            size_t best = c;
            for (size_t j = pc; j < c; ++j) {
                if (M[row][j] == 0) continue;
                if (best == c ||
                    mpz_cmpabs(M[row][j].get_mpz_t(), M[row][best].get_mpz_t()) < 0)
                    best = j;
            }
            if (best == c) break; // row clear beyond pc
            colswap(pc, best);
            bool clean = true;
            for (size_t j = pc + 1; j < c; ++j) {
                if (M[row][j] == 0) continue;
                mpz_class t;
                mpz_tdiv_q(t.get_mpz_t(), M[row][j].get_mpz_t(), M[row][pc].get_mpz_t());
                colsub(j, pc, t);
                if (M[row][j] != 0) clean = false;
            }
            if (clean) {
                if (M[row][pc] < 0) colneg(pc);
                // canonical: entries left of the pivot reduced into [0, pivot)
                for (size_t j = 0; j < pc; ++j) {
                    mpz_class t;
                    mpz_fdiv_q(t.get_mpz_t(), M[row][j].get_mpz_t(), M[row][pc].get_mpz_t());
                    colsub(j, pc, t);
                }
                ++pc;
                break;
            }
        }
    }
}

std::vector<std::vector<mpz_class>> int_kernel(const std::vector<std::vector<mpz_class>>& Min) {
    auto M = Min;
    size_t r = M.size();
    size_t c = r ? M[0].size() : 0;
    if (c == 0) return {};
    std::vector<std::vector<mpz_class>> U;
    hnf_cols(M, U);
    std::vector<std::vector<mpz_class>> ker;
    for (size_t j = 0; j < c; ++j) {
        bool zero = true;
        for (size_t i = 0; i < r && zero; ++i) zero = (M[i][j] == 0);
        if (!zero) continue;
        std::vector<mpz_class> v(c);
        for (size_t i = 0; i < c; ++i) v[i] = U[i][j];
        ker.push_back(std::move(v));
    }
    return ker;
}

SublatticeBasis saturate(const VecList& vs) {
    int r = rank(vs);
    if (r != static_cast<int>(vs.size()))
        throw std::domain_error("saturate: input not linearly independent");
    SublatticeBasis out;
    out.rank = r;
    out.saturated = true;
    std::vector<std::vector<mpz_class>> basis;
    if (r == 4) {
        basis = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    } else {
        auto K = int_kernel(as_rows(vs)); // orthogonal complement in Z^4
        basis = int_kernel(K);            // integer points of span_Q(vs)
    }
    // canonicalize by row HNF (via column HNF of the transpose)
    size_t n = basis.size();
    std::vector<std::vector<mpz_class>> T(4, std::vector<mpz_class>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < 4; ++j) T[j][i] = basis[i][j];
    std::vector<std::vector<mpz_class>> U;
    hnf_cols(T, U);
    for (size_t i = 0; i < n; ++i) {
        IntVec v;
        for (int j = 0; j < 4; ++j) v.coord(j) = T[j][i];
        out.vectors.push_back(std::move(v));
    }
    return out;
}

mpz_class gram_det_sq(const VecList& vs) {
    size_t n = vs.size();
    if (n == 0 || n > 4) throw std::domain_error("gram_det_sq: need 1..4 vectors");
    std::vector<std::vector<mpz_class>> g(n, std::vector<mpz_class>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i; j < n; ++j) {
            mpz_class d = 0;
            for (int t = 0; t < 4; ++t) d += vs[i].coord(t) * vs[j].coord(t);
            g[i][j] = d;
            if (i != j) g[j][i] = g[i][j];
        }
    return det_small(g);
}

mpz_class height_sq(const SublatticeBasis& b) {
    if (!b.saturated) throw std::domain_error("height_sq: basis not saturated");
    return gram_det_sq(b.vectors);
}

IntVec complete_to_basis(const IntVec& v1, const IntVec& v2, const IntVec& v3) {
    auto n = cross4(v1, v2, v3);
    // chain of extended gcds: find x with n.x = 1
    mpz_class g01, s0, s1;
    mpz_gcdext(g01.get_mpz_t(), s0.get_mpz_t(), s1.get_mpz_t(), n[0].get_mpz_t(), n[1].get_mpz_t());
    mpz_class g012, t, u;
    mpz_gcdext(g012.get_mpz_t(), t.get_mpz_t(), u.get_mpz_t(), g01.get_mpz_t(), n[2].get_mpz_t());
    mpz_class g, v, w;
    mpz_gcdext(g.get_mpz_t(), v.get_mpz_t(), w.get_mpz_t(), g012.get_mpz_t(), n[3].get_mpz_t());
    if (g != 1) throw std::domain_error("complete_to_basis: triple is not primitive");
    IntVec x;
    x.coord(0) = v * t * s0;
    x.coord(1) = v * t * s1;
    x.coord(2) = v * u;
    x.coord(3) = w;
    return x;
}

std::vector<IntVec> complete_to_primitive(VecList fixed,
                                          const std::vector<std::array<mpq_class, 4>>& targets) {
    std::vector<IntVec> found;
    for (const auto& tgt : targets) {
        IntVec center;
        mpq_class norm_sq = 0;
        for (int i = 0; i < 4; ++i) {
            mpq_class half(1, 2);
            mpq_class shifted = tgt[i] + half;
            mpz_class fl;
            mpz_fdiv_q(fl.get_mpz_t(), shifted.get_num().get_mpz_t(), shifted.get_den().get_mpz_t());
            center.coord(i) = fl;
            norm_sq += tgt[i] * tgt[i];
        }
        double cap_d = std::sqrt(std::max(0.0, norm_sq.get_d())) / 10.0;
        if (!(cap_d < 1e6)) cap_d = 1e6; // search this wide is hopeless anyway
        long cap = cap_d < 1 ? 1 : static_cast<long>(cap_d);
        bool ok = false;
        for (long R = 1; R <= cap && !ok; R = (R > cap / 2 && R < cap) ? cap : R * 2) {
            // collect this shell's candidates, nearest to the target first
            struct Cand {
                IntVec v;
                mpq_class d2;
                std::array<long, 4> off;
            };
            std::vector<Cand> shell;
            long lo = -R, hi = R;
            for (long o0 = lo; o0 <= hi; ++o0)
                for (long o1 = lo; o1 <= hi; ++o1)
                    for (long o2 = lo; o2 <= hi; ++o2)
                        for (long o3 = lo; o3 <= hi; ++o3) {
                            long m = std::max({std::labs(o0), std::labs(o1), std::labs(o2), std::labs(o3)});
                            if (R > 1 && m <= R / 2) continue; // inner shells already tried
                            Cand cd;
                            cd.off = {o0, o1, o2, o3};
                            cd.v = center;
                            cd.v.coord(0) += o0;
                            cd.v.coord(1) += o1;
                            cd.v.coord(2) += o2;
                            cd.v.coord(3) += o3;
                            cd.d2 = 0;
                            for (int i = 0; i < 4; ++i) {
                                mpq_class di = mpq_class(cd.v.coord(i)) - tgt[i];
                                cd.d2 += di * di;
                            }
                            shell.push_back(std::move(cd));
                        }
            std::sort(shell.begin(), shell.end(), [](const Cand& a, const Cand& b) {
                int c = cmp(a.d2, b.d2);
                if (c != 0) return c < 0;
                return a.off < b.off;
            });
            for (auto& cd : shell) {
                VecList trial = fixed;
                trial.push_back(cd.v);
                if (rank(trial) != static_cast<int>(trial.size())) continue;
                bool prim = trial.size() <= 3 ? is_primitive(trial)
                                              : (abs(det4(trial[0], trial[1], trial[2], trial[3])) == 1);
                if (!prim) continue;
                fixed.push_back(cd.v);
                found.push_back(cd.v);
                ok = true;
                break;
            }
        }
        if (!ok) throw CompletionFailure("complete_to_primitive: search exhausted", center);
    }
    return found;
}

std::optional<std::array<mpq_class, 3>> solve_4x3(
    const std::array<std::array<mpz_class, 3>, 4>& M, const std::array<mpz_class, 4>& b) {
    static const int combos[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    for (const auto& rows : combos) {
        std::array<std::array<mpz_class, 3>, 3> A;
        for (int i = 0; i < 3; ++i) A[i] = M[rows[i]];
        mpz_class D = det3(A);
        if (D == 0) continue;
        std::array<mpq_class, 3> x;
        for (int col = 0; col < 3; ++col) {
            auto Ai = A;
            for (int i = 0; i < 3; ++i) Ai[i][col] = b[rows[i]];
            x[col] = mpq_class(det3(Ai)) / mpq_class(D);
            x[col].canonicalize();
        }
        int left_out = 0 + 1 + 2 + 3 - rows[0] - rows[1] - rows[2];
        mpq_class res = -mpq_class(b[left_out]);
        for (int col = 0; col < 3; ++col) res += mpq_class(M[left_out][col]) * x[col];
        if (res != 0) return std::nullopt; // inconsistent
        return x;
    }
    return std::nullopt; // rank < 3
}

std::optional<std::array<mpq_class, 4>> solve_4x4(
    const std::array<std::array<mpz_class, 4>, 4>& M, const std::array<mpz_class, 4>& b) {
    std::vector<std::vector<mpz_class>> A(4, std::vector<mpz_class>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A[i][j] = M[i][j];
    mpz_class D = det_small(A);
    if (D == 0) return std::nullopt;
    std::array<mpq_class, 4> x;
    for (int col = 0; col < 4; ++col) {
        auto Ai = A;
        for (int i = 0; i < 4; ++i) Ai[i][col] = b[i];
        x[col] = mpq_class(det_small(Ai)) / mpq_class(D);
        x[col].canonicalize();
    }
    return x;
}

} // namespace dioph
