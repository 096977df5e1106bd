#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dioph/linalg.hpp"

#include <array>
#include <random>
#include <vector>

using namespace dioph;

namespace {

IntVec vec(long q, long a1, long a2, long a3) {
    return IntVec(mpz_class(q), mpz_class(a1), mpz_class(a2), mpz_class(a3));
}

// Random unimodular 4x4 built from elementary row operations, so its rows are
// a basis of Z^4 by construction.
std::array<IntVec, 4> random_unimodular(std::mt19937_64& rng) {
    std::array<std::array<mpz_class, 4>, 4> m{};
    for (int i = 0; i < 4; ++i) m[i][i] = 1;
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<int> coef(-4, 4);
    for (int t = 0; t < 12; ++t) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        long c = coef(rng);
        for (int col = 0; col < 4; ++col) m[i][col] += c * m[j][col];
    }
    std::array<IntVec, 4> out;
    for (int i = 0; i < 4; ++i)
        for (int col = 0; col < 4; ++col) out[i].coord(col) = m[i][col];
    return out;
}

} // namespace

TEST_CASE("det4 on elementary examples") {
    IntVec e0 = vec(1, 0, 0, 0), e1 = vec(0, 1, 0, 0), e2 = vec(0, 0, 1, 0),
           e3 = vec(0, 0, 0, 1);
    CHECK(det4(e0, e1, e2, e3) == 1);
    CHECK(det4(e1, e0, e2, e3) == -1); // odd permutation
    CHECK(det4(e0, e1, e2, e2) == 0);  // repeated row
    // Upper triangular: determinant is the diagonal product.
    CHECK(det4(vec(2, 5, -3, 7), vec(0, 3, 1, -2), vec(0, 0, -4, 9), vec(0, 0, 0, 6)) ==
          2 * 3 * (-4) * 6);
    // Row operations leave the determinant alone.
    IntVec s = vec(1, 1, 1, 1);
    CHECK(det4(e0, e1, e2, s) == det4(e0, e1, e2, e3));
}

TEST_CASE("cross4 is the determinant functional and matches the Gram determinant") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<long> d(-9, 9);
    for (int trial = 0; trial < 40; ++trial) {
        IntVec v1 = vec(d(rng), d(rng), d(rng), d(rng));
        IntVec v2 = vec(d(rng), d(rng), d(rng), d(rng));
        IntVec v3 = vec(d(rng), d(rng), d(rng), d(rng));
        IntVec x = vec(d(rng), d(rng), d(rng), d(rng));
        std::array<mpz_class, 4> n = cross4(v1, v2, v3);
        mpz_class dot = 0;
        for (int i = 0; i < 4; ++i) dot += n[i] * x.coord(i);
        CHECK(dot == det4(v1, v2, v3, x));
        // |cross|^2 equals the Gram determinant of the triple.
        mpz_class nn = 0;
        for (int i = 0; i < 4; ++i) nn += n[i] * n[i];
        CHECK(nn == gram_det_sq({v1, v2, v3}));
    }
}

TEST_CASE("rank handles every rank and rejects empty input") {
    IntVec e0 = vec(1, 0, 0, 0), e1 = vec(0, 1, 0, 0);
    CHECK(rank({vec(0, 0, 0, 0)}) == 0);
    CHECK(rank({e0}) == 1);
    CHECK(rank({e0, vec(3, 0, 0, 0)}) == 1);
    CHECK(rank({e0, e1, vec(2, 5, 0, 0)}) == 2);
    CHECK(rank({e0, e1, vec(0, 0, 1, 1)}) == 3);
    CHECK(rank({e0, e1, vec(0, 0, 1, 1), vec(0, 0, 1, -1)}) == 4);
    CHECK_THROWS_AS((void)rank({}), std::domain_error);
}

TEST_CASE("primitivity of singles, pairs and triples") {
    CHECK(is_primitive({vec(2, 3, 0, 0)}));
    CHECK_FALSE(is_primitive({vec(2, 4, 6, 0)}));
    // Pair: gcd of the six 2x2 minors.
    CHECK(is_primitive({vec(1, 0, 0, 0), vec(0, 1, 0, 0)}));
    CHECK_FALSE(is_primitive({vec(2, 0, 0, 0), vec(0, 2, 0, 0)}));
    // (1,0,1,0) and (0,1,0,1) extend to a basis; doubling one coordinate pair breaks it.
    CHECK(is_primitive({vec(1, 0, 1, 0), vec(0, 1, 0, 1)}));
    CHECK(is_primitive({vec(1, 0, 0, 0), vec(0, 1, 0, 0), vec(0, 0, 1, 0)}));
    CHECK_FALSE(is_primitive({vec(2, 0, 0, 0), vec(0, 1, 0, 0), vec(0, 0, 1, 0)}));
    CHECK_THROWS_AS((void)is_primitive({vec(1, 2, 3, 4), vec(2, 4, 6, 8)}),
                    std::domain_error);
}

TEST_CASE("saturate recovers the integer points of the rational span") {
    // span_Q{2 e0} meets Z^4 in Z e0.
    SublatticeBasis b = saturate({vec(2, 0, 0, 0)});
    REQUIRE(b.rank == 1);
    REQUIRE(b.vectors.size() == 1);
    CHECK(b.saturated);
    // Must be +-e0: unit first coordinate, zeros elsewhere.
    CHECK((b.vectors[0].coord(0) == 1 || b.vectors[0].coord(0) == -1));
    for (int i = 1; i < 4; ++i) CHECK(b.vectors[0].coord(i) == 0);

    // Index-2 sublattice of a plane: {(1,1,0,0), (1,-1,0,0)} saturates to
    // the full plane {x3 = x4 = 0}.
    SublatticeBasis p = saturate({vec(1, 1, 0, 0), vec(1, -1, 0, 0)});
    REQUIRE(p.rank == 2);
    CHECK(gram_det_sq(p.vectors) == 1);
    // e0 lies in the saturation: solvable integer combination exists, which
    // for a determinant-1 Gram basis of the plane means the basis is
    // {e0, e1} up to unimodular change.
    CHECK(height_sq(p) == 1);

    CHECK_THROWS_AS((void)saturate({vec(1, 2, 3, 4), vec(2, 4, 6, 8)}),
                    std::domain_error);
}

TEST_CASE("height of simple subspaces") {
    SublatticeBasis line = saturate({vec(1, 1, 0, 0)});
    CHECK(height_sq(line) == 2);
    SublatticeBasis plane = saturate({vec(1, 0, 0, 0), vec(0, 1, 1, 1)});
    CHECK(height_sq(plane) == 3);
    SublatticeBasis full = saturate({vec(1, 0, 0, 0), vec(0, 1, 0, 0), vec(0, 0, 1, 0),
                                     vec(0, 0, 0, 1)});
    CHECK(height_sq(full) == 1);
    SublatticeBasis unsat;
    unsat.vectors = {vec(2, 0, 0, 0)};
    unsat.rank = 1;
    unsat.saturated = false;
    CHECK_THROWS_AS((void)height_sq(unsat), std::domain_error);
}

TEST_CASE("complete_to_basis closes primitive triples with determinant one") {
    std::mt19937_64 rng(987654321);
    for (int trial = 0; trial < 25; ++trial) {
        std::array<IntVec, 4> rows = random_unimodular(rng);
        // Any three rows of a unimodular matrix form a primitive triple.
        IntVec w = complete_to_basis(rows[0], rows[1], rows[2]);
        CHECK(det4(rows[0], rows[1], rows[2], w) == 1);
    }
    CHECK_THROWS_AS(
        (void)complete_to_basis(vec(2, 0, 0, 0), vec(0, 1, 0, 0), vec(0, 0, 1, 0)),
        std::domain_error);
}

TEST_CASE("complete_to_primitive lands near the requested targets") {
    VecList fixed = {vec(1, 0, 0, 0)};
    std::vector<std::array<mpq_class, 4>> targets(1);
    targets[0] = {mpq_class(0), mpq_class(1000000), mpq_class(300000), mpq_class(700000)};
    std::vector<IntVec> got = complete_to_primitive(fixed, targets);
    REQUIRE(got.size() == 1);
    CHECK(is_primitive({fixed[0], got[0]}));
    mpz_class dev = 0;
    std::array<long, 4> t = {0, 1000000, 300000, 700000};
    for (int i = 0; i < 4; ++i) {
        mpz_class d = got[0].coord(i) - t[i];
        dev += d * d;
    }
    CHECK(dev <= 64); // a few units per coordinate
}

TEST_CASE("solvers return exact rational solutions and reject bad systems") {
    std::mt19937_64 rng(13371337);
    std::uniform_int_distribution<long> d(-6, 6);
    int solved3 = 0, solved4 = 0;
    for (int trial = 0; trial < 60; ++trial) {
        std::array<std::array<mpz_class, 3>, 4> m3{};
        std::array<mpz_class, 3> x3{};
        for (auto& r : m3)
            for (auto& e : r) e = d(rng);
        for (auto& e : x3) e = d(rng);
        std::array<mpz_class, 4> b3{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 3; ++c) b3[r] += m3[r][c] * x3[c];
        auto got = solve_4x3(m3, b3);
        if (got) {
            ++solved3;
            for (int c = 0; c < 3; ++c) CHECK((*got)[c] == mpq_class(x3[c]));
        }

        std::array<std::array<mpz_class, 4>, 4> m4{};
        std::array<mpz_class, 4> x4{};
        for (auto& r : m4)
            for (auto& e : r) e = d(rng);
        for (auto& e : x4) e = d(rng);
        std::array<mpz_class, 4> b4{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) b4[r] += m4[r][c] * x4[c];
        auto got4 = solve_4x4(m4, b4);
        if (got4) {
            ++solved4;
            for (int c = 0; c < 4; ++c) CHECK((*got4)[c] == mpq_class(x4[c]));
        }
    }
    CHECK(solved3 > 40); // random small matrices are almost always full rank
    CHECK(solved4 > 40);

    // Rank-deficient system.
    std::array<std::array<mpz_class, 3>, 4> flat{};
    for (auto& r : flat) r = {mpz_class(1), mpz_class(2), mpz_class(3)};
    CHECK_FALSE(solve_4x3(flat, {mpz_class(1), mpz_class(1), mpz_class(1), mpz_class(1)}));

    // Fractional solution: 2x = 1.
    std::array<std::array<mpz_class, 3>, 4> m{};
    m[0][0] = 2;
    m[1][1] = 1;
    m[2][2] = 1;
    auto frac = solve_4x3(m, {mpz_class(1), mpz_class(0), mpz_class(0), mpz_class(0)});
    REQUIRE(frac.has_value());
    CHECK((*frac)[0] == mpq_class(1, 2));

    // Inconsistent overdetermined system: rank 3, impossible last row.
    std::array<std::array<mpz_class, 3>, 4> mi{};
    mi[0][0] = 1;
    mi[1][1] = 1;
    mi[2][2] = 1;
    mi[3][0] = 1;
    CHECK_FALSE(solve_4x3(mi, {mpz_class(1), mpz_class(1), mpz_class(1), mpz_class(5)}));
}

TEST_CASE("hnf_cols returns a unimodular transform reproducing the input") {
    std::mt19937_64 rng(5150);
    std::uniform_int_distribution<long> d(-8, 8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<mpz_class>> m(3, std::vector<mpz_class>(4));
        auto orig = m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) {
                m[i][j] = d(rng);
                orig[i][j] = m[i][j];
            }
        std::vector<std::vector<mpz_class>> u;
        hnf_cols(m, u);
        REQUIRE(u.size() == 4);
        // orig * U == H (column-style HNF).
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) {
                mpz_class s = 0;
                for (int t = 0; t < 4; ++t) s += orig[i][t] * u[t][j];
                CHECK(s == m[i][j]);
            }
        // U unimodular: reuse det4 through IntVec rows.
        std::array<IntVec, 4> rows;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) rows[i].coord(j) = u[i][j];
        mpz_class du = det4(rows[0], rows[1], rows[2], rows[3]);
        CHECK((du == 1 || du == -1));
    }
}

TEST_CASE("int_kernel spans exactly the annihilated directions") {
    std::vector<std::vector<mpz_class>> m = {{1, 1, 1, 1}};
    auto ker = int_kernel(m);
    REQUIRE(ker.size() == 3);
    for (const auto& v : ker) {
        mpz_class s = 0;
        for (int i = 0; i < 4; ++i) s += v[i];
        CHECK(s == 0);
    }
    // Kernel of the kernel brings back the saturation of the row space.
    auto back = int_kernel(ker);
    REQUIRE(back.size() == 1);
    // (1,1,1,1) direction, primitive.
    mpz_class g = gcd(gcd(back[0][0], back[0][1]), gcd(back[0][2], back[0][3]));
    CHECK(g == 1);
    CHECK(back[0][0] == back[0][1]);
    CHECK(back[0][1] == back[0][2]);
    CHECK(back[0][2] == back[0][3]);

    // Injective map has trivial kernel.
    std::vector<std::vector<mpz_class>> id4 = {
        {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    CHECK(int_kernel(id4).empty());
}
