#pragma once

// Exact integer linear algebra over Z^4: ranks, determinants, primitivity,
// saturation, Gram determinants (squared covolumes), basis completion.
// Everything here is exact; no floating point.

#include <gmpxx.h>

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dioph {

// z = (q, a1, a2, a3) in Z^4. q is the denominator coordinate.
struct IntVec {
    mpz_class q;
    std::array<mpz_class, 3> a{};

    IntVec() = default;
    IntVec(mpz_class q_, mpz_class a1, mpz_class a2, mpz_class a3)
        : q(std::move(q_)), a{std::move(a1), std::move(a2), std::move(a3)} {}

    const mpz_class& coord(int i) const { return i == 0 ? q : a[i - 1]; }
    mpz_class& coord(int i) { return i == 0 ? q : a[i - 1]; }
    bool operator==(const IntVec& o) const { return q == o.q && a == o.a; }
};

using VecList = std::vector<IntVec>;

struct SublatticeBasis {
    VecList vectors;
    int rank = 0;
    bool saturated = false;
};

struct CompletionFailure : std::runtime_error {
    IntVec best;
    explicit CompletionFailure(std::string msg, IntVec b)
        : std::runtime_error(std::move(msg)), best(std::move(b)) {}
};

// Exact rank over Q of 1..4 vectors. Empty input is a domain error.
int rank(const VecList& vs);

mpz_class det4(const IntVec& v1, const IntVec& v2, const IntVec& v3, const IntVec& v4);

// Integer normal of span{v1,v2,v3}: n with n.x = det4(v1,v2,v3,x) for all x.
// |n|^2 equals the Gram determinant of the triple; gcd of its coordinates is
// 1 exactly when the triple is primitive.
std::array<mpz_class, 4> cross4(const IntVec& v1, const IntVec& v2, const IntVec& v3);

// True iff the gcd of all maximal minors is 1 (tuple extends to a Z^4 basis).
// 1..3 vectors; linearly dependent input is a domain error.
bool is_primitive(const VecList& vs);

// Basis of Z^4 intersect span_Q(vs), HNF-canonicalized.
SublatticeBasis saturate(const VecList& vs);

// Determinant of the Gram matrix (integer for integer inputs).
mpz_class gram_det_sq(const VecList& vs);

// Squared height of the rational subspace spanned by a saturated basis.
mpz_class height_sq(const SublatticeBasis& b);

// Deterministic w with det4(v1,v2,v3,w) = 1; requires a primitive triple.
IntVec complete_to_basis(const IntVec& v1, const IntVec& v2, const IntVec& v3);

// For each rational target point in R^4 (in order), finds a nearby integer
// vector keeping fixed + found-so-far primitive, searching boxes of radius
// 1, 2, 4, ... capped at |target|/10. Throws CompletionFailure on exhaustion.
std::vector<IntVec> complete_to_primitive(VecList fixed,
                                          const std::vector<std::array<mpq_class, 4>>& targets);

// Exact solvers used by the synthesizer stages (Cramer; integer inputs).
// solve_4x3: unique x with M x = b when rank(M) = 3 and the system is
// consistent; nullopt otherwise.
std::optional<std::array<mpq_class, 3>> solve_4x3(
    const std::array<std::array<mpz_class, 3>, 4>& M, const std::array<mpz_class, 4>& b);
std::optional<std::array<mpq_class, 4>> solve_4x4(
    const std::array<std::array<mpz_class, 4>, 4>& M, const std::array<mpz_class, 4>& b);

// Column-style Hermite normal form helpers (shared by saturate and tests).
// M is row-major r x c; on return M holds H with M_in * U = H, U unimodular c x c.
void hnf_cols(std::vector<std::vector<mpz_class>>& M, std::vector<std::vector<mpz_class>>& U);
// Basis (as rows) of the integer kernel {x in Z^c : M x = 0}.
std::vector<std::vector<mpz_class>> int_kernel(const std::vector<std::vector<mpz_class>>& M);

} // namespace dioph
