#include "dioph/geometry.hpp"

#include <stdexcept>

namespace dioph {

namespace {

mpz_class dot3(const std::array<mpz_class, 3>& u, const std::array<mpz_class, 3>& v) {
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

// numerator of |p-q|^2 over den (p.den*q.den)^2
void dist_sq_parts(const QPoint& p, const QPoint& q, mpz_class& num, mpz_class& den) {
    mpz_class n = 0;
    for (int i = 0; i < 3; ++i) {
        mpz_class d = p.num[i] * q.den - q.num[i] * p.den;
        n += d * d;
    }
    num = std::move(n);
    den = p.den * q.den;
    den *= den;
}

// sign of N/D - (rn/rd)^2 with D > 0, rd != 0
int cmp_sq(const mpz_class& N, const mpz_class& D, const mpq_class& r) {
    mpz_class lhs = N * r.get_den() * r.get_den();
    mpz_class rhs = r.get_num() * r.get_num() * D;
    return cmp(lhs, rhs);
}

} // namespace

QPoint point_of(const IntVec& z) {
    if (z.q <= 0) throw std::domain_error("point_of: q must be positive");
    QPoint p;
    p.num = z.a;
    p.den = z.q;
    return p;
}

QPoint qpoint_from_mpq(const std::array<mpq_class, 3>& x) {
    mpz_class den = 1;
    for (int i = 0; i < 3; ++i) den = lcm(den, x[i].get_den());
    QPoint p;
    p.den = den;
    for (int i = 0; i < 3; ++i) p.num[i] = x[i].get_num() * (den / x[i].get_den());
    return p;
}

std::array<mpz_class, 3> diff_num(const QPoint& p, const QPoint& q) {
    std::array<mpz_class, 3> d;
    for (int i = 0; i < 3; ++i) d[i] = p.num[i] * q.den - q.num[i] * p.den;
    return d;
}

mpq_class dist_sq(const QPoint& p, const QPoint& q) {
    mpz_class n, d;
    dist_sq_parts(p, q, n, d);
    mpq_class out(n, d);
    out.canonicalize();
    return out;
}

int cmp_dist(const QPoint& p, const QPoint& q, const mpq_class& r) {
    if (r < 0) throw std::domain_error("cmp_dist: negative radius");
    mpz_class n, d;
    dist_sq_parts(p, q, n, d);
    return cmp_sq(n, d, r);
}

bool point_in_ball(const QPoint& p, const QPoint& center, const mpq_class& r) {
    if (r < 0) return false;
    return cmp_dist(p, center, r) <= 0;
}

bool ball_in_ball(const QPoint& c1, const mpq_class& r1, const QPoint& c2, const mpq_class& r2) {
    mpq_class t = r2 - r1;
    if (t < 0) return false;
    mpz_class n, d;
    dist_sq_parts(c1, c2, n, d);
    return cmp_sq(n, d, t) <= 0;
}

bool balls_disjoint(const QPoint& c1, const mpq_class& r1, const QPoint& c2, const mpq_class& r2) {
    mpq_class s = r1 + r2;
    mpz_class n, d;
    dist_sq_parts(c1, c2, n, d);
    return cmp_sq(n, d, s) > 0;
}

bool angle_in_quarter_three_quarters(const std::array<mpz_class, 3>& u,
                                     const std::array<mpz_class, 3>& v) {
    mpz_class uu = dot3(u, u), vv = dot3(v, v);
    if (uu == 0 || vv == 0) return false;
    mpz_class uv = dot3(u, v);
    return 2 * uv * uv < uu * vv;
}

bool angle_in_quarter_half(const std::array<mpz_class, 3>& u, const std::array<mpz_class, 3>& v) {
    mpz_class uu = dot3(u, u), vv = dot3(v, v);
    if (uu == 0 || vv == 0) return false;
    mpz_class uv = dot3(u, v);
    return uv > 0 && 2 * uv * uv < uu * vv;
}

bool ball_all_angle_lt_half(const std::array<mpz_class, 3>& d,
                            const std::array<mpz_class, 3>& c_num, const mpz_class& c_den,
                            const mpq_class& r) {
    // min over the ball of cos(angle) > 0, i.e. d.c/|c| scale > r|d|:
    // a/c_den > |d| rn/rd with a = d.c_num. All quantities exact.
    mpz_class a = dot3(d, c_num);
    if (a <= 0) return false;
    mpz_class dd = dot3(d, d);
    if (dd == 0) return false;
    mpz_class Rn = r.get_num() * c_den; // radius in c_num scale: Rn/Rd
    const mpz_class& Rd = r.get_den();
    return a * a * Rd * Rd > Rn * Rn * dd;
}

bool ball_all_angle_gt_quarter(const std::array<mpz_class, 3>& d,
                               const std::array<mpz_class, 3>& c_num, const mpz_class& c_den,
                               const mpq_class& r) {
    // The ball must avoid the closed cone K = {y : angle(y, d) <= pi/4}
    // (0 in K). With a = d.c, P = |d|^2|c|^2 - a^2 and phi = angle(c, d):
    //   phi <= pi/4   -> center inside K, fail;
    //   phi >= 3pi/4  -> nearest point of K is the apex, need |c| > r;
    //   else          -> need |c| sin(phi - pi/4) > r, which rearranges to
    //                    sqrt(P) > a + sqrt(2) r |d| and is settled below by
    //                    careful squaring (both sides can be irrational).
    mpz_class dd = dot3(d, d);
    if (dd == 0) return false;
    mpz_class a = dot3(d, c_num);
    mpz_class cc = dot3(c_num, c_num);
    mpz_class P = dd * cc - a * a;
    if (a >= 0 && a * a >= P) return false; // phi <= pi/4 (covers c = 0)
    mpz_class Rn = r.get_num() * c_den;     // radius in c_num scale: Rn/Rd
    const mpz_class& Rd = r.get_den();
    if (a <= 0 && a * a >= P) {
        // phi >= 3pi/4: |c| > r
        return cc * Rd * Rd > Rn * Rn;
    }
    // Here P > a^2 >= 0. Condition: Rd sqrt(P) - Rd a > sqrt(2) Rn sqrt(dd),
    // LHS > 0. Squaring once leaves one radical:
    //   L > W sqrt(P), with L = Rd^2 (P + a^2) - 2 Rn^2 dd and W = 2 a Rd^2.
    mpz_class Rd2 = Rd * Rd;
    mpz_class L = Rd2 * (P + a * a) - 2 * Rn * Rn * dd;
    mpz_class W = 2 * a * Rd2;
    if (W == 0) return L > 0;
    if (W < 0) {
        if (L >= 0) return true;
        return L * L < W * W * P; // both negative: compare magnitudes
    }
    return L > 0 && L * L > W * W * P;
}

bool ball_in_cone_shell(const QPoint& apex, const std::array<mpz_class, 3>& d,
                        const QPoint& center, const mpq_class& r) {
    auto c = diff_num(center, apex);
    mpz_class c_den = center.den * apex.den;
    return ball_all_angle_lt_half(d, c, c_den, r) && ball_all_angle_gt_quarter(d, c, c_den, r);
}

} // namespace dioph
