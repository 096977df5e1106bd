#pragma once

// Exact geometry in R^3 over rational coordinates. Points are kept as integer
// numerators over a shared positive denominator so that every predicate below
// reduces to integer comparisons; nothing here rounds.
//
// Radii are rational (in practice dyadic). Comparisons cross-multiply instead
// of forming canonical rationals, which matters once coordinates reach
// megabit sizes.

#include "dioph/linalg.hpp"

#include <gmpxx.h>

#include <array>

namespace dioph {

struct QPoint {
    std::array<mpz_class, 3> num{};
    mpz_class den{1}; // always > 0
};

// The point a/q represented by an integer vector; requires q > 0.
QPoint point_of(const IntVec& z);

// Common-denominator form of a rational coordinate triple.
QPoint qpoint_from_mpq(const std::array<mpq_class, 3>& x);

// p - q scaled by the positive factor p.den * q.den. Direction-true, so it
// can feed the angle predicates directly.
std::array<mpz_class, 3> diff_num(const QPoint& p, const QPoint& q);

mpq_class dist_sq(const QPoint& p, const QPoint& q);

// Sign of |p - q| - r for r >= 0: negative, zero, or positive.
int cmp_dist(const QPoint& p, const QPoint& q, const mpq_class& r);

// Closed-ball predicates.
bool point_in_ball(const QPoint& p, const QPoint& center, const mpq_class& r);
bool ball_in_ball(const QPoint& c1, const mpq_class& r1, const QPoint& c2, const mpq_class& r2);
bool balls_disjoint(const QPoint& c1, const mpq_class& r1, const QPoint& c2, const mpq_class& r2);

// Angle-window tests for nonzero integer directions; the window is open, so
// hitting a boundary counts as outside, and a zero vector is always outside.
bool angle_in_quarter_three_quarters(const std::array<mpz_class, 3>& u,
                                     const std::array<mpz_class, 3>& v);
bool angle_in_quarter_half(const std::array<mpz_class, 3>& u, const std::array<mpz_class, 3>& v);

// Cone predicates, apex at the chart origin: whether every point y of the
// closed ball (c_num/c_den, r) satisfies angle(y, d) < pi/2, respectively
// angle(y, d) > pi/4. A ball touching the apex fails both (angle undefined).
bool ball_all_angle_lt_half(const std::array<mpz_class, 3>& d,
                            const std::array<mpz_class, 3>& c_num, const mpz_class& c_den,
                            const mpq_class& r);
bool ball_all_angle_gt_quarter(const std::array<mpz_class, 3>& d,
                               const std::array<mpz_class, 3>& c_num, const mpz_class& c_den,
                               const mpq_class& r);

// Both cone conditions at once for a ball, with the apex given as a point.
bool ball_in_cone_shell(const QPoint& apex, const std::array<mpz_class, 3>& d,
                        const QPoint& center, const mpq_class& r);

} // namespace dioph
