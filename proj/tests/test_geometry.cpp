#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dioph/geometry.hpp"
#include "dioph/linalg.hpp"

#include <array>

using namespace dioph;

namespace {

QPoint qp(long x, long y, long z, long den = 1) {
    QPoint p;
    p.num = {mpz_class(x), mpz_class(y), mpz_class(z)};
    p.den = den;
    return p;
}

std::array<mpz_class, 3> dir(long x, long y, long z) {
    return {mpz_class(x), mpz_class(y), mpz_class(z)};
}

} // namespace

TEST_CASE("chart points and exact differences") {
    IntVec z(mpz_class(4), mpz_class(2), mpz_class(-6), mpz_class(1));
    QPoint p = point_of(z);
    CHECK(p.den == 4);
    CHECK(p.num[0] == 2);
    CHECK(p.num[2] == 1);
    IntVec bad(mpz_class(0), mpz_class(1), mpz_class(0), mpz_class(0));
    CHECK_THROWS_AS((void)point_of(bad), std::domain_error);

    // Mixed denominators go to one positive common denominator.
    QPoint m = qpoint_from_mpq({mpq_class(1, 2), mpq_class(-2, 3), mpq_class(5)});
    CHECK(m.den > 0);
    auto coord = [&](int i) {
        mpq_class c(m.num[i], m.den);
        c.canonicalize();
        return c;
    };
    CHECK(coord(0) == mpq_class(1, 2));
    CHECK(coord(1) == mpq_class(-2, 3));
    CHECK(coord(2) == mpq_class(5));

    // diff_num points from the second argument toward the first, scaled by a
    // positive factor.
    QPoint a = qp(3, 0, 0, 2); // (3/2, 0, 0)
    QPoint b = qp(1, 1, 0, 1); // (1, 1, 0)
    std::array<mpz_class, 3> d = diff_num(a, b);
    CHECK(d[0] > 0);  // a is to the right of b
    CHECK(d[1] < 0);  // and below it
    CHECK(d[2] == 0);
    // Exact value: (1/2, -1, 0) times the positive scale 2.
    CHECK(d[0] == 1);
    CHECK(d[1] == -2);
}

TEST_CASE("distances compare exactly on the boundary") {
    QPoint o = qp(0, 0, 0);
    QPoint p = qp(3, 4, 0);
    CHECK(dist_sq(o, p) == 25);
    CHECK(cmp_dist(o, p, mpq_class(5)) == 0);
    CHECK(cmp_dist(o, p, mpq_class(49, 10)) > 0);
    CHECK(cmp_dist(o, p, mpq_class(51, 10)) < 0);
    // Non-integer exact case: |(1/3,1/3,1/3)| = 1/sqrt(3), compare squared.
    QPoint t = qp(1, 1, 1, 3);
    CHECK(dist_sq(o, t) == mpq_class(1, 3));
}

TEST_CASE("closed ball predicates at exact touch") {
    QPoint o = qp(0, 0, 0);
    CHECK(point_in_ball(qp(3, 4, 0), o, mpq_class(5)));        // on the sphere
    CHECK_FALSE(point_in_ball(qp(3, 4, 1), o, mpq_class(5)));

    // Inner ball touching the outer boundary from inside still counts.
    CHECK(ball_in_ball(qp(3, 0, 0), mpq_class(2), o, mpq_class(5)));
    CHECK_FALSE(ball_in_ball(qp(3, 0, 0), mpq_class(21, 10), o, mpq_class(5)));
    // Equal balls contain each other.
    CHECK(ball_in_ball(o, mpq_class(5), o, mpq_class(5)));

    // Tangent closed balls share a point, so they are not disjoint.
    CHECK_FALSE(balls_disjoint(o, mpq_class(2), qp(5, 0, 0), mpq_class(3)));
    CHECK(balls_disjoint(o, mpq_class(2), qp(5, 0, 0), mpq_class(29, 10)));
    CHECK_FALSE(balls_disjoint(o, mpq_class(4), qp(1, 0, 0), mpq_class(1)));
}

TEST_CASE("open angle windows, boundaries excluded") {
    // Right angle sits inside both windows' interiors where applicable.
    CHECK(angle_in_quarter_three_quarters(dir(1, 0, 0), dir(0, 1, 0)));
    CHECK_FALSE(angle_in_quarter_half(dir(1, 0, 0), dir(0, 1, 0))); // pi/2 boundary

    // Exactly pi/4 is outside both.
    CHECK_FALSE(angle_in_quarter_three_quarters(dir(1, 0, 0), dir(1, 1, 0)));
    CHECK_FALSE(angle_in_quarter_half(dir(1, 0, 0), dir(1, 1, 0)));
    // Exactly 3pi/4 is outside.
    CHECK_FALSE(angle_in_quarter_three_quarters(dir(1, 0, 0), dir(-1, 1, 0)));

    // atan(2) ~ 63.4 degrees lies in both open windows.
    CHECK(angle_in_quarter_three_quarters(dir(1, 0, 0), dir(1, 2, 0)));
    CHECK(angle_in_quarter_half(dir(1, 0, 0), dir(1, 2, 0)));
    // ~116.6 degrees: inside the wide window only.
    CHECK(angle_in_quarter_three_quarters(dir(1, 0, 0), dir(-1, 2, 0)));
    CHECK_FALSE(angle_in_quarter_half(dir(1, 0, 0), dir(-1, 2, 0)));

    // Parallel, antiparallel and zero directions are outside.
    CHECK_FALSE(angle_in_quarter_three_quarters(dir(2, 1, 0), dir(4, 2, 0)));
    CHECK_FALSE(angle_in_quarter_three_quarters(dir(2, 1, 0), dir(-2, -1, 0)));
    CHECK_FALSE(angle_in_quarter_three_quarters(dir(0, 0, 0), dir(1, 0, 0)));
    CHECK_FALSE(angle_in_quarter_half(dir(1, 1, 1), dir(0, 0, 0)));

    // Scale invariance.
    CHECK(angle_in_quarter_half(dir(300, 0, 0), dir(500, 1000, 0)));
}

TEST_CASE("cone predicates over whole balls") {
    std::array<mpz_class, 3> axis = dir(1, 0, 0);

    // Narrow ball around the axis: every point is within ~14.5 degrees, so
    // all angles are < pi/2 but not all are > pi/4.
    CHECK(ball_all_angle_lt_half(axis, dir(4, 0, 0), mpz_class(1), mpq_class(1)));
    CHECK_FALSE(ball_all_angle_gt_quarter(axis, dir(4, 0, 0), mpz_class(1), mpq_class(1)));

    // Ball centered at 45 degrees straddles the quarter boundary.
    CHECK_FALSE(ball_all_angle_gt_quarter(axis, dir(4, 4, 0), mpz_class(1), mpq_class(1)));

    // Ball around atan(2): comfortably inside (pi/4, pi/2) in whole.
    CHECK(ball_all_angle_lt_half(axis, dir(10, 20, 0), mpz_class(1), mpq_class(2)));
    CHECK(ball_all_angle_gt_quarter(axis, dir(10, 20, 0), mpz_class(1), mpq_class(2)));

    // Ball centered on the pi/2 plane fails the half test.
    CHECK_FALSE(ball_all_angle_lt_half(axis, dir(0, 4, 0), mpz_class(1), mpq_class(1)));

    // Touching the apex fails both, radius equal to the center distance.
    CHECK_FALSE(ball_all_angle_lt_half(axis, dir(2, 0, 0), mpz_class(1), mpq_class(2)));
    CHECK_FALSE(ball_all_angle_gt_quarter(axis, dir(2, 2, 0), mpz_class(1),
                                          mpq_class(3))); // contains the apex

    // Rational center denominators work the same.
    CHECK(ball_all_angle_lt_half(axis, dir(10, 20, 0), mpz_class(10), mpq_class(1, 5)));
}

TEST_CASE("cone shell combines both windows around a shifted apex") {
    QPoint apex = qp(7, -3, 2);
    std::array<mpz_class, 3> axis = dir(1, 0, 0);
    auto shifted = [&](long x, long y, long z, long den) {
        QPoint c;
        c.num = {mpz_class(7 * den + x), mpz_class(-3 * den + y), mpz_class(2 * den + z)};
        c.den = den;
        return c;
    };
    // Center at relative (1, 2, 0), radius 1/5: inside the shell.
    CHECK(ball_in_cone_shell(apex, axis, shifted(1, 2, 0, 1), mpq_class(1, 5)));
    // On the axis: lt-half holds, gt-quarter does not.
    CHECK_FALSE(ball_in_cone_shell(apex, axis, shifted(4, 0, 0, 1), mpq_class(1)));
    // Beyond pi/2: fails.
    CHECK_FALSE(ball_in_cone_shell(apex, axis, shifted(-1, 2, 0, 1), mpq_class(1, 5)));
    // Fractional coordinates relative to the apex.
    CHECK(ball_in_cone_shell(apex, axis, shifted(1, 2, 0, 2), mpq_class(1, 10)));
}
