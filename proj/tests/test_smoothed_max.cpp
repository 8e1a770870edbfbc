#include <catch_amalgamated.hpp>

#include "occ/smoothed_max.hpp"
#include "occ/verify.hpp"

using namespace occ;

TEST_CASE("polynomial instance values at gamma = 1") {
    const SmoothedMax m(1.0);
    CHECK(m.value(0.25) == Catch::Approx(0.171875).epsilon(1e-14));
    CHECK(m.value(-1.0) == 0.0);
    CHECK(m.value(1.0) == 1.0);
    CHECK(m.deriv(0.5) == 1.0);
    CHECK(m.deriv2(0.5) == 0.0);
    // inside the splice window
    CHECK(m.deriv(0.25) == Catch::Approx(1.4375).epsilon(1e-14));
}

TEST_CASE("splice is C2 at both ends") {
    for (double gamma : {1.0, 10.0, 1e4}) {
        const SmoothedMax m(gamma);
        const double w = 0.5 / gamma;
        CHECK(std::abs(m.value(0.0)) <= 1e-12);
        CHECK(std::abs(m.deriv(0.0)) <= 1e-12);
        CHECK(std::abs(m.deriv2(0.0)) <= 1e-12);
        CHECK(std::abs(m.value(w) - w) <= 1e-12);
        CHECK(std::abs(m.deriv(w) - 1.0) <= 1e-12);
        CHECK(std::abs(m.deriv2(w)) <= 1e-12 * gamma);
    }
}

TEST_CASE("gamma must be positive") {
    CHECK_THROWS_AS(SmoothedMax(0.0), std::invalid_argument);
    CHECK_THROWS_AS(SmoothedMax(-2.0), std::invalid_argument);
}

TEST_CASE("property battery passes for the polynomial family") {
    const auto checks =
        check_smoothed_max(polynomial_smoothed_max_factory(), {1.0, 10.0, 316.0, 1e4});
    for (const auto& c : checks) {
        INFO(c.name << " measured " << c.measured << " threshold " << c.threshold);
        CHECK(c.pass);
    }
}

TEST_CASE("broken plugin fails the upper-bound check") {
    struct Broken : SmoothedMax {
        using SmoothedMax::SmoothedMax;
        double value(double x) const override { return SmoothedMax::value(x) + 0.1; }
    };
    const auto checks = check_smoothed_max(
        [](double gamma) { return std::make_unique<Broken>(gamma); }, {1.0, 10.0});
    bool upper_failed = false;
    for (const auto& c : checks)
        if (c.name == "smoothed_max_upper_bound") upper_failed = !c.pass;
    CHECK(upper_failed);
}

TEST_CASE("penalty signs and exact branch") {
    const SmoothedMax m(100.0);
    // far on the active side: exact branch, r = -gamma (psi - u)
    const auto deep = m.penalty(-0.05, -0.2);  // psi - u = 0.15 >> 1/(2 gamma)
    CHECK(deep.r == Catch::Approx(-100.0 * 0.15));
    CHECK(deep.dr_du == Catch::Approx(100.0));
    // inactive side: no force
    const auto off = m.penalty(-0.05, 0.1);
    CHECK(off.r == 0.0);
    CHECK(off.dr_du == 0.0);
}

TEST_CASE("scaling identity value_gamma(x) = value_1(gamma x) / gamma") {
    const SmoothedMax m1(1.0);
    for (double gamma : {3.0, 50.0, 1e3}) {
        const SmoothedMax mg(gamma);
        for (double t = 0.01; t < 1.0; t += 0.07) {
            const double x = t / gamma;
            CHECK(mg.value(x) == Catch::Approx(m1.value(gamma * x) / gamma).margin(1e-15));
        }
    }
}

TEST_CASE("second derivative bound is tight below 8 gamma") {
    const SmoothedMax m(1.0);
    double sup = 0.0;
    for (int k = 0; k <= 100000; ++k) sup = std::max(sup, std::abs(m.deriv2(k * 0.5e-5)));
    CHECK(sup <= 8.0);
    CHECK(sup >= 7.8);  // measured peak near t = 0.121
}
