#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "reglab/state_space.hpp"
#include "support.hpp"

using namespace reglab;
using testsupport::random_complex;
using testsupport::random_hermitian_psd;
using testsupport::random_passive_system;

namespace {

StateSpaceSystem scalar_system(double a, double b, double c, double d) {
    return StateSpaceSystem(Mat::Constant(1, 1, a), Mat::Constant(1, 1, b),
                            Mat::Constant(1, 1, c), Mat::Constant(1, 1, d), "scalar");
}

}  // namespace

TEST_CASE("constructor rejects p != m") {
    const Mat a = Mat::Identity(2, 2);
    const Mat b = Mat::Ones(2, 2);
    const Mat c = Mat::Ones(1, 2);
    REQUIRE_THROWS_AS(StateSpaceSystem(a, b, c, Mat::Zero(1, 2)), InvalidArgument);
}

TEST_CASE("transfer basics") {
    // B = 0 forces P(lambda) = D.
    StateSpaceSystem no_input(Mat::Identity(3, 3), Mat::Zero(3, 1), Mat::Ones(1, 3),
                              Mat::Constant(1, 1, 2.5));
    REQUIRE(std::abs(transfer(no_input, Complex(0.7, -0.3))(0, 0) - 2.5) < 1e-14);

    // Scalar 1/(lambda + 1).
    const auto sys = scalar_system(-1.0, 1.0, 1.0, 0.0);
    REQUIRE(std::abs(transfer(sys, 0.0)(0, 0) - 1.0) < 1e-14);
    REQUIRE(std::abs(transfer(sys, 1.0)(0, 0) - 0.5) < 1e-14);
    REQUIRE_THROWS_AS(transfer(sys, Complex(-1.0, 0.0)), SpectrumHit);
}

TEST_CASE("disturbance_transfer definitional cases") {
    auto sys = scalar_system(-1.0, 1.0, 1.0, 0.4);
    REQUIRE(disturbance_transfer(sys, 1.0).cols() == 0);

    StateSpaceSystem with_bd(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0),
                             std::optional<Mat>(Mat::Constant(1, 1, 1.0)),
                             Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 0.4), "bd");
    const Complex lambda(0.3, 1.2);
    REQUIRE(std::abs(disturbance_transfer(with_bd, lambda)(0, 0) -
                     (transfer(with_bd, lambda)(0, 0) - 0.4)) < 1e-14);
}

TEST_CASE("check_passive classifies the obvious cases") {
    StateSpaceSystem passive(-Mat::Identity(2, 2), Mat::Ones(2, 1), Mat::Ones(1, 2),
                             Mat::Zero(1, 1));
    REQUIRE(check_passive(passive).is_passive);

    StateSpaceSystem active(Mat::Identity(2, 2), Mat::Zero(2, 1), Mat::Zero(1, 2),
                            Mat::Zero(1, 1));
    REQUIRE_FALSE(check_passive(active).is_passive);
    REQUIRE(check_passive(active).max_eig_dissipation_block > 0.5);
}

TEST_CASE("random passive systems pass check_passive") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sys = random_passive_system(6, 2, rng);
        const auto rep = check_passive(sys);
        REQUIRE(rep.is_passive);
        REQUIRE(rep.re_d_min >= -1e-12);
    }
}

TEST_CASE("output_feedback identity and scalar algebra") {
    const auto sys = scalar_system(-1.0, 1.0, 1.0, 0.0);
    const auto same = output_feedback(sys, Mat::Zero(1, 1));
    REQUIRE((same.A - sys.A).norm() < 1e-14);
    REQUIRE((same.B - sys.B).norm() < 1e-14);

    const auto fb = output_feedback(sys, Mat::Identity(1, 1));
    REQUIRE(std::abs(fb.A(0, 0) - Complex(-2.0, 0.0)) < 1e-14);
    REQUIRE(std::abs(fb.B(0, 0) - Complex(1.0, 0.0)) < 1e-14);
    REQUIRE(std::abs(fb.C(0, 0) - Complex(1.0, 0.0)) < 1e-14);
    REQUIRE(std::abs(fb.D(0, 0)) < 1e-14);
}

TEST_CASE("output_feedback preserves passivity for K >= 0") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const Index m = 2;
        const auto sys = random_passive_system(5, m, rng);
        const Mat k = random_hermitian_psd(m, rng);
        const auto fb = output_feedback(sys, k);
        REQUIRE(check_passive(fb, 1e-9).is_passive);
    }
}

TEST_CASE("output_feedback transfer equals P (I + K P)^{-1}") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const Index m = 2;
        const auto sys = random_passive_system(6, m, rng);
        const Mat k = random_hermitian_psd(m, rng);
        const auto fb = output_feedback(sys, k);
        for (int j = 0; j < 2; ++j) {
            std::uniform_real_distribution<double> re(0.2, 2.0), im(-3.0, 3.0);
            const Complex lambda(re(rng), im(rng));
            const Mat p = transfer(sys, lambda);
            const Mat expected =
                (solve_linear(Mat((Mat::Identity(m, m) + k * p).transpose()), p.transpose()))
                    .transpose();
            const Mat got = transfer(fb, lambda);
            REQUIRE((got - expected).norm() / (1.0 + expected.norm()) < 1e-9);
        }
    }
}

TEST_CASE("resolvent_woodbury reductions and scalar value") {
    // B = 0 reduces to the plain resolvent.
    StateSpaceSystem no_input(-2.0 * Mat::Identity(3, 3), Mat::Zero(3, 1), Mat::Zero(1, 3),
                              Mat::Zero(1, 1));
    const Mat r = resolvent_woodbury(no_input, Mat::Identity(1, 1), Complex(1.0, 0.0));
    REQUIRE((r - Mat::Identity(3, 3) / 3.0).norm() < 1e-12);

    // Scalar A = -1, B = C = 1, Q = 1, lambda = 0: R(0, -2) = 1/2.
    const auto sys = scalar_system(-1.0, 1.0, 1.0, 0.0);
    const Mat w = resolvent_woodbury(sys, Mat::Identity(1, 1), 0.0);
    REQUIRE(std::abs(w(0, 0) - 0.5) < 1e-14);
}

TEST_CASE("resolvent_woodbury matches direct inversion") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 8, m = 2;
        const auto sys = random_passive_system(n, m, rng);
        const Mat q = Mat::Identity(m, m) + 0.4 * random_complex(m, m, rng);
        std::uniform_real_distribution<double> re(0.5, 2.0), im(-2.0, 2.0);
        const Complex lambda(re(rng), im(rng));
        Mat direct = -(sys.A - sys.B * q * sys.C);
        direct.diagonal().array() += lambda;
        const Mat expected = solve_linear(direct, Mat::Identity(n, n));
        const Mat got = resolvent_woodbury(sys, q, lambda);
        REQUIRE((got - expected).norm() / expected.norm() < 1e-10);
    }
}

TEST_CASE("operator lemmas on hand-checked instances") {
    // T = 2I, S = 0, c = 2: ||T^{-1}|| = 0.5 attains 1/c.
    auto rep = verify_operator_lemmas(2.0 * Mat::Identity(3, 3), Mat::Zero(3, 3), 2.0, 0.0);
    REQUIRE(rep.all_hold());
    REQUIRE(rep.applicable_a);
    REQUIRE(rep.applicable_d);

    // T = S = I, c = d = 1: ||T(I+ST)^{-1}|| = 0.5 attains the bound.
    rep = verify_operator_lemmas(Mat::Identity(2, 2), Mat::Identity(2, 2), 1.0, 1.0);
    REQUIRE(rep.all_hold());
    REQUIRE(rep.applicable_b);
    REQUIRE(rep.applicable_c);
}

TEST_CASE("operator lemmas reject violated preconditions") {
    REQUIRE_THROWS_AS(
        verify_operator_lemmas(-Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0, 0.0),
        PreconditionViolated);
}

TEST_CASE("operator lemmas randomized suite with constructed shifts") {
    std::mt19937_64 rng(8053);
    std::uniform_real_distribution<double> shift(0.05, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 4;
        Mat t = random_complex(n, n, rng);
        const double c = shift(rng);
        t += (c - min_hermitian_eig(t)) * Mat::Identity(n, n);
        Mat s;
        double d;
        if (trial % 2 == 0) {
            s = random_hermitian_psd(n, rng);
            d = std::max(0.0, min_hermitian_eig(s));
        } else {
            s = random_complex(n, n, rng);
            d = shift(rng);
            s += (d - min_hermitian_eig(s)) * Mat::Identity(n, n);
        }
        const auto rep = verify_operator_lemmas(t, s, c, d);
        INFO("trial " << trial << " slack " << rep.slack);
        REQUIRE(rep.all_hold());
    }
}

TEST_CASE("check_idp_invertibility") {
    std::vector<Mat> ps = {Mat::Identity(1, 1), Mat::Constant(1, 1, Complex(0.0, 1.0)),
                           Mat::Constant(1, 1, Complex(2.0, -5.0))};
    auto rep = check_idp_invertibility(ps, Mat::Zero(1, 1));
    REQUIRE(rep.all_invertible);
    REQUIRE(rep.sup_inverse_norm == Catch::Approx(1.0));

    rep = check_idp_invertibility({Mat::Constant(1, 1, Complex(0.0, 1.0))}, Mat::Identity(1, 1));
    REQUIRE(rep.all_invertible);
    REQUIRE(rep.sup_inverse_norm == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
}
