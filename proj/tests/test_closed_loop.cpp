#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "reglab/closed_loop.hpp"
#include "reglab/pde_models.hpp"
#include "support.hpp"

using namespace reglab;
using testsupport::random_complex;
using testsupport::random_hermitian_psd;
using testsupport::random_passive_system;
using testsupport::random_skew;

TEST_CASE("assemble with zero feedthroughs has the textbook block form") {
    std::mt19937_64 rng(3);
    const Index n = 4, p = 1;
    const Mat a = random_skew(n, rng) - random_hermitian_psd(n, rng);
    const Mat b = random_complex(n, p, rng);
    StateSpaceSystem plant(a, b, b.adjoint(), Mat::Zero(p, p));
    const auto ctrl = build_fin_dim({1.0, -1.0}, std::vector<double>{2.0, 2.0}, 1, 1e-9, 0.0);
    // D = 0 and (numerically) zero D_c give Q1 = Q2 = I.
    auto ctrl0 = ctrl;
    ctrl0.Dc1 = Mat::Zero(p, p);
    const auto cl = assemble(plant, ctrl0);

    REQUIRE((cl.Q1 - Mat::Identity(p, p)).norm() < 1e-14);
    REQUIRE((cl.Ae.topLeftCorner(n, n) - a).norm() < 1e-14);
    REQUIRE((cl.Ae.topRightCorner(n, ctrl.nc()) - b * ctrl0.Cc).norm() < 1e-14);
    REQUIRE((cl.Ae.bottomLeftCorner(ctrl.nc(), n) + ctrl0.Bc * b.adjoint()).norm() < 1e-14);
    REQUIRE((cl.Ae.bottomRightCorner(ctrl.nc(), ctrl.nc()) - ctrl0.Ac).norm() < 1e-14);
    REQUIRE((cl.Ce.leftCols(n) + b.adjoint()).norm() < 1e-14);
    REQUIRE(cl.Ce.rightCols(ctrl.nc()).norm() < 1e-14);
    REQUIRE((cl.De.rightCols(p) - Mat::Identity(p, p)).norm() < 1e-14);
}

TEST_CASE("decoupled assembly splits the spectrum") {
    std::mt19937_64 rng(17);
    const Index n = 5;
    Mat a = random_skew(n, rng) - random_hermitian_psd(n, rng);
    StateSpaceSystem plant(a, Mat::Zero(n, 1), Mat::Zero(1, n), Mat::Zero(1, 1));
    const auto ctrl = build_fin_dim({2.0, 5.0}, std::vector<double>{1.0, 1.0}, 1, 1.0, 0.0);
    const auto cl = assemble(plant, ctrl);

    std::vector<Complex> expected;
    const Vec ea = spectrum(a);
    for (Index i = 0; i < ea.size(); ++i) expected.push_back(ea(i));
    expected.push_back(Complex(0, 2));
    expected.push_back(Complex(0, 5));
    const Vec ee = spectrum(cl.Ae);
    REQUIRE(ee.size() == static_cast<Index>(expected.size()));
    for (const Complex& want : expected) {
        double best = 1e300;
        for (Index i = 0; i < ee.size(); ++i) best = std::min(best, std::abs(ee(i) - want));
        REQUIRE(best < 1e-8);
    }
}

TEST_CASE("the 6.2 closed loop is 52x52 and real") {
    const auto plant = build_wave_distributed(24);
    const auto ctrl = build_fin_dim_real({M_PI, 2 * M_PI}, std::vector<double>{3.0, 3.0}, 1, 34.0,
                                         1.0);
    const auto cl = assemble(plant, ctrl);
    REQUIRE(cl.ne() == 52);
    REQUIRE(cl.Ae.imag().cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(check_contraction(cl) <= 1e-10);
}

TEST_CASE("check_contraction on skew and violated instances") {
    std::mt19937_64 rng(23);
    const Index n = 6;
    const Mat skew = random_skew(n, rng);
    StateSpaceSystem plant(skew, Mat::Zero(n, 1), Mat::Zero(1, n), Mat::Zero(1, 1));
    // Zero B and C decouple the loop, so the plant block of A_e stays skew.
    const auto ctrl = build_fin_dim({1.0}, std::vector<double>{1.0}, 1, 1.0, 0.0);
    auto cl = assemble(plant, ctrl);
    REQUIRE(std::abs(check_contraction(cl)) < 1e-12);

    // Flipping the damping sign breaks passivity and the detector sees it.
    const Mat damping = random_hermitian_psd(n, rng);
    StateSpaceSystem bad(skew + damping, Mat::Zero(n, 1), Mat::Zero(1, n), Mat::Zero(1, 1));
    cl = assemble(bad, ctrl);
    REQUIRE(check_contraction(cl) > 1e-6);
}

TEST_CASE("contraction holds for random passive plant-controller pairs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const Index p = (trial % 2) ? 1 : 2;
        const auto plant = random_passive_system(6, p, rng);
        ControllerRealization ctrl;
        switch (trial % 4) {
            case 0:
                ctrl = build_fin_dim({0.7, 2.3}, std::vector<Mat>(2, Mat::Identity(p, p)), p,
                                     0.4 * Mat::Identity(p, p), 0.2 * Mat::Identity(p, p));
                break;
            case 1:
                ctrl = build_fin_dim_real({1.5}, std::vector<Mat>(1, 2.0 * Mat::Identity(p, p)), p,
                                          Mat::Identity(p, p), Mat::Zero(p, p));
                break;
            case 2:
                ctrl = build_transport(1.0, p, 9, Mat::Identity(p, p), Mat::Identity(p, p));
                break;
            default:
                ctrl = build_diagonal(3, 2.0, p, 1.5, 0.3, 0.0, 1.0);
                break;
        }
        const auto cl = assemble(plant, ctrl);
        REQUIRE(check_contraction(cl) <= 1e-10);
    }
}

TEST_CASE("schur_complement reductions and dual-path agreement") {
    std::mt19937_64 rng(404);
    const auto plant = random_passive_system(6, 1, rng);

    // B_c = 0 collapses S_A to i w - A_c.
    auto ctrl = build_fin_dim({3.0}, std::vector<double>{1.0}, 1, 0.5, 0.0);
    auto zeroed = ctrl;
    zeroed.Bc.setZero();
    const double w0 = 0.9;
    auto sc = schur_complement(plant, zeroed, w0);
    Mat expect = -zeroed.Ac;
    expect.diagonal().array() += Complex(0.0, w0);
    REQUIRE((sc.s - expect).norm() < 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
        const auto rnd_plant = random_passive_system(7, 2, rng);
        const auto rnd_ctrl = build_fin_dim({1.1, 4.2}, std::vector<Mat>(2, Mat::Identity(2, 2)),
                                            2, 0.5 * Mat::Identity(2, 2), Mat::Zero(2, 2));
        std::uniform_real_distribution<double> wdist(-6.0, 6.0);
        double w = wdist(rng);
        if (std::abs(w - 1.1) < 0.2 || std::abs(w - 4.2) < 0.2) w += 0.5;
        const auto out = schur_complement(rnd_plant, rnd_ctrl, w);
        REQUIRE(out.inverse_woodbury.has_value());
        REQUIRE((out.inverse_direct - *out.inverse_woodbury).norm() /
                    out.inverse_direct.norm() <
                1e-9);
    }
}

TEST_CASE("schur_complement at a controller eigenfrequency keeps the direct path") {
    std::mt19937_64 rng(111);
    const auto plant = random_passive_system(6, 1, rng, /*with_feedthrough=*/true);
    const double wk = 1.3;
    const Mat p_at_wk = transfer(plant, Complex(0.0, wk));
    REQUIRE(min_hermitian_eig(p_at_wk) > 0.0);  // re P(i w_k) > 0 for this seed
    const auto ctrl = build_fin_dim({wk}, std::vector<double>{1.0}, 1, 0.5, 0.0);
    const auto out = schur_complement(plant, ctrl, wk);
    REQUIRE_FALSE(out.inverse_woodbury.has_value());
    REQUIRE((out.s * out.inverse_direct - Mat::Identity(1, 1)).norm() < 1e-9);
}

TEST_CASE("resolvent_norm basics") {
    // Decoupled stable diag(-1, -2): ||R(0, A_e)|| = 1.
    StateSpaceSystem plant((Mat(2, 2) << Complex(-1, 0), 0, 0, Complex(-2, 0)).finished(),
                           Mat::Zero(2, 1), Mat::Zero(1, 2), Mat::Zero(1, 1));
    const auto ctrl = build_fin_dim({5.0}, std::vector<double>{1.0}, 1, 1.0, 0.0);
    const auto cl = assemble(plant, ctrl);
    const auto rv = resolvent_norm(cl, 0.0);
    REQUIRE_FALSE(rv.spectrum_hit);
    REQUIRE(rv.norm == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE(rv.norm * rv.sigma_min == Catch::Approx(1.0));

    // i w in sigma(A_e): the decoupled controller mode at w = 5 stays on the axis.
    const auto hit = resolvent_norm(cl, 5.0);
    REQUIRE(hit.spectrum_hit);
    REQUIRE(std::isinf(hit.norm));
}

TEST_CASE("full resolvent matches the two-by-two block formula") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 5; ++trial) {
        const Index n = 5, p = 1;
        const auto plant = random_passive_system(n, p, rng);
        const auto ctrl = build_fin_dim({1.0, 2.5}, std::vector<double>{1.0, 0.7}, 1, 0.4, 0.3);
        const auto cl = assemble(plant, ctrl);
        const double w = 0.7;
        const Complex iw(0.0, w);

        Mat shifted = -cl.Ae;
        shifted.diagonal().array() += iw;
        const Mat direct = solve_linear(shifted, Mat::Identity(cl.ne(), cl.ne()));

        const auto fed = output_feedback(plant, ctrl.Dc());
        Mat rs = -fed.A;
        rs.diagonal().array() += iw;
        const Mat r = solve_linear(rs, Mat::Identity(n, n));
        const auto sc = schur_complement(plant, ctrl, w);
        const Mat& sinv = sc.inverse_direct;
        const Index nc = ctrl.nc();

        Mat block(n + nc, n + nc);
        block.topLeftCorner(n, n) = r - r * fed.B * ctrl.Cc * sinv * ctrl.Bc * fed.C * r;
        block.topRightCorner(n, nc) = r * fed.B * ctrl.Cc * sinv;
        block.bottomLeftCorner(nc, n) = -sinv * ctrl.Bc * fed.C * r;
        block.bottomRightCorner(nc, nc) = sinv;
        REQUIRE((direct - block).norm() / direct.norm() < 1e-8);
    }
}
