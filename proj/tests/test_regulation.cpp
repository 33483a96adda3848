#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "reglab/pde_models.hpp"
#include "reglab/regulation.hpp"
#include "support.hpp"

using namespace reglab;
using testsupport::random_hermitian_psd;
using testsupport::random_passive_system;
using testsupport::random_skew;

namespace {

SignalSpec wave_reference() {
    // sin(pi t) + cos(2 pi t)/4.
    return make_real_scalar_signal({M_PI, 2 * M_PI}, {1.0, 0.0}, {0.0, 0.25});
}

}  // namespace

TEST_CASE("eval_signal closed forms") {
    const SignalSpec constant = make_real_scalar_signal({0.0}, {0.0}, {1.0});
    REQUIRE(std::abs(eval_signal(constant, 3.7).y_ref(0) - Complex(1.0, 0.0)) < 1e-14);

    const SignalSpec sig = wave_reference();
    for (double t : {0.0, 0.25, 1.0}) {
        const double expect = std::sin(M_PI * t) + 0.25 * std::cos(2 * M_PI * t);
        const Vec y = eval_signal(sig, t).y_ref;
        REQUIRE(std::abs(y(0).real() - expect) < 1e-12);
        REQUIRE(std::abs(y(0).imag()) < 1e-12);
    }

    const SignalSpec empty;
    REQUIRE(eval_signal(empty, 1.0).y_ref.size() == 0);
}

TEST_CASE("simulate integrates a constant-input ramp") {
    // A_e = 0 with constant forcing: x grows linearly.
    StateSpaceSystem plant(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1));
    const auto ctrl = build_diagonal_custom({0.0}, {Mat::Identity(1, 1)}, 1, Mat::Zero(1, 1),
                                            Mat::Zero(1, 1));
    const auto cl = assemble(plant, ctrl);
    const SignalSpec sig = make_real_scalar_signal({0.0}, {0.0}, {1.0});
    SimulateOptions opts;
    opts.dt = 0.01;
    opts.t_final = 2.0;
    opts.store_states = true;
    const auto traj = simulate(cl, sig, Vec::Zero(2), opts);
    // B_e column for y_ref is (0, B_c)^T; the controller state ramps at rate 1.
    const Vec x_end = traj.states.back();
    REQUIRE(std::abs(x_end(1).real() - 2.0) < 1e-10);
}

TEST_CASE("simulate converges at second order on the scalar decay") {
    double prev_err = 0.0;
    for (int level = 0; level < 3; ++level) {
        const double dt = 0.1 / std::pow(2.0, level);
        const auto traj = simulate_homogeneous(-Mat::Identity(1, 1), Vec::Ones(1), 1.0, dt);
        const double err = std::abs(traj.state_norms.back() - std::exp(-1.0));
        if (level > 0) REQUIRE(err < 0.3 * prev_err);  // order 2 gives 0.25
        prev_err = err;
    }
}

TEST_CASE("implicit midpoint never grows the norm on contractive systems") {
    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 5; ++trial) {
        const Index n = 6;
        const Mat a = random_skew(n, rng) - random_hermitian_psd(n, rng);
        Vec x0(n);
        for (Index i = 0; i < n; ++i) x0(i) = Complex(1.0, -0.5);
        // Large dt on purpose: the A-stability argument is unconditional.
        const auto traj = simulate_homogeneous(a, x0, 20.0, 0.9);
        for (size_t i = 1; i < traj.state_norms.size(); ++i)
            REQUIRE(traj.state_norms[i] <= traj.state_norms[i - 1] * (1.0 + 1e-10));
    }
}

TEST_CASE("simulate rejects an unresolved dt") {
    StateSpaceSystem plant(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1));
    const auto ctrl = build_diagonal_custom({0.0}, {Mat::Identity(1, 1)}, 1, Mat::Zero(1, 1),
                                            Mat::Zero(1, 1));
    const auto cl = assemble(plant, ctrl);
    const SignalSpec sig = make_real_scalar_signal({50.0}, {1.0}, {0.0});
    SimulateOptions opts;
    opts.dt = 0.1;  // 0.1 > 0.1 * 2 pi / 50
    opts.t_final = 1.0;
    REQUIRE_THROWS_AS(simulate(cl, sig, Vec::Zero(2), opts), InvalidArgument);
}

TEST_CASE("real and complex simulation paths agree to 1e-10") {
    const auto model = build_wave_distributed_model(8);
    const auto ctrl = build_fin_dim_real({M_PI, 2 * M_PI}, std::vector<double>{3.0, 3.0}, 1, 34.0,
                                         1.0);
    const auto cl = assemble(model.sys, ctrl);
    const SignalSpec sig = wave_reference();
    Vec x0 = Vec::Zero(cl.ne());
    x0.head(model.sys.n()) = model.initial_state(
        [](double xi) { return xi * (1 - xi) * (2 - 5 * xi); }, [](double) { return 0.0; });
    SimulateOptions opts;
    opts.dt = 5e-3;
    opts.t_final = 3.0;
    const auto real_run = simulate(cl, sig, x0, opts);
    opts.force_complex = true;
    const auto complex_run = simulate(cl, sig, x0, opts);
    for (size_t i = 0; i < real_run.times.size(); i += 25) {
        REQUIRE(std::abs(real_run.state_norms[i] - complex_run.state_norms[i]) < 1e-10);
        REQUIRE(std::abs(real_run.error_norms[i] - complex_run.error_norms[i]) < 1e-10);
    }
}

TEST_CASE("sliding_error_integral closed forms") {
    TrajectoryResult traj;
    traj.dt = 1e-3;
    for (double t = 0.0; t <= 5.0 + 1e-9; t += traj.dt) {
        traj.times.push_back(t);
        traj.error_norms.push_back(std::exp(-t));
        traj.state_norms.push_back(0.0);
        traj.errors.push_back(Vec::Constant(1, std::exp(-t)));
    }
    const auto table = sliding_error_integral(traj, 1.0);
    const double factor = 1.0 - std::exp(-1.0);
    for (size_t i = 0; i < table.size(); i += 500) {
        const double expect = factor * std::exp(-table[i].first);
        REQUIRE(table[i].second == Catch::Approx(expect).epsilon(1e-6));
    }
    REQUIRE_THROWS_AS(sliding_error_integral(traj, 10.0), WindowExceedsTrajectory);

    // Zero error stays identically zero.
    for (auto& e : traj.error_norms) e = 0.0;
    const auto zeros = sliding_error_integral(traj, 1.0);
    for (const auto& [t, v] : zeros) REQUIRE(v == 0.0);
}

TEST_CASE("fit_error_rate recovers synthetic laws") {
    std::vector<std::pair<double, double>> exp_table, poly_table;
    for (double t = 0.05; t <= 20.0; t += 0.05) {
        exp_table.emplace_back(t, 2.0 * std::exp(-t));
        poly_table.emplace_back(t, 3.0 * std::pow(t, -2.0 / 3.0));
    }
    const auto exp_fit = fit_error_rate(exp_table);
    REQUIRE(exp_fit.kind == DecayKind::Exponential);
    REQUIRE(exp_fit.rate == Catch::Approx(1.0).epsilon(0.05));

    const auto poly_fit = fit_error_rate(poly_table);
    REQUIRE(poly_fit.kind == DecayKind::Polynomial);
    REQUIRE(poly_fit.alpha == Catch::Approx(1.5).epsilon(0.10));

    REQUIRE_THROWS_AS(fit_error_rate({{1.0, 1.0}, {2.0, 0.5}}), InsufficientData);
}

TEST_CASE("compute_pi_ext matches scalar hand algebra") {
    StateSpaceSystem plant(-Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1),
                           Mat::Zero(1, 1));
    const auto ctrl = build_fin_dim({2.0}, std::vector<double>{1.0}, 1, 0.5, 0.25);
    std::vector<SignalSpec::Entry> entries(1);
    entries[0].omega = 2.0;
    entries[0].y_ref = Vec::Ones(1);
    entries[0].w_dist = Vec(0);
    const SignalSpec sig(entries, false);

    const auto pi = compute_pi_ext(plant, ctrl, sig);
    REQUIRE(pi.size() == 1);
    // Plant_S: A_S = -1.25; P_S(2i) = 1/(1.25 + 2i); u = (1.25 + 2i) y.
    REQUIRE(std::abs(pi[0].u(0) - Complex(1.25, 2.0)) < 1e-12);
    REQUIRE(std::abs(pi[0].pi1(0) - Complex(1.0, 0.0)) < 1e-12);
    REQUIRE(std::abs(pi[0].pi2(0) - Complex(1.0, 2.0)) < 1e-12);

    const auto alt = compute_pi_ext_alt(plant, ctrl, sig);
    REQUIRE(std::abs(alt[0].u(0) - pi[0].u(0)) < 1e-12);
    REQUIRE(std::abs(alt[0].pi1(0) - pi[0].pi1(0)) < 1e-12);
    REQUIRE(std::abs(alt[0].pi2(0) - pi[0].pi2(0)) < 1e-12);
}

TEST_CASE("pi_ext paths agree on the 6.2 configuration") {
    const auto plant = build_wave_distributed(16);
    const auto ctrl = build_fin_dim_real({M_PI, 2 * M_PI}, std::vector<double>{3.0, 3.0}, 1, 34.0,
                                         1.0);
    const SignalSpec sig = wave_reference();
    const auto a = compute_pi_ext(plant, ctrl, sig);
    const auto b = compute_pi_ext_alt(plant, ctrl, sig);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
        const double scale = 1.0 + a[k].pi1.norm() + a[k].u.norm();
        REQUIRE((a[k].pi1 - b[k].pi1).norm() / scale < 1e-9);
        REQUIRE((a[k].pi2 - b[k].pi2).norm() / scale < 1e-9);
        REQUIRE((a[k].u - b[k].u).norm() / scale < 1e-9);
    }
}

TEST_CASE("pi_ext rejects transmission zeros and missing modes") {
    Mat a(2, 2), b(2, 1), c(1, 2), d(1, 1);
    a << 0.0, 1.0, -1.0, -1.0;
    b << 0.0, 1.0;
    c << 0.0, 1.0;
    d << 0.0;
    StateSpaceSystem plant(a, b, c, d);  // P(0) = 0
    const auto ctrl = build_diagonal_custom({0.0}, {Mat::Identity(1, 1)}, 1, Mat::Zero(1, 1),
                                            Mat::Zero(1, 1));
    std::vector<SignalSpec::Entry> entries(1);
    entries[0].omega = 0.0;
    entries[0].y_ref = Vec::Ones(1);
    entries[0].w_dist = Vec(0);
    const SignalSpec sig(entries, false);
    REQUIRE_THROWS_AS(compute_pi_ext(plant, ctrl, sig), TransmissionZero);

    std::mt19937_64 rng(8);
    const auto passive = random_passive_system(4, 1, rng);
    const auto wrong = build_fin_dim({5.0}, std::vector<double>{1.0}, 1, 0.5, 0.0);
    REQUIRE_THROWS_AS(compute_pi_ext(passive, wrong, sig), ModeNotRetained);
}

TEST_CASE("check_regulation_conditions classifies trends") {
    auto make_entries = [](std::function<double(int)> law) {
        std::vector<PiExtEntry> entries;
        for (int k = 1; k <= 40; ++k) {
            PiExtEntry e;
            e.omega = k;
            e.pi1 = Vec::Constant(1, law(k));
            e.pi2 = Vec::Constant(1, law(k));
            e.u = Vec::Constant(1, law(k));
            entries.push_back(e);
        }
        return entries;
    };
    const auto geometric = check_regulation_conditions(
        make_entries([](int k) { return std::pow(0.5, k); }));
    REQUIRE(geometric.u_l1.verdict == TrendVerdict::Summable);
    REQUIRE(geometric.pi1_l1.verdict == TrendVerdict::Summable);

    const auto harmonic = check_regulation_conditions(
        make_entries([](int k) { return 1.0 / k; }));
    REQUIRE(harmonic.u_l1.verdict == TrendVerdict::Divergent);

    // k^{-3} reference class: the w-weighted l2 sequence stays summable.
    const auto cubic = check_regulation_conditions(
        make_entries([](int k) { return std::pow(double(k), -3.0); }));
    REQUIRE(cubic.pi2_weighted.verdict == TrendVerdict::Summable);
}

TEST_CASE("heat-style regulator sequences satisfy the summability conditions") {
    // k^{-3} reference coefficients keep the w-weighted l2 sequence summable.
    const auto plant = build_heat_2d(12);
    const auto ctrl = build_diagonal(15, M_PI, 1, 8.0, 0.1, 0.0, 15.0);
    std::vector<double> omegas, sc, cc;
    for (int k = 1; k <= 15; k += 2) {
        omegas.push_back(M_PI * k);
        sc.push_back(8.0 / std::pow(M_PI * k, 3.0));
        cc.push_back(0.0);
    }
    const auto sig = make_real_scalar_signal(omegas, sc, cc, 1);
    const auto entries = compute_pi_ext(plant, ctrl, sig);
    const auto rep = check_regulation_conditions(entries);
    REQUIRE(rep.u_l1.verdict == TrendVerdict::Summable);
    REQUIRE(rep.pi1_l1.verdict == TrendVerdict::Summable);
    REQUIRE(rep.pi2_weighted.verdict == TrendVerdict::Summable);
}

TEST_CASE("compute_q_ext basics and the resolvent structure identity") {
    std::mt19937_64 rng(21);
    const auto plant = random_passive_system(5, 1, rng);
    const auto ctrl = build_fin_dim({1.0, 3.0}, std::vector<double>{1.0, 2.0}, 1, 0.5, 0.25);
    const auto cl = assemble(plant, ctrl);

    const SignalSpec empty;
    REQUIRE(compute_q_ext(cl, empty).norm() == 0.0);

    std::vector<SignalSpec::Entry> entries(1);
    entries[0].omega = 3.0;
    entries[0].y_ref = Vec::Ones(1);
    entries[0].w_dist = Vec(0);
    const SignalSpec sig(entries, false);
    const Vec q = compute_q_ext(cl, sig);
    Mat shifted = -cl.Ae;
    shifted.diagonal().array() += Complex(0.0, 3.0);
    Vec w(1);
    w << Complex(1.0, 0.0);
    const Vec expect = Complex(0.0, 3.0) * Vec(solve_linear(shifted, Mat(cl.Be * w)));
    REQUIRE((q - expect).norm() < 1e-12);

    // Proof-structure identity: R(i w_k, A_e) B_e w^k = (Pi_1^k, e_k (x) Pi_2^k).
    const Vec x_k = solve_linear(shifted, Mat(cl.Be * w));
    const auto pi = compute_pi_ext(plant, ctrl, sig);
    REQUIRE((x_k.head(plant.n()) - pi[0].pi1).norm() < 1e-9);
    const auto* mode = ctrl.mode_at(3.0);
    REQUIRE(mode != nullptr);
    for (const auto& other : ctrl.modes) {
        const Vec block = x_k.segment(plant.n() + other.offset, other.dim);
        if (other.offset == mode->offset) {
            REQUIRE((block - mode->kernel_basis.middleRows(other.offset, other.dim) *
                                 pi[0].pi2).norm() < 1e-9);
        } else {
            REQUIRE(block.norm() < 1e-9);
        }
    }
}

TEST_CASE("compatible_initial_state solves the kernel condition") {
    const auto plant = build_wave_distributed(12);
    const auto ctrl = build_diagonal(5, M_PI, 1, 8.0, 0.1, 0.0, 15.0);
    std::mt19937_64 rng(4);
    Vec x0 = Vec::Zero(plant.n());
    for (Index i = 0; i < x0.size(); ++i) x0(i) = Complex(0.1 * std::sin(double(i)), 0.0);
    const Vec y0 = Vec::Constant(1, Complex(0.7, 0.0));
    const Vec z0 = compatible_initial_state(plant, ctrl, x0, y0);
    const Vec rhs = ctrl.Dc() * (plant.C * x0 - y0);
    REQUIRE((ctrl.Cc * z0 - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));

    // Already-compatible data yields the zero minimum-norm solution.
    const Vec y_match = plant.C * x0;
    REQUIRE(compatible_initial_state(plant, ctrl, x0, y_match).norm() < 1e-12);

    // Scalar controller: z0 = D_c (C x0 - y) / C_c.
    const auto scalar = build_fin_dim({0.0}, std::vector<double>{2.0}, 1, 1.0, 0.0);
    StateSpaceSystem toy(-Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1),
                         Mat::Zero(1, 1));
    const Vec z = compatible_initial_state(toy, scalar, Vec::Ones(1), Vec::Zero(1));
    REQUIRE(std::abs(z(0) - Complex(0.5, 0.0)) < 1e-14);
}

TEST_CASE("error_formula_check: zero signal makes both paths identical") {
    std::mt19937_64 rng(77);
    const auto plant = random_passive_system(5, 1, rng);
    const auto ctrl = build_fin_dim({1.5}, std::vector<double>{1.0}, 1, 0.5, 0.25);
    const auto cl = assemble(plant, ctrl);
    Vec x0(cl.ne());
    for (Index i = 0; i < x0.size(); ++i) x0(i) = Complex(std::cos(double(i)), 0.2);
    const auto chk = error_formula_check(cl, SignalSpec(), x0, {0.5, 1.0, 2.0}, 1e-2);
    REQUIRE_FALSE(chk.skipped);
    REQUIRE(chk.max_deviation < 1e-10);
}

TEST_CASE("error_formula_check deviation shrinks at second order") {
    std::mt19937_64 rng(123);
    const auto plant = random_passive_system(6, 1, rng);
    const auto ctrl = build_fin_dim({2.0, -2.0}, std::vector<double>{1.0, 1.0}, 1, 0.6, 0.3);
    const auto cl = assemble(plant, ctrl);
    Vec x0(cl.ne());
    for (Index i = 0; i < x0.size(); ++i) x0(i) = Complex(std::sin(0.7 * double(i)), -0.1);
    std::vector<SignalSpec::Entry> entries(1);
    entries[0].omega = 2.0;
    entries[0].y_ref = Vec::Ones(1);
    entries[0].w_dist = Vec(0);
    const SignalSpec sig(entries, false);

    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const double dt = 0.04 / std::pow(2.0, level);
        const auto chk = error_formula_check(cl, sig, x0, {1.0, 2.0}, dt);
        if (level > 0) {
            const double order = std::log2(prev / chk.max_deviation);
            REQUIRE(order > 1.8);
        }
        prev = chk.max_deviation;
    }
}

TEST_CASE("pointwise_error_decay windows") {
    TrajectoryResult traj;
    traj.dt = 0.01;
    for (double t = 0.0; t <= 16.0 + 1e-9; t += traj.dt) {
        traj.times.push_back(t);
        traj.error_norms.push_back(std::exp(-0.5 * t) * (1.0 + 0.3 * std::sin(8.0 * t)));
        traj.state_norms.push_back(0.0);
        traj.errors.push_back(Vec::Zero(1));
    }
    const auto windows = pointwise_error_decay(traj, 4);
    REQUIRE(windows.size() == 4);
    for (size_t i = 1; i < windows.size(); ++i)
        REQUIRE(windows[i].max_error < windows[i - 1].max_error);
}

TEST_CASE("perturb_passive keeps passivity exactly") {
    std::mt19937_64 rng(31);
    const auto model = build_wave_distributed_model(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto perturbed = perturb_passive(model.sys, 0.01, rng);
        const auto rep = check_passive(perturbed);
        REQUIRE(rep.is_passive);
        REQUIRE(rep.max_eig_dissipation_block <= 1e-10);
        REQUIRE((perturbed.A - model.sys.A).norm() <= 0.011 * model.sys.A.norm());
        REQUIRE((perturbed.A - model.sys.A).norm() >= 0.009 * model.sys.A.norm());
        REQUIRE(perturbed.A.imag().cwiseAbs().maxCoeff() == 0.0);  // real stays real
    }
}

TEST_CASE("halving dt barely changes the sliding integral") {
    const auto model = build_wave_distributed_model(12);
    const auto ctrl = build_fin_dim_real({M_PI, 2 * M_PI}, std::vector<double>{3.0, 3.0}, 1, 34.0,
                                         1.0);
    const auto cl = assemble(model.sys, ctrl);
    const SignalSpec sig = wave_reference();
    Vec x0 = Vec::Zero(cl.ne());
    x0.head(model.sys.n()) = model.initial_state(
        [](double xi) { return xi * (1 - xi) * (2 - 5 * xi); }, [](double) { return 0.0; });

    double final_coarse = 0.0;
    for (int level = 0; level < 2; ++level) {
        SimulateOptions opts;
        opts.dt = 2e-3 / (level + 1);
        opts.t_final = 6.0;
        const auto traj = simulate(cl, sig, x0, opts);
        const double final_val = sliding_error_integral(traj, 1.0).back().second;
        if (level == 0)
            final_coarse = final_val;
        else
            REQUIRE(std::abs(final_val - final_coarse) < 0.05 * final_coarse);
    }
}
