#ifndef REGLAB_REGULATION_HPP
#define REGLAB_REGULATION_HPP

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "reglab/closed_loop.hpp"
#include "reglab/decay.hpp"
#include "reglab/signals.hpp"

namespace reglab {

struct StepMatrixSingular : Error {
    using Error::Error;
};
struct WindowExceedsTrajectory : Error {
    using Error::Error;
};
struct TransmissionZero : Error {
    using Error::Error;
};
struct InconsistentSystem : Error {
    using Error::Error;
};

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<double> error_norms;
    std::vector<double> state_norms;
    std::vector<Vec> errors;  // e(t_n), one p-vector per step
    std::vector<Vec> states;  // filled only when requested
    double dt = 0.0;
    std::string scheme = "implicit-midpoint";

    size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    double t_final() const { return times.empty() ? 0.0 : times.back(); }
};

struct SimulateOptions {
    double dt = 1e-3;
    double t_final = 1.0;
    bool store_states = false;
    bool force_complex = false;  // bypass the real fast path (used for cross-checks)
};

namespace detail {

// Implicit midpoint over a fixed grid, one factorization reused:
//   (I - dt/2 A) x_{n+1} = (I + dt/2 A) x_n + dt B w(t_n + dt/2).
// Contractive A never increases ||x|| in the homogeneous case; that is
// asserted per step since a violation signals a bad assembly.
template <typename Matrix, typename Vector, typename InputFn, typename ErrorFn>
TrajectoryResult run_midpoint(const Matrix& a, const Matrix& b, const InputFn& input_at,
                              const ErrorFn& error_at, Vector x, const SimulateOptions& opts,
                              bool homogeneous) {
    const Index n = a.rows();
    const size_t steps = static_cast<size_t>(std::llround(opts.t_final / opts.dt));
    Matrix lhs = -0.5 * opts.dt * a;
    lhs.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Matrix> lu(lhs);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <
        1e-14 * lhs.cwiseAbs().maxCoeff())
        throw StepMatrixSingular("simulate: I - dt/2 A_e singular; the assembly is not contractive");

    TrajectoryResult traj;
    traj.dt = opts.dt;
    traj.times.reserve(steps + 1);
    traj.error_norms.reserve(steps + 1);
    traj.state_norms.reserve(steps + 1);
    traj.errors.reserve(steps + 1);

    auto record = [&](double t, const Vector& state) {
        traj.times.push_back(t);
        const Vec err = error_at(t, state);
        traj.errors.push_back(err);
        traj.error_norms.push_back(err.norm());
        traj.state_norms.push_back(state.norm());
        if (opts.store_states) {
            if constexpr (std::is_same_v<Vector, Vec>)
                traj.states.push_back(state);
            else
                traj.states.push_back(state.template cast<Complex>());
        }
    };

    record(0.0, x);
    Vector rhs(n);
    for (size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * opts.dt;
        rhs = x + 0.5 * opts.dt * (a * x);
        if (!homogeneous) rhs += opts.dt * (b * input_at(t + 0.5 * opts.dt));
        const double prev_norm = traj.state_norms.back();
        x = lu.solve(rhs);
        if (homogeneous && x.norm() > prev_norm * (1.0 + 1e-10) + 1e-300)
            throw Error("simulate: implicit midpoint grew the state norm on a homogeneous run");
        record(t + opts.dt, x);
    }
    return traj;
}

inline bool effectively_real(const Mat& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0; }

}  // namespace detail

/// Integrate x_e' = A_e x_e + B_e w_ext with the error output recorded per
/// step. dt must resolve the fastest signal frequency (dt <= 0.1 * 2pi/w_max).
/// All-real problems run in real arithmetic; both paths agree to roundoff.
inline TrajectoryResult simulate(const ClosedLoopSystem& cl, const SignalSpec& sig, const Vec& x0,
                                 const SimulateOptions& opts) {
    if (opts.dt <= 0.0 || opts.t_final <= 0.0)
        throw InvalidArgument("simulate: dt and t_final must be positive");
    const double wmax = sig.max_abs_frequency();
    if (wmax > 0.0 && opts.dt > 0.1 * 2.0 * M_PI / wmax)
        throw InvalidArgument("simulate: dt too large for the fastest signal frequency");
    if (x0.size() != cl.ne()) throw InvalidArgument("simulate: x0 dimension mismatch");
    if (!sig.empty() && sig.p() != cl.p())
        throw InvalidArgument("simulate: signal output dimension mismatch");
    if (!sig.empty() && sig.md() != cl.md())
        throw InvalidArgument("simulate: signal disturbance dimension mismatch");

    const bool homogeneous = sig.empty();
    const bool real_path = !opts.force_complex && (homogeneous || sig.real_valued()) &&
                           detail::effectively_real(cl.Ae) && detail::effectively_real(cl.Be) &&
                           detail::effectively_real(cl.Ce) && detail::effectively_real(cl.De) &&
                           x0.imag().cwiseAbs().maxCoeff() == 0.0;

    if (real_path) {
        const RealMat a = cl.Ae.real(), b = cl.Be.real(), c = cl.Ce.real(), d = cl.De.real();
        auto input_at = [&sig](double t) -> RealVec {
            return eval_signal_stacked(sig, t).real();
        };
        auto error_at = [&](double t, const RealVec& state) -> Vec {
            RealVec e = c * state;
            if (!homogeneous) e += d * eval_signal_stacked(sig, t).real();
            return e.cast<Complex>();
        };
        return detail::run_midpoint(a, b, input_at, error_at, RealVec(x0.real()), opts,
                                    homogeneous);
    }
    auto input_at = [&sig](double t) -> Vec { return eval_signal_stacked(sig, t); };
    auto error_at = [&](double t, const Vec& state) -> Vec {
        Vec e = cl.Ce * state;
        if (!homogeneous) e += cl.De * eval_signal_stacked(sig, t);
        return e;
    };
    return detail::run_midpoint(cl.Ae, cl.Be, input_at, error_at, Vec(x0), opts, homogeneous);
}

/// Homogeneous run x' = A x for a bare matrix (decay studies).
inline TrajectoryResult simulate_homogeneous(const Mat& a, const Vec& x0, double t_final,
                                             double dt, bool store_states = false) {
    SimulateOptions opts;
    opts.dt = dt;
    opts.t_final = t_final;
    opts.store_states = store_states;
    auto input_at = [](double) -> Vec { return Vec(); };
    auto error_at = [](double, const Vec&) -> Vec { return Vec::Zero(0); };
    return detail::run_midpoint(Mat(a), Mat(Mat::Zero(a.rows(), 0)), input_at, error_at, Vec(x0), opts,
                                /*homogeneous=*/true);
}

/// Sliding window integrals int_t^{t+window} ||e|| ds by trapezoid rule.
inline std::vector<std::pair<double, double>> sliding_error_integral(const TrajectoryResult& traj,
                                                                     double window = 1.0) {
    const size_t n = traj.times.size();
    if (n < 2) throw WindowExceedsTrajectory("sliding_error_integral: trajectory too short");
    const size_t wsteps = static_cast<size_t>(std::llround(window / traj.dt));
    if (wsteps < 1 || wsteps >= n)
        throw WindowExceedsTrajectory("sliding_error_integral: window exceeds trajectory");
    std::vector<double> cumulative(n, 0.0);
    for (size_t i = 1; i < n; ++i) {
        cumulative[i] = cumulative[i - 1] +
                        0.5 * traj.dt * (traj.error_norms[i - 1] + traj.error_norms[i]);
    }
    std::vector<std::pair<double, double>> table;
    table.reserve(n - wsteps);
    for (size_t i = 0; i + wsteps < n; ++i)
        table.emplace_back(traj.times[i], cumulative[i + wsteps] - cumulative[i]);
    return table;
}

/// Exponential vs polynomial fit of a decaying window-integral table over its
/// post-transient part; the better residual in log space wins.
inline DecayModel fit_error_rate(const std::vector<std::pair<double, double>>& table,
                                 double transient_fraction = 0.25) {
    std::vector<double> t, logv, logt;
    const double t_max = table.empty() ? 0.0 : table.back().first;
    for (const auto& [ti, vi] : table) {
        if (ti < transient_fraction * t_max || ti <= 0.0) continue;
        if (vi <= 1e-300) continue;
        t.push_back(ti);
        logt.push_back(std::log(ti));
        logv.push_back(std::log(vi));
    }
    if (t.size() < 10) throw InsufficientData("fit_error_rate: need >= 10 post-transient points");

    const LineFit exp_fit = fit_line(t, logv);
    const LineFit poly_fit = fit_line(logt, logv);

    DecayModel model;
    model.band_lo = t.front();
    model.band_hi = t.back();
    const bool poly_decays = poly_fit.slope < -1e-6;
    if (poly_decays && poly_fit.rms_residual < exp_fit.rms_residual) {
        model.kind = DecayKind::Polynomial;
        model.alpha = -1.0 / poly_fit.slope;
        model.m_e = std::exp(poly_fit.intercept);
        model.residual = poly_fit.rms_residual;
    } else {
        model.kind = DecayKind::Exponential;
        model.rate = -exp_fit.slope;
        model.m_e = std::exp(exp_fit.intercept);
        model.residual = exp_fit.rms_residual;
    }
    return model;
}

/// Regulator solution entry for one signal frequency:
///   u_k    = P_S(i w_k)^{-1} y_ref^k - P_S(i w_k)^{-1} C^S R(i w_k, A^S) B_d w_dist^k
///   Pi^k_1 = R(i w_k, A^S) B^S u_k + R(i w_k, A^S) B_d w_dist^k
///   Pi^k_2 = (C_c^k)^{-1} (u_k - D_c2 y_ref^k)
struct PiExtEntry {
    double omega = 0.0;
    Vec pi1;  // plant component
    Vec pi2;  // controller-mode component, kernel coordinates
    Vec u;    // feedforward input
};

namespace detail {

inline Vec dist_coefficient(const SignalSpec::Entry& e, Index md) {
    if (e.w_dist.size() == md) return e.w_dist;
    if (e.w_dist.size() == 0) return Vec::Zero(md);
    throw InvalidArgument("signal disturbance dimension incompatible with the plant");
}

inline Mat invert_transfer(const Mat& p_value, double omega) {
    const double floor = 1e-12 * (1.0 + operator_norm(p_value));
    if (min_singular_value(p_value) <= floor)
        throw TransmissionZero("P_S(i w) numerically singular at omega = " +
                               std::to_string(omega));
    return solve_linear(p_value, Mat::Identity(p_value.rows(), p_value.cols()));
}

}  // namespace detail

inline std::vector<PiExtEntry> compute_pi_ext(const StateSpaceSystem& plant,
                                              const ControllerRealization& ctrl,
                                              const SignalSpec& sig) {
    const auto plant_s = output_feedback(plant, ctrl.Dc2);
    const Index n = plant_s.n(), md = plant_s.md();
    std::vector<PiExtEntry> entries;
    for (const auto& e : sig.entries()) {
        const Complex iw(0.0, e.omega);
        Mat shifted = -plant_s.A;
        shifted.diagonal().array() += iw;
        Mat resolvent;
        try {
            resolvent = solve_linear(shifted, Mat::Identity(n, n));
        } catch (const SingularMatrix&) {
            throw SpectrumHit("compute_pi_ext: i w_k in spectrum of A^S");
        }
        const Mat ps = plant_s.C * resolvent * plant_s.B + plant_s.D;
        const Mat ps_inv = detail::invert_transfer(ps, e.omega);
        const Vec wk = detail::dist_coefficient(e, md);

        Vec u = ps_inv * e.y_ref;
        Vec pi1 = Vec::Zero(n);
        if (md > 0 && plant_s.Bd) {
            const Vec rbdw = resolvent * (*plant_s.Bd * wk);
            u -= ps_inv * (plant_s.C * rbdw);
            pi1 += rbdw;
        }
        pi1 += resolvent * (plant_s.B * u);

        const auto* mode = ctrl.mode_at(e.omega);
        if (!mode)
            throw ModeNotRetained("compute_pi_ext: controller has no mode at omega = " +
                                  std::to_string(e.omega));
        const Vec pi2 = solve_linear(mode->gain, Mat(u - ctrl.Dc2 * e.y_ref));

        entries.push_back(PiExtEntry{e.omega, pi1, pi2, u});
    }
    return entries;
}

/// Alternate expressions for the same entries: through the unstabilized plant
/// when i w_k is off sigma(A), otherwise through R(i w, A^S - B^S (D^S)^{-1} C^S)
/// for invertible D. Must agree entrywise with compute_pi_ext.
inline std::vector<PiExtEntry> compute_pi_ext_alt(const StateSpaceSystem& plant,
                                                  const ControllerRealization& ctrl,
                                                  const SignalSpec& sig) {
    const auto plant_s = output_feedback(plant, ctrl.Dc2);
    const Index n = plant.n(), md = plant.md();
    std::vector<PiExtEntry> entries;
    for (const auto& e : sig.entries()) {
        const Complex iw(0.0, e.omega);
        const Vec wk = detail::dist_coefficient(e, md);
        const auto* mode = ctrl.mode_at(e.omega);
        if (!mode)
            throw ModeNotRetained("compute_pi_ext_alt: controller has no mode at omega = " +
                                  std::to_string(e.omega));

        PiExtEntry out;
        out.omega = e.omega;
        bool done = false;
        Mat shifted = -plant.A;
        shifted.diagonal().array() += iw;
        try {
            const LinearSolver solver(shifted);
            const Mat resolvent = solver.solve(Mat::Identity(n, n));
            const Mat p = plant.C * resolvent * plant.B + plant.D;
            const Mat p_inv = detail::invert_transfer(p, e.omega);
            Vec u_tilde = p_inv * e.y_ref;
            Vec pi1 = Vec::Zero(n);
            if (md > 0 && plant.Bd) {
                const Mat pd = plant.C * resolvent * (*plant.Bd);
                u_tilde -= p_inv * (pd * wk);
                pi1 += resolvent * (*plant.Bd * wk);
            }
            pi1 += resolvent * (plant.B * u_tilde);
            out.pi1 = pi1;
            out.pi2 = solve_linear(mode->gain, Mat(u_tilde));
            out.u = u_tilde + ctrl.Dc2 * e.y_ref;
            done = true;
        } catch (const SingularMatrix&) {
            // i w_k sits in sigma(A); fall through to the feedthrough path.
        }

        if (!done) {
            if (min_singular_value(plant_s.D) <= 1e-12 * (1.0 + operator_norm(plant_s.D)))
                throw SpectrumHit(
                    "compute_pi_ext_alt: i w_k in sigma(A) and D^S not invertible");
            Mat shifted_s = -plant_s.A;
            shifted_s.diagonal().array() += iw;
            const Mat rs = solve_linear(shifted_s, Mat::Identity(n, n));
            const Mat ps = plant_s.C * rs * plant_s.B + plant_s.D;
            const Mat ps_inv = detail::invert_transfer(ps, e.omega);
            const Mat ds_inv =
                solve_linear(plant_s.D, Mat::Identity(plant_s.D.rows(), plant_s.D.cols()));
            Mat shifted_d = -(plant_s.A - plant_s.B * ds_inv * plant_s.C);
            shifted_d.diagonal().array() += iw;
            Vec pi1 = rs * (plant_s.B * (ps_inv * e.y_ref));
            Vec u = ps_inv * e.y_ref;
            if (md > 0 && plant_s.Bd) {
                pi1 += solve_linear(shifted_d, Mat(*plant_s.Bd * wk));
                u -= ps_inv * (plant_s.C * (rs * (*plant_s.Bd * wk)));
            }
            out.pi1 = pi1;
            out.u = u;
            out.pi2 = solve_linear(mode->gain, Mat(u - ctrl.Dc2 * e.y_ref));
        }
        entries.push_back(std::move(out));
    }
    return entries;
}

enum class TrendVerdict { Summable, Divergent, Inconclusive };

inline const char* trend_verdict_name(TrendVerdict v) {
    switch (v) {
        case TrendVerdict::Summable: return "summable";
        case TrendVerdict::Divergent: return "divergent";
        case TrendVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

/// Partial-sum trend over a positive sequence ordered by |w|: log-log slope of
/// the tail increments classifies summable vs divergent growth.
struct SequenceTrend {
    std::vector<double> partial_sums;
    double tail_slope = 0.0;
    TrendVerdict verdict = TrendVerdict::Inconclusive;
};

inline SequenceTrend classify_sequence(const std::vector<double>& increments) {
    SequenceTrend trend;
    double sum = 0.0;
    for (double a : increments) {
        sum += a;
        trend.partial_sums.push_back(sum);
    }
    if (increments.size() < 4) return trend;
    double peak = 0.0;
    for (double a : increments) peak = std::max(peak, a);
    if (peak <= 1e-14) {
        trend.verdict = TrendVerdict::Summable;
        return trend;
    }
    std::vector<double> logj, loga;
    const size_t start = increments.size() / 2;
    for (size_t j = start; j < increments.size(); ++j) {
        if (increments[j] <= 1e-300) continue;
        logj.push_back(std::log(static_cast<double>(j + 1)));
        loga.push_back(std::log(increments[j]));
    }
    if (logj.size() < 3) {
        trend.verdict = TrendVerdict::Summable;  // tail vanished outright
        return trend;
    }
    const LineFit fit = fit_line(logj, loga);
    trend.tail_slope = fit.slope;
    if (fit.slope <= -1.1)
        trend.verdict = TrendVerdict::Summable;
    else if (fit.slope >= -1.0)
        trend.verdict = TrendVerdict::Divergent;
    return trend;
}

/// Summability diagnostics behind the regulator conditions: l1 trends of
/// ||Pi^k_1||, ||u_k|| and l2 trends of ||Pi^k_2||, with w_k-weighted variants.
struct RegulationConditionReport {
    SequenceTrend pi1_l1;
    SequenceTrend pi2_l2;       // increments ||Pi^k_2||^2
    SequenceTrend u_l1;
    SequenceTrend pi1_weighted; // ||w_k Pi^k_1||
    SequenceTrend pi2_weighted; // ||w_k Pi^k_2||^2
};

inline RegulationConditionReport check_regulation_conditions(
    const std::vector<PiExtEntry>& entries) {
    // Group +-w pairs so the sequences are ordered by |w|.
    std::vector<size_t> order(entries.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&entries](size_t a, size_t b) {
        return std::abs(entries[a].omega) < std::abs(entries[b].omega);
    });
    std::vector<double> pi1, pi2sq, u, wpi1, wpi2sq;
    size_t i = 0;
    while (i < order.size()) {
        const auto& first = entries[order[i]];
        double a1 = first.pi1.norm(), a2 = first.pi2.squaredNorm(), au = first.u.norm();
        double w1 = std::abs(first.omega) * first.pi1.norm();
        double w2 = std::pow(std::abs(first.omega), 2.0) * first.pi2.squaredNorm();
        size_t j = i + 1;
        if (j < order.size() &&
            std::abs(std::abs(entries[order[j]].omega) - std::abs(first.omega)) <= 1e-12) {
            const auto& second = entries[order[j]];
            a1 += second.pi1.norm();
            a2 += second.pi2.squaredNorm();
            au += second.u.norm();
            w1 += std::abs(second.omega) * second.pi1.norm();
            w2 += std::pow(std::abs(second.omega), 2.0) * second.pi2.squaredNorm();
            ++j;
        }
        pi1.push_back(a1);
        pi2sq.push_back(a2);
        u.push_back(au);
        wpi1.push_back(w1);
        wpi2sq.push_back(w2);
        i = j;
    }
    RegulationConditionReport rep;
    rep.pi1_l1 = classify_sequence(pi1);
    rep.pi2_l2 = classify_sequence(pi2sq);
    rep.u_l1 = classify_sequence(u);
    rep.pi1_weighted = classify_sequence(wpi1);
    rep.pi2_weighted = classify_sequence(wpi2sq);
    return rep;
}

/// q_ext = sum_k i w_k R(i w_k, A_e) B_e w_ext^k over the truncation.
inline Vec compute_q_ext(const ClosedLoopSystem& cl, const SignalSpec& sig) {
    Vec q = Vec::Zero(cl.ne());
    for (const auto& e : sig.entries()) {
        if (e.omega == 0.0) continue;  // the i w_k factor vanishes
        const Complex iw(0.0, e.omega);
        Mat shifted = -cl.Ae;
        shifted.diagonal().array() += iw;
        Vec w(cl.md() + cl.p());
        w << detail::dist_coefficient(e, cl.md()), e.y_ref;
        try {
            q += iw * Vec(solve_linear(shifted, Mat(cl.Be * w)));
        } catch (const SingularMatrix&) {
            throw SpectrumHit("compute_q_ext: i w_k in spectrum of A_e");
        }
    }
    return q;
}

/// Minimum-norm controller state with C_c z_0 = D_c (C x_0 - y_ref(0)),
/// the compatibility condition that upgrades window decay to pointwise decay.
inline Vec compatible_initial_state(const StateSpaceSystem& plant,
                                    const ControllerRealization& ctrl, const Vec& x0,
                                    const Vec& y_ref0) {
    const Vec rhs = ctrl.Dc() * (plant.C * x0 - y_ref0);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(ctrl.Cc);
    const Vec z0 = cod.solve(rhs);
    if ((ctrl.Cc * z0 - rhs).norm() > 1e-10 * (1.0 + rhs.norm()))
        throw InconsistentSystem("compatible_initial_state: C_c z0 = D_c(Cx0 - y_ref(0)) "
                                 "has no solution");
    return z0;
}

/// Compare the forced simulation error with the homogeneous representation
///   e(t) = C_e T_e(t) A_e^{-1} (A_e x_e0 + B_e w_ext(0) - q_ext).
/// Returns the max deviation over the sample times; O(dt^2) when the
/// controller carries the internal model of every signal frequency.
struct ErrorFormulaCheck {
    double max_deviation = 0.0;
    std::vector<std::pair<double, double>> deviations;
    bool skipped = false;
    std::string note;
};

inline ErrorFormulaCheck error_formula_check(const ClosedLoopSystem& cl, const SignalSpec& sig,
                                             const Vec& x_e0,
                                             const std::vector<double>& sample_times, double dt) {
    ErrorFormulaCheck out;
    if (sample_times.empty()) throw InvalidArgument("error_formula_check: no sample times");
    const Vec q_ext = compute_q_ext(cl, sig);
    Vec w0 = Vec::Zero(cl.md() + cl.p());
    if (!sig.empty()) w0 = eval_signal_stacked(sig, 0.0);

    Vec v0;
    try {
        v0 = x_e0 + Vec(solve_linear(cl.Ae, Mat(cl.Be * w0 - q_ext)));
    } catch (const SingularMatrix&) {
        out.skipped = true;
        out.note = "A_e singular; the representation formula does not apply";
        return out;
    }

    SimulateOptions opts;
    opts.dt = dt;
    opts.t_final = *std::max_element(sample_times.begin(), sample_times.end());
    const TrajectoryResult forced = simulate(cl, sig, x_e0, opts);
    const TrajectoryResult homog =
        simulate_homogeneous(cl.Ae, v0, opts.t_final, dt, /*store_states=*/true);

    for (double t : sample_times) {
        const size_t idx = static_cast<size_t>(std::llround(t / dt));
        if (idx >= forced.times.size()) continue;
        const Vec e_formula = cl.Ce * homog.states[idx];
        const double dev = (forced.errors[idx] - e_formula).norm();
        out.deviations.emplace_back(forced.times[idx], dev);
        out.max_deviation = std::max(out.max_deviation, dev);
    }
    return out;
}

/// Running max of ||e(t)|| over dyadic tail windows [T/2^{j+1}, T/2^j],
/// reported in time order.
struct TailWindow {
    double t_begin = 0.0, t_end = 0.0;
    double max_error = 0.0;
};

inline std::vector<TailWindow> pointwise_error_decay(const TrajectoryResult& traj,
                                                     size_t max_windows = 6) {
    std::vector<TailWindow> windows;
    const double t_final = traj.t_final();
    double hi = t_final;
    for (size_t j = 0; j < max_windows && hi > 8.0 * traj.dt; ++j) {
        const double lo = 0.5 * hi;
        TailWindow w{lo, hi, 0.0};
        for (size_t i = 0; i < traj.times.size(); ++i) {
            if (traj.times[i] >= lo && traj.times[i] <= hi)
                w.max_error = std::max(w.max_error, traj.error_norms[i]);
        }
        windows.push_back(w);
        hi = lo;
    }
    std::reverse(windows.begin(), windows.end());
    return windows;
}

/// Structured random perturbation that preserves passivity exactly: a skew
/// increment on A, a joint increment on B with C^* moved along, and noise on
/// B_d. Relative magnitude per matrix.
inline StateSpaceSystem perturb_passive(const StateSpaceSystem& sys, double magnitude,
                                        std::mt19937_64& rng) {
    // Real systems stay real under real perturbations.
    const bool keep_real = detail::effectively_real(sys.A) && detail::effectively_real(sys.B) &&
                           detail::effectively_real(sys.C);
    std::normal_distribution<double> dist(0.0, 1.0);
    auto noise = [&](Index r, Index c) {
        Mat m(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j)
                m(i, j) = keep_real ? Complex(dist(rng), 0.0) : Complex(dist(rng), dist(rng));
        return m;
    };
    const Mat w = noise(sys.n(), sys.n());
    Mat skew = 0.5 * (w - w.adjoint());
    skew *= magnitude * sys.A.norm() / std::max(skew.norm(), 1e-300);
    Mat db = noise(sys.n(), sys.m());
    db *= magnitude * sys.B.norm() / std::max(db.norm(), 1e-300);

    const Mat a = sys.A + skew;
    const Mat b = sys.B + db;
    const Mat c = sys.C + db.adjoint();  // keeps B - C^* unchanged
    std::optional<Mat> bd = sys.Bd;
    if (bd) {
        Mat dbd = noise(bd->rows(), bd->cols());
        dbd *= magnitude * bd->norm() / std::max(dbd.norm(), 1e-300);
        *bd += dbd;
    }
    return StateSpaceSystem(a, b, bd, c, sys.D, sys.label + "+perturbed");
}

}  // namespace reglab

#endif  // REGLAB_REGULATION_HPP
