#ifndef REGLAB_STABILITY_HPP
#define REGLAB_STABILITY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "reglab/closed_loop.hpp"
#include "reglab/decay.hpp"
#include "reglab/parallel.hpp"
#include "reglab/regulation.hpp"

namespace reglab {

struct InsufficientPeaks : Error {
    using Error::Error;
};

inline double spectral_abscissa(const Mat& a) {
    const Vec eigs = spectrum(a);
    double abscissa = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < eigs.size(); ++i) abscissa = std::max(abscissa, eigs(i).real());
    return abscissa;
}

/// Frequency sweep of ||R(i w, A)||; flagged points sit on the spectrum.
struct ResolventScan {
    std::vector<double> omegas;
    std::vector<double> norms;
    std::vector<char> flags;

    size_t size() const { return omegas.size(); }
};

struct ScanOptions {
    size_t base_samples = 400;       // log-spaced backbone
    size_t cluster_points = 25;      // extra points per refinement cluster
    double cluster_halfwidth = 0.25; // cluster radius around each listed frequency
    bool geometric_clusters = true;  // offsets shrink dyadically toward the center
    unsigned threads = 0;            // 0 = library default
};

/// Imaginary parts of the near-axis spectrum of A inside [lo, hi]; the right
/// refinement targets for resolvent scans, since resonance peaks sit at the
/// eigenfrequencies and can be much narrower than any uniform grid.
inline std::vector<double> resonance_frequencies(const Mat& a, double lo, double hi,
                                                 double max_damping = 1e300) {
    const Vec eigs = spectrum(a);
    std::vector<double> out;
    for (Index i = 0; i < eigs.size(); ++i) {
        if (std::abs(eigs(i).real()) > max_damping) continue;
        const double w = eigs(i).imag();
        if (w >= lo && w <= hi) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline ResolventScan scan_resolvent_matrix(const Mat& a, double omega_min, double omega_max,
                                           const std::vector<double>& refine_near,
                                           const ScanOptions& opts = {}) {
    if (!(omega_min > 0.0) || !(omega_max > omega_min))
        throw InvalidArgument("scan_resolvent: need 0 < omega_min < omega_max");
    if (opts.base_samples < 2) throw InvalidArgument("scan_resolvent: need >= 2 samples");
    std::vector<double> grid;
    grid.reserve(opts.base_samples + refine_near.size() * opts.cluster_points);
    const double llo = std::log(omega_min), lhi = std::log(omega_max);
    for (size_t i = 0; i < opts.base_samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(opts.base_samples - 1);
        grid.push_back(std::exp(llo + t * (lhi - llo)));
    }
    for (double w0 : refine_near) {
        if (opts.cluster_points == 0) continue;
        if (w0 >= omega_min && w0 <= omega_max) grid.push_back(w0);
        for (size_t i = 0; i + 1 < opts.cluster_points; ++i) {
            double offset;
            if (opts.geometric_clusters) {
                // Dyadic shrink towards the center resolves narrow resonances.
                offset = opts.cluster_halfwidth * std::pow(2.0, -double(i / 2));
            } else {
                const double t =
                    static_cast<double>(i / 2) / std::max<double>(1.0, (opts.cluster_points - 2) / 2);
                offset = opts.cluster_halfwidth * std::max(t, 1e-3);
            }
            const double w = w0 + (i % 2 == 0 ? offset : -offset);
            if (w >= omega_min && w <= omega_max) grid.push_back(w);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a_, double b_) { return std::abs(a_ - b_) < 1e-13; }),
               grid.end());

    ResolventScan scan;
    scan.omegas = grid;
    scan.norms.assign(grid.size(), 0.0);
    scan.flags.assign(grid.size(), 0);
    const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 1.0;
    parallel_for(
        grid.size(),
        [&](size_t i) {
            const ResolventValue rv = resolvent_value(a, grid[i], scale);
            scan.norms[i] = rv.norm;
            scan.flags[i] = rv.spectrum_hit ? 1 : 0;
        },
        opts.threads);
    return scan;
}

inline ResolventScan scan_resolvent(const ClosedLoopSystem& cl, double omega_min, double omega_max,
                                    size_t samples, const std::vector<double>& refine_near,
                                    const ScanOptions& base_opts = {}) {
    ScanOptions opts = base_opts;
    opts.base_samples = samples;
    return scan_resolvent_matrix(cl.Ae, omega_min, omega_max, refine_near, opts);
}

struct GrowthFit {
    double alpha = 0.0;
    double rms_residual = 0.0;
    size_t peaks_used = 0;
    bool envelope_degenerate = false;  // fewer than 3 interior maxima; fit on all points
    double intercept = 0.0;            // log M0 of the envelope law M0 w^alpha
};

/// Least-squares slope of log(peak norm) against log(omega) over the local
/// maxima of the scan; the resolvent dips between controller modes, so the
/// upper envelope is what the majorant M tracks. Monotone scans have no
/// interior maxima and the fit then uses every unflagged point.
inline GrowthFit fit_growth_exponent(const ResolventScan& scan, double window_lo,
                                     double window_hi) {
    std::vector<size_t> in_window;
    for (size_t i = 0; i < scan.size(); ++i) {
        if (scan.flags[i]) continue;
        if (scan.omegas[i] < window_lo || scan.omegas[i] > window_hi) continue;
        in_window.push_back(i);
    }
    std::vector<size_t> peaks;
    for (size_t j = 1; j + 1 < in_window.size(); ++j) {
        const double prev = scan.norms[in_window[j - 1]];
        const double here = scan.norms[in_window[j]];
        const double next = scan.norms[in_window[j + 1]];
        if (here >= prev && here >= next) peaks.push_back(in_window[j]);
    }
    GrowthFit out;
    const std::vector<size_t>* used = &peaks;
    if (peaks.size() < 3) {
        if (in_window.size() < 3)
            throw InsufficientPeaks("fit_growth_exponent: fewer than 3 usable points in window");
        used = &in_window;
        out.envelope_degenerate = true;
    }
    std::vector<double> lw, ln;
    for (size_t idx : *used) {
        lw.push_back(std::log(scan.omegas[idx]));
        ln.push_back(std::log(scan.norms[idx]));
    }
    const LineFit fit = fit_line(lw, ln);
    out.alpha = fit.slope;
    out.rms_residual = fit.rms_residual;
    out.peaks_used = used->size();
    out.intercept = fit.intercept;
    return out;
}

/// Decay classification from a scan plus the spectral abscissa: bounded
/// envelope with a negative abscissa is exponential, a clean power law is
/// polynomial, anything else falls back to the tabulated M_log rate.
inline DecayModel predict_decay(const ResolventScan& scan, double abscissa,
                                double flat_alpha_threshold = 0.15) {
    DecayModel model;
    model.band_lo = scan.omegas.empty() ? 0.0 : scan.omegas.front();
    model.band_hi = scan.omegas.empty() ? 0.0 : scan.omegas.back();
    bool flagged = std::any_of(scan.flags.begin(), scan.flags.end(), [](char f) { return f; });
    std::optional<GrowthFit> fit;
    try {
        fit = fit_growth_exponent(scan, model.band_lo, model.band_hi);
    } catch (const InsufficientPeaks&) {
    }
    if (!flagged && abscissa < 0.0 && fit && fit->alpha < flat_alpha_threshold) {
        model.kind = DecayKind::Exponential;
        model.rate = -abscissa;
        model.m_e = *std::max_element(scan.norms.begin(), scan.norms.end());
        model.residual = fit->rms_residual;
        return model;
    }
    if (fit && fit->alpha >= flat_alpha_threshold && fit->rms_residual < 1.0) {
        model.kind = DecayKind::Polynomial;
        model.alpha = fit->alpha;
        model.m_e = std::exp(fit->intercept);
        model.residual = fit->rms_residual;
        return model;
    }
    model.kind = DecayKind::NonUniform;
    for (size_t i = 0; i < scan.size(); ++i) {
        if (scan.flags[i]) continue;
        // Keep an increasing majorant of the scan.
        const double v = scan.norms[i];
        if (model.table.value.empty() || v > model.table.value.back()) {
            model.table.omega.push_back(scan.omegas[i]);
            model.table.value.push_back(v);
        }
    }
    return model;
}

inline DecayModel predict_decay(double alpha) {
    if (alpha <= 0.0) throw InvalidArgument("predict_decay: polynomial rate needs alpha > 0");
    DecayModel model;
    model.kind = DecayKind::Polynomial;
    model.alpha = alpha;
    return model;
}

/// Measured decay of the homogeneous semigroup from a smoothed state
/// x_0 = A^{-1} y_0: log-log and log-linear fits of ||x(t)|| over [T/4, T].
struct EmpiricalDecay {
    DecayKind better = DecayKind::Exponential;
    double exponential_rate = 0.0;
    double polynomial_alpha = 0.0;
    double exp_residual = 0.0;
    double poly_residual = 0.0;
    TrajectoryResult trajectory;
};

inline EmpiricalDecay empirical_decay(const Mat& a, double t_final, double dt, unsigned seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec y0(a.rows());
    for (Index i = 0; i < y0.size(); ++i) y0(i) = Complex(dist(rng), dist(rng));
    y0.normalize();
    Vec x0;
    try {
        x0 = solve_linear(a, Mat(y0));
    } catch (const SingularMatrix&) {
        throw InvalidArgument("empirical_decay: A is singular, no smooth initial state");
    }
    EmpiricalDecay out;
    out.trajectory = simulate_homogeneous(a, x0, t_final, dt);

    std::vector<double> t, logt, logn;
    for (size_t i = 0; i < out.trajectory.times.size(); ++i) {
        const double ti = out.trajectory.times[i];
        if (ti < 0.25 * t_final || ti <= 0.0) continue;
        const double v = out.trajectory.state_norms[i];
        if (v <= 1e-300) continue;
        t.push_back(ti);
        logt.push_back(std::log(ti));
        logn.push_back(std::log(v));
    }
    if (t.size() < 10) throw InsufficientData("empirical_decay: trajectory too short");
    const LineFit exp_fit = fit_line(t, logn);
    const LineFit poly_fit = fit_line(logt, logn);
    out.exponential_rate = -exp_fit.slope;
    out.polynomial_alpha = poly_fit.slope < -1e-9 ? -1.0 / poly_fit.slope : 0.0;
    out.exp_residual = exp_fit.rms_residual;
    out.poly_residual = poly_fit.rms_residual;
    out.better = exp_fit.rms_residual <= poly_fit.rms_residual ? DecayKind::Exponential
                                                               : DecayKind::Polynomial;
    return out;
}

inline EmpiricalDecay empirical_decay(const ClosedLoopSystem& cl, double t_final, double dt,
                                      unsigned seed = 1) {
    return empirical_decay(cl.Ae, t_final, dt, seed);
}

/// Conditions for strong closed-loop stability, checked numerically for the
/// pre-stabilized plant and the controller with feedthrough D_c1:
///  (1) re P_S(i w_k) > 0 at every controller frequency,
///  (2) I + P G invertible wherever re G(i w) vanishes on the grid,
///  (3) i w_k stays off sigma(A_c - B_c D_0 (I + D_c1 D_0)^{-1} C_c) for
///      sampled D_0 with re D_0 > 0.
struct StrongStabilityReport {
    struct FrequencyCheck {
        double omega = 0.0;
        double min_re_p = 0.0;
        bool pass = false;
    };
    std::vector<FrequencyCheck> positivity;       // (1)
    bool positivity_pass = false;
    bool inversion_pass = true;                   // (2)
    size_t inversion_points_checked = 0;
    bool inversion_vacuous = false;
    bool detuning_pass = true;                    // (3)
    double min_detuning_margin = 0.0;

    bool all_pass() const { return positivity_pass && inversion_pass && detuning_pass; }
};

inline StrongStabilityReport check_strong_hypotheses(const StateSpaceSystem& plant_s,
                                                     const ControllerRealization& ctrl,
                                                     const std::vector<double>& grid,
                                                     double tol = 1e-9) {
    StrongStabilityReport rep;
    rep.positivity_pass = true;
    for (double wk : ctrl.frequencies) {
        StrongStabilityReport::FrequencyCheck chk;
        chk.omega = wk;
        chk.min_re_p = min_hermitian_eig(transfer(plant_s, Complex(0.0, wk)));
        chk.pass = chk.min_re_p > tol;
        rep.positivity_pass = rep.positivity_pass && chk.pass;
        rep.positivity.push_back(chk);
    }

    const Index p = ctrl.p();
    bool any_resG_zero = false;
    for (double w : grid) {
        bool near_mode = false;
        for (double wk : ctrl.frequencies)
            if (std::abs(w - wk) < 1e-6 * (1.0 + std::abs(wk))) near_mode = true;
        if (near_mode) continue;
        const Mat g = controller_transfer(ctrl, Complex(0.0, w), ctrl.Dc1);
        if (min_hermitian_eig(g) > tol * (1.0 + operator_norm(g))) continue;
        any_resG_zero = true;
        ++rep.inversion_points_checked;
        const Mat pv = transfer(plant_s, Complex(0.0, w));
        const Mat m = Mat::Identity(p, p) + pv * g;
        if (min_singular_value(m) <= tol * (1.0 + operator_norm(m))) rep.inversion_pass = false;
    }
    rep.inversion_vacuous = !any_resG_zero;

    rep.min_detuning_margin = std::numeric_limits<double>::infinity();
    std::vector<Mat> d0_samples = {0.3 * Mat::Identity(p, p), Mat::Identity(p, p),
                                   3.0 * Mat::Identity(p, p)};
    {
        Mat mixed = Mat::Identity(p, p);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j) mixed(i, j) += Complex(0.1 * double((i * 3 + j) % 5), 0.05);
        d0_samples.push_back(0.5 * (mixed + mixed.adjoint()) +
                             Mat::Identity(p, p));  // PD, non-scalar
    }
    for (const Mat& d0 : d0_samples) {
        const Mat d1 =
            (solve_linear(Mat((Mat::Identity(p, p) + ctrl.Dc1 * d0).transpose()), d0.transpose()))
                .transpose();  // D_0 (I + D_c1 D_0)^{-1}
        const Mat afb = ctrl.Ac - ctrl.Bc * d1 * ctrl.Cc;
        const double scale = afb.cwiseAbs().maxCoeff();
        for (double wk : ctrl.frequencies) {
            Mat shifted = -afb;
            shifted.diagonal().array() += Complex(0.0, wk);
            const double margin = min_singular_value(shifted) / (scale > 0 ? scale : 1.0);
            rep.min_detuning_margin = std::min(rep.min_detuning_margin, margin);
            if (margin <= 1e-10) rep.detuning_pass = false;
        }
    }
    return rep;
}

/// Conditions for exponential closed-loop stability over a frequency set
/// Omega (union of intervals): the controller spectrum lies in i Omega,
/// re P_S >= gamma on Omega, and outside Omega each grid point satisfies
/// either ||G P|| <= delta < 1 or gamma(w) + d_c(w) >= gamma_0.
struct Interval {
    double lo = 0.0, hi = 0.0;
    bool contains(double w) const { return w >= lo && w <= hi; }
};

struct ExponentialStabilityReport {
    bool spectrum_inside = true;
    bool gamma_on_omega_pass = true;
    double min_re_p_on_omega = std::numeric_limits<double>::infinity();
    bool condition2_pass = true;
    size_t outside_points = 0;
    double sup_resolvent_ac_outside = 0.0;

    bool all_pass() const { return spectrum_inside && gamma_on_omega_pass && condition2_pass; }
};

inline ExponentialStabilityReport check_exponential_hypotheses(
    const StateSpaceSystem& plant_s, const ControllerRealization& ctrl,
    const std::vector<Interval>& omega_set, double gamma, double delta, double gamma0,
    const std::vector<double>& grid, double tol = 1e-9) {
    if (!(delta < 1.0)) throw InvalidArgument("check_exponential_hypotheses: need delta < 1");
    ExponentialStabilityReport rep;
    auto inside = [&omega_set](double w) {
        for (const auto& iv : omega_set)
            if (iv.contains(w)) return true;
        return false;
    };

    const Vec eigs = spectrum(ctrl.Ac);
    const double scale = ctrl.Ac.cwiseAbs().maxCoeff();
    for (Index i = 0; i < eigs.size(); ++i) {
        if (std::abs(eigs(i).real()) <= 1e-9 * (scale > 0 ? scale : 1.0) &&
            !inside(eigs(i).imag()))
            rep.spectrum_inside = false;
    }

    for (const auto& iv : omega_set) {
        for (double w : {iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi}) {
            const double re_p = min_hermitian_eig(transfer(plant_s, Complex(0.0, w)));
            rep.min_re_p_on_omega = std::min(rep.min_re_p_on_omega, re_p);
            if (re_p < gamma - tol) rep.gamma_on_omega_pass = false;
        }
    }

    for (double w : grid) {
        if (inside(w)) continue;
        ++rep.outside_points;
        Mat shifted = -ctrl.Ac;
        shifted.diagonal().array() += Complex(0.0, w);
        const double smin = min_singular_value(shifted);
        if (smin > 0.0) rep.sup_resolvent_ac_outside =
            std::max(rep.sup_resolvent_ac_outside, 1.0 / smin);
        const Mat pv = transfer(plant_s, Complex(0.0, w));
        const Mat g = controller_transfer(ctrl, Complex(0.0, w), ctrl.Dc1);
        const double gp = operator_norm(Mat(g * pv));
        const double margin = min_hermitian_eig(pv) + min_hermitian_eig(g);
        if (!(gp <= delta || margin >= gamma0 - tol)) rep.condition2_pass = false;
    }
    return rep;
}

/// Hypotheses of the non-uniform stability theorem for diagonal controllers:
/// pseudoinverse growth of the mode gains against g, a uniform frequency gap
/// (h == 1) or a caller-supplied h, and re P_S >= gamma on the Omega_eps
/// clusters; emits the majorant table M = M0 g h / gamma.
struct NonUniformReport {
    bool gain_bound_pass = true;      // ||(C_c^k)^+||^2 <= g(|w_k|)
    bool uniform_gap = true;
    bool h_supplied_or_gap = true;
    bool gamma_pass = true;
    double min_gap = std::numeric_limits<double>::infinity();
    double predicted_alpha = 0.0;     // slope of log M over log w
    MTable m_table;

    bool all_pass() const { return gain_bound_pass && h_supplied_or_gap && gamma_pass; }
};

inline NonUniformReport check_nonuniform_hypotheses(
    const StateSpaceSystem& plant_s, const ControllerRealization& ctrl, double eps,
    const std::function<double(double)>& gamma, const std::function<double(double)>& g,
    const std::function<double(double)>& h_or_null = nullptr, double omega_gamma = 0.0,
    double m0 = 1.0) {
    if (ctrl.recipe != Recipe::Diagonal)
        throw InvalidArgument("check_nonuniform_hypotheses: diagonal recipe required");
    NonUniformReport rep;

    std::vector<double> freqs = ctrl.frequencies;
    std::sort(freqs.begin(), freqs.end());
    for (size_t i = 0; i + 1 < freqs.size(); ++i)
        rep.min_gap = std::min(rep.min_gap, freqs[i + 1] - freqs[i]);
    rep.uniform_gap = rep.min_gap > 1e-9;
    std::function<double(double)> h = h_or_null;
    if (!h) {
        if (!rep.uniform_gap) {
            rep.h_supplied_or_gap = false;  // no gap and no user h: cannot proceed
        }
        h = [](double) { return 1.0; };
    }

    for (const auto& mode : ctrl.modes) {
        if (mode.stabilized) continue;
        const double pinv_sq = std::pow(pseudoinverse_norm(mode.gain), 2.0);
        if (pinv_sq > g(std::abs(mode.omega)) * (1.0 + 1e-9)) rep.gain_bound_pass = false;
    }

    // For real plants re P_S(-i w) = re P_S(i w); skip the mirrored modes.
    const bool plant_real = plant_s.A.imag().cwiseAbs().maxCoeff() == 0.0 &&
                            plant_s.B.imag().cwiseAbs().maxCoeff() == 0.0 &&
                            plant_s.C.imag().cwiseAbs().maxCoeff() == 0.0;
    for (const auto& mode : ctrl.modes) {
        if (mode.stabilized) continue;
        if (std::abs(mode.omega) < omega_gamma) continue;
        if (plant_real && mode.omega < 0.0) continue;
        for (double off : {-0.99 * eps, -0.5 * eps, 0.0, 0.5 * eps, 0.99 * eps}) {
            const double w = mode.omega + off;
            const double re_p = min_hermitian_eig(transfer(plant_s, Complex(0.0, w)));
            if (re_p < gamma(std::abs(w))) rep.gamma_pass = false;
        }
    }

    // Majorant over the retained band; the growth exponent is fitted on the
    // upper half of the band where the asymptotic law dominates.
    std::vector<double> abs_freqs;
    for (double w : freqs)
        if (std::abs(w) > 1e-12) abs_freqs.push_back(std::abs(w));
    std::sort(abs_freqs.begin(), abs_freqs.end());
    abs_freqs.erase(std::unique(abs_freqs.begin(), abs_freqs.end()), abs_freqs.end());
    std::vector<double> logw, logm;
    for (double w : abs_freqs) {
        const double m = m0 * g(w) * h(w) / gamma(w);
        if (!rep.m_table.omega.empty() && w <= rep.m_table.omega.back()) continue;
        rep.m_table.omega.push_back(w);
        rep.m_table.value.push_back(m);
        logw.push_back(std::log(w));
        logm.push_back(std::log(m));
    }
    if (logw.size() >= 4) {
        const size_t half = logw.size() / 2;
        rep.predicted_alpha =
            fit_line(std::vector<double>(logw.begin() + half, logw.end()),
                     std::vector<double>(logm.begin() + half, logm.end()))
                .slope;
    } else if (logw.size() >= 2) {
        rep.predicted_alpha = fit_line(logw, logm).slope;
    }
    return rep;
}

/// Spectral abscissa and resolvent growth of the self-coupled controller
/// A_c^{cl} = A_c - B_c (I + D_c)^{-1} C_c, with an optional comparison
/// against a predicted envelope M0 g h.
struct FeedbackDecayReport {
    double abscissa = 0.0;
    ResolventScan scan;
    GrowthFit fit;
    double predicted_alpha = 0.0;  // 0 when no laws were supplied
};

inline FeedbackDecayReport check_feedback_decay(
    const ControllerRealization& ctrl, double omega_min, double omega_max,
    const ScanOptions& opts = {}, const std::function<double(double)>& g = nullptr,
    const std::function<double(double)>& h = nullptr) {
    if (ctrl.recipe != Recipe::Diagonal && ctrl.recipe != Recipe::FinDim)
        throw InvalidArgument("check_feedback_decay: diagonal or fin-dim recipe required");
    const Index p = ctrl.p();
    const Mat inner = solve_linear(Mat(Mat::Identity(p, p) + ctrl.Dc()), Mat(ctrl.Cc));
    const Mat acl = ctrl.Ac - ctrl.Bc * inner;

    FeedbackDecayReport rep;
    rep.abscissa = spectral_abscissa(acl);
    std::vector<double> refine;
    for (double w : ctrl.frequencies)
        if (w >= omega_min && w <= omega_max) refine.push_back(w);
    rep.scan = scan_resolvent_matrix(acl, omega_min, omega_max, refine, opts);
    rep.fit = fit_growth_exponent(rep.scan, omega_min, omega_max);
    if (g && h) {
        std::vector<double> lw, lm;
        for (double w : refine) {
            if (w <= 0.0) continue;
            lw.push_back(std::log(w));
            lm.push_back(std::log(g(w) * h(w)));
        }
        if (lw.size() >= 2) rep.predicted_alpha = fit_line(lw, lm).slope;
    }
    return rep;
}

/// Necessary-condition table for exponential stabilizability:
/// ||P_S(i w_k)^{-1}|| over the retained frequencies. Unbounded growth across
/// the truncation rules exponential closed-loop stability out.
struct NecessityReport {
    std::vector<std::pair<double, double>> table;  // (omega_k, ||P_S^{-1}||)
    bool monotone_increasing = true;
    double growth_ratio = 1.0;           // last / first
    double tail_growth = 1.0;            // last / three-quarter point
    double sqrt_law_slope = 0.0;         // fit of value against sqrt(omega)
    enum class Verdict { UnboundedGrowth, Bounded, Inconclusive } verdict = Verdict::Inconclusive;

    bool exponential_impossible() const { return verdict == Verdict::UnboundedGrowth; }
};

/// Growth "without bound across the truncation" means the table is still
/// rising at the band edge; a saturating table (the resolved part of a
/// bounded sup) counts as bounded even when it grew early on.
inline NecessityReport check_exp_necessity(const StateSpaceSystem& plant_s,
                                           const std::vector<double>& freqs,
                                           double unbounded_ratio = 1.15,
                                           double bounded_ratio = 1.10) {
    NecessityReport rep;
    std::vector<double> sorted = freqs;
    std::sort(sorted.begin(), sorted.end());
    for (double w : sorted) {
        const Mat ps = transfer(plant_s, Complex(0.0, w));
        const Mat inv = detail::invert_transfer(ps, w);
        rep.table.emplace_back(w, operator_norm(inv));
    }
    for (size_t i = 1; i < rep.table.size(); ++i) {
        if (rep.table[i].second < rep.table[i - 1].second * (1.0 - 1e-9))
            rep.monotone_increasing = false;
    }
    if (rep.table.size() >= 2 && rep.table.front().second > 0.0) {
        rep.growth_ratio = rep.table.back().second / rep.table.front().second;
        const size_t tail_idx = rep.table.size() * 3 / 4;
        if (tail_idx < rep.table.size() && rep.table[tail_idx].second > 0.0)
            rep.tail_growth = rep.table.back().second / rep.table[tail_idx].second;
        std::vector<double> sq, val;
        for (const auto& [w, v] : rep.table) {
            if (w <= 0.0) continue;
            sq.push_back(std::sqrt(w));
            val.push_back(v);
        }
        if (sq.size() >= 2) rep.sqrt_law_slope = fit_line(sq, val).slope;
    }
    if (rep.monotone_increasing && rep.growth_ratio >= unbounded_ratio &&
        rep.tail_growth >= 1.02 && rep.sqrt_law_slope > 0.0)
        rep.verdict = NecessityReport::Verdict::UnboundedGrowth;
    else if (rep.growth_ratio <= bounded_ratio || rep.tail_growth <= 1.005)
        rep.verdict = NecessityReport::Verdict::Bounded;
    return rep;
}

}  // namespace reglab

#endif  // REGLAB_STABILITY_HPP
