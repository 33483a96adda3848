#ifndef REGLAB_CONTROLLERS_HPP
#define REGLAB_CONTROLLERS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "reglab/numerics.hpp"
#include "reglab/signals.hpp"
#include "reglab/state_space.hpp"

namespace reglab {

struct SingularGain : Error {
    using Error::Error;
};
struct ModeNotRetained : Error {
    using Error::Error;
};

enum class Recipe { FinDim, FinDimReal, Transport, Diagonal };

inline const char* recipe_name(Recipe r) {
    switch (r) {
        case Recipe::FinDim: return "fin_dim";
        case Recipe::FinDimReal: return "fin_dim_real";
        case Recipe::Transport: return "transport";
        case Recipe::Diagonal: return "diagonal";
    }
    return "unknown";
}

/// Error-feedback controller realization (A_c, B_c, C_c, D_c1 + D_c2).
/// D_c2 is the feedthrough share used to pre-stabilize the plant; the
/// interconnection always consumes the sum.
struct ControllerRealization {
    /// One internal-model mode: ker(i w - A_c) restricted block with the
    /// output gain expressed in an orthonormal kernel basis.
    struct Mode {
        double omega = 0.0;
        Index offset = 0;  // first state index of the block
        Index dim = 0;     // block size (= p for the complex recipes)
        Mat gain;          // C_c restricted to the kernel, p x p
        Mat kernel_basis;  // n_c x p orthonormal kernel basis
        bool stabilized = false;
    };

    Mat Ac, Bc, Cc, Dc1, Dc2;
    Recipe recipe = Recipe::FinDim;
    std::vector<double> frequencies;  // sigma(A_c) on the imaginary axis
    std::vector<Mode> modes;
    double tau = 0.0;  // period, transport recipe only

    Index nc() const { return Ac.rows(); }
    Index p() const { return Cc.rows(); }
    Mat Dc() const { return Dc1 + Dc2; }

    const Mode* mode_at(double omega, double tol = 1e-9) const {
        for (const auto& m : modes) {
            if (!m.stabilized && std::abs(m.omega - omega) <= tol * (1.0 + std::abs(omega)))
                return &m;
        }
        return nullptr;
    }

    /// Realization as a plain state-space system with the given feedthrough.
    StateSpaceSystem as_system(const Mat& feedthrough) const {
        return StateSpaceSystem(Ac, Bc, Cc, feedthrough, std::string("controller:") +
                                                             recipe_name(recipe));
    }
};

/// G(lambda) = C_c R(lambda, A_c) B_c + feedthrough.
inline Mat controller_transfer(const ControllerRealization& ctrl, Complex lambda,
                               const Mat& feedthrough) {
    Mat shifted = -ctrl.Ac;
    shifted.diagonal().array() += lambda;
    try {
        return ctrl.Cc * solve_linear(shifted, ctrl.Bc) + feedthrough;
    } catch (const SingularMatrix& e) {
        throw SpectrumHit(std::string("controller_transfer: lambda in spectrum of A_c (") +
                          e.what() + ")");
    }
}

namespace detail {

inline void check_feedthrough(const Mat& dc1, const Mat& dc2, Index p, bool dc1_strict) {
    if (dc1.rows() != p || dc1.cols() != p || dc2.rows() != p || dc2.cols() != p)
        throw InvalidArgument("controller feedthrough blocks must be p x p");
    const double tol = 1e-12;
    if (dc1_strict) {
        if (min_hermitian_eig(dc1) <= tol)
            throw InvalidArgument("controller: D_c1 must be positive definite");
    } else if (min_hermitian_eig(dc1) < -tol) {
        throw InvalidArgument("controller: D_c1 must be positive semidefinite");
    }
    if (min_hermitian_eig(dc2) < -tol)
        throw InvalidArgument("controller: D_c2 must be positive semidefinite");
}

/// Complex block-diagonal internal model A_c = diag(i w_k I_p) with output
/// blocks C_c^k and B_c = C_c^*.
inline ControllerRealization build_complex_modal(const std::vector<double>& freqs,
                                                 const std::vector<Mat>& gains, Index p, Mat dc1,
                                                 Mat dc2, Recipe recipe, bool require_invertible) {
    if (freqs.size() != gains.size())
        throw InvalidArgument("modal controller: one gain block per frequency required");
    const Index q = static_cast<Index>(freqs.size());
    ControllerRealization ctrl;
    ctrl.recipe = recipe;
    ctrl.Dc1 = std::move(dc1);
    ctrl.Dc2 = std::move(dc2);
    ctrl.Ac = Mat::Zero(q * p, q * p);
    ctrl.Cc = Mat::Zero(p, q * p);
    for (Index k = 0; k < q; ++k) {
        const Mat& g = gains[static_cast<size_t>(k)];
        if (g.rows() != p || g.cols() != p)
            throw InvalidArgument("modal controller: gain blocks must be p x p");
        if (require_invertible && min_singular_value(g) <= 1e-12 * (1.0 + operator_norm(g)))
            throw SingularGain("modal controller: gain block " + std::to_string(k) +
                               " is singular");
        ctrl.Ac.block(k * p, k * p, p, p) =
            Complex(0.0, freqs[static_cast<size_t>(k)]) * Mat::Identity(p, p);
        ctrl.Cc.block(0, k * p, p, p) = g;
        ControllerRealization::Mode mode;
        mode.omega = freqs[static_cast<size_t>(k)];
        mode.offset = k * p;
        mode.dim = p;
        mode.gain = g;
        mode.kernel_basis = Mat::Zero(q * p, p);
        mode.kernel_basis.block(k * p, 0, p, p) = Mat::Identity(p, p);
        ctrl.modes.push_back(std::move(mode));
    }
    ctrl.Bc = ctrl.Cc.adjoint();
    ctrl.frequencies = freqs;
    std::sort(ctrl.frequencies.begin(), ctrl.frequencies.end());
    for (size_t i = 0; i + 1 < ctrl.frequencies.size(); ++i) {
        if (ctrl.frequencies[i] == ctrl.frequencies[i + 1])
            throw InvalidArgument("modal controller: frequencies must be pairwise distinct");
    }
    return ctrl;
}

}  // namespace detail

/// Finite-dimensional internal-model controller: A_c = diag(i w_k I_p),
/// invertible gains C_c^k, B_c = C_c^*, D_c1 > 0.
inline ControllerRealization build_fin_dim(const std::vector<double>& freqs,
                                           const std::vector<Mat>& gains, Index p, Mat dc1,
                                           Mat dc2) {
    detail::check_feedthrough(dc1, dc2, p, /*dc1_strict=*/true);
    return detail::build_complex_modal(freqs, gains, p, std::move(dc1), std::move(dc2),
                                       Recipe::FinDim, /*require_invertible=*/true);
}

inline ControllerRealization build_fin_dim(const std::vector<double>& freqs,
                                           const std::vector<double>& scalar_gains, Index p,
                                           double dc1, double dc2) {
    std::vector<Mat> gains;
    gains.reserve(scalar_gains.size());
    for (double g : scalar_gains) gains.push_back(g * Mat::Identity(p, p));
    return build_fin_dim(freqs, gains, p, dc1 * Mat::Identity(p, p), dc2 * Mat::Identity(p, p));
}

/// Real-block variant for real-valued signals: A_c = blkdiag(J_0?, J_1, ...),
/// J_k = [[0, w_k I], [-w_k I, 0]], C_c acting on the first component of each
/// block, B_c = C_c^T. Frequencies are {0?} followed by distinct w_k > 0.
inline ControllerRealization build_fin_dim_real(const std::vector<double>& freqs,
                                                const std::vector<Mat>& gains, Index p, Mat dc1,
                                                Mat dc2) {
    detail::check_feedthrough(dc1, dc2, p, /*dc1_strict=*/true);
    if (freqs.size() != gains.size())
        throw InvalidArgument("build_fin_dim_real: one gain block per frequency required");
    bool has_zero = false;
    for (size_t i = 0; i < freqs.size(); ++i) {
        if (freqs[i] == 0.0) {
            if (i != 0) throw InvalidArgument("build_fin_dim_real: list 0 first when present");
            has_zero = true;
        } else if (freqs[i] <= 0.0) {
            throw InvalidArgument("build_fin_dim_real: frequencies must be positive (0 allowed)");
        }
    }
    ControllerRealization ctrl;
    ctrl.recipe = Recipe::FinDimReal;
    ctrl.Dc1 = std::move(dc1);
    ctrl.Dc2 = std::move(dc2);
    const size_t q = freqs.size();
    const Index nc = (has_zero ? p : 0) + 2 * p * static_cast<Index>(q - (has_zero ? 1 : 0));
    ctrl.Ac = Mat::Zero(nc, nc);
    ctrl.Cc = Mat::Zero(p, nc);
    const Complex im(0.0, 1.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Index offset = 0;
    for (size_t k = 0; k < q; ++k) {
        const Mat& g = gains[k];
        if (g.rows() != p || g.cols() != p)
            throw InvalidArgument("build_fin_dim_real: gain blocks must be p x p");
        if (min_singular_value(g) <= 1e-12 * (1.0 + operator_norm(g)))
            throw SingularGain("build_fin_dim_real: gain block " + std::to_string(k) +
                               " is singular");
        if (g.imag().cwiseAbs().maxCoeff() > 0.0)
            throw InvalidArgument("build_fin_dim_real: gains must be real");
        const double w = freqs[k];
        if (w == 0.0) {
            ctrl.Cc.block(0, offset, p, p) = g;
            ControllerRealization::Mode mode;
            mode.omega = 0.0;
            mode.offset = offset;
            mode.dim = p;
            mode.gain = g;
            mode.kernel_basis = Mat::Zero(nc, p);
            mode.kernel_basis.block(offset, 0, p, p) = Mat::Identity(p, p);
            ctrl.modes.push_back(std::move(mode));
            ctrl.frequencies.push_back(0.0);
            offset += p;
            continue;
        }
        ctrl.Ac.block(offset, offset + p, p, p) = w * Mat::Identity(p, p);
        ctrl.Ac.block(offset + p, offset, p, p) = -w * Mat::Identity(p, p);
        ctrl.Cc.block(0, offset, p, p) = g;
        for (int sign : {+1, -1}) {
            // ker(+-i w - J_k) is spanned by 2^{-1/2} (v, +-i v).
            ControllerRealization::Mode mode;
            mode.omega = sign * w;
            mode.offset = offset;
            mode.dim = 2 * p;
            mode.gain = inv_sqrt2 * g;
            mode.kernel_basis = Mat::Zero(nc, p);
            mode.kernel_basis.block(offset, 0, p, p) = inv_sqrt2 * Mat::Identity(p, p);
            mode.kernel_basis.block(offset + p, 0, p, p) =
                (sign > 0 ? im : -im) * inv_sqrt2 * Mat::Identity(p, p);
            ctrl.modes.push_back(std::move(mode));
            ctrl.frequencies.push_back(sign * w);
        }
        offset += 2 * p;
    }
    ctrl.Bc = ctrl.Cc.transpose();
    std::sort(ctrl.frequencies.begin(), ctrl.frequencies.end());
    return ctrl;
}

inline ControllerRealization build_fin_dim_real(const std::vector<double>& freqs,
                                                const std::vector<double>& scalar_gains, Index p,
                                                double dc1, double dc2) {
    std::vector<Mat> gains;
    gains.reserve(scalar_gains.size());
    for (double g : scalar_gains) gains.push_back(g * Mat::Identity(p, p));
    return build_fin_dim_real(freqs, gains, p, dc1 * Mat::Identity(p, p),
                              dc2 * Mat::Identity(p, p));
}

/// Closed form G_0(lambda) = (1 + e^{-lambda tau}) / (1 - e^{-lambda tau}) + d_sum
/// of the periodic transport channel; validation oracle for build_transport.
inline Complex transport_transfer_exact(Complex lambda, double tau, double d_sum = 0.0) {
    const Complex z = std::exp(-lambda * tau);
    const Complex denom = 1.0 - z;
    if (std::abs(denom) <= 1e-12 * (1.0 + std::abs(z)))
        throw PoleHit("transport_transfer_exact: lambda at a pole 2 pi i k / tau");
    return (1.0 + z) / denom + d_sum;
}

/// Modal truncation of the tau-periodic transport controller: poles at
/// w_k = 2 pi k / tau for |k| <= (N-1)/2, residues matched exactly by
/// B_c^k = C_c^k = sqrt(2/tau) I. The transfer converges to G_0 pointwise
/// (minus the vanishing feedthrough of the dropped tail) as N grows.
inline ControllerRealization build_transport(double tau, Index p, Index n_modes, Mat dc1, Mat dc2) {
    if (tau <= 0.0) throw InvalidArgument("build_transport: tau must be positive");
    if (n_modes < 8) throw InvalidArgument("build_transport: need at least 8 modes");
    detail::check_feedthrough(dc1, dc2, p, /*dc1_strict=*/true);
    const Index half = (n_modes - 1) / 2;
    std::vector<double> freqs;
    std::vector<Mat> gains;
    const double weight = std::sqrt(2.0 / tau);
    for (Index k = -half; k <= half; ++k) {
        freqs.push_back(2.0 * M_PI * static_cast<double>(k) / tau);
        gains.push_back(weight * Mat::Identity(p, p));
    }
    ControllerRealization ctrl = detail::build_complex_modal(
        freqs, gains, p, std::move(dc1), std::move(dc2), Recipe::Transport,
        /*require_invertible=*/true);
    ctrl.tau = tau;
    return ctrl;
}

inline ControllerRealization build_transport(double tau, Index p, Index n_modes, double dc1,
                                             double dc2) {
    return build_transport(tau, p, n_modes, dc1 * Mat::Identity(p, p), dc2 * Mat::Identity(p, p));
}

/// Damp the listed transport modes: A_c <- A_c - B_0 B_0^* with B_0 spanning
/// those mode blocks. Removes exactly {i mu_j} from the imaginary-axis
/// spectrum; used when P(i mu_j) is singular (e.g. mu = 0).
inline ControllerRealization stabilize_transport_modes(ControllerRealization ctrl,
                                                       const std::vector<double>& mus) {
    for (double mu : mus) {
        bool found = false;
        for (auto& mode : ctrl.modes) {
            if (mode.stabilized) continue;
            if (std::abs(mode.omega - mu) <= 1e-9 * (1.0 + std::abs(mu))) {
                ctrl.Ac.block(mode.offset, mode.offset, mode.dim, mode.dim) -=
                    Mat::Identity(mode.dim, mode.dim);
                mode.stabilized = true;
                found = true;
                break;
            }
        }
        if (!found)
            throw ModeNotRetained("stabilize_transport_modes: frequency " + std::to_string(mu) +
                                  " not among the retained modes");
        ctrl.frequencies.erase(
            std::remove_if(ctrl.frequencies.begin(), ctrl.frequencies.end(),
                           [mu](double w) { return std::abs(w - mu) <= 1e-9 * (1.0 + std::abs(mu)); }),
            ctrl.frequencies.end());
    }
    return ctrl;
}

/// Truncated diagonal controller with explicit per-mode gains; the base form
/// behind build_diagonal and the Prop.-style feedback-decay studies.
inline ControllerRealization build_diagonal_custom(const std::vector<double>& freqs,
                                                   const std::vector<Mat>& gains, Index p, Mat dc1,
                                                   Mat dc2) {
    detail::check_feedthrough(dc1, dc2, p, /*dc1_strict=*/false);
    return detail::build_complex_modal(freqs, gains, p, std::move(dc1), std::move(dc2),
                                       Recipe::Diagonal, /*require_invertible=*/true);
}

/// Diagonal controller over indexed frequencies with the weight law
/// B_c^k = c (1 + |k|)^{-1/2 - eps} I and C_c = B_c^*.
inline ControllerRealization build_diagonal(const std::vector<std::pair<int, double>>& indexed_freqs,
                                            Index p, double c, double eps, Mat dc1, Mat dc2) {
    if (indexed_freqs.empty()) throw InvalidArgument("build_diagonal: need at least one mode");
    if (c <= 0.0 || eps <= 0.0) throw InvalidArgument("build_diagonal: c > 0 and eps > 0 required");
    std::vector<double> freqs;
    std::vector<Mat> gains;
    for (const auto& [k, omega] : indexed_freqs) {
        freqs.push_back(omega);
        const double w = c * std::pow(1.0 + std::abs(k), -0.5 - eps);
        gains.push_back(w * Mat::Identity(p, p));
    }
    return build_diagonal_custom(freqs, gains, p, std::move(dc1), std::move(dc2));
}

inline ControllerRealization build_diagonal(Index n_side, double omega_base, Index p, double c,
                                            double eps, double dc1, double dc2) {
    std::vector<std::pair<int, double>> idx;
    for (int k = -static_cast<int>(n_side); k <= static_cast<int>(n_side); ++k)
        idx.emplace_back(k, omega_base * k);
    return build_diagonal(idx, p, c, eps, dc1 * Mat::Identity(p, p), dc2 * Mat::Identity(p, p));
}

/// Internal-model conditions per signal frequency: kernel dimension at least
/// dim Y, injective B_c, and trivial intersection ran(i w - A_c) with ran(B_c).
struct InternalModelReport {
    struct PerFrequency {
        double omega = 0.0;
        bool kernel_dim_ok = false;
        bool range_intersection_trivial = false;
        Index kernel_dim = 0;
    };
    bool bc_injective = false;
    std::vector<PerFrequency> per_frequency;

    bool all_hold() const {
        if (!bc_injective) return false;
        for (const auto& f : per_frequency)
            if (!f.kernel_dim_ok || !f.range_intersection_trivial) return false;
        return true;
    }
};

inline InternalModelReport verify_internal_model(const ControllerRealization& ctrl,
                                                 const SignalSpec& sig, Index p,
                                                 double rank_tol = 1e-8) {
    InternalModelReport rep;
    rep.bc_injective = numerical_rank(ctrl.Bc, rank_tol) == std::min(ctrl.Bc.rows(),
                                                                     ctrl.Bc.cols()) &&
                       ctrl.Bc.cols() <= ctrl.Bc.rows();
    const Index nc = ctrl.nc();
    for (const auto& e : sig.entries()) {
        InternalModelReport::PerFrequency f;
        f.omega = e.omega;
        Mat shifted = -ctrl.Ac;
        shifted.diagonal().array() += Complex(0.0, e.omega);
        const Index rank_a = numerical_rank(shifted, rank_tol);
        f.kernel_dim = nc - rank_a;
        f.kernel_dim_ok = f.kernel_dim >= p;
        Mat stacked(nc, nc + ctrl.Bc.cols());
        stacked << shifted, ctrl.Bc;
        const Index rank_b = numerical_rank(ctrl.Bc, rank_tol);
        f.range_intersection_trivial = numerical_rank(stacked, rank_tol) == rank_a + rank_b;
        rep.per_frequency.push_back(f);
    }
    return rep;
}

}  // namespace reglab

#endif  // REGLAB_CONTROLLERS_HPP
