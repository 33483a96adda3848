#ifndef REGLAB_PDE_MODELS_HPP
#define REGLAB_PDE_MODELS_HPP

#include <cmath>
#include <functional>
#include <string>

#include "reglab/numerics.hpp"
#include "reglab/state_space.hpp"

namespace reglab {

enum class PdeModel { WaveBoundary, WaveDistributed, Heat2D };

inline const char* pde_model_name(PdeModel m) {
    switch (m) {
        case PdeModel::WaveBoundary: return "wave-boundary";
        case PdeModel::WaveDistributed: return "wave-distributed";
        case PdeModel::Heat2D: return "heat-2d";
    }
    return "unknown";
}

/// Closed-form transfer functions of the three example plants, used as
/// validation oracles for the discretizations:
///   wave-boundary:    (1 + e^{-2 lambda}) / (1 - e^{-2 lambda})
///   wave-distributed: 4 lambda^{-3} (lambda^2/3 + 1 - lambda coth(lambda))
///   heat-2d:          coth(sqrt(lambda)) / sqrt(lambda)
inline Complex exact_transfer(PdeModel model, Complex lambda) {
    auto coth = [](Complex z) { return std::cosh(z) / std::sinh(z); };
    switch (model) {
        case PdeModel::WaveBoundary: {
            const Complex z = std::exp(-2.0 * lambda);
            if (std::abs(1.0 - z) <= 1e-12 * (1.0 + std::abs(z)))
                throw PoleHit("exact_transfer: wave-boundary pole at i pi k");
            return (1.0 + z) / (1.0 - z);
        }
        case PdeModel::WaveDistributed: {
            if (std::abs(lambda) < 1e-3) {
                // Removable singularity at 0: P = 4 lambda / 45 + O(lambda^3).
                return 4.0 * lambda / 45.0 * (1.0 - lambda * lambda * 2.0 / 21.0);
            }
            if (std::abs(std::sinh(lambda)) <= 1e-12)
                throw PoleHit("exact_transfer: wave-distributed pole at i pi k");
            const Complex l2 = lambda * lambda;
            return 4.0 / (l2 * lambda) * (l2 / 3.0 + 1.0 - lambda * coth(lambda));
        }
        case PdeModel::Heat2D: {
            const Complex root = std::sqrt(lambda);
            if (std::abs(root) <= 1e-12 || std::abs(std::sinh(root)) <= 1e-12)
                throw PoleHit("exact_transfer: heat pole");
            return coth(root) / root;
        }
    }
    throw InvalidArgument("exact_transfer: unknown model");
}

/// Boundary-controlled wave w_tt = w_xx on (0,1) with u = -w_x(0), w_x(1) = 0
/// and y = w_t(0), discretized in the Riemann invariants q = w_t - w_x
/// (right-moving) and p = w_t + w_x (left-moving) by first-order upwinding.
/// The state carries the weight sqrt(h/2) so the Euclidean norm is the wave
/// energy norm; the reflections at both ends make the scheme passive with
/// feedthrough D = 1.
struct WaveBoundaryModel {
    StateSpaceSystem sys;
    Index cells = 0;
    double h = 0.0;

    /// State from velocity and stress profiles v0(x) = w_t(x,0), s0(x) = w_x(x,0).
    Vec initial_state(const std::function<double(double)>& v0,
                      const std::function<double(double)>& s0) const {
        Vec x = Vec::Zero(2 * cells);
        const double w = std::sqrt(h / 2.0);
        for (Index i = 0; i < cells; ++i) {
            const double xi = (static_cast<double>(i) + 0.5) * h;
            x(i) = w * (v0(xi) - s0(xi));          // q cells
            x(cells + i) = w * (v0(xi) + s0(xi));  // p cells
        }
        return x;
    }
};

inline WaveBoundaryModel build_wave_boundary_model(Index n) {
    if (n < 8) throw InvalidArgument("build_wave_boundary: need N >= 8");
    const double h = 1.0 / static_cast<double>(n);
    const double inv_h = 1.0 / h;
    RealMat a = RealMat::Zero(2 * n, 2 * n);
    // q block occupies [0, n), p block [n, 2n).
    for (Index i = 0; i < n; ++i) {
        a(i, i) = -inv_h;
        if (i > 0) a(i, i - 1) = inv_h;
        a(n + i, n + i) = -inv_h;
        if (i + 1 < n) a(n + i, n + i + 1) = inv_h;
    }
    a(0, n) = inv_h;          // q inflow at 0 reflects p_1
    a(2 * n - 1, n - 1) = inv_h;  // p inflow at 1 reflects q_N
    RealMat b = RealMat::Zero(2 * n, 1);
    b(0, 0) = std::sqrt(2.0 * inv_h);
    RealMat c = RealMat::Zero(1, 2 * n);
    c(0, n) = std::sqrt(2.0 * inv_h);
    RealMat d = RealMat::Constant(1, 1, 1.0);

    WaveBoundaryModel model{StateSpaceSystem(a.cast<Complex>(), b.cast<Complex>(),
                                             c.cast<Complex>(), d.cast<Complex>(),
                                             "wave-boundary"),
                            n, h};
    return model;
}

inline StateSpaceSystem build_wave_boundary(Index n) { return build_wave_boundary_model(n).sys; }

/// Distributed-control wave w_tt = w_xx + b(x) u with w(0) = w(1) = 0,
/// y = int b w_t and b(x) = 2(1-x), discretized by piecewise-linear finite
/// elements on N interior nodes. The mass matrix is folded into the state by
/// its Cholesky factor, so A is exactly skew and C = B^* holds exactly.
struct WaveFemModel {
    StateSpaceSystem sys;
    Index nodes = 0;
    double h = 0.0;
    RealMat mass_chol;    // L with M = L L^T
    RealMat stiff_chol;   // R with K = R R^T

    /// State from displacement and velocity profiles w0(x), v0(x).
    Vec initial_state(const std::function<double(double)>& w0,
                      const std::function<double(double)>& v0) const {
        RealVec wvec(nodes), vvec(nodes);
        for (Index j = 0; j < nodes; ++j) {
            const double xi = static_cast<double>(j + 1) * h;
            wvec(j) = w0(xi);
            vvec(j) = v0(xi);
        }
        Vec x(2 * nodes);
        x.head(nodes) = (stiff_chol.transpose() * wvec).cast<Complex>();
        x.tail(nodes) = (mass_chol.transpose() * vvec).cast<Complex>();
        return x;
    }
};

inline WaveFemModel build_wave_distributed_model(Index n) {
    if (n < 8) throw InvalidArgument("build_wave_distributed: need N >= 8");
    const double h = 1.0 / static_cast<double>(n + 1);
    RealMat mass = RealMat::Zero(n, n);
    RealMat stiff = RealMat::Zero(n, n);
    RealVec load(n);
    for (Index j = 0; j < n; ++j) {
        mass(j, j) = 2.0 * h / 3.0;
        stiff(j, j) = 2.0 / h;
        if (j + 1 < n) {
            mass(j, j + 1) = mass(j + 1, j) = h / 6.0;
            stiff(j, j + 1) = stiff(j + 1, j) = -1.0 / h;
        }
        const double xi = static_cast<double>(j + 1) * h;
        load(j) = 2.0 * (1.0 - xi) * h;  // exact for linear b against hat functions
    }
    const RealMat l = Eigen::LLT<RealMat>(mass).matrixL();
    const RealMat r = Eigen::LLT<RealMat>(stiff).matrixL();
    const RealMat g = l.triangularView<Eigen::Lower>().solve(r);
    const RealVec b_in = l.triangularView<Eigen::Lower>().solve(load);

    RealMat a = RealMat::Zero(2 * n, 2 * n);
    a.topRightCorner(n, n) = g.transpose();
    a.bottomLeftCorner(n, n) = -g;
    RealMat b = RealMat::Zero(2 * n, 1);
    b.bottomLeftCorner(n, 1) = b_in;
    RealMat c = b.transpose();
    RealMat d = RealMat::Zero(1, 1);

    WaveFemModel model{StateSpaceSystem(a.cast<Complex>(), b.cast<Complex>(), c.cast<Complex>(),
                                        d.cast<Complex>(), "wave-distributed"),
                       n, h, l, r};
    return model;
}

inline StateSpaceSystem build_wave_distributed(Index n) {
    return build_wave_distributed_model(n).sys;
}

/// Heat equation on the unit square with Neumann control on the left edge,
/// Neumann disturbance on the right half of the top edge and zero flux
/// elsewhere; y integrates the state over the control edge. Cell-centered
/// 5-point finite differences with ghost elimination; the boundary quadrature
/// weights make C = B^* exact in the scaled inner product.
struct HeatModel {
    StateSpaceSystem sys;
    Index n_side = 0;
    double h = 0.0;

    Index cell_index(Index i, Index j) const { return j * n_side + i; }

    /// State from a profile x0(x1, x2), sampled at cell centers.
    Vec initial_state(const std::function<double(double, double)>& x0) const {
        Vec x(n_side * n_side);
        for (Index j = 0; j < n_side; ++j) {
            for (Index i = 0; i < n_side; ++i) {
                const double x1 = (static_cast<double>(i) + 0.5) * h;
                const double x2 = (static_cast<double>(j) + 0.5) * h;
                x(cell_index(i, j)) = h * x0(x1, x2);
            }
        }
        return x;
    }
};

inline HeatModel build_heat_2d_model(Index n) {
    if (n < 8) throw InvalidArgument("build_heat_2d: need N >= 8");
    const double h = 1.0 / static_cast<double>(n);
    const double w = 1.0 / (h * h);
    const Index cells = n * n;
    RealMat a = RealMat::Zero(cells, cells);
    auto idx = [n](Index i, Index j) { return j * n + i; };
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            const Index c = idx(i, j);
            if (i > 0) { a(c, idx(i - 1, j)) = w; a(c, c) -= w; }
            if (i + 1 < n) { a(c, idx(i + 1, j)) = w; a(c, c) -= w; }
            if (j > 0) { a(c, idx(i, j - 1)) = w; a(c, c) -= w; }
            if (j + 1 < n) { a(c, idx(i, j + 1)) = w; a(c, c) -= w; }
        }
    }
    RealMat b = RealMat::Zero(cells, 1);
    RealMat c = RealMat::Zero(1, cells);
    for (Index j = 0; j < n; ++j) {
        b(idx(0, j), 0) = 1.0;  // Gamma_1: left edge
        c(0, idx(0, j)) = 1.0;
    }
    RealMat bd = RealMat::Zero(cells, 1);
    for (Index i = 0; i < n; ++i) {
        const double x1 = (static_cast<double>(i) + 0.5) * h;
        if (x1 >= 0.5) bd(idx(i, n - 1), 0) = 1.0;  // Gamma_2: top edge, x1 >= 1/2
    }
    RealMat d = RealMat::Zero(1, 1);

    HeatModel model{StateSpaceSystem(a.cast<Complex>(), b.cast<Complex>(),
                                     std::optional<Mat>(bd.cast<Complex>()), c.cast<Complex>(),
                                     d.cast<Complex>(), "heat-2d"),
                    n, h};
    return model;
}

inline StateSpaceSystem build_heat_2d(Index n) { return build_heat_2d_model(n).sys; }

}  // namespace reglab

#endif  // REGLAB_PDE_MODELS_HPP
