#ifndef REGLAB_CLOSED_LOOP_HPP
#define REGLAB_CLOSED_LOOP_HPP

#include <limits>
#include <optional>
#include <utility>

#include "reglab/controllers.hpp"
#include "reglab/numerics.hpp"
#include "reglab/state_space.hpp"

namespace reglab {

struct FeedthroughLoopSingular : Error {
    using Error::Error;
};

/// Power-preserving interconnection of a plant and an error-feedback
/// controller, driven by w_ext = (w_dist, y_ref):
///   A_e = [ A - B D_c Q1 C      B Q2 C_c            ]   B_e = [ B_d  B D_c Q1 ]
///         [ -B_c Q1 C           A_c - B_c Q1 D C_c  ]         [ 0    B_c Q1   ]
///   C_e = [ -Q1 C   -Q1 D C_c ],  D_e = [ 0  Q1 ]
/// with Q1 = (I + D D_c)^{-1}, Q2 = (I + D_c D)^{-1} and D_c = D_c1 + D_c2.
struct ClosedLoopSystem {
    Mat Ae, Be, Ce, De;
    Mat Q1, Q2;
    StateSpaceSystem plant;
    ControllerRealization controller;

    Index n() const { return plant.A.rows(); }
    Index nc() const { return controller.Ac.rows(); }
    Index ne() const { return Ae.rows(); }
    Index p() const { return plant.C.rows(); }
    Index md() const { return plant.Bd ? plant.Bd->cols() : 0; }

    double scale() const { return Ae.size() > 0 ? Ae.cwiseAbs().maxCoeff() : 1.0; }
};

inline ClosedLoopSystem assemble(const StateSpaceSystem& plant,
                                 const ControllerRealization& ctrl) {
    const Index p = plant.p();
    if (ctrl.p() != p) throw InvalidArgument("assemble: controller and plant dimensions differ");
    const Mat dc = ctrl.Dc();
    const Mat eye = Mat::Identity(p, p);
    Mat q1, q2;
    try {
        q1 = solve_linear(Mat(eye + plant.D * dc), eye);
        q2 = solve_linear(Mat(eye + dc * plant.D), eye);
    } catch (const SingularMatrix&) {
        throw FeedthroughLoopSingular("assemble: I + D D_c numerically singular");
    }

    const Index n = plant.n(), nc = ctrl.nc();
    const Index md = plant.Bd ? plant.Bd->cols() : 0;

    ClosedLoopSystem cl{Mat(n + nc, n + nc), Mat(n + nc, md + p), Mat(p, n + nc), Mat(p, md + p),
                        q1, q2, plant, ctrl};
    cl.Ae.topLeftCorner(n, n) = plant.A - plant.B * dc * q1 * plant.C;
    cl.Ae.topRightCorner(n, nc) = plant.B * q2 * ctrl.Cc;
    cl.Ae.bottomLeftCorner(nc, n) = -ctrl.Bc * q1 * plant.C;
    cl.Ae.bottomRightCorner(nc, nc) = ctrl.Ac - ctrl.Bc * q1 * plant.D * ctrl.Cc;

    if (md > 0) {
        cl.Be.block(0, 0, n, md) = *plant.Bd;
        cl.Be.block(n, 0, nc, md).setZero();
    }
    cl.Be.block(0, md, n, p) = plant.B * dc * q1;
    cl.Be.block(n, md, nc, p) = ctrl.Bc * q1;

    cl.Ce.leftCols(n) = -q1 * plant.C;
    cl.Ce.rightCols(nc) = -q1 * plant.D * ctrl.Cc;
    cl.De.leftCols(md).setZero();
    cl.De.rightCols(p) = q1;
    return cl;
}

/// Dissipation margin max eig (A_e + A_e^*)/2; the loop generates a
/// contraction semigroup iff the value is <= tol.
inline double check_contraction(const ClosedLoopSystem& cl) {
    return max_hermitian_eig(cl.Ae);
}

inline bool is_contractive(const ClosedLoopSystem& cl, double tol = 1e-10) {
    return check_contraction(cl) <= tol;
}

/// Controller-side Schur complement at i w,
///   S_A(i w) = i w - A_c + B_c P(i w) (I + D_c P(i w))^{-1} C_c,
/// inverted both directly and through the Woodbury form
///   S_A^{-1} = R(i w, A_c) [I - B_c P (I + G P)^{-1} C_c R(i w, A_c)]
/// whenever i w is off sigma(A_c); both paths are returned for cross-checks.
struct SchurComplement {
    Mat s;
    Mat inverse_direct;
    std::optional<Mat> inverse_woodbury;
};

inline SchurComplement schur_complement(const StateSpaceSystem& plant,
                                        const ControllerRealization& ctrl, double omega) {
    const Index p = plant.p(), nc = ctrl.nc();
    const Complex iw(0.0, omega);
    const Mat dc = ctrl.Dc();
    const Mat pv = transfer(plant, iw);
    Mat pcl;
    try {
        pcl = (solve_linear(Mat((Mat::Identity(p, p) + dc * pv)).transpose(), pv.transpose()))
                  .transpose();  // P (I + D_c P)^{-1}
    } catch (const SingularMatrix&) {
        throw SpectrumHit("schur_complement: I + D_c P(i w) singular");
    }

    SchurComplement out;
    out.s = -ctrl.Ac + ctrl.Bc * pcl * ctrl.Cc;
    out.s.diagonal().array() += iw;
    try {
        out.inverse_direct = solve_linear(out.s, Mat::Identity(nc, nc));
    } catch (const SingularMatrix&) {
        throw SpectrumHit("schur_complement: S_A(i w) singular (i w in sigma(A_e))");
    }

    Mat shifted = -ctrl.Ac;
    shifted.diagonal().array() += iw;
    try {
        const Mat rc = solve_linear(shifted, Mat::Identity(nc, nc));
        const Mat g = ctrl.Cc * rc * ctrl.Bc + dc;
        const Mat inner = Mat::Identity(p, p) + g * pv;
        const Mat factor = solve_linear(inner, Mat(ctrl.Cc * rc));
        out.inverse_woodbury = rc * (Mat::Identity(nc, nc) - ctrl.Bc * pv * factor);
    } catch (const SingularMatrix&) {
        out.inverse_woodbury.reset();  // i w on sigma(A_c) or inner factor singular
    }
    return out;
}

/// ||R(i w, A_e)|| = 1 / sigma_min(i w - A_e). A sigma_min below
/// 1e-12 * max|A_e| is reported as a spectrum hit with infinite norm.
struct ResolventValue {
    double norm = 0.0;
    double sigma_min = 0.0;
    bool spectrum_hit = false;
};

inline ResolventValue resolvent_value(const Mat& ae, double omega, double scale) {
    Mat shifted = -ae;
    shifted.diagonal().array() += Complex(0.0, omega);
    ResolventValue rv;
    rv.sigma_min = min_singular_value(shifted);
    const double floor = 1e-12 * (scale > 0.0 ? scale : 1.0);
    if (rv.sigma_min < floor) {
        rv.spectrum_hit = true;
        rv.norm = std::numeric_limits<double>::infinity();
    } else {
        rv.norm = 1.0 / rv.sigma_min;
    }
    return rv;
}

inline ResolventValue resolvent_norm(const ClosedLoopSystem& cl, double omega) {
    return resolvent_value(cl.Ae, omega, cl.scale());
}

}  // namespace reglab

#endif  // REGLAB_CLOSED_LOOP_HPP
