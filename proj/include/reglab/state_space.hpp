#ifndef REGLAB_STATE_SPACE_HPP
#define REGLAB_STATE_SPACE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reglab/numerics.hpp"

namespace reglab {

struct SpectrumHit : Error {
    using Error::Error;
};
struct PoleHit : Error {
    using Error::Error;
};
struct InnerSingular : Error {
    using Error::Error;
};
struct FeedbackNotAdmissible : Error {
    using Error::Error;
};
struct PreconditionViolated : Error {
    using Error::Error;
};

/// State-space system (A, B, C, D) with an optional disturbance input B_d.
/// The coupling theory assumes Y = U, so p = m is enforced.
class StateSpaceSystem {
public:
    StateSpaceSystem(Mat a, Mat b, Mat c, Mat d, std::string label = {})
        : StateSpaceSystem(std::move(a), std::move(b), std::nullopt, std::move(c), std::move(d),
                           std::move(label)) {}

    StateSpaceSystem(Mat a, Mat b, std::optional<Mat> bd, Mat c, Mat d, std::string label = {})
        : A(std::move(a)), B(std::move(b)), Bd(std::move(bd)), C(std::move(c)), D(std::move(d)),
          label(std::move(label)) {
        if (A.rows() != A.cols()) throw InvalidArgument("StateSpaceSystem: A must be square");
        if (B.rows() != A.rows()) throw InvalidArgument("StateSpaceSystem: B row count mismatch");
        if (C.cols() != A.rows()) throw InvalidArgument("StateSpaceSystem: C column count mismatch");
        if (D.rows() != C.rows() || D.cols() != B.cols())
            throw InvalidArgument("StateSpaceSystem: D dimension mismatch");
        if (C.rows() != B.cols())
            throw InvalidArgument("StateSpaceSystem: p != m (the coupling assumes Y = U)");
        if (Bd && Bd->rows() != A.rows())
            throw InvalidArgument("StateSpaceSystem: B_d row count mismatch");
        require_finite(A, "A");
        require_finite(B, "B");
        require_finite(C, "C");
        require_finite(D, "D");
        if (Bd) require_finite(*Bd, "B_d");
    }

    Index n() const { return A.rows(); }
    Index m() const { return B.cols(); }
    Index p() const { return C.rows(); }
    Index md() const { return Bd ? Bd->cols() : 0; }
    bool has_disturbance() const { return Bd.has_value(); }

    Mat A, B;
    std::optional<Mat> Bd;
    Mat C, D;
    std::string label;
};

struct PassivityReport {
    bool is_passive = false;
    double max_eig_dissipation_block = 0.0;
    double re_d_min = 0.0;
};

/// P(lambda) = C (lambda I - A)^{-1} B + D. Throws SpectrumHit on lambda in sigma(A).
inline Mat transfer(const StateSpaceSystem& sys, Complex lambda) {
    if (sys.B.cols() == 0) return sys.D;
    Mat shifted = -sys.A;
    shifted.diagonal().array() += lambda;
    try {
        return sys.C * solve_linear(shifted, sys.B) + sys.D;
    } catch (const SingularMatrix& e) {
        throw SpectrumHit(std::string("transfer: lambda in spectrum of A (") + e.what() + ")");
    }
}

/// P_d(lambda) = C (lambda I - A)^{-1} B_d. Zero-width result when B_d is absent.
inline Mat disturbance_transfer(const StateSpaceSystem& sys, Complex lambda) {
    if (!sys.Bd) return Mat::Zero(sys.p(), 0);
    Mat shifted = -sys.A;
    shifted.diagonal().array() += lambda;
    try {
        return sys.C * solve_linear(shifted, *sys.Bd);
    } catch (const SingularMatrix& e) {
        throw SpectrumHit(std::string("disturbance_transfer: lambda in spectrum of A (") + e.what() +
                          ")");
    }
}

/// Dissipation block of the passivity inequality re<Ax+Bu,x> <= re<Cx+Du,u>:
///   M = [ (A+A*)/2       (B-C*)/2  ]
///       [ (B*-C)/2   -(D+D*)/2     ]
/// The system is passive iff M <= 0.
inline Mat dissipation_block(const StateSpaceSystem& sys) {
    const Index n = sys.n(), m = sys.m();
    Mat block(n + m, n + m);
    block.topLeftCorner(n, n) = 0.5 * (sys.A + sys.A.adjoint());
    block.topRightCorner(n, m) = 0.5 * (sys.B - sys.C.adjoint());
    block.bottomLeftCorner(m, n) = block.topRightCorner(n, m).adjoint();
    block.bottomRightCorner(m, m) = -0.5 * (sys.D + sys.D.adjoint());
    return block;
}

inline PassivityReport check_passive(const StateSpaceSystem& sys, double tol = 1e-10) {
    PassivityReport report;
    report.max_eig_dissipation_block = max_hermitian_eig(dissipation_block(sys));
    report.re_d_min = sys.m() > 0 ? min_hermitian_eig(sys.D) : 0.0;
    report.is_passive = report.max_eig_dissipation_block <= tol && report.re_d_min >= -tol;
    return report;
}

/// Static output feedback u = -K y with K >= 0:
///   (A - B K Q1 C, B Q2, Q1 C, Q1 D),  Q1 = (I + D K)^{-1}, Q2 = (I + K D)^{-1}.
/// Maps passive systems to passive systems.
inline StateSpaceSystem output_feedback(const StateSpaceSystem& sys, const Mat& k) {
    const Index p = sys.p();
    if (k.rows() != p || k.cols() != p) throw InvalidArgument("output_feedback: K must be p x p");
    Mat q1, q2;
    try {
        q1 = solve_linear(Mat(Mat::Identity(p, p) + sys.D * k), Mat::Identity(p, p));
        q2 = solve_linear(Mat(Mat::Identity(p, p) + k * sys.D), Mat::Identity(p, p));
    } catch (const SingularMatrix&) {
        throw FeedbackNotAdmissible("output_feedback: I + D K numerically singular");
    }
    return StateSpaceSystem(sys.A - sys.B * k * q1 * sys.C, sys.B * q2, sys.Bd, q1 * sys.C,
                            q1 * sys.D, sys.label.empty() ? "" : sys.label + "+feedback");
}

/// R(lambda, A - B Q C) via the Woodbury formula
///   R - R B (Q^{-1} + C R B)^{-1} C R,  R = R(lambda, A).
inline Mat resolvent_woodbury(const StateSpaceSystem& sys, const Mat& q, Complex lambda) {
    const Index n = sys.n();
    Mat shifted = -sys.A;
    shifted.diagonal().array() += lambda;
    Mat r;
    try {
        r = solve_linear(shifted, Mat::Identity(n, n));
    } catch (const SingularMatrix& e) {
        throw SpectrumHit(std::string("resolvent_woodbury: lambda in spectrum of A (") + e.what() +
                          ")");
    }
    if (sys.B.cols() == 0) return r;
    Mat q_inv;
    try {
        q_inv = solve_linear(q, Mat::Identity(q.rows(), q.cols()));
    } catch (const SingularMatrix&) {
        throw InvalidArgument("resolvent_woodbury: Q must be invertible");
    }
    const Mat rb = r * sys.B;
    const Mat cr = sys.C * r;
    try {
        const Mat inner = q_inv + sys.C * rb;
        return r - rb * solve_linear(inner, cr);
    } catch (const SingularMatrix&) {
        throw InnerSingular("resolvent_woodbury: inner factor Q^{-1} + C R B singular");
    }
}

/// Checks of the operator inequalities behind the closed-loop estimates, for
/// T, S with re T >= c I and re S >= d I:
///   (a) ||T^{-1}|| <= 1/c (c > 0) and re T^{-1} >= c ||T||^{-2}
///   (b) ||T (I + S T)^{-1}|| <= ||T||^2 / (c + d ||T||^2)
///   (c) re T (I + S T)^{-1} >= d (||T^{-1}|| + ||S||)^{-2}  (T invertible, d > 0)
///   (d) I + S T invertible and re T (I + S T)^{-1} >= 0     (S Hermitian PSD)
struct OperatorLemmaReport {
    bool inverse_bounds = true;        // (a)
    bool feedback_norm_bound = true;   // (b)
    bool feedback_coercivity = true;   // (c)
    bool psd_feedback_invertible = true;  // (d)
    bool applicable_a = false, applicable_b = false, applicable_c = false, applicable_d = false;
    double slack = 0.0;  // most negative margin observed, 0 when all hold

    bool all_hold() const {
        return inverse_bounds && feedback_norm_bound && feedback_coercivity &&
               psd_feedback_invertible;
    }
};

inline OperatorLemmaReport verify_operator_lemmas(const Mat& t, const Mat& s, double c, double d,
                                                  double slack_tol = 1e-9) {
    OperatorLemmaReport rep;
    const double c_true = min_hermitian_eig(t);
    const double d_true = min_hermitian_eig(s);
    if (c_true < c - slack_tol || d_true < d - slack_tol)
        throw PreconditionViolated("verify_operator_lemmas: re T >= cI or re S >= dI fails");

    const double norm_t = operator_norm(t);
    auto record = [&rep, slack_tol](bool& field, double margin) {
        if (margin < -slack_tol) {
            field = false;
            rep.slack = std::min(rep.slack, margin);
        }
    };

    const Index n = t.rows();
    const Mat eye = Mat::Identity(n, n);
    std::optional<Mat> t_inv;
    try {
        t_inv = solve_linear(t, eye);
    } catch (const SingularMatrix&) {
    }

    if (c > 0.0) {
        rep.applicable_a = true;
        if (!t_inv) {
            rep.inverse_bounds = false;
        } else {
            record(rep.inverse_bounds, 1.0 / c - operator_norm(*t_inv));
            record(rep.inverse_bounds, min_hermitian_eig(*t_inv) - c / (norm_t * norm_t));
        }
    } else if (t_inv) {
        // c = 0 still gives re T^{-1} >= 0.
        rep.applicable_a = true;
        record(rep.inverse_bounds, min_hermitian_eig(*t_inv));
    }

    std::optional<Mat> fb;  // T (I + S T)^{-1}
    try {
        fb = t * solve_linear(Mat(eye + s * t), eye);
    } catch (const SingularMatrix&) {
    }

    if (c > 0.0 || d > 0.0) {
        rep.applicable_b = true;
        if (!fb) {
            rep.feedback_norm_bound = false;
        } else {
            const double bound = norm_t * norm_t / (c + d * norm_t * norm_t);
            record(rep.feedback_norm_bound, bound - operator_norm(*fb));
        }
    }

    if (t_inv && d > 0.0) {
        rep.applicable_c = true;
        if (!fb) {
            rep.feedback_coercivity = false;
        } else {
            const double denom = operator_norm(*t_inv) + operator_norm(s);
            record(rep.feedback_coercivity, min_hermitian_eig(*fb) - d / (denom * denom));
        }
    }

    const bool s_hermitian_psd =
        (s - s.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + s.cwiseAbs().maxCoeff()) &&
        d_true >= -slack_tol;
    if (s_hermitian_psd && c_true >= -slack_tol) {
        rep.applicable_d = true;
        if (!fb) {
            rep.psd_feedback_invertible = false;
        } else {
            record(rep.psd_feedback_invertible, min_hermitian_eig(*fb));
        }
    }
    return rep;
}

/// I + D_c P invertible for transfer values P with re P >= 0 and D_c >= 0.
struct IdpInvertibilityReport {
    bool all_invertible = true;
    double sup_inverse_norm = 0.0;
    std::vector<Index> failures;  // indices of samples that failed
};

inline IdpInvertibilityReport check_idp_invertibility(const std::vector<Mat>& p_values,
                                                      const Mat& dc, double tol = 1e-9) {
    IdpInvertibilityReport rep;
    const Index p = dc.rows();
    const Mat eye = Mat::Identity(p, p);
    for (Index i = 0; i < static_cast<Index>(p_values.size()); ++i) {
        const Mat& pv = p_values[static_cast<size_t>(i)];
        if (min_hermitian_eig(pv) < -tol * (1.0 + operator_norm(pv))) {
            rep.failures.push_back(i);
            rep.all_invertible = false;
            continue;
        }
        try {
            const Mat inv = solve_linear(Mat(eye + dc * pv), eye);
            rep.sup_inverse_norm = std::max(rep.sup_inverse_norm, operator_norm(inv));
        } catch (const SingularMatrix&) {
            rep.failures.push_back(i);
            rep.all_invertible = false;
        }
    }
    return rep;
}

}  // namespace reglab

#endif  // REGLAB_STATE_SPACE_HPP
