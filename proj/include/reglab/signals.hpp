#ifndef REGLAB_SIGNALS_HPP
#define REGLAB_SIGNALS_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "reglab/numerics.hpp"

namespace reglab {

/// Finite truncation of y_ref(t) = sum_k y_ref^k e^{i w_k t} and the matching
/// disturbance expansion, stored as one entry per frequency.
class SignalSpec {
public:
    struct Entry {
        double omega = 0.0;
        Vec y_ref;   // coefficient in Y
        Vec w_dist;  // coefficient in U_d (may have size 0)
    };

    SignalSpec() = default;

    SignalSpec(std::vector<Entry> entries, bool real_valued) : entries_(std::move(entries)),
                                                               real_valued_(real_valued) {
        std::sort(entries_.begin(), entries_.end(),
                  [](const Entry& a, const Entry& b) { return a.omega < b.omega; });
        for (size_t i = 0; i + 1 < entries_.size(); ++i) {
            if (entries_[i].omega == entries_[i + 1].omega)
                throw InvalidArgument("SignalSpec: frequencies must be pairwise distinct");
        }
        for (const auto& e : entries_) {
            if (!e.y_ref.allFinite() || !e.w_dist.allFinite())
                throw InvalidArgument("SignalSpec: coefficients must be finite");
            if (e.y_ref.size() != entries_.front().y_ref.size() ||
                e.w_dist.size() != entries_.front().w_dist.size())
                throw InvalidArgument("SignalSpec: coefficient dimensions must agree");
        }
        if (real_valued_) check_conjugate_closure();
    }

    const std::vector<Entry>& entries() const { return entries_; }
    bool real_valued() const { return real_valued_; }
    bool empty() const { return entries_.empty(); }
    Index p() const { return entries_.empty() ? 0 : entries_.front().y_ref.size(); }
    Index md() const { return entries_.empty() ? 0 : entries_.front().w_dist.size(); }

    double max_abs_frequency() const {
        double m = 0.0;
        for (const auto& e : entries_) m = std::max(m, std::abs(e.omega));
        return m;
    }

    std::vector<double> frequencies() const {
        std::vector<double> w;
        w.reserve(entries_.size());
        for (const auto& e : entries_) w.push_back(e.omega);
        return w;
    }

private:
    void check_conjugate_closure() const {
        for (const auto& e : entries_) {
            const Entry* mirror = nullptr;
            for (const auto& f : entries_) {
                if (std::abs(f.omega + e.omega) <= 1e-12 * (1.0 + std::abs(e.omega))) {
                    mirror = &f;
                    break;
                }
            }
            if (!mirror)
                throw InvalidArgument("SignalSpec: real signal requires conjugate frequency pairs");
            if ((mirror->y_ref - e.y_ref.conjugate()).norm() > 1e-12 * (1.0 + e.y_ref.norm()) ||
                (mirror->w_dist - e.w_dist.conjugate()).norm() > 1e-12 * (1.0 + e.w_dist.norm()))
                throw InvalidArgument("SignalSpec: real signal requires conjugate coefficients");
        }
    }

    std::vector<Entry> entries_;
    bool real_valued_ = false;
};

struct SignalSample {
    Vec w_dist;
    Vec y_ref;
};

/// Evaluate the finite Fourier sums at time t. Real-valued specs yield
/// real samples up to roundoff (residual below 1e-12 relative).
inline SignalSample eval_signal(const SignalSpec& sig, double t) {
    SignalSample sample;
    sample.y_ref = Vec::Zero(sig.p());
    sample.w_dist = Vec::Zero(sig.md());
    for (const auto& e : sig.entries()) {
        const Complex phase = std::exp(Complex(0.0, e.omega * t));
        sample.y_ref += phase * e.y_ref;
        sample.w_dist += phase * e.w_dist;
    }
    if (sig.real_valued()) {
        // Conjugate closure makes the sums real up to roundoff.
        const double residue = sample.y_ref.imag().cwiseAbs().sum() +
                               sample.w_dist.imag().cwiseAbs().sum();
        if (residue > 1e-12 * (1.0 + sample.y_ref.norm() + sample.w_dist.norm()))
            throw InvalidArgument("eval_signal: real-valued signal with imaginary residue");
        sample.y_ref = sample.y_ref.real().cast<Complex>();
        sample.w_dist = sample.w_dist.real().cast<Complex>();
    }
    return sample;
}

/// Stacked exogenous input w_ext(t) = (w_dist(t), y_ref(t)).
inline Vec eval_signal_stacked(const SignalSpec& sig, double t) {
    const SignalSample s = eval_signal(sig, t);
    Vec w(s.w_dist.size() + s.y_ref.size());
    w << s.w_dist, s.y_ref;
    return w;
}

/// Stacked coefficient w_ext^k = (w_dist^k, y_ref^k) for one entry.
inline Vec stacked_coefficient(const SignalSpec::Entry& e) {
    Vec w(e.w_dist.size() + e.y_ref.size());
    w << e.w_dist, e.y_ref;
    return w;
}

/// Scalar real signal sum_j a_j sin(w_j t) + b_j cos(w_j t) as a SignalSpec.
inline SignalSpec make_real_scalar_signal(const std::vector<double>& omegas,
                                          const std::vector<double>& sin_coeffs,
                                          const std::vector<double>& cos_coeffs, Index md = 0) {
    if (omegas.size() != sin_coeffs.size() || omegas.size() != cos_coeffs.size())
        throw InvalidArgument("make_real_scalar_signal: length mismatch");
    std::vector<SignalSpec::Entry> entries;
    for (size_t j = 0; j < omegas.size(); ++j) {
        const double w = omegas[j];
        if (w < 0.0) throw InvalidArgument("make_real_scalar_signal: use w >= 0");
        const Complex coeff(0.5 * cos_coeffs[j], -0.5 * sin_coeffs[j]);
        SignalSpec::Entry e;
        e.omega = w;
        e.y_ref = Vec::Constant(1, w == 0.0 ? Complex(cos_coeffs[j], 0.0) : coeff);
        e.w_dist = Vec::Zero(md);
        entries.push_back(e);
        if (w > 0.0) {
            SignalSpec::Entry conj = e;
            conj.omega = -w;
            conj.y_ref = e.y_ref.conjugate();
            entries.push_back(conj);
        }
    }
    return SignalSpec(std::move(entries), /*real_valued=*/true);
}

}  // namespace reglab

#endif  // REGLAB_SIGNALS_HPP
