#ifndef REGLAB_DECAY_HPP
#define REGLAB_DECAY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "reglab/numerics.hpp"

namespace reglab {

struct InsufficientData : Error {
    using Error::Error;
};
struct OutOfTable : Error {
    using Error::Error;
};
struct OutOfRange : Error {
    using Error::Error;
};

enum class DecayKind { Exponential, Polynomial, NonUniform };

inline const char* decay_kind_name(DecayKind k) {
    switch (k) {
        case DecayKind::Exponential: return "exponential";
        case DecayKind::Polynomial: return "polynomial";
        case DecayKind::NonUniform: return "non-uniform";
    }
    return "unknown";
}

/// Increasing majorant table for ||R(i w, A)||, interpolated log-log.
struct MTable {
    std::vector<double> omega;  // strictly increasing, positive
    std::vector<double> value;  // positive

    bool empty() const { return omega.empty(); }

    double interpolate(double w) const {
        if (omega.empty()) throw OutOfTable("MTable: empty table");
        if (w < omega.front() || w > omega.back())
            throw OutOfTable("MTable: omega outside tabulated range");
        auto it = std::lower_bound(omega.begin(), omega.end(), w);
        size_t hi = static_cast<size_t>(it - omega.begin());
        if (hi == 0) return value.front();
        const size_t lo = hi - 1;
        const double t = (std::log(w) - std::log(omega[lo])) /
                         (std::log(omega[hi]) - std::log(omega[lo]));
        return std::exp((1.0 - t) * std::log(value[lo]) + t * std::log(value[hi]));
    }
};

/// Fitted decay law. Polynomial means ||x(t)|| ~ t^{-1/alpha}; Exponential
/// means e^{-rate t}. Constants are fitted empirically, not the existence
/// constants of the theory.
struct DecayModel {
    DecayKind kind = DecayKind::Exponential;
    double alpha = 0.0;      // polynomial kind
    double rate = 0.0;       // exponential kind
    double m_e = 1.0;        // fitted multiplicative constant
    double c = 1.0;          // time scaling inside M_log^{-1}(c t)
    double residual = 0.0;   // RMS residual of the winning fit in log space
    double band_lo = 0.0, band_hi = 0.0;
    MTable table;            // non-uniform kind
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    size_t count = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InsufficientData("fit_line: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw InsufficientData("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    fit.count = x.size();
    return fit;
}

/// M_log(w) = M(w) (log(1 + M(w)) + log(1 + w)).
inline double m_log(const MTable& table, double w) {
    if (w <= 0.0) throw InvalidArgument("m_log: omega must be positive");
    const double m = table.interpolate(w);
    if (m <= 0.0) throw InvalidArgument("m_log: M must be positive");
    return m * (std::log1p(m) + std::log1p(w));
}

/// Inverse of m_log by bisection over the tabulated range; strictly
/// increasing in t since M is increasing.
inline double m_log_inverse(const MTable& table, double t) {
    if (table.empty()) throw OutOfTable("m_log_inverse: empty table");
    double lo = table.omega.front(), hi = table.omega.back();
    const double flo = m_log(table, lo), fhi = m_log(table, hi);
    if (t < flo || t > fhi) throw OutOfRange("m_log_inverse: t outside the range of m_log");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (m_log(table, mid) < t)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-10 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace reglab

#endif  // REGLAB_DECAY_HPP
