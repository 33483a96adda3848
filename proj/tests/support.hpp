#ifndef REGLAB_TESTS_SUPPORT_HPP
#define REGLAB_TESTS_SUPPORT_HPP

#include <random>

#include "reglab/state_space.hpp"

namespace reglab::testsupport {

inline Mat random_complex(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = Complex(dist(rng), dist(rng));
    return m;
}

inline Mat random_hermitian_psd(Index n, std::mt19937_64& rng, double scale = 1.0) {
    const Mat w = random_complex(n, n, rng, scale);
    return w * w.adjoint() / static_cast<double>(n);
}

inline Mat random_skew(Index n, std::mt19937_64& rng, double scale = 1.0) {
    const Mat w = random_complex(n, n, rng, scale);
    return 0.5 * (w - w.adjoint());
}

/// Random impedance-passive system: skew-plus-damping A, C = B^*, re D >= 0.
inline StateSpaceSystem random_passive_system(Index n, Index m, std::mt19937_64& rng,
                                              bool with_feedthrough = true,
                                              double damping = 1.0) {
    const Mat a = random_skew(n, rng) - damping * random_hermitian_psd(n, rng);
    const Mat b = random_complex(n, m, rng);
    Mat d = Mat::Zero(m, m);
    if (with_feedthrough) {
        const Mat h = random_complex(m, m, rng, 0.3);
        d = random_hermitian_psd(m, rng, 0.7) + 0.5 * (h - h.adjoint());
    }
    return StateSpaceSystem(a, b, b.adjoint(), d, "random-passive");
}

}  // namespace reglab::testsupport

#endif  // REGLAB_TESTS_SUPPORT_HPP
