#include "spaceutil/haar.hpp"

#include <cmath>

namespace spaceutil::sound {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

// Averaging/differencing cascade.  Each level halves the smooth part; the
// output keeps the final average first, then details from coarsest level to
// finest.
Vec8 haar_forward(const Vec8& x) {
    double buf[kHaarDim];
    for (int i = 0; i < kHaarDim; ++i) buf[i] = x(i);
    Vec8 out;
    int len = kHaarDim;
    while (len > 1) {
        int half = len / 2;
        double smooth[kHaarDim / 2];
        for (int i = 0; i < half; ++i) {
            smooth[i] = (buf[2 * i] + buf[2 * i + 1]) * kInvSqrt2;
            out(half + i) = (buf[2 * i] - buf[2 * i + 1]) * kInvSqrt2;
        }
        for (int i = 0; i < half; ++i) buf[i] = smooth[i];
        len = half;
    }
    out(0) = buf[0];
    return out;
}

Vec8 haar_inverse(const Vec8& coeffs) {
    double buf[kHaarDim];
    buf[0] = coeffs(0);
    int len = 1;
    while (len < kHaarDim) {
        double expanded[kHaarDim];
        for (int i = 0; i < len; ++i) {
            double s = buf[i];
            double d = coeffs(len + i);
            expanded[2 * i] = (s + d) * kInvSqrt2;
            expanded[2 * i + 1] = (s - d) * kInvSqrt2;
        }
        len *= 2;
        for (int i = 0; i < len; ++i) buf[i] = expanded[i];
    }
    Vec8 out;
    for (int i = 0; i < kHaarDim; ++i) out(i) = buf[i];
    return out;
}

Mat8 haar_matrix() {
    Mat8 m;
    for (int c = 0; c < kHaarDim; ++c) {
        Vec8 e = Vec8::Zero();
        e(c) = 1.0;
        m.col(c) = haar_forward(e);
    }
    return m;
}

Vec8 haar_features(const Histogram& h) {
    Vec8 x = Vec8::Zero();
    for (int i = 0; i < kNoiseBins; ++i) x(i) = static_cast<double>(h[static_cast<std::size_t>(i)]);
    return haar_forward(x);
}

} // namespace spaceutil::sound
