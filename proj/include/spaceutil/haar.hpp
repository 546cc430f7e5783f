#pragma once

#include <Eigen/Core>

#include "spaceutil/reading.hpp"

namespace spaceutil::sound {

// Histograms have 5 bins; the transform works on the next power of two.
constexpr int kHaarDim = 8;

using Vec8 = Eigen::Matrix<double, kHaarDim, 1>;
using Mat8 = Eigen::Matrix<double, kHaarDim, kHaarDim>;

// Orthonormal Haar analysis matrix, coefficients ordered coarse to fine:
// overall average, then the detail coefficients of each halving level.
Mat8 haar_matrix();

Vec8 haar_forward(const Vec8& x);
Vec8 haar_inverse(const Vec8& coeffs);

// Zero-pads the 5 histogram bins to 8 and transforms.
Vec8 haar_features(const Histogram& h);

} // namespace spaceutil::sound
