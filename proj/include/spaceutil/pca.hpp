#pragma once

#include <Eigen/Core>

namespace spaceutil::sound {

struct PcaModel {
    Eigen::VectorXd mean;       // column means of the fit data
    Eigen::MatrixXd basis;      // d x p, orthonormal principal directions
    Eigen::VectorXd variances;  // sample variances along each kept direction
    int p = 0;                  // kept components
    double ratio = 0.0;         // achieved residual energy ratio at p
};

// Fits a PCA on rows of X (n x d) and keeps the smallest p whose mean-centered
// reconstruction leaves at most (1 - alpha) of the total signal energy:
//   sum_i |x_i - xhat_i|^2 / sum_i |x_i|^2 <= 1 - alpha
// The denominator is deliberately the raw, uncentered energy.  With
// literal_alpha the budget is alpha itself, i.e. the ratio only has to stay
// under 0.95; that reading picks p=1 on almost any data and exists for
// comparison.  Throws TooFewSamples (n < 2) and DegenerateData (no variance
// to model).
PcaModel fit_pca(const Eigen::MatrixXd& X, double alpha = 0.95, bool literal_alpha = false);

// Residual energy ratio the model would achieve on X with k components.
double residual_ratio(const Eigen::MatrixXd& X, const PcaModel& model, int k);

Eigen::VectorXd scores(const PcaModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd standardized_scores(const PcaModel& model, const Eigen::VectorXd& x);

// Sum of squared standardized scores.
double chi_square(const PcaModel& model, const Eigen::VectorXd& x);

} // namespace spaceutil::sound
