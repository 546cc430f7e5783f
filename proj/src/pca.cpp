#include "spaceutil/pca.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "spaceutil/error.hpp"

namespace spaceutil::sound {

PcaModel fit_pca(const Eigen::MatrixXd& X, double alpha, bool literal_alpha) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 2) raise(Errc::TooFewSamples, "pca needs at least 2 samples");
    if (d < 1) raise(Errc::EmptyInput, "pca needs at least 1 feature");
    if (!(alpha > 0.0) || !(alpha < 1.0)) raise(Errc::InvalidConfig, "alpha must lie in (0, 1)");

    PcaModel model;
    model.mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
    Eigen::MatrixXd scatter = centered.transpose() * centered;

    double denom = X.squaredNorm();
    double trace = scatter.trace();
    if (denom <= 0.0 || trace <= 1e-9 * denom / static_cast<double>(n))
        raise(Errc::DegenerateData, "pca input carries no variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
    if (eig.info() != Eigen::Success) raise(Errc::DegenerateData, "eigendecomposition failed");

    // Eigen returns ascending order; flip to descending.
    Eigen::VectorXd lambda(d);
    Eigen::MatrixXd vectors(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        lambda(j) = std::max(eig.eigenvalues()(d - 1 - j), 0.0);
        vectors.col(j) = eig.eigenvectors().col(d - 1 - j);
    }

    double total = lambda.sum();
    double budget = literal_alpha ? alpha : 1.0 - alpha;
    double kept = 0.0;
    int p = static_cast<int>(d);
    double ratio = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        kept += lambda(j);
        double r = (total - kept) / denom;
        if (r <= budget) {
            p = static_cast<int>(j) + 1;
            ratio = r;
            break;
        }
    }

    model.p = p;
    model.ratio = ratio;
    model.basis = vectors.leftCols(p);
    model.variances = lambda.head(p) / static_cast<double>(n - 1);
    return model;
}

double residual_ratio(const Eigen::MatrixXd& X, const PcaModel& model, int k) {
    if (k < 0 || k > model.basis.cols())
        raise(Errc::InvalidConfig, "component count outside fitted basis");
    double denom = X.squaredNorm();
    if (denom <= 0.0) raise(Errc::DegenerateData, "residual ratio undefined for all-zero data");
    Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
    Eigen::MatrixXd projected = centered * model.basis.leftCols(k);
    double residual = centered.squaredNorm() - projected.squaredNorm();
    return residual / denom;
}

Eigen::VectorXd scores(const PcaModel& model, const Eigen::VectorXd& x) {
    return model.basis.transpose() * (x - model.mean);
}

Eigen::VectorXd standardized_scores(const PcaModel& model, const Eigen::VectorXd& x) {
    Eigen::VectorXd s = scores(model, x);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        double sd = std::sqrt(model.variances(j));
        s(j) = (sd > 0.0) ? s(j) / sd : 0.0;
    }
    return s;
}

double chi_square(const PcaModel& model, const Eigen::VectorXd& x) {
    return standardized_scores(model, x).squaredNorm();
}

} // namespace spaceutil::sound
