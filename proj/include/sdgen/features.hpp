#ifndef SDGEN_FEATURES_HPP
#define SDGEN_FEATURES_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

namespace sdgen::features {

// Per-column min/max map onto [-1, 1]. Constant columns are flagged and
// map to 0; denormalize restores the constant value.
struct NormalizationModel {
    Eigen::VectorXd min;
    Eigen::VectorXd max;
    std::vector<bool> constant;

    Eigen::Index dim() const { return min.size(); }
};

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;   // n_components x n_features, row-orthonormal
    Eigen::VectorXd eigenvalues;  // non-increasing

    Eigen::Index n_components() const { return components.rows(); }
    Eigen::Index n_features() const { return components.cols(); }
};

NormalizationModel fit_normalizer(const Eigen::MatrixXd& data);
Eigen::MatrixXd normalize(const Eigen::MatrixXd& data, const NormalizationModel& model);
Eigen::MatrixXd denormalize(const Eigen::MatrixXd& data, const NormalizationModel& model);

// Top eigenpairs of the sample covariance of mean-centered data. Components
// are signed so each one's largest-magnitude entry is positive.
PcaModel fit_pca(const Eigen::MatrixXd& data, int n_components);

Eigen::MatrixXd project(const Eigen::MatrixXd& data, const PcaModel& model);
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores, const PcaModel& model);

// "PCAv1 <n_features> <n_components>", mean line, eigenvalue line,
// one row per component.
void save_pca(const std::string& path, const PcaModel& model);
PcaModel load_pca(const std::string& path);

// "NORMv1 <n_dims>", min line, max line.
void save_normalizer(const std::string& path, const NormalizationModel& model);
NormalizationModel load_normalizer(const std::string& path);

}  // namespace sdgen::features

#endif
