#ifndef SDGEN_DATA_HPP
#define SDGEN_DATA_HPP

#include <Eigen/Core>
#include <vector>

namespace sdgen {

// One feature vector paired with the known environmental parameter (code)
// it was recorded under. Model-facing values are normalized to [-1, 1].
struct ConditionedSample {
    Eigen::VectorXd features;
    Eigen::VectorXd code;
};

// All samples sharing one code value. `physical_code` keeps the raw
// parameter (angle in radians, temperature in degC) for reporting.
struct CodeGroup {
    double physical_code = 0.0;
    Eigen::VectorXd code;      // normalized, model-facing
    Eigen::MatrixXd features;  // one row per sample
};

using GroupedDataset = std::vector<CodeGroup>;

inline Eigen::Index total_samples(const GroupedDataset& groups) {
    Eigen::Index n = 0;
    for (const auto& g : groups) n += g.features.rows();
    return n;
}

}  // namespace sdgen

#endif
