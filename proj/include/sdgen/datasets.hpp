#ifndef SDGEN_DATASETS_HPP
#define SDGEN_DATASETS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdgen/data.hpp"
#include "sdgen/dynsim.hpp"

namespace sdgen::datasets {

struct ToyConfig {
    int n_per_angle = 500;
    double y_std = 0.03;
    std::uint64_t seed = 42;
};

struct ToySplits {
    GroupedDataset train, validation, test;  // raw features, normalized codes
    double angle_lo = 0.0, angle_hi = 0.0;   // training angle range (code map)
};

struct SimSplits {
    GroupedDataset train, validation, test;
};

// x uniform on [-1, 1], y ~ N(0, y_std); one row per point.
Eigen::MatrixXd base_line(int n, double y_std, std::mt19937_64& rng);

// Rotates each row about the origin.
Eigen::MatrixXd rotate(const Eigen::MatrixXd& points, double theta);

// The 11 training angles, equally spaced over [-pi/2, 2pi/5] with both
// endpoints included.
std::vector<double> toy_train_angles();

// The 11 simulated temperatures {20, 22, ..., 40} degC.
std::vector<double> sim_temperatures();

// Training manifolds at the 11 angles; validation/test manifolds at the
// midpoints of alternating training gaps (validation takes the even gaps).
// Codes are the angles mapped affinely from the training range to [-1, 1].
ToySplits make_toy_splits(const ToyConfig& cfg, int n_val_angles, int n_test_angles);

// Groups rows sharing a physical code value, in order of first appearance.
GroupedDataset group_by_code(const Eigen::VectorXd& physical_codes,
                             const Eigen::MatrixXd& features);

// Maps each group's physical code affinely from [lo, hi] onto [-1, 1].
void assign_codes(GroupedDataset& groups, double lo, double hi);

// The 11 simulated temperatures must be exactly {20, 22, ..., 40};
// validation is the 24 degC group, test the 34 degC group.
SimSplits make_sim_splits(const GroupedDataset& by_temperature);

// Split disjointness plus the interpolation property (validation and test
// codes strictly inside the training range). Throws ConfigError.
void check_split_codes(const std::vector<double>& train, const std::vector<double>& validation,
                       const std::vector<double>& test);

// --- persistence ------------------------------------------------------

// Toy CSV: header "angle,x,y", one row per point, 17 significant digits.
void write_toy_csv(const std::string& path, const GroupedDataset& groups,
                   const std::string& meta = "");
GroupedDataset read_toy_csv(const std::string& path);

// Simulation CSV: header "temperature,humidity,f_0001,...". The humidity
// column is metadata; loaders never hand it to the model.
void write_sim_csv(const std::string& path, const std::vector<dynsim::TransmissibilityFeature>& records,
                   const std::string& meta = "");
std::vector<dynsim::TransmissibilityFeature> read_sim_csv(const std::string& path);

// Projected CSV: header "temperature,p_001,...", humidity dropped.
void write_projected_csv(const std::string& path, const Eigen::VectorXd& temperatures,
                         const Eigen::MatrixXd& scores, const std::string& meta = "");
GroupedDataset read_projected_csv(const std::string& path);

// Split manifest: code values per split plus the code-mapping range.
struct SplitManifest {
    std::string experiment;
    double code_lo = 0.0, code_hi = 0.0;
    std::vector<double> train, validation, test;
};

void write_split_manifest(const std::string& path, const SplitManifest& manifest,
                          const std::string& meta = "");
SplitManifest read_split_manifest(const std::string& path);

}  // namespace sdgen::datasets

#endif
