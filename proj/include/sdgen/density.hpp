#ifndef SDGEN_DENSITY_HPP
#define SDGEN_DENSITY_HPP

#include <Eigen/Core>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sdgen/data.hpp"

namespace sdgen::density {

// Gaussian kernel density estimate with a single isotropic bandwidth.
struct KdeModel {
    Eigen::MatrixXd points;  // n x d
    double bandwidth = 0.2;
};

struct Axis {
    double lower = -1.2;
    double upper = 1.2;
    int resolution = 40;
};

// Regular evaluation grid. Cells are indexed in C order (last axis fastest);
// each axis holds `resolution` points including both bounds.
struct EvalGrid {
    std::vector<Axis> axes;

    int dim() const { return static_cast<int>(axes.size()); }
    Eigen::Index total_cells() const;
    Eigen::VectorXd axis_values(int axis) const;
    // Materializes all grid points, one row per cell, in flattening order.
    Eigen::MatrixXd points() const;

    static EvalGrid uniform(int dim, double lower, double upper, int resolution);
};

struct KlReport {
    std::vector<std::pair<double, double>> per_code;  // (physical code, KL in nats)
    double cumulative = 0.0;
    int n_val = 0;
};

KdeModel kde_fit(const Eigen::MatrixXd& points, double bandwidth);

// Density of the KDE at each query row.
Eigen::VectorXd kde_density(const KdeModel& model, const Eigen::MatrixXd& queries);

// Evaluates the KDE on the grid and renormalizes to a discrete distribution
// summing to one. Throws CoverageError if the grid catches no mass.
Eigen::VectorXd eval_on_grid(const KdeModel& model, const EvalGrid& grid);

// sum over cells with P > 0 of P * ln(P / max(Q, epsilon)), in nats.
double kl_divergence(const Eigen::VectorXd& P, const Eigen::VectorXd& Q,
                     double epsilon = 1e-12);

// Draws n_generate samples at a given code.
using Sampler = std::function<Eigen::MatrixXd(const Eigen::VectorXd& code, int n,
                                              std::mt19937_64& rng)>;

// Per validation code: KDE of the real points (P) vs KDE of generated
// points (Q), both evaluated on the grid; cumulative is the sum.
KlReport cumulative_validation_kl(const Sampler& generate, const GroupedDataset& validation,
                                  const EvalGrid& grid, double bandwidth, int n_generate,
                                  std::mt19937_64& rng);

// "code,kl" rows plus a trailing "TOTAL,<value>" row.
void save_kl_report(const std::string& path, const KlReport& report,
                    const std::string& meta = "");

}  // namespace sdgen::density

#endif
