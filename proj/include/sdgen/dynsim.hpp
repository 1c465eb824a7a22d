#ifndef SDGEN_DYNSIM_HPP
#define SDGEN_DYNSIM_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

namespace sdgen::dynsim {

// Fixed-free chain: spring/damper i couples mass i to mass i-1, the first
// pair to ground. All parameters strictly positive.
struct ChainSystem {
    Eigen::VectorXd masses;       // kg
    Eigen::VectorXd stiffnesses;  // N/m
    Eigen::VectorXd dampings;     // N s/m

    int n_dof() const { return static_cast<int>(masses.size()); }
};

struct EnvironmentalState {
    double temperature = 30.0;  // degC, nominal range [20, 40]
    double humidity = 90.0;     // %, nominal range [80, 100]
};

struct FrequencyGrid {
    Eigen::VectorXd omegas;  // rad/s, strictly positive and increasing

    Eigen::Index size() const { return omegas.size(); }
    Eigen::VectorXd hertz() const;
};

// |T21| and |T32| concatenated over the grid, plus the environment they
// were simulated under. Humidity is recorded metadata only; it never
// reaches the model.
struct TransmissibilityFeature {
    Eigen::VectorXd values;
    double temperature = 0.0;
    double humidity = 0.0;
};

struct SystemMatrices {
    Eigen::MatrixXd M, C, K;
};

ChainSystem make_uniform_chain(int n_dof, double stiffness, double damping, double mass);
void validate(const ChainSystem& sys);

// Stiffness scales by (1 - (T - 30)/100), damping by (1 - (h - 90)/100);
// masses are unchanged. (30 degC, 90 %) is the identity point.
ChainSystem apply_environment(const ChainSystem& base, const EnvironmentalState& env);

// M diagonal; K and C symmetric tridiagonal with K(i,i) = k_i + k_{i+1}
// (last diagonal entry k_n) and K(i,i+1) = -k_{i+1}.
SystemMatrices assemble_matrices(const ChainSystem& sys);

FrequencyGrid linear_frequency_grid(double f_min_hz, double f_max_hz, int n_points);

// Receptance columns H(w) = (K - w^2 M + i w C)^{-1} e_f, one per frequency.
Eigen::MatrixXcd frf(const ChainSystem& sys, const FrequencyGrid& grid, int force_dof);

// |H_i(w) / H_j(w)| per frequency.
Eigen::VectorXd transmissibility(const Eigen::MatrixXcd& H, int i, int j);

// Adds zero-mean Gaussian noise with std = fraction * std(values).
Eigen::VectorXd pollute(const Eigen::VectorXd& values, double fraction, std::mt19937_64& rng);

// One record per (temperature, draw): humidity uniform on the range, the
// environment applied, FRF under unit force on mass 1, T21 and T32 each
// polluted and folded positive, then concatenated. Per-draw RNG streams
// are derived from the seed, so records do not depend on evaluation order.
std::vector<TransmissibilityFeature> build_dataset(const ChainSystem& base,
                                                   const std::vector<double>& temperatures,
                                                   int n_per_temp, double humidity_lo,
                                                   double humidity_hi, const FrequencyGrid& grid,
                                                   double noise_fraction, std::uint64_t seed);

// Newmark average-acceleration integration (beta 1/4, gamma 1/2,
// unconditionally stable) from zero initial conditions. force[i] acts on
// force_dof at t = i*dt; column i of the result is the displacement there.
Eigen::MatrixXd integrate_time(const ChainSystem& sys, int force_dof,
                               const Eigen::VectorXd& force, double dt);

// Closed-form natural frequencies (rad/s) of a uniform fixed-free chain:
// w_j = 2 sqrt(k/m) sin((2j-1) pi / (2(2n+1))).
Eigen::VectorXd uniform_chain_natural_frequencies(double stiffness, double mass, int n_dof);

// Frequency of the first interior local maximum at least rel_height of the
// global maximum, refined by parabolic interpolation.
double first_peak_frequency(const Eigen::VectorXd& values, const Eigen::VectorXd& freqs,
                            double rel_height = 0.25);

}  // namespace sdgen::dynsim

#endif
