#ifndef SDGEN_CLI_HPP
#define SDGEN_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sdgen/cgan.hpp"
#include "sdgen/data.hpp"
#include "sdgen/datasets.hpp"
#include "sdgen/features.hpp"

namespace sdgen::cli {

// Flat "key = value" configuration with section prefixes (train., sim.,
// toy., sweep.). Unknown keys are errors. Command-line flags override the
// file; paths and command context never participate in the config hash.
struct RunConfig {
    std::string experiment = "toy";  // "toy" or "simulation"
    std::uint64_t seed = 42;

    // toy.*
    int toy_n_per_angle = 500;
    double toy_y_std = 0.03;
    int toy_n_val_angles = 5;
    int toy_n_test_angles = 5;

    // sim.*
    int sim_n_per_temp = 1000;
    double sim_humidity_lo = 80.0;
    double sim_humidity_hi = 100.0;
    double sim_noise_fraction = 0.05;
    double sim_freq_min_hz = 0.5;
    double sim_freq_max_hz = 35.0;
    int sim_n_freq = 256;
    int sim_n_components = 3;
    int sim_n_dof = 6;
    double sim_stiffness = 1e4;
    double sim_damping = 10.0;
    double sim_mass = 1.0;

    // train.*
    cgan::TrainConfig train;

    // sweep.*
    std::vector<int> sweep_widths = {50, 100, 200, 500};
    int sweep_restarts = 3;
    int sweep_jobs = 0;  // 0: hardware concurrency

    // command context (flags, not config file)
    std::string out_dir = "out";
    std::string data_dir;
    std::string checkpoint_path;
    std::string eval_split = "test";
    std::vector<double> eval_codes;  // empty: every code in the split
    double gen_code_lo = 0.0;
    double gen_code_hi = 0.0;
    bool gen_range_set = false;
    int gen_n_codes = 100;
    int gen_n_samples = 100;
    bool full_scale = false;

    // Canonical serialization of the hashed portion (config keys + seed).
    std::string canonical_string() const;
    std::uint64_t config_hash() const;
};

RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value,
                       const std::string& where);

// Loaded, model-facing datasets: features normalized, codes assigned.
struct ExperimentData {
    GroupedDataset train, validation, test;
    datasets::SplitManifest manifest;
};

ExperimentData load_experiment_data(const RunConfig& cfg);

// Commands. Each is deterministic given (config, seed) and stamps every
// artifact with the config hash and seed.
void cmd_toy_gen(const RunConfig& cfg);
void cmd_sim_gen(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_sweep(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_generate(const RunConfig& cfg);

}  // namespace sdgen::cli

#endif
