#ifndef SDGEN_CGAN_HPP
#define SDGEN_CGAN_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdgen/data.hpp"
#include "sdgen/density.hpp"
#include "sdgen/nnet.hpp"

namespace sdgen::cgan {

// Generator maps [noise, code] -> features through one tanh hidden layer
// and a tanh output; the discriminator scores [features, code] in (0, 1)
// through a same-width hidden layer.
struct GanPair {
    nnet::Mlp generator;
    nnet::Mlp discriminator;
    int noise_dim = 0;
    int code_dim = 0;
    int feature_dim = 0;
};

struct TrainConfig {
    int noise_dim = 2;
    int hidden_width = 64;
    int epochs = 2000;
    int batch_size = 128;
    int validation_interval = 50;
    std::uint64_t seed = 42;
    double learning_rate = 2e-4;
    double adam_beta1 = 0.5;
    double kde_bandwidth = 0.2;
    double grid_lower = -1.2;
    double grid_upper = 1.2;
    int grid_resolution = 0;  // 0: 40 per axis up to 2-D, 20 beyond
    int n_generate = 500;     // generated samples per code for validation KL

    void validate() const;
};

struct Checkpoint {
    GanPair pair;
    int epoch = 0;
    double val_kl = 0.0;
};

struct EvalRecord {
    int epoch = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double val_kl = 0.0;
};

struct TrainResult {
    Checkpoint best;
    std::vector<EvalRecord> history;
};

GanPair init_gan_pair(int feature_dim, int code_dim, const TrainConfig& cfg);

// i.i.d. standard normal, one row per sample.
Eigen::MatrixXd sample_noise(int n, int noise_dim, std::mt19937_64& rng);

// Trains the discriminator on the real batch against an equal-size fake
// batch generated at the same codes (labels 1/0). Generator untouched.
double discriminator_step(GanPair& pair, const Eigen::MatrixXd& real_features,
                          const Eigen::MatrixXd& codes, std::mt19937_64& rng,
                          nnet::OptimizerState& d_state);

// Pushes the "classify my fakes as real" error through the frozen
// discriminator into the generator. Discriminator untouched.
double generator_step(GanPair& pair, const Eigen::MatrixXd& codes, std::mt19937_64& rng,
                      nnet::OptimizerState& g_state);

// Shuffled minibatches, one discriminator step then one generator step per
// batch; every validation_interval epochs (and after the last epoch) the
// cumulative validation KL is computed and the minimizing model kept.
TrainResult train(const GroupedDataset& training, const GroupedDataset& validation,
                  const TrainConfig& cfg);

Eigen::MatrixXd generate(const GanPair& pair, const Eigen::VectorXd& code, int n,
                         std::mt19937_64& rng);

density::EvalGrid make_eval_grid(const TrainConfig& cfg, int feature_dim);

// Adapts a GanPair to the density module's sampler interface. The pair
// must outlive the sampler.
density::Sampler make_sampler(const GanPair& pair);

// "CGANv1 noise_dim=.. code_dim=.. feature_dim=.. epoch=.. val_kl=.."
// followed by the generator and discriminator MLPv1 blocks.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sdgen::cgan

#endif
