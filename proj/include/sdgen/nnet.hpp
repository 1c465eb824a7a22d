#ifndef SDGEN_NNET_HPP
#define SDGEN_NNET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace sdgen::nnet {

enum class Activation { Tanh, Sigmoid, Identity };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
    Eigen::MatrixXd weights;  // out_dim x in_dim
    Eigen::VectorXd bias;     // out_dim
    Activation activation = Activation::Identity;

    Eigen::Index in_dim() const { return weights.cols(); }
    Eigen::Index out_dim() const { return weights.rows(); }
};

struct Mlp {
    std::vector<DenseLayer> layers;

    Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
};

// Per-layer post-activation values from a forward pass; together with the
// input batch this is exactly what backward() needs.
struct ForwardCache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> post;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> bias;
};

// Adaptive moment estimates with bias correction.
struct OptimizerState {
    std::vector<Eigen::MatrixXd> m_weights, v_weights;
    std::vector<Eigen::VectorXd> m_bias, v_bias;
    long step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
// layer_dims = {input, hidden..., output}; one activation per layer.
Mlp init_mlp(const std::vector<int>& layer_dims,
             const std::vector<Activation>& activations,
             std::uint64_t seed);

OptimizerState make_optimizer_state(const Mlp& mlp, double learning_rate = 1e-3);

// Row-per-sample batches throughout: inputs is (n x input_dim).
std::pair<Eigen::MatrixXd, ForwardCache> forward(const Mlp& mlp, const Eigen::MatrixXd& inputs);

// Forward without keeping the cache.
Eigen::MatrixXd predict(const Mlp& mlp, const Eigen::MatrixXd& inputs);

// Mean binary cross-entropy. Predictions are clamped into
// [1e-7, 1 - 1e-7] before the logs; the gradient is taken at the clamped
// values, so saturated predictions still push back.
std::pair<double, Eigen::VectorXd> bce_loss(const Eigen::VectorXd& predictions,
                                            const Eigen::VectorXd& targets);

// Exact chain-rule gradients of a scalar loss w.r.t. every parameter.
// dloss_doutput must carry any batch-mean factor already.
Gradients backward(const Mlp& mlp, const ForwardCache& cache,
                   const Eigen::MatrixXd& dloss_doutput);

// Gradient w.r.t. the network inputs, parameters untouched. Used to push
// the generator's error through a frozen discriminator.
Eigen::MatrixXd backward_through_input(const Mlp& mlp, const ForwardCache& cache,
                                       const Eigen::MatrixXd& dloss_doutput);

void optimizer_step(Mlp& mlp, const Gradients& grads, OptimizerState& state);

// FNV-1a over the raw parameter bytes; equal iff parameters are bit-identical.
std::uint64_t parameter_fingerprint(const Mlp& mlp);

// Text checkpoint: "MLPv1 <n_layers>" then per layer a
// "layer <in> <out> <activation>" line, the weight rows and one bias line,
// all at 17 significant digits. Round-trips exactly.
void save_mlp(std::ostream& os, const Mlp& mlp);
Mlp load_mlp(std::istream& is);
void save_mlp_file(const std::string& path, const Mlp& mlp);
Mlp load_mlp_file(const std::string& path);

}  // namespace sdgen::nnet

#endif
