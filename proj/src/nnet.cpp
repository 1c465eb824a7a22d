#include "sdgen/nnet.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace sdgen::nnet {

namespace {

constexpr double kBceClamp = 1e-7;

// Saturated tanh/sigmoid round to exactly +-1 or 0 in doubles; nudging them
// inside the open interval keeps the range contracts and downstream logs
// finite. The derivative at the clamp is ~1e-15, matching true saturation.
constexpr double kSatLimit = 1.0 - 1e-15;

void apply_activation_in_place(Activation a, Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::Tanh:
            // via the vectorized exponential; std::tanh stays scalar for doubles
            z = (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).min(kSatLimit).max(-kSatLimit);
            return;
        case Activation::Sigmoid:
            z = (1.0 / (1.0 + (-z.array()).exp())).min(kSatLimit).max(1.0 - kSatLimit);
            return;
        case Activation::Identity:
            return;
    }
    throw ConfigError("unknown activation");
}

// Derivative in terms of the post-activation value.
Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& post) {
    switch (a) {
        case Activation::Tanh: return (1.0 - post.array().square()).matrix();
        case Activation::Sigmoid: return (post.array() * (1.0 - post.array())).matrix();
        case Activation::Identity: return Eigen::MatrixXd::Ones(post.rows(), post.cols());
    }
    throw ConfigError("unknown activation");
}

void check_cache(const Mlp& mlp, const ForwardCache& cache, const Eigen::MatrixXd& dloss) {
    const auto n_layers = static_cast<Eigen::Index>(mlp.layers.size());
    if (static_cast<Eigen::Index>(cache.post.size()) != n_layers)
        throw ShapeError("forward cache does not match network layer count");
    if (dloss.rows() != cache.input.rows() || dloss.cols() != mlp.output_dim())
        throw ShapeError("output gradient shape does not match cached batch");
    for (Eigen::Index l = 0; l < n_layers; ++l) {
        if (cache.post[l].cols() != mlp.layers[l].out_dim())
            throw ShapeError("forward cache does not match network dimensions");
    }
}

// Shared backprop core; optionally accumulates parameter gradients.
Eigen::MatrixXd backprop(const Mlp& mlp, const ForwardCache& cache,
                         const Eigen::MatrixXd& dloss_doutput, Gradients* grads) {
    check_cache(mlp, cache, dloss_doutput);
    const int n_layers = static_cast<int>(mlp.layers.size());
    if (grads) {
        grads->weights.resize(n_layers);
        grads->bias.resize(n_layers);
    }
    Eigen::MatrixXd delta = dloss_doutput;
    for (int l = n_layers - 1; l >= 0; --l) {
        const DenseLayer& layer = mlp.layers[l];
        delta = delta.cwiseProduct(activation_derivative(layer.activation, cache.post[l]));
        const Eigen::MatrixXd& prev = (l == 0) ? cache.input : cache.post[l - 1];
        if (grads) {
            grads->weights[l] = delta.transpose() * prev;
            grads->bias[l] = delta.colwise().sum().transpose();
        }
        delta = delta * layer.weights;  // gradient w.r.t. layer input
    }
    return delta;
}

}  // namespace

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "identity";
    }
    throw ConfigError("unknown activation");
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "identity") return Activation::Identity;
    throw ParseError("unknown activation name '" + name + "'");
}

Mlp init_mlp(const std::vector<int>& layer_dims,
             const std::vector<Activation>& activations,
             std::uint64_t seed) {
    if (layer_dims.size() < 2)
        throw ConfigError("need at least an input and an output dimension");
    for (int d : layer_dims)
        if (d <= 0) throw ConfigError("layer dimensions must be positive");
    if (activations.size() != layer_dims.size() - 1)
        throw ConfigError("need exactly one activation per layer");

    std::mt19937_64 rng(seed);
    Mlp mlp;
    mlp.layers.reserve(layer_dims.size() - 1);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer layer;
        layer.weights.resize(fan_out, fan_in);
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
                layer.weights(i, j) = dist(rng);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        layer.activation = activations[l];
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

OptimizerState make_optimizer_state(const Mlp& mlp, double learning_rate) {
    OptimizerState st;
    st.learning_rate = learning_rate;
    for (const auto& layer : mlp.layers) {
        st.m_weights.emplace_back(Eigen::MatrixXd::Zero(layer.out_dim(), layer.in_dim()));
        st.v_weights.emplace_back(Eigen::MatrixXd::Zero(layer.out_dim(), layer.in_dim()));
        st.m_bias.emplace_back(Eigen::VectorXd::Zero(layer.out_dim()));
        st.v_bias.emplace_back(Eigen::VectorXd::Zero(layer.out_dim()));
    }
    return st;
}

std::pair<Eigen::MatrixXd, ForwardCache> forward(const Mlp& mlp, const Eigen::MatrixXd& inputs) {
    if (mlp.layers.empty()) throw ShapeError("forward on an empty network");
    if (inputs.cols() != mlp.input_dim())
        throw ShapeError("input has " + std::to_string(inputs.cols()) + " columns, network expects " +
                         std::to_string(mlp.input_dim()));
    const std::size_t n_layers = mlp.layers.size();
    ForwardCache cache;
    cache.input = inputs;
    cache.post.resize(n_layers);
    const Eigen::MatrixXd* current = &cache.input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const DenseLayer& layer = mlp.layers[l];
        cache.post[l].noalias() = *current * layer.weights.transpose();
        cache.post[l].rowwise() += layer.bias.transpose();
        apply_activation_in_place(layer.activation, cache.post[l]);
        current = &cache.post[l];
    }
    Eigen::MatrixXd outputs = cache.post.back();
    return {std::move(outputs), std::move(cache)};
}

Eigen::MatrixXd predict(const Mlp& mlp, const Eigen::MatrixXd& inputs) {
    if (mlp.layers.empty()) throw ShapeError("forward on an empty network");
    if (inputs.cols() != mlp.input_dim())
        throw ShapeError("input has " + std::to_string(inputs.cols()) + " columns, network expects " +
                         std::to_string(mlp.input_dim()));
    Eigen::MatrixXd current;
    const Eigen::MatrixXd* src = &inputs;
    for (const auto& layer : mlp.layers) {
        Eigen::MatrixXd z;
        z.noalias() = *src * layer.weights.transpose();
        z.rowwise() += layer.bias.transpose();
        apply_activation_in_place(layer.activation, z);
        current = std::move(z);
        src = &current;
    }
    return current;
}

std::pair<double, Eigen::VectorXd> bce_loss(const Eigen::VectorXd& predictions,
                                            const Eigen::VectorXd& targets) {
    if (predictions.size() != targets.size())
        throw ShapeError("prediction/target length mismatch");
    if (predictions.size() == 0) throw ShapeError("empty prediction batch");
    for (Eigen::Index i = 0; i < targets.size(); ++i)
        if (targets[i] != 0.0 && targets[i] != 1.0)
            throw InputError("targets must be 0 or 1");

    const double n = static_cast<double>(predictions.size());
    const Eigen::ArrayXd p =
        predictions.array().min(1.0 - kBceClamp).max(kBceClamp);
    const Eigen::ArrayXd t = targets.array();
    const double loss = -(t * p.log() + (1.0 - t) * (1.0 - p).log()).mean();
    Eigen::VectorXd dloss = ((p - t) / (p * (1.0 - p)) / n).matrix();
    return {loss, std::move(dloss)};
}

Gradients backward(const Mlp& mlp, const ForwardCache& cache,
                   const Eigen::MatrixXd& dloss_doutput) {
    Gradients grads;
    backprop(mlp, cache, dloss_doutput, &grads);
    return grads;
}

Eigen::MatrixXd backward_through_input(const Mlp& mlp, const ForwardCache& cache,
                                       const Eigen::MatrixXd& dloss_doutput) {
    return backprop(mlp, cache, dloss_doutput, nullptr);
}

void optimizer_step(Mlp& mlp, const Gradients& grads, OptimizerState& state) {
    const std::size_t n_layers = mlp.layers.size();
    if (grads.weights.size() != n_layers || state.m_weights.size() != n_layers)
        throw ShapeError("gradient/state layer count does not match network");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    for (std::size_t l = 0; l < n_layers; ++l) {
        DenseLayer& layer = mlp.layers[l];
        const Eigen::MatrixXd& gw = grads.weights[l];
        const Eigen::VectorXd& gb = grads.bias[l];
        if (gw.rows() != layer.out_dim() || gw.cols() != layer.in_dim() ||
            gb.size() != layer.out_dim())
            throw ShapeError("gradient shape does not match layer " + std::to_string(l));

        auto& mw = state.m_weights[l];
        auto& vw = state.v_weights[l];
        auto& mb = state.m_bias[l];
        auto& vb = state.v_bias[l];

        mw = state.beta1 * mw + (1.0 - state.beta1) * gw;
        vw = (state.beta2 * vw.array() + (1.0 - state.beta2) * gw.array().square()).matrix();
        mb = state.beta1 * mb + (1.0 - state.beta1) * gb;
        vb = (state.beta2 * vb.array() + (1.0 - state.beta2) * gb.array().square()).matrix();

        layer.weights.array() -= state.learning_rate * (mw.array() / bc1) /
                                 ((vw.array() / bc2).sqrt() + state.epsilon);
        layer.bias.array() -= state.learning_rate * (mb.array() / bc1) /
                              ((vb.array() / bc2).sqrt() + state.epsilon);
    }
}

std::uint64_t parameter_fingerprint(const Mlp& mlp) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& layer : mlp.layers) {
        h = fnv1a(layer.weights.data(), sizeof(double) * layer.weights.size(), h);
        h = fnv1a(layer.bias.data(), sizeof(double) * layer.bias.size(), h);
    }
    return h;
}

void save_mlp(std::ostream& os, const Mlp& mlp) {
    os << "MLPv1 " << mlp.layers.size() << '\n';
    for (const auto& layer : mlp.layers) {
        os << "layer " << layer.in_dim() << ' ' << layer.out_dim() << ' '
           << activation_name(layer.activation) << '\n';
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            write_row(os, layer.weights.row(r));
        write_row(os, layer.bias.transpose());
    }
}

Mlp load_mlp(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("checkpoint: missing MLPv1 header");
    std::istringstream header(line);
    std::string magic;
    long n_layers = 0;
    if (!(header >> magic >> n_layers) || magic != "MLPv1" || n_layers < 1)
        throw ParseError("checkpoint: bad MLPv1 header '" + line + "'");

    Mlp mlp;
    for (long l = 0; l < n_layers; ++l) {
        if (!std::getline(is, line))
            throw ParseError("checkpoint: truncated before layer " + std::to_string(l));
        std::istringstream lh(line);
        std::string tag, act;
        long in_dim = 0, out_dim = 0;
        if (!(lh >> tag >> in_dim >> out_dim >> act) || tag != "layer" || in_dim < 1 || out_dim < 1)
            throw ParseError("checkpoint: bad layer header '" + line + "'");
        DenseLayer layer;
        layer.activation = activation_from_name(act);
        layer.weights.resize(out_dim, in_dim);
        for (long r = 0; r < out_dim; ++r) {
            if (!std::getline(is, line))
                throw ParseError("checkpoint: truncated weight row " + std::to_string(r));
            const auto vals = parse_double_row(line, "checkpoint weights");
            if (static_cast<long>(vals.size()) != in_dim)
                throw ParseError("checkpoint: weight row " + std::to_string(r) + " has " +
                                 std::to_string(vals.size()) + " values, expected " +
                                 std::to_string(in_dim));
            for (long c = 0; c < in_dim; ++c) layer.weights(r, c) = vals[c];
        }
        if (!std::getline(is, line)) throw ParseError("checkpoint: truncated bias line");
        const auto vals = parse_double_row(line, "checkpoint bias");
        if (static_cast<long>(vals.size()) != out_dim)
            throw ParseError("checkpoint: bias line has " + std::to_string(vals.size()) +
                             " values, expected " + std::to_string(out_dim));
        layer.bias = Eigen::Map<const Eigen::VectorXd>(vals.data(), out_dim);
        if (!mlp.layers.empty() && mlp.layers.back().out_dim() != layer.in_dim())
            throw ParseError("checkpoint: layer " + std::to_string(l) +
                             " input dim does not match previous layer output");
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

void save_mlp_file(const std::string& path, const Mlp& mlp) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    save_mlp(os, mlp);
}

Mlp load_mlp_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    return load_mlp(is);
}

}  // namespace sdgen::nnet
