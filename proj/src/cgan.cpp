#include "sdgen/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace sdgen::cgan {

namespace {

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

void check_dataset(const GroupedDataset& groups, const char* name, int feature_dim,
                   int code_dim) {
    if (groups.empty()) throw ConfigError(std::string(name) + " dataset is empty");
    for (const auto& g : groups) {
        if (g.features.rows() == 0)
            throw ConfigError(std::string(name) + " dataset has an empty code group");
        if (g.features.cols() != feature_dim || g.code.size() != code_dim)
            throw ShapeError(std::string(name) + " dataset has inconsistent dimensions");
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (noise_dim < 1 || hidden_width < 1 || batch_size < 1 || validation_interval < 1 ||
        n_generate < 1 || epochs < 0)
        throw ConfigError("train config values must be positive");
    if (!(learning_rate > 0.0) || !(kde_bandwidth > 0.0))
        throw ConfigError("learning rate and bandwidth must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0))
        throw ConfigError("adam_beta1 must lie in (0, 1)");
    if (!(grid_upper > grid_lower)) throw ConfigError("grid bounds must satisfy upper > lower");
    if (grid_resolution < 0) throw ConfigError("grid resolution must be positive (or 0 for auto)");
}

GanPair init_gan_pair(int feature_dim, int code_dim, const TrainConfig& cfg) {
    cfg.validate();
    if (feature_dim < 1 || code_dim < 1)
        throw ConfigError("feature and code dimensions must be positive");
    GanPair pair;
    pair.noise_dim = cfg.noise_dim;
    pair.code_dim = code_dim;
    pair.feature_dim = feature_dim;
    pair.generator = nnet::init_mlp({cfg.noise_dim + code_dim, cfg.hidden_width, feature_dim},
                                    {nnet::Activation::Tanh, nnet::Activation::Tanh},
                                    derive_seed(cfg.seed, 1));
    pair.discriminator = nnet::init_mlp({feature_dim + code_dim, cfg.hidden_width, 1},
                                        {nnet::Activation::Tanh, nnet::Activation::Sigmoid},
                                        derive_seed(cfg.seed, 2));
    return pair;
}

Eigen::MatrixXd sample_noise(int n, int noise_dim, std::mt19937_64& rng) {
    if (n < 1) throw InputError("sample_noise: empty batch requested");
    if (noise_dim < 1) throw InputError("sample_noise: noise dimension must be positive");
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd z(n, noise_dim);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = dist(rng);
    return z;
}

double discriminator_step(GanPair& pair, const Eigen::MatrixXd& real_features,
                          const Eigen::MatrixXd& codes, std::mt19937_64& rng,
                          nnet::OptimizerState& d_state) {
    const Eigen::Index n = real_features.rows();
    if (n == 0) throw InputError("discriminator_step: empty batch");
    if (codes.rows() != n || real_features.cols() != pair.feature_dim ||
        codes.cols() != pair.code_dim)
        throw ShapeError("discriminator_step: batch shape does not match the model");

    const Eigen::MatrixXd z = sample_noise(static_cast<int>(n), pair.noise_dim, rng);
    const Eigen::MatrixXd fake = nnet::predict(pair.generator, hcat(z, codes));

    Eigen::MatrixXd d_in(2 * n, pair.feature_dim + pair.code_dim);
    d_in << hcat(real_features, codes), hcat(fake, codes);
    Eigen::VectorXd targets(2 * n);
    targets.head(n).setOnes();   // real
    targets.tail(n).setZero();   // generated

    auto [scores, cache] = nnet::forward(pair.discriminator, d_in);
    auto [loss, dloss] = nnet::bce_loss(scores.col(0), targets);
    const nnet::Gradients grads = nnet::backward(pair.discriminator, cache, dloss);
    nnet::optimizer_step(pair.discriminator, grads, d_state);
    return loss;
}

double generator_step(GanPair& pair, const Eigen::MatrixXd& codes, std::mt19937_64& rng,
                      nnet::OptimizerState& g_state) {
    const Eigen::Index n = codes.rows();
    if (n == 0) throw InputError("generator_step: empty code batch");
    if (codes.cols() != pair.code_dim)
        throw ShapeError("generator_step: code shape does not match the model");

    const Eigen::MatrixXd z = sample_noise(static_cast<int>(n), pair.noise_dim, rng);
    auto [fake, g_cache] = nnet::forward(pair.generator, hcat(z, codes));
    auto [scores, d_cache] = nnet::forward(pair.discriminator, hcat(fake, codes));

    // target label 1: the generator wants its samples classified real
    auto [loss, dloss] = nnet::bce_loss(scores.col(0), Eigen::VectorXd::Ones(n));
    const Eigen::MatrixXd d_input_grad =
        nnet::backward_through_input(pair.discriminator, d_cache, dloss);
    const nnet::Gradients grads = nnet::backward(
        pair.generator, g_cache, d_input_grad.leftCols(pair.feature_dim));
    nnet::optimizer_step(pair.generator, grads, g_state);
    return loss;
}

TrainResult train(const GroupedDataset& training, const GroupedDataset& validation,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (training.empty()) throw ConfigError("training dataset is empty");
    const int feature_dim = static_cast<int>(training.front().features.cols());
    const int code_dim = static_cast<int>(training.front().code.size());
    check_dataset(training, "training", feature_dim, code_dim);
    check_dataset(validation, "validation", feature_dim, code_dim);
    if (training.size() < 2) throw ConfigError("training dataset needs at least two code groups");
    for (const auto& vg : validation)
        for (const auto& tg : training)
            if ((vg.code - tg.code).cwiseAbs().maxCoeff() < 1e-12)
                throw ConfigError("validation code overlaps a training code");

    // flatten the groups into row-aligned feature and code matrices
    const Eigen::Index n_total = total_samples(training);
    Eigen::MatrixXd features(n_total, feature_dim);
    Eigen::MatrixXd codes(n_total, code_dim);
    {
        Eigen::Index row = 0;
        for (const auto& g : training) {
            features.middleRows(row, g.features.rows()) = g.features;
            codes.middleRows(row, g.features.rows()) =
                g.code.transpose().replicate(g.features.rows(), 1);
            row += g.features.rows();
        }
    }

    GanPair pair = init_gan_pair(feature_dim, code_dim, cfg);
    nnet::OptimizerState g_state = nnet::make_optimizer_state(pair.generator, cfg.learning_rate);
    nnet::OptimizerState d_state =
        nnet::make_optimizer_state(pair.discriminator, cfg.learning_rate);
    g_state.beta1 = cfg.adam_beta1;
    d_state.beta1 = cfg.adam_beta1;

    const density::EvalGrid grid = make_eval_grid(cfg, feature_dim);
    std::mt19937_64 train_rng(derive_seed(cfg.seed, 3));
    std::vector<Eigen::Index> order(n_total);
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    TrainResult result;
    result.best.val_kl = std::numeric_limits<double>::infinity();
    int n_evals = 0;

    auto evaluate = [&](int epoch, double d_loss, double g_loss) {
        std::mt19937_64 val_rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(n_evals)));
        ++n_evals;
        const density::KlReport report = density::cumulative_validation_kl(
            make_sampler(pair), validation, grid, cfg.kde_bandwidth, cfg.n_generate, val_rng);
        result.history.push_back({epoch, d_loss, g_loss, report.cumulative});
        if (report.cumulative < result.best.val_kl)
            result.best = Checkpoint{pair, epoch, report.cumulative};
    };

    if (cfg.epochs == 0) {
        evaluate(0, 0.0, 0.0);
        return result;
    }

    const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, n_total);
    Eigen::MatrixXd batch_features(batch, feature_dim);
    Eigen::MatrixXd batch_codes(batch, code_dim);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), train_rng);
        double d_loss_sum = 0.0, g_loss_sum = 0.0;
        int n_batches = 0;
        for (Eigen::Index start = 0; start + batch <= n_total; start += batch) {
            for (Eigen::Index i = 0; i < batch; ++i) {
                batch_features.row(i) = features.row(order[start + i]);
                batch_codes.row(i) = codes.row(order[start + i]);
            }
            d_loss_sum +=
                discriminator_step(pair, batch_features, batch_codes, train_rng, d_state);
            g_loss_sum += generator_step(pair, batch_codes, train_rng, g_state);
            ++n_batches;
        }
        if (epoch % cfg.validation_interval == 0 || epoch == cfg.epochs)
            evaluate(epoch, d_loss_sum / n_batches, g_loss_sum / n_batches);
    }
    return result;
}

Eigen::MatrixXd generate(const GanPair& pair, const Eigen::VectorXd& code, int n,
                         std::mt19937_64& rng) {
    if (code.size() != pair.code_dim)
        throw ShapeError("generate: code dimension does not match the model");
    const Eigen::MatrixXd z = sample_noise(n, pair.noise_dim, rng);
    return nnet::predict(pair.generator, hcat(z, code.transpose().replicate(n, 1)));
}

density::EvalGrid make_eval_grid(const TrainConfig& cfg, int feature_dim) {
    int res = cfg.grid_resolution;
    if (res == 0) res = feature_dim <= 2 ? 40 : 20;
    return density::EvalGrid::uniform(feature_dim, cfg.grid_lower, cfg.grid_upper, res);
}

density::Sampler make_sampler(const GanPair& pair) {
    return [&pair](const Eigen::VectorXd& code, int n, std::mt19937_64& rng) {
        return generate(pair, code, n, rng);
    };
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    os << "CGANv1 noise_dim=" << checkpoint.pair.noise_dim
       << " code_dim=" << checkpoint.pair.code_dim
       << " feature_dim=" << checkpoint.pair.feature_dim << " epoch=" << checkpoint.epoch
       << " val_kl=" << format_full(checkpoint.val_kl) << '\n';
    nnet::save_mlp(os, checkpoint.pair.generator);
    nnet::save_mlp(os, checkpoint.pair.discriminator);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw ParseError(path + ": missing CGANv1 header");
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "CGANv1") throw ParseError(path + ": bad checkpoint header '" + line + "'");

    Checkpoint checkpoint;
    std::string token;
    while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ": malformed header field '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "noise_dim")
            checkpoint.pair.noise_dim = static_cast<int>(parse_long(value, path));
        else if (key == "code_dim")
            checkpoint.pair.code_dim = static_cast<int>(parse_long(value, path));
        else if (key == "feature_dim")
            checkpoint.pair.feature_dim = static_cast<int>(parse_long(value, path));
        else if (key == "epoch")
            checkpoint.epoch = static_cast<int>(parse_long(value, path));
        else if (key == "val_kl")
            checkpoint.val_kl = parse_double(value, path);
        else
            throw ParseError(path + ": unknown header field '" + key + "'");
    }
    checkpoint.pair.generator = nnet::load_mlp(is);
    checkpoint.pair.discriminator = nnet::load_mlp(is);

    const auto& g = checkpoint.pair;
    if (g.noise_dim < 1 || g.code_dim < 1 || g.feature_dim < 1 ||
        g.generator.input_dim() != g.noise_dim + g.code_dim ||
        g.generator.output_dim() != g.feature_dim ||
        g.discriminator.input_dim() != g.feature_dim + g.code_dim ||
        g.discriminator.output_dim() != 1)
        throw ParseError(path + ": checkpoint dimensions are inconsistent");
    return checkpoint;
}

}  // namespace sdgen::cgan
