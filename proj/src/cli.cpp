#include "sdgen/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace fs = std::filesystem;

namespace sdgen::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream ss(value);
    while (std::getline(ss, item, ',')) items.push_back(trim(item));
    return items;
}

std::string hex16(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string meta_line(const RunConfig& cfg, const std::string& command) {
    return "sdgen " + command + " config=" + hex16(cfg.config_hash()) +
           " seed=" + std::to_string(cfg.seed);
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open '" + path.string() + "' for writing");
    return os;
}

// One row per sample: optional leading code column, then feature columns.
void write_points_csv(const fs::path& path, const std::string& meta,
                      const std::vector<std::string>& columns, const Eigen::VectorXd* codes,
                      const Eigen::MatrixXd& features) {
    auto os = open_out(path);
    os << "# " << meta << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        if (codes) os << format_full((*codes)[r]) << ',';
        for (Eigen::Index c = 0; c < features.cols(); ++c)
            os << (c ? "," : "") << format_full(features(r, c));
        os << '\n';
    }
}

GroupedDataset normalize_groups(const GroupedDataset& raw,
                                const features::NormalizationModel& norm) {
    GroupedDataset out = raw;
    for (auto& g : out) g.features = features::normalize(g.features, norm);
    return out;
}

Eigen::MatrixXd stack_features(const GroupedDataset& groups) {
    const Eigen::Index n = total_samples(groups);
    if (n == 0) throw InputError("dataset is empty");
    Eigen::MatrixXd out(n, groups.front().features.cols());
    Eigen::Index row = 0;
    for (const auto& g : groups) {
        out.middleRows(row, g.features.rows()) = g.features;
        row += g.features.rows();
    }
    return out;
}

cgan::TrainConfig train_config(const RunConfig& cfg) {
    cgan::TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    return tc;
}

std::string format_code(double code) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", code);
    return buf;
}

struct SimModels {
    features::PcaModel pca;
    features::NormalizationModel norm;
};

SimModels load_sim_models(const RunConfig& cfg) {
    const fs::path dir(cfg.data_dir);
    return {features::load_pca((dir / "sim_pca.txt").string()),
            features::load_normalizer((dir / "sim_norm.txt").string())};
}

}  // namespace

std::string RunConfig::canonical_string() const {
    std::ostringstream os;
    os << "experiment=" << experiment << '\n' << "seed=" << seed << '\n';
    os << "toy.n_per_angle=" << toy_n_per_angle << '\n';
    os << "toy.y_std=" << format_full(toy_y_std) << '\n';
    os << "toy.n_val_angles=" << toy_n_val_angles << '\n';
    os << "toy.n_test_angles=" << toy_n_test_angles << '\n';
    os << "sim.n_per_temp=" << sim_n_per_temp << '\n';
    os << "sim.humidity_min=" << format_full(sim_humidity_lo) << '\n';
    os << "sim.humidity_max=" << format_full(sim_humidity_hi) << '\n';
    os << "sim.noise_fraction=" << format_full(sim_noise_fraction) << '\n';
    os << "sim.freq_min_hz=" << format_full(sim_freq_min_hz) << '\n';
    os << "sim.freq_max_hz=" << format_full(sim_freq_max_hz) << '\n';
    os << "sim.n_freq=" << sim_n_freq << '\n';
    os << "sim.n_components=" << sim_n_components << '\n';
    os << "sim.n_dof=" << sim_n_dof << '\n';
    os << "sim.stiffness=" << format_full(sim_stiffness) << '\n';
    os << "sim.damping=" << format_full(sim_damping) << '\n';
    os << "sim.mass=" << format_full(sim_mass) << '\n';
    os << "train.noise_dim=" << train.noise_dim << '\n';
    os << "train.hidden_width=" << train.hidden_width << '\n';
    os << "train.epochs=" << train.epochs << '\n';
    os << "train.batch_size=" << train.batch_size << '\n';
    os << "train.validation_interval=" << train.validation_interval << '\n';
    os << "train.learning_rate=" << format_full(train.learning_rate) << '\n';
    os << "train.adam_beta1=" << format_full(train.adam_beta1) << '\n';
    os << "train.kde_bandwidth=" << format_full(train.kde_bandwidth) << '\n';
    os << "train.grid_min=" << format_full(train.grid_lower) << '\n';
    os << "train.grid_max=" << format_full(train.grid_upper) << '\n';
    os << "train.grid_res=" << train.grid_resolution << '\n';
    os << "train.n_generate=" << train.n_generate << '\n';
    os << "sweep.widths=";
    for (std::size_t i = 0; i < sweep_widths.size(); ++i)
        os << (i ? "," : "") << sweep_widths[i];
    os << '\n';
    os << "sweep.restarts=" << sweep_restarts << '\n';
    return os.str();
}

std::uint64_t RunConfig::config_hash() const {
    return fnv1a(canonical_string());
}

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value,
                       const std::string& where) {
    auto as_int = [&](int lo = 1) {
        const long v = parse_long(value, where);
        if (v < lo) throw ConfigError(where + ": '" + key + "' must be >= " + std::to_string(lo));
        return static_cast<int>(v);
    };
    auto as_double = [&]() { return parse_double(value, where); };

    if (key == "experiment") {
        if (value != "toy" && value != "simulation")
            throw ConfigError(where + ": experiment must be 'toy' or 'simulation'");
        cfg.experiment = value;
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_long(value, where));
    } else if (key == "toy.n_per_angle") {
        cfg.toy_n_per_angle = as_int();
    } else if (key == "toy.y_std") {
        cfg.toy_y_std = as_double();
    } else if (key == "toy.n_val_angles") {
        cfg.toy_n_val_angles = as_int();
    } else if (key == "toy.n_test_angles") {
        cfg.toy_n_test_angles = as_int();
    } else if (key == "sim.n_per_temp") {
        cfg.sim_n_per_temp = as_int();
    } else if (key == "sim.humidity_min") {
        cfg.sim_humidity_lo = as_double();
    } else if (key == "sim.humidity_max") {
        cfg.sim_humidity_hi = as_double();
    } else if (key == "sim.noise_fraction") {
        cfg.sim_noise_fraction = as_double();
    } else if (key == "sim.freq_min_hz") {
        cfg.sim_freq_min_hz = as_double();
    } else if (key == "sim.freq_max_hz") {
        cfg.sim_freq_max_hz = as_double();
    } else if (key == "sim.n_freq") {
        cfg.sim_n_freq = as_int(2);
    } else if (key == "sim.n_components") {
        cfg.sim_n_components = as_int();
    } else if (key == "sim.n_dof") {
        cfg.sim_n_dof = as_int(3);
    } else if (key == "sim.stiffness") {
        cfg.sim_stiffness = as_double();
    } else if (key == "sim.damping") {
        cfg.sim_damping = as_double();
    } else if (key == "sim.mass") {
        cfg.sim_mass = as_double();
    } else if (key == "train.noise_dim") {
        cfg.train.noise_dim = as_int();
    } else if (key == "train.hidden_width") {
        cfg.train.hidden_width = as_int();
    } else if (key == "train.epochs") {
        cfg.train.epochs = as_int(0);
    } else if (key == "train.batch_size") {
        cfg.train.batch_size = as_int();
    } else if (key == "train.validation_interval") {
        cfg.train.validation_interval = as_int();
    } else if (key == "train.learning_rate") {
        cfg.train.learning_rate = as_double();
    } else if (key == "train.adam_beta1") {
        cfg.train.adam_beta1 = as_double();
    } else if (key == "train.kde_bandwidth") {
        cfg.train.kde_bandwidth = as_double();
    } else if (key == "train.grid_min") {
        cfg.train.grid_lower = as_double();
    } else if (key == "train.grid_max") {
        cfg.train.grid_upper = as_double();
    } else if (key == "train.grid_res") {
        cfg.train.grid_resolution = as_int(0);
    } else if (key == "train.n_generate") {
        cfg.train.n_generate = as_int();
    } else if (key == "sweep.widths") {
        std::vector<int> widths;
        for (const auto& item : split_list(value)) {
            const long w = parse_long(item, where);
            if (w < 1) throw ConfigError(where + ": sweep widths must be positive");
            if (!widths.empty() && w <= widths.back())
                throw ConfigError(where + ": sweep widths must be strictly ascending");
            widths.push_back(static_cast<int>(w));
        }
        if (widths.empty()) throw ConfigError(where + ": sweep.widths is empty");
        cfg.sweep_widths = std::move(widths);
    } else if (key == "sweep.restarts") {
        cfg.sweep_restarts = as_int();
    } else if (key == "sweep.jobs") {
        cfg.sweep_jobs = as_int(0);
    } else {
        throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open config '" + path + "'");
    RunConfig cfg;
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key or value");
        apply_config_line(cfg, key, value, path + ":" + std::to_string(line_no));
    }
    return cfg;
}

ExperimentData load_experiment_data(const RunConfig& cfg) {
    if (cfg.data_dir.empty()) throw ConfigError("no data directory given (use --data)");
    const fs::path dir(cfg.data_dir);
    ExperimentData data;
    if (cfg.experiment == "toy") {
        data.manifest = datasets::read_split_manifest((dir / "toy_splits.txt").string());
        const auto norm = features::load_normalizer((dir / "toy_norm.txt").string());
        data.train = normalize_groups(datasets::read_toy_csv((dir / "toy_train.csv").string()), norm);
        data.validation =
            normalize_groups(datasets::read_toy_csv((dir / "toy_val.csv").string()), norm);
        data.test = normalize_groups(datasets::read_toy_csv((dir / "toy_test.csv").string()), norm);
    } else {
        data.manifest = datasets::read_split_manifest((dir / "sim_splits.txt").string());
        const auto groups = datasets::read_projected_csv((dir / "sim_projected.csv").string());
        auto splits = datasets::make_sim_splits(groups);
        data.train = std::move(splits.train);
        data.validation = std::move(splits.validation);
        data.test = std::move(splits.test);
    }
    for (auto* part : {&data.train, &data.validation, &data.test})
        datasets::assign_codes(*part, data.manifest.code_lo, data.manifest.code_hi);
    return data;
}

void cmd_toy_gen(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    const std::string meta = meta_line(cfg, "toy-gen");

    datasets::ToyConfig toy;
    toy.n_per_angle = cfg.toy_n_per_angle;
    toy.y_std = cfg.toy_y_std;
    toy.seed = cfg.seed;
    const datasets::ToySplits splits =
        datasets::make_toy_splits(toy, cfg.toy_n_val_angles, cfg.toy_n_test_angles);

    datasets::write_toy_csv((dir / "toy_train.csv").string(), splits.train, meta);
    datasets::write_toy_csv((dir / "toy_val.csv").string(), splits.validation, meta);
    datasets::write_toy_csv((dir / "toy_test.csv").string(), splits.test, meta);

    const auto norm = features::fit_normalizer(stack_features(splits.train));
    features::save_normalizer((dir / "toy_norm.txt").string(), norm);

    datasets::SplitManifest manifest;
    manifest.experiment = "toy";
    manifest.code_lo = splits.angle_lo;
    manifest.code_hi = splits.angle_hi;
    for (const auto& g : splits.train) manifest.train.push_back(g.physical_code);
    for (const auto& g : splits.validation) manifest.validation.push_back(g.physical_code);
    for (const auto& g : splits.test) manifest.test.push_back(g.physical_code);
    datasets::write_split_manifest((dir / "toy_splits.txt").string(), manifest, meta);
}

void cmd_sim_gen(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    const std::string meta = meta_line(cfg, "sim-gen");

    const auto base =
        dynsim::make_uniform_chain(cfg.sim_n_dof, cfg.sim_stiffness, cfg.sim_damping, cfg.sim_mass);
    const auto grid =
        dynsim::linear_frequency_grid(cfg.sim_freq_min_hz, cfg.sim_freq_max_hz, cfg.sim_n_freq);
    const std::vector<double> temps = datasets::sim_temperatures();

    const auto records =
        dynsim::build_dataset(base, temps, cfg.sim_n_per_temp, cfg.sim_humidity_lo,
                              cfg.sim_humidity_hi, grid, cfg.sim_noise_fraction, cfg.seed);
    datasets::write_sim_csv((dir / "sim_raw.csv").string(), records, meta);

    // log magnitudes -> PCA scores -> [-1, 1]; the model never sees humidity
    Eigen::MatrixXd log_features(records.size(), records.front().values.size());
    Eigen::VectorXd temperatures(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        log_features.row(static_cast<Eigen::Index>(r)) =
            records[r].values.array().log10().transpose();
        temperatures[static_cast<Eigen::Index>(r)] = records[r].temperature;
    }
    const auto pca = features::fit_pca(log_features, cfg.sim_n_components);
    features::save_pca((dir / "sim_pca.txt").string(), pca);

    const Eigen::MatrixXd scores = features::project(log_features, pca);
    const auto norm = features::fit_normalizer(scores);
    features::save_normalizer((dir / "sim_norm.txt").string(), norm);
    datasets::write_projected_csv((dir / "sim_projected.csv").string(), temperatures,
                                  features::normalize(scores, norm), meta);

    datasets::SplitManifest manifest;
    manifest.experiment = "simulation";
    manifest.code_lo = temps.front();
    manifest.code_hi = temps.back();
    for (double t : temps) {
        if (t == 24.0)
            manifest.validation.push_back(t);
        else if (t == 34.0)
            manifest.test.push_back(t);
        else
            manifest.train.push_back(t);
    }
    datasets::write_split_manifest((dir / "sim_splits.txt").string(), manifest, meta);
}

void cmd_train(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    const std::string meta = meta_line(cfg, "train");

    const ExperimentData data = load_experiment_data(cfg);
    const cgan::TrainResult result = cgan::train(data.train, data.validation, train_config(cfg));

    cgan::save_checkpoint((dir / "checkpoint.txt").string(), result.best);
    auto os = open_out(dir / "kl_history.csv");
    os << "# " << meta << '\n';
    os << "epoch,d_loss,g_loss,val_kl\n";
    for (const auto& rec : result.history)
        os << rec.epoch << ',' << format_full(rec.d_loss) << ',' << format_full(rec.g_loss) << ','
           << format_full(rec.val_kl) << '\n';
}

void cmd_sweep(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    const std::string meta = meta_line(cfg, "sweep");

    std::vector<int> widths = cfg.sweep_widths;
    int restarts = cfg.sweep_restarts;
    if (cfg.full_scale) {
        widths.clear();
        for (int w = 10; w <= 800; w += 10) widths.push_back(w);
        restarts = 10;
    }

    const ExperimentData data = load_experiment_data(cfg);

    struct RunResult {
        int width = 0;
        int restart = 0;
        std::uint64_t seed = 0;
        bool ok = false;
        std::string error;
        int best_epoch = 0;
        double val_kl = 0.0;
    };
    std::vector<RunResult> runs(widths.size() * static_cast<std::size_t>(restarts));
    for (std::size_t wi = 0; wi < widths.size(); ++wi)
        for (int r = 0; r < restarts; ++r) {
            auto& run = runs[wi * restarts + r];
            run.width = widths[wi];
            run.restart = r;
            run.seed = derive_seed(cfg.seed, (static_cast<std::uint64_t>(widths[wi]) << 32) |
                                                 static_cast<std::uint64_t>(r));
        }

    std::mutex best_mutex;
    cgan::Checkpoint best;
    best.val_kl = std::numeric_limits<double>::infinity();
    int best_width = 0, best_restart = 0;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= runs.size()) return;
            RunResult& run = runs[i];
            try {
                cgan::TrainConfig tc = train_config(cfg);
                tc.hidden_width = run.width;
                tc.seed = run.seed;
                cgan::TrainResult tr = cgan::train(data.train, data.validation, tc);
                run.ok = true;
                run.best_epoch = tr.best.epoch;
                run.val_kl = tr.best.val_kl;
                std::lock_guard<std::mutex> lock(best_mutex);
                const auto candidate = std::make_tuple(tr.best.val_kl, run.width, run.restart);
                if (candidate < std::make_tuple(best.val_kl, best_width, best_restart)) {
                    best = std::move(tr.best);
                    best_width = run.width;
                    best_restart = run.restart;
                }
            } catch (const Error& e) {
                run.error = std::string(e.category()) + ": " + e.what();
            } catch (const std::exception& e) {
                run.error = std::string("internal: ") + e.what();
            }
            std::replace(run.error.begin(), run.error.end(), ',', ';');
        }
    };

    unsigned n_jobs = cfg.sweep_jobs > 0 ? static_cast<unsigned>(cfg.sweep_jobs)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_jobs = std::min<unsigned>(n_jobs, runs.size());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<std::size_t> idx(runs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = runs[a];
        const auto& rb = runs[b];
        if (ra.ok != rb.ok) return ra.ok;  // failures sink to the bottom
        if (ra.ok && ra.val_kl != rb.val_kl) return ra.val_kl < rb.val_kl;
        return std::tie(ra.width, ra.restart) < std::tie(rb.width, rb.restart);
    });

    auto os = open_out(dir / "leaderboard.csv");
    os << "# " << meta << '\n';
    os << "width,restart,seed,status,best_epoch,val_kl\n";
    for (std::size_t i : idx) {
        const auto& run = runs[i];
        os << run.width << ',' << run.restart << ',' << run.seed << ','
           << (run.ok ? "ok" : "failed " + run.error) << ',' << run.best_epoch << ','
           << (run.ok ? format_full(run.val_kl) : "") << '\n';
    }

    if (!std::isfinite(best.val_kl)) throw NumericError("every sweep run failed");
    cgan::save_checkpoint((dir / "best_checkpoint.txt").string(), best);
}

void cmd_evaluate(const RunConfig& cfg) {
    if (cfg.checkpoint_path.empty()) throw ConfigError("no checkpoint given (use --checkpoint)");
    const fs::path dir = ensure_out_dir(cfg);
    const std::string meta = meta_line(cfg, "evaluate");

    const cgan::Checkpoint checkpoint = cgan::load_checkpoint(cfg.checkpoint_path);
    const ExperimentData data = load_experiment_data(cfg);

    const GroupedDataset* split = nullptr;
    if (cfg.eval_split == "train")
        split = &data.train;
    else if (cfg.eval_split == "validation")
        split = &data.validation;
    else if (cfg.eval_split == "test")
        split = &data.test;
    else
        throw ConfigError("unknown split '" + cfg.eval_split + "'");

    GroupedDataset selected;
    if (cfg.eval_codes.empty()) {
        selected = *split;
    } else {
        for (double requested : cfg.eval_codes) {
            const auto it = std::find_if(split->begin(), split->end(), [&](const CodeGroup& g) {
                return std::abs(g.physical_code - requested) < 1e-9;
            });
            if (it == split->end())
                throw LookupError("code " + format_code(requested) + " is not in the " +
                                  cfg.eval_split + " split");
            selected.push_back(*it);
        }
    }

    // plot space: raw x,y for the toy data, raw PCA scores for the simulation
    features::NormalizationModel plot_norm;
    std::vector<std::string> columns;
    if (cfg.experiment == "toy") {
        plot_norm = features::load_normalizer((fs::path(cfg.data_dir) / "toy_norm.txt").string());
        columns = {"x", "y"};
    } else {
        plot_norm = load_sim_models(cfg).norm;
        for (int i = 0; i < checkpoint.pair.feature_dim; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "p_%03d", i + 1);
            columns.emplace_back(buf);
        }
    }

    const auto tc = train_config(cfg);
    const density::EvalGrid grid = cgan::make_eval_grid(tc, checkpoint.pair.feature_dim);
    std::mt19937_64 rng(derive_seed(cfg.seed, 99));

    density::KlReport report;
    report.n_val = static_cast<int>(selected.size());
    for (const auto& group : selected) {
        const Eigen::MatrixXd generated =
            cgan::generate(checkpoint.pair, group.code, tc.n_generate, rng);
        const Eigen::VectorXd P =
            density::eval_on_grid(density::kde_fit(group.features, tc.kde_bandwidth), grid);
        const Eigen::VectorXd Q =
            density::eval_on_grid(density::kde_fit(generated, tc.kde_bandwidth), grid);
        const double kl = density::kl_divergence(P, Q);
        report.per_code.emplace_back(group.physical_code, kl);
        report.cumulative += kl;

        const std::string tag = format_code(group.physical_code);
        write_points_csv(dir / ("real_" + tag + ".csv"), meta, columns, nullptr,
                         features::denormalize(group.features, plot_norm));
        write_points_csv(dir / ("gen_" + tag + ".csv"), meta, columns, nullptr,
                         features::denormalize(generated, plot_norm));
    }
    density::save_kl_report((dir / "kl_report.csv").string(), report, meta);
}

void cmd_generate(const RunConfig& cfg) {
    if (cfg.checkpoint_path.empty()) throw ConfigError("no checkpoint given (use --checkpoint)");
    if (cfg.gen_n_codes < 1 || cfg.gen_n_samples < 1)
        throw ConfigError("generate needs positive code and sample counts");
    const fs::path dir = ensure_out_dir(cfg);
    const std::string meta = meta_line(cfg, "generate");

    const cgan::Checkpoint checkpoint = cgan::load_checkpoint(cfg.checkpoint_path);
    const ExperimentData data = load_experiment_data(cfg);
    const auto& manifest = data.manifest;

    double lo = manifest.code_lo, hi = manifest.code_hi;
    if (cfg.gen_range_set) {
        lo = cfg.gen_code_lo;
        hi = cfg.gen_code_hi;
        if (!(hi >= lo)) throw ConfigError("generate: code range has max < min");
        if (lo < manifest.code_lo || hi > manifest.code_hi)
            std::cerr << "warning: requested code range [" << format_code(lo) << ", "
                      << format_code(hi) << "] extrapolates beyond the trained range ["
                      << format_code(manifest.code_lo) << ", " << format_code(manifest.code_hi)
                      << "]\n";
    }

    const bool simulation = cfg.experiment == "simulation";
    features::NormalizationModel plot_norm;
    features::PcaModel pca;
    std::vector<std::string> columns = {"code"};
    if (simulation) {
        SimModels models = load_sim_models(cfg);
        plot_norm = std::move(models.norm);
        pca = std::move(models.pca);
        for (int i = 0; i < checkpoint.pair.feature_dim; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "p_%03d", i + 1);
            columns.emplace_back(buf);
        }
    } else {
        plot_norm = features::load_normalizer((fs::path(cfg.data_dir) / "toy_norm.txt").string());
        columns.insert(columns.end(), {"x", "y"});
    }

    std::mt19937_64 rng(derive_seed(cfg.seed, 4242));
    const Eigen::VectorXd code_values =
        cfg.gen_n_codes == 1 ? Eigen::VectorXd::Constant(1, lo).eval()
                             : Eigen::VectorXd::LinSpaced(cfg.gen_n_codes, lo, hi).eval();

    const Eigen::Index rows =
        static_cast<Eigen::Index>(cfg.gen_n_codes) * static_cast<Eigen::Index>(cfg.gen_n_samples);
    Eigen::VectorXd out_codes(rows);
    Eigen::MatrixXd out_features(rows, checkpoint.pair.feature_dim);
    Eigen::MatrixXd mean_trans;  // per code, simulation only
    if (simulation) mean_trans.resize(cfg.gen_n_codes, pca.n_features());

    for (int ci = 0; ci < cfg.gen_n_codes; ++ci) {
        const double physical = code_values[ci];
        Eigen::VectorXd code(1);
        code[0] = 2.0 * (physical - manifest.code_lo) / (manifest.code_hi - manifest.code_lo) - 1.0;
        const Eigen::MatrixXd generated =
            cgan::generate(checkpoint.pair, code, cfg.gen_n_samples, rng);
        const Eigen::MatrixXd plot_points = features::denormalize(generated, plot_norm);
        out_codes.segment(static_cast<Eigen::Index>(ci) * cfg.gen_n_samples, cfg.gen_n_samples)
            .setConstant(physical);
        out_features.middleRows(static_cast<Eigen::Index>(ci) * cfg.gen_n_samples,
                                cfg.gen_n_samples) = plot_points;
        if (simulation) {
            // back to transmissibility units: scores -> log curves -> 10^x
            const Eigen::MatrixXd curves =
                features::reconstruct(plot_points, pca).array().min(300.0).unaryExpr(
                    [](double v) { return std::pow(10.0, v); });
            mean_trans.row(ci) = curves.colwise().mean();
        }
    }

    write_points_csv(dir / "manifold.csv", meta, columns, &out_codes, out_features);
    if (simulation) {
        auto os = open_out(dir / "manifold_trans.csv");
        os << "# " << meta << '\n';
        os << "temperature";
        for (Eigen::Index i = 0; i < mean_trans.cols(); ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "f_%04d", static_cast<int>(i) + 1);
            os << ',' << buf;
        }
        os << '\n';
        for (int ci = 0; ci < cfg.gen_n_codes; ++ci) {
            os << format_full(code_values[ci]);
            for (Eigen::Index c = 0; c < mean_trans.cols(); ++c)
                os << ',' << format_full(mean_trans(ci, c));
            os << '\n';
        }
    }
}

}  // namespace sdgen::cli
