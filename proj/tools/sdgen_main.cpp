#include <CLI11.hpp>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sdgen/cli.hpp"
#include "sdgen/error.hpp"
#include "sdgen/textio.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::string data_dir;
    long seed = -1;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_data) {
    cmd->add_option("--config", flags.config_path, "configuration file (key = value lines)");
    cmd->add_option("--out", flags.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", flags.seed, "random seed (overrides the config file)");
    if (with_data)
        cmd->add_option("--data", flags.data_dir, "directory produced by toy-gen / sim-gen");
}

sdgen::cli::RunConfig build_config(const CLI::App* cmd, const CommonFlags& flags) {
    sdgen::cli::RunConfig cfg;
    if (!flags.config_path.empty()) cfg = sdgen::cli::parse_config_file(flags.config_path);
    if (cmd->count("--seed") > 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
    cfg.out_dir = flags.out_dir;
    cfg.data_dir = flags.data_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional-GAN generation of parametrised structural data"};
    app.require_subcommand(1);

    CommonFlags toy_gen_flags, sim_gen_flags, train_flags, sweep_flags, eval_flags, gen_flags;

    auto* toy_gen = app.add_subcommand("toy-gen", "generate the rotated-line datasets");
    add_common(toy_gen, toy_gen_flags, false);

    auto* sim_gen = app.add_subcommand("sim-gen", "simulate the 6-DOF chain datasets");
    add_common(sim_gen, sim_gen_flags, false);

    auto* train = app.add_subcommand("train", "train a cGAN and keep the best-KL checkpoint");
    add_common(train, train_flags, true);

    auto* sweep = app.add_subcommand("sweep", "hidden-width sweep with restarts");
    add_common(sweep, sweep_flags, true);
    bool full_scale = false;
    int jobs = 0;
    sweep->add_flag("--full-scale", full_scale, "widths {10..800}, 10 restarts");
    sweep->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    auto* evaluate = app.add_subcommand("evaluate", "KL report and overlay points for a split");
    add_common(evaluate, eval_flags, true);
    std::string checkpoint, split = "test", codes_arg;
    evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    evaluate->add_option("--split", split, "train, validation or test")->capture_default_str();
    evaluate->add_option("--codes", codes_arg, "comma-separated code values (default: all)");

    auto* generate = app.add_subcommand("generate", "sweep codes densely and emit the manifold");
    add_common(generate, gen_flags, true);
    std::string gen_checkpoint;
    double code_min = 0.0, code_max = 0.0;
    int n_codes = 100, n_samples = 100;
    generate->add_option("--checkpoint", gen_checkpoint, "checkpoint file")->required();
    auto* opt_min = generate->add_option("--code-min", code_min, "lowest code value");
    auto* opt_max = generate->add_option("--code-max", code_max, "highest code value");
    generate->add_option("--n-codes", n_codes, "code values to sweep")->capture_default_str();
    generate->add_option("--n-samples", n_samples, "samples per code")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (toy_gen->parsed()) {
            sdgen::cli::cmd_toy_gen(build_config(toy_gen, toy_gen_flags));
        } else if (sim_gen->parsed()) {
            sdgen::cli::cmd_sim_gen(build_config(sim_gen, sim_gen_flags));
        } else if (train->parsed()) {
            sdgen::cli::cmd_train(build_config(train, train_flags));
        } else if (sweep->parsed()) {
            auto cfg = build_config(sweep, sweep_flags);
            cfg.full_scale = full_scale;
            if (jobs > 0) cfg.sweep_jobs = jobs;
            sdgen::cli::cmd_sweep(cfg);
        } else if (evaluate->parsed()) {
            auto cfg = build_config(evaluate, eval_flags);
            cfg.checkpoint_path = checkpoint;
            cfg.eval_split = split;
            if (!codes_arg.empty()) {
                std::istringstream ss(codes_arg);
                std::string item;
                while (std::getline(ss, item, ','))
                    cfg.eval_codes.push_back(sdgen::parse_double(item, "--codes"));
            }
            sdgen::cli::cmd_evaluate(cfg);
        } else if (generate->parsed()) {
            auto cfg = build_config(generate, gen_flags);
            cfg.checkpoint_path = gen_checkpoint;
            if (*opt_min || *opt_max) {
                if (!(*opt_min && *opt_max))
                    throw sdgen::ConfigError("--code-min and --code-max must be given together");
                cfg.gen_code_lo = code_min;
                cfg.gen_code_hi = code_max;
                cfg.gen_range_set = true;
            }
            cfg.gen_n_codes = n_codes;
            cfg.gen_n_samples = n_samples;
            sdgen::cli::cmd_generate(cfg);
        }
    } catch (const sdgen::Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
