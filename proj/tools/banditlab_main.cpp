#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "banditlab/cli.hpp"

// Command-line entry point. Seed precedence, lowest to highest: built-in
// default, BANDITLAB_SEED, config file, --seed flag.

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo harness for adaptively weighted inference on bandit data"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> reps_flag;
    std::optional<int> threads_flag;
    bool full_scale = false;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed_flag, "Master seed (overrides config)");
    app.add_option("--reps", reps_flag, "Replication count (overrides config)");
    app.add_option("--threads", threads_flag, "Worker threads, 0 = hardware");
    app.add_flag("--full-scale", full_scale, "Paper-scale repetitions and horizon grid");

    for (const std::string& name : banditlab::known_commands()) {
        app.add_subcommand(name);
    }

    CLI11_PARSE(app, argc, argv);
    std::string command = app.get_subcommands().front()->get_name();

    try {
        banditlab::RunConfig base;
        if (const char* env_seed = std::getenv("BANDITLAB_SEED")) {
            base.seed = std::strtoull(env_seed, nullptr, 10);
        }
        banditlab::RunConfig cfg = base;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::fprintf(stderr, "cannot open config file: %s\n", config_path.c_str());
                return 2;
            }
            std::ostringstream ss;
            ss << in.rdbuf();
            cfg = banditlab::parse_config_text_with_base(ss.str(), base);
        }
        if (seed_flag) cfg.seed = *seed_flag;
        if (reps_flag) {
            cfg.n_reps = *reps_flag;
            cfg.n_reps_explicit = true;
        }
        if (threads_flag) cfg.threads = *threads_flag;
        if (full_scale) banditlab::apply_full_scale(cfg);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        return banditlab::dispatch(command, cfg);
    } catch (const banditlab::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const banditlab::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
