#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "fedat/errors.hpp"
#include "fedat/experiment.hpp"

namespace {

// Exit codes: 0 success, 1 config error, 2 runtime failure, 3 some matrix
// runs failed while others succeeded.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kPartialFailure = 3;

int cmd_run(const std::string& config, const std::string& out, long long seed,
            std::size_t workers) {
    fedat::ExperimentSpec spec = fedat::parse_config(config);
    if (seed >= 0) spec.seeds = {static_cast<std::uint64_t>(seed)};
    const fedat::MatrixResult res = fedat::run_matrix(spec, out, workers);
    for (const fedat::RunOutcome& o : res.runs) {
        if (o.ok) {
            std::printf("run %-40s f1=%.4f precision=%.4f recall=%.4f\n", o.name.c_str(),
                        o.final_round.f1, o.final_round.precision, o.final_round.recall);
        } else {
            std::printf("run %-40s FAILED: %s\n", o.name.c_str(), o.error.c_str());
        }
    }
    std::printf("summary: %s/summary.csv\n", out.c_str());
    if (res.failures == res.runs.size()) return kRuntimeError;
    if (res.failures > 0) return kPartialFailure;
    return kOk;
}

int cmd_synth(const std::string& config, const std::string& out) {
    const fedat::ExperimentSpec spec = fedat::parse_config(config);
    const fedat::Dataset ds = fedat::materialize_dataset(spec, spec.seeds.front());
    fedat::save_csv(ds, out);
    std::printf("wrote %zu samples, %zu features, %zu classes to %s\n", ds.n(), ds.dim(),
                ds.num_classes(), out.c_str());
    return kOk;
}

int cmd_plots(const std::string& run_dir) {
    fedat::emit_plots_data(run_dir);
    std::printf("plot data written under %s/plots\n", run_dir.c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated adversarial-training simulator for imbalanced multiclass data"};
    app.require_subcommand(1);

    std::string config, out = "runs";
    long long seed = -1;
    std::size_t workers = 1;
    CLI::App* run = app.add_subcommand("run", "Run the experiment matrix from a config file");
    run->add_option("--config", config, "Experiment config (JSON)")->required();
    run->add_option("--out", out, "Output directory (default: runs)");
    run->add_option("--seed", seed, "Override eval.seeds with a single seed");
    run->add_option("--workers", workers, "Concurrent runs (default: 1)");

    std::string synth_config, synth_out;
    CLI::App* synth = app.add_subcommand("synth-data", "Write the synthetic dataset as CSV");
    synth->add_option("--config", synth_config, "Experiment config (JSON)")->required();
    synth->add_option("--out", synth_out, "Output CSV path")->required();

    std::string plots_dir;
    CLI::App* plots = app.add_subcommand("plots", "Emit plot-ready CSV from round logs");
    plots->add_option("--run", plots_dir, "Run or matrix output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (run->parsed()) return cmd_run(config, out, seed, workers);
        if (synth->parsed()) return cmd_synth(synth_config, synth_out);
        if (plots->parsed()) return cmd_plots(plots_dir);
    } catch (const fedat::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
    return kConfigError;
}
