#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedat/augment.hpp"
#include "fedat/data.hpp"
#include "fedat/fl.hpp"
#include "fedat/models.hpp"

namespace fedat {

/// A parsed experiment config. The mode/model/aggregator lists span a run
/// matrix; every (mode, model, aggregator, seed) combination becomes one run.
struct ExperimentSpec {
    // dataset
    std::string dataset_csv;  // empty -> synthesize per `synth`
    double test_fraction = 0.2;
    // synth
    SynthSpec synth;
    bool synth_seed_set = false;  // unset -> derived from the run seed
    // fed (seed and the enumerated fields are filled per run)
    FedConfig fed;
    std::vector<Mode> modes = {Mode::FedAT};
    std::vector<Aggregator> aggregators = {Aggregator::FedAvg};
    std::map<int, std::size_t> assignment;
    // model
    std::vector<ModelKind> model_kinds = {ModelKind::SnnMlp};
    std::vector<std::size_t> hidden = {64, 32};
    double dropout = 0.2;
    // gan + augment
    GanConfig gan;
    BalanceMode target = BalanceMode::LocalMax;
    std::size_t global_count = 0;
    // eval
    std::vector<std::uint64_t> seeds = {1};
    bool weighted_metrics = false;
};

/// Strict parse: unknown sections or keys, type mismatches and constraint
/// violations all raise ConfigError naming the offending key path.
ExperimentSpec parse_config(const std::string& path);
ExperimentSpec parse_config_text(const std::string& text, const std::string& origin);

/// Round-trippable dump of the spec with every default resolved; feeding it
/// back through parse_config reproduces the spec.
std::string effective_config_text(const ExperimentSpec& spec);

/// Loads the CSV or synthesizes the dataset. An unset synth seed is derived
/// deterministically from the run seed.
Dataset materialize_dataset(const ExperimentSpec& spec, std::uint64_t run_seed);

struct RunOutcome {
    std::string name;  // run directory name under the output dir
    Mode mode = Mode::FedAT;
    ModelKind model = ModelKind::SnnMlp;
    Aggregator aggregator = Aggregator::FedAvg;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    RoundReport final_round;
};

struct MatrixResult {
    std::vector<RunOutcome> runs;
    std::size_t failures = 0;
};

/// Runs every combination, each in its own directory under out_dir with
/// rounds.csv (appended round by round), augmentation.csv, effective-config
/// and the final model checkpoint. A failing run is recorded and the rest
/// continue. Writes out_dir/summary.csv (final-round metrics, mean and sd
/// over seeds) and out_dir/effective-config.
MatrixResult run_matrix(const ExperimentSpec& spec, const std::string& out_dir,
                        std::size_t workers = 1);

/// Turns round logs into tidy long-format plot data under <dir>/plots:
/// per-run `series,round,value` files plus one `series,round,mean,sd` file
/// per combination across its seeds. `dir` is a run directory or a matrix
/// output directory.
void emit_plots_data(const std::string& dir);

}  // namespace fedat
