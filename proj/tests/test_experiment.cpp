#include "doctest.h"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fedat/errors.hpp"
#include "fedat/experiment.hpp"
#include "test_util.hpp"

using fedat::ExperimentSpec;

namespace {

// Small, fast matrix config used by the end-to-end tests below.
const char* kTinyConfig = R"({
  "dataset": {"test_fraction": 0.25},
  "synth": {"classes": 3, "counts": [60, 12, 9], "dim": 4, "separation": 4.0},
  "fed": {"K": 2, "T": 2, "B": 16, "E": 1, "eta": 0.01,
          "mode": ["classical_fl", "fedat"], "aggregator": "fedavg"},
  "model": {"kind": "snn_mlp", "hidden": [10, 8], "dropout": 0.1},
  "gan": {"epochs": 1, "batch": 8, "hidden": [8, 8]},
  "augment": {"target": "global_union", "global_count": 5},
  "eval": {"seeds": [1, 2]}
})";

std::string msg_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("an empty config yields the documented defaults") {
    ExperimentSpec s = fedat::parse_config_text("{}", "test");
    CHECK(s.dataset_csv.empty());
    CHECK(s.test_fraction == 0.2);
    CHECK(s.synth.num_classes == 4);
    CHECK(s.synth.counts == std::vector<std::size_t>{5000, 60, 50, 40});
    CHECK(s.synth.dim == 16);
    CHECK(s.synth.separation == 3.0);
    CHECK_FALSE(s.synth_seed_set);
    CHECK(s.fed.clients == 3);
    CHECK(s.fed.rounds == 60);
    CHECK(s.fed.batch == 128);
    CHECK(s.fed.epochs == 1);
    CHECK(s.fed.eta == 0.001);
    CHECK(s.fed.mu == 0.01);
    CHECK(s.modes == std::vector<fedat::Mode>{fedat::Mode::FedAT});
    CHECK(s.aggregators == std::vector<fedat::Aggregator>{fedat::Aggregator::FedAvg});
    CHECK(s.model_kinds == std::vector<fedat::ModelKind>{fedat::ModelKind::SnnMlp});
    CHECK(s.hidden == std::vector<std::size_t>{64, 32});
    CHECK(s.dropout == 0.2);
    CHECK(s.gan.epochs == 200);
    CHECK(s.gan.batch == 128);
    CHECK(s.gan.sigma == 1.0);
    CHECK(s.gan.eta == 0.001);
    CHECK(s.gan.hidden == std::vector<std::size_t>{32, 64, 128});
    CHECK(s.target == fedat::BalanceMode::LocalMax);
    CHECK(s.global_count == 0);
    CHECK(s.seeds == std::vector<std::uint64_t>{1});
    CHECK_FALSE(s.weighted_metrics);
}

TEST_CASE("unknown sections and keys are rejected with their path") {
    auto m1 = msg_of([] { fedat::parse_config_text(R"({"fedX": {}})", "t"); });
    CHECK(m1.find("fedX") != std::string::npos);
    auto m2 = msg_of([] { fedat::parse_config_text(R"({"fed": {"rounds": 5}})", "t"); });
    CHECK(m2.find("fed.rounds") != std::string::npos);  // the key is named T
    auto m3 = msg_of([] { fedat::parse_config_text(R"({"gan": {"lr": 0.1}})", "t"); });
    CHECK(m3.find("gan.lr") != std::string::npos);
    CHECK_THROWS_AS(fedat::parse_config_text(R"({"fed": {"T": 5}, "extra": {}})", "t"),
                    fedat::ConfigError);
    CHECK_THROWS_AS(fedat::parse_config_text(R"([1, 2])", "t"), fedat::ConfigError);
    CHECK_THROWS_AS(fedat::parse_config_text("not json", "t"), fedat::ConfigError);
}

TEST_CASE("constraint violations name the offending key") {
    auto m = msg_of([] { fedat::parse_config_text(R"({"fed": {"mu": -1}})", "t"); });
    CHECK(m.find("fed.mu") != std::string::npos);
    m = msg_of([] { fedat::parse_config_text(R"({"fed": {"eta": 0}})", "t"); });
    CHECK(m.find("fed.eta") != std::string::npos);
    m = msg_of([] { fedat::parse_config_text(R"({"dataset": {"test_fraction": 1.5}})", "t"); });
    CHECK(m.find("dataset.test_fraction") != std::string::npos);
    m = msg_of([] { fedat::parse_config_text(R"({"fed": {"K": 0}})", "t"); });
    CHECK(m.find("fed.K") != std::string::npos);
    m = msg_of([] {
        fedat::parse_config_text(R"({"synth": {"classes": 3, "counts": [5, 5]}})", "t");
    });
    CHECK(m.find("synth.counts") != std::string::npos);
    // A bare counts array is fine: the class count is inferred from it.
    ExperimentSpec inferred = fedat::parse_config_text(R"({"synth": {"counts": [9, 4]}})", "t");
    CHECK(inferred.synth.num_classes == 2);
    m = msg_of(
        [] { fedat::parse_config_text(R"({"model": {"kind": "transformer"}})", "t"); });
    CHECK(m.find("model.kind") != std::string::npos);
    m = msg_of([] { fedat::parse_config_text(R"({"fed": {"T": "many"}})", "t"); });
    CHECK(m.find("fed.T") != std::string::npos);
}

TEST_CASE("enumerable axes accept scalars or arrays and reject duplicates") {
    ExperimentSpec s = fedat::parse_config_text(
        R"({"fed": {"mode": "centralized"}, "model": {"kind": ["mlp", "snn_mlp"]}})", "t");
    CHECK(s.modes == std::vector<fedat::Mode>{fedat::Mode::Centralized});
    REQUIRE(s.model_kinds.size() == 2);
    CHECK(s.model_kinds[0] == fedat::ModelKind::Mlp);

    auto m = msg_of([] {
        fedat::parse_config_text(R"({"fed": {"mode": ["fedat", "fedat"]}})", "t");
    });
    CHECK(m.find("duplicate") != std::string::npos);
    CHECK_THROWS_AS(fedat::parse_config_text(R"({"fed": {"mode": []}})", "t"),
                    fedat::ConfigError);
}

TEST_CASE("scenario assignment parses class-to-client pins") {
    ExperimentSpec s = fedat::parse_config_text(
        R"({"fed": {"K": 2, "assignment": {"1": 1, "2": 0}}})", "t");
    REQUIRE(s.assignment.size() == 2);
    CHECK(s.assignment.at(1) == 1);
    CHECK(s.assignment.at(2) == 0);
    auto m = msg_of([] {
        fedat::parse_config_text(R"({"fed": {"assignment": {"abc": 1}}})", "t");
    });
    CHECK(m.find("fed.assignment") != std::string::npos);
}

TEST_CASE("the effective config round-trips through the parser") {
    ExperimentSpec s = fedat::parse_config_text(kTinyConfig, "t");
    std::string eff = fedat::effective_config_text(s);
    ExperimentSpec back = fedat::parse_config_text(eff, "effective");
    CHECK(fedat::effective_config_text(back) == eff);
    CHECK(back.modes == s.modes);
    CHECK(back.seeds == s.seeds);
    CHECK(back.synth.counts == s.synth.counts);
    CHECK(back.global_count == s.global_count);
    CHECK(back.fed.batch == s.fed.batch);
    // Defaults materialize in the dump even when the input omitted them.
    CHECK(eff.find("\"mu\"") != std::string::npos);
    CHECK(eff.find("\"sigma\"") != std::string::npos);
}

TEST_CASE("dataset materialization is deterministic and honours pinned seeds") {
    ExperimentSpec s = fedat::parse_config_text(kTinyConfig, "t");
    // No synth seed configured: the run seed decides.
    fedat::Dataset a = fedat::materialize_dataset(s, 1);
    fedat::Dataset b = fedat::materialize_dataset(s, 1);
    fedat::Dataset c = fedat::materialize_dataset(s, 2);
    CHECK(a.features.data == b.features.data);
    CHECK(a.features.data != c.features.data);
    CHECK(a.n() == 81);

    // Pinned synth seed: identical data for every run seed.
    ExperimentSpec pinned = fedat::parse_config_text(
        R"({"synth": {"classes": 3, "counts": [60, 12, 9], "dim": 4, "seed": 9}})", "t");
    fedat::Dataset p1 = fedat::materialize_dataset(pinned, 1);
    fedat::Dataset p2 = fedat::materialize_dataset(pinned, 2);
    CHECK(p1.features.data == p2.features.data);
}

TEST_CASE("a csv dataset path loads instead of synthesizing") {
    testutil::TempDir tmp;
    ExperimentSpec gen = fedat::parse_config_text(
        R"({"synth": {"classes": 3, "counts": [30, 8, 6], "dim": 3, "seed": 4}})", "t");
    fedat::Dataset ds = fedat::materialize_dataset(gen, 1);
    fedat::save_csv(ds, tmp.file("data.csv"));

    ExperimentSpec from_csv = fedat::parse_config_text(
        std::string(R"({"dataset": {"csv": ")") + tmp.file("data.csv") + R"("}})", "t");
    fedat::Dataset loaded = fedat::materialize_dataset(from_csv, 99);
    CHECK(loaded.n() == ds.n());
    CHECK(loaded.labels == ds.labels);
    CHECK(loaded.class_names == ds.class_names);
}

TEST_CASE("run_matrix writes one directory per combination plus a summary") {
    testutil::TempDir tmp;
    ExperimentSpec s = fedat::parse_config_text(kTinyConfig, "t");
    auto result = fedat::run_matrix(s, tmp.file("out"));
    CHECK(result.failures == 0);
    REQUIRE(result.runs.size() == 4);  // 2 modes x 1 kind x 1 agg x 2 seeds

    std::vector<std::string> expected = {
        "classical_fl_snn_mlp_fedavg_seed1", "classical_fl_snn_mlp_fedavg_seed2",
        "fedat_snn_mlp_fedavg_seed1", "fedat_snn_mlp_fedavg_seed2"};
    for (const auto& name : expected) {
        auto dir = std::filesystem::path(tmp.file("out")) / name;
        CAPTURE(name);
        CHECK(std::filesystem::exists(dir / "rounds.csv"));
        CHECK(std::filesystem::exists(dir / "augmentation.csv"));
        CHECK(std::filesystem::exists(dir / "effective-config"));
        CHECK(std::filesystem::exists(dir / "model.ckpt"));
        auto rounds = testutil::read_lines((dir / "rounds.csv").string());
        REQUIRE(rounds.size() == 3);  // header + T rounds
        CHECK(rounds[0] == "round,precision,recall,f1,mean_train_loss,duration_ms");
    }
    for (const auto& run : result.runs) {
        CHECK(run.ok);
        CHECK(run.error.empty());
        CHECK(run.final_round.round == 2);
    }

    auto summary = testutil::read_lines(tmp.file("out/summary.csv"));
    REQUIRE(summary.size() == 3);  // header + one row per combination
    CHECK(summary[0] ==
          "mode,model,aggregator,seeds,status,precision_mean,precision_sd,recall_mean,"
          "recall_sd,f1_mean,f1_sd");
    CHECK(summary[1].substr(0, 31) == "classical_fl,snn_mlp,fedavg,2,o");
    CHECK(summary[2].substr(0, 24) == "fedat,snn_mlp,fedavg,2,o");
    CHECK(std::filesystem::exists(tmp.file("out/effective-config")));

    // The classifier checkpoint reloads into a usable model.
    fedat::Model m = fedat::load_model(tmp.file("out/fedat_snn_mlp_fedavg_seed1/model.ckpt"));
    CHECK(m.input_dim() == 4);
    CHECK(m.output_dim() == 3);
}

TEST_CASE("rerunning from the pinned effective config reproduces every log") {
    testutil::TempDir tmp;
    ExperimentSpec s = fedat::parse_config_text(kTinyConfig, "t");
    fedat::run_matrix(s, tmp.file("a"));

    ExperimentSpec replay = fedat::parse_config(tmp.file("a/effective-config"));
    fedat::run_matrix(replay, tmp.file("b"));

    // summary.csv carries no timing and must match byte-for-byte.
    CHECK(testutil::read_file(tmp.file("a/summary.csv")) ==
          testutil::read_file(tmp.file("b/summary.csv")));

    for (const char* name : {"classical_fl_snn_mlp_fedavg_seed1", "fedat_snn_mlp_fedavg_seed2"}) {
        CAPTURE(name);
        // Round logs match once the wall-clock duration column is dropped.
        auto a = testutil::strip_last_field(
            testutil::read_lines(tmp.file(std::string("a/") + name + "/rounds.csv")));
        auto b = testutil::strip_last_field(
            testutil::read_lines(tmp.file(std::string("b/") + name + "/rounds.csv")));
        CHECK(a == b);
        // Checkpoints and augmentation logs carry no timing at all.
        CHECK(testutil::read_file(tmp.file(std::string("a/") + name + "/model.ckpt")) ==
              testutil::read_file(tmp.file(std::string("b/") + name + "/model.ckpt")));
        CHECK(testutil::read_file(tmp.file(std::string("a/") + name + "/augmentation.csv")) ==
              testutil::read_file(tmp.file(std::string("b/") + name + "/augmentation.csv")));
    }
}

TEST_CASE("plot data is emitted per run and per combination") {
    testutil::TempDir tmp;
    ExperimentSpec s = fedat::parse_config_text(kTinyConfig, "t");
    fedat::run_matrix(s, tmp.file("out"));
    fedat::emit_plots_data(tmp.file("out"));

    auto plots = std::filesystem::path(tmp.file("out/plots"));
    REQUIRE(std::filesystem::exists(plots));
    // Per-run long format: header + 4 series x 2 rounds.
    auto run_csv = testutil::read_lines((plots / "fedat_snn_mlp_fedavg_seed1.csv").string());
    REQUIRE(run_csv.size() == 9);
    CHECK(run_csv[0] == "series,round,value");
    // Per-combination mean/sd across the 2 seeds.
    auto mean_csv = testutil::read_lines((plots / "fedat_snn_mlp_fedavg_mean.csv").string());
    REQUIRE(mean_csv.size() == 9);
    CHECK(mean_csv[0] == "series,round,mean,sd");

    // A single run directory works too.
    fedat::emit_plots_data(tmp.file("out/classical_fl_snn_mlp_fedavg_seed1"));
    CHECK(std::filesystem::exists(
        std::filesystem::path(tmp.file("out/classical_fl_snn_mlp_fedavg_seed1/plots"))));

    testutil::TempDir empty;
    CHECK_THROWS_AS(fedat::emit_plots_data(empty.path().string()), std::runtime_error);
}

TEST_CASE("per-run effective configs pin the single combination") {
    testutil::TempDir tmp;
    ExperimentSpec s = fedat::parse_config_text(kTinyConfig, "t");
    fedat::run_matrix(s, tmp.file("out"));
    ExperimentSpec pinned =
        fedat::parse_config(tmp.file("out/fedat_snn_mlp_fedavg_seed2/effective-config"));
    CHECK(pinned.modes == std::vector<fedat::Mode>{fedat::Mode::FedAT});
    CHECK(pinned.seeds == std::vector<std::uint64_t>{2});
    CHECK(pinned.model_kinds == std::vector<fedat::ModelKind>{fedat::ModelKind::SnnMlp});
    // The synth seed is resolved to a concrete value so the run is portable.
    CHECK(pinned.synth_seed_set);
}
