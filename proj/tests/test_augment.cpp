#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "fedat/augment.hpp"
#include "fedat/errors.hpp"

using fedat::BalanceMode;
using fedat::ClientDataset;
using fedat::Matrix;

namespace {

// Client with explicit per-class counts; features are small deterministic
// values in the standardized domain.
ClientDataset make_client(const std::vector<std::size_t>& counts, std::size_t dim) {
    ClientDataset c;
    c.client_id = 0;
    std::size_t n = 0;
    for (auto k : counts) n += k;
    c.features = Matrix(n, dim);
    std::size_t row = 0;
    for (std::size_t cls = 0; cls < counts.size(); ++cls) {
        for (std::size_t i = 0; i < counts[cls]; ++i, ++row) {
            for (std::size_t j = 0; j < dim; ++j) {
                c.features.at(row, j) =
                    0.1 * static_cast<double>(cls) + 0.001 * static_cast<double>(row % 7);
            }
            c.labels.push_back(static_cast<int>(cls));
        }
    }
    for (std::size_t cls = 0; cls < counts.size(); ++cls) {
        if (counts[cls] > 0) c.local_classes.insert(static_cast<int>(cls));
    }
    return c;
}

fedat::GanTrainState toy_state(std::size_t num_classes, std::size_t dim,
                               const std::set<int>& conditioning, std::uint64_t seed) {
    fedat::Rng rng(seed);
    fedat::Model cls = fedat::build_snn_mlp({dim, num_classes, {8, 6}, 0.0}, rng);
    fedat::GanConfig cfg;
    cfg.hidden = {8, 8};
    fedat::Model gen = fedat::build_generator(
        {6, num_classes, dim, cfg.hidden}, rng);
    return fedat::make_gan_state(std::move(cls), std::move(gen), cfg, num_classes, conditioning,
                                 rng);
}

std::vector<std::size_t> label_histogram(const std::vector<int>& labels, std::size_t c) {
    std::vector<std::size_t> h(c, 0);
    for (int y : labels) h[static_cast<std::size_t>(y)]++;
    return h;
}

}  // namespace

TEST_CASE("balance mode names round-trip") {
    CHECK(fedat::balance_mode_name(BalanceMode::LocalMax) == std::string("local_max"));
    CHECK(fedat::balance_mode_name(BalanceMode::GlobalUnion) == std::string("global_union"));
    CHECK(fedat::balance_mode_from_name("local_max") == BalanceMode::LocalMax);
    CHECK(fedat::balance_mode_from_name("global_union") == BalanceMode::GlobalUnion);
    CHECK_THROWS_AS(fedat::balance_mode_from_name("other"), fedat::ConfigError);
}

TEST_CASE("local_max raises every local insider class to the local maximum") {
    ClientDataset c = make_client({100, 40, 60}, 4);
    auto plan = fedat::plan_balancing(c, BalanceMode::LocalMax, {});
    REQUIRE(plan.targets.size() == 2);
    CHECK(plan.targets.at(1) == 60);
    CHECK(plan.targets.at(2) == 60);
    CHECK(plan.current.at(1) == 40);
    CHECK(plan.current.at(2) == 60);
    CHECK(plan.total_to_generate() == 20);
    // Class 0 is never part of the plan even though it dominates.
    CHECK(plan.targets.count(0) == 0);
}

TEST_CASE("local_max with a single insider class is a no-op") {
    ClientDataset c = make_client({100, 0, 35}, 4);
    auto plan = fedat::plan_balancing(c, BalanceMode::LocalMax, {});
    CHECK(plan.total_to_generate() == 0);
    // Class-0-only clients plan nothing at all.
    ClientDataset only_normal = make_client({50}, 4);
    auto empty_plan = fedat::plan_balancing(only_normal, BalanceMode::LocalMax, {});
    CHECK(empty_plan.targets.empty());
}

TEST_CASE("global_union adds absent aux classes at the global count") {
    ClientDataset c = make_client({100, 40}, 4);
    std::set<int> aux = {0, 1, 2, 3};
    auto plan = fedat::plan_balancing(c, BalanceMode::GlobalUnion, aux, 25);
    CHECK(plan.targets.at(1) == 40);  // local max of the single local insider class
    CHECK(plan.targets.at(2) == 25);  // absent, requested at global_count
    CHECK(plan.targets.at(3) == 25);
    CHECK(plan.current.at(2) == 0);
    CHECK(plan.targets.count(0) == 0);  // aux includes 0, plan must not
    CHECK(plan.total_to_generate() == 50);

    // Before any aux knowledge exists (empty union, count 0) it degenerates
    // to local_max.
    auto early = fedat::plan_balancing(c, BalanceMode::GlobalUnion, {}, 0);
    CHECK(early.total_to_generate() == 0);
    CHECK(early.targets.size() == 1);
}

TEST_CASE("adversarial training with zero epochs changes nothing") {
    ClientDataset c = make_client({30, 10, 6}, 4);
    auto state = toy_state(3, 4, {1, 2}, 5);
    auto w_gen = fedat::extract_weights(state.generator);
    auto w_cls = fedat::extract_weights(state.classifier);
    fedat::Rng rng(6);
    auto before = rng.bits();
    fedat::Rng rng2(6);
    fedat::train_acgan(c, state, 0, 8, rng2);
    CHECK(state.epoch == 0);
    CHECK(state.d_loss_history.empty());
    CHECK(state.g_loss_history.empty());
    CHECK(fedat::squared_distance(w_gen, fedat::extract_weights(state.generator)) == 0.0);
    CHECK(fedat::squared_distance(w_cls, fedat::extract_weights(state.classifier)) == 0.0);
    // The rng was not consumed either.
    CHECK(rng2.bits() == before);
}

TEST_CASE("adversarial training advances losses, weights, and epoch count") {
    ClientDataset c = make_client({40, 12, 8}, 4);
    auto state = toy_state(3, 4, {1, 2}, 7);
    auto w_gen = fedat::extract_weights(state.generator);
    auto w_cls = fedat::extract_weights(state.classifier);
    fedat::Rng rng(8);
    fedat::train_acgan(c, state, 3, 16, rng);
    CHECK(state.epoch == 3);
    REQUIRE(state.d_loss_history.size() == 3);
    REQUIRE(state.g_loss_history.size() == 3);
    for (double l : state.d_loss_history) {
        CHECK(std::isfinite(l));
        CHECK(l > 0.0);
    }
    CHECK(fedat::squared_distance(w_gen, fedat::extract_weights(state.generator)) > 0.0);
    CHECK(fedat::squared_distance(w_cls, fedat::extract_weights(state.classifier)) > 0.0);

    // Continuing training extends the histories instead of resetting them.
    fedat::train_acgan(c, state, 2, 16, rng);
    CHECK(state.epoch == 5);
    CHECK(state.d_loss_history.size() == 5);
}

TEST_CASE("adversarial training is deterministic given identical streams") {
    ClientDataset c = make_client({40, 12, 8}, 4);
    auto s1 = toy_state(3, 4, {1, 2}, 9);
    auto s2 = toy_state(3, 4, {1, 2}, 9);
    fedat::Rng r1(10), r2(10);
    fedat::train_acgan(c, s1, 2, 16, r1);
    fedat::train_acgan(c, s2, 2, 16, r2);
    CHECK(fedat::squared_distance(fedat::extract_weights(s1.generator),
                                  fedat::extract_weights(s2.generator)) == 0.0);
    CHECK(s1.d_loss_history == s2.d_loss_history);
    CHECK(s1.g_loss_history == s2.g_loss_history);
}

TEST_CASE("adversarial training needs at least two samples") {
    ClientDataset c = make_client({1}, 4);
    auto state = toy_state(3, 4, {1}, 11);
    fedat::Rng rng(12);
    CHECK_THROWS_AS(fedat::train_acgan(c, state, 1, 8, rng), std::runtime_error);
}

TEST_CASE("generation matches the plan and stays in the tanh domain") {
    auto state = toy_state(3, 4, {1, 2}, 13);
    fedat::AugmentationPlan plan;
    plan.targets = {{1, 25}, {2, 10}};
    plan.current = {{1, 20}, {2, 4}};
    fedat::Rng rng(14);
    auto batch = fedat::generate_adversarial(state, plan, rng);
    REQUIRE(batch.labels.size() == 11);  // 5 + 6
    REQUIRE(batch.features.rows == 11);
    CHECK(batch.features.cols == 4);
    auto hist = label_histogram(batch.labels, 3);
    CHECK(hist[1] == 5);
    CHECK(hist[2] == 6);
    CHECK(hist[0] == 0);
    for (double v : batch.features.data) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }

    // Classes are emitted in ascending order: 1s before 2s.
    CHECK(batch.labels.front() == 1);
    CHECK(batch.labels.back() == 2);

    // Already-satisfied targets produce nothing.
    fedat::AugmentationPlan satisfied;
    satisfied.targets = {{1, 20}};
    satisfied.current = {{1, 20}};
    fedat::Rng rng2(15);
    auto none = fedat::generate_adversarial(state, satisfied, rng2);
    CHECK(none.labels.empty());
    CHECK(none.features.rows == 0);
}

TEST_CASE("generation rejects invalid plans") {
    auto state = toy_state(3, 4, {1, 2}, 16);
    fedat::Rng rng(17);
    fedat::AugmentationPlan class0;
    class0.targets = {{0, 10}};
    class0.current = {{0, 0}};
    CHECK_THROWS_AS(fedat::generate_adversarial(state, class0, rng), std::invalid_argument);
    fedat::AugmentationPlan out_of_range;
    out_of_range.targets = {{7, 10}};
    out_of_range.current = {{7, 0}};
    CHECK_THROWS_AS(fedat::generate_adversarial(state, out_of_range, rng), std::invalid_argument);
    fedat::AugmentationPlan shrink;
    shrink.targets = {{1, 5}};
    shrink.current = {{1, 9}};
    CHECK_THROWS_AS(fedat::generate_adversarial(state, shrink, rng), std::invalid_argument);
}

TEST_CASE("generate_class is deterministic and seed-sensitive") {
    auto state = toy_state(3, 4, {1, 2}, 18);
    fedat::Rng a(19), b(19), c(20);
    Matrix m1 = fedat::generate_class(state, 1, 12, a);
    Matrix m2 = fedat::generate_class(state, 1, 12, b);
    Matrix m3 = fedat::generate_class(state, 1, 12, c);
    CHECK(std::memcmp(m1.data.data(), m2.data.data(), m1.data.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(m1.data.data(), m3.data.data(), m1.data.size() * sizeof(double)) != 0);
    CHECK(m1.rows == 12);
    CHECK_THROWS_AS(fedat::generate_class(state, 5, 3, a), std::invalid_argument);
}

TEST_CASE("merge_and_shuffle concatenates, permutes, and flags synthetic rows") {
    ClientDataset real = make_client({20, 8}, 3);
    real.client_id = 2;
    fedat::SynthBatch synth;
    synth.features = Matrix(5, 3);
    for (std::size_t i = 0; i < synth.features.data.size(); ++i) {
        synth.features.data[i] = -0.5 + 0.01 * static_cast<double>(i);
    }
    synth.labels = {1, 1, 1, 2, 2};

    fedat::Rng rng(21);
    ClientDataset merged = fedat::merge_and_shuffle(real, synth, rng);
    CHECK(merged.client_id == 2);
    CHECK(merged.n_samples() == 33);
    auto hist = merged.class_counts(3);
    CHECK(hist[0] == 20);
    CHECK(hist[1] == 11);
    CHECK(hist[2] == 2);
    CHECK(merged.local_classes == std::set<int>{0, 1, 2});
    REQUIRE(merged.synthetic.size() == 33);
    std::size_t flagged = 0;
    for (auto f : merged.synthetic) flagged += f;
    CHECK(flagged == 5);
    // Flags track the synthetic rows through the permutation: every flagged
    // row carries a feature vector from the synthetic batch.
    for (std::size_t i = 0; i < merged.n_samples(); ++i) {
        if (merged.synthetic[i]) {
            CHECK(merged.features.at(i, 0) < 0.0);
        } else {
            CHECK(merged.features.at(i, 0) >= 0.0);
        }
    }

    // Same rng seed, same permutation.
    fedat::Rng r1(22), r2(22);
    auto a = fedat::merge_and_shuffle(real, synth, r1);
    auto b = fedat::merge_and_shuffle(real, synth, r2);
    CHECK(a.labels == b.labels);
    CHECK(std::memcmp(a.features.data.data(), b.features.data.data(),
                      a.features.data.size() * sizeof(double)) == 0);

    // Mismatched widths are rejected.
    fedat::SynthBatch bad;
    bad.features = Matrix(2, 4, 0.0);
    bad.labels = {1, 1};
    fedat::Rng r3(23);
    CHECK_THROWS_AS(fedat::merge_and_shuffle(real, bad, r3), fedat::DimensionError);
}

TEST_CASE("merging an empty batch still permutes the real rows") {
    ClientDataset real = make_client({10, 4}, 3);
    fedat::SynthBatch empty;
    empty.features = Matrix(0, 0);
    fedat::Rng rng(24);
    ClientDataset merged = fedat::merge_and_shuffle(real, empty, rng);
    CHECK(merged.n_samples() == 14);
    CHECK(merged.class_counts(3) == real.class_counts(3));
    std::size_t flagged = 0;
    for (auto f : merged.synthetic) flagged += f;
    CHECK(flagged == 0);
    // The permutation consumed the stream: order generally differs from input.
    CHECK(merged.labels != real.labels);
}

TEST_CASE("gan state construction validates conditioning and shapes") {
    fedat::Rng rng(25);
    fedat::Model cls = fedat::build_snn_mlp({4, 3, {8, 6}, 0.0}, rng);
    fedat::GanConfig cfg;
    cfg.hidden = {8};
    fedat::Model gen = fedat::build_generator({6, 3, 4, cfg.hidden}, rng);

    CHECK_THROWS_AS(fedat::make_gan_state(cls, gen, cfg, 3, {-1}, rng), fedat::ConfigError);
    CHECK_THROWS_AS(fedat::make_gan_state(cls, gen, cfg, 3, {3}, rng), fedat::ConfigError);
    CHECK_THROWS_AS(fedat::make_gan_state(cls, gen, cfg, 3, {}, rng), fedat::ConfigError);

    // Conditioning on the majority class is allowed for the generation
    // primitive even though balancing plans never request it.
    CHECK_NOTHROW(fedat::make_gan_state(cls, gen, cfg, 3, {0, 1}, rng));

    fedat::Model shallow;
    shallow.layers.resize(1);
    shallow.layers[0].weights = fedat::Matrix(4, 3, 0.0);
    shallow.layers[0].bias.assign(3, 0.0);
    shallow.layers[0].activation = fedat::Activation::Softmax;
    CHECK_THROWS_AS(fedat::make_gan_state(shallow, gen, cfg, 3, {1}, rng), fedat::ConfigError);

    auto state = fedat::make_gan_state(cls, gen, cfg, 3, {1, 2}, rng);
    CHECK(state.latent_dim == 6);
    CHECK(state.num_classes == 3);
    CHECK(state.condition_classes == std::vector<int>{1, 2});
    // The source head reads the last hidden width of the classifier.
    CHECK(state.source_head.input_dim() == 6);
    CHECK(state.source_head.output_dim() == 1);
}
