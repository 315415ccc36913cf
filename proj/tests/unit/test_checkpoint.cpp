#include <filesystem>
#include <random>

#include "doctest.h"
#include "hpe/error.hpp"
#include "hpe/posenet.hpp"

using namespace hpe;

namespace {

NetInput random_input(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0, 1);
    NetInput in;
    for (double& v : in.data) v = n(rng);
    return in;
}

template <typename T>
PoseModel<T> perturbed_model() {
    auto m = build_model<T>(77);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0, 0.01);
    for (auto* p : m.network.parameters()) {
        for (T& v : p->weight_velocity.values()) v = static_cast<T>(n(rng));
        for (T& v : p->biases.values()) v = static_cast<T>(n(rng));
    }
    m.epoch = 12;
    m.sgd.schedule = nn::step_schedule(0.1, 50);
    return m;
}

}  // namespace

TEST_CASE_TEMPLATE("checkpoint round trip is bit exact", T, float, double) {
    const auto model = perturbed_model<T>();
    const auto path = std::filesystem::temp_directory_path() / ("hpe_ckpt_" + std::to_string(sizeof(T)) + ".bin");
    save_checkpoint(path, model);
    const auto loaded = load_checkpoint<T>(path);
    std::filesystem::remove(path);

    CHECK(loaded.epoch == 12);
    CHECK(loaded.init_seed == 77);
    CHECK(loaded.sgd == model.sgd);
    REQUIRE(loaded.normalizer.has_value());
    CHECK(loaded.normalizer->scale_deg == model.normalizer->scale_deg);
    const auto pa = model.network.parameters();
    const auto pb = loaded.network.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->weights == pb[i]->weights);
        CHECK(pa[i]->bias_velocity == pb[i]->bias_velocity);
        CHECK(pa[i]->weight_velocity == pb[i]->weight_velocity);
    }

    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const NetInput in = random_input(rng);
        REQUIRE(forward_raw(model, in) == forward_raw(loaded, in));
    }
    CHECK(serialize_checkpoint(loaded) == serialize_checkpoint(model));
}

TEST_CASE("damaged checkpoints are rejected") {
    const auto bytes = serialize_checkpoint(perturbed_model<double>());

    SUBCASE("truncated") {
        for (std::size_t n : {std::size_t{0}, std::size_t{10}, std::size_t{24}, bytes.size() / 2, bytes.size() - 1}) {
            CHECK_THROWS_AS(deserialize_checkpoint<double>(std::span(bytes.data(), n)), CheckpointCorruptError);
        }
    }
    SUBCASE("older version") {
        auto old = bytes;
        old[8] = 0;
        CHECK_THROWS_AS(deserialize_checkpoint<double>(old), CheckpointVersionError);
    }
    SUBCASE("flipped payload bit") {
        auto bad = bytes;
        bad[bytes.size() / 2] ^= 0x10;
        CHECK_THROWS_AS(deserialize_checkpoint<double>(bad), CheckpointCorruptError);
    }
    SUBCASE("not a checkpoint") {
        auto bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS_AS(deserialize_checkpoint<double>(bad), CheckpointCorruptError);
    }
    SUBCASE("architecture options travel with the file") {
        const auto other = serialize_checkpoint(build_model<double>(1, {false}));
        CHECK_NOTHROW(deserialize_checkpoint<double>(other));
    }
    CHECK_THROWS_AS(load_checkpoint<double>("/nonexistent/ckpt.bin"), Error);
}
