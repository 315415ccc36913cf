#include <cmath>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "hpe/error.hpp"
#include "hpe/nn/loss.hpp"
#include "hpe/pipeline.hpp"
#include "hpe/posenet.hpp"
#include "hpe/synthetic.hpp"

using namespace hpe;
using hpe::testing::central_difference;
using hpe::testing::relative_error;
using hpe::testing::straddles_kink;

namespace {

NetInput random_input(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0, 1);
    NetInput in;
    for (double& v : in.data) v = n(rng);
    std::fill(in.foreground.begin(), in.foreground.end(), 1);
    return in;
}

std::vector<TrainExample> tiny_set(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    const auto samples = generate_dataset(n, cfg, seed);
    return make_examples(samples, AngleNormalizer{});
}

// k^2 * C_in * F + F per conv, in * out + out per fully connected layer.
std::size_t hand_count() {
    struct Conv {
        std::size_t k, cin, f;
    };
    struct Fc {
        std::size_t in, out;
    };
    std::size_t total = 0;
    for (Conv c : {Conv{5, 1, 30}, Conv{3, 30, 30}, Conv{3, 30, 30}, Conv{4, 30, 30}, Conv{3, 30, 120}})
        total += c.k * c.k * c.cin * c.f + c.f;
    for (Fc f : {Fc{120, 120}, Fc{120, 84}, Fc{84, 3}}) total += f.in * f.out + f.out;
    return total;
}

}  // namespace

TEST_CASE("shape chain") {
    const auto net = build_network<double>(1);
    const std::vector<nn::Shape> expected{
        {30, 60, 60}, {30, 60, 60}, {30, 30, 30}, {30, 28, 28}, {30, 28, 28}, {30, 14, 14},
        {30, 12, 12}, {30, 12, 12}, {30, 6, 6},   {30, 3, 3},   {30, 3, 3},   {120, 1, 1},
        {120, 1, 1},  {120},        {120},        {120},        {84},         {84},
        {3},          {3},
    };
    CHECK(net.activation_shapes() == expected);
    CHECK(net.parameter_count() == hand_count());
    CHECK(net.parameter_count() == 88929);
    CHECK(build_network<double>(1, {false}).activation_shapes().size() == expected.size() - 1);
}

TEST_CASE("forward on zeros lands inside the tanh range") {
    const auto model = build_model<double>(3);
    const auto out = forward_raw(model, NetInput());
    for (double v : out) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
    CHECK(forward_raw(model, NetInput()) == out);
}

TEST_CASE("same seed, same weights") {
    const auto a = build_network<double>(42);
    const auto b = build_network<double>(42);
    const auto c = build_network<double>(43);
    const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    REQUIRE(pa.size() == pb.size());
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->weights == pb[i]->weights);
        CHECK(pa[i]->biases == pb[i]->biases);
        any_diff = any_diff || !(pa[i]->weights == pc[i]->weights);
    }
    CHECK(any_diff);
}

TEST_CASE("assembled network gradient on a 1% parameter sample") {
    for (std::uint64_t seed : {1u, 2u}) {
        auto net = build_network<double>(seed);
        std::mt19937_64 rng(seed + 100);
        const NetInput in = random_input(rng);
        const auto x = to_tensor<double>(in);
        nn::Tensor<double> target({3});
        std::uniform_real_distribution<double> u(-0.9, 0.9);
        for (std::size_t i = 0; i < 3; ++i) target[i] = u(rng);

        net.zero_grads();
        const auto loss = nn::l2_loss(net.forward(x), target);
        net.backward(loss.grad);
        auto f = [&] { return nn::l2_loss(net.infer(x), target).value; };

        std::bernoulli_distribution pick(0.01);
        std::size_t checked = 0, kinks = 0;
        double worst = 0.0;
        auto visit = [&](double analytic, double& value) {
            if (straddles_kink(f, value)) {
                ++kinks;
                return;
            }
            worst = std::max(worst, relative_error(analytic, central_difference(f, value)));
            ++checked;
        };
        for (auto* p : net.parameters()) {
            for (std::size_t i = 0; i < p->weights.size(); ++i)
                if (pick(rng)) visit(p->weight_grads[i], p->weights[i]);
            for (std::size_t i = 0; i < p->biases.size(); ++i)
                if (pick(rng)) visit(p->bias_grads[i], p->biases[i]);
        }
        CHECK(checked > 600);
        CHECK(kinks * 100 <= checked);
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("predict denormalizes") {
    auto model = build_model<double>(5, {false});
    // zero the last layer so the raw output is its bias
    auto params = model.network.parameters();
    auto* last = params.back();
    last->weights.fill(0.0);
    last->biases.fill(0.0);
    EulerAngles e = predict(model, NetInput());
    CHECK(e.pitch == 0.0);
    CHECK(e.roll == 0.0);
    CHECK(e.yaw == 0.0);
    last->biases[0] = 0.5;
    e = predict(model, NetInput());
    CHECK(e.pitch == doctest::Approx(30.0));
    CHECK(e.roll == 0.0);
    CHECK(predict(model, NetInput()) == e);

    model.normalizer.reset();
    CHECK_THROWS_AS(predict(model, NetInput()), ConfigError);
}

TEST_CASE("training") {
    const auto data = tiny_set(16, 3);
    REQUIRE(data.size() == 16);

    SUBCASE("same seeds give the same trajectory") {
        TrainConfig cfg;
        cfg.sgd = {0.01, 0.9, 5e-4, {}};
        cfg.epochs = 2;
        cfg.batch_size = 4;
        cfg.seed = 9;
        auto a = build_model<double>(1);
        auto b = build_model<double>(1);
        const auto ha = train(a, data, {}, cfg);
        const auto hb = train(b, data, {}, cfg);
        CHECK(ha.history.size() == 2);
        CHECK(ha.history.back().train_loss == hb.history.back().train_loss);
        CHECK(serialize_checkpoint(a) == serialize_checkpoint(b));
        CHECK(a.epoch == 2);
    }
    SUBCASE("loss does not rise under a small rate") {
        TrainConfig cfg;
        cfg.sgd = {1e-3, 0.0, 0.0, {}};
        cfg.epochs = 10;
        cfg.batch_size = 4;
        cfg.augment = false;
        auto m = build_model<double>(2);
        const auto h = train(m, data, {}, cfg);
        for (std::size_t i = 1; i < h.history.size(); ++i) {
            CHECK(h.history[i].train_loss <= h.history[i - 1].train_loss * 1.05);
        }
        CHECK(h.history.back().train_loss < h.history.front().train_loss);
    }
    SUBCASE("a NaN input aborts with diagnostics") {
        auto bad = data;
        bad[0].input.data[10] = std::nan("");
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.augment = false;
        auto m = build_model<double>(2);
        try {
            train(m, bad, {}, cfg);
            FAIL("expected divergence");
        } catch (const DivergenceError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("epoch 0") != std::string::npos);
            CHECK(msg.find("lr") != std::string::npos);
        }
    }
    SUBCASE("empty set and bad config") {
        auto m = build_model<double>(2);
        CHECK_THROWS_AS(train(m, std::span<const TrainExample>{}, {}, TrainConfig{}), InvalidArgumentError);
        TrainConfig cfg;
        cfg.batch_size = 0;
        CHECK_THROWS_AS(train(m, data, {}, cfg), ConfigError);
    }
}
