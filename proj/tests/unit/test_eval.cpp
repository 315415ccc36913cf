#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hpe/eval.hpp"
#include "hpe/synthetic.hpp"

using namespace hpe;
namespace fs = std::filesystem;

namespace {

FrameResult frame(int id, EulerAngles truth, EulerAngles pred) {
    FrameResult f;
    f.sequence_id = 1;
    f.frame_id = id;
    f.truth = truth;
    f.predicted = pred;
    return f;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("summary statistics") {
    EvalReport r;
    r.frames = {frame(0, {0, 0, 0}, {1, 0, 0}), frame(1, {0, 0, 0}, {3, 0, 0})};
    summarize(r);
    CHECK(r.mae_deg[0] == 2.0);
    CHECK(r.std_deg[0] == 1.0);
    CHECK(r.mae_deg[1] == 0.0);

    r.frames = {frame(0, {0, 0, 0}, {1, 0, 0}), frame(1, {0, 0, 0}, {-3, 0, 0})};
    summarize(r);
    CHECK(r.std_deg[0] == 1.0);
    summarize(r, SpreadMode::kSignedError);
    CHECK(r.std_deg[0] == 2.0);
}

TEST_CASE("plot data") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 8);
    EvalReport r;
    for (int i = 0; i < 50; ++i) {
        const EulerAngles t{n(rng), n(rng), n(rng)};
        r.frames.push_back(frame(i, t, {t.pitch + n(rng), t.roll + n(rng), t.yaw + n(rng)}));
    }
    summarize(r);
    const fs::path dir = fs::temp_directory_path() / ("hpe_plot_" + std::to_string(std::random_device{}()));
    emit_plot_data(r, dir);

    const auto rows = read_csv(dir / "frames.csv");
    REQUIRE(rows.size() == 51);
    CHECK(rows[0][2] == "gt_pitch");
    CHECK(rows[0][10] == "abs_err_yaw");
    std::array<double, 3> sum{};
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 11);
        for (int a = 0; a < 3; ++a) sum[a] += std::abs(std::stod(rows[i][3 + 2 * a]) - std::stod(rows[i][2 + 2 * a]));
    }
    for (int a = 0; a < 3; ++a) CHECK(sum[a] / 50.0 == doctest::Approx(r.mae_deg[a]).epsilon(1e-12));

    const auto hist = read_csv(dir / "histogram.csv");
    std::array<std::size_t, 3> counts{};
    for (std::size_t i = 1; i < hist.size(); ++i)
        for (int a = 0; a < 3; ++a) counts[a] += std::stoul(hist[i][1 + a]);
    for (std::size_t c : counts) CHECK(c == 50);
    fs::remove_all(dir);
}

TEST_CASE("zero error puts everything in the first bin") {
    EvalReport r;
    for (int i = 0; i < 7; ++i) r.frames.push_back(frame(i, {10, -5, 3}, {10, -5, 3}));
    summarize(r);
    CHECK(r.mae_deg == std::array<double, 3>{0, 0, 0});
    const auto h = error_histograms(r);
    for (const auto& v : h) {
        REQUIRE(v.size() == 1);
        CHECK(v[0] == 7);
    }
}

TEST_CASE("evaluate a model end to end") {
    SynthConfig cfg;
    const auto samples = generate_dataset(6, cfg, 12);
    const auto model = build_model<float>(1);
    const EvalReport r = evaluate(model, samples);
    CHECK(r.frames.size() == 6);
    CHECK(r.frames_per_second > 0);
    for (double m : r.mae_deg) CHECK(m >= 0);
    const BenchResult b = bench(model, std::span(samples).first(2), 4, 3);
    CHECK(b.forward_runs_ms.size() == 3);
    CHECK(b.forward_ms > 0);
    CHECK(format_bench(b).find("frames/s") != std::string::npos);
}
