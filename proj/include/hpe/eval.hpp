#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hpe/dataset_io.hpp"
#include "hpe/depth_prep.hpp"
#include "hpe/posenet.hpp"

namespace hpe {

struct FrameResult {
    int sequence_id = 0;
    int frame_id = 0;
    EulerAngles truth;
    EulerAngles predicted;
    bool preprocess_failed = false;  // prediction defaults to 0 deg when set
};

enum class SpreadMode {
    kAbsoluteError,  // std of |error| (default)
    kSignedError,
};

/// Per-angle statistics in (pitch, roll, yaw) order, degrees.
struct EvalReport {
    std::array<double, 3> mae_deg{};
    std::array<double, 3> std_deg{};
    std::vector<FrameResult> frames;
    std::size_t failed_frames = 0;
    double ms_per_frame = 0.0;  // preprocessing + forward
    double frames_per_second = 0.0;
    std::string model_id;
    std::string dataset_id;
};

/// Fills mae_deg/std_deg (population statistics) from report.frames.
void summarize(EvalReport& report, SpreadMode mode = SpreadMode::kAbsoluteError);

template <typename T>
EvalReport evaluate(const PoseModel<T>& model, std::span<const Sample> test_set, const PrepConfig& prep = {},
                    SpreadMode mode = SpreadMode::kAbsoluteError);

/// Loads frames lazily from an index; loading time is excluded from timing.
template <typename T>
EvalReport evaluate(const PoseModel<T>& model, std::span<const FrameRecord> records, DepthFormat format,
                    const PrepConfig& prep = {}, SpreadMode mode = SpreadMode::kAbsoluteError);

std::string format_report(const EvalReport& report);

/// Writes `<dir>/frames.csv` (one row per frame) and `<dir>/histogram.csv`
/// (1-degree bins of absolute error per angle).
void emit_plot_data(const EvalReport& report, const std::filesystem::path& dir);

/// Counts of |error| per 1-degree bin; bin i covers [i, i+1). Index order
/// (pitch, roll, yaw); all three vectors share the same length.
std::array<std::vector<std::size_t>, 3> error_histograms(const EvalReport& report);

struct BenchResult {
    double forward_ms = 0.0;    // median over runs
    double inclusive_ms = 0.0;  // preprocessing + forward, median over runs
    std::vector<double> forward_runs_ms;
    std::vector<double> inclusive_runs_ms;

    double forward_fps() const { return 1000.0 / forward_ms; }
    double inclusive_fps() const { return 1000.0 / inclusive_ms; }
};

/// Warm-loop timing over `frames`, repeated `runs` times.
template <typename T>
BenchResult bench(const PoseModel<T>& model, std::span<const Sample> frames, std::size_t iterations,
                  std::size_t runs = 3, const PrepConfig& prep = {});

std::string format_bench(const BenchResult& result);

}  // namespace hpe
