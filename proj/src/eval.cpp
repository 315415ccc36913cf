#include "hpe/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hpe/error.hpp"
#include "hpe/pipeline.hpp"

namespace hpe {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename T>
FrameResult run_frame(const PoseModel<T>& model, const Sample& s, const PrepConfig& prep) {
    FrameResult r;
    r.sequence_id = s.sequence_id;
    r.frame_id = s.frame_id;
    r.truth = s.label.euler_deg;
    try {
        r.predicted = predict(model, preprocess_sample(s, prep));
    } catch (const DegenerateInputError&) {
        r.preprocess_failed = true;
    } catch (const EmptyCropError&) {
        r.preprocess_failed = true;
    }
    return r;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void summarize(EvalReport& report, SpreadMode mode) {
    report.mae_deg = {};
    report.std_deg = {};
    report.failed_frames = 0;
    if (report.frames.empty()) return;
    const auto n = static_cast<double>(report.frames.size());
    std::array<double, 3> sum_abs{}, sum_signed{};
    for (const FrameResult& f : report.frames) {
        if (f.preprocess_failed) ++report.failed_frames;
        const auto t = as_array(f.truth), p = as_array(f.predicted);
        for (int a = 0; a < 3; ++a) {
            sum_abs[a] += std::abs(p[a] - t[a]);
            sum_signed[a] += p[a] - t[a];
        }
    }
    for (int a = 0; a < 3; ++a) {
        report.mae_deg[a] = sum_abs[a] / n;
        const double center = mode == SpreadMode::kAbsoluteError ? report.mae_deg[a] : sum_signed[a] / n;
        double sq = 0.0;
        for (const FrameResult& f : report.frames) {
            const double e = as_array(f.predicted)[a] - as_array(f.truth)[a];
            const double d = (mode == SpreadMode::kAbsoluteError ? std::abs(e) : e) - center;
            sq += d * d;
        }
        report.std_deg[a] = std::sqrt(sq / n);
    }
}

template <typename T>
EvalReport evaluate(const PoseModel<T>& model, std::span<const Sample> test_set, const PrepConfig& prep,
                    SpreadMode mode) {
    if (test_set.empty()) throw InvalidArgumentError("test set is empty");
    EvalReport report;
    report.frames.reserve(test_set.size());
    const auto start = Clock::now();
    for (const Sample& s : test_set) report.frames.push_back(run_frame(model, s, prep));
    report.ms_per_frame = elapsed_ms(start) / static_cast<double>(test_set.size());
    report.frames_per_second = 1000.0 / report.ms_per_frame;
    summarize(report, mode);
    return report;
}

template <typename T>
EvalReport evaluate(const PoseModel<T>& model, std::span<const FrameRecord> records, DepthFormat format,
                    const PrepConfig& prep, SpreadMode mode) {
    if (records.empty()) throw InvalidArgumentError("test set is empty");
    EvalReport report;
    report.frames.reserve(records.size());
    double total_ms = 0.0;
    for (const FrameRecord& rec : records) {
        const Sample s = load_sample(rec, format);
        const auto start = Clock::now();
        report.frames.push_back(run_frame(model, s, prep));
        total_ms += elapsed_ms(start);
    }
    report.ms_per_frame = total_ms / static_cast<double>(records.size());
    report.frames_per_second = 1000.0 / report.ms_per_frame;
    summarize(report, mode);
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2);
    ss << "model:   " << report.model_id << '\n';
    ss << "dataset: " << report.dataset_id << '\n';
    ss << "frames:  " << report.frames.size() << " (" << report.failed_frames << " failed preprocessing)\n\n";
    ss << "angle   MAE (deg)   std (deg)\n";
    static constexpr const char* kNames[3] = {"pitch", "roll ", "yaw  "};
    for (int a = 0; a < 3; ++a) {
        ss << kNames[a] << "   " << std::setw(9) << report.mae_deg[a] << "   " << std::setw(9) << report.std_deg[a]
           << '\n';
    }
    ss << "\ntime:    " << std::setprecision(3) << report.ms_per_frame << " ms/frame (" << std::setprecision(1)
       << report.frames_per_second << " frames/s, preprocessing + forward)\n";
    return ss.str();
}

std::array<std::vector<std::size_t>, 3> error_histograms(const EvalReport& report) {
    std::size_t bins = 1;
    for (const FrameResult& f : report.frames) {
        const auto t = as_array(f.truth), p = as_array(f.predicted);
        for (int a = 0; a < 3; ++a) {
            bins = std::max(bins, static_cast<std::size_t>(std::floor(std::abs(p[a] - t[a]))) + 1);
        }
    }
    std::array<std::vector<std::size_t>, 3> hist;
    for (auto& h : hist) h.assign(bins, 0);
    for (const FrameResult& f : report.frames) {
        const auto t = as_array(f.truth), p = as_array(f.predicted);
        for (int a = 0; a < 3; ++a) {
            ++hist[a][static_cast<std::size_t>(std::floor(std::abs(p[a] - t[a])))];
        }
    }
    return hist;
}

void emit_plot_data(const EvalReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "frames.csv", std::ios::trunc);
        if (!out) throw Error("cannot write " + (dir / "frames.csv").string());
        out << std::setprecision(17);
        out << "sequence,frame,gt_pitch,pred_pitch,gt_roll,pred_roll,gt_yaw,pred_yaw,"
               "abs_err_pitch,abs_err_roll,abs_err_yaw\n";
        for (const FrameResult& f : report.frames) {
            const auto t = as_array(f.truth), p = as_array(f.predicted);
            out << f.sequence_id << ',' << f.frame_id;
            for (int a = 0; a < 3; ++a) out << ',' << t[a] << ',' << p[a];
            for (int a = 0; a < 3; ++a) out << ',' << std::abs(p[a] - t[a]);
            out << '\n';
        }
        if (!out) throw Error("failed writing frames.csv");
    }
    {
        const auto hist = error_histograms(report);
        std::ofstream out(dir / "histogram.csv", std::ios::trunc);
        if (!out) throw Error("cannot write " + (dir / "histogram.csv").string());
        out << "bin_start_deg,pitch,roll,yaw\n";
        for (std::size_t b = 0; b < hist[0].size(); ++b) {
            out << b << ',' << hist[0][b] << ',' << hist[1][b] << ',' << hist[2][b] << '\n';
        }
        if (!out) throw Error("failed writing histogram.csv");
    }
}

template <typename T>
BenchResult bench(const PoseModel<T>& model, std::span<const Sample> frames, std::size_t iterations,
                  std::size_t runs, const PrepConfig& prep) {
    if (frames.empty() || iterations == 0 || runs == 0) {
        throw InvalidArgumentError("bench needs frames, iterations and runs");
    }
    std::vector<NetInput> inputs;
    inputs.reserve(frames.size());
    for (const Sample& s : frames) inputs.push_back(preprocess_sample(s, prep));

    volatile double sink = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(iterations, 8); ++i) {
        sink = sink + forward_raw(model, inputs[i % inputs.size()])[0];
    }

    BenchResult r;
    for (std::size_t run = 0; run < runs; ++run) {
        auto start = Clock::now();
        for (std::size_t i = 0; i < iterations; ++i) sink = sink + forward_raw(model, inputs[i % inputs.size()])[0];
        r.forward_runs_ms.push_back(elapsed_ms(start) / static_cast<double>(iterations));

        start = Clock::now();
        for (std::size_t i = 0; i < iterations; ++i) {
            const NetInput in = preprocess_sample(frames[i % frames.size()], prep);
            sink = sink + forward_raw(model, in)[0];
        }
        r.inclusive_runs_ms.push_back(elapsed_ms(start) / static_cast<double>(iterations));
    }
    r.forward_ms = median(r.forward_runs_ms);
    r.inclusive_ms = median(r.inclusive_runs_ms);
    return r;
}

std::string format_bench(const BenchResult& r) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3);
    ss << "forward only:           " << r.forward_ms << " ms/frame (" << std::setprecision(1) << r.forward_fps()
       << " frames/s)\n";
    ss << std::setprecision(3) << "preprocessing + forward: " << r.inclusive_ms << " ms/frame ("
       << std::setprecision(1) << r.inclusive_fps() << " frames/s)\n";
    ss << std::setprecision(3) << "runs (forward ms):";
    for (double v : r.forward_runs_ms) ss << ' ' << v;
    ss << "\nruns (inclusive ms):";
    for (double v : r.inclusive_runs_ms) ss << ' ' << v;
    ss << '\n';
    return ss.str();
}

template EvalReport evaluate<float>(const PoseModel<float>&, std::span<const Sample>, const PrepConfig&, SpreadMode);
template EvalReport evaluate<double>(const PoseModel<double>&, std::span<const Sample>, const PrepConfig&,
                                     SpreadMode);
template EvalReport evaluate<float>(const PoseModel<float>&, std::span<const FrameRecord>, DepthFormat,
                                    const PrepConfig&, SpreadMode);
template EvalReport evaluate<double>(const PoseModel<double>&, std::span<const FrameRecord>, DepthFormat,
                                     const PrepConfig&, SpreadMode);
template BenchResult bench<float>(const PoseModel<float>&, std::span<const Sample>, std::size_t, std::size_t,
                                  const PrepConfig&);
template BenchResult bench<double>(const PoseModel<double>&, std::span<const Sample>, std::size_t, std::size_t,
                                   const PrepConfig&);

}  // namespace hpe
