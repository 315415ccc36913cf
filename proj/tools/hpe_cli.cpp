#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "hpe/dataset_io.hpp"
#include "hpe/error.hpp"
#include "hpe/eval.hpp"
#include "hpe/pipeline.hpp"
#include "hpe/posenet.hpp"
#include "hpe/seeds.hpp"
#include "hpe/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hpe;

namespace {

struct DataOptions {
    std::string root;
    std::string format = "biwi";
    std::size_t limit = 0;  // 0 = all frames

    DepthFormat depth_format() const { return parse_depth_format(format); }
};

void add_data_options(CLI::App* cmd, DataOptions& d, bool required) {
    auto* opt = cmd->add_option("--data-root", d.root, "Dataset root (sequence directories 01..24)");
    if (required) opt->required();
    cmd->add_option("--format", d.format, "Depth file format")->check(CLI::IsMember({"biwi", "raw"}));
}

std::vector<FrameRecord> take(std::vector<FrameRecord> v, std::size_t limit) {
    if (limit > 0 && v.size() > limit) v.resize(limit);
    return v;
}

// Scalar width stored in a checkpoint header, so it loads at native precision.
std::uint32_t checkpoint_width(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    unsigned char header[16] = {};
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (in.gcount() != sizeof header) throw CheckpointCorruptError("checkpoint header truncated");
    return header[12] | header[13] << 8 | header[14] << 16 | static_cast<std::uint32_t>(header[15]) << 24;
}

template <typename F>
void with_checkpoint(const std::string& path, F&& f) {
    if (checkpoint_width(path) == 8) {
        f(load_checkpoint<double>(path));
    } else {
        f(load_checkpoint<float>(path));
    }
}

std::vector<TrainExample> load_examples(std::span<const FrameRecord> records, DepthFormat format,
                                        const AngleNormalizer& normalizer, const char* what) {
    std::vector<TrainExample> out;
    out.reserve(records.size());
    std::size_t failed = 0;
    for (const FrameRecord& r : records) {
        try {
            out.push_back(make_example(load_sample(r, format), normalizer));
        } catch (const DegenerateInputError&) {
            ++failed;
        } catch (const EmptyCropError&) {
            ++failed;
        }
    }
    std::cout << what << ": " << out.size() << " frames";
    if (failed) std::cout << " (" << failed << " skipped, preprocessing failed)";
    std::cout << '\n';
    return out;
}

// --- synth-gen ---------------------------------------------------------------

struct SynthArgs {
    std::size_t n = 2400;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "raw";
};

int run_synth(const SynthArgs& a) {
    const auto samples = generate_dataset(a.n, SynthConfig{}, a.seed);
    write_dataset(a.out, samples, parse_depth_format(a.format));
    std::cout << "wrote " << samples.size() << " frames to " << a.out << '\n';
    return 0;
}

// --- preprocess --------------------------------------------------------------

struct PreprocessArgs {
    DataOptions data;
    std::string out;
};

void write_pgm(const fs::path& path, const NetInput& in) {
    std::ofstream f(path, std::ios::binary);
    f << "P5\n" << in.width << ' ' << in.height << "\n255\n";
    for (double v : in.data) {
        // +-3 standard deviations onto the byte range
        const double s = std::clamp((v + 3.0) / 6.0, 0.0, 1.0);
        f.put(static_cast<char>(std::lround(s * 255.0)));
    }
    if (!f) throw Error("cannot write " + path.string());
}

int run_preprocess(const PreprocessArgs& a) {
    const auto format = a.data.depth_format();
    const auto frames = take(index_dataset(a.data.root, format).frames, a.data.limit);
    std::size_t written = 0, failed = 0;
    for (const FrameRecord& r : frames) {
        const fs::path dir = fs::path(a.out) / sequence_dir_name(r.sequence_id);
        fs::create_directories(dir);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05d_input.pgm", r.frame_id);
        try {
            write_pgm(dir / name, preprocess_sample(load_sample(r, format)));
            ++written;
        } catch (const DegenerateInputError& e) {
            std::cerr << "skip " << r.depth_path.string() << ": " << e.what() << '\n';
            ++failed;
        } catch (const EmptyCropError& e) {
            std::cerr << "skip " << r.depth_path.string() << ": " << e.what() << '\n';
            ++failed;
        }
    }
    std::cout << "preprocessed " << written << " frames, " << failed << " failed\n";
    return 0;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
    DataOptions data;
    std::string out;
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;
    bool no_augment = false;
    bool no_schedule = false;
    bool linear_output = false;
    double val_fraction = 0.05;
    std::string precision = "float";
};

template <typename T>
int train_with(const TrainArgs& a) {
    const auto format = a.data.depth_format();
    const DatasetIndex index = index_dataset(a.data.root, format);
    const Split split = make_split(index);

    // hold out whole training sequences for validation
    std::set<int> sequences;
    for (const auto& r : split.train) sequences.insert(r.sequence_id);
    std::vector<int> seq(sequences.begin(), sequences.end());
    std::shuffle(seq.begin(), seq.end(), std::mt19937_64(derive_seed(a.seed, SeedStream::kValidation)));
    const auto held = a.val_fraction > 0.0
                          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(a.val_fraction * seq.size())))
                          : 0;
    const std::set<int> val_seq(seq.begin(), seq.begin() + static_cast<long>(std::min(held, seq.size() - 1)));
    std::vector<FrameRecord> train_frames, val_frames;
    for (const auto& r : split.train) (val_seq.count(r.sequence_id) ? val_frames : train_frames).push_back(r);
    train_frames = take(std::move(train_frames), a.data.limit);

    const AngleNormalizer normalizer;
    const auto train_set = load_examples(train_frames, format, normalizer, "train");
    const auto val_set = load_examples(val_frames, format, normalizer, "validation");

    ArchitectureOptions arch;
    arch.output_tanh = !a.linear_output;
    auto model = build_model<T>(a.seed, arch, normalizer);

    TrainConfig cfg;
    cfg.sgd.learning_rate = a.lr;
    cfg.sgd.momentum = a.momentum;
    cfg.sgd.weight_decay = a.weight_decay;
    if (!a.no_schedule) cfg.sgd.schedule = nn::step_schedule(a.lr, a.epochs);
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.augment = !a.no_augment;
    cfg.seed = a.seed;
    cfg.on_epoch = [](const EpochMetrics& m) {
        std::printf("epoch %3zu  lr %.2e  train %.5f  val %.5f  val MAE p/r/y %.2f %.2f %.2f  (%.1fs)\n", m.epoch + 1,
                    m.learning_rate, m.train_loss, m.val_loss, m.val_mae_deg[0], m.val_mae_deg[1], m.val_mae_deg[2],
                    m.seconds);
        std::fflush(stdout);
    };
    train(model, train_set, val_set, cfg);
    save_checkpoint(a.out, model);
    std::cout << "checkpoint written to " << a.out << '\n';
    return 0;
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
    DataOptions data;
    std::string checkpoint;
    std::string out;
    bool signed_std = false;
    std::size_t bench_iterations = 200;
};

template <typename T>
int eval_with(const EvalArgs& a, const PoseModel<T>& model) {
    const auto format = a.data.depth_format();
    const DatasetIndex index = index_dataset(a.data.root, format);
    const auto test = take(make_split(index).test, a.data.limit);
    EvalReport report =
        evaluate(model, std::span<const FrameRecord>(test), format, {},
                 a.signed_std ? SpreadMode::kSignedError : SpreadMode::kAbsoluteError);
    report.model_id = a.checkpoint;
    report.dataset_id = a.data.root + " (" + a.data.format + ", sequences 01 and 12)";

    std::vector<Sample> bench_frames;
    for (std::size_t i = 0; i < std::min<std::size_t>(test.size(), 16); ++i) {
        bench_frames.push_back(load_sample(test[i], format));
    }
    const BenchResult b = bench(model, bench_frames, a.bench_iterations, 3);

    const std::string text = format_report(report) + "\nbench (warm loop, median of 3 runs)\n" + format_bench(b);
    std::cout << text;
    if (!a.out.empty()) {
        emit_plot_data(report, a.out);
        std::ofstream(fs::path(a.out) / "report.txt") << text;
        std::cout << "plot data written to " << a.out << '\n';
    }
    return 0;
}

// --- predict -----------------------------------------------------------------

struct PredictArgs {
    std::string checkpoint;
    std::string depth;
    std::string format = "biwi";
    std::string calibration;
    std::string pose;
    std::vector<double> center;
};

int run_predict(const PredictArgs& a) {
    const DepthMap depth = load_depth(a.depth, parse_depth_format(a.format));
    const CameraIntrinsics cam = load_calibration(a.calibration);
    Vec3 center{};
    if (!a.pose.empty()) {
        center = load_pose_file(a.pose).head_center_mm;
    } else if (a.center.size() == 3) {
        center = {a.center[0], a.center[1], a.center[2]};
    } else {
        throw ConfigError("predict needs --pose or --center x y z to locate the head");
    }
    const NetInput input = preprocess(depth, cam, project_to_pixel(center, cam), center[2]);
    with_checkpoint(a.checkpoint, [&](const auto& model) {
        const EulerAngles e = predict(model, input);
        std::printf("pitch %.3f  roll %.3f  yaw %.3f\n", e.pitch, e.roll, e.yaw);
    });
    return 0;
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
    DataOptions data;
    std::string checkpoint;
    std::size_t iterations = 200;
    std::size_t runs = 3;
    std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& a) {
    std::vector<Sample> frames;
    if (!a.data.root.empty()) {
        const auto format = a.data.depth_format();
        for (const auto& r : take(index_dataset(a.data.root, format).frames, a.data.limit ? a.data.limit : 16)) {
            frames.push_back(load_sample(r, format));
        }
    } else {
        frames = generate_dataset(16, SynthConfig{}, a.seed);
    }
    auto report = [&](const auto& model) { std::cout << format_bench(bench(model, frames, a.iterations, a.runs)); };
    if (a.checkpoint.empty()) {
        report(build_model<float>(a.seed));
    } else {
        with_checkpoint(a.checkpoint, report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Head pose estimation from depth images"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth-gen", "Render a synthetic dataset in the on-disk layout");
    synth_cmd->add_option("--n", synth.n, "Number of frames")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth.seed, "Run seed");
    synth_cmd->add_option("--out", synth.out, "Output dataset root")->required();
    synth_cmd->add_option("--format", synth.format, "Depth file format")->check(CLI::IsMember({"biwi", "raw"}));

    PreprocessArgs prep;
    auto* prep_cmd = app.add_subcommand("preprocess", "Write the network inputs of every frame as PGM images");
    add_data_options(prep_cmd, prep.data, true);
    prep_cmd->add_option("--limit", prep.data.limit, "Process at most this many frames");
    prep_cmd->add_option("--out", prep.out, "Output directory")->required();

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train on the non-test sequences and write a checkpoint");
    add_data_options(train_cmd, tr.data, true);
    train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
    train_cmd->add_option("--epochs", tr.epochs, "Training epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch-size", tr.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", tr.lr, "Base learning rate")->check(CLI::PositiveNumber);
    train_cmd->add_option("--momentum", tr.momentum, "SGD momentum")->check(CLI::Range(0.0, 0.999999));
    train_cmd->add_option("--weight-decay", tr.weight_decay, "L2 weight decay")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--seed", tr.seed, "Run seed (init, shuffle, augmentation, validation split)");
    train_cmd->add_option("--limit", tr.data.limit, "Use at most this many training frames");
    train_cmd->add_option("--val-fraction", tr.val_fraction, "Share of training sequences held out")
        ->check(CLI::Range(0.0, 0.5));
    train_cmd->add_option("--precision", tr.precision, "Scalar type")->check(CLI::IsMember({"float", "double"}));
    train_cmd->add_flag("--no-augment", tr.no_augment, "Disable online augmentation");
    train_cmd->add_flag("--no-schedule", tr.no_schedule, "Keep the learning rate constant");
    train_cmd->add_flag("--linear-output", tr.linear_output, "Omit the output tanh");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test sequences");
    add_data_options(eval_cmd, ev.data, true);
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint to evaluate")->required();
    eval_cmd->add_option("--out", ev.out, "Directory for report.txt, frames.csv and histogram.csv");
    eval_cmd->add_option("--limit", ev.data.limit, "Evaluate at most this many frames");
    eval_cmd->add_option("--bench-iterations", ev.bench_iterations, "Warm-loop iterations per timing run")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_flag("--signed-std", ev.signed_std, "Report the std of signed rather than absolute errors");

    PredictArgs pr;
    auto* predict_cmd = app.add_subcommand("predict", "Estimate the pose in one depth frame");
    predict_cmd->add_option("--checkpoint", pr.checkpoint, "Trained checkpoint")->required();
    predict_cmd->add_option("--depth", pr.depth, "Depth file")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--format", pr.format, "Depth file format")->check(CLI::IsMember({"biwi", "raw"}));
    predict_cmd->add_option("--calibration", pr.calibration, "Intrinsics file (depth.cal)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* pose_opt = predict_cmd->add_option("--pose", pr.pose, "Pose file supplying the head center");
    predict_cmd->add_option("--center", pr.center, "Head center x y z in millimeters")->expected(3)->excludes(pose_opt);

    BenchArgs be;
    auto* bench_cmd = app.add_subcommand("bench", "Time the forward pass over a warm loop");
    add_data_options(bench_cmd, be.data, false);
    bench_cmd->add_option("--checkpoint", be.checkpoint, "Checkpoint (default: freshly initialized model)");
    bench_cmd->add_option("--iterations", be.iterations, "Frames per timing run")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--runs", be.runs, "Timing runs")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", be.seed, "Seed for synthetic frames and initialization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0 && !e.get_name().empty() && e.get_name() != "CallForHelp") std::cerr << app.help();
        return code;
    }

    try {
        if (*synth_cmd) return run_synth(synth);
        if (*prep_cmd) return run_preprocess(prep);
        if (*train_cmd) return tr.precision == "double" ? train_with<double>(tr) : train_with<float>(tr);
        if (*eval_cmd) {
            int rc = 0;
            with_checkpoint(ev.checkpoint, [&](const auto& model) { rc = eval_with(ev, model); });
            return rc;
        }
        if (*predict_cmd) return run_predict(pr);
        if (*bench_cmd) return run_bench(be);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
