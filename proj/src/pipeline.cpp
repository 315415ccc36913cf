#include "hpe/pipeline.hpp"

#include "hpe/error.hpp"

namespace hpe {

NetInput preprocess_sample(const Sample& sample, const PrepConfig& config) {
    const PixelCoord center = project_to_pixel(sample.label.head_center_mm, sample.intrinsics);
    return preprocess(sample.depth, sample.intrinsics, center, sample.label.head_center_mm[2], config);
}

TrainExample make_example(const Sample& sample, const AngleNormalizer& normalizer, const PrepConfig& config) {
    return {preprocess_sample(sample, config), normalizer.normalize(sample.label.euler_deg)};
}

std::vector<TrainExample> make_examples(std::span<const Sample> samples, const AngleNormalizer& normalizer,
                                        const PrepConfig& config, std::size_t* skipped) {
    std::vector<TrainExample> out;
    out.reserve(samples.size());
    std::size_t failed = 0;
    for (const Sample& s : samples) {
        try {
            out.push_back(make_example(s, normalizer, config));
        } catch (const DegenerateInputError&) {
            ++failed;
        } catch (const EmptyCropError&) {
            ++failed;
        }
    }
    if (skipped) *skipped = failed;
    return out;
}

}  // namespace hpe
