#pragma once

#include <span>
#include <vector>

#include "hpe/dataset_io.hpp"
#include "hpe/depth_prep.hpp"
#include "hpe/posenet.hpp"

namespace hpe {

/// Runs preprocessing on a sample, centered on its annotated head center.
NetInput preprocess_sample(const Sample& sample, const PrepConfig& config = {});

TrainExample make_example(const Sample& sample, const AngleNormalizer& normalizer, const PrepConfig& config = {});

/// Preprocesses every sample; samples whose preprocessing fails are skipped
/// and counted in `skipped` when provided.
std::vector<TrainExample> make_examples(std::span<const Sample> samples, const AngleNormalizer& normalizer,
                                        const PrepConfig& config = {}, std::size_t* skipped = nullptr);

}  // namespace hpe
