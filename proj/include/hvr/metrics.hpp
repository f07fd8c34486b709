#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hvr/episode.hpp"
#include "hvr/location.hpp"
#include "hvr/model.hpp"

namespace hvr {

struct RecognitionMetrics {
  double mean_class_acc = 0.0;
  double top1_acc = 0.0;
  // per class: attempts and hits; classes with zero attempts are excluded
  // from the mean-class accuracy.
  std::vector<std::size_t> class_total;
  std::vector<std::size_t> class_correct;
};

RecognitionMetrics recognition_metrics(const std::vector<int>& preds,
                                       const std::vector<int>& labels,
                                       int num_classes);

struct LocalizationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Binary-classification scoring of a predicted 3D heatmap against a ground
// truth one: both are sum-pooled by the given factors, binarized at tau, and
// compared cellwise.
LocalizationMetrics localization_metrics(const LocationDistribution& pred,
                                         const LocationDistribution& gt,
                                         std::array<int, 3> factors,
                                         double tau);

struct EvalReport {
  double mean_class_acc = 0.0;
  double top1_acc = 0.0;
  double loc_precision = 0.0;
  double loc_recall = 0.0;
  double loc_f1 = 0.0;
  std::vector<std::size_t> class_total;
  std::vector<std::size_t> class_correct;
  std::size_t episodes = 0;
  std::size_t localized_episodes = 0;  // episodes with a ground-truth position
};

struct EpisodeRecord {
  std::size_t id = 0;
  int label = 0;
  int pred = 0;
  std::size_t top_voxel = 0;  // argmax cell of the predicted location map
};

struct EvalOptions {
  double tau = -1.0;    // < 0: 1 / (cells of the downsampled grid)
  double sigma = 1.0;   // smoothing of the ground-truth location heatmap
  int workers = 1;
};

// Runs deterministic inference over every episode and aggregates recognition
// and localization metrics; localization is macro-averaged over clips on the
// location-map grid. Reduction order is fixed regardless of worker count.
EvalReport evaluate(const ModelParams& params, const ModelConfig& config,
                    const std::vector<EpisodeClip>& episodes,
                    const Tensor& env_input, const GridSpec& grid,
                    const EvalOptions& options,
                    std::vector<EpisodeRecord>* out_records = nullptr);

}  // namespace hvr
