#include "hvr/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace hvr {

RecognitionMetrics recognition_metrics(const std::vector<int>& preds,
                                       const std::vector<int>& labels,
                                       int num_classes) {
  if (preds.size() != labels.size() || preds.empty())
    throw std::invalid_argument(
        "recognition_metrics: preds/labels must be equal-length, non-empty");
  RecognitionMetrics m;
  m.class_total.assign(static_cast<std::size_t>(num_classes), 0);
  m.class_correct.assign(static_cast<std::size_t>(num_classes), 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= num_classes)
      throw std::invalid_argument("recognition_metrics: label out of range");
    ++m.class_total[static_cast<std::size_t>(y)];
    if (preds[i] == y) {
      ++m.class_correct[static_cast<std::size_t>(y)];
      ++correct;
    }
  }
  m.top1_acc = static_cast<double>(correct) / static_cast<double>(labels.size());
  double acc_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < m.class_total.size(); ++c) {
    if (m.class_total[c] == 0) continue;
    acc_sum += static_cast<double>(m.class_correct[c]) /
               static_cast<double>(m.class_total[c]);
    ++present;
  }
  m.mean_class_acc = present ? acc_sum / static_cast<double>(present) : 0.0;
  return m;
}

LocalizationMetrics localization_metrics(const LocationDistribution& pred,
                                         const LocationDistribution& gt,
                                         std::array<int, 3> factors,
                                         double tau) {
  if (pred.w != gt.w || pred.d != gt.d || pred.h != gt.h)
    throw std::invalid_argument("localization_metrics: shape mismatch");
  LocationDistribution p = downsample_distribution(pred, factors[0],
                                                   factors[1], factors[2]);
  LocationDistribution g = downsample_distribution(gt, factors[0], factors[1],
                                                   factors[2]);
  std::size_t np = 0, ng = 0, both = 0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const bool bp = p.probs[i] > tau;
    const bool bg = g.probs[i] > tau;
    np += bp;
    ng += bg;
    both += bp && bg;
  }
  LocalizationMetrics m;
  m.precision = np ? static_cast<double>(both) / static_cast<double>(np) : 0.0;
  m.recall = ng ? static_cast<double>(both) / static_cast<double>(ng) : 0.0;
  m.f1 = (m.precision + m.recall > 0.0)
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

EvalReport evaluate(const ModelParams& params, const ModelConfig& config,
                    const std::vector<EpisodeClip>& episodes,
                    const Tensor& env_input, const GridSpec& grid,
                    const EvalOptions& options,
                    std::vector<EpisodeRecord>* out_records) {
  if (episodes.empty())
    throw std::invalid_argument("evaluate: empty episode list");
  config.validate();

  const double tau = options.tau >= 0.0
                         ? options.tau
                         : 1.0 / static_cast<double>(config.loc_cells());

  struct PerEpisode {
    int pred = 0;
    std::size_t top_voxel = 0;
    bool has_loc = false;
    LocalizationMetrics loc;
  };
  std::vector<PerEpisode> results(episodes.size());

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const EpisodeClip& clip = episodes[i];
      Inference inf = infer(clip, env_input, params, config);
      PerEpisode r;
      r.pred = inf.label;
      r.top_voxel = inf.location.argmax();
      if (clip.true_position) {
        CameraTrack gt_track;
        gt_track.key_frames.push_back({0, *clip.true_position});
        LocationDistribution gt_parent =
            make_prior(gt_track, grid, options.sigma);
        LocationDistribution gt = downsample_distribution(
            gt_parent, config.pool_x, config.pool_y, config.pool_z);
        r.loc = localization_metrics(inf.location, gt, {1, 1, 1}, tau);
        r.has_loc = true;
      }
      results[i] = r;
    }
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1 || episodes.size() < 2) {
    run_range(0, episodes.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk =
        (episodes.size() + static_cast<std::size_t>(workers) - 1) /
        static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(begin + chunk, episodes.size());
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  // Fixed-order reduction.
  std::vector<int> preds, labels;
  preds.reserve(episodes.size());
  labels.reserve(episodes.size());
  EvalReport report;
  double psum = 0.0, rsum = 0.0, fsum = 0.0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    preds.push_back(results[i].pred);
    labels.push_back(episodes[i].label);
    if (results[i].has_loc) {
      psum += results[i].loc.precision;
      rsum += results[i].loc.recall;
      fsum += results[i].loc.f1;
      ++report.localized_episodes;
    }
    if (out_records)
      out_records->push_back(
          {i, episodes[i].label, results[i].pred, results[i].top_voxel});
  }

  RecognitionMetrics rec =
      recognition_metrics(preds, labels, config.num_actions);
  report.mean_class_acc = rec.mean_class_acc;
  report.top1_acc = rec.top1_acc;
  report.class_total = std::move(rec.class_total);
  report.class_correct = std::move(rec.class_correct);
  report.episodes = episodes.size();
  if (report.localized_episodes > 0) {
    const double n = static_cast<double>(report.localized_episodes);
    report.loc_precision = psum / n;
    report.loc_recall = rsum / n;
    report.loc_f1 = fsum / n;
  }
  return report;
}

}  // namespace hvr
