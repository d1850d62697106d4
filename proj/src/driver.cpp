#include "mandcad/driver.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace mandcad {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

VolumeDetections detect_volume(const CtVolume& volume, const PipelineParams& params,
                               const MlpModel* model, double cb_threshold, int threads) {
  params.validate();
  const int n = volume.n_slices();
  std::vector<std::vector<Detection2D>> cb_per_slice(static_cast<std::size_t>(n));
  std::vector<std::vector<Detection2D>> ob_per_slice(static_cast<std::size_t>(n));

  parallel_for(n, threads, [&](int k) {
    const SliceStages stages = compute_slice_stages(volume.slices[static_cast<std::size_t>(k)],
                                                    params);
    if (model)
      cb_per_slice[static_cast<std::size_t>(k)] =
          cb_from_stages(stages, params, *model, cb_threshold, k);
    ob_per_slice[static_cast<std::size_t>(k)] = ob_from_stages(stages, params, k);
  });

  VolumeDetections out;
  for (int k = 0; k < n; ++k) {
    auto& cb = cb_per_slice[static_cast<std::size_t>(k)];
    auto& ob = ob_per_slice[static_cast<std::size_t>(k)];
    out.cb.insert(out.cb.end(), cb.begin(), cb.end());
    out.ob.insert(out.ob.end(), ob.begin(), ob.end());
  }
  return out;
}

std::vector<ScoredCandidate> score_volume_candidates(const CtVolume& volume,
                                                     const PipelineParams& params,
                                                     const MlpModel& model, int threads) {
  params.validate();
  const int n = volume.n_slices();
  std::vector<std::vector<ScoredCandidate>> per_slice(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int k) {
    auto& out = per_slice[static_cast<std::size_t>(k)];
    for (const Candidate& candidate :
         detect_candidates(volume.slices[static_cast<std::size_t>(k)], params)) {
      ScoredCandidate sc;
      sc.slice_index = k;
      sc.centroid_px = candidate.blob.centroid;
      sc.equiv_diameter_mm = equivalent_diameter_mm(candidate.blob, params.spacing);
      sc.score = forward(model, extract_feature_vector(candidate.roi, params.glcm_levels)).lesion;
      sc.roi_bbox = {candidate.roi.x0, candidate.roi.y0,
                     candidate.roi.x0 + static_cast<int>(candidate.roi.pixels.cols()) - 1,
                     candidate.roi.y0 + static_cast<int>(candidate.roi.pixels.rows()) - 1};
      out.push_back(sc);
    }
  });

  std::vector<ScoredCandidate> all;
  for (auto& slice_list : per_slice)
    all.insert(all.end(), slice_list.begin(), slice_list.end());
  return all;
}

}  // namespace mandcad
