#include "mandcad/eval3d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mandcad {

const char* to_string(LesionKind kind) { return kind == LesionKind::CB ? "CB" : "OB"; }

LesionKind lesion_kind_from_string(const std::string& text) {
  if (text == "CB") return LesionKind::CB;
  if (text == "OB") return LesionKind::OB;
  throw FormatError("unknown lesion kind '" + text + "'");
}

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<LesionCluster> cluster_detections(const std::vector<Detection2D>& detections,
                                              const VoxelSpacing& spacing, double link_radius_mm,
                                              int min_persistence) {
  spacing.validate();
  if (link_radius_mm <= 0.0) throw std::invalid_argument("cluster_detections: link radius <= 0");
  if (min_persistence < 1) throw std::invalid_argument("cluster_detections: persistence < 1");

  // Canonical order makes clustering independent of input permutation.
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = detections[a];
    const auto& db = detections[b];
    if (da.slice_index != db.slice_index) return da.slice_index < db.slice_index;
    if (da.centroid_px.y() != db.centroid_px.y()) return da.centroid_px.y() < db.centroid_px.y();
    if (da.centroid_px.x() != db.centroid_px.x()) return da.centroid_px.x() < db.centroid_px.x();
    return da.kind < db.kind;
  });

  const double link_px = link_radius_mm / spacing.in_plane_mm;
  const double link_px2 = link_px * link_px;
  DisjointSet sets(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& di = detections[order[i]];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& dj = detections[order[j]];
      if (dj.slice_index - di.slice_index > 1) break;  // sorted by slice
      if (di.kind != dj.kind) continue;
      if ((di.centroid_px - dj.centroid_px).squaredNorm() <= link_px2)
        sets.unite(static_cast<int>(i), static_cast<int>(j));
    }
  }

  std::vector<std::vector<std::size_t>> groups(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    groups[static_cast<std::size_t>(sets.find(static_cast<int>(i)))].push_back(order[i]);

  std::vector<LesionCluster> clusters;
  for (const auto& members : groups) {
    if (static_cast<int>(members.size()) < min_persistence) continue;
    LesionCluster c;
    c.kind = detections[members.front()].kind;
    c.member_count = static_cast<int>(members.size());
    c.first_slice = c.last_slice = detections[members.front()].slice_index;
    Eigen::Vector3d sum_mm = Eigen::Vector3d::Zero();
    double sum_score = 0, sum_diam = 0;
    for (const std::size_t m : members) {
      const auto& d = detections[m];
      c.first_slice = std::min(c.first_slice, d.slice_index);
      c.last_slice = std::max(c.last_slice, d.slice_index);
      sum_mm.x() += (d.centroid_px.x() + 0.5) * spacing.in_plane_mm;
      sum_mm.y() += (d.centroid_px.y() + 0.5) * spacing.in_plane_mm;
      sum_mm.z() += d.slice_index * spacing.slice_thickness_mm;
      sum_score += d.score;
      sum_diam += d.equiv_diameter_mm;
    }
    c.centroid_mm = sum_mm / c.member_count;
    c.mean_score = sum_score / c.member_count;
    c.mean_diameter_mm = sum_diam / c.member_count;
    clusters.push_back(c);
  }

  std::sort(clusters.begin(), clusters.end(), [](const LesionCluster& a, const LesionCluster& b) {
    if (a.first_slice != b.first_slice) return a.first_slice < b.first_slice;
    if (a.centroid_mm.y() != b.centroid_mm.y()) return a.centroid_mm.y() < b.centroid_mm.y();
    return a.centroid_mm.x() < b.centroid_mm.x();
  });
  return clusters;
}

MatchCounts match(const std::vector<LesionCluster>& clusters,
                  const std::vector<GroundTruthLesion>& truths, double match_radius_floor_mm) {
  struct Pair {
    double dist;
    int cluster_first_slice;
    double cluster_y;
    double cluster_x;
    std::size_t cluster;
    std::size_t truth;
  };
  std::vector<Pair> pairs;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (std::size_t t = 0; t < truths.size(); ++t) {
      const double dist = (clusters[c].centroid_mm - truths[t].centroid_mm).norm();
      if (dist <= std::max(match_radius_floor_mm, truths[t].diameter_mm / 2.0))
        pairs.push_back({dist, clusters[c].first_slice, clusters[c].centroid_mm.y(),
                         clusters[c].centroid_mm.x(), c, t});
    }
  // Ties resolve on cluster geometry, not list position, so permuting the
  // cluster list cannot change the counts.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.cluster_first_slice != b.cluster_first_slice)
      return a.cluster_first_slice < b.cluster_first_slice;
    if (a.cluster_y != b.cluster_y) return a.cluster_y < b.cluster_y;
    if (a.cluster_x != b.cluster_x) return a.cluster_x < b.cluster_x;
    return a.truth < b.truth;
  });

  std::vector<bool> cluster_used(clusters.size(), false);
  std::vector<bool> truth_used(truths.size(), false);
  MatchCounts counts;
  for (const Pair& p : pairs) {
    if (cluster_used[p.cluster] || truth_used[p.truth]) continue;
    cluster_used[p.cluster] = true;
    truth_used[p.truth] = true;
    ++counts.tp;
  }
  counts.fp = static_cast<int>(clusters.size()) - counts.tp;
  counts.fn = static_cast<int>(truths.size()) - counts.tp;
  return counts;
}

double sensitivity(const std::vector<PatientEval>& patients) {
  long tp = 0, fn = 0;
  for (const auto& p : patients) {
    tp += p.counts.tp;
    fn += p.counts.fn;
  }
  if (tp + fn == 0)
    throw DegenerateInputError("sensitivity: no ground-truth lesions in the cohort");
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

FpStats fp_per_patient(const std::vector<PatientEval>& patients) {
  if (patients.empty()) throw std::invalid_argument("fp_per_patient: no patients");
  long fp = 0;
  int with_fp = 0, normals = 0;
  for (const auto& p : patients) {
    fp += p.counts.fp;
    with_fp += (p.counts.fp > 0);
    normals += (p.n_truths == 0);
  }
  FpStats stats;
  stats.mean_fp = static_cast<double>(fp) / static_cast<double>(patients.size());
  if (normals > 0)
    stats.patient_rate = static_cast<double>(with_fp) / static_cast<double>(normals);
  return stats;
}

std::vector<FrocPoint> froc_curve(
    const std::vector<std::pair<double, std::vector<PatientEval>>>& sweep) {
  if (sweep.size() < 2) throw std::invalid_argument("froc_curve: need at least two thresholds");
  std::vector<FrocPoint> curve;
  curve.reserve(sweep.size());
  for (const auto& [threshold, patients] : sweep) {
    FrocPoint pt;
    pt.threshold = threshold;
    pt.sensitivity = sensitivity(patients);
    const FpStats fp = fp_per_patient(patients);
    pt.fp_per_patient = fp.mean_fp;
    pt.patient_rate = fp.patient_rate;
    curve.push_back(pt);
  }
  std::sort(curve.begin(), curve.end(), [](const FrocPoint& a, const FrocPoint& b) {
    if (a.fp_per_patient != b.fp_per_patient) return a.fp_per_patient < b.fp_per_patient;
    return a.sensitivity < b.sensitivity;
  });
  return curve;
}

std::vector<LesionCluster> suppress_ob_overlapping_cb(std::vector<LesionCluster> clusters,
                                                      double match_radius_floor_mm) {
  std::erase_if(clusters, [&](const LesionCluster& c) {
    if (c.kind != LesionKind::OB) return false;
    for (const LesionCluster& other : clusters) {
      if (other.kind != LesionKind::CB) continue;
      const double radius = std::max(match_radius_floor_mm, other.mean_diameter_mm / 2.0);
      if ((c.centroid_mm - other.centroid_mm).norm() <= radius) return true;
    }
    return false;
  });
  return clusters;
}

std::vector<GroundTruthLesion> read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth '" + path.string() + "'");
  std::vector<GroundTruthLesion> truths;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    GroundTruthLesion t;
    std::string kind;
    if (!(ss >> t.patient_id)) continue;  // blank line
    if (!(ss >> kind >> t.centroid_mm.x() >> t.centroid_mm.y() >> t.centroid_mm.z() >>
          t.diameter_mm))
      throw FormatError("ground truth '" + path.string() + "' line " + std::to_string(line_no) +
                        ": expected 'patient kind x y z diameter'");
    t.kind = lesion_kind_from_string(kind);
    if (t.diameter_mm <= 0)
      throw FormatError("ground truth '" + path.string() + "' line " + std::to_string(line_no) +
                        ": diameter must be positive");
    truths.push_back(std::move(t));
  }
  return truths;
}

void write_ground_truth(const std::vector<GroundTruthLesion>& truths,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# patient_id kind x_mm y_mm z_mm diameter_mm\n";
  out.precision(17);
  for (const auto& t : truths)
    out << t.patient_id << ' ' << to_string(t.kind) << ' ' << t.centroid_mm.x() << ' '
        << t.centroid_mm.y() << ' ' << t.centroid_mm.z() << ' ' << t.diameter_mm << '\n';
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

void write_froc(const std::vector<FrocPoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# threshold sensitivity mean_fp_per_patient patient_rate\n";
  out.precision(10);
  for (const auto& pt : curve) {
    out << pt.threshold << ' ' << pt.sensitivity << ' ' << pt.fp_per_patient << ' ';
    if (pt.patient_rate)
      out << *pt.patient_rate;
    else
      out << '-';
    out << '\n';
  }
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

}  // namespace mandcad
