#include "mandcad/phantom.hpp"

#include "mandcad/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace mandcad {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double angular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

struct Pocket {
  Eigen::Vector2d center_mm;
  double angle_rad;  // local tangent orientation
  double z_mm;
};

struct RenderContext {
  const PhantomSpec& spec;
  Image<float> base_level;      // slice-invariant intensity fractions
  MaskImage base_tissue;        // true where Gaussian tissue noise applies
  MaskImage band;               // annulus segment
  std::vector<Pocket> pockets;
};

void validate_spec(const PhantomSpec& spec) {
  if (spec.width < 16 || spec.height < 16 || spec.n_slices < 1)
    throw SpecError("phantom: volume must be at least 16x16x1");
  spec.spacing.validate();
  if (spec.noise_sigma < 0 || spec.background_jitter < 0)
    throw SpecError("phantom: noise parameters must be non-negative");
  const auto& arc = spec.arc;
  if (arc.half_width_mm <= 0 || arc.mid_radius_mm <= arc.half_width_mm ||
      arc.cortical_thickness_mm <= 0 || arc.cortical_thickness_mm >= arc.half_width_mm)
    throw SpecError("phantom: inconsistent arc geometry");
  if (!(arc.background_level < arc.trabecular_level && arc.trabecular_level < arc.cortical_level) ||
      arc.background_level < 0 || arc.cortical_level > 1)
    throw SpecError("phantom: intensity levels must be ordered in [0, 1]");

  const double height_mm = spec.height * spec.spacing.in_plane_mm;
  const double upper_limit = 2.0 * height_mm / 3.0;
  for (const auto& lesion : spec.lesions) {
    if (lesion.diameter_mm <= 0) throw SpecError("phantom: lesion diameter must be positive");
    if (spec.enforce_design_ranges) {
      if (lesion.kind == LesionKind::CB &&
          (lesion.diameter_mm < 7.5 || lesion.diameter_mm > 20.0))
        throw SpecError("phantom: CB lesion diameter outside the 7.5-20 mm design range");
      if (lesion.kind == LesionKind::OB &&
          (lesion.diameter_mm < 10.0 || lesion.diameter_mm > 25.0))
        throw SpecError("phantom: OB lesion diameter outside the 10-25 mm design range");
    }
    const Eigen::Vector2d in_plane{lesion.centroid_mm.x(), lesion.centroid_mm.y()};
    const Eigen::Vector2d rel = in_plane - arc.center_mm;
    const double rho = rel.norm();
    if (rho < arc.inner_radius_mm() || rho > arc.outer_radius_mm())
      throw SpecError("phantom: lesion centroid outside the arc band");
    const double phi = std::atan2(rel.y(), rel.x());
    if (angular_distance(phi, 90.0 * kDeg) <= arc.opening_half_angle_deg * kDeg)
      throw SpecError("phantom: lesion centroid inside the arc opening");
    if (lesion.centroid_mm.y() > upper_limit)
      throw SpecError("phantom: lesion centroid in the lower third of the slice");
  }
  for (std::size_t i = 0; i < spec.lesions.size(); ++i)
    for (std::size_t j = i + 1; j < spec.lesions.size(); ++j) {
      const auto& a = spec.lesions[i];
      const auto& b = spec.lesions[j];
      const double min_dist = (a.diameter_mm + b.diameter_mm) / 2.0 + 3.0;
      if ((a.centroid_mm - b.centroid_mm).norm() < min_dist)
        throw SpecError("phantom: overlapping lesions");
    }
}

std::vector<Pocket> place_pockets(const PhantomSpec& spec) {
  std::vector<Pocket> pockets;
  if (spec.pockets.count <= 0) return pockets;

  const auto& arc = spec.arc;
  const double height_mm = spec.height * spec.spacing.in_plane_mm;
  const double z_extent = spec.n_slices * spec.spacing.slice_thickness_mm;

  // Keep pockets out of the opening, out of the bottom third, and clear of
  // lesions and one another.
  const double pocket_half_ang = (spec.pockets.length_mm / 2.0 + 2.0) / arc.mid_radius_mm;
  const double sin_limit =
      (2.0 * height_mm / 3.0 - arc.center_mm.y() - spec.pockets.width_mm) / arc.mid_radius_mm;

  Rng rng(derive_seed(spec.seed, 0x706f636bULL));
  int tries = 0;
  while (static_cast<int>(pockets.size()) < spec.pockets.count && tries < 500) {
    ++tries;
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    if (angular_distance(phi, 90.0 * kDeg) <=
        arc.opening_half_angle_deg * kDeg + pocket_half_ang)
      continue;
    if (std::sin(phi) >= sin_limit) continue;

    Pocket p;
    p.center_mm = arc.center_mm +
                  arc.mid_radius_mm * Eigen::Vector2d{std::cos(phi), std::sin(phi)};
    p.angle_rad = phi;
    const double z_margin = spec.pockets.depth_mm / 2.0 + 0.5;
    p.z_mm = (z_extent > 2.0 * z_margin) ? rng.uniform(z_margin, z_extent - z_margin)
                                         : z_extent / 2.0;

    bool clear = true;
    for (const auto& lesion : spec.lesions) {
      const double need = lesion.diameter_mm / 2.0 + spec.pockets.length_mm / 2.0 + 4.0;
      const Eigen::Vector3d p3{p.center_mm.x(), p.center_mm.y(), p.z_mm};
      if ((p3 - lesion.centroid_mm).norm() < need) clear = false;
    }
    for (const auto& other : pockets) {
      if ((p.center_mm - other.center_mm).norm() < spec.pockets.length_mm + 4.0 &&
          std::abs(p.z_mm - other.z_mm) < spec.pockets.depth_mm + 1.0)
        clear = false;
    }
    if (clear) pockets.push_back(p);
  }
  return pockets;
}

RenderContext build_context(const PhantomSpec& spec) {
  RenderContext ctx{spec, {}, {}, {}, place_pockets(spec)};
  const int w = spec.width, h = spec.height;
  const double s = spec.spacing.in_plane_mm;
  const auto& arc = spec.arc;

  ctx.base_level.resize(h, w);
  ctx.base_tissue.resize(h, w);
  ctx.band.resize(h, w);
  const double opening = arc.opening_half_angle_deg * kDeg;
  for (int y = 0; y < h; ++y) {
    const double py = (y + 0.5) * s;
    for (int x = 0; x < w; ++x) {
      const double px = (x + 0.5) * s;
      const Eigen::Vector2d rel{px - arc.center_mm.x(), py - arc.center_mm.y()};
      const double rho = rel.norm();
      const double ang_gap = angular_distance(std::atan2(rel.y(), rel.x()), 90.0 * kDeg);
      const bool in_band =
          rho >= arc.inner_radius_mm() && rho <= arc.outer_radius_mm() && ang_gap > opening;
      ctx.band(y, x) = in_band;
      ctx.base_tissue(y, x) = in_band;
      if (!in_band) {
        ctx.base_level(y, x) = static_cast<float>(arc.background_level);
        continue;
      }
      const bool cortical = rho <= arc.inner_radius_mm() + arc.cortical_thickness_mm ||
                            rho >= arc.outer_radius_mm() - arc.cortical_thickness_mm ||
                            (ang_gap - opening) * rho <= arc.cortical_thickness_mm;
      ctx.base_level(y, x) =
          static_cast<float>(cortical ? arc.cortical_level : arc.trabecular_level);
    }
  }
  return ctx;
}

// Applies one slice's cross-sections of z-dependent structures, then noise.
SliceU16 render_slice(const RenderContext& ctx, int slice_index) {
  const PhantomSpec& spec = ctx.spec;
  const int w = spec.width, h = spec.height;
  const double s = spec.spacing.in_plane_mm;
  const double z = slice_index * spec.spacing.slice_thickness_mm;

  Image<float> level = ctx.base_level;
  MaskImage tissue = ctx.base_tissue;

  auto for_disk = [&](const Eigen::Vector2d& center_mm, double radius_mm, auto&& fn) {
    const int x0 = std::max(0, static_cast<int>((center_mm.x() - radius_mm) / s - 1.0));
    const int x1 = std::min(w - 1, static_cast<int>((center_mm.x() + radius_mm) / s + 1.0));
    const int y0 = std::max(0, static_cast<int>((center_mm.y() - radius_mm) / s - 1.0));
    const int y1 = std::min(h - 1, static_cast<int>((center_mm.y() + radius_mm) / s + 1.0));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const Eigen::Vector2d p{(x + 0.5) * s, (y + 0.5) * s};
        fn(x, y, p);
      }
  };

  const float bg = static_cast<float>(spec.arc.background_level);
  const float cort = static_cast<float>(spec.arc.cortical_level);

  for (const Pocket& pocket : ctx.pockets) {
    const double dz = (z - pocket.z_mm) / (spec.pockets.depth_mm / 2.0);
    const double cross = 1.0 - dz * dz;
    if (cross <= 0.0) continue;
    const double a = spec.pockets.length_mm / 2.0;  // along tangent
    const double b = spec.pockets.width_mm / 2.0;
    const Eigen::Vector2d tangent{-std::sin(pocket.angle_rad), std::cos(pocket.angle_rad)};
    const Eigen::Vector2d normal{std::cos(pocket.angle_rad), std::sin(pocket.angle_rad)};
    for_disk(pocket.center_mm, a, [&](int x, int y, const Eigen::Vector2d& p) {
      if (!ctx.band(y, x)) return;
      const Eigen::Vector2d rel = p - pocket.center_mm;
      const double u = rel.dot(tangent) / a;
      const double v = rel.dot(normal) / b;
      if (u * u + v * v <= cross) {
        level(y, x) = bg;
        tissue(y, x) = false;
      }
    });
  }

  for (const auto& lesion : spec.lesions) {
    const Eigen::Vector2d c{lesion.centroid_mm.x(), lesion.centroid_mm.y()};
    const double dz = z - lesion.centroid_mm.z();
    if (lesion.kind == LesionKind::OB) {
      // Cortical defect: a disk-shaped cut through the band over the
      // lesion's slice extent. Disk walls keep the cut width nearly uniform
      // across the band, which the 5/30 mm size window relies on.
      if (std::abs(dz) > lesion.diameter_mm / 2.0) continue;
      const double r = lesion.diameter_mm / 2.0;
      const double r2 = r * r;
      for_disk(c, r, [&](int x, int y, const Eigen::Vector2d& p) {
        if (!ctx.band(y, x)) return;
        if ((p - c).squaredNorm() <= r2) {
          level(y, x) = bg;
          tissue(y, x) = false;
        }
      });
    } else {
      // Enclosed lesion: dark ball wrapped in a cortical-level rim.
      const double rim_r2 =
          (lesion.diameter_mm / 2.0 + spec.cb_rim_thickness_mm) *
              (lesion.diameter_mm / 2.0 + spec.cb_rim_thickness_mm) -
          dz * dz;
      if (rim_r2 <= 0.0) continue;
      const double core_r2 = lesion.diameter_mm * lesion.diameter_mm / 4.0 - dz * dz;
      for_disk(c, std::sqrt(rim_r2), [&](int x, int y, const Eigen::Vector2d& p) {
        const double d2 = (p - c).squaredNorm();
        if (d2 > rim_r2) return;
        if (core_r2 > 0.0 && d2 <= core_r2) {
          level(y, x) = bg;
          tissue(y, x) = false;
        } else {
          level(y, x) = cort;
          tissue(y, x) = true;
        }
      });
    }
  }

  Rng rng(derive_seed(spec.seed, 0x736c6963ULL + static_cast<std::uint64_t>(slice_index)));
  SliceU16 out(h, w);
  const float* lv = level.data();
  const bool* ts = tissue.data();
  std::uint16_t* dst = out.data();
  const std::size_t n = static_cast<std::size_t>(out.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double noise = ts[i] ? spec.noise_sigma * rng.normal()
                               : rng.uniform(-spec.background_jitter, spec.background_jitter);
    const double v = std::clamp(static_cast<double>(lv[i]) + noise, 0.0, 1.0);
    dst[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
  }
  return out;
}

}  // namespace

PhantomResult generate_phantom(const PhantomSpec& spec) {
  validate_spec(spec);
  const RenderContext ctx = build_context(spec);

  PhantomResult result;
  result.volume.spacing = spec.spacing;
  result.volume.patient_id = spec.patient_id;
  result.volume.slices.reserve(static_cast<std::size_t>(spec.n_slices));
  for (int k = 0; k < spec.n_slices; ++k) result.volume.slices.push_back(render_slice(ctx, k));

  result.truth.reserve(spec.lesions.size());
  for (const auto& lesion : spec.lesions) {
    GroundTruthLesion t;
    t.centroid_mm = lesion.centroid_mm;
    t.diameter_mm = lesion.diameter_mm;
    t.kind = lesion.kind;
    t.patient_id = spec.patient_id;
    result.truth.push_back(std::move(t));
  }
  return result;
}

namespace {

nlohmann::json spec_to_json(const PhantomSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["n_slices"] = spec.n_slices;
  j["spacing"] = {{"in_plane_mm", spec.spacing.in_plane_mm},
                  {"slice_thickness_mm", spec.spacing.slice_thickness_mm}};
  j["arc"] = {{"center_mm", {spec.arc.center_mm.x(), spec.arc.center_mm.y()}},
              {"mid_radius_mm", spec.arc.mid_radius_mm},
              {"half_width_mm", spec.arc.half_width_mm},
              {"cortical_thickness_mm", spec.arc.cortical_thickness_mm},
              {"opening_half_angle_deg", spec.arc.opening_half_angle_deg},
              {"background_level", spec.arc.background_level},
              {"trabecular_level", spec.arc.trabecular_level},
              {"cortical_level", spec.arc.cortical_level}};
  j["pockets"] = {{"count", spec.pockets.count},
                  {"width_mm", spec.pockets.width_mm},
                  {"length_mm", spec.pockets.length_mm},
                  {"depth_mm", spec.pockets.depth_mm}};
  nlohmann::json lesions = nlohmann::json::array();
  for (const auto& lesion : spec.lesions)
    lesions.push_back({{"kind", to_string(lesion.kind)},
                       {"centroid_mm",
                        {lesion.centroid_mm.x(), lesion.centroid_mm.y(), lesion.centroid_mm.z()}},
                       {"diameter_mm", lesion.diameter_mm}});
  j["lesions"] = std::move(lesions);
  j["noise_sigma"] = spec.noise_sigma;
  j["background_jitter"] = spec.background_jitter;
  j["cb_rim_thickness_mm"] = spec.cb_rim_thickness_mm;
  j["enforce_design_ranges"] = spec.enforce_design_ranges;
  j["patient_id"] = spec.patient_id;
  return j;
}

PhantomSpec spec_from_json(const nlohmann::json& j) {
  PhantomSpec spec;
  try {
    spec.seed = j.value("seed", spec.seed);
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.n_slices = j.value("n_slices", spec.n_slices);
    if (j.contains("spacing")) {
      spec.spacing.in_plane_mm = j["spacing"].value("in_plane_mm", spec.spacing.in_plane_mm);
      spec.spacing.slice_thickness_mm =
          j["spacing"].value("slice_thickness_mm", spec.spacing.slice_thickness_mm);
    }
    if (j.contains("arc")) {
      const auto& a = j["arc"];
      if (a.contains("center_mm"))
        spec.arc.center_mm = {a["center_mm"].at(0).get<double>(),
                              a["center_mm"].at(1).get<double>()};
      spec.arc.mid_radius_mm = a.value("mid_radius_mm", spec.arc.mid_radius_mm);
      spec.arc.half_width_mm = a.value("half_width_mm", spec.arc.half_width_mm);
      spec.arc.cortical_thickness_mm =
          a.value("cortical_thickness_mm", spec.arc.cortical_thickness_mm);
      spec.arc.opening_half_angle_deg =
          a.value("opening_half_angle_deg", spec.arc.opening_half_angle_deg);
      spec.arc.background_level = a.value("background_level", spec.arc.background_level);
      spec.arc.trabecular_level = a.value("trabecular_level", spec.arc.trabecular_level);
      spec.arc.cortical_level = a.value("cortical_level", spec.arc.cortical_level);
    }
    if (j.contains("pockets")) {
      const auto& p = j["pockets"];
      spec.pockets.count = p.value("count", spec.pockets.count);
      spec.pockets.width_mm = p.value("width_mm", spec.pockets.width_mm);
      spec.pockets.length_mm = p.value("length_mm", spec.pockets.length_mm);
      spec.pockets.depth_mm = p.value("depth_mm", spec.pockets.depth_mm);
    }
    for (const auto& l : j.value("lesions", nlohmann::json::array())) {
      PhantomLesionSpec lesion;
      lesion.kind = lesion_kind_from_string(l.at("kind").get<std::string>());
      lesion.centroid_mm = {l.at("centroid_mm").at(0).get<double>(),
                            l.at("centroid_mm").at(1).get<double>(),
                            l.at("centroid_mm").at(2).get<double>()};
      lesion.diameter_mm = l.at("diameter_mm").get<double>();
      spec.lesions.push_back(lesion);
    }
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.background_jitter = j.value("background_jitter", spec.background_jitter);
    spec.cb_rim_thickness_mm = j.value("cb_rim_thickness_mm", spec.cb_rim_thickness_mm);
    spec.enforce_design_ranges = j.value("enforce_design_ranges", spec.enforce_design_ranges);
    spec.patient_id = j.value("patient_id", spec.patient_id);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("phantom spec: ") + e.what());
  }
  return spec;
}

}  // namespace

PhantomSpec phantom_spec_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open phantom spec '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("phantom spec '" + path.string() + "': " + e.what());
  }
  return spec_from_json(j);
}

void write_phantom_manifest(const PhantomSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << spec_to_json(spec).dump(1) << '\n';
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

}  // namespace mandcad
