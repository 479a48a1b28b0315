// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "plot/assoc.hpp"
#include "plot/attributes.hpp"
#include "plot/geometry.hpp"
#include "plot/ingest.hpp"
#include "plot/metrics.hpp"
#include "plot/oracle.hpp"
#include "plot/pipeline.hpp"
#include "scenes.hpp"

namespace fs = std::filesystem;
using namespace plot;
using namespace plot::testing;
using Clock = std::chrono::steady_clock;
using boost::multiprecision::cpp_rational;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& run) {
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++g_failures;
  std::printf("[%s] %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("plot_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---------------------------------------------------------------- 2

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Outcome procrustes_exactness() {
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> count(20, 200);
  std::uniform_real_distribution<double> scale(0.5, 2.0), coord(-10.0, 10.0), unit(-1.0, 1.0);
  double worst_rms = 0.0, worst_s = 0.0, worst_r = 0.0, worst_t = 0.0;
  double elapsed = 0.0;
  for (int inst = 0; inst < 500; ++inst) {
    const double s = scale(rng);
    const Mat3 R = random_rotation(rng);
    Vec3 t(unit(rng), unit(rng), unit(rng));
    t = t.normalized() * 50.0 * std::abs(unit(rng));
    CorrespondenceSet c;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const Vec3 p(coord(rng), coord(rng), coord(rng));
      c.add(p, s * (R * p) + t);
    }
    const auto t0 = Clock::now();
    const Registration r = procrustes(c, true);
    elapsed += seconds_since(t0);
    worst_rms = std::max(worst_rms, r.rms);
    worst_s = std::max(worst_s, std::abs(r.transform.scale - s));
    worst_r = std::max(worst_r, (r.transform.rotation - R).cwiseAbs().maxCoeff());
    worst_t = std::max(worst_t, (r.transform.translation - t).norm());
  }
  const bool ok = worst_rms < 1e-8 && worst_s < 1e-9 && worst_r < 1e-9 && worst_t < 1e-8 &&
                  elapsed < 1.0;
  return {ok, "max rms=" + fmt("%.2e", worst_rms) + " |ds|=" + fmt("%.2e", worst_s) +
                  " |dR|=" + fmt("%.2e", worst_r) + " |dt|=" + fmt("%.2e", worst_t) +
                  " time=" + fmt("%.3fs", elapsed)};
}

// ---------------------------------------------------------------- 3

std::vector<Pixel> random_rect_mask(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pos(0, 9), len(1, 5);
  const int u0 = pos(rng), v0 = pos(rng), w = len(rng), h = len(rng);
  std::vector<Pixel> px;
  for (int v = v0; v < v0 + h; ++v) {
    for (int u = u0; u < u0 + w; ++u) px.push_back({u, v});
  }
  return normalize_pixels(std::move(px));
}

cpp_rational exact_iou(const std::vector<Pixel>& a, const std::vector<Pixel>& b) {
  std::set<std::pair<int, int>> sa, sb;
  for (const Pixel& p : a) sa.insert({p.u, p.v});
  for (const Pixel& p : b) sb.insert({p.u, p.v});
  int inter = 0;
  for (const auto& p : sa) inter += static_cast<int>(sb.count(p));
  const int uni = static_cast<int>(sa.size() + sb.size()) - inter;
  return cpp_rational(inter, uni);
}

// Best total over all injective assignments of the smaller side.
cpp_rational brute_force_best(const std::vector<std::vector<cpp_rational>>& m) {
  const std::size_t n = m.size(), k = m.empty() ? 0 : m[0].size();
  cpp_rational best = 0;
  if (n == 0 || k == 0) return best;
  const bool rows_small = n <= k;
  const std::size_t small = rows_small ? n : k, large = rows_small ? k : n;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    cpp_rational total = 0;
    for (std::size_t i = 0; i < small; ++i) {
      total += rows_small ? m[i][perm[i]] : m[perm[i]][i];
    }
    if (total > best) best = total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome hungarian_correctness() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(0, 7);
  const ImageSize img{16, 16};
  int mismatches = 0, one_to_one_violations = 0;
  double elapsed = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int n = size(rng), m = size(rng);
    std::vector<std::vector<Pixel>> tracked;
    std::vector<InstanceMask> detected;
    for (int i = 0; i < n; ++i) tracked.push_back(random_rect_mask(rng));
    for (int j = 0; j < m; ++j) detected.emplace_back(0, random_rect_mask(rng), img, 0.9, "car");
    std::vector<std::vector<cpp_rational>> iou(static_cast<std::size_t>(n),
                                               std::vector<cpp_rational>(static_cast<std::size_t>(m)));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        std::vector<Pixel> d(detected[static_cast<std::size_t>(j)].pixels().begin(),
                             detected[static_cast<std::size_t>(j)].pixels().end());
        iou[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            exact_iou(tracked[static_cast<std::size_t>(i)], d);
      }
    }
    const auto t0 = Clock::now();
    const MatchResult r = match_masks(tracked, detected, 0.0);
    elapsed += seconds_since(t0);

    std::set<int> rows, cols;
    cpp_rational total = 0;
    for (const auto& [i, j] : r.pairs) {
      if (!rows.insert(i).second || !cols.insert(j).second) ++one_to_one_violations;
      total += iou[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    if (total != brute_force_best(iou)) ++mismatches;
  }
  const bool ok = mismatches == 0 && one_to_one_violations == 0 && elapsed < 5.0;
  return {ok, "1000 matrices n,m<=7: total-IoU mismatches=" + std::to_string(mismatches) +
                  " one-to-one violations=" + std::to_string(one_to_one_violations) +
                  " time=" + fmt("%.3fs", elapsed)};
}

// ---------------------------------------------------------------- 4

Outcome clipping_formula() {
  const std::vector<int> quarters = {0, 1, 2, 3, 4};  // tau = k / 4
  long formula_checks = 0, formula_bad = 0, clip_checks = 0, clip_bad = 0;
  for (int nb = 2; nb <= 128; ++nb) {
    for (int js = 0; js < nb; ++js) {
      for (int k : quarters) {
        const double tau = k / 4.0;
        // floor(j* + k (N_b - j*) / 4) in integers
        const int expected = js + (k * (nb - js)) / 4;
        ++formula_checks;
        if (clip_upper_bin(js, tau, nb) != expected) ++formula_bad;
        if (k == 0) continue;  // tau must be positive for a clip configuration

        // One point per bin center on [0, N_b], bin j* reinforced, so the
        // densest bin is j* and every edge is an integer.
        PointCloud cloud;
        cloud.points.push_back(Vec3(0, 0, 0.0));
        cloud.points.push_back(Vec3(0, 0, static_cast<double>(nb)));
        for (int j = 0; j < nb; ++j) cloud.points.push_back(Vec3(0, 0, j + 0.5));
        for (int r = 0; r < 3; ++r) cloud.points.push_back(Vec3(0, 0, js + 0.5));
        const ClipResult res = depth_clip(cloud, ClipConfig{nb, tau});
        std::size_t kept = 0;
        for (const Vec3& p : cloud.points) {
          if (p.z() >= js && p.z() <= std::min(expected + 1, nb)) ++kept;
        }
        ++clip_checks;
        if (res.densest_bin != js || res.upper_bin != expected ||
            res.cloud.size() != kept) {
          ++clip_bad;
        }
      }
    }
  }

  // Fuzz: the clipped cloud is a non-empty sub-multiset of the input.
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> npts(1, 400), nbins(2, 128), kind(0, 3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int fuzz_bad = 0;
  const int fuzz_cases = 2000;
  for (int it = 0; it < fuzz_cases; ++it) {
    PointCloud cloud;
    const int n = npts(rng), kd = kind(rng);
    std::normal_distribution<double> g(10.0, 0.5);
    std::exponential_distribution<double> tail(0.3);
    for (int i = 0; i < n; ++i) {
      double z;
      switch (kd) {
        case 0: z = 5.0 + 30.0 * u01(rng); break;
        case 1: z = g(rng); break;
        case 2: z = 7.0; break;
        default: z = 8.0 + tail(rng); break;
      }
      cloud.points.push_back(Vec3(u01(rng), u01(rng), z));
    }
    const ClipConfig cfg{nbins(rng), std::max(1e-3, u01(rng))};
    const ClipResult res = depth_clip(cloud, cfg);
    std::multiset<std::tuple<double, double, double>> pool;
    for (const Vec3& p : cloud.points) pool.insert({p.x(), p.y(), p.z()});
    bool ok = !res.cloud.empty();
    for (const Vec3& p : res.cloud.points) {
      auto itp = pool.find({p.x(), p.y(), p.z()});
      if (itp == pool.end()) {
        ok = false;
        break;
      }
      pool.erase(itp);
    }
    if (!ok) ++fuzz_bad;
  }
  const bool ok = formula_bad == 0 && clip_bad == 0 && fuzz_bad == 0;
  return {ok, "grid formula " + std::to_string(formula_checks - formula_bad) + "/" +
                  std::to_string(formula_checks) + ", clip bounds " +
                  std::to_string(clip_checks - clip_bad) + "/" + std::to_string(clip_checks) +
                  ", fuzz subset " + std::to_string(fuzz_cases - fuzz_bad) + "/" +
                  std::to_string(fuzz_cases)};
}

// ---------------------------------------------------------------- 5

const Box3D* label_for_object(const FrameLabels& fl, const SyntheticOutput& syn, int object) {
  // Labels carry the 2D box of their output-frame entry; match it to the
  // detection it came from.
  for (const ObjectLabel& l : fl.labels) {
    for (const Detection& d : syn.bundle.frame(fl.frame).detections) {
      if (l.box.box2d && *l.box.box2d == d.box &&
          syn.mask_object.at({fl.frame, d.mask_id}) == object) {
        return &l.box;
      }
    }
  }
  return nullptr;
}

Outcome end_to_end_noiseless() {
  const auto t0 = Clock::now();
  const SyntheticScene scene = static_car_scene(5);
  const SyntheticOutput syn = synthesize(scene);
  PipelineConfig cfg;
  cfg.window = 5;
  const std::vector<FrameLabels> out = run_pipeline(syn.bundle, cfg, PriorTable::defaults());
  const double elapsed = seconds_since(t0);
  const FrameLabels& fl = out.front();
  const Box3D* pred = label_for_object(fl, syn, 0);
  if (pred == nullptr) return {false, "no label for the car"};
  const LabelErrors e = errors_against(*pred, syn.truth[static_cast<std::size_t>(fl.frame)][0]);
  const bool ok = e.ate < 0.05 && e.aoe < 0.02 && e.ase < 0.03 && elapsed < 10.0;
  return {ok, "ATE=" + fmt("%.4f", e.ate) + " AOE(mod pi)=" + fmt("%.4f", e.aoe) +
                  " ASE=" + fmt("%.4f", e.ase) + " time=" + fmt("%.2fs", elapsed)};
}

// ---------------------------------------------------------------- 6

SyntheticScene occluded_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 3);
  std::uniform_real_distribution<double> x(-3.0, 3.0), z(10.0, 15.0), yaw(-0.3, 0.3),
      step(0.4, 0.8);
  SyntheticScene s;
  s.intrinsics = kitti_intrinsics();
  s.image_size = kitti_size();
  s.poses = forward_poses(5, step(rng));
  s.objects.push_back(prior_car(x(rng), z(rng), yaw(rng)));
  s.seed = seed;
  s.track_stride = 2;
  s.noise.depth_sigma = 0.05;
  s.noise.occlusions.push_back({0, 2, 0.5, OcclusionSide::bottom});
  return s;
}

Outcome multi_frame_benefit() {
  const int seeds = 20;
  LabelErrors full_sum, single_sum;
  int missing = 0;
  for (int seed = 1; seed <= seeds; ++seed) {
    const SyntheticOutput syn = synthesize(occluded_scene(static_cast<std::uint64_t>(seed)));
    const Box3D& truth = syn.truth[2][0];
    PipelineConfig full;
    full.window = 5;
    full.target_frame = 2;
    PipelineConfig single = full;
    single.window = 1;
    const FrameLabels a = run_pipeline(syn.bundle, full, PriorTable::defaults()).front();
    const FrameLabels b = run_pipeline(syn.bundle, single, PriorTable::defaults()).front();
    const Box3D* pa = label_for_object(a, syn, 0);
    const Box3D* pb = label_for_object(b, syn, 0);
    if (pa == nullptr || pb == nullptr) {
      ++missing;
      continue;
    }
    const LabelErrors ea = errors_against(*pa, truth), eb = errors_against(*pb, truth);
    full_sum.ate += ea.ate;
    full_sum.ase += ea.ase;
    full_sum.aoe += ea.aoe;
    single_sum.ate += eb.ate;
    single_sum.ase += eb.ase;
    single_sum.aoe += eb.aoe;
  }
  const double n = seeds - missing;
  auto mean = [&](double v) { return n > 0 ? v / n : 0.0; };
  const bool ok = missing == 0 && full_sum.ase < single_sum.ase &&
                  full_sum.ate < single_sum.ate && full_sum.aoe <= single_sum.aoe;
  return {ok, "mean full/single: ASE " + fmt("%.4f", mean(full_sum.ase)) + "/" +
                  fmt("%.4f", mean(single_sum.ase)) + " ATE " + fmt("%.4f", mean(full_sum.ate)) +
                  "/" + fmt("%.4f", mean(single_sum.ate)) + " AOE " +
                  fmt("%.4f", mean(full_sum.aoe)) + "/" + fmt("%.4f", mean(single_sum.aoe)) +
                  (missing ? " missing=" + std::to_string(missing) : "")};
}

// ---------------------------------------------------------------- 7

SyntheticScene crossing_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 104729 + 11);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5), speed(0.6, 0.9);
  SyntheticScene s;
  s.intrinsics = kitti_intrinsics();
  s.image_size = kitti_size();
  s.poses = forward_poses(7, 0.0);
  const double vp = speed(rng), vc = speed(rng);
  SyntheticObject ped = make_object("Pedestrian", -3.0 * vp + jitter(rng), 9.0 + jitter(rng),
                                    0.66, 1.76, 0.84, kPi / 2);
  ped.velocity = Vec3(vp, 0.0, 0.0);
  SyntheticObject car = make_object("Car", 3.0 * vc + jitter(rng), 16.0 + jitter(rng), 1.63,
                                    1.53, 3.88, 0.0);
  car.velocity = Vec3(-vc, 0.0, 0.0);
  s.objects = {ped, car};
  s.seed = seed;
  s.track_stride = 1;  // dense: subsampled tracks thin the tracked masks' IoU
  s.noise.drop_probability = 0.3;
  s.noise.min_mask_pixels = 1;
  return s;
}

Outcome dynamic_association() {
  int swaps = 0, wrong_supplements = 0, missed_supplements = 0, dropped_total = 0;
  for (int seed = 1; seed <= 50; ++seed) {
    const SyntheticOutput syn = synthesize(crossing_scene(static_cast<std::uint64_t>(seed)));
    const std::vector<int> window = syn.bundle.frame_indices();
    AssocConfig cfg;
    const std::vector<ObjectTracklet> tracklets =
        improve_labels(build_tracklets(syn.bundle, window, cfg), syn.bundle, window, cfg);
    std::set<std::pair<int, int>> supplemented;  // (frame, object)
    std::set<int> objects_seen;
    for (const ObjectTracklet& t : tracklets) {
      std::set<int> ids;
      for (const TrackletEntry& e : t.entries) {
        if (e.detected()) ids.insert(syn.mask_object.at({e.frame, e.mask_id}));
      }
      if (ids.size() != 1) {
        ++swaps;
        continue;
      }
      const int obj = *ids.begin();
      if (!objects_seen.insert(obj).second) ++swaps;  // one object split in two
      for (const TrackletEntry& e : t.entries) {
        if (!e.detected()) supplemented.insert({e.frame, obj});
      }
    }
    const std::set<std::pair<int, int>> dropped(syn.dropped.begin(), syn.dropped.end());
    dropped_total += static_cast<int>(dropped.size());
    for (const auto& s : supplemented) {
      if (!dropped.count(s)) ++wrong_supplements;
    }
    for (const auto& d : dropped) {
      if (!supplemented.count(d)) ++missed_supplements;
    }
  }
  const bool ok = swaps == 0 && wrong_supplements == 0 && missed_supplements == 0;
  return {ok, "50 seeds: identity swaps=" + std::to_string(swaps) + " dropped=" +
                  std::to_string(dropped_total) + " supplemented-not-dropped=" +
                  std::to_string(wrong_supplements) + " dropped-not-supplemented=" +
                  std::to_string(missed_supplements)};
}

// ---------------------------------------------------------------- 8

// Area of a yawed footprint inside the 1 mm cell rows: per row of cell
// centers, the covered x interval is exact, so cells are counted in closed
// form instead of one by one.
double raster_bev_iou(const Box3D& a, const Box3D& b, double cell) {
  auto corners = [](const Box3D& bx) {
    const double c = std::cos(bx.yaw), s = std::sin(bx.yaw);
    std::vector<Eigen::Vector2d> out;
    for (auto [l, w] : {std::pair{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}) {
      const double dl = 0.5 * l * bx.length, dw = 0.5 * w * bx.width;
      out.emplace_back(bx.center.x() + dl * c + dw * s, bx.center.z() - dl * s + dw * c);
    }
    return out;
  };
  auto row_interval = [](const std::vector<Eigen::Vector2d>& poly, double z, double* lo,
                         double* hi) {
    *lo = 1e300;
    *hi = -1e300;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const auto& p = poly[i];
      const auto& q = poly[(i + 1) % poly.size()];
      if ((p.y() <= z && q.y() > z) || (q.y() <= z && p.y() > z)) {
        const double x = p.x() + (z - p.y()) / (q.y() - p.y()) * (q.x() - p.x());
        *lo = std::min(*lo, x);
        *hi = std::max(*hi, x);
      }
    }
    return *lo <= *hi;
  };
  auto count = [&](double lo, double hi) {
    // cell centers (k + 0.5) * cell inside [lo, hi)
    const double first = std::ceil(lo / cell - 0.5);
    const double last = std::ceil(hi / cell - 0.5) - 1;
    return std::max(0.0, last - first + 1);
  };
  const auto pa = corners(a), pb = corners(b);
  double zmin = 1e300, zmax = -1e300;
  for (const auto& p : pa) zmin = std::min(zmin, p.y()), zmax = std::max(zmax, p.y());
  for (const auto& p : pb) zmin = std::min(zmin, p.y()), zmax = std::max(zmax, p.y());
  double na = 0, nb = 0, ni = 0;
  for (double k = std::floor(zmin / cell); (k + 0.5) * cell <= zmax; k += 1.0) {
    const double z = (k + 0.5) * cell;
    double al, ah, bl, bh;
    const bool ha = row_interval(pa, z, &al, &ah);
    const bool hb = row_interval(pb, z, &bl, &bh);
    if (ha) na += count(al, ah);
    if (hb) nb += count(bl, bh);
    if (ha && hb) ni += count(std::max(al, bl), std::min(ah, bh));
  }
  const double uni = na + nb - ni;
  return uni > 0 ? ni / uni : 0.0;
}

struct Toy {
  std::vector<Box3D> preds;
  std::vector<Box3D> gts;
};

Box3D toy_box(double u, double v, double w, double h, double score, double x, double z,
              double yaw) {
  Box3D b;
  b.class_label = "Car";
  b.center = Vec3(x, 1.0, z);
  b.width = 1.6;
  b.height = 1.5;
  b.length = 3.9;
  b.yaw = yaw;
  b.score = score;
  b.box2d = Box2D(u, v, w, h);
  return b;
}

// Precision/recall by recomputing the greedy matching for every score cut.
double brute_force_ap(const Toy& t, const std::vector<double>& thresholds,
                      const std::vector<double>& recall_points,
                      const std::function<double(const Box3D&, const Box3D&)>& iou) {
  std::vector<Box3D> ranked = t.preds;
  std::sort(ranked.begin(), ranked.end(),
            [](const Box3D& a, const Box3D& b) { return a.score > b.score; });
  double sum_thr = 0.0;
  for (double thr : thresholds) {
    std::vector<double> precision, recall;
    for (std::size_t k = 1; k <= ranked.size(); ++k) {
      std::vector<char> used(t.gts.size(), 0);
      int tp = 0;
      for (std::size_t p = 0; p < k; ++p) {
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < t.gts.size(); ++g) {
          if (used[g]) continue;
          const double v = iou(ranked[p], t.gts[g]);
          if (v >= thr && v > best_iou) {
            best = static_cast<int>(g);
            best_iou = v;
          }
        }
        if (best >= 0) {
          used[static_cast<std::size_t>(best)] = 1;
          ++tp;
        }
      }
      precision.push_back(static_cast<double>(tp) / static_cast<double>(k));
      recall.push_back(static_cast<double>(tp) / static_cast<double>(t.gts.size()));
    }
    double sum = 0.0;
    for (double r : recall_points) {
      double best = 0.0;
      for (std::size_t k = 0; k < recall.size(); ++k) {
        if (recall[k] >= r) best = std::max(best, precision[k]);
      }
      sum += best;
    }
    sum_thr += sum / static_cast<double>(recall_points.size());
  }
  return sum_thr / static_cast<double>(thresholds.size());
}

std::vector<Toy> toy_sets() {
  std::vector<Toy> sets;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(100, 1000), v(100, 300), sz(30, 120), jit(-25, 25),
      sc(0.05, 0.99), xz(-0.8, 0.8), yaw(-0.6, 0.6);
  for (int s = 0; s < 40; ++s) {
    Toy t;
    const int ngt = 6 + s % 5;
    for (int g = 0; g < ngt; ++g) {
      t.gts.push_back(toy_box(u(rng), v(rng), sz(rng), sz(rng), 1.0, 10.0 * g - 30.0,
                              15.0 + 3 * g, 0.0));
    }
    // 10 predictions: perturbed copies of ground truth plus strays.
    std::set<double> scores;
    for (int p = 0; p < 10; ++p) {
      double score;
      do score = std::round(sc(rng) * 1000) / 1000; while (!scores.insert(score).second);
      if (p < 8) {
        const Box3D& g = t.gts[static_cast<std::size_t>(p % ngt)];
        t.preds.push_back(toy_box(g.box2d->u_c() + jit(rng), g.box2d->v_c() + jit(rng),
                                  g.box2d->w() + jit(rng) * 0.5, g.box2d->h() + jit(rng) * 0.5,
                                  score, g.center.x() + xz(rng), g.center.z() + xz(rng),
                                  yaw(rng)));
      } else {
        t.preds.push_back(toy_box(u(rng), v(rng), sz(rng), sz(rng), score, 50.0, 60.0, 0.0));
      }
    }
    sets.push_back(std::move(t));
  }
  return sets;
}

Outcome metric_oracles() {
  // Rotated BEV IoU against the dense raster.
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> pos(-1.5, 1.5), dim(0.5, 4.0), ang(-kPi, kPi);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Box3D a, b;
    a.center = Vec3(pos(rng), 0, pos(rng));
    b.center = Vec3(pos(rng), 0, pos(rng));
    a.width = dim(rng), a.length = dim(rng), a.height = 1.0, a.yaw = ang(rng);
    b.width = dim(rng), b.length = dim(rng), b.height = 1.0, b.yaw = ang(rng);
    worst = std::max(worst, std::abs(bev_iou_rotated(a, b) - raster_bev_iou(a, b, 1e-3)));
  }

  // Hand-computed error metrics.
  int table_bad = 0;
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
  Box3D p, g;
  p.width = g.width = 1.0, p.height = g.height = 1.0, p.length = g.length = 1.0;
  p.center = Vec3(3.0, 0.0, 4.0);
  if (!near(ate(p, g), 5.0)) ++table_bad;
  p.center = Vec3(0.0, 5.0, 0.0);
  if (!near(ate(p, g), 0.0)) ++table_bad;
  if (!near(ase(p, g), 0.0)) ++table_bad;
  p.width = 2.0, p.height = 2.0, p.length = 2.0;
  if (!near(ase(p, g), 7.0 / 8.0)) ++table_bad;
  p.width = 1.0, p.height = 1.0, p.length = 2.0;
  if (!near(ase(p, g), 0.5)) ++table_bad;
  p.yaw = 0.0, g.yaw = normalize_angle(3 * kPi / 2);
  if (!near(aoe(p, g), kPi / 2)) ++table_bad;
  p.yaw = 0.1, g.yaw = -0.1;
  if (!near(aoe(p, g), 0.2)) ++table_bad;

  // AP against brute-force PR curves.
  std::vector<double> coco_thr, coco_r, r40;
  for (int k = 0; k < 10; ++k) coco_thr.push_back(0.5 + 0.05 * k);
  for (int i = 0; i <= 100; ++i) coco_r.push_back(i / 100.0);
  for (int i = 1; i <= 40; ++i) r40.push_back(i / 40.0);
  auto iou2d = [](const Box3D& a, const Box3D& b) { return box2d_iou(*a.box2d, *b.box2d); };
  int ap_bad = 0, ap_cases = 0;
  for (const Toy& t : toy_sets()) {
    ap_cases += 3;
    if (ap2d(t.preds, t.gts) != brute_force_ap(t, coco_thr, coco_r, iou2d)) ++ap_bad;
    if (ap_kitti(t.preds, t.gts, 0.5, ApMode::bev) !=
        brute_force_ap(t, {0.5}, r40, bev_iou_rotated)) {
      ++ap_bad;
    }
    if (ap_kitti(t.preds, t.gts, 0.5, ApMode::three_d) !=
        brute_force_ap(t, {0.5}, r40, iou_3d)) {
      ++ap_bad;
    }
  }
  const bool ok = worst < 1e-3 && table_bad == 0 && ap_bad == 0;
  return {ok, "BEV IoU max |diff| vs 1mm raster=" + fmt("%.2e", worst) +
                  " (1000 pairs), tabulated errors bad=" + std::to_string(table_bad) +
                  ", AP exact " + std::to_string(ap_cases - ap_bad) + "/" +
                  std::to_string(ap_cases)};
}

// ---------------------------------------------------------------- 9

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), dir).string()] =
        std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " 2>/dev/null").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome determinism() {
  const std::string bin = PLOT_BIN;
  const std::string spec = std::string(PLOT_SOURCE_DIR) + "/data/scenes/static_car.json";
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  const fs::path la = scratch("label_a"), lb = scratch("label_b");
  int rc = 0;
  rc |= run(bin + " synth " + spec + " " + a.string());
  rc |= run(bin + " synth " + spec + " " + b.string());
  rc |= run(bin + " label " + a.string() + " " + la.string());
  rc |= run(bin + " label " + a.string() + " " + lb.string());
  if (rc != 0) return {false, "a command failed"};
  const auto sa = snapshot(a), sb = snapshot(b), ta = snapshot(la), tb = snapshot(lb);
  const bool ok = sa == sb && ta == tb && !ta.empty();
  return {ok, "synth bundles identical=" + std::string(sa == sb ? "yes" : "no") + " (" +
                  std::to_string(sa.size()) + " files), label files identical=" +
                  std::string(ta == tb ? "yes" : "no") + " (" + std::to_string(ta.size()) +
                  " files)"};
}

// ---------------------------------------------------------------- 10

Outcome round_trips() {
  SyntheticScene s = static_car_scene(3);
  s.noise.depth_sigma = 0.05;
  s.noise.track_jitter_px = 0.3;
  s.objects.push_back(make_object("Pedestrian", -2.0, 8.0, 0.66, 1.76, 0.84, 0.4, 0.7));
  const SyntheticOutput syn = synthesize(s);
  const fs::path dir = scratch("roundtrip");
  emit_scene(syn, dir);
  const SceneBundle loaded = load_scene(dir);
  const bool scene_ok = loaded == syn.bundle;

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(-20, 20), dim(0.3, 5), ang(-kPi, kPi),
      sc(0, 1), px(0, 1000);
  std::vector<Box3D> boxes;
  for (int i = 0; i < 200; ++i) {
    Box3D b;
    b.class_label = i % 2 ? "Car" : "Pedestrian";
    b.center = Vec3(pos(rng), pos(rng), std::abs(pos(rng)) + 1.0);
    b.width = dim(rng), b.height = dim(rng), b.length = dim(rng);
    b.yaw = ang(rng);
    b.score = sc(rng);
    const double u0 = px(rng), v0 = px(rng);
    b.box2d = Box2D::from_corners(u0, v0, u0 + 1 + px(rng), v0 + 1 + px(rng));
    boxes.push_back(b);
  }
  const fs::path labels = dir / "labels.txt";
  write_kitti_labels(boxes, labels);
  const std::vector<Box3D> back = read_kitti_labels(labels);
  double worst = 0.0;
  bool same_count = back.size() == boxes.size();
  for (std::size_t i = 0; same_count && i < boxes.size(); ++i) {
    const Box3D& a = boxes[i];
    const Box3D& b = back[i];
    if (a.class_label != b.class_label || !b.box2d) same_count = false;
    for (double d : {a.center.x() - b.center.x(), a.center.z() - b.center.z(),
                     a.width - b.width, a.height - b.height, a.length - b.length,
                     a.score - b.score, normalize_angle(a.yaw - b.yaw),
                     a.box2d->u_min() - b.box2d->u_min(), a.box2d->v_max() - b.box2d->v_max()}) {
      worst = std::max(worst, std::abs(d));
    }
    // y is written as y + H/2 and both are quantized
    worst = std::max(worst, std::abs(a.center.y() - b.center.y()) - 0.005);
  }
  const bool ok = scene_ok && same_count && worst <= 0.005 + 1e-9;
  return {ok, "scene bundle equal=" + std::string(scene_ok ? "yes" : "no") +
                  ", 200 labels max |diff|=" + fmt("%.4f", worst) + " (quantum 0.005)"};
}

}  // namespace

int main() {
  report(2, "procrustes-exactness", procrustes_exactness);
  report(3, "hungarian-correctness", hungarian_correctness);
  report(4, "clipping-formula", clipping_formula);
  report(5, "end-to-end-noiseless", end_to_end_noiseless);
  report(6, "multi-frame-benefit", multi_frame_benefit);
  report(7, "dynamic-association", dynamic_association);
  report(8, "metric-oracles", metric_oracles);
  report(9, "determinism", determinism);
  report(10, "format-round-trips", round_trips);
  // Benchmark numbers need KITTI and the neural front-ends; the oracle
  // criteria above stand in, so this holds only when all of them do.
  const int substitute_failures = g_failures;
  report(1, "benchmark-substitution", [&] {
    return Outcome{substitute_failures == 0,
                   "KITTI tables not reproduced here; criteria 2-10 " +
                       std::string(substitute_failures ? "failing" : "all pass")};
  });
  fs::remove_all(fs::temp_directory_path() / ("plot_acceptance_" + std::to_string(::getpid())));
  std::printf("%s: %d criteria failed\n", g_failures ? "FAILED" : "OK", g_failures);
  return g_failures ? 1 : 0;
}
