#include "ossvm/data_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

#include "ossvm/error.hpp"
#include "ossvm/rng.hpp"
#include "ossvm/text.hpp"

namespace ossvm {
namespace {

struct Point {
  double x, y;
};

bool in_box(Point p) { return std::abs(p.x) <= 1.0 && std::abs(p.y) <= 1.0; }

SparseSample to_sample(int label, Point p) {
  const std::array<double, 2> coords{to_unit(p.x), to_unit(p.y)};
  return make_dense_sample(label, coords);
}

// Gaussian with covariance R diag(sx^2, sy^2) R^T (R = rotation by angle),
// truncated to `max_radius` (Mahalanobis-free, Euclidean) and to the box.
Point gaussian(Rng& rng, Point c, double sx, double sy, double angle, double max_radius) {
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  while (true) {
    const double u = rng.normal() * sx;
    const double v = rng.normal() * sy;
    const Point p{c.x + ca * u - sa * v, c.y + sa * u + ca * v};
    if (std::hypot(p.x - c.x, p.y - c.y) <= max_radius && in_box(p)) return p;
  }
}

Point annulus(Rng& rng, Point c, double r_min, double r_max) {
  while (true) {
    // Uniform over the annulus area.
    const double r = std::sqrt(rng.uniform(r_min * r_min, r_max * r_max));
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point p{c.x + r * std::cos(t), c.y + r * std::sin(t)};
    if (in_box(p)) return p;
  }
}

// Radial density proportional to (R - r): a cone of height at the center.
Point cone(Rng& rng, Point c, double radius) {
  while (true) {
    const Point p{rng.uniform(-radius, radius), rng.uniform(-radius, radius)};
    const double r = std::hypot(p.x, p.y);
    if (r > radius) continue;
    if (rng.uniform() * radius > radius - r) continue;
    const Point q{c.x + p.x, c.y + p.y};
    if (in_box(q)) return q;
  }
}

constexpr double kInf = 1e300;

void emit(Dataset& out, int label, std::size_t n, auto&& draw) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(to_sample(label, draw()));
}

std::vector<Point> blob_centers(Rng& rng, int k) {
  std::vector<Point> centers;
  double min_sep = 0.3;
  int attempts = 0;
  while (static_cast<int>(centers.size()) < k) {
    const Point p{rng.uniform(-0.85, 0.85), rng.uniform(-0.85, 0.85)};
    const bool ok = std::all_of(centers.begin(), centers.end(), [&](Point q) {
      return std::hypot(p.x - q.x, p.y - q.y) >= min_sep;
    });
    if (ok) {
      centers.push_back(p);
      attempts = 0;
    } else if (++attempts > 2000) {
      min_sep *= 0.9;
      attempts = 0;
    }
  }
  return centers;
}

}  // namespace

Dataset read_sparse(std::istream& is) {
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto toks = split_whitespace(line);
    if (toks.empty()) continue;
    const std::string ctx = "line " + std::to_string(line_no);
    SparseSample s;
    s.label = static_cast<int>(parse_int(toks[0], ctx));
    s.features = parse_features(toks, 1, ctx);
    out.push_back(std::move(s));
  }
  return out;
}

Dataset read_sparse(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return read_sparse(is);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void write_sparse(std::ostream& os, std::span<const SparseSample> samples) {
  for (const auto& s : samples) {
    os << s.label;
    write_features(os, s);
    os << '\n';
  }
}

void write_sparse(const std::string& path, std::span<const SparseSample> samples) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  write_sparse(os, samples);
  if (!os) throw Error(ErrorKind::Io, "failed writing " + path);
}

void write_manifest_csv(std::ostream& os, std::span<const SparseSample> samples) {
  std::map<int, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.label];
  os << "label,count\n";
  for (const auto& [label, n] : counts) os << label << ',' << n << '\n';
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "cone_torus") return SyntheticKind::ConeTorus;
  if (name == "boat") return SyntheticKind::Boat;
  if (name == "four_gauss") return SyntheticKind::FourGauss;
  if (name == "regular") return SyntheticKind::Regular;
  if (name == "nested_rings") return SyntheticKind::NestedRings;
  if (name == "blobs") return SyntheticKind::Blobs;
  throw Error(ErrorKind::InvalidArgument, "unknown synthetic dataset '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticKind kind) noexcept {
  switch (kind) {
    case SyntheticKind::ConeTorus: return "cone_torus";
    case SyntheticKind::Boat: return "boat";
    case SyntheticKind::FourGauss: return "four_gauss";
    case SyntheticKind::Regular: return "regular";
    case SyntheticKind::NestedRings: return "nested_rings";
    case SyntheticKind::Blobs: return "blobs";
  }
  return "?";
}

Dataset gen_synthetic(SyntheticKind kind, std::size_t n_per_class, std::uint64_t seed,
                      int blob_classes) {
  if (n_per_class == 0) throw Error(ErrorKind::InvalidArgument, "n_per_class must be >= 1");
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(kind)}));
  Dataset out;
  const double pi = std::numbers::pi;
  switch (kind) {
    case SyntheticKind::FourGauss: {
      const std::array<Point, 4> centers{{{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}}};
      for (int k = 0; k < 4; ++k) {
        emit(out, k + 1, n_per_class, [&] { return gaussian(rng, centers[k], 0.15, 0.15, 0, kInf); });
      }
      break;
    }
    case SyntheticKind::NestedRings: {
      emit(out, 1, n_per_class, [&] { return gaussian(rng, {-0.3, 0.0}, 0.08, 0.08, 0, 0.15); });
      emit(out, 2, n_per_class, [&] { return gaussian(rng, {0.3, 0.0}, 0.08, 0.08, 0, 0.15); });
      emit(out, 3, n_per_class, [&] { return annulus(rng, {0.0, 0.0}, 0.7, 0.9); });
      break;
    }
    case SyntheticKind::ConeTorus: {
      const Point torus_center{-0.3, 0.15};
      emit(out, 1, n_per_class, [&] { return annulus(rng, torus_center, 0.35, 0.55); });
      emit(out, 2, n_per_class, [&] { return gaussian(rng, torus_center, 0.08, 0.08, 0, 0.2); });
      emit(out, 3, n_per_class, [&] { return cone(rng, {0.5, -0.4}, 0.4); });
      break;
    }
    case SyntheticKind::Boat: {
      emit(out, 1, n_per_class, [&] { return gaussian(rng, {-0.25, -0.05}, 0.35, 0.07, 0, kInf); });
      emit(out, 2, n_per_class,
           [&] { return gaussian(rng, {0.25, 0.25}, 0.3, 0.07, pi / 6, kInf); });
      emit(out, 3, n_per_class,
           [&] { return gaussian(rng, {0.25, -0.35}, 0.3, 0.07, -pi / 6, kInf); });
      break;
    }
    case SyntheticKind::Regular: {
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          const Point center{-0.75 + 0.5 * c, -0.75 + 0.5 * r};
          emit(out, 4 * r + c + 1, n_per_class,
               [&] { return gaussian(rng, center, 0.07, 0.07, 0, kInf); });
        }
      }
      break;
    }
    case SyntheticKind::Blobs: {
      if (blob_classes < 1) throw Error(ErrorKind::InvalidArgument, "blob_classes must be >= 1");
      const auto centers = blob_centers(rng, blob_classes);
      for (int k = 0; k < blob_classes; ++k) {
        emit(out, k + 1, n_per_class, [&] { return gaussian(rng, centers[k], 0.06, 0.06, 0, kInf); });
      }
      break;
    }
  }
  return out;
}

OpenSetSplit make_open_split(std::span<const SparseSample> dataset, std::size_t n_acs,
                             std::uint64_t trial_seed, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train_fraction must lie in (0, 1)");
  }
  const auto labels = class_labels(dataset);
  if (n_acs == 0 || labels.size() <= n_acs) {
    throw Error(ErrorKind::NotEnoughClasses,
                std::to_string(labels.size()) + " classes cannot provide " +
                    std::to_string(n_acs) + " known classes plus unknowns");
  }

  Rng rng(derive_seed(trial_seed, {0x4B4E4F57ull /* "KNOW" */}));
  std::vector<int> shuffled = labels;
  rng.shuffle(std::span<int>(shuffled));
  std::vector<int> known(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_acs));
  std::sort(known.begin(), known.end());

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].label].push_back(i);

  OpenSetSplit split;
  split.known_labels = known;
  split.seed = trial_seed;
  for (auto& [label, idx] : by_class) {
    if (!std::binary_search(known.begin(), known.end(), label)) {
      split.test_indices.insert(split.test_indices.end(), idx.begin(), idx.end());
      continue;
    }
    Rng class_rng(derive_seed(trial_seed, {static_cast<std::uint64_t>(static_cast<std::int64_t>(label))}));
    class_rng.shuffle(std::span<std::size_t>(idx));
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() > 1 ? idx.size() - 1 : 1);
    split.train_indices.insert(split.train_indices.end(), idx.begin(),
                               idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_indices.insert(split.test_indices.end(),
                              idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  for (auto i : split.train_indices) split.train.push_back(dataset[i]);
  for (auto i : split.test_indices) split.test.push_back(dataset[i]);
  return split;
}

}  // namespace ossvm
