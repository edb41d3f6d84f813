#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ossvm/sample.hpp"

namespace ossvm {

// "label idx:val idx:val ..." per line; blank lines skipped.
Dataset read_sparse(std::istream& is);
Dataset read_sparse(const std::string& path);
void write_sparse(std::ostream& os, std::span<const SparseSample> samples);
void write_sparse(const std::string& path, std::span<const SparseSample> samples);

// "label,count" rows, sorted by label.
void write_manifest_csv(std::ostream& os, std::span<const SparseSample> samples);

// 2D toy datasets in [0,1]^2. Every generator builds its points inside the
// box [-1,1]^2 and maps it affinely onto the unit square, so geometry (and
// radial ordering around the box center (0.5, 0.5)) is preserved.
//
//   four_gauss    4 isotropic Gaussians at (+-0.5, +-0.5), sigma 0.15; labels
//                 1..4 in order (-,-), (+,-), (-,+), (+,+).
//   nested_rings  classes 1 and 2: truncated Gaussians at (-0.3, 0) and
//                 (0.3, 0); class 3: annulus of radius [0.7, 0.9] around them.
//   cone_torus    1: torus (annulus), 2: Gaussian inside it, 3: cone-shaped
//                 radial density to the lower right.
//   boat          three elongated, partially overlapping Gaussian clusters.
//   regular       4x4 grid of small Gaussian blobs, labels 1..16.
//   blobs         `blob_classes` separated Gaussian blobs at seeded centers.
enum class SyntheticKind { ConeTorus, Boat, FourGauss, Regular, NestedRings, Blobs };

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string_view to_string(SyntheticKind kind) noexcept;

Dataset gen_synthetic(SyntheticKind kind, std::size_t n_per_class, std::uint64_t seed,
                      int blob_classes = 15);

// Maps a point of the construction box [-1,1]^2 to the unit square.
inline constexpr double to_unit(double box_coord) noexcept { return 0.5 * (box_coord + 1.0); }

struct OpenSetSplit {
  std::vector<int> known_labels;        // sorted
  std::vector<std::size_t> train_indices;  // into the source dataset, ascending
  std::vector<std::size_t> test_indices;
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

inline constexpr double kDefaultTrainFraction = 0.6;

// n_acs classes are drawn uniformly as known. Each class's samples are split
// train/test by a per-(seed, label) shuffle independent of which classes end
// up known; unknown classes go wholly to test. Throws NotEnoughClasses unless
// the dataset has more than n_acs classes.
OpenSetSplit make_open_split(std::span<const SparseSample> dataset, std::size_t n_acs,
                             std::uint64_t trial_seed,
                             double train_fraction = kDefaultTrainFraction);

}  // namespace ossvm
