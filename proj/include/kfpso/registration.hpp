#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "kfpso/image.hpp"

namespace kfpso {

/// Rigid motion of the plane, q = R(angle) p + (tx, ty). Units: mm, radians.
struct RigidTransform2D {
  double tx = 0.0;
  double ty = 0.0;
  double angle = 0.0;

  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
  RigidTransform2D inverse() const;
  /// (a.compose(b)).apply(p) == a.apply(b.apply(p)).
  RigidTransform2D compose(const RigidTransform2D& inner) const;

  /// Optimizer parameter order: (tx, ty, angle).
  Vector to_vector() const;
  static RigidTransform2D from_vector(const Vector& x);
};

/// Corresponding points in the reference and floating images, mm.
struct LandmarkSet {
  std::vector<Eigen::Vector2d> reference;
  std::vector<Eigen::Vector2d> floating;

  std::size_t size() const { return reference.size(); }
  /// Throws Error unless both lists have the same length and at least 4 pairs.
  void validate() const;
};

/// One "x_ref y_ref x_flo y_flo" line per pair.
LandmarkSet read_landmarks(const std::filesystem::path& path);
void write_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path);

/// Rectangle of pixels [row0, row0+rows) x [col0, col0+cols).
struct Roi {
  Index row0 = 0;
  Index col0 = 0;
  Index rows = 0;
  Index cols = 0;
  /// Set when no foreground was found and the whole image was returned.
  bool whole_image_fallback = false;

  static Roi whole(const Image2D& image);
};

inline constexpr int kDefaultMiBins = 32;
inline constexpr int kOtsuBins = 256;

/// Mutual information H(ref) + H(flo) - H(ref, flo) between the reference
/// pixels in `roi` (default: all) and the floating image sampled bilinearly
/// at transform(p). The transform maps reference mm coordinates to floating
/// mm coordinates. Only samples inside the floating image count. Throws
/// Error("no overlap") when none do.
double mutual_information(const Image2D& ref, const Image2D& flo, const RigidTransform2D& transform,
                          int bins = kDefaultMiBins, const std::optional<Roi>& roi = std::nullopt);

/// Mean over overlapping pixels of max(0, grad ref(p) . R^T grad flo(T p)),
/// i.e. |grad ref| |grad flo| max(0, cos of the direction difference) with
/// the floating gradient rotated back into the reference frame. Gradients
/// are central differences in intensity per mm. Throws Error("no overlap").
double gradient_similarity(const Image2D& ref, const Image2D& flo, const RigidTransform2D& transform,
                           const std::optional<Roi>& roi = std::nullopt);

/// 256-bin intensity histogram (bin = floor(256 v), clamped).
std::array<double, kOtsuBins> intensity_histogram(const Image2D& image);

/// w0 w1 (mu0 - mu1)^2 for the split {bins <= cut} | {bins > cut}, using bin
/// centres as intensities. Zero when either class is empty.
double between_class_variance(const std::array<double, kOtsuBins>& histogram, int cut);

/// Threshold (cut + 1) / 256 of the first cut maximizing between-class
/// variance; pixels >= threshold are foreground. Throws Error for a constant image.
double otsu_threshold(const Image2D& image);

/// Bounding box of the Otsu foreground padded by 2 pixels and clipped to the
/// image. Constant images yield the whole image with the fallback flag set.
Roi select_roi(const Image2D& image);

/// Floating image resampled onto the reference grid: out(p) = flo(T p),
/// zero outside the floating image.
Image2D resample(const Image2D& flo, const RigidTransform2D& transform, const Image2D& reference_grid);

struct TreStatistics {
  std::vector<double> per_landmark;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // population
};

/// Distance between truth(p) and recovered(p) for every reference landmark p.
TreStatistics target_registration_error(const LandmarkSet& landmarks, const RigidTransform2D& recovered,
                                        const RigidTransform2D& truth);

struct SyntheticOptions {
  Index size = 80;
  double spacing = 1.0;
  int blobs = 6;
  double noise_std = 0.01;
};

struct SyntheticPair {
  Image2D reference;
  Image2D floating;
  LandmarkSet landmarks;
  RigidTransform2D truth;
};

/// Monotone nonlinear intensity remap applied to the floating image.
double intensity_remap(double v);

/// Smooth Gaussian-blob phantom plus mild noise as the reference; the
/// floating image is the phantom seen through `truth` (flo(T p) = phantom(p)),
/// passed through intensity_remap, plus independent noise. Landmarks are the
/// blob centres and their images under `truth`. Throws Error when |tx|,
/// |ty| > 20 mm or |angle| > 0.35 rad.
SyntheticPair make_synthetic_pair(RngStream& rng, const RigidTransform2D& truth,
                                  const SyntheticOptions& options = {});

inline constexpr double kMaxDemoTranslation = 20.0;
inline constexpr double kMaxDemoAngle = 0.35;

}  // namespace kfpso
