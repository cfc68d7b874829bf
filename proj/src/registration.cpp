#include "kfpso/registration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kfpso/simd/kernels.hpp"

namespace kfpso {

Eigen::Vector2d RigidTransform2D::apply(const Eigen::Vector2d& p) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x() - s * p.y() + tx, s * p.x() + c * p.y() + ty};
}

RigidTransform2D RigidTransform2D::inverse() const {
  // p = R^T (q - t)
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {-(c * tx + s * ty), -(-s * tx + c * ty), -angle};
}

RigidTransform2D RigidTransform2D::compose(const RigidTransform2D& inner) const {
  const Eigen::Vector2d t = apply({inner.tx, inner.ty});
  return {t.x(), t.y(), angle + inner.angle};
}

Vector RigidTransform2D::to_vector() const {
  Vector v(3);
  v << tx, ty, angle;
  return v;
}

RigidTransform2D RigidTransform2D::from_vector(const Vector& x) {
  if (x.size() != 3) throw Error("rigid transform needs 3 parameters (tx, ty, angle)");
  return {x[0], x[1], x[2]};
}

void LandmarkSet::validate() const {
  if (reference.size() != floating.size()) throw Error("landmark lists differ in length");
  if (reference.size() < 4) throw Error("at least 4 landmark pairs are required");
}

LandmarkSet read_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  LandmarkSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double xr, yr, xf, yf;
    std::string extra;
    if (!(ls >> xr >> yr >> xf >> yf) || (ls >> extra)) {
      throw Error("landmarks line " + std::to_string(lineno) + ": expected 4 numbers");
    }
    set.reference.emplace_back(xr, yr);
    set.floating.emplace_back(xf, yf);
  }
  set.validate();
  return set;
}

void write_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path) {
  landmarks.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  char buf[160];
  for (std::size_t k = 0; k < landmarks.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g\n", landmarks.reference[k].x(), landmarks.reference[k].y(),
                  landmarks.floating[k].x(), landmarks.floating[k].y());
    out << buf;
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Roi Roi::whole(const Image2D& image) { return Roi{0, 0, image.height, image.width, false}; }

namespace {

Roi checked_roi(const Image2D& ref, const std::optional<Roi>& roi) {
  const Roi r = roi ? *roi : Roi::whole(ref);
  if (r.rows <= 0 || r.cols <= 0 || r.row0 < 0 || r.col0 < 0 || r.row0 + r.rows > ref.height ||
      r.col0 + r.cols > ref.width) {
    throw Error("region of interest outside the reference image");
  }
  return r;
}

// Samples `flo_values` (an image on flo's grid) at T p for every p in one
// ROI row of the reference grid.
void warp_row(const Image2D& ref, const Image2D& flo, const std::vector<double>& flo_values,
              const RigidTransform2D& t, Index row, Index col0, std::span<double> out, std::span<std::uint8_t> valid) {
  const double c = std::cos(t.angle);
  const double s = std::sin(t.angle);
  const double x0 = ref.x_of(col0);
  const double y = ref.y_of(row);
  simd::WarpRowArgs args;
  args.image = flo_values;
  args.width = static_cast<std::size_t>(flo.width);
  args.height = static_cast<std::size_t>(flo.height);
  args.u0 = (c * x0 - s * y + t.tx) / flo.spacing + flo.center_x();
  args.v0 = (s * x0 + c * y + t.ty) / flo.spacing + flo.center_y();
  args.du = c * ref.spacing / flo.spacing;
  args.dv = s * ref.spacing / flo.spacing;
  args.out = out;
  args.valid = valid;
  simd::warp_bilinear_row(args);
}

int bin_of(double v, int bins) {
  const int b = static_cast<int>(v * bins);
  return std::clamp(b, 0, bins - 1);
}

double entropy_term(double count, double total) {
  if (count <= 0.0) return 0.0;
  const double p = count / total;
  return -p * std::log(p);
}

// Central differences (one-sided at the border), intensity per mm.
void gradients(const Image2D& img, std::vector<double>& gx, std::vector<double>& gy) {
  const Index w = img.width;
  const Index h = img.height;
  gx.assign(img.pixels.size(), 0.0);
  gy.assign(img.pixels.size(), 0.0);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const Index cl = std::max<Index>(c - 1, 0), cr = std::min<Index>(c + 1, w - 1);
      const Index ru = std::max<Index>(r - 1, 0), rd = std::min<Index>(r + 1, h - 1);
      const auto i = static_cast<std::size_t>(r * w + c);
      gx[i] = (img.at(r, cr) - img.at(r, cl)) / (static_cast<double>(cr - cl) * img.spacing);
      gy[i] = (img.at(rd, c) - img.at(ru, c)) / (static_cast<double>(rd - ru) * img.spacing);
    }
  }
}

}  // namespace

double mutual_information(const Image2D& ref, const Image2D& flo, const RigidTransform2D& transform, int bins,
                          const std::optional<Roi>& roi) {
  if (bins < 2) throw Error("mutual information needs at least 2 bins");
  const Roi r = checked_roi(ref, roi);
  const auto nb = static_cast<std::size_t>(bins);
  std::vector<double> joint(nb * nb, 0.0);
  std::vector<double> sample(static_cast<std::size_t>(r.cols));
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(r.cols));
  double total = 0.0;
  for (Index row = r.row0; row < r.row0 + r.rows; ++row) {
    warp_row(ref, flo, flo.pixels, transform, row, r.col0, sample, valid);
    for (Index j = 0; j < r.cols; ++j) {
      if (!valid[static_cast<std::size_t>(j)]) continue;
      const int a = bin_of(ref.at(row, r.col0 + j), bins);
      const int b = bin_of(sample[static_cast<std::size_t>(j)], bins);
      joint[static_cast<std::size_t>(a) * nb + static_cast<std::size_t>(b)] += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) throw Error("no overlap");

  std::vector<double> row_sum(nb, 0.0), col_sum(nb, 0.0);
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      row_sum[a] += joint[a * nb + b];
      col_sum[b] += joint[a * nb + b];
    }
  }
  double h_ref = 0.0, h_flo = 0.0, h_joint = 0.0;
  for (std::size_t a = 0; a < nb; ++a) h_ref += entropy_term(row_sum[a], total);
  for (std::size_t b = 0; b < nb; ++b) h_flo += entropy_term(col_sum[b], total);
  for (double cnt : joint) h_joint += entropy_term(cnt, total);
  return std::max(0.0, h_ref + h_flo - h_joint);
}

double gradient_similarity(const Image2D& ref, const Image2D& flo, const RigidTransform2D& transform,
                           const std::optional<Roi>& roi) {
  const Roi r = checked_roi(ref, roi);
  std::vector<double> rgx, rgy, fgx, fgy;
  gradients(ref, rgx, rgy);
  gradients(flo, fgx, fgy);
  const double c = std::cos(transform.angle);
  const double s = std::sin(transform.angle);
  const auto n = static_cast<std::size_t>(r.cols);
  std::vector<double> sx(n), sy(n);
  std::vector<std::uint8_t> valid(n), valid_y(n);
  double sum = 0.0;
  std::size_t count = 0;
  for (Index row = r.row0; row < r.row0 + r.rows; ++row) {
    warp_row(ref, flo, fgx, transform, row, r.col0, sx, valid);
    warp_row(ref, flo, fgy, transform, row, r.col0, sy, valid_y);
    for (std::size_t j = 0; j < n; ++j) {
      if (!valid[j]) continue;
      const auto i = static_cast<std::size_t>(row * ref.width + r.col0) + j;
      // R^T applied to the floating gradient.
      const double bx = c * sx[j] + s * sy[j];
      const double by = -s * sx[j] + c * sy[j];
      sum += std::max(0.0, rgx[i] * bx + rgy[i] * by);
      ++count;
    }
  }
  if (count == 0) throw Error("no overlap");
  return sum / static_cast<double>(count);
}

std::array<double, kOtsuBins> intensity_histogram(const Image2D& image) {
  std::array<double, kOtsuBins> hist{};
  for (double v : image.pixels) hist[static_cast<std::size_t>(bin_of(v, kOtsuBins))] += 1.0;
  return hist;
}

double between_class_variance(const std::array<double, kOtsuBins>& histogram, int cut) {
  if (cut < 0 || cut >= kOtsuBins - 1) throw Error("otsu cut out of range");
  double n0 = 0.0, n1 = 0.0, s0 = 0.0, s1 = 0.0;
  for (int b = 0; b < kOtsuBins; ++b) {
    const double h = histogram[static_cast<std::size_t>(b)];
    const double centre = (b + 0.5) / kOtsuBins;
    if (b <= cut) {
      n0 += h;
      s0 += h * centre;
    } else {
      n1 += h;
      s1 += h * centre;
    }
  }
  if (n0 <= 0.0 || n1 <= 0.0) return 0.0;
  const double total = n0 + n1;
  const double d = s0 / n0 - s1 / n1;
  return (n0 / total) * (n1 / total) * d * d;
}

double otsu_threshold(const Image2D& image) {
  const auto [lo, hi] = std::minmax_element(image.pixels.begin(), image.pixels.end());
  if (image.pixels.empty() || *lo == *hi) throw Error("constant image");
  const auto hist = intensity_histogram(image);
  int best = 0;
  double best_var = -1.0;
  for (int cut = 0; cut < kOtsuBins - 1; ++cut) {
    const double v = between_class_variance(hist, cut);
    if (v > best_var) {
      best_var = v;
      best = cut;
    }
  }
  return static_cast<double>(best + 1) / kOtsuBins;
}

Roi select_roi(const Image2D& image) {
  constexpr Index kPad = 2;
  double threshold;
  try {
    threshold = otsu_threshold(image);
  } catch (const Error&) {
    Roi r = Roi::whole(image);
    r.whole_image_fallback = true;
    return r;
  }
  Index r0 = image.height, r1 = -1, c0 = image.width, c1 = -1;
  for (Index r = 0; r < image.height; ++r) {
    for (Index c = 0; c < image.width; ++c) {
      if (image.at(r, c) >= threshold) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
    }
  }
  if (r1 < 0) {
    Roi r = Roi::whole(image);
    r.whole_image_fallback = true;
    return r;
  }
  r0 = std::max<Index>(r0 - kPad, 0);
  c0 = std::max<Index>(c0 - kPad, 0);
  r1 = std::min<Index>(r1 + kPad, image.height - 1);
  c1 = std::min<Index>(c1 + kPad, image.width - 1);
  return Roi{r0, c0, r1 - r0 + 1, c1 - c0 + 1, false};
}

Image2D resample(const Image2D& flo, const RigidTransform2D& transform, const Image2D& reference_grid) {
  Image2D out(reference_grid.width, reference_grid.height, reference_grid.spacing);
  const auto n = static_cast<std::size_t>(out.width);
  std::vector<std::uint8_t> valid(n);
  for (Index row = 0; row < out.height; ++row) {
    std::span<double> dst(out.pixels.data() + row * out.width, n);
    warp_row(reference_grid, flo, flo.pixels, transform, row, 0, dst, valid);
    for (double& v : dst) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

TreStatistics target_registration_error(const LandmarkSet& landmarks, const RigidTransform2D& recovered,
                                        const RigidTransform2D& truth) {
  landmarks.validate();
  TreStatistics st;
  for (const auto& p : landmarks.reference) st.per_landmark.push_back((truth.apply(p) - recovered.apply(p)).norm());
  const double n = static_cast<double>(st.per_landmark.size());
  for (double e : st.per_landmark) st.mean += e;
  st.mean /= n;
  double ss = 0.0;
  for (double e : st.per_landmark) ss += (e - st.mean) * (e - st.mean);
  st.std = std::sqrt(ss / n);
  std::vector<double> sorted = st.per_landmark;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  st.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  return st;
}

double intensity_remap(double v) { return std::sqrt(std::clamp(v, 0.0, 1.0)); }

namespace {

struct Blob {
  Eigen::Vector2d center;
  double sigma;
  double amplitude;
};

constexpr double kBackground = 0.08;

double phantom(const std::vector<Blob>& blobs, const Eigen::Vector2d& p) {
  double v = kBackground;
  for (const auto& b : blobs) v += b.amplitude * std::exp(-(p - b.center).squaredNorm() / (2.0 * b.sigma * b.sigma));
  return std::min(v, 1.0);
}

double gaussian(RngStream& rng) {
  // Box-Muller on the stream's own uniforms keeps the draw platform-independent.
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

SyntheticPair make_synthetic_pair(RngStream& rng, const RigidTransform2D& truth, const SyntheticOptions& options) {
  if (std::abs(truth.tx) > kMaxDemoTranslation || std::abs(truth.ty) > kMaxDemoTranslation ||
      std::abs(truth.angle) > kMaxDemoAngle) {
    throw Error("synthetic truth outside |t| <= 20 mm, |angle| <= 0.35 rad");
  }
  if (options.blobs < 4) throw Error("synthetic phantom needs at least 4 blobs");

  const double half = 0.5 * static_cast<double>(options.size - 1) * options.spacing;
  const double radius = 0.55 * half;
  const double min_separation = 0.3 * half;
  std::vector<Blob> blobs;
  while (static_cast<int>(blobs.size()) < options.blobs) {
    const Eigen::Vector2d c(rng.uniform(-radius, radius), rng.uniform(-radius, radius));
    const double sigma = rng.uniform(0.1, 0.2) * half;
    const double amplitude = rng.uniform(0.35, 0.8);
    bool far = true;
    for (const auto& b : blobs) far = far && (b.center - c).norm() >= min_separation;
    if (far) blobs.push_back({c, sigma, amplitude});
  }

  SyntheticPair pair;
  pair.truth = truth;
  pair.reference = Image2D(options.size, options.size, options.spacing);
  pair.floating = Image2D(options.size, options.size, options.spacing);
  const RigidTransform2D back = truth.inverse();
  for (Index r = 0; r < options.size; ++r) {
    for (Index c = 0; c < options.size; ++c) {
      const Eigen::Vector2d p(pair.reference.x_of(c), pair.reference.y_of(r));
      double v = phantom(blobs, p);
      if (options.noise_std > 0.0) v += options.noise_std * gaussian(rng);
      pair.reference.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  for (Index r = 0; r < options.size; ++r) {
    for (Index c = 0; c < options.size; ++c) {
      const Eigen::Vector2d q(pair.floating.x_of(c), pair.floating.y_of(r));
      double v = intensity_remap(phantom(blobs, back.apply(q)));
      if (options.noise_std > 0.0) v += options.noise_std * gaussian(rng);
      pair.floating.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  for (const auto& b : blobs) {
    pair.landmarks.reference.push_back(b.center);
    pair.landmarks.floating.push_back(truth.apply(b.center));
  }
  return pair;
}

}  // namespace kfpso
