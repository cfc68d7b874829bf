#include "kfpso/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace kfpso {

Image2D::Image2D(Index w, Index h, double s, double fill) : width(w), height(h), spacing(s) {
  if (w < 2 || h < 2) throw Error("image must be at least 2x2");
  if (!(s > 0.0) || !std::isfinite(s)) throw Error("pixel spacing must be positive");
  pixels.assign(static_cast<std::size_t>(w * h), fill);
}

void Image2D::validate() const {
  if (width < 2 || height < 2) throw Error("image must be at least 2x2");
  if (pixels.size() != static_cast<std::size_t>(width * height)) throw Error("image pixel count mismatch");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error("pixel spacing must be positive");
  for (double v : pixels) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw Error("image intensity outside [0, 1]");
  }
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

long parse_positive(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used == tok.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw Error(std::string("pgm: bad ") + what + " '" + tok + "'");
}

}  // namespace

Image2D read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P5") throw Error("pgm: unsupported format '" + magic + "'");
  const long w = parse_positive(next_token(in), "width");
  const long h = parse_positive(next_token(in), "height");
  const long maxval = parse_positive(next_token(in), "maxval");
  if (maxval > 65535) throw Error("pgm: maxval above 65535");

  Image2D img(w, h);
  const double scale = 1.0 / static_cast<double>(maxval);
  const std::size_t n = img.pixels.size();
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw Error("pgm: truncated pixel data");
      const long v = std::stol(tok);
      if (v < 0 || v > maxval) throw Error("pgm: pixel value out of range");
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  } else {
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw Error("pgm: truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      const long v = bytes == 2 ? (long{raw[2 * i]} << 8) | raw[2 * i + 1] : long{raw[i]};
      if (v > maxval) throw Error("pgm: pixel value out of range");
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  }
  return img;
}

void write_pgm(const Image2D& image, const std::filesystem::path& path, bool ascii) {
  image.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << (ascii ? "P2" : "P5") << '\n' << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> raw(image.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(std::lround(image.pixels[i] * 255.0));
  }
  if (ascii) {
    for (Index r = 0; r < image.height; ++r) {
      for (Index c = 0; c < image.width; ++c) {
        out << (c ? " " : "") << int{raw[static_cast<std::size_t>(r * image.width + c)]};
      }
      out << '\n';
    }
  } else {
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace kfpso
