#include "aerodesign/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <zlib.h>

#include "aerodesign/error.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

constexpr double kScale = 1000.0;
constexpr double kMarginX = 50.0;
constexpr double kMinHalfHeight = 120.0;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string coord(double v) { return format_fixed(v, 3); }

// Closed outline: upper LE -> TE, then lower TE -> LE.
std::string outline_path(const AirfoilProfile& profile) {
  std::string d;
  const auto& up = profile.upper();
  const auto& lo = profile.lower();
  for (std::size_t i = 0; i < up.size(); ++i) {
    d += (i == 0 ? "M " : " L ");
    d += coord(up[i].x * kScale) + " " + coord(-up[i].y * kScale);
  }
  for (std::size_t i = lo.size(); i-- > 0;) {
    d += " L " + coord(lo[i].x * kScale) + " " + coord(-lo[i].y * kScale);
  }
  d += " Z";
  return d;
}

double extent(const AirfoilProfile& p) {
  double m = 0.0;
  for (const auto& pt : p.upper()) m = std::max(m, std::abs(pt.y));
  for (const auto& pt : p.lower()) m = std::max(m, std::abs(pt.y));
  return m * kScale;
}

std::string provenance_caption(const AirfoilProfile& profile) {
  if (const auto* d = std::get_if<DesignParams>(&profile.provenance())) {
    return "max camber " + format_fixed(d->max_camber(), 4) + ", camber location " +
           format_fixed(d->camber_location(), 4) + ", max thickness " +
           format_fixed(d->max_thickness(), 4);
  }
  const auto& k = std::get<KulfanParams>(profile.provenance());
  return "Kulfan degree " + std::to_string(k.degree()) + ", TE thickness " +
         format_fixed(k.te_thickness(), 5);
}

std::string metrics_caption(const AeroResult& r) {
  return "Cl " + format_fixed(r.cl, 4) + "  Cd " + format_fixed(r.cd, 5) + "  Cm " +
         format_fixed(r.cm, 4) + "  L/D " + format_fixed(r.l_over_d, 2);
}

struct Frame {
  double half_height = kMinHalfHeight;
  int text_lines = 0;
};

std::string header(const RenderSpec& spec, const Frame& frame) {
  if (spec.width <= 0 || spec.height <= 0) {
    throw Error(errc::domain, "render size must be positive");
  }
  const double top = -frame.half_height - 40.0 * frame.text_lines;
  const double h = 2.0 * frame.half_height + 40.0 * frame.text_lines;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
         "\" viewBox=\"" + coord(-kMarginX) + " " + coord(top) + " " +
         coord(kScale + 2 * kMarginX) + " " + coord(h) +
         "\" preserveAspectRatio=\"xMidYMid meet\">\n";
  out += "<rect x=\"" + coord(-kMarginX) + "\" y=\"" + coord(top) + "\" width=\"" +
         coord(kScale + 2 * kMarginX) + "\" height=\"" + coord(h) + "\" fill=\"#ffffff\"/>\n";
  out += "<line id=\"chord\" x1=\"0.000\" y1=\"0.000\" x2=\"1000.000\" y2=\"0.000\" "
         "stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"8 6\"/>\n";
  return out;
}

std::string text_block(const std::vector<std::string>& lines, double top) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const double y = top + 30.0 + 40.0 * static_cast<double>(i);
    out += "<text x=\"0.000\" y=\"" + coord(y) +
           "\" font-family=\"sans-serif\" font-size=\"26\" fill=\"#222222\">" +
           xml_escape(lines[i]) + "</text>\n";
  }
  return out;
}

}  // namespace

std::string render_profile(const AirfoilProfile& profile, const RenderSpec& spec) {
  std::vector<std::string> lines;
  if (spec.title) lines.push_back(*spec.title);
  if (spec.show_params) lines.push_back(provenance_caption(profile));
  if (spec.metrics) lines.push_back(metrics_caption(*spec.metrics));

  Frame frame;
  frame.half_height = std::max(kMinHalfHeight, extent(profile) + 40.0);
  frame.text_lines = static_cast<int>(lines.size());

  std::string out = header(spec, frame);
  if (spec.title) out += "<title>" + xml_escape(*spec.title) + "</title>\n";
  out += "<path id=\"profile\" d=\"" + outline_path(profile) + "\" fill=\"" + spec.fill +
         "\" stroke=\"" + spec.stroke + "\" stroke-width=\"2\"/>\n";
  out += text_block(lines, -frame.half_height - 40.0 * frame.text_lines);
  out += "</svg>\n";
  return out;
}

std::string render_comparison(const AirfoilProfile& a, const AirfoilProfile& b,
                              const RenderSpec& spec, const std::string& label_a,
                              const std::string& label_b) {
  std::vector<std::string> lines;
  if (spec.title) lines.push_back(*spec.title);

  Frame frame;
  frame.half_height = std::max(kMinHalfHeight, std::max(extent(a), extent(b)) + 40.0);
  frame.text_lines = static_cast<int>(lines.size()) + 2;

  std::string out = header(spec, frame);
  if (spec.title) out += "<title>" + xml_escape(*spec.title) + "</title>\n";
  out += "<path id=\"profile-a\" d=\"" + outline_path(a) + "\" fill=\"none\" stroke=\"" +
         spec.stroke + "\" stroke-width=\"2\"/>\n";
  out += "<path id=\"profile-b\" d=\"" + outline_path(b) + "\" fill=\"none\" stroke=\"" +
         spec.comparison_stroke + "\" stroke-width=\"2\" stroke-dasharray=\"10 5\"/>\n";
  const double top = -frame.half_height - 40.0 * frame.text_lines;
  out += text_block(lines, top);

  out += "<g id=\"legend\">\n";
  const std::array<std::pair<const std::string*, const std::string*>, 2> entries{
      {{&label_a, &spec.stroke}, {&label_b, &spec.comparison_stroke}}};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double y = top + 40.0 * static_cast<double>(lines.size() + i) + 20.0;
    out += "<line x1=\"0.000\" y1=\"" + coord(y) + "\" x2=\"60.000\" y2=\"" + coord(y) +
           "\" stroke=\"" + *entries[i].second + "\" stroke-width=\"4\"/>\n";
    out += "<text x=\"75.000\" y=\"" + coord(y + 9.0) +
           "\" font-family=\"sans-serif\" font-size=\"26\" fill=\"#222222\">" +
           xml_escape(*entries[i].first) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type,
               const std::vector<std::uint8_t>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> rasterize_profile_png(const AirfoilProfile& profile, int width,
                                                int height) {
  if (width <= 0 || height <= 0) {
    throw Error(errc::domain, "raster size must be positive");
  }
  // Polygon in pixel space, equal aspect, chord spanning 90% of the width.
  std::vector<Point2> poly;
  for (const auto& p : profile.upper()) poly.push_back(p);
  for (auto it = profile.lower().rbegin(); it != profile.lower().rend(); ++it) {
    poly.push_back(*it);
  }
  const double scale = 0.9 * width;
  const double x0 = 0.05 * width;
  const double y0 = 0.5 * height;
  for (auto& p : poly) {
    p = {x0 + p.x * scale, y0 - p.y * scale};
  }

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width * height), 255);
  std::vector<double> xs;
  for (int row = 0; row < height; ++row) {
    const double y = row + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2& a = poly[i];
      const Point2& b = poly[(i + 1) % poly.size()];
      if ((a.y <= y && b.y > y) || (b.y <= y && a.y > y)) {
        xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int from = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int to = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1] - 0.5)));
      for (int col = from; col <= to; ++col) {
        pixels[static_cast<std::size_t>(row * width + col)] = 40;
      }
    }
  }
  // Chord line for reference.
  const int chord_row = static_cast<int>(y0);
  for (int col = static_cast<int>(x0); col <= static_cast<int>(x0 + scale) && col < width; ++col) {
    auto& px = pixels[static_cast<std::size_t>(chord_row * width + col)];
    if (px == 255) px = 160;
  }

  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>((width + 1) * height));
  for (int row = 0; row < height; ++row) {
    raw.push_back(0);
    const auto* begin = pixels.data() + static_cast<std::ptrdiff_t>(row) * width;
    raw.insert(raw.end(), begin, begin + width);
  }
  uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(compressed_size);
  if (compress2(compressed.data(), &compressed_size, raw.data(), static_cast<uLong>(raw.size()),
                9) != Z_OK) {
    throw Error(errc::io, "PNG compression failed");
  }
  compressed.resize(compressed_size);

  std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // 8-bit grayscale
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", compressed);
  put_chunk(png, "IEND", {});
  return png;
}

}  // namespace aerodesign
