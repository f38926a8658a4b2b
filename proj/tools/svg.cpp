#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>

#include "finsler/error.hpp"

namespace finsler::cli {

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr double kMargin = 28.0;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

// viridis endpoints and midpoint, linearly blended
std::string ramp(double t) {
  static const double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 2.0;
  const int s = std::min(static_cast<int>(t), 1);
  const double f = t - s;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[s][0] + f * (stops[s + 1][0] - stops[s][0])),
                static_cast<int>(stops[s][1] + f * (stops[s + 1][1] - stops[s][1])),
                static_cast<int>(stops[s][2] + f * (stops[s + 1][2] - stops[s][2])));
  return buf;
}

void panel(std::ostream& out, const RowMatrix& x, Index cx, Index cy, double left, const std::vector<std::string>& fill,
           const std::string& caption, const PlotOptions& o) {
  const double lo_x = x.col(cx).minCoeff(), hi_x = x.col(cx).maxCoeff();
  const double lo_y = x.col(cy).minCoeff(), hi_y = x.col(cy).maxCoeff();
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double inner = o.panel_size - 2 * kMargin;
  const double ox = left + kMargin + (inner - inner * (hi_x - lo_x) / span) / 2;
  const double oy = kMargin + (inner - inner * (hi_y - lo_y) / span) / 2;
  out << "<g>\n<rect x=\"" << num(left + kMargin / 2) << "\" y=\"" << num(kMargin / 2) << "\" width=\""
      << num(o.panel_size - kMargin) << "\" height=\"" << num(o.panel_size - kMargin)
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
  if (!caption.empty())
    out << "<text x=\"" << num(left + o.panel_size / 2) << "\" y=\"" << num(o.panel_size - 4)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(caption) << "</text>\n";
  for (Index i = 0; i < x.rows(); ++i) {
    const double px = ox + inner * (x(i, cx) - lo_x) / span;
    const double py = oy + inner * (hi_y - x(i, cy)) / span;
    out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"" << num(o.point_radius) << "\" fill=\""
        << fill[static_cast<std::size_t>(i)] << "\" fill-opacity=\"0.8\"/>\n";
  }
  out << "</g>\n";
}

}  // namespace

void write_svg(std::ostream& out, const RowMatrix& coords, const std::optional<Labels>& labels,
               const PlotOptions& o) {
  require(coords.cols() >= 2, ErrorCode::DimensionMismatch, "plot needs at least two coordinates");
  require(coords.rows() >= 1, ErrorCode::ParseError, "empty embedding");
  require(coords.allFinite(), ErrorCode::NumericalFailure, "embedding has non-finite coordinates");
  const Index n = coords.rows(), last = coords.cols() - 1;
  std::vector<std::string> fill(static_cast<std::size_t>(n), "#1f77b4");
  if (o.color_by == ColorBy::Label) {
    require(labels.has_value(), ErrorCode::InvalidArgument, "colouring by label needs a labels file");
    require(static_cast<Index>(labels->size()) == n, ErrorCode::DimensionMismatch,
            "labels and embedding have different lengths");
    std::map<int, std::size_t> slot;
    for (std::size_t i = 0; i < labels->size(); ++i) {
      const auto it = slot.emplace((*labels)[i], slot.size()).first;
      fill[i] = kPalette[it->second % kPalette.size()];
    }
  } else if (o.color_by == ColorBy::Axis) {
    const double lo = coords.col(last).minCoeff(), hi = coords.col(last).maxCoeff();
    for (Index i = 0; i < n; ++i)
      fill[static_cast<std::size_t>(i)] = ramp(hi > lo ? (coords(i, last) - lo) / (hi - lo) : 0.5);
  }
  const bool two = coords.cols() >= 3;
  const double width = o.panel_size * (two ? 2 : 1);
  const double top = o.title.empty() ? 0.0 : 20.0;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(o.panel_size + top) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(o.panel_size + top) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!o.title.empty())
    out << "<text x=\"" << num(width / 2) << "\" y=\"16\" text-anchor=\"middle\" font-size=\"14\">" << escape(o.title)
        << "</text>\n";
  out << "<g transform=\"translate(0," << num(top) << ")\">\n";
  if (two) {
    panel(out, coords, 0, 1, 0.0, fill, "top view (coord 1, coord 2)", o);
    panel(out, coords, 0, last, o.panel_size, fill, "side view (coord 1, coord " + std::to_string(last + 1) + ")", o);
  } else {
    panel(out, coords, 0, 1, 0.0, fill, "", o);
  }
  out << "</g>\n</svg>\n";
}

}  // namespace finsler::cli
