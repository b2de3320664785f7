#include "ringlab/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ringlab {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 60.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

void open_svg(std::ostringstream& os, const PlotLabels& l) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!l.config_hash.empty()) os << "<!-- config_hash: " << escape(l.config_hash) << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  if (!l.config_hash.empty()) os << "<metadata>config_hash=" << escape(l.config_hash) << "</metadata>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"16\">" << escape(l.title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const PlotLabels& l, bool log_x, bool log_y) {
  os << "<g stroke=\"black\" fill=\"none\">\n<rect x=\"" << kMargin << "\" y=\"" << kMargin
     << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\"" << kHeight - 2 * kMargin << "\"/>\n</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x=\"" << num(f.px(x)) << "\" y=\"" << kHeight - kMargin + 16
       << "\" text-anchor=\"middle\">" << num(log_x ? std::pow(10.0, x) : x) << "</text>\n";
    os << "<text x=\"" << kMargin - 6 << "\" y=\"" << num(f.py(y) + 4)
       << "\" text-anchor=\"end\">" << num(log_y ? std::pow(10.0, y) : y) << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">"
     << escape(l.x) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kHeight / 2 << ")\">" << escape(l.y) << "</text>\n</g>\n";
}

}  // namespace

std::string svg_scatter(std::span<const cplx> points, std::span<const double> radii,
                        const PlotLabels& labels) {
  double R = 1e-12;
  for (cplx p : points) R = std::max({R, std::abs(p.real()), std::abs(p.imag())});
  for (double r : radii) R = std::max(R, r);
  R *= 1.1;
  // Square frame so that circles stay round.
  const double side = kHeight - 2 * kMargin;
  const double ox = (kWidth - side) / 2;
  auto px = [&](double x) { return ox + (x + R) / (2 * R) * side; };
  auto py = [&](double y) { return kMargin + (R - y) / (2 * R) * side; };
  std::ostringstream os;
  open_svg(os, labels);
  os << "<rect x=\"" << ox << "\" y=\"" << kMargin << "\" width=\"" << side << "\" height=\"" << side
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = -R + 2 * R * i / 4.0;
    os << "<text x=\"" << num(px(v)) << "\" y=\"" << kMargin + side + 16 << "\" text-anchor=\"middle\">"
       << num(v) << "</text>\n";
    os << "<text x=\"" << ox - 6 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << num(v)
       << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">"
     << escape(labels.x) << "</text>\n</g>\n";
  os << "<g fill=\"#1f77b4\" fill-opacity=\"0.6\">\n";
  for (cplx p : points)
    os << "<circle cx=\"" << num(px(p.real())) << "\" cy=\"" << num(py(p.imag())) << "\" r=\"1.5\"/>\n";
  os << "</g>\n<g fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\">\n";
  for (double r : radii)
    os << "<circle cx=\"" << num(px(0)) << "\" cy=\"" << num(py(0)) << "\" r=\"" << num(r / (2 * R) * side)
       << "\"><title>r = " << num(r) << "</title></circle>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotLabels& labels,
                          bool log_x, bool log_y) {
  const double inf = std::numeric_limits<double>::infinity();
  Frame f{inf, -inf, inf, -inf};
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  for (size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    require(s.x.size() == s.y.size(), ErrorCode::InvalidArgument, "series x and y differ in length");
    for (size_t i = 0; i < s.x.size(); ++i) {
      double x = s.x[i], y = s.y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((log_x && x <= 0) || (log_y && y <= 0)) continue;
      if (log_x) x = std::log10(x);
      if (log_y) y = std::log10(y);
      pts[k].push_back({x, y});
      f.x0 = std::min(f.x0, x);
      f.x1 = std::max(f.x1, x);
      f.y0 = std::min(f.y0, y);
      f.y1 = std::max(f.y1, y);
    }
  }
  if (!(f.x1 > f.x0)) {
    f.x0 = std::isfinite(f.x0) ? f.x0 - 1 : 0;
    f.x1 = f.x0 + 2;
  }
  if (!(f.y1 > f.y0)) {
    f.y0 = std::isfinite(f.y0) ? f.y0 - 1 : 0;
    f.y1 = f.y0 + 2;
  }
  const double pad = 0.05 * (f.y1 - f.y0);
  f.y0 -= pad;
  f.y1 += pad;
  std::ostringstream os;
  open_svg(os, labels);
  axes(os, f, labels, log_x, log_y);
  for (size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    if (pts[k].empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : pts[k]) os << num(f.px(x)) << ',' << num(f.py(y)) << ' ';
    os << "\"/>\n";
    if (series[k].markers)
      for (auto [x, y] : pts[k])
        os << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y)) << "\" r=\"3\" fill=\"" << color
           << "\"/>\n";
    os << "<text x=\"" << kWidth - kMargin - 4 << "\" y=\"" << kMargin + 16 + 14 * k
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
       << escape(series[k].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ringlab
