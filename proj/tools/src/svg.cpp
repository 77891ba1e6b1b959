#include "race_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace race::cli {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_series(std::string name, std::vector<double> x, std::vector<double> y) {
  series_.push_back({std::move(name), std::move(x), std::move(y)});
}

void SvgPlot::add_hline(double y, std::string label) { hlines_.emplace_back(y, std::move(label)); }

void SvgPlot::write(std::ostream& out) const {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto tx = [&](double x) { return log_x_ ? std::log10(x) : x; };
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x_ && !(s.x[i] > 0))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  for (const auto& [y, label] : hlines_) {
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (!(x0 < x1)) { x0 -= 1; x1 += 1; }
  if (!(y0 < y1)) { y0 -= 1; y1 += 1; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title_)
      << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double gx = kLeft + pw * k / 4.0;
    const double gy = kTop + ph * (1 - k / 4.0);
    out << "<text x=\"" << num(gx) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << (log_x_ ? "1e" + num(xv) : num(xv)) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\" font-size=\"11\">" << num(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << xml_escape(x_label_) << "</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << kTop + ph / 2 << ")\">" << xml_escape(y_label_) << "</text>\n";
  for (const auto& [y, label] : hlines_) {
    out << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << num(py(y)) << "\" y2=\"" << num(py(y))
        << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  std::size_t idx = 0;
  for (const auto& s : series_) {
    const char* color = kColors[idx % (sizeof kColors / sizeof *kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x_ && !(s.x[i] > 0))) continue;
      out << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      first = false;
    }
    out << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(idx);
    out << "<line x1=\"" << kWidth - kRight + 10 << "\" x2=\"" << kWidth - kRight + 30 << "\" y1=\"" << ly - 4
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 35 << "\" y=\"" << ly << "\" font-size=\"11\">" << xml_escape(s.name)
        << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

void write_histogram_svg(const std::string& title, const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& columns, std::size_t bins, std::ostream& out) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : columns) {
    for (double v : c) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo < hi)) { lo -= 1; hi += 1; }
  bins = std::max<std::size_t>(bins, 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  SvgPlot plot(title, "value", "density");
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<double> counts(bins, 0);
    for (double v : columns[c]) {
      auto b = static_cast<std::size_t>((v - lo) / width);
      counts[std::min(b, bins - 1)] += 1;
    }
    std::vector<double> xs, ys;
    const double norm = columns[c].empty() ? 1.0 : static_cast<double>(columns[c].size()) * width;
    for (std::size_t b = 0; b < bins; ++b) {
      xs.push_back(lo + width * static_cast<double>(b));
      ys.push_back(counts[b] / norm);
      xs.push_back(lo + width * static_cast<double>(b + 1));
      ys.push_back(counts[b] / norm);
    }
    plot.add_series(c < names.size() ? names[c] : "series " + std::to_string(c), std::move(xs), std::move(ys));
  }
  plot.write(out);
}

}  // namespace race::cli
