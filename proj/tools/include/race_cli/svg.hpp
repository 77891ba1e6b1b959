#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace race::cli {

/// Minimal line/step plot written as standalone SVG.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void set_log_x(bool on) { log_x_ = on; }
  void add_series(std::string name, std::vector<double> x, std::vector<double> y);
  /// Horizontal reference line.
  void add_hline(double y, std::string label);
  void write(std::ostream& out) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> x, y;
  };
  std::string title_, x_label_, y_label_;
  bool log_x_ = false;
  std::vector<Series> series_;
  std::vector<std::pair<double, std::string>> hlines_;
};

/// Histogram of each column of samples (one series per column), as an SVG step plot.
void write_histogram_svg(const std::string& title, const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& columns, std::size_t bins, std::ostream& out);

std::string xml_escape(const std::string& text);

}  // namespace race::cli
