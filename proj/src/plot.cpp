#include "ensctl/plot.hpp"

#include "ensctl/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

namespace ensctl {

namespace {

constexpr double kWidth = 640;
constexpr double kPanelHeight = 320;
constexpr double kLeft = 70, kRight = 130, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double log10_value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(log10_value)));
  return buf;
}

}  // namespace

std::string render_plot(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw InvalidArgument("no records to plot");

  // metric -> method -> N -> values
  std::map<std::string, std::map<Method, std::map<std::size_t, std::vector<double>>>> data;
  for (const auto& r : records) data[r.metric][r.method][r.samples].push_back(r.value);

  const double height = kPanelHeight * static_cast<double>(data.size());
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  double offset = 0.0;
  for (const auto& [metric, by_method] : data) {
    std::map<Method, std::vector<std::pair<double, double>>> series;
    double min_pos = std::numeric_limits<double>::infinity();
    std::size_t n_lo = std::numeric_limits<std::size_t>::max(), n_hi = 0;
    for (const auto& [method, by_n] : by_method) {
      for (const auto& [n, values] : by_n) {
        const double m = median(values);
        series[method].push_back({static_cast<double>(n), m});
        if (m > 0.0) min_pos = std::min(min_pos, m);
        n_lo = std::min(n_lo, n);
        n_hi = std::max(n_hi, n);
      }
    }
    // Zero medians sit one decade below the smallest positive value.
    const double floor = std::isfinite(min_pos) ? min_pos / 10.0 : 1e-16;
    double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
    for (auto& [method, pts] : series) {
      for (auto& pt : pts) {
        pt.second = std::log10(std::max(pt.second, floor));
        y_lo = std::min(y_lo, pt.second);
        y_hi = std::max(y_hi, pt.second);
      }
    }
    y_lo = std::floor(y_lo);
    y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);
    double x_lo = std::log10(static_cast<double>(std::max<std::size_t>(n_lo, 1)));
    double x_hi = std::log10(static_cast<double>(std::max<std::size_t>(n_hi, 1)));
    if (x_hi <= x_lo) {
      x_lo -= 0.5;
      x_hi += 0.5;
    }

    const double pw = kWidth - kLeft - kRight;
    const double ph = kPanelHeight - kTop - kBottom;
    auto px = [&](double lx) { return kLeft + (lx - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double ly) { return offset + kTop + (y_hi - ly) / (y_hi - y_lo) * ph; };

    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(offset + 20) + "\" text-anchor=\"middle\">" +
           metric + "</text>\n";
    svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(offset + kTop) + "\" width=\"" + num(pw) +
           "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double d = y_lo; d <= y_hi + 1e-9; d += 1.0) {
      svg += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(py(d)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
             num(py(d)) + "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(d) + 4) + "\" text-anchor=\"end\">" +
             tick_label(d) + "</text>\n";
    }
    for (std::size_t n_tick : [&] {
           std::vector<std::size_t> ns;
           for (const auto& [method, by_n] : by_method)
             for (const auto& [n, values] : by_n) ns.push_back(n);
           std::sort(ns.begin(), ns.end());
           ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
           return ns;
         }()) {
      const double x = px(std::log10(static_cast<double>(std::max<std::size_t>(n_tick, 1))));
      const double yb = offset + kTop + ph;
      svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(yb) + "\" x2=\"" + num(x) + "\" y2=\"" + num(yb + 4) +
             "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + num(x) + "\" y=\"" + num(yb + 16) + "\" text-anchor=\"middle\">" +
             std::to_string(n_tick) + "</text>\n";
    }
    svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(offset + kPanelHeight - 10) +
           "\" text-anchor=\"middle\">N (samples)</text>\n";

    std::size_t k = 0;
    for (const auto& [method, pts] : series) {
      const char* color = kColors[k % std::size(kColors)];
      std::string path;
      for (const auto& [n, ly] : pts) {
        path += (path.empty() ? "" : " ") + num(px(std::log10(n))) + "," + num(py(ly));
      }
      svg += "<polyline points=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      for (const auto& [n, ly] : pts) {
        svg += "<circle cx=\"" + num(px(std::log10(n))) + "\" cy=\"" + num(py(ly)) + "\" r=\"3\" fill=\"" +
               color + "\"/>\n";
      }
      const double ly = offset + kTop + 14.0 * static_cast<double>(k + 1);
      svg += "<line x1=\"" + num(kWidth - kRight + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
             num(kWidth - kRight + 30) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + num(kWidth - kRight + 34) + "\" y=\"" + num(ly) + "\">" + to_string(method) +
             "</text>\n";
      ++k;
    }
    offset += kPanelHeight;
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::vector<ExperimentRecord>& records, const std::string& path) {
  const std::string svg = render_plot(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << svg;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace ensctl
