#include "anesmpc/svg.hpp"

#include "anesmpc/errors.hpp"
#include "anesmpc/text_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace anesmpc {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) { return format_double(v, 6); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1-2-5 tick step giving roughly `target` intervals.
double tick_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

void write_svg(std::ostream& os, const SvgChart& chart) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (double x : chart.x) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
  }
  for (const auto& s : chart.series)
    for (double y : s.y)
      if (std::isfinite(y)) {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  for (double r : chart.reference_lines) {
    y0 = std::min(y0, r);
    y1 = std::max(y1, r);
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double ystep = tick_step(y1 - y0, 6);
  y0 = std::floor(y0 / ystep) * ystep;
  y1 = std::ceil(y1 / ystep) * ystep;
  const double xstep = tick_step(x1 - x0, 8);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
     << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft) << "\" y=\"24\" font-size=\"15\">" << escape(chart.title) << "</text>\n";

  for (double y = y0; y <= y1 + 1e-9 * ystep; y += ystep) {
    os << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kLeft + pw) << "\" y1=\"" << num(py(y))
       << "\" y2=\"" << num(py(y)) << "\" stroke=\"#e4e4e4\"/>\n";
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(y) + 4)
       << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
  }
  for (double x = std::ceil(x0 / xstep) * xstep; x <= x1 + 1e-9 * xstep; x += xstep) {
    os << "<line x1=\"" << num(px(x)) << "\" x2=\"" << num(px(x)) << "\" y1=\"" << num(kTop)
       << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"#e4e4e4\"/>\n";
    os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + ph + 16)
       << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
  }
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10)
     << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";

  for (double r : chart.reference_lines) {
    os << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kLeft + pw) << "\" y1=\"" << num(py(r))
       << "\" y2=\"" << num(py(r)) << "\" stroke=\"#888\" stroke-dasharray=\"2,3\"/>\n";
  }

  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const auto& ser = chart.series[s];
    os << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.6\"";
    if (ser.dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    const std::size_t n = std::min(ser.y.size(), chart.x.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(ser.y[i])) continue;
      os << num(px(chart.x[i])) << ',' << num(py(ser.y[i])) << (i + 1 < n ? " " : "");
    }
    os << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << num(kLeft + pw + 12) << "\" x2=\"" << num(kLeft + pw + 36) << "\" y1=\""
       << num(ly) << "\" y2=\"" << num(ly) << "\" stroke=\"" << ser.color << "\" stroke-width=\"2\""
       << (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    os << "<text x=\"" << num(kLeft + pw + 42) << "\" y=\"" << num(ly + 4) << "\">"
       << escape(ser.label) << "</text>\n";
  }
  os << "</svg>\n";
}

std::vector<std::string> write_simulation_plots(const std::filesystem::path& dir, const SimLog& log,
                                                double y_ref) {
  SvgChart base;
  base.x_label = "time [s]";
  for (const auto& r : log.records) base.x.push_back(r.t);

  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : log.records) v.push_back(get(r));
    return v;
  };

  std::vector<std::pair<std::string, SvgChart>> charts;
  {
    SvgChart c = base;
    c.title = "BIS";
    c.y_label = "BIS";
    c.series.push_back({"BIS", column([](const SimRecord& r) { return r.bis; }), "#1f4e9c"});
    c.reference_lines = {y_ref, 40.0, 60.0};
    charts.emplace_back("bis.svg", c);
  }
  const char* drug[2] = {"propofol [mg/s]", "remifentanil [ug/s]"};
  const char* file[2] = {"inputs_propofol.svg", "inputs_remifentanil.svg"};
  for (int d = 0; d < 2; ++d) {
    SvgChart c = base;
    c.title = std::string("Inputs: ") + drug[d];
    c.y_label = drug[d];
    c.series.push_back({"u", column([d](const SimRecord& r) { return r.u[d]; }), "#c0392b"});
    c.series.push_back({"v", column([d](const SimRecord& r) { return r.v[d]; }), "#1f4e9c"});
    c.series.push_back({"v_a", column([d](const SimRecord& r) { return r.v_a[d]; }), "#27864a", true});
    charts.emplace_back(file[d], c);
  }
  {
    SvgChart c = base;
    c.title = "Fast states";
    c.y_label = "concentration";
    const char* names[4] = {"p1", "p4", "r1", "r4"};
    const char* colors[4] = {"#c0392b", "#e67e22", "#1f4e9c", "#27864a"};
    for (int i = 0; i < 4; ++i) {
      c.series.push_back({names[i], column([i](const SimRecord& r) { return r.xf[i]; }), colors[i]});
      c.series.push_back({std::string(names[i]) + " steady", column([i](const SimRecord& r) { return r.x_a[i]; }),
                          colors[i], true});
    }
    charts.emplace_back("fast_states.svg", c);
  }

  std::vector<std::string> names;
  for (const auto& [name, chart] : charts) {
    std::ofstream os(dir / name);
    if (!os) throw ConfigError("cannot write " + (dir / name).string());
    write_svg(os, chart);
    names.push_back(name);
  }
  return names;
}

}  // namespace anesmpc
