#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace crm::cli {
namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Axis {
  bool log;
  double lo, hi;  // in transformed units
  double map(double v, double a, double b) const {
    const double u = log ? std::log10(v) : v;
    return a + (u - lo) / (hi - lo) * (b - a);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double d = std::ceil(lo); d <= std::floor(hi) + 1e-9; ++d) t.push_back(std::pow(10.0, d));
      if (t.size() < 2)
        for (double d = std::floor(lo); d <= hi; ++d)
          for (double m : {2.0, 5.0})
            if (const double u = d + std::log10(m); u >= lo && u <= hi) t.push_back(std::pow(10.0, u));
      std::sort(t.begin(), t.end());
    } else {
      const double raw = (hi - lo) / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      for (double m : {2.0, 5.0, 10.0})
        if (step < raw) step = m * mag;
      for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * std::abs(hi); v += step) t.push_back(v);
    }
    return t;
  }
};

Axis make_axis(const std::vector<double>& vals, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : vals) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    const double u = log ? std::log10(v) : v;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.04 * (hi - lo);
  return {log, lo - pad, hi + pad};
}

}  // namespace

void write_svg_plot(std::ostream& os, const std::string& title, const std::string& xlabel, const std::string& ylabel,
                    const std::vector<Series>& series, bool logx, bool logy, const std::string& comment) {
  std::vector<double> xs, ys;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      xs.push_back(s.x[i]);
      ys.push_back(s.y[i]);
    }
  const Axis ax = make_axis(xs, logx), ay = make_axis(ys, logy);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) {
    std::string c = comment;
    for (std::size_t p; (p = c.find("--")) != std::string::npos;) c.replace(p, 2, "- -");
    os << "<!-- config: " << c << " -->\n";
  }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
     << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double px = ax.map(t, x0, x1);
    os << "<line x1=\"" << num(px) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px) << "\" y2=\"" << num(y0 + 5)
       << "\" stroke=\"black\"/><text x=\"" << num(px) << "\" y=\"" << num(y0 + 18) << "\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double py = ay.map(t, y0, y1);
    os << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(py)
       << "\" stroke=\"black\"/><text x=\"" << num(x0 - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">"
       << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 15) << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n";
  os << "<text x=\"18\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << num((y0 + y1) / 2) << ")\">" << escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
      pts += num(ax.map(s.x[i], x0, x1)) + "," + num(ay.map(s.y[i], y0, y1)) + " ";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts << "\"/>\n";
    const double ly = y1 + 10 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << num(x1 + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(x1 + 35) << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
       << "/><text x=\"" << num(x1 + 40) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace crm::cli
