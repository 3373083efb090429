// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#include "upfi/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "upfi/dataset.hpp"

namespace upfi {

namespace {

constexpr double kWidth = 640.0;
constexpr double kLeft = 140.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  const double r = std::round(v * 100.0) / 100.0;
  return format_double(r == 0.0 ? 0.0 : r);
}

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

std::string tick(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string svg_bar_chart(const std::string& title, const std::string& axis_label, const std::vector<Bar>& bars) {
  const double row = 22.0;
  const double height = kTop + kBottom + row * static_cast<double>(std::max<std::size_t>(bars.size(), 1));
  Range r;
  r.add(0.0);
  for (const auto& b : bars) {
    r.add(b.value - b.error);
    r.add(b.value + b.error);
  }
  r.finish();
  const double plot_w = kWidth - kLeft - kRight;
  auto sx = [&](double v) { return kLeft + (v - r.lo) / (r.hi - r.lo) * plot_w; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
  const double zero = sx(0.0);
  out << "<line x1=\"" << num(zero) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(zero) << "\" y2=\""
      << num(height - kBottom) << "\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const double y = kTop + row * static_cast<double>(i);
    const double x0 = std::min(zero, sx(b.value));
    const double w = std::abs(sx(b.value) - zero);
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 15) << "\" text-anchor=\"end\">" << escape(b.label)
        << "</text>\n";
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y + 4) << "\" width=\"" << num(w) << "\" height=\""
        << num(row - 8) << "\" fill=\"#4c78a8\"/>\n";
    if (b.error > 0.0) {
      out << "<line x1=\"" << num(sx(b.value - b.error)) << "\" y1=\"" << num(y + row / 2) << "\" x2=\""
          << num(sx(b.value + b.error)) << "\" y2=\"" << num(y + row / 2) << "\" stroke=\"black\"/>\n";
    }
  }
  const double axis_y = height - kBottom;
  for (int t = 0; t <= 4; ++t) {
    const double v = r.lo + (r.hi - r.lo) * t / 4.0;
    out << "<text x=\"" << num(sx(v)) << "\" y=\"" << num(axis_y + 16) << "\" text-anchor=\"middle\">" << tick(v)
        << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(height - 10) << "\" text-anchor=\"middle\">"
      << escape(axis_label) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, const std::vector<Marker>& markers) {
  const double height = 420.0;
  Range rx, ry;
  for (const auto& s : series) {
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  for (const auto& m : markers) {
    rx.add(m.x);
    ry.add(m.y);
  }
  rx.finish();
  ry.finish();
  const double left = 70.0;
  const double plot_w = kWidth - left - kRight;
  const double plot_h = height - kTop - kBottom;
  auto sx = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * plot_w; };
  auto sy = [&](double v) { return kTop + (1.0 - (v - ry.lo) / (ry.hi - ry.lo)) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  auto draw = [&](const Series& s) {
    out << "<polyline fill=\"none\" stroke=\"" << (s.emphasized ? "#d62728" : "#7f7f7f") << "\" stroke-width=\""
        << (s.emphasized ? "2.5" : "0.6") << "\"" << (s.emphasized ? "" : " stroke-opacity=\"0.5\"") << " points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (i) out << ' ';
      out << num(sx(s.x[i])) << ',' << num(sy(s.y[i]));
    }
    out << "\"/>\n";
  };
  for (const auto& s : series) {
    if (!s.emphasized) draw(s);
  }
  for (const auto& s : series) {
    if (s.emphasized) draw(s);
  }
  for (const auto& m : markers) {
    out << "<circle cx=\"" << num(sx(m.x)) << "\" cy=\"" << num(sy(m.y)) << "\" r=\"2\" fill=\"black\"/>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double vx = rx.lo + (rx.hi - rx.lo) * t / 4.0;
    const double vy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
    out << "<text x=\"" << num(sx(vx)) << "\" y=\"" << num(height - kBottom + 16) << "\" text-anchor=\"middle\">"
        << tick(vx) << "</text>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(vy) + 4) << "\" text-anchor=\"end\">" << tick(vy)
        << "</text>\n";
  }
  out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 10) << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << num(kTop + plot_h / 2) << ")\">" << escape(y_label) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace upfi
