// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace upfi {

struct Bar {
  std::string label;
  double value = 0.0;
  double error = 0.0;  // half-width of the error bar
};

/// Horizontal bar chart with symmetric error bars. Output depends only on the inputs.
std::string svg_bar_chart(const std::string& title, const std::string& axis_label, const std::vector<Bar>& bars);

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  bool emphasized = false;
};

struct Marker {
  double x = 0.0;
  double y = 0.0;
};

/// Line chart; emphasized series are drawn last and thicker.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, const std::vector<Marker>& markers = {});

}  // namespace upfi
