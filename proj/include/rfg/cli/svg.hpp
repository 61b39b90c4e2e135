#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace rfg::cli::svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Diverging map: blue (low) - white - red (high); t in [0, 1].
inline std::string color(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = static_cast<int>(std::lround(49 + u * (255 - 49)));
    g = static_cast<int>(std::lround(54 + u * (255 - 54)));
    b = static_cast<int>(std::lround(149 + u * (255 - 149)));
  } else {
    const double u = (t - 0.5) / 0.5;
    r = static_cast<int>(std::lround(255 - u * (255 - 165)));
    g = static_cast<int>(std::lround(255 - u * 255));
    b = static_cast<int>(std::lround(255 - u * (255 - 38)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

/// values[row][col]; row 0 is drawn at the bottom.
inline std::string heatmap(const std::vector<std::vector<double>>& values, const std::string& title,
                           const std::string& x_label, const std::string& y_label, double x_lo,
                           double x_hi, double y_lo, double y_hi) {
  const double W = 420, H = 420, left = 60, top = 40, right = 90, bottom = 50;
  const std::size_t rows = values.size(), cols = rows ? values[0].size() : 0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : values) {
    for (double v : r) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double cw = W / static_cast<double>(std::max<std::size_t>(1, cols));
  const double ch = H / static_cast<double>(std::max<std::size_t>(1, rows));
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(left + W + right) +
                  "\" height=\"" + num(top + H + bottom) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<text x=\"" + num(left) + "\" y=\"24\" font-size=\"14\">" + escape(title) + "</text>\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double y = top + H - static_cast<double>(i + 1) * ch;
      s += "<rect x=\"" + num(left + static_cast<double>(j) * cw) + "\" y=\"" + num(y) +
           "\" width=\"" + num(cw + 0.05) + "\" height=\"" + num(ch + 0.05) + "\" fill=\"" +
           color((values[i][j] - lo) / (hi - lo)) + "\"/>\n";
    }
  }
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(W) + "\" height=\"" +
       num(H) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  s += "<text x=\"" + num(left) + "\" y=\"" + num(top + H + 18) + "\">" + num(x_lo) + "</text>\n";
  s += "<text x=\"" + num(left + W) + "\" y=\"" + num(top + H + 18) + "\" text-anchor=\"end\">" +
       num(x_hi) + "</text>\n";
  s += "<text x=\"" + num(left + W / 2) + "\" y=\"" + num(top + H + 38) +
       "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + H) + "\" text-anchor=\"end\">" +
       num(y_lo) + "</text>\n";
  s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + 12) + "\" text-anchor=\"end\">" +
       num(y_hi) + "</text>\n";
  s += "<text transform=\"translate(" + num(18) + "," + num(top + H / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  for (int k = 0; k < 20; ++k) {  // colour bar
    const double y = top + H - (k + 1) * H / 20;
    s += "<rect x=\"" + num(left + W + 15) + "\" y=\"" + num(y) + "\" width=\"16\" height=\"" +
         num(H / 20 + 0.05) + "\" fill=\"" + color((k + 0.5) / 20) + "\"/>\n";
  }
  s += "<text x=\"" + num(left + W + 35) + "\" y=\"" + num(top + H) + "\">" + num(lo) + "</text>\n";
  s += "<text x=\"" + num(left + W + 35) + "\" y=\"" + num(top + 12) + "\">" + num(hi) + "</text>\n";
  return s + "</svg>\n";
}

struct Series {
  std::string label;
  std::vector<double> x, mean, std;
  std::string stroke = "#1f77b4";
};

/// Line panel with a shaded mean +- std band per series.
inline std::string line_panel(const std::vector<Series>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label,
                              double offset_y = 0.0) {
  const double W = 520, H = 220, left = 70, top = 30 + offset_y;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& se : series) {
    for (std::size_t i = 0; i < se.x.size(); ++i) {
      xlo = std::min(xlo, se.x[i]);
      xhi = std::max(xhi, se.x[i]);
      ylo = std::min(ylo, se.mean[i] - se.std[i]);
      yhi = std::max(yhi, se.mean[i] + se.std[i]);
    }
  }
  if (!(xhi > xlo)) xhi = xlo + 1;
  if (!(yhi > ylo)) yhi = ylo + 1;
  auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * W; };
  auto py = [&](double y) { return top + H - (y - ylo) / (yhi - ylo) * H; };
  std::string s;
  s += "<text x=\"" + num(left) + "\" y=\"" + num(top - 10) + "\" font-size=\"14\">" +
       escape(title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(W) + "\" height=\"" +
       num(H) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (const auto& se : series) {
    std::string band, line;
    for (std::size_t i = 0; i < se.x.size(); ++i) {
      band += num(px(se.x[i])) + "," + num(py(se.mean[i] + se.std[i])) + " ";
      line += num(px(se.x[i])) + "," + num(py(se.mean[i])) + " ";
    }
    for (std::size_t i = se.x.size(); i-- > 0;) {
      band += num(px(se.x[i])) + "," + num(py(se.mean[i] - se.std[i])) + " ";
    }
    s += "<polygon points=\"" + band + "\" fill=\"" + se.stroke + "\" fill-opacity=\"0.2\"/>\n";
    s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + se.stroke +
         "\" stroke-width=\"1.5\"/>\n";
  }
  s += "<text x=\"" + num(left) + "\" y=\"" + num(top + H + 16) + "\">" + num(xlo) + "</text>\n";
  s += "<text x=\"" + num(left + W) + "\" y=\"" + num(top + H + 16) + "\" text-anchor=\"end\">" +
       num(xhi) + "</text>\n";
  s += "<text x=\"" + num(left + W / 2) + "\" y=\"" + num(top + H + 32) +
       "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + H) + "\" text-anchor=\"end\">" +
       num(ylo) + "</text>\n";
  s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + 12) + "\" text-anchor=\"end\">" +
       num(yhi) + "</text>\n";
  s += "<text transform=\"translate(16," + num(top + H / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  return s;
}

inline std::string document(const std::string& body, double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" + body + "</svg>\n";
}

}  // namespace rfg::cli::svg
