#include "mql/display.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "mql/error.hpp"

namespace mql {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 24;
constexpr double kTop = 48;
constexpr double kBottom = 72;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

constexpr const char* kPalette[12] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                      "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                      "#bcbd22", "#17becf", "#393b79", "#ad494a"};

std::string xml_escape(std::string_view s) {
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

std::string n2(double v) {
  std::string s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

std::string tick_text(double v) {
  if (std::abs(v) < 1e-12) return "0";
  if (std::abs(v) >= 1e5 || std::abs(v) < 1e-3) return fmt::format("{:.3g}", v);
  std::string s = fmt::format("{:.4f}", v);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

struct Axis {
  double lo = 0;
  double hi = 1;
  double step = 0.2;
};

// Round the range outward to a 1/2/5 tick step.
Axis nice_axis(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

class Svg {
 public:
  Svg(const std::string& title) {
    out_ = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{3}</text>\n",
        kWidth, kHeight, n2(kWidth / 2), xml_escape(title));
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double w = 1,
            std::string_view extra = "") {
    out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"{}/>\n",
                        n2(x1), n2(y1), n2(x2), n2(y2), stroke, n2(w), extra);
  }
  void text(double x, double y, std::string_view s, std::string_view anchor, int size = 11,
            std::string_view extra = "") {
    out_ += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{}\" text-anchor=\"{}\"{}>{}</text>\n",
        n2(x), n2(y), size, anchor, extra, xml_escape(s));
  }
  void rect(double x, double y, double w, double h, std::string_view fill) {
    out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", n2(x), n2(y),
                        n2(w), n2(h), fill);
  }
  void circle(double x, double y, double r, std::string_view fill) {
    out_ += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" fill-opacity=\"0.75\"/>\n", n2(x),
                        n2(y), n2(r), fill);
  }
  void raw(std::string_view s) { out_ += s; }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

double map_x(const Axis& a, double v) { return kLeft + (v - a.lo) / (a.hi - a.lo) * kPlotW; }
double map_y(const Axis& a, double v) { return kTop + kPlotH - (v - a.lo) / (a.hi - a.lo) * kPlotH; }

void y_axis(Svg& svg, const Axis& a, std::string_view label) {
  svg.line(kLeft, kTop, kLeft, kTop + kPlotH, "black");
  const int ticks = static_cast<int>(std::round((a.hi - a.lo) / a.step));
  for (int i = 0; i <= ticks; ++i) {
    const double v = a.lo + a.step * i;
    const double y = map_y(a, v);
    svg.line(kLeft - 5, y, kLeft, y, "black");
    svg.line(kLeft, y, kLeft + kPlotW, y, "#dddddd", 1);
    svg.text(kLeft - 8, y + 4, tick_text(v), "end");
  }
  svg.text(18, kTop + kPlotH / 2, label, "middle", 12,
           fmt::format(" transform=\"rotate(-90 18 {})\"", n2(kTop + kPlotH / 2)));
}

void x_axis(Svg& svg, const Axis& a, std::string_view label) {
  svg.line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH, "black");
  const int ticks = static_cast<int>(std::round((a.hi - a.lo) / a.step));
  for (int i = 0; i <= ticks; ++i) {
    const double v = a.lo + a.step * i;
    const double x = map_x(a, v);
    svg.line(x, kTop + kPlotH, x, kTop + kPlotH + 5, "black");
    svg.text(x, kTop + kPlotH + 18, tick_text(v), "middle");
  }
  svg.text(kLeft + kPlotW / 2, kHeight - 16, label, "middle", 12);
}

std::string bar_chart(const std::string& title, const std::vector<std::string>& names,
                      const std::vector<double>& values, std::string_view x_label,
                      std::string_view y_label) {
  const double vmax = *std::max_element(values.begin(), values.end());
  const double vmin = *std::min_element(values.begin(), values.end());
  // The value axis always includes 0.
  Axis a = nice_axis(std::min(0.0, vmin), std::max(0.0, vmax));
  Svg svg(title);
  y_axis(svg, a, y_label);
  svg.line(kLeft, map_y(a, 0), kLeft + kPlotW, map_y(a, 0), "black");
  const double slot = kPlotW / static_cast<double>(values.size());
  const double bw = values.size() == 1 ? slot : slot * 0.8;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kLeft + slot * static_cast<double>(i) + (slot - bw) / 2;
    const double y0 = map_y(a, 0);
    const double y1 = map_y(a, values[i]);
    svg.rect(x, std::min(y0, y1), bw, std::abs(y0 - y1), kPalette[0]);
    svg.text(x + bw / 2, kTop + kPlotH + 18, names[i], "middle");
  }
  svg.text(kLeft + kPlotW / 2, kHeight - 16, x_label, "middle", 12);
  return svg.finish();
}

std::vector<std::string> row_names(const ResultSet& r) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.labels.empty()) {
      names.push_back(std::to_string(i + 1));
      continue;
    }
    std::string s;
    for (const auto& c : r.labels) s += (s.empty() ? "" : "/") + cell_token(c.cells[i]);
    names.push_back(s);
  }
  return names;
}

std::string label_title(const ResultSet& r) {
  std::string s;
  for (const auto& c : r.labels) s += (s.empty() ? "" : "/") + c.name;
  return s.empty() ? "row" : s;
}

void require_rows(const ResultSet& r) {
  if (r.size() == 0) throw Error(ErrorCode::EmptyResult, "nothing to plot: the result has no rows");
}

}  // namespace

std::string render_bar(const ResultSet& r) {
  require_rows(r);
  std::vector<double> values;
  for (const auto& c : r.outputs) values.push_back(std::holds_alternative<double>(c) ? std::get<double>(c) : 0.0);
  return bar_chart("Predicted " + r.target_name, row_names(r), values, label_title(r),
                   "predicted " + r.target_name);
}

std::string render_class_counts(const ResultSet& r) {
  require_rows(r);
  std::map<std::string, double> counts;
  for (const auto& c : r.outputs) counts[cell_token(c)] += 1;
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& [k, v] : counts) {
    names.push_back(k);
    values.push_back(v);
  }
  return bar_chart("Predicted classes", names, values, "class", "rows");
}

std::string render_scatter(const ResultSet& r) {
  require_rows(r);
  if (!r.actuals) throw Error(ErrorCode::MissingActuals, "predicted-vs-actual plot needs actual values");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Cell& a = (*r.actuals)[i];
    if (std::holds_alternative<double>(a) && std::holds_alternative<double>(r.outputs[i])) {
      pts.emplace_back(std::get<double>(a), std::get<double>(r.outputs[i]));
    }
  }
  if (pts.empty()) throw Error(ErrorCode::MissingActuals, "no row has both an actual and a predicted value");
  double lo = pts.front().first, hi = lo;
  for (auto [x, y] : pts) {
    lo = std::min({lo, x, y});
    hi = std::max({hi, x, y});
  }
  const Axis a = nice_axis(lo, hi);
  Svg svg("Predicted vs actual " + r.target_name);
  x_axis(svg, a, "actual " + r.target_name);
  y_axis(svg, a, "predicted " + r.target_name);
  svg.line(map_x(a, a.lo), map_y(a, a.lo), map_x(a, a.hi), map_y(a, a.hi), "#d62728", 1.5,
           " stroke-dasharray=\"6 4\"");
  for (auto [x, y] : pts) svg.circle(map_x(a, x), map_y(a, y), 3, kPalette[0]);
  return svg.finish();
}

std::string render_clusters(const ResultSet& r) {
  require_rows(r);
  if (r.features.cols < 2) {
    throw Error(ErrorCode::TooFewFeatures, "cluster plot needs at least two features, got " +
                                               std::to_string(r.features.cols));
  }
  double xlo = r.features(0, 0), xhi = xlo, ylo = r.features(0, 1), yhi = ylo;
  for (std::size_t i = 0; i < r.features.rows; ++i) {
    xlo = std::min(xlo, r.features(i, 0));
    xhi = std::max(xhi, r.features(i, 0));
    ylo = std::min(ylo, r.features(i, 1));
    yhi = std::max(yhi, r.features(i, 1));
  }
  for (const auto& c : r.centroids) {
    xlo = std::min(xlo, c[0]);
    xhi = std::max(xhi, c[0]);
    ylo = std::min(ylo, c[1]);
    yhi = std::max(yhi, c[1]);
  }
  const Axis ax = nice_axis(xlo, xhi);
  const Axis ay = nice_axis(ylo, yhi);
  Svg svg("Clusters");
  x_axis(svg, ax, r.feature_names.at(0));
  y_axis(svg, ay, r.feature_names.at(1));
  for (std::size_t i = 0; i < r.features.rows; ++i) {
    const auto k = static_cast<std::size_t>(std::get<double>(r.outputs[i]));
    svg.circle(map_x(ax, r.features(i, 0)), map_y(ay, r.features(i, 1)), 3.5, kPalette[k % 12]);
  }
  for (std::size_t k = 0; k < r.centroids.size(); ++k) {
    const double x = map_x(ax, r.centroids[k][0]);
    const double y = map_y(ay, r.centroids[k][1]);
    svg.line(x - 7, y - 7, x + 7, y + 7, "black", 2.5);
    svg.line(x - 7, y + 7, x + 7, y - 7, "black", 2.5);
    svg.line(x - 6, y - 6, x + 6, y + 6, kPalette[k % 12], 1.5);
    svg.line(x - 6, y + 6, x + 6, y - 6, kPalette[k % 12], 1.5);
  }
  return svg.finish();
}

std::string render_text_table(const Table& t) {
  auto show = [](const Cell& c) -> std::string {
    if (is_missing(c)) return "-";
    if (const auto* d = std::get_if<double>(&c)) {
      if (*d == std::floor(*d) && std::abs(*d) < 1e15) return format_number(*d);
      return fmt::format("{:.4f}", *d);
    }
    return std::get<std::string>(c);
  };
  const auto& cols = t.columns();
  std::vector<std::size_t> width(cols.size());
  std::vector<std::vector<std::string>> cells(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    width[j] = cols[j].name.size();
    for (const auto& c : cols[j].cells) {
      cells[j].push_back(show(c));
      width[j] = std::max(width[j], cells[j].back().size());
    }
  }
  std::string out;
  auto emit_row = [&](auto get) {
    std::string line;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) line += "  ";
      const std::string s = get(j);
      const bool right = cols[j].dtype == DataType::Numeric;
      line += right ? fmt::format("{:>{}}", s, width[j]) : fmt::format("{:<{}}", s, width[j]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  };
  emit_row([&](std::size_t j) { return cols[j].name; });
  emit_row([&](std::size_t j) { return std::string(width[j], '-'); });
  for (std::size_t r = 0; r < t.row_count(); ++r) emit_row([&](std::size_t j) { return cells[j][r]; });
  return out;
}

}  // namespace mql
