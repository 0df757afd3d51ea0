#include "gna/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gna::harness::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
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

// Maps data coordinates onto the plot rectangle.
class Frame {
 public:
  Frame(const Axes& axes, double x0, double x1, double y0, double y1) : axes_(axes) {
    x0_ = tx(x0, axes.log_x);
    x1_ = tx(x1, axes.log_x);
    y0_ = tx(y0, axes.log_y);
    y1_ = tx(y1, axes.log_y);
    if (x1_ <= x0_) x1_ = x0_ + 1.0;
    if (y1_ <= y0_) {
      const double pad = std::max(1e-9, std::abs(y0_) * 0.05 + 0.5);
      y0_ -= pad;
      y1_ += pad;
    }
  }

  static double tx(double v, bool log) { return log ? std::log10(v) : v; }

  double px(double x) const { return kLeft + (tx(x, axes_.log_x) - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (tx(y, axes_.log_y) - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }
  // Coordinates already in transformed space.
  double px_raw(double t) const { return kLeft + (t - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py_raw(double t) const { return kHeight - kBottom - (t - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  double x0() const { return x0_; }
  double x1() const { return x1_; }

  std::string axes_markup() const {
    std::ostringstream os;
    const double right = kWidth - kRight, bottom = kHeight - kBottom;
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << right - kLeft << "\" height=\""
       << bottom - kTop << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x0_ + (x1_ - x0_) * i / 4.0, fy = y0_ + (y1_ - y0_) * i / 4.0;
      const double vx = axes_.log_x ? std::pow(10.0, fx) : fx, vy = axes_.log_y ? std::pow(10.0, fy) : fy;
      os << "<text x=\"" << num(px_raw(fx)) << "\" y=\"" << bottom + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
         << num(vx) << "</text>\n";
      os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py_raw(fy) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
         << num(vy) << "</text>\n";
    }
    os << "<text x=\"" << (kLeft + right) / 2 << "\" y=\"" << kHeight - 12
       << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(axes_.x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << (kTop + bottom) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (kTop + bottom) / 2 << ")\">" << escape(axes_.y_label) << "</text>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">" << escape(axes_.title)
       << "</text>\n";
    return os.str();
  }

 private:
  Axes axes_;
  double x0_, x1_, y0_, y1_;
};

std::string header() {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

void extend(double v, bool log, double& lo, double& hi) {
  if (!std::isfinite(v) || (log && v <= 0.0)) return;
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

}  // namespace

std::string line_chart(const Axes& axes, const std::vector<Series>& series) {
  double xl = std::numeric_limits<double>::infinity(), xh = -xl, yl = xl, yh = -xl;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series x and y lengths differ");
    for (double v : s.x) extend(v, axes.log_x, xl, xh);
    for (double v : s.y) extend(v, axes.log_y, yl, yh);
    for (double v : s.lo) extend(v, axes.log_y, yl, yh);
    for (double v : s.hi) extend(v, axes.log_y, yl, yh);
  }
  if (!std::isfinite(xl)) xl = xh = axes.log_x ? 1.0 : 0.0;
  if (!std::isfinite(yl)) yl = yh = axes.log_y ? 1.0 : 0.0;
  const Frame f(axes, xl, xh, yl, yh);
  std::ostringstream os;
  os << header() << f.axes_markup();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (!s.lo.empty() && s.lo.size() == s.y.size() && s.hi.size() == s.y.size()) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << num(f.px(s.x[i])) << "," << num(f.py(s.hi[i])) << " ";
      for (std::size_t i = s.x.size(); i-- > 0;) os << num(f.px(s.x[i])) << "," << num(f.py(s.lo[i])) << " ";
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << num(f.px(s.x[i])) << "," << num(f.py(s.y[i])) << " ";
    os << "\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 30 << "\" y2=\""
       << ly << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string scatter_chart(const Axes& axes, const std::vector<double>& x, const std::vector<double>& y,
                          std::optional<std::pair<double, double>> fit) {
  if (x.size() != y.size()) throw std::invalid_argument("scatter x and y lengths differ");
  double xl = std::numeric_limits<double>::infinity(), xh = -xl, yl = xl, yh = -xl;
  for (double v : x) extend(v, axes.log_x, xl, xh);
  for (double v : y) extend(v, axes.log_y, yl, yh);
  if (!std::isfinite(xl)) xl = xh = axes.log_x ? 1.0 : 0.0;
  if (!std::isfinite(yl)) yl = yh = axes.log_y ? 1.0 : 0.0;
  const Frame f(axes, xl, xh, yl, yh);
  std::ostringstream os;
  os << header() << f.axes_markup();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((axes.log_x && x[i] <= 0.0) || (axes.log_y && y[i] <= 0.0)) continue;
    os << "<circle cx=\"" << num(f.px(x[i])) << "\" cy=\"" << num(f.py(y[i])) << "\" r=\"3\" fill=\"" << kPalette[0]
       << "\" fill-opacity=\"0.7\"/>\n";
  }
  if (fit) {
    const double t0 = f.x0(), t1 = f.x1();
    os << "<line x1=\"" << num(f.px_raw(t0)) << "\" y1=\"" << num(f.py_raw(fit->first * t0 + fit->second)) << "\" x2=\""
       << num(f.px_raw(t1)) << "\" y2=\"" << num(f.py_raw(fit->first * t1 + fit->second)) << "\" stroke=\"" << kPalette[1]
       << "\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 16 << "\" font-size=\"12\">slope "
       << num(fit->first) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const std::string& title, const std::vector<double>& values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw std::invalid_argument("heatmap size mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) extend(v, false, lo, hi);
  if (!(hi > lo)) hi = lo + 1.0;
  const double cell = std::min(360.0 / static_cast<double>(std::max<std::size_t>(1, cols)),
                               360.0 / static_cast<double>(std::max<std::size_t>(1, rows)));
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 60 + cell * cols + 20 << "\" height=\""
     << 50 + cell * rows + 20 << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"60\" y=\"24\" font-size=\"14\">" << escape(title) << " (max " << num(hi) << ")</text>\n";
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double t = (values[r * cols + c] - lo) / (hi - lo);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      os << "<rect x=\"" << num(60 + cell * c) << "\" y=\"" << num(50 + cell * r) << "\" width=\"" << num(cell)
         << "\" height=\"" << num(cell) << "\" fill=\"rgb(" << shade << "," << shade << ",255)\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gna::harness::svg
