#include "cycleperturb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cycleperturb {
namespace {

// Plot-area margins inside the canvas.
constexpr double kL = 64.0, kR = 18.0, kT = 36.0, kB = 48.0;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string tick_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Tick positions for a linear axis: a 1/2/5 step covering [a,b].
std::vector<double> linear_ticks(double a, double b) {
  const double span = b - a;
  if (!(span > 0.0)) return {a};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(a / step) * step; t <= b + 1e-9 * span; t += step) out.push_back(t);
  return out;
}

// Decade ticks for a log axis.
std::vector<double> log_ticks(double a, double b) {
  std::vector<double> out;
  const int lo = static_cast<int>(std::ceil(std::log10(a) - 1e-9));
  const int hi = static_cast<int>(std::floor(std::log10(b) + 1e-9));
  for (int e = lo; e <= hi; ++e) out.push_back(std::pow(10.0, e));
  if (out.empty()) out = {a, b};
  return out;
}

}  // namespace

SvgPlot::SvgPlot(int width, int height, std::string title)
    : w_(width), h_(height), title_(std::move(title)) {}

void SvgPlot::set_range(double xmin, double xmax, double ymin, double ymax, bool logx, bool logy) {
  x0_ = xmin;
  x1_ = xmax;
  y0_ = ymin;
  y1_ = ymax;
  logx_ = logx;
  logy_ = logy;
}

double SvgPlot::px(double x) const {
  const double a = logx_ ? std::log10(x0_) : x0_;
  const double b = logx_ ? std::log10(x1_) : x1_;
  const double v = logx_ ? std::log10(x) : x;
  return kL + (v - a) / (b - a) * (w_ - kL - kR);
}

double SvgPlot::py(double y) const {
  const double a = logy_ ? std::log10(y0_) : y0_;
  const double b = logy_ ? std::log10(y1_) : y1_;
  const double v = logy_ ? std::log10(y) : y;
  return h_ - kB - (v - a) / (b - a) * (h_ - kT - kB);
}

void SvgPlot::polyline(const std::vector<Vec2>& pts, const std::string& color, double width,
                       const std::string& dash) {
  if (pts.empty()) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) + "\"";
  if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
  body_ += " points=\"";
  for (const auto& p : pts) body_ += num(px(p.x)) + "," + num(py(p.y)) + " ";
  body_ += "\"/>\n";
}

void SvgPlot::markers(const std::vector<Vec2>& pts, const std::string& color, double radius) {
  for (const auto& p : pts)
    body_ += "<circle cx=\"" + num(px(p.x)) + "\" cy=\"" + num(py(p.y)) + "\" r=\"" + num(radius) +
             "\" fill=\"" + color + "\"/>\n";
}

void SvgPlot::line(const Vec2& a, const Vec2& b, const std::string& color, double width,
                   const std::string& dash) {
  body_ += "<line x1=\"" + num(px(a.x)) + "\" y1=\"" + num(py(a.y)) + "\" x2=\"" + num(px(b.x)) +
           "\" y2=\"" + num(py(b.y)) + "\" stroke=\"" + color + "\" stroke-width=\"" + num(width) +
           "\"";
  if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
  body_ += "/>\n";
}

void SvgPlot::label(double fx, double fy, const std::string& text, const std::string& color) {
  body_ += "<text x=\"" + num(fx * w_) + "\" y=\"" + num(fy * h_) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" + text +
           "</text>\n";
}

void SvgPlot::axes(const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<rect x=\"" + num(kL) + "\" y=\"" + num(kT) + "\" width=\"" + num(w_ - kL - kR) +
       "\" height=\"" + num(h_ - kT - kB) + "\" fill=\"none\" stroke=\"#888888\"/>\n";
  const auto xt = logx_ ? log_ticks(x0_, x1_) : linear_ticks(x0_, x1_);
  for (double t : xt) {
    if (t < std::min(x0_, x1_) || t > std::max(x0_, x1_)) continue;
    const double X = px(t);
    s += "<line x1=\"" + num(X) + "\" y1=\"" + num(h_ - kB) + "\" x2=\"" + num(X) + "\" y2=\"" +
         num(h_ - kB + 5.0) + "\" stroke=\"#888888\"/>\n";
    s += "<text x=\"" + num(X) + "\" y=\"" + num(h_ - kB + 18.0) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\" text-anchor=\"middle\">" +
         tick_text(t) + "</text>\n";
  }
  const auto yt = logy_ ? log_ticks(y0_, y1_) : linear_ticks(y0_, y1_);
  for (double t : yt) {
    if (t < std::min(y0_, y1_) || t > std::max(y0_, y1_)) continue;
    const double Y = py(t);
    s += "<line x1=\"" + num(kL - 5.0) + "\" y1=\"" + num(Y) + "\" x2=\"" + num(kL) + "\" y2=\"" +
         num(Y) + "\" stroke=\"#888888\"/>\n";
    s += "<text x=\"" + num(kL - 8.0) + "\" y=\"" + num(Y + 4.0) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\" text-anchor=\"end\">" +
         tick_text(t) + "</text>\n";
  }
  s += "<text x=\"" + num(kL + (w_ - kL - kR) / 2.0) + "\" y=\"" + num(h_ - 10.0) +
       "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\" text-anchor=\"middle\">" +
       xlabel + "</text>\n";
  s += "<text x=\"16\" y=\"" + num(kT + (h_ - kT - kB) / 2.0) +
       "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\" text-anchor=\"middle\" "
       "transform=\"rotate(-90 16 " +
       num(kT + (h_ - kT - kB) / 2.0) + ")\">" + ylabel + "</text>\n";
  s += "<text x=\"" + num(w_ / 2.0) +
       "\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#111111\" "
       "text-anchor=\"middle\">" +
       title_ + "</text>\n";
  body_ = s + body_;  // frame behind the data
}

std::string SvgPlot::render() const {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w_) +
                    "\" height=\"" + std::to_string(h_) + "\" viewBox=\"0 0 " + std::to_string(w_) +
                    " " + std::to_string(h_) + "\">\n<rect width=\"100%\" height=\"100%\" "
                    "fill=\"#ffffff\"/>\n";
  out += body_;
  out += "</svg>\n";
  return out;
}

}  // namespace cycleperturb
