#pragma once
// Minimal SVG line-plot writer: linear or log axes, polylines, markers, and
// text labels. Output is deterministic (fixed number formatting).
#include <string>
#include <vector>

#include "cycleperturb/linalg.hpp"

namespace cycleperturb {

class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string title);

  void set_range(double xmin, double xmax, double ymin, double ymax, bool logx = false,
                 bool logy = false);
  void polyline(const std::vector<Vec2>& pts, const std::string& color, double width,
                const std::string& dash = "");
  void markers(const std::vector<Vec2>& pts, const std::string& color, double radius);
  void line(const Vec2& a, const Vec2& b, const std::string& color, double width,
            const std::string& dash = "");
  // Label anchored in figure coordinates (0..1 across the full canvas).
  void label(double fx, double fy, const std::string& text, const std::string& color = "#444444");
  void axes(const std::string& xlabel, const std::string& ylabel);

  std::string render() const;

 private:
  double px(double x) const;
  double py(double y) const;

  int w_, h_;
  std::string title_;
  double x0_ = 0.0, x1_ = 1.0, y0_ = 0.0, y1_ = 1.0;
  bool logx_ = false, logy_ = false;
  std::string body_;
};

}  // namespace cycleperturb
