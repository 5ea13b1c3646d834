#include "ptfoucault/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ptfoucault::io {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
    out << '\n';
  }
}

std::string svg_polyline(std::span<const std::complex<double>> points, const std::string& title) {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  if (!points.empty()) {
    xmin = xmax = points[0].real();
    ymin = ymax = -points[0].imag();
  }
  for (const auto& z : points) {
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, -z.imag());
    ymax = std::max(ymax, -z.imag());
  }
  double w = xmax - xmin;
  double h = ymax - ymin;
  if (w <= 0.0) w = 1.0;
  if (h <= 0.0) h = 1.0;
  const double mx = 0.1 * w;
  const double my = 0.1 * h;
  const double stroke = 0.004 * std::max(w, h);

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_number(xmin - mx) << ' '
    << format_number(ymin - my) << ' ' << format_number(w + 2 * mx) << ' '
    << format_number(h + 2 * my) << "\" width=\"600\" height=\"600\">\n"
    << "<title>" << title << "</title>\n"
    << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"" << format_number(stroke)
    << "\" points=\"";
  // SVG y grows downwards; p is plotted upwards.
  for (std::size_t k = 0; k < points.size(); ++k) {
    s << (k ? " " : "") << format_number(points[k].real()) << ','
      << format_number(-points[k].imag());
  }
  if (!points.empty()) {
    s << ' ' << format_number(points[0].real()) << ',' << format_number(-points[0].imag());
  }
  s << "\"/>\n</svg>\n";
  return s.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write output file " + path.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("failed writing output file " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + path.string());
  }
}

double parse_ratio(const std::string& text) {
  auto parse_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + text + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + text + "'");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_double(text);
  const double num = parse_double(text.substr(0, slash));
  const double den = parse_double(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + text + "'");
  return num / den;
}

}  // namespace ptfoucault::io
