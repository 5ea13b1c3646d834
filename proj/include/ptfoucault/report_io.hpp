#pragma once

// Deterministic text outputs: CSV tables, SVG polylines and atomic file writes.

#include <complex>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ptfoucault::io {

/// %.17g, so values round-trip exactly and repeated runs compare byte for byte.
std::string format_number(double value);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Static SVG with one polyline; viewport is the bounding box plus a 10% margin.
std::string svg_polyline(std::span<const std::complex<double>> points, const std::string& title);

/// Writes via a sibling temporary file and renames it into place.
/// Throws std::runtime_error when the destination cannot be written.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Parses "p/q" or a plain decimal.
double parse_ratio(const std::string& text);

}  // namespace ptfoucault::io
