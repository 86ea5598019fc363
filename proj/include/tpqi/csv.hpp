#pragma once

// Plot-ready CSV for histograms and model curves.
//
// Header `tau_ns,value[,sigma]`, LF line endings, one row per bin with the bin
// center in nanoseconds. Reals use 9 significant digits; histogram counts are
// written as integers so they survive a round trip exactly.

#include <filesystem>
#include <string>
#include <vector>

#include "tpqi/core.hpp"

namespace tpqi::io {

std::string format_real(double v);

std::string render_csv(const Histogram& h);
std::string render_csv(const CoincidenceCurve& c);
std::string render_csv(const CoincidenceCurve& c, const std::vector<double>& sigma);

void write_csv(const Histogram& h, const std::filesystem::path& path);
void write_csv(const CoincidenceCurve& c, const std::filesystem::path& path);
void write_csv(const CoincidenceCurve& c, const std::vector<double>& sigma,
               const std::filesystem::path& path);
/// Writes `text` verbatim; IoError carries the path on failure.
void write_text(const std::string& text, const std::filesystem::path& path);

Histogram read_histogram_csv(const std::filesystem::path& path);
CoincidenceCurve read_curve_csv(const std::filesystem::path& path);

/// Parses a decimal number and scales it by 10^exponent without an
/// intermediate rounding step. Returns false on malformed text.
bool parse_scaled(std::string_view text, int exponent, double& out);

}  // namespace tpqi::io
