// CSV, SVG and manifest writers.
#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jmgt {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 17 significant digits, shortest exponent form
std::string format_f64(double x);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    // mixed rows: text cells are written verbatim
    void row_text(const std::vector<std::string>& cells);
    std::size_t columns() const { return ncol_; }

private:
    std::ofstream out_;
    std::string path_;
    std::size_t ncol_;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

// log-log polylines with decade axes; non-positive points are skipped
void write_svg_loglog(const std::string& path, const std::string& title, const std::vector<PlotSeries>& series);

struct ManifestInfo {
    std::string command;
    std::string config_text;
    double wall_seconds = 0.0;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, std::string>> extra;
};

const char* code_version();
void write_manifest(const std::string& dir, const ManifestInfo& info);

void ensure_directory(const std::string& dir);

}  // namespace jmgt
