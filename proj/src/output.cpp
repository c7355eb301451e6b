#include "jmgt/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "json.hpp"

namespace jmgt {

std::string format_f64(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), path_(path), ncol_(header.size()) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncol_) throw IoError(path_ + ": row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_f64(values[i]);
    out_ << "\n";
    if (!out_) throw IoError("write failed for '" + path_ + "'");
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
    if (cells.size() != ncol_) throw IoError(path_ + ": row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
    if (!out_) throw IoError("write failed for '" + path_ + "'");
}

void write_svg_loglog(const std::string& path, const std::string& title, const std::vector<PlotSeries>& series) {
    const double W = 640, H = 440, ml = 70, mr = 150, mt = 40, mb = 50;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!(s.x[i] > 0) || !(s.y[i] > 0) || !std::isfinite(s.y[i])) continue;
            xlo = std::min(xlo, std::log10(s.x[i]));
            xhi = std::max(xhi, std::log10(s.x[i]));
            ylo = std::min(ylo, std::log10(s.y[i]));
            yhi = std::max(yhi, std::log10(s.y[i]));
        }
    if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    xlo = std::floor(xlo), xhi = std::max(std::ceil(xhi), xlo + 1);
    ylo = std::floor(ylo), yhi = std::max(std::ceil(yhi), ylo + 1);
    auto px = [&](double lx) { return ml + (lx - xlo) / (xhi - xlo) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - ylo) / (yhi - ylo) * (H - mt - mb); };

    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << ml << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";
    f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double d = xlo; d <= xhi + 1e-9; d += 1) {
        f << "<line x1=\"" << px(d) << "\" y1=\"" << H - mb << "\" x2=\"" << px(d) << "\" y2=\"" << mt
          << "\" stroke=\"#ddd\"/>\n";
        f << "<text x=\"" << px(d) - 12 << "\" y=\"" << H - mb + 16 << "\">1e" << static_cast<int>(d) << "</text>\n";
    }
    for (double d = ylo; d <= yhi + 1e-9; d += 1) {
        f << "<line x1=\"" << ml << "\" y1=\"" << py(d) << "\" x2=\"" << W - mr << "\" y2=\"" << py(d)
          << "\" stroke=\"#ddd\"/>\n";
        f << "<text x=\"" << ml - 40 << "\" y=\"" << py(d) + 4 << "\">1e" << static_cast<int>(d) << "</text>\n";
    }
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = colors[k % 6];
        f << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!(s.x[i] > 0) || !(s.y[i] > 0) || !std::isfinite(s.y[i])) continue;
            f << px(std::log10(s.x[i])) << "," << py(std::log10(s.y[i])) << " ";
        }
        f << "\"/>\n";
        f << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * (k + 1) << "\" fill=\"" << col << "\">" << s.label
          << "</text>\n";
    }
    f << "</svg>\n";
    if (!f) throw IoError("write failed for '" + path + "'");
}

const char* code_version() { return "jmgt 1.0.0"; }

void write_manifest(const std::string& dir, const ManifestInfo& info) {
    nlohmann::ordered_json j;
    j["command"] = info.command;
    j["code_version"] = code_version();
    j["wall_seconds"] = info.wall_seconds;
    j["config"] = info.config_text;
    j["outputs"] = info.outputs;
    for (const auto& [k, v] : info.extra) j[k] = v;
    std::ofstream f(std::filesystem::path(dir) / "manifest.json");
    if (!f) throw IoError("cannot write manifest in '" + dir + "'");
    f << j.dump(2) << "\n";
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace jmgt
