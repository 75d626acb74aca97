#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "odct/error.hpp"

namespace odct::plot {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace detail

/// Minimal deterministic line chart. One polyline over labeled axes with
/// five ticks per axis, plus an optional dashed horizontal reference line.
inline void write_line_svg(const std::filesystem::path& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const Series& series,
                           std::optional<double> reference = std::nullopt,
                           const std::string& reference_label = "") {
    using detail::fmt;
    constexpr double kW = 720.0, kH = 440.0;
    constexpr double kLeft = 72.0, kRight = 24.0, kTop = 44.0, kBottom = 56.0;
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + path.string());

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
        << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
        << "<text x=\"" << kW / 2 << "\" y=\"26\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";

    if (series.x.empty()) {
        out << "<text x=\"" << kW / 2 << "\" y=\"" << kH / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
               "fill=\"#888\">no data</text>\n</svg>\n";
        if (!out.flush()) throw InputError("write failed: " + path.string());
        return;
    }

    double x_min = *std::min_element(series.x.begin(), series.x.end());
    double x_max = *std::max_element(series.x.begin(), series.x.end());
    double y_min = *std::min_element(series.y.begin(), series.y.end());
    double y_max = *std::max_element(series.y.begin(), series.y.end());
    if (reference) {
        y_min = std::min(y_min, *reference);
        y_max = std::max(y_max, *reference);
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    const double y_pad = (y_max == y_min) ? std::max(1e-12, std::abs(y_max) * 0.1 + 0.1)
                                          : (y_max - y_min) * 0.06;
    y_min -= y_pad;
    y_max += y_pad;

    const auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    const auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

    // Axes and ticks.
    out << "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\"#333\">\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << kTop + plot_h << "\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + plot_h << "\"/>\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double fx = x_min + (x_max - x_min) * i / kTicks;
        const double gx = px(fx);
        out << "<line x1=\"" << fmt(gx, "%.2f") << "\" y1=\"" << kTop + plot_h << "\" x2=\""
            << fmt(gx, "%.2f") << "\" y2=\"" << kTop + plot_h + 5 << "\"/>\n";
        out << "<text x=\"" << fmt(gx, "%.2f") << "\" y=\"" << kTop + plot_h + 18
            << "\" text-anchor=\"middle\" stroke=\"none\">" << fmt(fx, "%.4g") << "</text>\n";
        const double fy = y_min + (y_max - y_min) * i / kTicks;
        const double gy = py(fy);
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(gy, "%.2f") << "\" x2=\"" << kLeft
            << "\" y2=\"" << fmt(gy, "%.2f") << "\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(gy + 3.5, "%.2f")
            << "\" text-anchor=\"end\" stroke=\"none\">" << fmt(fy, "%.4g") << "</text>\n";
    }
    out << "</g>\n";

    out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 "
        << kTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

    if (reference) {
        const double gy = py(*reference);
        out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(gy, "%.2f") << "\" x2=\""
            << kLeft + plot_w << "\" y2=\"" << fmt(gy, "%.2f")
            << "\" stroke=\"#b33\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
        if (!reference_label.empty()) {
            out << "<text x=\"" << kLeft + plot_w - 6 << "\" y=\"" << fmt(gy - 6.0, "%.2f")
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
                   "fill=\"#b33\">"
                << reference_label << "</text>\n";
        }
    }

    if (series.x.size() == 1) {
        out << "<circle cx=\"" << fmt(px(series.x[0]), "%.2f") << "\" cy=\""
            << fmt(py(series.y[0]), "%.2f") << "\" r=\"3.5\" fill=\"#1866aa\"/>\n";
    } else {
        out << "<polyline fill=\"none\" stroke=\"#1866aa\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < series.x.size(); ++i) {
            if (i) out << ' ';
            out << fmt(px(series.x[i]), "%.2f") << ',' << fmt(py(series.y[i]), "%.2f");
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    if (!out.flush()) throw InputError("write failed: " + path.string());
}

}  // namespace odct::plot
