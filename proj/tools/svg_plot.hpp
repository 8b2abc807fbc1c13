#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "psqr/csv.hpp"

namespace psqr_cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct BandShape {
    std::vector<double> x;
    std::vector<double> lower;
    std::vector<double> upper;
};

// Minimal line-chart renderer used by the --svg convenience flag; the CSV
// output remains the primary artifact.
inline std::string render_svg(const std::vector<Series>& curves, const BandShape* band) {
    const double w = 720, h = 480, ml = 60, mr = 20, mt = 20, mb = 45;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto absorb = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    };
    for (const auto& s : curves)
        for (size_t i = 0; i < s.x.size(); ++i) absorb(s.x[i], s.y[i]);
    if (band != nullptr)
        for (size_t i = 0; i < band->x.size(); ++i) {
            absorb(band->x[i], band->lower[i]);
            absorb(band->x[i], band->upper[i]);
        }
    if (!(xmax > xmin)) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (!(ymax > ymin)) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (band != nullptr && !band->x.empty()) {
        out << "<polygon fill=\"#1f77b4\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (size_t i = 0; i < band->x.size(); ++i)
            if (std::isfinite(band->upper[i]))
                out << px(band->x[i]) << ',' << py(band->upper[i]) << ' ';
        for (size_t i = band->x.size(); i-- > 0;)
            if (std::isfinite(band->lower[i]))
                out << px(band->x[i]) << ',' << py(band->lower[i]) << ' ';
        out << "\"/>\n";
    }

    // frame and ticks
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (w - ml - mr)
        << "\" height=\"" << (h - mt - mb)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 5.0;
        const double fy = ymin + (ymax - ymin) * t / 5.0;
        out << "<line x1=\"" << px(fx) << "\" y1=\"" << (h - mb) << "\" x2=\"" << px(fx)
            << "\" y2=\"" << (h - mb + 5) << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << px(fx) << "\" y=\"" << (h - mb + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << psqr::format_double(fx)
            << "</text>\n"
            << "<line x1=\"" << (ml - 5) << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
            << py(fy) << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << (ml - 8) << "\" y=\"" << (py(fy) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << psqr::format_double(fy)
            << "</text>\n";
    }

    int color = 0;
    for (const auto& s : curves) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[color % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i])) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << (w - mr - 8) << "\" y=\"" << (mt + 16 + 14 * color)
            << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << palette[color % 6] << "\">"
            << s.label << "</text>\n";
        ++color;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace psqr_cli
