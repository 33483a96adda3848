#ifndef REGLAB_SVG_HPP
#define REGLAB_SVG_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "reglab/numerics.hpp"

namespace reglab {

/// Minimal SVG line chart; CSV stays the canonical artifact, plots are a
/// convenience for eyeballing runs.
struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgOptions {
    int width = 840;
    int height = 520;
    bool log_x = false;
    bool log_y = false;
    std::string x_label = "t";
    std::string y_label = "";
};

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<SvgSeries>& series, const SvgOptions& opts = {}) {
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double plot_w = opts.width - ml - mr;
    const double plot_h = opts.height - mt - mb;
    auto tx = [&](double v) { return opts.log_x ? std::log10(std::max(v, 1e-300)) : v; };
    auto ty = [&](double v) { return opts.log_y ? std::log10(std::max(v, 1e-300)) : v; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (opts.log_y && s.y[i] <= 0.0) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double v) { return mt + plot_h - (ty(v) - ymin) / (ymax - ymin) * plot_h; };

    std::ofstream out(path);
    if (!out) throw Error("write_svg_chart: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
        << opts.height << "\" viewBox=\"0 0 " << opts.width << " " << opts.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << opts.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (int g = 0; g <= 5; ++g) {
        const double gy = mt + plot_h * g / 5.0;
        const double gx = ml + plot_w * g / 5.0;
        out << "<line x1=\"" << ml << "\" y1=\"" << gy << "\" x2=\"" << ml + plot_w << "\" y2=\""
            << gy << "\" stroke=\"#dddddd\"/>\n";
        out << "<line x1=\"" << gx << "\" y1=\"" << mt << "\" x2=\"" << gx << "\" y2=\""
            << mt + plot_h << "\" stroke=\"#dddddd\"/>\n";
        const double xv = xmin + (xmax - xmin) * g / 5.0;
        const double yv = ymax - (ymax - ymin) * g / 5.0;
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.3g", opts.log_x ? std::pow(10.0, xv) : xv);
        out << "<text x=\"" << gx << "\" y=\"" << mt + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf
            << "</text>\n";
        std::snprintf(buf, sizeof(buf), "%.3g", opts.log_y ? std::pow(10.0, yv) : yv);
        out << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
            << "</text>\n";
    }
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << opts.height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << opts.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << mt + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << mt + plot_h / 2 << ")\">" << opts.y_label
        << "</text>\n";

    int color = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[color % 5]
            << "\" stroke-width=\"1.3\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (opts.log_y && s.y[i] <= 0.0) continue;
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        out << "\"/>\n";
        if (!s.name.empty()) {
            out << "<text x=\"" << ml + plot_w - 8 << "\" y=\"" << mt + 16 + 16 * color
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
                << colors[color % 5] << "\">" << s.name << "</text>\n";
        }
        ++color;
    }
    out << "</svg>\n";
}

}  // namespace reglab

#endif  // REGLAB_SVG_HPP
