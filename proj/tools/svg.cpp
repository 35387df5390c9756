#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fbopt::tool {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string line_plot_svg(const std::string& title, const std::vector<SvgSeries>& series,
                          int width, int height) {
    const double ml = 62, mr = 14, mt = 28, mb = 34;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double tmin = 0, tmax = 1, vmin = 0, vmax = 1;
    bool any = false;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.t.size() && i < s.v.size(); ++i) {
            if (!std::isfinite(s.v[i])) continue;
            if (!any) {
                tmin = tmax = s.t[i];
                vmin = vmax = s.v[i];
                any = true;
            }
            tmin = std::min(tmin, s.t[i]);
            tmax = std::max(tmax, s.t[i]);
            vmin = std::min(vmin, s.v[i]);
            vmax = std::max(vmax, s.v[i]);
        }
    }
    if (tmax <= tmin) tmax = tmin + 1;
    if (vmax <= vmin) {
        vmax = vmin + 1;
        vmin -= 1;
    }
    const double vpad = 0.05 * (vmax - vmin);
    vmin -= vpad;
    vmax += vpad;

    auto X = [&](double t) { return ml + pw * (t - tmin) / (tmax - tmin); };
    auto Y = [&](double v) { return mt + ph * (1.0 - (v - vmin) / (vmax - vmin)); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
       << title << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
       << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (int k = 0; k <= 5; ++k) {
        const double t = tmin + (tmax - tmin) * k / 5.0;
        const double v = vmin + (vmax - vmin) * k / 5.0;
        os << "<line x1=\"" << X(t) << "\" y1=\"" << mt + ph << "\" x2=\"" << X(t)
           << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << X(t) << "\" y=\"" << mt + ph + 16
           << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
           << num(t) << "</text>\n";
        os << "<line x1=\"" << ml - 4 << "\" y1=\"" << Y(v) << "\" x2=\"" << ml
           << "\" y2=\"" << Y(v) << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << ml - 7 << "\" y=\"" << Y(v) + 3
           << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
           << num(v) << "</text>\n";
    }

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::ostringstream pts;
        bool open = false;
        for (size_t i = 0; i < s.t.size() && i < s.v.size(); ++i) {
            if (!std::isfinite(s.v[i])) {
                if (open) {
                    os << "<polyline fill=\"none\" stroke=\"" << color
                       << "\" stroke-width=\"1.2\" points=\"" << pts.str() << "\"/>\n";
                    pts.str("");
                    open = false;
                }
                continue;
            }
            pts << num(X(s.t[i])) << "," << num(Y(s.v[i])) << " ";
            open = true;
        }
        if (open)
            os << "<polyline fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.2\" points=\"" << pts.str() << "\"/>\n";
        os << "<text x=\"" << ml + 8 + 90 * static_cast<double>(si) << "\" y=\"" << mt - 6
           << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
           << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace fbopt::tool
