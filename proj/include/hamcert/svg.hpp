/*
 * Copyright 2026 The hamcert Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "hamcert/common.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace hamcert::cli {

struct SvgSeries {
    std::string name;
    std::string color;  // empty = palette default
    std::vector<double> x;
    std::vector<double> y;
};

/// Component colors follow the benchmark figures for 4-dimensional states
/// [q1, q2, v1, v2]: q1 red, q2 blue, v1 green, v2 black.
inline std::string series_color(size_t index, size_t total) {
    static const char* four[] = {"#d62728", "#1f77b4", "#2ca02c", "#000000"};
    static const char* cycle[] = {"#d62728", "#2ca02c", "#1f77b4", "#000000",
                                  "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
    if (total == 4) return four[index % 4];
    return cycle[index % 8];
}

/// Static line chart: axes box, min/max tick labels, one polyline per
/// series, a small legend. Figures, not an app.
inline std::string render_line_chart(const std::string& title,
                                     const std::vector<SvgSeries>& series) {
    require(!series.empty(), "render_line_chart: no series");
    const double width = 860, height = 480;
    const double ml = 70, mr = 170, mt = 42, mb = 48;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series) {
        require(s.x.size() == s.y.size() && !s.x.empty(), "render_line_chart: bad series");
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymax = ymin + 1;
        ymin -= 1;
    } else {
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }

    auto sx = [&](double x) { return ml + pw * (x - xmin) / (xmax - xmin); };
    auto sy = [&](double y) { return mt + ph * (1.0 - (y - ymin) / (ymax - ymin)); };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "  <text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
       << title << "</text>\n";
    os << "  <rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
       << ph << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "  <text x=\"" << ml << "\" y=\"" << height - 18
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(xmin) << "</text>\n";
    os << "  <text x=\"" << ml + pw - 40 << "\" y=\"" << height - 18
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(xmax) << "</text>\n";
    os << "  <text x=\"8\" y=\"" << mt + 12
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(ymax) << "</text>\n";
    os << "  <text x=\"8\" y=\"" << mt + ph
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(ymin) << "</text>\n";
    if (ymin < 0 && ymax > 0)
        os << "  <line x1=\"" << ml << "\" y1=\"" << sy(0) << "\" x2=\"" << ml + pw
           << "\" y2=\"" << sy(0) << "\" stroke=\"#ccc\" stroke-dasharray=\"4 3\"/>\n";

    for (size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::string color = s.color.empty() ? series_color(k, series.size()) : s.color;
        os << "  <polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (i) os << ' ';
            os << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i]));
        }
        os << "\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(k);
        os << "  <line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
           << ml + pw + 34 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "  <text x=\"" << ml + pw + 40 << "\" y=\"" << ly
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace hamcert::cli
