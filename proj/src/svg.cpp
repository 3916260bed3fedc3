#include "socnav/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace socnav {

std::string ramp_color(double t) {
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    constexpr double blue[3] = {40, 100, 230};
    constexpr double pink[3] = {250, 70, 170};
    int c[3];
    for (int k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(blue[k] + t * (pink[k] - blue[k])));
    return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
}

namespace {

struct AgentTrack {
    std::vector<Vec2> points;
    double radius = 0.0;
    double rho_hat_sum = 0.0;
    int rho_hat_n = 0;
    std::optional<double> rho;
};

}  // namespace

std::string render_svg(const std::vector<TrajectoryRecord>& records, const SvgStyle& style) {
    std::map<int, AgentTrack> agents;
    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    bool first = true;
    const int episode = records.empty() ? 0 : records.front().episode;
    for (const auto& r : records) {
        if (r.episode != episode) continue;
        AgentTrack& a = agents[r.agent];
        a.points.push_back({r.px, r.py});
        a.radius = r.radius;
        if (r.rho_hat) {
            a.rho_hat_sum += *r.rho_hat;
            ++a.rho_hat_n;
        }
        if (r.rho) a.rho = r.rho;
        if (first) {
            min_x = max_x = r.px;
            min_y = max_y = r.py;
            first = false;
        }
        min_x = std::min(min_x, r.px - r.radius);
        max_x = std::max(max_x, r.px + r.radius);
        min_y = std::min(min_y, r.py - r.radius);
        max_y = std::max(max_y, r.py + r.radius);
    }

    const double s = style.pixels_per_meter;
    const double m = style.margin_px;
    const double legend_h = style.legend ? 60.0 : 0.0;
    const double width = (max_x - min_x) * s + 2 * m;
    const double height = (max_y - min_y) * s + 2 * m + legend_h;
    // World y points up; SVG y points down.
    const auto X = [&](double x) { return m + (x - min_x) * s; };
    const auto Y = [&](double y) { return m + (max_y - y) * s; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.1f}\" height=\"{:.1f}\" viewBox=\"0 0 {:.1f} {:.1f}\">\n",
        width, height, width, height);
    out << fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#ffffff\"/>\n", width, height);

    for (const auto& [id, a] : agents) {
        std::string color = "#000000";
        if (id != 0) {
            const double value = a.rho_hat_n > 0 ? a.rho_hat_sum / a.rho_hat_n : a.rho.value_or(0.0);
            color = ramp_color(value);
        }
        out << fmt::format("<polyline id=\"agent{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.1f}\" points=\"", id,
                           color, style.stroke_width);
        for (std::size_t k = 0; k < a.points.size(); ++k)
            out << fmt::format("{}{:.2f},{:.2f}", k ? " " : "", X(a.points[k].x), Y(a.points[k].y));
        out << "\"/>\n";
        const Vec2 last = a.points.back();
        out << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\"/>\n",
                           X(last.x), Y(last.y), a.radius * s, color, color);
    }

    if (style.legend) {
        const double y0 = height - legend_h + 10;
        // Scale bar of one meter.
        out << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#000000\" stroke-width=\"2\"/>\n",
                           m, y0 + 25, m + s, y0 + 25);
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" font-family=\"sans-serif\">1 m</text>\n", m,
                           y0 + 40);
        const double lx = m + s + 30;
        for (int k = 0; k <= 10; ++k)
            out << fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", lx + 10 * k,
                               y0 + 15, ramp_color(k / 10.0));
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" font-family=\"sans-serif\">rho 0</text>\n",
                           lx, y0 + 10);
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" font-family=\"sans-serif\">1</text>\n",
                           lx + 104, y0 + 10);
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" font-family=\"sans-serif\">robot</text>\n",
                           lx + 140, y0 + 24);
        out << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#000000\" stroke-width=\"2\"/>\n",
                           lx + 175, y0 + 20, lx + 200, y0 + 20);
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace socnav
