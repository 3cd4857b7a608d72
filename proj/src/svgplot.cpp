#include "agctl/svgplot.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "agctl/errors.hpp"

namespace agctl {

namespace {

constexpr int kWidth = 820;
constexpr int kPanelHeight = 260;
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 24;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                         "#8c564b"};

struct Scale {
    double lo, hi;
    double px0, px1;
    double at(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

void polyline(std::ostringstream& out, const std::vector<std::pair<double, double>>& pts,
              const Scale& x, const Scale& y, const char* color) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [px, py] : pts)
        out << fmt::format("{:.1f},{:.1f} ", x.at(px), y.at(py));
    out << "\"/>\n";
}

void axes(std::ostringstream& out, const Scale& x, const Scale& y,
          const std::string& ylabel) {
    out << fmt::format(
        "<rect x=\"{:.0f}\" y=\"{:.0f}\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "fill=\"none\" stroke=\"#555\"/>\n",
        x.px0, y.px1, x.px1 - x.px0, y.px0 - y.px1);
    for (int k = 0; k <= 4; ++k) {
        const double v = y.lo + (y.hi - y.lo) * k / 4.0;
        out << fmt::format(
            "<text x=\"{:.0f}\" y=\"{:.0f}\" font-size=\"10\" text-anchor=\"end\" "
            "fill=\"#333\">{:.2f}</text>\n",
            x.px0 - 4, y.at(v) + 3, v);
    }
    out << fmt::format(
        "<text x=\"12\" y=\"{:.0f}\" font-size=\"11\" fill=\"#333\" "
        "transform=\"rotate(-90 12 {:.0f})\">{}</text>\n",
        0.5 * (y.px0 + y.px1), 0.5 * (y.px0 + y.px1), ylabel);
}

}  // namespace

std::string episode_svg(const EpisodeLog& log) {
    const auto& samples = log.trajectory.samples;
    if (samples.empty()) throw EmptyInput("empty trajectory");

    std::vector<std::pair<double, double>> avg, q1, q2;
    double t_lo = samples.front().state.time, t_hi = samples.back().state.time;
    double temp_lo = log.config.setpoint, temp_hi = log.config.setpoint;
    for (const auto& s : samples) {
        const double a = average_temperature(s.state);
        avg.emplace_back(s.state.time, a);
        q1.emplace_back(s.state.time, s.cmd.q1);
        q2.emplace_back(s.state.time, s.cmd.q2);
        temp_lo = std::min(temp_lo, a);
        temp_hi = std::max(temp_hi, a);
    }
    const double pad = std::max(0.2, 0.05 * (temp_hi - temp_lo));
    const int height = 2 * kPanelHeight + 2 * kMarginTop;

    std::ostringstream out;
    out << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "font-family=\"sans-serif\">\n",
        kWidth, height);

    const Scale x{t_lo, std::max(t_hi, t_lo + 1), kMarginLeft,
                  static_cast<double>(kWidth - kMarginRight)};
    const Scale y_temp{temp_lo - pad, temp_hi + pad,
                       static_cast<double>(kMarginTop + kPanelHeight - 20),
                       static_cast<double>(kMarginTop)};
    axes(out, x, y_temp, "T_avg (K)");
    polyline(out,
             {{t_lo, log.config.setpoint}, {t_hi, log.config.setpoint}},
             x, y_temp, "#999");
    polyline(out, avg, x, y_temp, kColors[0]);
    out << fmt::format(
        "<text x=\"{}\" y=\"16\" font-size=\"12\" fill=\"#333\">{}: TW-MAE {:.4f} K, "
        "RMSE {:.4f} K</text>\n",
        kMarginLeft, log.controller_name, log.metrics.tw_mae, log.metrics.rmse);

    const double y0 = kMarginTop + kPanelHeight;
    const Scale y_cmd{-0.02, kQMax + 0.02, y0 + kPanelHeight - 20, y0 + 10};
    axes(out, x, y_cmd, "q (W)");
    polyline(out, q1, x, y_cmd, kColors[1]);
    polyline(out, q2, x, y_cmd, kColors[2]);

    out << "</svg>\n";
    return out.str();
}

std::string comparison_svg(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) throw EmptyInput("no episodes to plot");
    double t_lo = 1e300, t_hi = -1e300, temp_lo = 1e300, temp_hi = -1e300;
    for (const auto& log : logs) {
        for (const auto& s : log.trajectory.samples) {
            const double a = average_temperature(s.state);
            t_lo = std::min(t_lo, s.state.time);
            t_hi = std::max(t_hi, s.state.time);
            temp_lo = std::min(temp_lo, a);
            temp_hi = std::max(temp_hi, a);
        }
        temp_lo = std::min(temp_lo, log.config.setpoint);
        temp_hi = std::max(temp_hi, log.config.setpoint);
    }
    const double pad = std::max(0.2, 0.05 * (temp_hi - temp_lo));
    const int height = kPanelHeight + 2 * kMarginTop;

    std::ostringstream out;
    out << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "font-family=\"sans-serif\">\n",
        kWidth, height);
    const Scale x{t_lo, std::max(t_hi, t_lo + 1), kMarginLeft,
                  static_cast<double>(kWidth - kMarginRight)};
    const Scale y{temp_lo - pad, temp_hi + pad,
                  static_cast<double>(kMarginTop + kPanelHeight - 20),
                  static_cast<double>(kMarginTop)};
    axes(out, x, y, "T_avg (K)");
    polyline(out, {{t_lo, logs.front().config.setpoint}, {t_hi, logs.front().config.setpoint}},
             x, y, "#999");
    for (std::size_t i = 0; i < logs.size(); ++i) {
        std::vector<std::pair<double, double>> avg;
        for (const auto& s : logs[i].trajectory.samples)
            avg.emplace_back(s.state.time, average_temperature(s.state));
        const char* color = kColors[(i + 0) % 6];
        polyline(out, avg, x, y, color);
        out << fmt::format(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{}\">{}</text>\n",
            kMarginLeft + 6, kMarginTop + 14 + 14 * i, color, logs[i].controller_name);
    }
    out << "</svg>\n";
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

}  // namespace agctl
