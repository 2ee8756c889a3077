#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rank1am/harness.hpp"

namespace rank1am {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMarginL = 70.0;
constexpr double kMarginR = 20.0;
constexpr double kMarginT = 40.0;
constexpr double kMarginB = 50.0;
constexpr double kLogFloor = 1e-16;  // plotting clamp for zero/negative ratios

double clamp_log10(double v) {
    return std::log10(std::max(v, kLogFloor));
}

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                     const char* style) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        os << xs[i] << "," << ys[i] << (i + 1 < xs.size() ? " " : "");
    }
    os << "\"/>\n";
    return os.str();
}

}  // namespace

void write_band_svg(const std::string& path, const std::string& title,
                    const std::vector<IterStats>& band, const std::vector<double>& det_ratio) {
    const int iters = static_cast<int>(band.size());
    if (iters == 0) return;

    double lo = clamp_log10(det_ratio.empty() ? 1.0 : det_ratio[0]);
    double hi = lo;
    for (const IterStats& q : band) {
        lo = std::min(lo, clamp_log10(q.min));
        hi = std::max(hi, clamp_log10(std::isfinite(q.max) ? q.max : q.median));
    }
    for (double v : det_ratio) {
        lo = std::min(lo, clamp_log10(v));
        hi = std::max(hi, clamp_log10(v));
    }
    lo = std::floor(lo) - 0.5;
    hi = std::ceil(hi) + 0.5;

    const double plot_w = kWidth - kMarginL - kMarginR;
    const double plot_h = kHeight - kMarginT - kMarginB;
    auto xpix = [&](double iter) {
        return kMarginL + (iters == 1 ? 0.5 : (iter - 1.0) / (iters - 1.0)) * plot_w;
    };
    auto ypix = [&](double v) { return kMarginT + (hi - clamp_log10(v)) / (hi - lo) * plot_h; };

    std::ofstream out(path, std::ios::binary);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";

    // axes + decade ticks
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
        << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
        << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(lo)); e <= static_cast<int>(std::floor(hi)); ++e) {
        const double y = kMarginT + (hi - e) / (hi - lo) * plot_h;
        out << "<line x1=\"" << kMarginL - 4 << "\" y1=\"" << y << "\" x2=\"" << kMarginL
            << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (int t = 1; t <= iters; ++t) {
        const double x = xpix(t);
        out << "<line x1=\"" << x << "\" y1=\"" << kHeight - kMarginB << "\" x2=\"" << x
            << "\" y2=\"" << kHeight - kMarginB + 4 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << kHeight - kMarginB + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << t << "</text>\n";
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\" font-size=\"12\">iteration</text>\n";
    out << "<text x=\"16\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << kHeight / 2 << ")\">beta^2/alpha^2</text>\n";

    // min-max band as a closed polygon
    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (int t = 1; t <= iters; ++t) out << xpix(t) << "," << ypix(band[t - 1].min) << " ";
    for (int t = iters; t >= 1; --t) {
        const double mx = std::isfinite(band[t - 1].max) ? band[t - 1].max : band[t - 1].median;
        out << xpix(t) << "," << ypix(mx) << (t > 1 ? " " : "");
    }
    out << "\"/>\n";

    std::vector<double> xs, med, det, pop;
    for (int t = 1; t <= iters; ++t) {
        xs.push_back(xpix(t));
        med.push_back(ypix(band[t - 1].median));
        pop.push_back(ypix(0.0));  // population ratio is identically 0 past one step
        if (t - 1 < static_cast<int>(det_ratio.size())) det.push_back(ypix(det_ratio[t - 1]));
    }
    out << polyline(xs, med, "stroke=\"#08519c\" stroke-width=\"1.5\"");
    if (det.size() == xs.size())
        out << polyline(xs, det, "stroke=\"#d94801\" stroke-width=\"1.5\" "
                                 "stroke-dasharray=\"6 3\"");
    out << polyline(xs, pop, "stroke=\"#6a51a3\" stroke-width=\"1\" stroke-dasharray=\"2 3\"");

    out << "<text x=\"" << kWidth - kMarginR - 6 << "\" y=\"" << kMarginT + 14
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#08519c\">median (band: "
           "min-max)</text>\n";
    out << "<text x=\"" << kWidth - kMarginR - 6 << "\" y=\"" << kMarginT + 28
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#d94801\">deterministic</text>\n";
    out << "<text x=\"" << kWidth - kMarginR - 6 << "\" y=\"" << kMarginT + 42
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#6a51a3\">population</text>\n";
    out << "</svg>\n";
}

}  // namespace rank1am
