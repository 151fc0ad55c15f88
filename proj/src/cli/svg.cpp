#include "mqmed/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mqmed::cli {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 60;

std::string fmt(double v, int prec = 2)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string tick(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Fixed categorical palette, cycled.
const char* palette(std::size_t i)
{
    static const char* colours[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
    return colours[i % 10];
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void open(std::ostringstream& os, const std::string& title)
{
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
       << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl)
{
    const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
    os << "<rect x=\"" << fmt(l) << "\" y=\"" << fmt(t) << "\" width=\"" << fmt(r - l) << "\" height=\"" << fmt(b - t)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        os << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(b + 16) << "\" text-anchor=\"middle\">" << tick(xv)
           << "</text>\n";
        os << "<text x=\"" << fmt(l - 6) << "\" y=\"" << fmt(f.py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << fmt((l + r) / 2) << "\" y=\"" << fmt(kHeight - 18) << "\" text-anchor=\"middle\">"
       << escape(xl) << "</text>\n";
    os << "<text x=\"18\" y=\"" << fmt((t + b) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << fmt((t + b) / 2) << ")\">" << escape(yl) << "</text>\n";
}

void range_guard(double& lo, double& hi)
{
    if (!(hi > lo)) {
        const double pad = std::max(1.0, std::abs(lo)) * 0.5;
        lo -= pad;
        hi += pad;
    }
}

}  // namespace

std::string stacked_area_svg(const std::vector<double>& x, const Eigen::MatrixXd& series,
                             const std::vector<std::string>& labels, const std::string& title,
                             const std::string& x_label, const std::string& y_label)
{
    const std::size_t n = x.size();
    const auto m = series.cols();
    Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m + 1);
    Eigen::MatrixXd neg = pos;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double v = series(r, j);
            pos(r, j + 1) = pos(r, j) + std::max(v, 0.0);
            neg(r, j + 1) = neg(r, j) + std::min(v, 0.0);
        }
    }
    Frame f{n ? x.front() : 0.0, n ? x.back() : 1.0, n ? neg.minCoeff() : 0.0, n ? pos.maxCoeff() : 1.0};
    range_guard(f.x0, f.x1);
    range_guard(f.y0, f.y1);

    std::ostringstream os;
    open(os, title);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (const Eigen::MatrixXd* band : {&pos, &neg}) {
            bool nonzero = false;
            for (std::size_t i = 0; i < n; ++i)
                nonzero = nonzero || (*band)(static_cast<Eigen::Index>(i), j + 1) != (*band)(static_cast<Eigen::Index>(i), j);
            if (!nonzero) continue;
            os << "<polygon fill=\"" << palette(static_cast<std::size_t>(j)) << "\" fill-opacity=\"0.85\" points=\"";
            for (std::size_t i = 0; i < n; ++i)
                os << fmt(f.px(x[i])) << ',' << fmt(f.py((*band)(static_cast<Eigen::Index>(i), j + 1))) << ' ';
            for (std::size_t i = n; i-- > 0;)
                os << fmt(f.px(x[i])) << ',' << fmt(f.py((*band)(static_cast<Eigen::Index>(i), j))) << ' ';
            os << "\"/>\n";
        }
    }
    if (f.y0 < 0.0 && f.y1 > 0.0)
        os << "<line x1=\"" << fmt(kLeft) << "\" x2=\"" << fmt(kWidth - kRight) << "\" y1=\"" << fmt(f.py(0.0))
           << "\" y2=\"" << fmt(f.py(0.0)) << "\" stroke=\"#444\" stroke-dasharray=\"4 3\"/>\n";
    axes(os, f, x_label, y_label);
    // Legend; long mode lists are truncated to keep the image readable.
    const std::size_t shown = std::min<std::size_t>(labels.size(), 20);
    for (std::size_t j = 0; j < shown; ++j) {
        const double y = kTop + 14.0 * static_cast<double>(j);
        os << "<rect x=\"" << fmt(kWidth - kRight + 10) << "\" y=\"" << fmt(y) << "\" width=\"10\" height=\"10\" fill=\""
           << palette(j) << "\"/>\n";
        os << "<text x=\"" << fmt(kWidth - kRight + 24) << "\" y=\"" << fmt(y + 9) << "\">" << escape(labels[j])
           << "</text>\n";
    }
    if (labels.size() > shown)
        os << "<text x=\"" << fmt(kWidth - kRight + 10) << "\" y=\"" << fmt(kTop + 14.0 * shown + 9) << "\">+"
           << labels.size() - shown << " more</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string heatmap_svg(const std::vector<double>& x, const std::vector<double>& y, const Eigen::MatrixXd& values,
                        const std::string& title, const std::string& x_label, const std::string& y_label)
{
    Frame f{x.empty() ? 0.0 : x.front(), x.empty() ? 1.0 : x.back(), y.empty() ? 0.0 : y.front(),
            y.empty() ? 1.0 : y.back()};
    range_guard(f.x0, f.x1);
    range_guard(f.y0, f.y1);
    const double vmax = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;

    // Cell edges at midpoints between samples.
    auto edges = [](const std::vector<double>& v) {
        std::vector<double> e(v.size() + 1);
        if (v.empty()) return e;
        if (v.size() == 1) {
            e[0] = v[0] - 0.5;
            e[1] = v[0] + 0.5;
            return e;
        }
        for (std::size_t i = 1; i < v.size(); ++i) e[i] = 0.5 * (v[i - 1] + v[i]);
        e[0] = v[0] - (e[1] - v[0]);
        e[v.size()] = v.back() + (v.back() - e[v.size() - 1]);
        return e;
    };
    const auto ex = edges(x), ey = edges(y);
    f.x0 = ex.front();
    f.x1 = ex.back();
    f.y0 = ey.front();
    f.y1 = ey.back();

    // Diverging map: blue for negative, red for positive, white at zero.
    auto colour = [&](double v) {
        const double s = vmax > 0.0 ? std::clamp(v / vmax, -1.0, 1.0) : 0.0;
        int r = 255, g = 255, b = 255;
        if (s >= 0) {
            g = b = static_cast<int>(std::lround(255.0 * (1.0 - s)));
        } else {
            r = g = static_cast<int>(std::lround(255.0 * (1.0 + s)));
        }
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
        return std::string(buf);
    };

    std::ostringstream os;
    open(os, title);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double xa = f.px(ex[i]), xb = f.px(ex[i + 1]);
            const double ya = f.py(ey[k + 1]), yb = f.py(ey[k]);
            os << "<rect x=\"" << fmt(xa) << "\" y=\"" << fmt(ya) << "\" width=\"" << fmt(xb - xa) << "\" height=\""
               << fmt(yb - ya) << "\" fill=\""
               << colour(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) << "\"/>\n";
        }
    }
    axes(os, f, x_label, y_label);
    const double bx = kWidth - kRight + 20;
    for (int k = 0; k < 20; ++k) {
        const double v = vmax * (1.0 - k / 9.5);
        os << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(kTop + 12.0 * k) << "\" width=\"16\" height=\"12\" fill=\""
           << colour(v) << "\"/>\n";
    }
    os << "<text x=\"" << fmt(bx + 22) << "\" y=\"" << fmt(kTop + 10) << "\">" << tick(vmax) << "</text>\n";
    os << "<text x=\"" << fmt(bx + 22) << "\" y=\"" << fmt(kTop + 240) << "\">" << tick(-vmax) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace mqmed::cli
