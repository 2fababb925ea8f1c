#include "phonobus/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace phonobus::io {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_double(values[i]);
    os_ << '\n';
}

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

struct Range {
    double lo = 0, hi = 1;
    void fix() {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

void frame(std::ostringstream& os, const std::string& title, const std::string& xl,
           const std::string& yl, Range xr, Range yr) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << esc(title) << "</text>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
       << "\" text-anchor=\"middle\">" << esc(xl) << "</text>\n"
       << "<text transform=\"translate(16," << kHeight / 2
       << ") rotate(-90)\" text-anchor=\"middle\">" << esc(yl) << "</text>\n";
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = kLeft + pw * i / 4.0, fy = kTop + ph * (1 - i / 4.0);
        os << "<text x=\"" << fx << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
           << num(xr.lo + (xr.hi - xr.lo) * i / 4.0) << "</text>\n";
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fy + 4 << "\" text-anchor=\"end\">"
           << num(yr.lo + (yr.hi - yr.lo) * i / 4.0) << "</text>\n";
    }
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<SvgSeries>& series) {
    Range xr{INFINITY, -INFINITY}, yr{INFINITY, -INFINITY};
    for (const auto& s : series) {
        for (double v : s.x)
            if (std::isfinite(v)) xr.lo = std::min(xr.lo, v), xr.hi = std::max(xr.hi, v);
        for (double v : s.y)
            if (std::isfinite(v)) yr.lo = std::min(yr.lo, v), yr.hi = std::max(yr.hi, v);
    }
    if (!std::isfinite(xr.lo)) xr = {0, 1};
    if (!std::isfinite(yr.lo)) yr = {0, 1};
    xr.fix();
    yr.fix();
    std::ostringstream os;
    frame(os, title, x_label, y_label, xr, yr);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = kPalette[k % 8];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            os << num(kLeft + pw * (s.x[i] - xr.lo) / (xr.hi - xr.lo)) << ','
               << num(kTop + ph * (1 - (s.y[i] - yr.lo) / (yr.hi - yr.lo))) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << kLeft + pw - 4 << "\" y=\"" << kTop + 14 + 14 * k
           << "\" text-anchor=\"end\" fill=\"" << colour << "\">" << esc(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_heatmap(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<double>& x,
                        const std::vector<double>& y, const std::vector<std::vector<double>>& z,
                        const std::vector<std::pair<double, double>>& markers) {
    Range xr{x.empty() ? 0 : x.front(), x.empty() ? 1 : x.back()};
    Range yr{y.empty() ? 0 : y.front(), y.empty() ? 1 : y.back()};
    xr.fix();
    yr.fix();
    double zlo = INFINITY, zhi = -INFINITY;
    for (const auto& row : z)
        for (double v : row)
            if (std::isfinite(v)) zlo = std::min(zlo, v), zhi = std::max(zhi, v);
    if (!(zhi > zlo)) zhi = zlo + 1;
    std::ostringstream os;
    frame(os, title, x_label, y_label, xr, yr);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const double cw = x.empty() ? pw : pw / x.size(), ch = y.empty() ? ph : ph / y.size();
    for (std::size_t iy = 0; iy < z.size() && iy < y.size(); ++iy) {
        for (std::size_t ix = 0; ix < z[iy].size() && ix < x.size(); ++ix) {
            const double v = z[iy][ix];
            const double u = std::isfinite(v) ? (v - zlo) / (zhi - zlo) : 0.0;
            const int r = static_cast<int>(255 * u), b = static_cast<int>(255 * (1 - u));
            os << "<rect x=\"" << num(kLeft + cw * ix) << "\" y=\""
               << num(kTop + ph - ch * (iy + 1)) << "\" width=\"" << num(cw + 0.3)
               << "\" height=\"" << num(ch + 0.3) << "\" fill=\"rgb(" << r << ",40," << b
               << ")\"/>\n";
        }
    }
    for (const auto& [mx, my] : markers) {
        os << "<circle cx=\"" << num(kLeft + pw * (mx - xr.lo) / (xr.hi - xr.lo)) << "\" cy=\""
           << num(kTop + ph * (1 - (my - yr.lo) / (yr.hi - yr.lo)))
           << "\" r=\"4\" fill=\"none\" stroke=\"white\" stroke-width=\"2\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace phonobus::io
