#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phonobus::io {

// Shortest round-trip decimal with 17 significant digits, '.' separator,
// independent of the global locale.
std::string format_double(double x);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);

private:
    std::ostream& os_;
};

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal line plot.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<SvgSeries>& series);

// Heat map of z[iy][ix] over the x/y grids, with optional marker points.
std::string svg_heatmap(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<double>& x,
                        const std::vector<double>& y, const std::vector<std::vector<double>>& z,
                        const std::vector<std::pair<double, double>>& markers = {});

}  // namespace phonobus::io
