#include "archimax/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "archimax/errors.hpp"

namespace archimax {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
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

}  // namespace

std::string svg_scatter_matrix(const Matrix& u, const std::vector<std::string>& names, std::size_t max_points) {
    const auto d = static_cast<std::size_t>(u.cols());
    if (d < 2) throw_invalid("scatter matrix needs at least two columns");
    const double cell = 120.0, pad = 10.0;
    const double size = static_cast<double>(d) * (cell + pad) + pad;
    const std::size_t n = std::min<std::size_t>(u.rows(), max_points);
    std::ostringstream out;
    out.precision(4);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double x0 = pad + static_cast<double>(c) * (cell + pad);
            const double y0 = pad + static_cast<double>(r) * (cell + pad);
            out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << cell << "\" height=\"" << cell
                << "\" fill=\"none\" stroke=\"#888\"/>\n";
            if (r == c) {
                const std::string label = r < names.size() ? names[r] : "x" + std::to_string(r + 1);
                out << "<text x=\"" << x0 + cell / 2 << "\" y=\"" << y0 + cell / 2
                    << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(label) << "</text>\n";
                continue;
            }
            out << "<g fill=\"" << kPalette[0] << "\" fill-opacity=\"0.4\">";
            for (std::size_t i = 0; i < n; ++i) {
                const double px = x0 + std::clamp(u(i, c), 0.0, 1.0) * cell;
                const double py = y0 + (1.0 - std::clamp(u(i, r), 0.0, 1.0)) * cell;
                out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"1\"/>";
            }
            out << "</g>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string svg_lambda_curves(const std::vector<LambdaCurve>& curves, const std::vector<std::string>& labels) {
    if (curves.empty() || curves.front().grid.empty()) throw_invalid("lambda plot needs at least one curve");
    const double width = 480.0, height = 320.0, margin = 40.0;
    double lo = 0.0;
    for (const auto& c : curves)
        for (double v : c.values) lo = std::min(lo, v);
    const auto& band_curve = curves.front();
    if (!band_curve.band.empty())
        for (std::size_t i = 0; i < band_curve.values.size(); ++i)
            lo = std::min(lo, band_curve.values[i] - 2.0 * std::sqrt(band_curve.band[i]));
    if (lo >= 0.0) lo = -1.0;
    auto sx = [&](double w) { return margin + w * (width - 2 * margin); };
    auto sy = [&](double v) { return margin + (v / lo) * (height - 2 * margin); };
    std::ostringstream out;
    out.precision(5);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\"" << sy(0)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(0) << "\" y2=\"" << sy(lo)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sx(0.5) << "\" y=\"" << height - 8 << "\" text-anchor=\"middle\" font-size=\"12\">w</text>\n";
    if (!band_curve.band.empty()) {
        out << "<polygon fill=\"#cccccc\" fill-opacity=\"0.6\" points=\"";
        for (std::size_t i = 0; i < band_curve.grid.size(); ++i)
            out << sx(band_curve.grid[i]) << "," << sy(band_curve.values[i] + 2.0 * std::sqrt(band_curve.band[i])) << " ";
        for (std::size_t i = band_curve.grid.size(); i-- > 0;)
            out << sx(band_curve.grid[i]) << "," << sy(band_curve.values[i] - 2.0 * std::sqrt(band_curve.band[i])) << " ";
        out << "\"/>\n";
    }
    for (std::size_t c = 0; c < curves.size(); ++c) {
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[c % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < curves[c].grid.size(); ++i) out << sx(curves[c].grid[i]) << "," << sy(curves[c].values[i]) << " ";
        out << "\"/>\n";
        const std::string label = c < labels.size() ? labels[c] : "curve " + std::to_string(c + 1);
        out << "<text x=\"" << width - margin << "\" y=\"" << margin + 14.0 * static_cast<double>(c)
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << kPalette[c % 5] << "\">" << escape(label)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace archimax
