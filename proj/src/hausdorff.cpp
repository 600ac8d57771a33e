#include "msle/hausdorff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msle/errors.hpp"

namespace msle {

double point_segment_distance(Complex p, Complex a, Complex b) {
    const Complex ab = b - a;
    const double len_sq = std::norm(ab);
    if (len_sq == 0.0) return std::abs(p - a);
    double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len_sq;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

namespace {

bool has_points(const HullPolyline& h) {
    for (const auto& line : h.polylines)
        if (!line.empty()) return true;
    return false;
}

double point_to_set(Complex p, const HullPolyline& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& line : set.polylines) {
        if (line.empty()) continue;
        if (line.size() == 1) {
            best = std::min(best, std::abs(p - line[0]));
            continue;
        }
        for (std::size_t i = 0; i + 1 < line.size(); ++i)
            best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
    }
    return best;
}

double directed(const HullPolyline& from, const HullPolyline& to) {
    double worst = 0.0;
    for (const auto& line : from.polylines)
        for (const Complex& p : line) worst = std::max(worst, point_to_set(p, to));
    return worst;
}

} // namespace

double hausdorff_distance(const HullPolyline& a, const HullPolyline& b) {
    if (!has_points(a) || !has_points(b))
        throw EmptySet("hausdorff distance of an empty set");
    return std::max(directed(a, b), directed(b, a));
}

} // namespace msle
