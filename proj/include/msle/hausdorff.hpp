#pragma once

#include "msle/loewner.hpp"

namespace msle {

double point_segment_distance(Complex p, Complex a, Complex b);

// Two-sided Hausdorff distance between polyline sets: vertices of one side
// against the segments of the other. Throws EmptySet when a side is empty.
double hausdorff_distance(const HullPolyline& a, const HullPolyline& b);

} // namespace msle
