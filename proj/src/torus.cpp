#include "gdyn/torus.hpp"

#include <cmath>

namespace gdyn {

double wrap(double x, double period) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("wrap: period must be positive and finite");
    if (!std::isfinite(x))
        throw std::invalid_argument("wrap: non-finite value");
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    // fmod can land exactly on period after the correction when x is a tiny
    // negative number; fold that back to 0.
    if (r >= period) r -= period;
    return r;
}

double circle_dist(double a, double b, double period) {
    double d = wrap(a - b, period);
    return std::min(d, period - d);
}

double circle_dist(const TorusPoint& a, const TorusPoint& b) {
    if (a.period != b.period)
        throw std::invalid_argument("circle_dist: mismatched periods");
    return circle_dist(a.value, b.value, a.period);
}

TorusGrid::TorusGrid(int resolution, double period) : n_(resolution), period_(period) {
    if (resolution < 1)
        throw std::invalid_argument("TorusGrid: resolution must be >= 1");
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("TorusGrid: period must be positive and finite");
}

double TorusGrid::midpoint(int i) const {
    if (i < 0 || i >= n_)
        throw std::out_of_range("TorusGrid::midpoint: cell index out of range");
    return (i + 0.5) * period_ / n_;
}

std::vector<double> TorusGrid::midpoints() const {
    std::vector<double> xs(n_);
    for (int i = 0; i < n_; ++i) xs[i] = midpoint(i);
    return xs;
}

int TorusGrid::cell_of(double x) const {
    double w = wrap(x, period_);
    int i = static_cast<int>(std::floor(w / period_ * n_));
    // guard against w/period*n rounding up to n for w just below period
    if (i >= n_) i = n_ - 1;
    if (i < 0) i = 0;
    return i;
}

int NestedPartition::coarse_of(int fine_cell) const {
    if (fine_cell < 0 || fine_cell >= fine.resolution())
        throw std::out_of_range("NestedPartition::coarse_of: index out of range");
    return fine_cell / M;
}

NestedPartition nested_partition(int n, int M, double period) {
    if (n < 1 || M < 1)
        throw std::invalid_argument("nested_partition: n and M must be >= 1");
    return NestedPartition{TorusGrid(n, period), TorusGrid(n * M, period), M};
}

} // namespace gdyn
