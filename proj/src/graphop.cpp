#include "gdyn/graphop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gdyn {

namespace {

// Length of the intersection of the arcs [a0, a0+la) and [b0, b0+lb) on the
// unit circle (la, lb <= 1).
double arc_overlap(double a0, double la, double b0, double lb) {
    double d = wrap(b0 - a0, 1.0);
    auto seg = [&](double s) {
        double lo = std::max(0.0, s);
        double hi = std::min(la, s + lb);
        return std::max(0.0, hi - lo);
    };
    return seg(d) + seg(d - 1.0);
}

// Sparse row of arc overlaps of coarse cell i (resolution n) against all cells
// of resolution G: list of (cell, length).
std::vector<std::pair<int, double>> overlap_row(int i, int n, int G) {
    std::vector<std::pair<int, double>> row;
    double lo = static_cast<double>(i) / n;
    double len = 1.0 / n;
    int first = static_cast<int>(std::floor(lo * G));
    int last = static_cast<int>(std::ceil((lo + len) * G));
    // arc_overlap already folds wrap images, so each cell must be visited at
    // most once even when the coarse cell spans the whole circle (n = 1)
    if (last - first >= G) last = first + G - 1;
    for (int a = first; a <= last; ++a) {
        int cell = ((a % G) + G) % G;
        double ov = arc_overlap(static_cast<double>(cell) / G, 1.0 / G, lo, len);
        if (ov > 0.0) row.emplace_back(cell, ov);
    }
    std::sort(row.begin(), row.end());
    return row;
}

} // namespace

Graphop::Graphop(TorusGrid grid, Variant v, std::string label)
    : grid_(grid), data_(std::make_shared<const Variant>(std::move(v))),
      label_(std::move(label)) {
    if (grid_.period() != kNodePeriod)
        throw std::invalid_argument("Graphop: node-space grid must have period 1");
    finalize();
}

void Graphop::finalize() {
    int G = grid_.resolution();
    degrees_.assign(G, 0.0);
    if (auto* g = std::get_if<GraphonData>(data_.get())) {
        for (int i = 0; i < G; ++i) {
            long double s = 0.0L;
            for (int j = 0; j < G; ++j) s += g->W[static_cast<size_t>(i) * G + j];
            degrees_[i] = static_cast<double>(s / G);
        }
    } else if (std::get_if<ShiftData>(data_.get())) {
        std::fill(degrees_.begin(), degrees_.end(), 1.0);
    } else {
        auto& mix = std::get<MixtureData>(*data_);
        for (auto& [c, part] : mix.parts)
            for (int i = 0; i < G; ++i) degrees_[i] += c * part.degrees()[i];
    }
    gamma_ = degrees_.empty() ? 0.0 : *std::max_element(degrees_.begin(), degrees_.end());
}

Graphop Graphop::graphon_matrix(const TorusGrid& grid, std::vector<double> W) {
    int G = grid.resolution();
    if (W.size() != static_cast<size_t>(G) * G)
        throw std::invalid_argument("graphon_matrix: matrix size does not match grid");
    double asym = 0.0;
    for (int i = 0; i < G; ++i)
        for (int j = i + 1; j < G; ++j) {
            double a = W[static_cast<size_t>(i) * G + j];
            double b = W[static_cast<size_t>(j) * G + i];
            asym = std::max(asym, std::fabs(a - b));
            double m = 0.5 * (a + b);
            W[static_cast<size_t>(i) * G + j] = m;
            W[static_cast<size_t>(j) * G + i] = m;
        }
    if (asym > 1e-9)
        std::fprintf(stderr,
                     "gdyn: graphon kernel asymmetry %.3g exceeds 1e-9; symmetrized\n",
                     asym);
    for (double& v : W) {
        if (!std::isfinite(v)) throw std::invalid_argument("graphon_matrix: non-finite entry");
        if (v < 0.0) {
            if (v < -1e-12)
                throw std::invalid_argument("graphon_matrix: negative kernel value");
            v = 0.0; // clamp quadrature dust
        }
    }
    return Graphop(grid, GraphonData{std::move(W)}, "graphon");
}

Graphop Graphop::graphon(const TorusGrid& grid,
                         const std::function<double(double, double)>& W) {
    int G = grid.resolution();
    std::vector<double> M(static_cast<size_t>(G) * G);
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j)
            M[static_cast<size_t>(i) * G + j] = W(grid.midpoint(i), grid.midpoint(j));
    return graphon_matrix(grid, std::move(M));
}

Graphop Graphop::atomic_shift(const TorusGrid& grid, double r) {
    Graphop g(grid, ShiftData{wrap(r, kNodePeriod)}, "atomic_shift");
    return g;
}

Graphop Graphop::arc_band(const TorusGrid& grid, double r, double halfwidth,
                          double height) {
    if (!(halfwidth > 0.0) || halfwidth > 0.5)
        throw std::invalid_argument("arc_band: halfwidth must lie in (0, 1/2]");
    if (height < 0.0) throw std::invalid_argument("arc_band: negative height");
    int G = grid.resolution();
    double rr = wrap(r, kNodePeriod);
    // circulant kernel: cell-averaged band indicator, exact in y
    std::vector<double> w(G);
    for (int k = 0; k < G; ++k) {
        // fibers sit at midpoints, so cell j seen from x_i spans the
        // difference window centered at (j-i)/G
        double win_lo = (static_cast<double>(k) - 0.5) / G;
        double m1 = arc_overlap(win_lo, 1.0 / G, rr - halfwidth, 2.0 * halfwidth);
        double m2 = arc_overlap(win_lo, 1.0 / G, -rr - halfwidth, 2.0 * halfwidth);
        w[k] = 0.5 * height * (m1 + m2) * G; // cell-averaged density value
    }
    std::vector<double> M(static_cast<size_t>(G) * G);
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) M[static_cast<size_t>(i) * G + j] = w[((j - i) % G + G) % G];
    std::ostringstream lbl;
    lbl << "arc_band(r=" << rr << ",eps=" << halfwidth << ",h=" << height << ")";
    Graphop g = graphon_matrix(grid, std::move(M));
    g.label_ = lbl.str();
    return g;
}

Graphop Graphop::mixture(std::vector<std::pair<double, Graphop>> parts) {
    if (parts.empty()) throw std::invalid_argument("mixture: no components");
    const TorusGrid& g0 = parts.front().second.grid();
    for (auto& [c, part] : parts) {
        if (c < 0.0)
            throw std::invalid_argument("mixture: negative coefficient breaks positivity");
        if (part.grid().resolution() != g0.resolution() || part.grid().period() != g0.period())
            throw std::invalid_argument("mixture: components on different grids");
    }
    return Graphop(g0, MixtureData{std::move(parts)}, "mixture");
}

FiberMeasure Graphop::fiber(int cell) const {
    int G = grid_.resolution();
    if (cell < 0 || cell >= G) throw std::out_of_range("Graphop::fiber: cell out of range");
    FiberMeasure out;
    if (auto* g = std::get_if<GraphonData>(data_.get())) {
        out.density.assign(g->W.begin() + static_cast<size_t>(cell) * G,
                           g->W.begin() + static_cast<size_t>(cell + 1) * G);
        out.total_mass = degrees_[cell];
    } else if (auto* s = std::get_if<ShiftData>(data_.get())) {
        double x = grid_.midpoint(cell);
        out.atoms.push_back({wrap(x + s->r, 1.0), 0.5});
        out.atoms.push_back({wrap(x - s->r, 1.0), 0.5});
        out.total_mass = 1.0;
    } else {
        auto& mix = std::get<MixtureData>(*data_);
        out.density.assign(G, 0.0);
        bool any_density = false;
        for (auto& [c, part] : mix.parts) {
            FiberMeasure fp = part.fiber(cell);
            for (auto& a : fp.atoms) out.atoms.push_back({a.position, c * a.weight});
            if (!fp.density.empty()) {
                any_density = true;
                for (int j = 0; j < G; ++j) out.density[j] += c * fp.density[j];
            }
            out.total_mass += c * fp.total_mass;
        }
        if (!any_density) out.density.clear();
    }
    return out;
}

std::optional<double> Graphop::check_c_regular(double tol) const {
    if (!(tol > 0.0)) throw std::invalid_argument("check_c_regular: tol must be > 0");
    auto [lo, hi] = std::minmax_element(degrees_.begin(), degrees_.end());
    double c = std::accumulate(degrees_.begin(), degrees_.end(), 0.0) / degrees_.size();
    if (std::max(*hi - c, c - *lo) <= tol) return c;
    return std::nullopt;
}

double Graphop::norm_1_to_1() const {
    if (auto c = check_c_regular(1e-9)) return *c;
    // upper estimate: test on normalized cell indicators v_j = G * 1_{cell j}
    int G = grid_.resolution();
    double best = 0.0;
    std::vector<double> v(G, 0.0);
    for (int j = 0; j < G; ++j) {
        v[j] = static_cast<double>(G);
        auto Av = apply_grid(v);
        long double nrm = 0.0L;
        for (double a : Av) nrm += std::fabs(a);
        best = std::max(best, static_cast<double>(nrm / G));
        v[j] = 0.0;
    }
    return best;
}

std::vector<double> Graphop::apply(const std::function<double(double)>& f) const {
    int G = grid_.resolution();
    std::vector<double> out(G, 0.0);
    if (auto* g = std::get_if<GraphonData>(data_.get())) {
        std::vector<double> fv(G);
        for (int j = 0; j < G; ++j) fv[j] = f(grid_.midpoint(j));
        for (int i = 0; i < G; ++i) {
            long double s = 0.0L;
            const double* row = g->W.data() + static_cast<size_t>(i) * G;
            for (int j = 0; j < G; ++j) s += row[j] * fv[j];
            out[i] = static_cast<double>(s / G);
        }
    } else if (auto* s = std::get_if<ShiftData>(data_.get())) {
        for (int i = 0; i < G; ++i) {
            double x = grid_.midpoint(i);
            out[i] = 0.5 * (f(wrap(x + s->r, 1.0)) + f(wrap(x - s->r, 1.0)));
        }
    } else {
        auto& mix = std::get<MixtureData>(*data_);
        for (auto& [c, part] : mix.parts) {
            auto partial = part.apply(f);
            for (int i = 0; i < G; ++i) out[i] += c * partial[i];
        }
    }
    return out;
}

double Graphop::apply_at(const std::function<double(double)>& f, double x) const {
    int G = grid_.resolution();
    if (auto* g = std::get_if<GraphonData>(data_.get())) {
        long double s = 0.0L;
        if (kernel_fn_) {
            for (int j = 0; j < G; ++j) {
                double y = grid_.midpoint(j);
                s += kernel_fn_(x, y) * f(y);
            }
        } else {
            const double* row = g->W.data() + static_cast<size_t>(grid_.cell_of(x)) * G;
            for (int j = 0; j < G; ++j) s += row[j] * f(grid_.midpoint(j));
        }
        return static_cast<double>(s / G);
    }
    if (auto* s = std::get_if<ShiftData>(data_.get()))
        return 0.5 * (f(wrap(x + s->r, 1.0)) + f(wrap(x - s->r, 1.0)));
    auto& mix = std::get<MixtureData>(*data_);
    double out = 0.0;
    for (auto& [c, part] : mix.parts) out += c * part.apply_at(f, x);
    return out;
}

std::vector<double> Graphop::apply_grid(const std::vector<double>& f) const {
    int G = grid_.resolution();
    if (static_cast<int>(f.size()) != G)
        throw std::invalid_argument("apply_grid: grid function size mismatch");
    std::vector<double> out(G, 0.0);
    if (auto* g = std::get_if<GraphonData>(data_.get())) {
        for (int i = 0; i < G; ++i) {
            long double s = 0.0L;
            const double* row = g->W.data() + static_cast<size_t>(i) * G;
            for (int j = 0; j < G; ++j) s += row[j] * f[j];
            out[i] = static_cast<double>(s / G);
        }
    } else if (auto* s = std::get_if<ShiftData>(data_.get())) {
        for (int i = 0; i < G; ++i) {
            double x = grid_.midpoint(i);
            out[i] = 0.5 * (f[grid_.cell_of(x + s->r)] + f[grid_.cell_of(x - s->r)]);
        }
    } else {
        auto& mix = std::get<MixtureData>(*data_);
        for (auto& [c, part] : mix.parts) {
            auto partial = part.apply_grid(f);
            for (int i = 0; i < G; ++i) out[i] += c * partial[i];
        }
    }
    return out;
}

std::vector<std::vector<double>> Graphop::mixing_matrix(int n) const {
    if (n < 1) throw std::invalid_argument("mixing_matrix: n must be >= 1");
    int G = grid_.resolution();
    std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
    if (auto* g = std::get_if<GraphonData>(data_.get())) {
        // M[i][j] = n * sum_{a,b} overlap(i,a) W[a][b] overlap(j,b) / (cell areas folded in)
        std::vector<std::vector<std::pair<int, double>>> R(n);
        for (int i = 0; i < n; ++i) R[i] = overlap_row(i, n, G);
        // intermediate: T[i][b] = sum_a overlap(i,a) * W[a][b]
        std::vector<std::vector<double>> T(n, std::vector<double>(G, 0.0));
        for (int i = 0; i < n; ++i)
            for (auto& [a, la] : R[i]) {
                const double* row = g->W.data() + static_cast<size_t>(a) * G;
                for (int b = 0; b < G; ++b) T[i][b] += la * row[b];
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                long double s = 0.0L;
                for (auto& [b, lb] : R[j]) s += T[i][b] * lb;
                M[i][j] = static_cast<double>(s * n);
            }
    } else if (auto* s = std::get_if<ShiftData>(data_.get())) {
        for (int i = 0; i < n; ++i) {
            double lo = static_cast<double>(i) / n, len = 1.0 / n;
            for (int j = 0; j < n; ++j) {
                double jlo = static_cast<double>(j) / n;
                double ov = arc_overlap(jlo, len, lo + s->r, len) +
                            arc_overlap(jlo, len, lo - s->r, len);
                if (ov != 0.0) M[i][j] = 0.5 * ov * n;
            }
        }
    } else {
        auto& mix = std::get<MixtureData>(*data_);
        for (auto& [c, part] : mix.parts) {
            auto Mp = part.mixing_matrix(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) M[i][j] += c * Mp[i][j];
        }
    }
    return M;
}

Graphop Graphop::with_kernel_fn(std::function<double(double, double)> kernel_fn) const {
    Graphop g = *this;
    g.kernel_fn_ = std::move(kernel_fn);
    return g;
}

const std::vector<double>& Graphop::kernel_matrix() const {
    static const std::vector<double> empty;
    if (auto* g = std::get_if<GraphonData>(data_.get())) return g->W;
    return empty;
}

bool Graphop::is_atomic() const { return std::holds_alternative<ShiftData>(*data_); }

std::string Graphop::describe() const { return label_; }

} // namespace gdyn
