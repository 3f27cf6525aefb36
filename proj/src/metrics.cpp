#include "archimax/metrics.hpp"

#include <cmath>
#include <ostream>

#include "archimax/core.hpp"
#include "archimax/csv.hpp"
#include "archimax/errors.hpp"
#include "archimax/random.hpp"

namespace archimax {

double cvm(const Matrix& a, const Matrix& b, std::size_t mc, std::uint64_t seed) {
    if (a.cols() != b.cols()) throw_invalid("cvm: dimension mismatch");
    if (a.rows() == 0 || b.rows() == 0) throw_invalid("cvm: empty sample set");
    if (mc == 0) throw_invalid("cvm: mc must be positive");
    const Matrix ua = rank_normalize(DataMatrix(a)).values();
    const Matrix ub = rank_normalize(DataMatrix(b)).values();
    Rng rng = make_rng(seed, 0x63766d);
    Matrix q(mc, a.cols());
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = uniform_open(rng);
    const auto ca = empirical_copula_batch(ua, q);
    const auto cb = empirical_copula_batch(ub, q);
    double acc = 0.0;
    for (std::size_t i = 0; i < mc; ++i) acc += (ca[i] - cb[i]) * (ca[i] - cb[i]);
    return acc / static_cast<double>(mc);
}

IraeResult irae(const StdfFunction& truth, const StdfFunction& estimate, std::size_t d, std::size_t mc,
                std::uint64_t seed) {
    if (d < 2) throw_invalid("irae: d must be at least 2");
    if (mc == 0) throw_invalid("irae: mc must be positive");
    Rng rng = make_rng(seed, 0x69726165);
    IraeResult out{0.0, 0};
    std::size_t used = 0;
    for (std::size_t k = 0; k < mc; ++k) {
        auto x = uniform_simplex(d, rng);
        const double lt = truth(x);
        if (!(lt > 0.0)) {
            ++out.excluded;
            continue;
        }
        out.value += std::abs(lt - estimate(x)) / lt;
        ++used;
    }
    if (used == 0) throw_numeric("irae: true stdf vanished at every point");
    out.value /= static_cast<double>(used);
    return out;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid(99);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 0.01 * static_cast<double>(i + 1);
    return grid;
}

double lambda_variance(double w, std::size_t n) {
    if (n == 0) throw_invalid("lambda_variance requires n >= 1");
    if (!(w > 0.0 && w <= 1.0)) throw_invalid("lambda_variance requires w in (0,1]");
    return w * (w - std::log(w) - 1.0) / static_cast<double>(n);
}

LambdaCurve lambda_map(const Generator& phi, const std::vector<double>& grid, std::size_t n) {
    LambdaCurve out;
    out.grid = grid;
    out.values.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        if (!(w > 0.0 && w < 1.0)) throw_invalid("lambda_map grid must lie inside (0,1)");
        if (i > 0 && !(w > grid[i - 1])) throw_invalid("lambda_map grid must be strictly increasing");
        const double x = phi.inverse(w);
        out.values.push_back(phi.d1(x) * x);
        if (n > 0) out.band.push_back(lambda_variance(w, n));
    }
    return out;
}

double lambda_mse(const LambdaCurve& estimate, const LambdaCurve& truth) {
    if (estimate.grid.size() != truth.grid.size() || estimate.grid.empty())
        throw_invalid("lambda_mse: grid mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.grid.size(); ++i) {
        if (std::abs(estimate.grid[i] - truth.grid[i]) > 1e-12) throw_invalid("lambda_mse: grid mismatch");
        const double diff = estimate.values[i] - truth.values[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(truth.grid.size());
}

void write_lambda_csv(std::ostream& out, const LambdaCurve& curve, const std::vector<std::string>& comments) {
    CsvTable table;
    table.columns = {"w", "lambda", "band_variance_approx"};
    table.values.resize(curve.grid.size(), 3);
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        table.values(i, 0) = curve.grid[i];
        table.values(i, 1) = curve.values[i];
        table.values(i, 2) = curve.band.empty() ? std::nan("") : curve.band[i];
    }
    write_csv(out, table, comments);
}

}  // namespace archimax
