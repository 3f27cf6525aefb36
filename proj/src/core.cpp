#include "archimax/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "archimax/errors.hpp"
#include "archimax/parallel.hpp"
#include "archimax/random.hpp"

namespace archimax {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::TrainingDivergence: return "training-divergence";
        case ErrorKind::SamplerDegenerate: return "sampler-degenerate";
        case ErrorKind::Config: return "config";
    }
    return "unknown";
}

void throw_invalid(const std::string& message) { throw Error(ErrorKind::InvalidInput, message); }
void throw_numeric(const std::string& message) { throw Error(ErrorKind::Numeric, message); }
void throw_config(const std::string& message) { throw Error(ErrorKind::Config, message); }
void throw_degenerate(const std::string& message) {
    throw Error(ErrorKind::SamplerDegenerate, message);
}
void throw_divergence(const std::string& message, std::vector<double> trace) {
    Error e(ErrorKind::TrainingDivergence, message);
    e.set_trace(std::move(trace));
    throw e;
}

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() > 0 && values_.cols() < 2) throw_invalid("data dimension must be at least 2");
    if (!values_.allFinite()) throw_invalid("data contains non-finite entries");
}

PseudoObservations::PseudoObservations(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1) throw_invalid("pseudo-observations must have at least one row");
    if (values_.cols() < 2) throw_invalid("pseudo-observations need dimension at least 2");
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        double v = values_.data()[i];
        if (!(v > 0.0 && v <= 1.0)) throw_invalid("pseudo-observations must lie in (0,1]");
    }
}

KendallSample KendallSample::sorted_descending() const {
    std::vector<std::size_t> idx(w.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    KendallSample out;
    out.sorted_desc = true;
    for (auto i : idx) {
        out.w.push_back(w[i]);
        out.p.push_back(p[i]);
    }
    return out;
}

PseudoObservations rank_normalize(const DataMatrix& data) {
    const std::size_t n = data.n(), d = data.d();
    if (n == 0) throw_invalid("rank_normalize on empty matrix");
    Matrix u(n, d);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = data.values()(i, j);
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n; ++i) {
            auto le = std::upper_bound(sorted.begin(), sorted.end(), col[i]) - sorted.begin();
            u(i, j) = static_cast<double>(le) / static_cast<double>(n);
        }
    }
    return PseudoObservations(std::move(u));
}

namespace {

inline bool dominated(const double* row, const double* q, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j)
        if (row[j] > q[j]) return false;
    return true;
}

}  // namespace

double empirical_copula(const PseudoObservations& u, std::span<const double> query) {
    if (query.size() != u.d()) throw_invalid("empirical_copula: query dimension mismatch");
    const std::size_t n = u.n(), d = u.d();
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (dominated(u.values().data() + i * d, query.data(), d)) ++count;
    return static_cast<double>(count) / static_cast<double>(n);
}

std::vector<double> empirical_copula_batch(const Matrix& u, const Matrix& queries) {
    if (u.cols() != queries.cols()) throw_invalid("empirical_copula: query dimension mismatch");
    const std::size_t n = u.rows(), d = u.cols(), m = queries.rows();
    std::vector<double> out(m);
    parallel_for(m, [&](std::size_t q) {
        const double* qq = queries.data() + q * d;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (dominated(u.data() + i * d, qq, d)) ++count;
        out[q] = static_cast<double>(count) / static_cast<double>(n);
    });
    return out;
}

KendallSample empirical_kendall(const PseudoObservations& u) {
    const std::size_t n = u.n(), d = u.d();
    if (n < 2) throw_invalid("empirical_kendall requires n >= 2");
    const double* data = u.values().data();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ui = data + i * d;
        std::size_t count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double* uk = data + k * d;
            bool below = true;
            for (std::size_t j = 0; j < d; ++j) {
                if (!(uk[j] < ui[j])) {
                    below = false;
                    break;
                }
            }
            if (below) ++count;
        }
        w[i] = static_cast<double>(count) / static_cast<double>(n + 1);
    }
    std::sort(w.begin(), w.end(), std::greater<>());
    KendallSample out;
    out.sorted_desc = true;
    const double mass = 1.0 / static_cast<double>(n);
    for (double v : w) {
        if (!out.w.empty() && out.w.back() == v) {
            out.p.back() += mass;
        } else {
            out.w.push_back(v);
            out.p.push_back(mass);
        }
    }
    return out;
}

std::vector<double> equispace_kendall(const KendallSample& k, std::size_t n_r, std::size_t n_z) {
    if (k.w.empty()) throw_invalid("equispace_kendall on empty Kendall sample");
    if (n_r == 0 || n_z == 0) throw_invalid("equispace_kendall requires n_r, n_z >= 1");
    if (k.w.size() != k.p.size()) throw_invalid("Kendall sample w/p size mismatch");

    // Merge equal atoms, ascending order.
    std::vector<std::size_t> idx(k.w.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return k.w[a] < k.w[b]; });
    std::vector<double> atoms, mass;
    for (auto i : idx) {
        if (!atoms.empty() && atoms.back() == k.w[i]) {
            mass.back() += k.p[i];
        } else {
            atoms.push_back(k.w[i]);
            mass.push_back(k.p[i]);
        }
    }
    double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0)) throw_invalid("Kendall sample has no mass");

    // Quantile nodes sit at the cumulative-mass midpoint of each atom.
    std::vector<double> nodes(atoms.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        nodes[i] = (cum + 0.5 * mass[i]) / total;
        cum += mass[i];
    }

    const std::size_t m = n_r * n_z;
    std::vector<double> out(m);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double q = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        double v;
        if (q <= nodes.front()) {
            v = atoms.front();
        } else if (q >= nodes.back()) {
            v = atoms.back();
        } else {
            while (nodes[seg + 1] < q) ++seg;
            double t = (q - nodes[seg]) / (nodes[seg + 1] - nodes[seg]);
            v = atoms[seg] + t * (atoms[seg + 1] - atoms[seg]);
        }
        out[i] = v;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

DataMatrix block_maxima(const DataMatrix& data, std::size_t k) {
    const std::size_t n = data.n(), d = data.d();
    if (k == 0 || k > n) throw_invalid("block_maxima: block count must be in [1, n]");
    const std::size_t size = n / k;
    Matrix m(k, d);
    for (std::size_t b = 0; b < k; ++b) {
        for (std::size_t j = 0; j < d; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = b * size; i < (b + 1) * size; ++i) best = std::max(best, data.values()(i, j));
            m(b, j) = best;
        }
    }
    return DataMatrix(std::move(m));
}

double ev_dependence_stat(const PseudoObservations& u, unsigned r, std::size_t mc,
                          std::uint64_t seed) {
    if (u.n() < 2) throw_invalid("ev_dependence_stat requires n >= 2");
    if (r < 2) throw_invalid("ev_dependence_stat exponent must be >= 2");
    if (mc == 0) throw_invalid("ev_dependence_stat requires mc >= 1");
    const std::size_t d = u.d();
    Rng rng = make_rng(seed, r);
    Matrix q(mc, d), qr(mc, d);
    const double inv_r = 1.0 / static_cast<double>(r);
    for (std::size_t i = 0; i < mc; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double v = uniform_open(rng);
            q(i, j) = v;
            qr(i, j) = std::pow(v, inv_r);
        }
    }
    auto c = empirical_copula_batch(u.values(), q);
    auto cr = empirical_copula_batch(u.values(), qr);
    double acc = 0.0;
    for (std::size_t i = 0; i < mc; ++i) {
        double diff = c[i] - std::pow(cr[i], static_cast<double>(r));
        acc += diff * diff;
    }
    return acc / static_cast<double>(mc);
}

namespace {

double max_ev_stat(const PseudoObservations& u, const std::vector<unsigned>& r_set, std::size_t mc,
                   std::uint64_t seed) {
    double best = 0.0;
    for (unsigned r : r_set) best = std::max(best, ev_dependence_stat(u, r, mc, seed));
    return best;
}

}  // namespace

BlockSearchResult select_block_size(const DataMatrix& data, const std::vector<unsigned>& r_set,
                                    const std::function<double(std::size_t)>& threshold,
                                    const BlockSearchOptions& options) {
    const std::size_t n = data.n();
    if (n < 4) throw_invalid("select_block_size requires n >= 4");
    if (r_set.empty()) throw_invalid("select_block_size requires a non-empty exponent set");
    std::vector<std::size_t> ks;
    for (std::size_t k = n; k >= 1; --k) {
        if (n % k != 0) continue;
        if (k < options.min_blocks && !ks.empty()) break;
        ks.push_back(k);
    }
    BlockSearchResult result;
    for (std::size_t k : ks) {
        DataMatrix bm = block_maxima(data, k);
        PseudoObservations u = rank_normalize(bm);
        double stat = max_ev_stat(u, r_set, options.mc, derive_seed(options.seed, k));
        double thr = threshold(k);
        result.trace.push_back({k, stat, thr});
        if (stat < thr) {
            result.k = k;
            return result;
        }
    }
    result.k = ks.back();
    result.warning = true;
    return result;
}

BlockSearchResult select_block_size(const DataMatrix& data, const std::vector<unsigned>& r_set,
                                    double threshold, const BlockSearchOptions& options) {
    return select_block_size(
        data, r_set, [threshold](std::size_t) { return threshold; }, options);
}

double calibrate_ev_threshold(std::size_t n, std::size_t d, const std::vector<unsigned>& r_set,
                              std::size_t mc, std::size_t replicates, std::uint64_t seed,
                              double quantile) {
    if (n < 2 || d < 2 || replicates == 0) throw_invalid("calibrate_ev_threshold: bad arguments");
    std::vector<double> stats;
    stats.reserve(replicates);
    for (std::size_t b = 0; b < replicates; ++b) {
        Rng rng = make_rng(seed, 1000003 * n + b);
        Matrix x(n, d);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform_open(rng);
        PseudoObservations u = rank_normalize(DataMatrix(std::move(x)));
        stats.push_back(max_ev_stat(u, r_set, mc, derive_seed(seed, 7 * b + 1)));
    }
    std::sort(stats.begin(), stats.end());
    double pos = quantile * static_cast<double>(stats.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, stats.size() - 1);
    double t = pos - static_cast<double>(lo);
    return stats[lo] + t * (stats[hi] - stats[lo]);
}

double kendall_tau(const PseudoObservations& u, std::size_t j, std::size_t k) {
    const std::size_t n = u.n();
    if (n < 2) throw_invalid("kendall_tau requires n >= 2");
    if (j >= u.d() || k >= u.d()) throw_invalid("kendall_tau: column out of range");
    const Matrix& v = u.values();
    long long score = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double dx = v(a, j) - v(b, j), dy = v(a, k) - v(b, k);
            double s = dx * dy;
            if (s > 0) ++score;
            else if (s < 0) --score;
        }
    }
    return static_cast<double>(score) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace archimax
