#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "archimax/core.hpp"
#include "archimax/csv.hpp"
#include "archimax/errors.hpp"
#include "archimax/metrics.hpp"
#include "archimax/parametric.hpp"
#include "archimax/pipeline.hpp"
#include "archimax/sampler.hpp"
#include "archimax/serialize.hpp"
#include "archimax/svg.hpp"

#ifndef ARCHIMAX_VERSION
#define ARCHIMAX_VERSION "0.0.0"
#endif

namespace archimax::cli {

std::string Provenance::line() const {
    std::string s = std::string("archimax ") + ARCHIMAX_VERSION + " | command: " + command_line + " | seed: ";
    s += seed ? std::to_string(*seed) : std::string("none");
    return s;
}

namespace {

Json provenance_json(const Provenance& p) {
    Json j{{"tool", "archimax"}, {"version", ARCHIMAX_VERSION}, {"command", p.command_line}};
    j["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
    return j;
}

/// Writes `body` to `path`, or to stdout for "-".
void write_text(const std::string& path, const std::string& body) {
    if (path == "-") {
        std::cout << body;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_invalid("cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw_invalid("write to '" + path + "' failed");
}

CsvTable read_table(const std::string& path) {
    if (path == "-") return read_csv(std::cin);
    return read_csv_file(path);
}

void write_table(const std::string& path, const CsvTable& table, const Provenance& p) {
    std::ostringstream out;
    write_csv(out, table, {p.line()});
    write_text(path, out.str());
}

void write_json(const std::string& path, Json j, const Provenance& p) {
    j["provenance"] = provenance_json(p);
    write_text(path, j.dump(2) + "\n");
}

CsvTable table_of(const Matrix& m, std::vector<std::string> columns) {
    return {std::move(columns), m};
}

std::vector<std::string> model_columns(const ArchimaxModel& model) {
    auto it = model.metadata.find("columns");
    if (it != model.metadata.end()) {
        std::vector<std::string> names;
        std::stringstream ss(it->second);
        for (std::string item; std::getline(ss, item, ',');) names.push_back(item);
        if (names.size() == model.d) return names;
    }
    return default_column_names(model.d);
}

std::shared_ptr<const Generator> model_generator(const ArchimaxModel& model) {
    return std::visit(
        [&](const auto& r) -> std::shared_ptr<const Generator> {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, RadialModel>) return std::make_shared<WilliamsonGenerator>(r.generator());
            else if constexpr (std::is_same_v<T, FiniteRadial>)
                return std::make_shared<WilliamsonGenerator>(r.generator(model.d));
            else return std::make_shared<ParametricGenerator>(r);
        },
        model.radial);
}

StdfFunction model_stdf(const ArchimaxModel& model, std::size_t nsd_mc, std::uint64_t seed) {
    return std::visit(
        [&](const auto& s) -> StdfFunction {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SpectralModel>) {
                auto m = std::make_shared<SpectralModel>(s);
                return [m](std::span<const double> x) { return m->stdf(x); };
            } else if constexpr (std::is_same_v<T, NsdParams>) {
                NsdParams params = s;
                params.mc_samples = nsd_mc;
                auto f = std::make_shared<NsdStdf>(params, seed);
                return [f](std::span<const double> x) { return (*f)(x); };
            } else {
                return [](std::span<const double> x) {
                    double acc = 0.0;
                    for (double v : x) acc += v;
                    return acc;
                };
            }
        },
        model.spectral);
}

ArchimaxModel read_model(const std::string& path) { return model_from_json(read_json_file(path)); }

}  // namespace

void run_synth(const SynthOptions& o, const Provenance& p) {
    if (o.theta.has_value() == o.tau.has_value()) throw_config("synth needs exactly one of --theta and --tau");
    if (o.alpha.empty()) throw_config("synth needs --nsd-alpha");
    SynthSpec spec;
    try {
        const Family family = family_from_string(o.family);
        spec = {ArchGenerator{family, o.theta ? *o.theta : theta_from_tau(family, *o.tau)}, NsdParams{o.alpha, o.rho},
                o.n};
        spec.generator.validate();
        spec.nsd.validate();
    } catch (const Error& e) {
        throw_config(std::string("synth: ") + e.what());
    }
    SynthResult result = synth_dataset(spec, o.seed);
    write_table(o.out, table_of(result.data.values(), default_column_names(spec.nsd.d())), p);
    std::string truth = o.truth;
    if (truth.empty() && o.out != "-") truth = o.out + ".truth.json";
    if (!truth.empty()) {
        Json j = to_json(result.truth);
        j["synth"] = to_json(spec);
        write_json(truth, j, p);
    }
}

void run_fit(const FitOptions& o, const Provenance& p) {
    FitConfig config;
    if (!o.config.empty()) config = fit_config_from_json(read_json_file(o.config), config);
    config.seed = o.seed;
    if (o.max_alternations) config.max_alternations = *o.max_alternations;
    if (o.cvm_tolerance) config.cvm_tolerance = *o.cvm_tolerance;
    if (o.block_k) config.block.forced_k = *o.block_k;
    if (o.stdf_iters) config.stdf.train.max_iters = *o.stdf_iters;
    if (o.generator_iters) config.generator.train.max_iters = *o.generator_iters;
    if (o.n_r) config.n_r = *o.n_r;
    if (o.n_z) config.n_z = *o.n_z;

    const CsvTable table = read_table(o.data);
    const DataMatrix data(table.values);
    FitDiagnostics diag;
    auto write_diagnostics = [&] {
        if (o.diagnostics.empty()) return;
        std::string body = Json{{"provenance", provenance_json(p)}}.dump() + "\n";
        for (const Json& line : diagnostics_lines(diag)) body += line.dump() + "\n";
        write_text(o.diagnostics, body);
    };
    FitResult result = [&] {
        try {
            return fit(data, config, &diag);
        } catch (...) {
            write_diagnostics();
            throw;
        }
    }();
    std::string columns;
    for (std::size_t j = 0; j < table.columns.size(); ++j) columns += (j ? "," : "") + table.columns[j];
    result.model.metadata["columns"] = columns;
    write_diagnostics();
    write_json(o.out.empty() ? "-" : o.out, to_json(result.model), p);
}

void run_sample(const SampleOptions& o, const Provenance& p) {
    const ArchimaxModel model = read_model(o.model);
    const Matrix u = sample_archimax(model, o.n, o.seed);
    write_table(o.out, table_of(u, model_columns(model)), p);
}

void run_eval_stdf(const EvalStdfOptions& o, const Provenance& p) {
    const ArchimaxModel model = read_model(o.model);
    const ArchimaxModel truth = read_model(o.truth);
    if (model.d != truth.d) throw_invalid("eval-stdf: model and truth dimensions differ");
    const IraeResult r = irae(model_stdf(truth, o.nsd_mc, derive_seed(o.seed, 1)),
                              model_stdf(model, o.nsd_mc, derive_seed(o.seed, 2)), model.d, o.mc,
                              derive_seed(o.seed, 3));
    Matrix row(1, 4);
    row << r.value, static_cast<double>(r.excluded), static_cast<double>(o.mc), static_cast<double>(model.d);
    write_table(o.out, table_of(row, {"irae", "excluded", "mc", "d"}), p);
}

void run_eval_lambda(const EvalLambdaOptions& o, const Provenance& p) {
    const ArchimaxModel model = read_model(o.model);
    const auto grid = default_lambda_grid();
    std::vector<LambdaCurve> curves{lambda_map(*model_generator(model), grid, o.n)};
    std::vector<std::string> labels{"model"};
    std::vector<std::string> columns{"w", "lambda"};
    if (o.n > 0) columns.push_back("band_variance_approx");
    std::vector<std::string> comments{p.line()};
    if (!o.truth.empty()) {
        curves.push_back(lambda_map(*model_generator(read_model(o.truth)), grid));
        labels.push_back("truth");
        columns.push_back("lambda_truth");
        comments.push_back("lambda_mse: " + format_double(lambda_mse(curves[0], curves[1])));
    }
    Matrix m(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Eigen::Index c = 0;
        const auto r = static_cast<Eigen::Index>(i);
        m(r, c++) = grid[i];
        m(r, c++) = curves[0].values[i];
        if (o.n > 0) m(r, c++) = curves[0].band[i];
        if (curves.size() > 1) m(r, c++) = curves[1].values[i];
    }
    std::ostringstream out;
    write_csv(out, table_of(m, columns), comments);
    write_text(o.out, out.str());
    if (!o.svg.empty()) write_text(o.svg, "<!-- " + p.line() + " -->\n" + svg_lambda_curves(curves, labels));
}

void run_gof(const GofOptions& o, const Provenance& p) {
    if (o.a == "-" && o.b == "-") throw_config("gof: at most one of --a and --b may read stdin");
    const CsvTable a = read_table(o.a);
    const CsvTable b = read_table(o.b);
    if (a.values.cols() != b.values.cols()) throw_invalid("gof: column counts differ");
    const double distance = cvm(a.values, b.values, o.mc, o.seed);
    Matrix row(1, 4);
    row << distance, static_cast<double>(a.values.rows()), static_cast<double>(b.values.rows()),
        static_cast<double>(o.mc);
    write_table(o.out, table_of(row, {"cvm", "n_a", "n_b", "mc"}), p);
}

void run_transform(const TransformOptions& o, const Provenance& p) {
    const CsvTable table = read_table(o.data);
    const DataMatrix data(table.values);
    Matrix out;
    if (o.mode == "pseudo") {
        out = rank_normalize(data).values();
    } else if (o.mode == "block-maxima") {
        if (!o.blocks) throw_config("transform --mode block-maxima needs --blocks");
        out = block_maxima(data, *o.blocks).values();
    } else {
        throw_config("unknown transform mode '" + o.mode + "'");
    }
    write_table(o.out, table_of(out, table.columns), p);
}

}  // namespace archimax::cli
