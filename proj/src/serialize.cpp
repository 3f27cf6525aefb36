#include "archimax/serialize.hpp"

#include <fstream>

#include "archimax/csv.hpp"
#include "archimax/errors.hpp"

namespace archimax {

namespace {

constexpr const char* kModelFormat = "archimax-model";
constexpr int kModelVersion = 1;

Json encode(const std::vector<double>& v) {
    Json arr = Json::array();
    for (double x : v) arr.push_back(format_double(x));
    return arr;
}

std::vector<double> decode(const Json& arr) {
    if (!arr.is_array()) throw_invalid("expected an array of numbers");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& x : arr) out.push_back(x.is_string() ? parse_double(x.get<std::string>()) : x.get<double>());
    return out;
}

Json encode(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()},
            {"data", encode(std::vector<double>(m.data(), m.data() + m.size()))}};
}

Matrix decode_matrix(const Json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
    auto data = decode(j.at("data"));
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw_invalid("matrix payload size mismatch");
    return Eigen::Map<Matrix>(data.data(), rows, cols);
}

template <class F>
auto guarded(F&& body) {
    try {
        return body();
    } catch (const Json::exception& e) {
        throw_invalid(std::string("malformed JSON document: ") + e.what());
    }
}

}  // namespace

Json to_json(const nn::GenerativeNet& net) {
    const auto& a = net.architecture();
    Json lineage = Json::array();
    for (auto s : net.lineage()) lineage.push_back(std::to_string(s));
    return {{"architecture",
             {{"input_dim", a.input_dim},
              {"hidden_width", a.hidden_width},
              {"output_dim", a.output_dim},
              {"hidden_layers", a.hidden_layers},
              {"batch_norm", a.batch_norm}}},
            {"head", nn::to_string(a.head)},
            {"weights", encode(net.parameters())},
            {"running_stats", encode(net.running_stats())},
            {"seed_lineage", lineage}};
}

nn::GenerativeNet net_from_json(const Json& j) {
    return guarded([&] {
        const auto& a = j.at("architecture");
        nn::Architecture arch{.input_dim = a.at("input_dim").get<std::size_t>(),
                              .hidden_width = a.at("hidden_width").get<std::size_t>(),
                              .output_dim = a.at("output_dim").get<std::size_t>(),
                              .hidden_layers = a.at("hidden_layers").get<std::size_t>(),
                              .head = nn::head_from_string(j.at("head").get<std::string>()),
                              .batch_norm = a.at("batch_norm").get<bool>()};
        std::vector<std::uint64_t> lineage;
        for (const auto& s : j.at("seed_lineage")) lineage.push_back(std::stoull(s.get<std::string>()));
        nn::GenerativeNet net(arch, lineage.empty() ? 0 : lineage.front());
        auto weights = decode(j.at("weights"));
        auto running = decode(j.at("running_stats"));
        if (weights.size() != net.parameter_count() || running.size() != net.running_stats().size())
            throw_invalid("network weights do not match the architecture");
        net.parameters() = std::move(weights);
        net.running_stats() = std::move(running);
        net.lineage() = std::move(lineage);
        return net;
    });
}

Json to_json(const SpectralModel& model) {
    Json j{{"kind", model.has_net() ? "net" : "pool"},
           {"pool_seed", std::to_string(model.pool_seed())},
           {"pool", encode(model.pool())}};
    if (model.has_net()) j["net"] = to_json(model.net());
    return j;
}

SpectralModel spectral_from_json(const Json& j) {
    return guarded([&] {
        Matrix pool = decode_matrix(j.at("pool"));
        if (j.at("kind").get<std::string>() == "net")
            return SpectralModel(net_from_json(j.at("net")), std::move(pool),
                                 std::stoull(j.at("pool_seed").get<std::string>()));
        return SpectralModel(std::move(pool));
    });
}

Json to_json(const RadialModel& model) {
    return {{"kind", "net"},
            {"d", model.d()},
            {"eval_samples", model.eval_samples()},
            {"pool_seed", std::to_string(model.pool_seed())},
            {"net", to_json(model.net())}};
}

RadialModel radial_from_json(const Json& j) {
    return guarded([&] {
        return RadialModel(net_from_json(j.at("net")), j.at("d").get<std::size_t>(),
                           j.at("eval_samples").get<std::size_t>(), std::stoull(j.at("pool_seed").get<std::string>()));
    });
}

Json to_json(const FiniteRadial& radial) {
    return {{"kind", "finite"},
            {"support", encode(radial.support)},
            {"probs", encode(radial.probs)},
            {"ratios", encode(radial.ratios)}};
}

FiniteRadial finite_radial_from_json(const Json& j) {
    return guarded([&] {
        FiniteRadial out{decode(j.at("support")), decode(j.at("probs")), decode(j.value("ratios", Json::array()))};
        if (out.support.empty() || out.support.size() != out.probs.size())
            throw_invalid("finite radial law: support and probabilities must match");
        return out;
    });
}

Json to_json(const ArchGenerator& g) { return {{"family", to_string(g.family)}, {"theta", g.theta}}; }

ArchGenerator arch_generator_from_json(const Json& j) {
    return guarded([&] {
        ArchGenerator g{family_from_string(j.at("family").get<std::string>()), j.at("theta").get<double>()};
        g.validate();
        return g;
    });
}

Json to_json(const NsdParams& p) {
    return {{"alpha", p.alpha}, {"rho", p.rho}, {"mc_samples", p.mc_samples}};
}

NsdParams nsd_from_json(const Json& j) {
    return guarded([&] {
        NsdParams p;
        p.alpha = j.at("alpha").get<std::vector<double>>();
        p.rho = j.at("rho").get<double>();
        p.mc_samples = j.value("mc_samples", p.mc_samples);
        p.validate();
        return p;
    });
}

Json to_json(const ArchimaxModel& model) {
    Json j{{"format", kModelFormat}, {"version", kModelVersion}, {"d", model.d}, {"metadata", model.metadata}};
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ArchGenerator>) {
                Json g = to_json(r);
                g["kind"] = "parametric";
                j["radial"] = g;
            } else {
                j["radial"] = to_json(r);
            }
        },
        model.radial);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, NsdParams>) {
                Json n = to_json(s);
                n["kind"] = "nsd";
                j["spectral"] = n;
            } else if constexpr (std::is_same_v<T, UniformSimplex>) {
                j["spectral"] = {{"kind", "uniform"}};
            } else {
                j["spectral"] = to_json(s);
            }
        },
        model.spectral);
    return j;
}

ArchimaxModel model_from_json(const Json& j) {
    return guarded([&] {
        if (j.value("format", std::string{}) != kModelFormat) throw_invalid("not an archimax model document");
        if (j.value("version", 0) != kModelVersion) throw_invalid("unsupported model version");
        ArchimaxModel m;
        m.d = j.at("d").get<std::size_t>();
        m.metadata = j.value("metadata", std::map<std::string, std::string>{});
        const auto& r = j.at("radial");
        const auto rk = r.at("kind").get<std::string>();
        if (rk == "net") m.radial = radial_from_json(r);
        else if (rk == "finite") m.radial = finite_radial_from_json(r);
        else if (rk == "parametric") m.radial = arch_generator_from_json(r);
        else throw_invalid("unknown radial kind '" + rk + "'");
        const auto& s = j.at("spectral");
        const auto sk = s.at("kind").get<std::string>();
        if (sk == "net" || sk == "pool") m.spectral = spectral_from_json(s);
        else if (sk == "nsd") m.spectral = nsd_from_json(s);
        else if (sk == "uniform") m.spectral = UniformSimplex{m.d};
        else throw_invalid("unknown spectral kind '" + sk + "'");
        m.validate();
        return m;
    });
}

Json to_json(const SynthSpec& spec) {
    return {{"generator", to_json(spec.generator)}, {"nsd", to_json(spec.nsd)}, {"n", spec.n}};
}

std::vector<Json> diagnostics_lines(const FitDiagnostics& diag) {
    std::vector<Json> lines;
    Json ev = Json::array();
    for (const auto& s : diag.ev_trace) ev.push_back({{"k", s.k}, {"statistic", s.statistic}, {"threshold", s.threshold}});
    lines.push_back({{"stage", "block_search"}, {"block_k", diag.block_k}, {"warning", diag.block_warning}, {"trace", ev}});
    for (const auto& s : diag.stages) {
        Json line{{"stage", s.stage}, {"alternation", s.alternation}, {"iterations", s.iterations},
                  {"final_loss", s.final_loss}};
        for (const auto& [k, v] : s.values) line[k] = v;
        lines.push_back(line);
    }
    lines.push_back({{"stage", "summary"},
                     {"block_k", diag.block_k},
                     {"cvm_trace", diag.cvm_trace},
                     {"final_moment_penalty", diag.final_moment_penalty},
                     {"final_kendall_mse", diag.final_kendall_mse},
                     {"generator_trainings", diag.generator_trainings},
                     {"stdf_trainings", diag.stdf_trainings}});
    return lines;
}

namespace {

void apply_train(const Json& j, nn::TrainConfig& t) {
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.adam_beta1 = j.value("adam_beta1", t.adam_beta1);
    t.adam_beta2 = j.value("adam_beta2", t.adam_beta2);
    t.adam_eps = j.value("adam_eps", t.adam_eps);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.max_iters = j.value("max_iters", t.max_iters);
    t.penalty_weight = j.value("penalty_weight", t.penalty_weight);
}

void apply_stdf(const Json& j, StdfTrainConfig& c) {
    apply_train(j, c.train);
    c.dirs_per_batch = j.value("dirs_per_batch", c.dirs_per_batch);
    c.train_eval_samples = j.value("train_eval_samples", c.train_eval_samples);
    c.eval_samples = j.value("eval_samples", c.eval_samples);
    c.hidden_width = j.value("hidden_width", c.hidden_width);
}

}  // namespace

FitConfig fit_config_from_json(const Json& j, FitConfig base) {
    try {
        if (!j.is_object()) throw_config("fit config must be a JSON object");
        if (j.contains("block")) {
            const auto& b = j["block"];
            if (b.contains("forced_k") && !b["forced_k"].is_null()) base.block.forced_k = b["forced_k"].get<std::size_t>();
            base.block.r_set = b.value("r_set", base.block.r_set);
            base.block.mc = b.value("mc", base.block.mc);
            base.block.replicates = b.value("replicates", base.block.replicates);
            base.block.min_blocks = b.value("min_blocks", base.block.min_blocks);
            base.block.quantile = b.value("quantile", base.block.quantile);
        }
        if (j.contains("n_r")) base.n_r = j["n_r"].get<std::size_t>();
        if (j.contains("n_z")) base.n_z = j["n_z"].get<std::size_t>();
        if (j.contains("stdf_init")) apply_stdf(j["stdf_init"], base.stdf_init);
        if (j.contains("stdf")) apply_stdf(j["stdf"], base.stdf);
        if (j.contains("generator")) {
            const auto& g = j["generator"];
            apply_train(g, base.generator.train);
            base.generator.tolerance = g.value("tolerance", base.generator.tolerance);
            base.generator.z_pool_factor = g.value("z_pool_factor", base.generator.z_pool_factor);
            base.generator.anneal_z = g.value("anneal_z", base.generator.anneal_z);
            base.generator.mean_weight = g.value("mean_weight", base.generator.mean_weight);
            base.generator.hidden_width = g.value("hidden_width", base.generator.hidden_width);
            base.generator.eval_samples = g.value("eval_samples", base.generator.eval_samples);
        }
        base.max_alternations = j.value("max_alternations", base.max_alternations);
        if (j.contains("cvm_tolerance")) {
            const auto& t = j["cvm_tolerance"];
            base.cvm_tolerance = t.is_string() && t.get<std::string>() == "inf" ? INFINITY : t.get<double>();
        }
        base.cvm_samples = j.value("cvm_samples", base.cvm_samples);
        base.cvm_mc = j.value("cvm_mc", base.cvm_mc);
        base.z_reservoir = j.value("z_reservoir", base.z_reservoir);
        base.sampler.nsd_mc = j.value("nsd_mc", base.sampler.nsd_mc);
        if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
    } catch (const Json::exception& e) {
        throw_config(std::string("bad fit config: ") + e.what());
    }
    base.validate();
    return base;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_invalid("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw_invalid("malformed JSON in '" + path + "': " + e.what());
    }
}

}  // namespace archimax
