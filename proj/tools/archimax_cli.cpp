#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "archimax/errors.hpp"
#include "archimax/parallel.hpp"
#include "commands.hpp"

namespace {

int exit_code(archimax::ErrorKind kind) {
    switch (kind) {
        case archimax::ErrorKind::InvalidInput: return 1;
        case archimax::ErrorKind::Config: return 3;
        case archimax::ErrorKind::Numeric:
        case archimax::ErrorKind::TrainingDivergence:
        case archimax::ErrorKind::SamplerDegenerate: return 2;
    }
    return 2;
}

int report(const std::string& kind, const std::string& message, int code, const std::string& stage = {},
           const std::vector<double>& trace = {}) {
    nlohmann::json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    if (!stage.empty()) j["stage"] = stage;
    if (!trace.empty()) j["trace"] = trace;
    std::cerr << j.dump() << "\n";
    return code;
}

std::string join_args(int argc, char** argv) {
    std::string s = "archimax";
    for (int i = 1; i < argc; ++i) {
        s += ' ';
        s += argv[i];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace archimax::cli;
    CLI::App app{"Archimax copula inference and sampling"};
    app.require_subcommand(1, 1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    SynthOptions synth;
    auto* c_synth = app.add_subcommand("synth", "synthesize a parametric Archimax dataset");
    c_synth->add_option("--family", synth.family, "clayton, frank, joe or gumbel");
    c_synth->add_option("--theta", synth.theta, "generator parameter");
    c_synth->add_option("--tau", synth.tau, "Kendall tau of the generator");
    c_synth->add_option("--nsd-alpha", synth.alpha, "NSD alpha, comma separated")->delimiter(',')->required();
    c_synth->add_option("--rho", synth.rho, "NSD rho");
    c_synth->add_option("--n", synth.n, "observations");
    c_synth->add_option("--seed", synth.seed)->required();
    c_synth->add_option("--out", synth.out, "CSV output, - for stdout");
    c_synth->add_option("--truth", synth.truth, "truth JSON output");

    FitOptions fit;
    auto* c_fit = app.add_subcommand("fit", "fit an Archimax model");
    c_fit->add_option("--data", fit.data, "CSV input, - for stdin");
    c_fit->add_option("--config", fit.config, "JSON fit config");
    c_fit->add_option("--seed", fit.seed)->required();
    c_fit->add_option("--out", fit.out, "model JSON output");
    c_fit->add_option("--diagnostics", fit.diagnostics, "diagnostics JSONL output");
    c_fit->add_option("--max-alternations", fit.max_alternations);
    c_fit->add_option("--cvm-tolerance", fit.cvm_tolerance);
    c_fit->add_option("--block-k", fit.block_k, "force the number of blocks");
    c_fit->add_option("--stdf-iters", fit.stdf_iters);
    c_fit->add_option("--generator-iters", fit.generator_iters);
    c_fit->add_option("--n-r", fit.n_r);
    c_fit->add_option("--n-z", fit.n_z);

    SampleOptions sample;
    auto* c_sample = app.add_subcommand("sample", "sample a fitted model");
    c_sample->add_option("--model", sample.model)->required();
    c_sample->add_option("--n", sample.n);
    c_sample->add_option("--seed", sample.seed)->required();
    c_sample->add_option("--out", sample.out, "CSV output, - for stdout");

    EvalStdfOptions estdf;
    std::optional<std::uint64_t> estdf_seed;
    auto* c_estdf = app.add_subcommand("eval-stdf", "IRAE of the model stdf against a truth model");
    c_estdf->add_option("--model", estdf.model)->required();
    c_estdf->add_option("--truth", estdf.truth)->required();
    c_estdf->add_option("--mc", estdf.mc);
    c_estdf->add_option("--nsd-mc", estdf.nsd_mc);
    c_estdf->add_option("--seed", estdf_seed);
    c_estdf->add_option("--out", estdf.out);

    EvalLambdaOptions elam;
    auto* c_elam = app.add_subcommand("eval-lambda", "lambda curve of the model generator");
    c_elam->add_option("--model", elam.model)->required();
    c_elam->add_option("--truth", elam.truth);
    c_elam->add_option("--n", elam.n, "sample size for the variance band");
    c_elam->add_option("--out", elam.out);
    c_elam->add_option("--svg", elam.svg);

    GofOptions gof;
    std::optional<std::uint64_t> gof_seed;
    auto* c_gof = app.add_subcommand("gof", "Cramer-von Mises distance between two samples");
    c_gof->add_option("--a", gof.a)->required();
    c_gof->add_option("--b", gof.b)->required();
    c_gof->add_option("--mc", gof.mc);
    c_gof->add_option("--seed", gof_seed);
    c_gof->add_option("--out", gof.out);

    TransformOptions tr;
    auto* c_tr = app.add_subcommand("transform", "pseudo-observations or block maxima");
    c_tr->add_option("--data", tr.data);
    c_tr->add_option("--mode", tr.mode, "pseudo or block-maxima");
    c_tr->add_option("--blocks", tr.blocks, "number of blocks");
    c_tr->add_option("--out", tr.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("config", e.what(), 3);
    }

    const Provenance base{join_args(argc, argv), std::nullopt};
    try {
        archimax::set_thread_count(threads);
        if (*c_synth) run_synth(synth, {base.command_line, synth.seed});
        else if (*c_fit) run_fit(fit, {base.command_line, fit.seed});
        else if (*c_sample) run_sample(sample, {base.command_line, sample.seed});
        else if (*c_estdf) {
            estdf.seed = estdf_seed.value_or(0);
            run_eval_stdf(estdf, {base.command_line, estdf_seed});
        } else if (*c_elam) run_eval_lambda(elam, base);
        else if (*c_gof) {
            gof.seed = gof_seed.value_or(0);
            run_gof(gof, {base.command_line, gof_seed});
        } else if (*c_tr) run_transform(tr, base);
    } catch (const archimax::Error& e) {
        return report(archimax::to_string(e.kind()), e.what(), exit_code(e.kind()), e.stage(), e.trace());
    } catch (const std::exception& e) {
        return report("internal", e.what(), 2);
    }
    return 0;
}
