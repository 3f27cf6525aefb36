#include <cmath>
#include <fstream>

#include "doctest.h"

#include "archimax/errors.hpp"
#include "archimax/parametric.hpp"
#include "archimax/serialize.hpp"

using namespace archimax;

namespace {

Json round(const Json& j) { return Json::parse(j.dump()); }

}  // namespace

TEST_CASE("network round trip is value exact") {
    nn::GenerativeNet net(default_spectral_architecture(4), 17);
    for (double& p : net.parameters()) p *= 1.0 / 3.0;
    nn::GenerativeNet back = net_from_json(round(to_json(net)));
    CHECK(back.parameters() == net.parameters());
    CHECK(back.running_stats() == net.running_stats());
    CHECK(back.architecture().hidden_width == net.architecture().hidden_width);
    CHECK(back.sample(10, 3) == net.sample(10, 3));
}

TEST_CASE("spectral and radial models round trip") {
    SpectralModel s(nn::GenerativeNet(default_spectral_architecture(3), 5), 500, 9);
    SpectralModel sb = spectral_from_json(round(to_json(s)));
    CHECK(sb.has_net());
    CHECK(sb.pool() == s.pool());
    CHECK(sb.pool_seed() == 9);
    std::vector<double> x{0.2, 0.5, 0.3};
    CHECK(sb.stdf(x) == s.stdf(x));

    SpectralModel pool(nsd_spectral_sample({{1, 2, 3}, 0.6}, 100, 4));
    SpectralModel pb = spectral_from_json(round(to_json(pool)));
    CHECK_FALSE(pb.has_net());
    CHECK(pb.pool() == pool.pool());

    RadialModel r(nn::GenerativeNet(default_radial_architecture(), 6), 3, 400, 8);
    RadialModel rb = radial_from_json(round(to_json(r)));
    CHECK(rb.generator().support() == r.generator().support());
    CHECK(rb.generator().value(0.7) == r.generator().value(0.7));

    FiniteRadial f{{0.25, 0.5, 1.0}, {0.2, 0.3, 0.5}, {0.5, 0.5}};
    FiniteRadial fb = finite_radial_from_json(round(to_json(f)));
    CHECK(fb.support == f.support);
    CHECK(fb.probs == f.probs);
    CHECK(fb.ratios == f.ratios);
}

TEST_CASE("full models round trip and sample identically") {
    ArchimaxModel m{ArchGenerator{Family::Joe, 1.7}, NsdParams{{1, 2, 2}, 0.4, 5000}, 3, {{"seed", "3"}}};
    Json j = to_json(m);
    CHECK(j["format"] == "archimax-model");
    CHECK(j["version"] == 1);
    ArchimaxModel b = model_from_json(round(j));
    CHECK(b.metadata == m.metadata);
    CHECK(std::get<ArchGenerator>(b.radial).theta == 1.7);
    CHECK(std::get<NsdParams>(b.spectral).alpha == std::vector<double>{1, 2, 2});
    CHECK(sample_archimax(b, 50, 2) == sample_archimax(m, 50, 2));

    ArchimaxModel u{FiniteRadial{{0.5, 1.0}, {0.5, 0.5}, {0.5}}, UniformSimplex{4}, 4, {}};
    ArchimaxModel ub = model_from_json(round(to_json(u)));
    CHECK(std::get<UniformSimplex>(ub.spectral).d == 4);
    CHECK(sample_archimax(ub, 20, 1) == sample_archimax(u, 20, 1));
}

TEST_CASE("malformed model documents") {
    CHECK_THROWS_AS(model_from_json(Json::object()), Error);
    Json j = to_json(ArchimaxModel{ArchGenerator{Family::Clayton, 1.0}, UniformSimplex{2}, 2, {}});
    j["version"] = 99;
    CHECK_THROWS_AS(model_from_json(j), Error);
    j["version"] = 1;
    j["radial"]["kind"] = "mystery";
    CHECK_THROWS_AS(model_from_json(j), Error);
    j["radial"] = {{"kind", "parametric"}, {"family", "clayton"}};
    CHECK_THROWS_AS(model_from_json(j), Error);
}

TEST_CASE("fit config overrides") {
    Json j = Json::parse(R"({"max_alternations": 5, "cvm_tolerance": "inf", "n_r": 40,
        "block": {"forced_k": 100, "r_set": [2]}, "stdf": {"max_iters": 12, "dirs_per_batch": 4},
        "generator": {"max_iters": 7, "anneal_z": false}, "seed": 11})");
    FitConfig c = fit_config_from_json(j);
    CHECK(c.max_alternations == 5);
    CHECK(std::isinf(c.cvm_tolerance));
    CHECK(c.n_r == 40u);
    CHECK_FALSE(c.n_z.has_value());
    CHECK(c.block.forced_k == 100u);
    CHECK(c.block.r_set == std::vector<unsigned>{2});
    CHECK(c.stdf.train.max_iters == 12);
    CHECK(c.stdf.dirs_per_batch == 4);
    CHECK(c.stdf_init.train.max_iters == FitConfig{}.stdf_init.train.max_iters);
    CHECK(c.generator.train.max_iters == 7);
    CHECK_FALSE(c.generator.anneal_z);
    CHECK(c.seed == 11);
    CHECK_THROWS_AS(fit_config_from_json(Json::parse(R"({"max_alternations": "many"})")), Error);
    try {
        fit_config_from_json(Json::parse(R"({"max_alternations": 0})"));
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("diagnostics lines") {
    FitDiagnostics d;
    d.block_k = 40;
    d.cvm_trace = {0.1, 0.01};
    d.stages.push_back({"train_stdf", 1, 30, 0.5, {{"moment_penalty", 0.002}}});
    d.generator_trainings = 1;
    d.stdf_trainings = 2;
    auto lines = diagnostics_lines(d);
    REQUIRE(lines.size() == 3);
    CHECK(lines.front()["stage"] == "block_search");
    CHECK(lines[1]["stage"] == "train_stdf");
    CHECK(lines.back()["stage"] == "summary");
    CHECK(lines.back()["cvm_trace"].size() == 2);
    CHECK(lines.back()["stdf_trainings"] == 2);
}

TEST_CASE("json file reading") {
    const std::string path = "serialize_test.json";
    {
        std::ofstream f(path);
        f << R"({"a": 1})";
    }
    CHECK(read_json_file(path)["a"] == 1);
    CHECK_THROWS_AS(read_json_file("does/not/exist.json"), Error);
    {
        std::ofstream f(path);
        f << "{ broken";
    }
    CHECK_THROWS_AS(read_json_file(path), Error);
    std::remove(path.c_str());
}
