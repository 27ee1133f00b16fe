#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lplasma/cli.hpp"

using namespace lplasma;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "lplasma_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

int cli(std::vector<std::string> args, std::string* log = nullptr) {
    args.insert(args.begin(), "lplasma");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream os;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), os);
    if (log) *log = os.str();
    return code;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

} // namespace

TEST(Config, ParsesAndDumps) {
    const auto c = parse_config(R"(
        # comment
        experiment = verify-separation
        seed = 77
        plasma.n = 10, 20
        plasma.ell = 2,3
        factor = pair:power=1
        minimize.restarts = 4   # trailing comment
    )");
    EXPECT_EQ(c.experiment, ExperimentKind::verify_separation);
    EXPECT_EQ(c.seed, 77u);
    EXPECT_EQ(c.n_values, (std::vector<std::size_t>{10, 20}));
    EXPECT_EQ(c.ell_values, (std::vector<unsigned>{2, 3}));
    EXPECT_EQ(c.restarts, 4u);
    EXPECT_FALSE(c.factor->is_trivial());
    const auto again = parse_config(c.dump());
    EXPECT_EQ(again.dump(), c.dump());
}

TEST(Config, StrictParsing) {
    EXPECT_THROW(parse_config("experiment = minimize\nplasma.nn = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = minimize\nseed = 1\nseed = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = minimize\nseed =\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = minimize\nseed 4\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = nonsense\n"), ConfigError);
    EXPECT_THROW(parse_config("seed = 4\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = minimize\nplasma.n = 10,20\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = minimize\nplasma.epsilon = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = sample\nchain.n_steps = 100\nchain.burn_in = 100\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = sample\nchain.n_steps = 10x\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = minimize\nplasma.u = cubic\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = minimize\nfactor = pair:power=x\n"), ConfigError);
}

TEST(Config, PotentialDescriptors) {
    EXPECT_EQ(parse_potential("zero").value({1, 2}), 0.0);
    EXPECT_DOUBLE_EQ(parse_potential("quadratic").value({1, 2}), 5.0);
    EXPECT_DOUBLE_EQ(parse_potential("quadratic:1,1,0").value({1, 2}), 3.0);
    EXPECT_NEAR(parse_potential("radial_power:3").value({3, 4}), 125.0, 1e-12);
    EXPECT_DOUBLE_EQ(parse_potential("truncated:4:radial_power:2").value({3, 0}), 4.0);
    const auto dir = scratch("grid");
    write_file(dir / "g.txt", "0 0 1 2 2\n0 1\n2 3\n");
    const auto g = parse_potential("grid_file:" + (dir / "g.txt").string());
    EXPECT_DOUBLE_EQ(g.value({0.5, 0.5}), 1.5);
    EXPECT_THROW(parse_potential("grid_file:" + (dir / "missing.txt").string()), ConfigError);
}

TEST(Config, FactorDescriptors) {
    EXPECT_TRUE(parse_factor("trivial")->is_trivial());
    const Configuration z{{0.1, 0.2}, {-0.3, 0.4}, {0.5, -0.6}};
    EXPECT_NEAR(parse_factor("pair")->w_value(z, 3), laughlin_pair_factor()->w_value(z, 3), 1e-14);
    EXPECT_NEAR(parse_factor("one_body:roots=0/0")->w_value(z, 3), origin_one_body_factor()->w_value(z, 3), 1e-14);
    EXPECT_NO_THROW(parse_factor("pair:power=2;sum_roots=0.5/0.1;product_roots=1/0"));
    EXPECT_NO_THROW(parse_factor("one_body:coefficients=1/0,0/0,1/0"));
    const auto comp = parse_factor("composite:one_body:roots=0/0|pair:power=1");
    EXPECT_NEAR(comp->w_value(z, 3),
                origin_one_body_factor()->w_value(z, 3) + laughlin_pair_factor()->w_value(z, 3), 1e-12);
    EXPECT_THROW(parse_factor("unknown"), ConfigError);
}

TEST(Config, BathtubCap) {
    auto c = parse_config("experiment = bathtub\nplasma.ell = 2\n");
    EXPECT_DOUBLE_EQ(c.bathtub_cap(2), 4.0 / (kPi * 2));
    c = parse_config("experiment = bathtub\nbathtub.density_cap = conjecture\n");
    EXPECT_DOUBLE_EQ(c.bathtub_cap(2), 1.0 / (kPi * 2));
    c = parse_config("experiment = bathtub\nbathtub.density_cap = 0.25\n");
    EXPECT_DOUBLE_EQ(c.bathtub_cap(2), 0.25);
    EXPECT_THROW(parse_config("experiment = bathtub\nbathtub.density_cap = -3\n"), ConfigError);
}

TEST(Cli, BurnInNotBelowStepsIsConfigError) {
    const auto dir = scratch("burn");
    const auto cfg = write_file(dir / "c.cfg", "plasma.n = 5\nchain.n_steps = 100\nchain.burn_in = 100\n");
    EXPECT_EQ(cli({"sample", "--config", cfg.string(), "--out", (dir / "out").string()}), kExitConfig);
}

TEST(Cli, ConfigErrors) {
    const auto dir = scratch("errors");
    EXPECT_EQ(cli({"minimize", "--config", (dir / "missing.cfg").string()}), kExitConfig);
    const auto mismatch = write_file(dir / "m.cfg", "experiment = sample\n");
    EXPECT_EQ(cli({"minimize", "--config", mismatch.string(), "--out", dir.string()}), kExitConfig);
    EXPECT_EQ(cli({"minimize", "--threads", "0"}), kExitConfig);
    EXPECT_EQ(cli({"frobnicate"}), kExitConfig);
    EXPECT_EQ(cli({}), kExitConfig);
    const auto narrow = write_file(dir / "d.cfg", "plasma.n = 30\nchain.n_steps = 200\ndensity.r_max = 0.2\n");
    EXPECT_EQ(cli({"density", "--config", narrow.string(), "--out", (dir / "d").string()}), kExitConfig);
}

TEST(Cli, MinimizeWritesArtifacts) {
    const auto dir = scratch("minimize");
    const auto cfg = write_file(dir / "c.cfg", "plasma.n = 2\nplasma.ell = 2\nminimize.restarts = 2\n");
    ASSERT_EQ(cli({"minimize", "--config", cfg.string(), "--out", (dir / "out").string(), "--seed", "9"}), kExitOk);
    const auto z = read_configuration_csv(dir / "out" / "configuration.csv");
    ASSERT_EQ(z.size(), 2u);
    EXPECT_NEAR(distance(z[0], z[1]), 2.0, 1e-6);
    const auto j = read_json(dir / "out" / "minimize.json");
    EXPECT_EQ(j["root_seed"], 9u);
    EXPECT_EQ(j["config"]["seed"], "9");
    EXPECT_TRUE(j["audit"]["passed"].get<bool>());
    // The dumped config reproduces the run.
    const auto again = load_config((dir / "out" / "config.txt").string());
    EXPECT_EQ(again.seed, 9u);
    EXPECT_EQ(again.output_dir, (dir / "out").string());
}

TEST(Cli, SampleAndDensity) {
    const auto dir = scratch("sample");
    const auto cfg = write_file(dir / "c.cfg",
                                "plasma.n = 6\nchain.n_steps = 400\nchain.thinning = 4\nchain.write_samples = true\n"
                                "chain.n_chains = 2\nminimize.restarts = 1\n");
    ASSERT_EQ(cli({"sample", "--config", cfg.string(), "--out", (dir / "s").string(), "--threads", "2"}), kExitOk);
    const auto j = read_json(dir / "s" / "sample.json");
    ASSERT_EQ(j["chains"].size(), 2u);
    EXPECT_EQ(j["chains"][0]["n_samples"], (400u - 80u) / 4u);
    std::ifstream in(dir / "s" / "samples_chain0.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "step,particle,x,y");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 6u * 80u);

    ASSERT_EQ(cli({"density", "--config", cfg.string(), "--out", (dir / "d").string()}), kExitOk);
    const auto d = read_json(dir / "d" / "density.json");
    EXPECT_NEAR(d["density"]["total_mass"].get<double>(), 1.0, 1e-9);
    EXPECT_TRUE(fs::exists(dir / "d" / "density.csv"));
}

TEST(Cli, SameSeedSameArtifacts) {
    const auto dir = scratch("repro");
    const auto cfg = write_file(dir / "c.cfg", "plasma.n = 5\nchain.n_steps = 300\nchain.write_samples = true\n");
    ASSERT_EQ(cli({"sample", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "5"}), kExitOk);
    ASSERT_EQ(cli({"sample", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "5"}), kExitOk);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    EXPECT_EQ(slurp(dir / "a" / "samples_chain0.csv"), slurp(dir / "b" / "samples_chain0.csv"));
}

TEST(Cli, BathtubTheoremConstant) {
    const auto dir = scratch("bathtub");
    const auto cfg = write_file(dir / "c.cfg", "plasma.ell = 2\nbathtub.potential = radial_power:2\nbathtub.write_grid = true\n");
    ASSERT_EQ(cli({"bathtub", "--config", cfg.string(), "--out", dir.string()}), kExitOk);
    const auto j = read_json(dir / "bathtub.json");
    EXPECT_NEAR(j["result"]["energy"].get<double>(), 0.25, 0.005);
    EXPECT_DOUBLE_EQ(j["closed_form"]["energy"].get<double>(), 0.25);
    std::ifstream in(dir / "bathtub_grid.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x,y,rho");
}

TEST(Cli, VerifySeparationPasses) {
    const auto dir = scratch("vsep");
    const auto cfg = write_file(dir / "c.cfg", "plasma.n = 10,20,50\nplasma.ell = 2\nminimize.restarts = 2\n");
    std::string log;
    ASSERT_EQ(cli({"verify-separation", "--config", cfg.string(), "--out", dir.string(), "--threads", "2"}, &log), kExitOk)
        << log;
    const auto j = read_json(dir / "reports.json");
    std::size_t prop = 0;
    std::string last_claim;
    for (const auto& r : j["reports"]) {
        EXPECT_TRUE(r["passed"].get<bool>());
        EXPECT_FALSE(r["seeds"].empty());
        EXPECT_LE(last_claim, r["claim"].get<std::string>());
        last_claim = r["claim"].get<std::string>();
        if (r["claim"] == "prop-2.1") ++prop;
    }
    EXPECT_EQ(prop, 3u);
}

TEST(Cli, VerifySeparationThreadIndependent) {
    const auto dir = scratch("vsep_threads");
    const auto cfg = write_file(dir / "c.cfg", "plasma.n = 6,9\nplasma.ell = 1,2\nminimize.restarts = 2\n");
    ASSERT_EQ(cli({"verify-separation", "--config", cfg.string(), "--out", (dir / "a").string()}), kExitOk);
    ASSERT_EQ(cli({"verify-separation", "--config", cfg.string(), "--out", (dir / "b").string(), "--threads", "3"}), kExitOk);
    auto a = read_json(dir / "a" / "reports.json")["reports"];
    auto b = read_json(dir / "b" / "reports.json")["reports"];
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k]["measured"], b[k]["measured"]);
}

TEST(Cli, VerifyTheoremNeverAssertsConjecture) {
    const auto dir = scratch("vthm");
    // A conjecture miss must not fail the run: a hot, short chain at small N.
    const auto cfg = write_file(dir / "c.cfg",
                                "plasma.n = 12\nplasma.ell = 2\nchain.n_steps = 1500\nminimize.restarts = 1\n"
                                "theorem.saturation_tolerance = 10\n");
    std::string log;
    const int code = cli({"verify-theorem", "--config", cfg.string(), "--out", dir.string()}, &log);
    EXPECT_EQ(code, kExitOk) << log;
    const auto j = read_json(dir / "reports.json");
    bool saw_floor = false, saw_conj = false;
    for (const auto& r : j["reports"]) {
        if (r["claim"] == "thm-1.1-conjecture") {
            saw_conj = true;
            EXPECT_FALSE(r["asserted"].get<bool>());
        }
        if (r["claim"] == "thm-1.1-floor") {
            saw_floor = true;
            EXPECT_TRUE(r["asserted"].get<bool>());
            EXPECT_DOUBLE_EQ(r["bound"].get<double>(), 0.25);
        }
    }
    EXPECT_TRUE(saw_floor && saw_conj);
}

TEST(Cli, FailedAssertionExitsOne) {
    const auto dir = scratch("vfail");
    // A saturation tolerance of 1e-6 cannot be met by a finite chain.
    const auto cfg = write_file(dir / "c.cfg",
                                "plasma.n = 10\nplasma.ell = 2\nchain.n_steps = 500\nminimize.restarts = 1\n"
                                "theorem.saturation_tolerance = 1e-6\n");
    EXPECT_EQ(cli({"verify-theorem", "--config", cfg.string(), "--out", dir.string()}), kExitAssertion);
}

TEST(Cli, NonConvergenceExitsThree) {
    const auto dir = scratch("noconv");
    const auto cfg = write_file(dir / "c.cfg", "plasma.n = 30\nminimize.max_iterations = 2\nminimize.relocation_moves = false\n");
    EXPECT_EQ(cli({"minimize", "--config", cfg.string(), "--out", dir.string()}), kExitNumerical);
}
