#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "whlab/harness.hpp"

using namespace whlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("whlab_test_" + std::to_string(static_cast<unsigned>(std::rand())) +
                std::to_string(static_cast<unsigned>(
                    reinterpret_cast<std::uintptr_t>(this))));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int count_data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    int n = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("config parser handles every value shape") {
    ConfigMap m = parse_config_text(
        "# full line comment\n"
        "N = 8\n"
        "J = 1.5  # trailing comment\n"
        "label = \"with # inside\"\n"
        "flag = true\n"
        "grid = [0, 0.5, 1e1]\n"
        "empty = []\n"
        "schedule = [[-1.5, -0.11], [1.5, -0.11]]\n");
    CHECK(m.at("N").kind == ConfigValue::Kind::integer);
    CHECK(m.at("N").i == 8);
    CHECK(m.at("J").kind == ConfigValue::Kind::real);
    CHECK(m.at("J").d == 1.5);
    CHECK(m.at("label").s == "with # inside");
    CHECK(m.at("flag").b == true);
    REQUIRE(m.at("grid").numbers.size() == 3);
    CHECK(m.at("grid").numbers[2] == 10.0);
    CHECK(m.at("empty").numbers.empty());
    REQUIRE(m.at("schedule").pairs.size() == 2);
    CHECK(m.at("schedule").pairs[0][0] == -1.5);
    CHECK(m.at("schedule").pairs[1][1] == -0.11);
}

TEST_CASE("config parser rejects malformed input with the line number") {
    CHECK_THROWS_WITH_AS(parse_config_text("[section]\n"),
                         doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("N = 4\n[section]\n"),
                         doctest::Contains("section"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("N = 4\nN = 6\n"),
                         doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("x = [1, [2, 3]]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("x = [[1], [2, 3]]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("x = [1, 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("x = \"open\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("x = 12abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("bad key! = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("x =\n"), ConfigError);
}

TEST_CASE("serialization is canonical: key order cannot change the hash") {
    ConfigMap a = parse_config_text("beta = 4\nN = 6\nmu = 0.25\n");
    ConfigMap b = parse_config_text("mu = 0.25\nN = 6\nbeta = 4.0\n");
    CHECK(serialize_config(a) == serialize_config(b));
    CHECK(config_hash(serialize_config(a)) == config_hash(serialize_config(b)));

    ConfigMap back = parse_config_text(serialize_config(a));
    CHECK(serialize_config(back) == serialize_config(a));
}

TEST_CASE("registry lists every experiment with defaults") {
    const char* names[] = {"mi-curve",  "warmup",     "winding",   "winding-summary",
                           "lyapunov",  "eternal",    "eternal-vb", "causal",
                           "classical", "tripartite", "otoc",       "pg-compare",
                           "twopoint"};
    CHECK(experiment_registry().size() == 13);
    for (const char* n : names) {
        const ExperimentInfo* e = find_experiment(n);
        REQUIRE(e != nullptr);
        CHECK(!e->what.empty());
        CHECK(!e->reference_scale.empty());
        bool has_seed = false;
        for (const auto& [k, v] : e->defaults) has_seed |= k == "seed";
        CHECK(has_seed);
    }
    CHECK(find_experiment("no-such") == nullptr);
}

TEST_CASE("resolution fills defaults, validates, and names bad fields") {
    ConfigMap m = resolve_config("mi-curve", parse_config_text("N = 6\n"));
    CHECK(m.at("q").i == 4);
    CHECK(m.at("beta").d == 4.0);
    CHECK(m.at("seed").i == 0);
    CHECK(m.at("experiment").s == "mi-curve");

    CHECK_THROWS_WITH_AS(resolve_config("mi-curve", {}),
                         doctest::Contains("\"N\""), ConfigError);
    CHECK_THROWS_WITH_AS(resolve_config("mi-curve", parse_config_text("N = 6\nbogus = 1\n")),
                         doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(resolve_config("nope", parse_config_text("N = 6\n")),
                         doctest::Contains("unknown experiment"), ConfigError);
    CHECK_THROWS_AS(
        resolve_config("mi-curve", parse_config_text("N = 6\nexperiment = \"warmup\"\n")),
        ConfigError);
    CHECK_THROWS_WITH_AS(resolve_config("mi-curve", parse_config_text("N = 6\nq = 6\n")),
                         doctest::Contains("\"q\""), ConfigError);
    CHECK_THROWS_WITH_AS(resolve_config("mi-curve", parse_config_text("N = 6\nq = 8\n")),
                         doctest::Contains("\"q\""), ConfigError);
    CHECK_THROWS_WITH_AS(
        resolve_config("mi-curve", parse_config_text("N = 6\nt_grid = [1, 1]\n")),
        doctest::Contains("t_grid"), ConfigError);
    CHECK_THROWS_WITH_AS(
        resolve_config("mi-curve", parse_config_text("N = 6\ninteraction = \"v\"\n")),
        doctest::Contains("interaction"), ConfigError);
    CHECK_THROWS_WITH_AS(resolve_config("otoc", parse_config_text("N = 6\nfermion = 6\n")),
                         doctest::Contains("fermion"), ConfigError);
    CHECK_THROWS_WITH_AS(
        resolve_config("lyapunov",
                       parse_config_text("N = 6\nt_grid = [1, 2, 3]\nfit_lo = 0.5\nfit_hi = "
                                         "3.5\n")),
        doctest::Contains("t_grid"), ConfigError);
    CHECK_THROWS_WITH_AS(
        resolve_config("mi-curve",
                       parse_config_text("N = 6\nt_grid = [1, 2]\nschedule = [[3, 0.1]]\n")),
        doctest::Contains("schedule"), ConfigError);
    CHECK_THROWS_WITH_AS(
        resolve_config("twopoint", parse_config_text("N = 6\ntau_grid = [0.5, 2]\n")),
        doctest::Contains("tau_grid"), ConfigError);

    ConfigMap s = resolve_config("mi-curve", parse_config_text("N = 6\nseed = 3\n"), 9);
    CHECK(s.at("seed").i == 9);
}

TEST_CASE("a run writes the three artifacts and the documented row count") {
    TempDir tmp;
    ConfigMap user = parse_config_text(
        "N = 6\ninstantiations = 2\nt_grid = [0, 1, 2, 3, 4]\nbeta = 0.5\nmu = 0.3\n");
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    opt.threads = 2;
    RunPaths p = run_experiment("mi-curve", user, opt);

    REQUIRE(fs::exists(p.series_csv));
    REQUIRE(fs::exists(p.summary_json));
    REQUIRE(fs::exists(p.resolved_toml));

    const std::string csv = slurp(p.series_csv);
    CHECK(count_data_rows(csv) == 2 * 5 * 2);  // instantiations x grid x signs
    CHECK(csv.find("instantiation,t,sign,I_RT") != std::string::npos);

    // The resolved config re-parses to the same canonical text, so the run
    // directory name is reproducible from the artifact alone.
    ConfigMap back = parse_config_text(slurp(p.resolved_toml));
    CHECK(fs::path(p.dir).filename().string() ==
          [&] {
              char buf[24];
              std::snprintf(buf, sizeof buf, "%016llx",
                            static_cast<unsigned long long>(
                                config_hash(serialize_config(back))));
              return std::string(buf);
          }());

    // Byte-identical rerun, also under a different thread count.
    RunPaths p2 = run_experiment("mi-curve", user, opt);
    CHECK(slurp(p2.series_csv) == csv);
    CHECK(slurp(p2.summary_json) == slurp(p.summary_json));
    opt.threads = 1;
    RunPaths p3 = run_experiment("mi-curve", user, opt);
    CHECK(p3.dir == p.dir);
    CHECK(slurp(p3.series_csv) == csv);
    CHECK(slurp(p3.summary_json) == slurp(p.summary_json));

    // A seed override changes the resolved config, hence the directory.
    opt.seed = 1;
    RunPaths p4 = run_experiment("mi-curve", user, opt);
    CHECK(p4.dir != p.dir);
}

TEST_CASE("summary means are the arithmetic means of the series rows") {
    TempDir tmp;
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    RunPaths p = run_experiment(
        "twopoint",
        parse_config_text("N = 6\ninstantiations = 3\ntau_grid = [0.1, 0.5, 0.9]\n"), opt);

    std::istringstream in(slurp(p.series_csv));
    std::string line;
    std::map<double, std::pair<double, int>> acc;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'i') continue;
        double inst, tau, g;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &inst, &tau, &g) == 3);
        acc[tau].first += g;
        acc[tau].second += 1;
    }
    REQUIRE(acc.size() == 3);

    const std::string summary = slurp(p.summary_json);
    for (const auto& [tau, sc] : acc) {
        char want[64];
        // json prints shortest round-trip doubles; match against a prefix
        std::snprintf(want, sizeof want, "%.12g", sc.first / sc.second);
        CHECK(summary.find(std::string(want).substr(0, 10)) != std::string::npos);
    }
}

TEST_CASE("warmup run stays on the closed form") {
    TempDir tmp;
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    RunPaths p = run_experiment("warmup", parse_config_text("N = 4\n"), opt);
    std::istringstream in(slurp(p.series_csv));
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'i') continue;
        ++rows;
        const std::size_t c1 = line.rfind(',');
        const std::size_t c2 = line.rfind(',', c1 - 1);
        const double closed = std::strtod(line.c_str() + c1 + 1, nullptr);
        const double got = std::strtod(line.c_str() + c2 + 1, nullptr);
        CHECK(std::abs(got - closed) < 1e-10);
    }
    CHECK(rows == 2 * 33);
}

TEST_CASE("a numerical failure removes the partial run directory") {
    TempDir tmp;
    RunOptions opt;
    opt.out_dir = (tmp.path / "out").string();
    ConfigMap user = parse_config_text(
        "N = 6\nJ = 0\nmu = 0\nk = 4\ninstantiations = 1\nmu_grid = []\n"
        "symmetry_report = false\n");
    CHECK_THROWS_AS(run_experiment("eternal", user, opt), std::runtime_error);
    // the experiment parent may remain, but no run directory survives
    const fs::path parent = tmp.path / "out" / "eternal";
    if (fs::exists(parent)) CHECK(fs::is_empty(parent));
}
