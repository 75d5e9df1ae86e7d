#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "statlim/cli.hpp"
#include "statlim/io.hpp"

using namespace statlim;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "statlim_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

io::json read_json(const fs::path& p) { return io::json::parse(slurp(p)); }

std::string set(const std::string& kv) { return kv; }

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("cli: help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == cli::kExitConfig);
  CHECK(run({"train"}).code == cli::kExitConfig);
  CHECK(run({"cost", "--frobnicate"}).code == cli::kExitConfig);
  CHECK(run({"cost", "--config", "/nonexistent.json"}).code == cli::kExitConfig);
}

TEST_CASE("cli generate: noiseless dataset and echo") {
  const fs::path out = scratch("gen.csv");
  const std::vector<std::string> args = {"generate", "--set", "d=2", "--set", "n=4", "--set", "sigma=0",
                                         "--set",    "seed=1", "--set", "output=" + out.string()};
  const Result r = run(args);
  REQUIRE(r.code == 0);
  const Dataset d = io::load_dataset(out);
  REQUIRE(d.size() == 4);
  REQUIRE(d.dimension() == 2);
  const io::json echo = read_json(out.string() + ".config.json");
  CHECK(echo["schema_version"] == io::kSchemaVersion);
  CHECK(echo["n"] == 4);
  const Eigen::Vector2d w(echo["w_star"][0].get<double>(), echo["w_star"][1].get<double>());
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(d.labels[i] == doctest::Approx(d.features.row(i).dot(w)).epsilon(1e-15));

  const std::string first = slurp(out);
  const std::string first_echo = slurp(out.string() + ".config.json");
  REQUIRE(run(args).code == 0);
  CHECK(slurp(out) == first);
  CHECK(slurp(out.string() + ".config.json") == first_echo);
}

TEST_CASE("cli generate: validation names the field") {
  const Result r = run({"generate", "--set", "d=2", "--set", "n=0", "--set", "output=" + scratch("x.csv").string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("`n`") != std::string::npos);
  const Result u = run({"generate", "--set", "d=2", "--set", "n=3", "--set", "output=x.csv", "--set", "colour=1"});
  CHECK(u.code == cli::kExitConfig);
  CHECK(u.err.find("`colour`") != std::string::npos);
  const Result law = run({"generate", "--set", "d=2", "--set", "n=3", "--set", "output=x.csv", "--set", "input_law=cauchy"});
  CHECK(law.code == cli::kExitConfig);
}

TEST_CASE("cli: config files with line diagnostics") {
  const fs::path bad = scratch("bad.json");
  write(bad, "{\n  \"d\": 2,\n  \"n\": ,\n}\n");
  const Result r = run({"generate", "--config", bad.string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find(":3:") != std::string::npos);

  const fs::path good = scratch("good.json");
  const fs::path out = scratch("from_config.csv");
  write(good, "{\"d\": 3, \"n\": 7, \"sigma\": 0.1, \"output\": \"" + out.string() + "\"}");
  REQUIRE(run({"generate", "--config", good.string()}).code == 0);
  CHECK(io::load_dataset(out).size() == 7);
  REQUIRE(run({"generate", "--config", good.string(), "--set", "n=9"}).code == 0);
  CHECK(io::load_dataset(out).size() == 9);
}

TEST_CASE("cli fit: identity design") {
  const fs::path data = scratch("identity.csv");
  write(data, "x0,x1,y\n1,0,2\n0,1,-1\n");
  const fs::path pred = scratch("identity.predictor.json");
  const fs::path report = scratch("identity.report.json");
  const Result r = run({"fit", "--set", "data=" + data.string(), "--set", "solver=exact_ls", "--set", "lambda=0",
                        "--set", "predictor_out=" + pred.string(), "--set", "report_out=" + report.string()});
  REQUIRE(r.code == 0);
  const Predictor p = io::predictor_from_json(read_json(pred));
  CHECK(p.primal_form().weights[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p.primal_form().weights[1] == doctest::Approx(-1.0).epsilon(1e-15));
  const io::json rep = read_json(report);
  CHECK(rep["schema_version"] == io::kSchemaVersion);
  CHECK(rep["empirical_risk"].get<double>() <= 1e-30);
  CHECK_FALSE(rep.contains("excess_risk"));
}

TEST_CASE("cli fit: divide and conquer with one block matches krr") {
  const fs::path data = scratch("dc.csv");
  REQUIRE(run({"generate", "--set", "d=3", "--set", "n=60", "--set", "sigma=0.5", "--set", "seed=4", "--set",
               "output=" + data.string()})
              .code == 0);
  auto fit_report = [&](const std::string& solver) {
    const fs::path report = scratch(solver + ".report.json");
    const Result r = run({"fit", "--set", "data=" + data.string(), "--set", "solver=" + solver, "--set",
                          "kernel=gaussian", "--set", "partitions=1", "--set",
                          R"(problem={"d":3,"sigma":0.5,"seed":4})", "--set", "n_eval=5000", "--set",
                          "predictor_out=" + scratch(solver + ".p.json").string(), "--set",
                          "report_out=" + report.string()});
    REQUIRE(r.code == 0);
    return read_json(report);
  };
  const io::json a = fit_report("krr");
  const io::json b = fit_report("divide_and_conquer");
  for (const char* key : {"empirical_risk", "excess_risk"}) {
    CHECK(std::abs(a[key].get<double>() - b[key].get<double>()) <= 1e-10);
  }
  CHECK(std::abs(a["excess_risk_paired"]["value"].get<double>() - b["excess_risk_paired"]["value"].get<double>()) <=
        1e-10);
  CHECK(a["expected_risk"]["n_eval"] == 5000);
}

TEST_CASE("cli fit: error exit codes") {
  CHECK(run({"fit", "--set", "data=" + scratch("missing.csv").string()}).code == cli::kExitConfig);
  const fs::path data = scratch("singular.csv");
  write(data, "x0,x1,y\n1,2,1\n2,4,2\n3,6,3\n");
  const Result r = run({"fit", "--set", "data=" + data.string(), "--set", "lambda=0", "--set",
                        "predictor_out=" + scratch("s.p.json").string(), "--set",
                        "report_out=" + scratch("s.r.json").string()});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(run({"fit", "--set", "data=" + data.string(), "--set", "solver=svm"}).code == cli::kExitConfig);
  const Result dim = run({"fit", "--set", "data=" + data.string(), "--set", R"(problem={"d":5})", "--set",
                          "predictor_out=" + scratch("s.p.json").string(), "--set",
                          "report_out=" + scratch("s.r.json").string()});
  CHECK(dim.code == cli::kExitConfig);
}

TEST_CASE("cli sweep: estimation summary and determinism") {
  auto sweep = [&](const std::string& tag, const std::string& workers) {
    const fs::path csv = scratch("sweep_" + tag + ".csv");
    const fs::path json = scratch("sweep_" + tag + ".json");
    const Result r = run({"sweep", "--set", "n_grid=[32,64,128]", "--set", "trials=5", "--set", "n_eval=2000",
                          "--set", "master_seed=8", "--workers", workers, "--set", "out_csv=" + csv.string(), "--set",
                          "out_json=" + json.string()});
    REQUIRE(r.code == 0);
    return std::pair{slurp(csv), read_json(json)};
  };
  const auto [csv1, json1] = sweep("w1", "1");
  const auto [csv4, json4] = sweep("w4", "4");
  CHECK(csv1 == csv4);
  CHECK(json1 == json4);
  CHECK(json1["schema_version"] == io::kSchemaVersion);
  CHECK(json1["fit"].contains("exponent"));
  CHECK(json1["rate_ok"].is_boolean());
  CHECK(csv1.rfind("series,n,statistic,value\n", 0) == 0);
  CHECK(csv1.find("exact,32,median_excess_risk,") != std::string::npos);
}

TEST_CASE("cli sweep: matching ratios carry budget flags") {
  const fs::path csv = scratch("match.csv");
  const fs::path json = scratch("match.json");
  const Result r = run({"sweep", "--set", "experiment=matching", "--set", "n_grid=[32,64,128]", "--set", "trials=3",
                        "--set", "n_eval=2000", "--set", "out_csv=" + csv.string(), "--set",
                        "out_json=" + json.string()});
  REQUIRE(r.code == 0);
  const io::json s = read_json(json);
  REQUIRE(s["matched"]["ratios"].size() == 3);
  for (const auto& row : s["matched"]["ratios"]) CHECK(row["within_budget"].is_boolean());
  CHECK(s["matched_ok"].is_boolean());
  CHECK(s["constant_ok"].is_boolean());

  const Result m = run({"sweep", "--set", "experiment=measurement", "--set", "n_grid=[32,64,128]", "--set",
                        "trials=3", "--set", "n_eval=2000", "--set", "out_csv=" + csv.string(), "--set",
                        "out_json=" + json.string()});
  REQUIRE(m.code == 0);
  const io::json ms = read_json(json);
  CHECK(ms["sqrt_ok"].is_boolean());
  CHECK(ms["fourth_root_ok"].is_boolean());
}

TEST_CASE("cli sweep: validation") {
  CHECK(run({"sweep", "--set", "n_grid=[]"}).code == cli::kExitConfig);
  CHECK(run({"sweep", "--set", "n_grid=[64,32,128]"}).code == cli::kExitConfig);
  CHECK(run({"sweep", "--set", "experiment=bogus"}).code == cli::kExitConfig);
  CHECK(run({"sweep", "--set", "solver=krr", "--set", R"(noise={"gamma_rule":{"kind":"constant","value":0.1}})"})
            .code == cli::kExitConfig);
  CHECK(run({"sweep", "--set", R"(noise={"gamma_rule":{"kind":"sideways"}})"}).code == cli::kExitConfig);
}

TEST_CASE("cli sweep: noise schedule") {
  const fs::path csv = scratch("noise.csv");
  const fs::path json = scratch("noise.json");
  const Result r = run({"sweep", "--set", "n_grid=[32,64,128]", "--set", "trials=3", "--set", "n_eval=2000", "--set",
                        R"(noise={"gamma_rule":{"kind":"constant","value":0.3},"m_rule":{"kind":"sqrt_n"},"regime":"heisenberg"})",
                        "--set", "problem.d=3", "--set", "out_csv=" + csv.string(), "--set",
                        "out_json=" + json.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(csv).find("noisy,128,median_excess_risk,") != std::string::npos);
}

TEST_CASE("cli cost") {
  const Result t = run({"cost", "--set", "algorithm=table1"});
  REQUIRE(t.code == 0);
  CHECK(t.out.find("svm_krr,SVM / KRR,3,1,false,false") != std::string::npos);
  CHECK(t.out.find("falkon,") != std::string::npos);
  CHECK(std::count(t.out.begin(), t.out.end(), '\n') == 8);

  const Result s = run({"cost", "--set", "algorithm=schuld", "--set", "kappa=2", "--set", "gamma=[0.1]", "--set",
                        "n=1024"});
  REQUIRE(s.code == 0);
  const std::string row = s.out.substr(s.out.find('\n') + 1);
  CHECK(std::stod(row.substr(row.rfind(',') + 1)) == doctest::Approx(4e4).epsilon(1e-12));

  const Result grid = run({"cost", "--set", "algorithm=qkls", "--set", "kappa=[1,2,4]", "--set", "gamma=[0.5,0.1]",
                           "--set", "n=[64,4096]", "--set", "frobenius=sqrt_n", "--set",
                           "output=" + scratch("cost.csv").string()});
  REQUIRE(grid.code == 0);
  const std::string file = slurp(scratch("cost.csv"));
  CHECK(std::count(file.begin(), file.end(), '\n') == 13);

  const Result m = run({"cost", "--set", "algorithm=matched", "--set", "beta=4", "--set", "n=16"});
  REQUIRE(m.code == 0);
  CHECK(m.out.find(",1024\n") != std::string::npos);

  CHECK(run({"cost", "--set", "algorithm=qkls", "--set", "gamma=1"}).code == cli::kExitConfig);
  CHECK(run({"cost", "--set", "algorithm=hhl"}).code == cli::kExitConfig);
  CHECK(run({"cost", "--set", "algorithm=table1", "--set", "kappa=3"}).code == cli::kExitConfig);
}

TEST_CASE("cli bench") {
  const fs::path csv = scratch("bench.csv");
  const fs::path json = scratch("bench.json");
  const std::vector<std::string> base = {"bench", "--set", "n_grid=[32,64,128]", "--set", "n_test=100",
                                         "--set", "out_csv=" + csv.string(), "--set", "out_json=" + json.string()};
  std::vector<std::string> one = base;
  one.insert(one.end(), {"--set", "reps=1"});
  const Result r = run(one);
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  const io::json s = read_json(json);
  CHECK(s["fits"].contains("krr"));
  CHECK(s["fits"].contains("nystrom"));
  CHECK(s["fits"]["krr"]["train"].contains("exponent"));
  CHECK(s["krr_exponent_ok"].is_boolean());
  CHECK(s["ladder_ok"].is_boolean());

  CHECK(run({"bench", "--set", "n_grid=[256,1024,16384]"}).code == cli::kExitConfig);
  ::setenv("STATLIM_BENCH_CAP", "100", 1);
  CHECK(run(base).code == cli::kExitConfig);
  ::unsetenv("STATLIM_BENCH_CAP");

  std::vector<std::string> slow = base;
  slow.insert(slow.end(), {"--set", "n_grid=[64,1024,2048]", "--set", "reps=1", "--set", "timeout_s=1e-5"});
  CHECK(run(slow).code == cli::kExitTimeout);
  CHECK(run({"bench", "--set", "workers=2"}).code == cli::kExitConfig);
}
