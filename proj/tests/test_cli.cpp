#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "doctest.h"
#include "qarg/clock.hpp"
#include "qarg/flatten.hpp"

using namespace qarg;
namespace fs = std::filesystem;

namespace {

const fs::path kInstances = QARG_INSTANCES_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qarg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

nlohmann::json json_of(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

/// Circuit instance whose verifier is `gates` on `qubits` with one ancilla.
fs::path make_instance(const std::string& name, int qubits, const std::string& gates) {
  const fs::path d = fresh_dir(name);
  write(d / "manifest.json", R"({"kind": "circuit", "label": "YES", "c": 1.0, "s": 0.5, "witness": "brute-force"})");
  write(d / "circuit.circ", "qubits " + std::to_string(qubits) + "\nancillas 1\n" + gates);
  return d;
}

}  // namespace

TEST_CASE("compile-hamiltonian writes components with the clock term count") {
  const fs::path out = fresh_dir("compile");
  const Result r = run_cli({"--out-dir", out.string(), "compile-hamiltonian", "--instance", (kInstances / "yes_toy").string()});
  REQUIRE(r.code == cli::kExitOk);
  for (const char* part : {"init", "clock", "prop", "final", "total"}) CHECK(fs::exists(out / ("h_" + std::string(part) + ".ham")));
  const auto j = json_of(out / "compile.json");
  // One ancilla, T = 4: 1 + 3 + 4 + 1 local terms.
  CHECK(j["pre_expansion_terms"] == 9);
  CHECK(j["one_norm_bound"] == 128.0 * 9);
  CHECK(j["clockT"] == 4);
  const ClockBundle b = compile(cli::load_instance(kInstances / "yes_toy").circuit);
  CHECK(j["pauli_terms"]["total"] == b.h_total.size());
  CHECK(j["pauli_terms"]["prop"] == b.h_prop.size());

  std::ifstream in(out / "h_init.ham");
  HamiltonianMetadata meta;
  const Hamiltonian h = read_hamiltonian(in, "h_init.ham", &meta);
  CHECK(h.size() == b.h_init.size());
  CHECK(meta.fields.at("component") == "init");
  CHECK(meta.fields.at("clockT") == "4");
  CHECK(meta.fields.at("ancillas") == "1");
  CHECK(meta.fields.at("ell") == "2");
}

TEST_CASE("a two-gate circuit compiles to the formula count") {
  const fs::path inst = make_instance("two_gate", 2, "X 1\nX 1\n");
  const fs::path out = fresh_dir("two_gate_out");
  REQUIRE(run_cli({"--out-dir", out.string(), "compile-hamiltonian", "--instance", inst.string()}).code == 0);
  CHECK(json_of(out / "compile.json")["pre_expansion_terms"] == 1 + 1 + 2 + 1);
}

TEST_CASE("recompiling is byte-identical") {
  const fs::path a = fresh_dir("recompile_a"), b = fresh_dir("recompile_b");
  const std::string inst = (kInstances / "qip_toy").string();
  REQUIRE(run_cli({"--out-dir", a.string(), "compile-hamiltonian", "--instance", inst}).code == 0);
  REQUIRE(run_cli({"--out-dir", b.string(), "compile-hamiltonian", "--instance", inst}).code == 0);
  for (const char* f : {"h_init.ham", "h_clock.ham", "h_prop.ham", "h_final.ham", "h_total.ham", "compile.json"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("a malformed gate line fails with its line number") {
  const fs::path inst = make_instance("malformed", 2, "X 1\nFOO 1\n");
  const Result r = run_cli({"--out-dir", fresh_dir("malformed_out").string(), "compile-hamiltonian", "--instance", inst.string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("circuit.circ:4") != std::string::npos);
}

TEST_CASE("witness acceptance for constant verifiers and the QIP toy") {
  const fs::path accept = make_instance("const_accept", 2, "X 2\nX 1\nX 1\n");
  const fs::path reject = make_instance("const_reject", 2, "X 1\nX 1\n");
  for (const auto& [dir, want] : {std::pair{accept, 1.0}, std::pair{reject, 0.0}}) {
    const fs::path out = fresh_dir(dir.filename().string() + "_w");
    REQUIRE(run_cli({"--out-dir", out.string(), "witness", "--instance", dir.string()}).code == 0);
    CHECK(json_of(out / "witness.json")["acceptance"].get<double>() == doctest::Approx(want).epsilon(1e-12));
    CHECK(fs::exists(out / "witness.state"));
  }
  const fs::path out = fresh_dir("qip_w");
  REQUIRE(run_cli({"--out-dir", out.string(), "witness", "--instance", (kInstances / "qip_toy").string()}).code == 0);
  const double oracle = best_witness(cli::load_instance(kInstances / "qip_toy").circuit).acceptance;
  CHECK(json_of(out / "witness.json")["acceptance"].get<double>() == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("brute-force witness refuses more than four witness qubits") {
  const fs::path inst = make_instance("wide", 6, "X 1\nX 1\n");
  const Result r = run_cli({"--out-dir", fresh_dir("wide_out").string(), "witness", "--instance", inst.string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("at most 4") != std::string::npos);
}

TEST_CASE("history-state energy ledger") {
  const fs::path out = fresh_dir("history");
  REQUIRE(run_cli({"--out-dir", out.string(), "history-state", "--instance", (kInstances / "no_toy").string()}).code == 0);
  const auto j = json_of(out / "history.json");
  CHECK(j["qubits"] == 2 + 4);
  CHECK(j["energies"]["init"].get<double>() == doctest::Approx(0.0));
  CHECK(j["energies"]["clock"].get<double>() == doctest::Approx(0.0));
  CHECK(j["energies"]["prop"].get<double>() == doctest::Approx(0.0));
  CHECK(j["energies"]["final"].get<double>() == doctest::Approx(0.5 / 5).epsilon(1e-10));
}

TEST_CASE("flatten matches the interactive acceptance") {
  const fs::path out = fresh_dir("flatten");
  REQUIRE(run_cli({"--out-dir", out.string(), "flatten", "--instance", (kInstances / "qip_toy").string()}).code == 0);
  const auto j = json_of(out / "flatten.json");
  CHECK(j["interactive_acceptance"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["flattened_acceptance"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs::exists(out / "flattened.circ"));
  CHECK(run_cli({"--out-dir", out.string(), "flatten", "--instance", (kInstances / "yes_toy").string()}).code ==
        cli::kExitUsage);
}

TEST_CASE("mf-run writes a rate, a law and a z-score") {
  const fs::path c = fresh_dir("mf_compile"), h = fresh_dir("mf_history"), out = fresh_dir("mf_out");
  const std::string inst = (kInstances / "no_toy").string();
  REQUIRE(run_cli({"--out-dir", c.string(), "compile-hamiltonian", "--instance", inst}).code == 0);
  REQUIRE(run_cli({"--out-dir", h.string(), "history-state", "--instance", inst}).code == 0);
  REQUIRE(run_cli({"--out-dir", out.string(), "--seed", "3", "--jobs", "3", "mf-run", "--hamiltonian",
                   (c / "h_total.ham").string(), "--state", (h / "history.state").string(), "--trials", "4000"})
              .code == 0);
  const auto j = json_of(out / "mf-run.json");
  CHECK(j["summary"]["trials"] == 4000);
  CHECK(std::abs(j["summary"]["z"].get<double>()) < 4.0);
  CHECK(j["summary"]["prediction"].get<double>() < 0.5);

  // The job count does not change the result.
  const fs::path out1 = fresh_dir("mf_out1");
  REQUIRE(run_cli({"--out-dir", out1.string(), "--seed", "3", "mf-run", "--hamiltonian", (c / "h_total.ham").string(),
                   "--state", (h / "history.state").string(), "--trials", "4000"})
              .code == 0);
  CHECK(slurp(out / "mf-run.json") == slurp(out1 / "mf-run.json"));
}

TEST_CASE("binding-exp with the honest committer") {
  const fs::path out = fresh_dir("binding");
  REQUIRE(run_cli({"--out-dir", out.string(), "binding-exp", "--runs", "2000", "--delta-samples", "200"}).code == 0);
  const auto j = json_of(out / "binding.json");
  CHECK(j["delta_hat"] == 0.0);
  CHECK(j["tv"].get<double>() < 0.1);
  CHECK(run_cli({"binding-exp", "--strategy", "oracle"}).code == cli::kExitUsage);
}

TEST_CASE("protocol-run verdicts, transcripts and seeds") {
  const std::string yes = (kInstances / "yes_toy").string(), no = (kInstances / "no_toy").string();
  const fs::path refuse = fresh_dir("proto_refuse");
  CHECK(run_cli({"--out-dir", refuse.string(), "protocol-run", "--instance", no, "--prover", "refuse"}).code ==
        cli::kExitReject);

  const fs::path a = fresh_dir("proto_a"), b = fresh_dir("proto_b"), c = fresh_dir("proto_c");
  const std::vector<std::string> tail{"protocol-run", "--instance", yes, "--sessions", "20", "--reps", "2"};
  auto with = [&](const fs::path& d, std::vector<std::string> head) {
    head.insert(head.begin(), {"--out-dir", d.string()});
    head.insert(head.end(), tail.begin(), tail.end());
    return run_cli(head);
  };
  REQUIRE(with(a, {"--seed", "9"}).code != cli::kExitUsage);
  REQUIRE(with(b, {"--seed", "9", "--jobs", "4"}).code != cli::kExitUsage);
  REQUIRE(with(c, {"--seed", "10"}).code != cli::kExitUsage);
  CHECK(slurp(a / "protocol.json") == slurp(b / "protocol.json"));
  const fs::path t = "transcripts/session-0007-rep-01.txt";
  CHECK(slurp(a / t) == slurp(b / t));
  CHECK(slurp(a / t) != slurp(c / t));
  CHECK(json_of(a / "protocol.json")["config"]["copies"] == 64);
  CHECK(json_of(a / "protocol.json")["summary"]["prediction"].get<double>() > 0.5);

  // QARG_SEED stands in for --seed.
  const fs::path e = fresh_dir("proto_env");
  ::setenv("QARG_SEED", "9", 1);
  with(e, {});
  ::unsetenv("QARG_SEED");
  CHECK(slurp(a / t) == slurp(e / t));
}

TEST_CASE("report on empty and single inputs") {
  const fs::path empty = fresh_dir("report_empty");
  const Result r0 = run_cli({"--out-dir", empty.string(), "report"});
  CHECK(r0.code == 0);
  CHECK(json_of(empty / "report.json")["rows"].empty());
  CHECK(std::count(r0.out.begin(), r0.out.end(), '\n') == 1);

  const fs::path in = fresh_dir("report_in");
  write(in / "mf-run.json", R"({"kind": "mf-run", "summary": {"subject": "toy", "trials": 100, "rate": 0.5,
        "prediction": 0.45, "z": 1.0050, "good_fraction": null}})");
  const fs::path out1 = fresh_dir("report_one"), out2 = fresh_dir("report_two");
  REQUIRE(run_cli({"--out-dir", out1.string(), "report", in.string()}).code == 0);
  REQUIRE(run_cli({"--out-dir", out2.string(), "report", in.string()}).code == 0);
  const auto rows = json_of(out1 / "report.json")["rows"];
  REQUIRE(rows.size() == 1);
  CHECK(rows[0]["z"] == 1.005);
  CHECK(slurp(out1 / "report.txt").find("1.005") != std::string::npos);
  CHECK(slurp(out1 / "report.txt") == slurp(out2 / "report.txt"));
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));

  write(in / "bad.json", R"({"kind": "mf-run"})");
  CHECK(run_cli({"--out-dir", out1.string(), "report", in.string()}).code == cli::kExitUsage);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run_cli({"witness"}).code == cli::kExitUsage);
  CHECK(run_cli({"witness", "--instance", "/nonexistent"}).code == cli::kExitUsage);
  CHECK(run_cli({"--jobs", "0", "report"}).code == cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
}
