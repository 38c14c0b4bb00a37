#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qarg/clock.hpp"
#include "qarg/commit.hpp"
#include "qarg/mf.hpp"
#include "qarg/protocol.hpp"
#include "qarg/stats.hpp"

namespace qarg::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out_dir = ".";

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("QARG_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw UsageError(std::string("QARG_SEED is not an unsigned integer: ") + env);
    }
    return kDefaultSeed;
  }
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open " + p.string());
  return in;
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw UsageError("cannot write " + p.string());
  os << text;
  if (!os) throw UsageError("write failed: " + p.string());
}

void write_json(const fs::path& p, const ordered_json& j) { write_file(p, j.dump(2) + "\n"); }

ordered_json read_json(const fs::path& p) {
  std::ifstream in = open_in(p);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(p.string() + ": " + e.what());
  }
}

QuantumCircuit read_circuit_file(const fs::path& p) {
  std::ifstream in = open_in(p);
  return read_circuit(in, p.string());
}

RealState read_state_file(const fs::path& p) {
  std::ifstream in = open_in(p);
  return read_state(in, p.string());
}

std::string state_text(const RealState& s) {
  std::ostringstream os;
  write_state(os, s);
  return os.str();
}

template <typename T>
T field(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw UsageError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(where + ": field '" + key + "' has the wrong type");
  }
}

/// Runs fn(i) for i in [0, n) on `jobs` threads; worker w takes i = w mod jobs.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0u);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += jobs) fn(i, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ordered_json nullable(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// ---------------------------------------------------------------- commands

int cmd_compile(const Globals& g, const std::string& instance_dir, std::ostream& out) {
  const Instance inst = load_instance(instance_dir);
  const ClockBundle b = compile(inst.circuit);
  const fs::path dir = g.out_dir;
  const std::pair<const char*, const Hamiltonian*> parts[] = {
      {"init", &b.h_init}, {"clock", &b.h_clock}, {"prop", &b.h_prop}, {"final", &b.h_final}, {"total", &b.h_total}};
  ordered_json counts = ordered_json::object();
  for (const auto& [name, h] : parts) {
    HamiltonianMetadata meta;
    meta.fields = {{"ell", std::to_string(b.layout.data_qubits)},
                   {"ancillas", std::to_string(b.layout.ancilla_count)},
                   {"clockT", std::to_string(b.layout.clock_qubits)},
                   {"component", name}};
    std::ostringstream os;
    write_hamiltonian(os, *h, meta);
    write_file(dir / (std::string("h_") + name + ".ham"), os.str());
    counts[name] = h->size();
  }
  ordered_json j;
  j["kind"] = "compile";
  j["instance"] = inst.dir.filename().string();
  j["ell"] = b.layout.data_qubits;
  j["ancillas"] = b.layout.ancilla_count;
  j["clockT"] = b.layout.clock_qubits;
  j["qubits"] = b.layout.total_qubits();
  j["pauli_terms"] = counts;
  j["pre_expansion_terms"] = b.pre_expansion_terms;
  j["one_norm"] = b.h_total.one_norm();
  j["one_norm_bound"] = b.one_norm_bound;
  write_json(dir / "compile.json", j);

  out << "instance " << j["instance"].get<std::string>() << ": " << b.layout.total_qubits() << " qubits, T = "
      << b.layout.clock_qubits << "\n";
  for (const auto& [name, h] : parts) out << "  " << std::left << std::setw(6) << name << h->size() << " terms\n";
  out << "  local terms " << b.pre_expansion_terms << ", one-norm " << fixed(b.h_total.one_norm())
      << " (bound " << fixed(b.one_norm_bound, 1) << ")\n";
  return kExitOk;
}

int cmd_witness(const Globals& g, const std::string& instance_dir, std::ostream& out) {
  const Instance inst = load_instance(instance_dir);
  const int w = inst.circuit.witness_qubits();
  if (w > kMaxBruteForceQubits)
    throw TooLarge("brute-force witness needs at most " + std::to_string(kMaxBruteForceQubits) +
                   " witness qubits, instance has " + std::to_string(w));
  const BestWitness best = best_witness(inst.circuit);
  const fs::path dir = g.out_dir;
  write_file(dir / "witness.state", state_text(best.state));
  ordered_json j;
  j["kind"] = "witness";
  j["instance"] = inst.dir.filename().string();
  j["witness_qubits"] = w;
  j["acceptance"] = best.acceptance;
  write_json(dir / "witness.json", j);
  out << "best witness on " << w << " qubit(s): acceptance " << fixed(best.acceptance, 10) << "\n";
  return kExitOk;
}

int cmd_history(const Globals& g, const std::string& instance_dir, const std::string& witness_file,
                std::ostream& out) {
  const Instance inst = load_instance(instance_dir);
  const RealState witness = witness_file.empty() ? resolve_witness(inst) : read_state_file(witness_file);
  const RealState input = circuit_input(inst.circuit, witness);
  const HistoryState hs = history_state(inst.circuit, input, witness_file.empty() ? inst.witness_source : witness_file);
  const ClockBundle b = compile(inst.circuit);
  const int T = b.layout.clock_qubits;
  const double p_acc = probability_one(run_circuit(inst.circuit, input), inst.circuit.output_qubit());

  const fs::path dir = g.out_dir;
  write_file(dir / "history.state", state_text(hs.state));
  ordered_json energies;
  energies["init"] = expectation(hs.state, b.h_init);
  energies["clock"] = expectation(hs.state, b.h_clock);
  energies["prop"] = expectation(hs.state, b.h_prop);
  energies["final"] = expectation(hs.state, b.h_final);
  energies["total"] = expectation(hs.state, b.h_total);
  ordered_json j;
  j["kind"] = "history-state";
  j["instance"] = inst.dir.filename().string();
  j["qubits"] = hs.state.num_qubits();
  j["acceptance"] = p_acc;
  j["predicted_final_energy"] = (1.0 - p_acc) / (T + 1);
  j["energies"] = energies;
  write_json(dir / "history.json", j);

  out << "history state on " << hs.state.num_qubits() << " qubits, acceptance " << fixed(p_acc, 10) << "\n";
  for (const auto& [name, e] : energies.items()) out << "  <H_" << name << "> = " << fixed(e.get<double>(), 12) << "\n";
  out << "  (1 - p)/(T + 1) = " << fixed((1.0 - p_acc) / (T + 1), 12) << "\n";
  return kExitOk;
}

int cmd_mf_run(const Globals& g, const std::string& ham_file, const std::string& state_file, std::size_t trials,
               bool wrapper, std::ostream& out) {
  if (trials == 0) throw UsageError("--trials must be positive");
  std::ifstream hin = open_in(ham_file);
  const Hamiltonian h = read_hamiltonian(hin, ham_file);
  const RealState state = read_state_file(state_file);
  if (state.num_qubits() != h.num_qubits())
    throw DimensionMismatch("state has " + std::to_string(state.num_qubits()) + " qubits, Hamiltonian has " +
                            std::to_string(h.num_qubits()));
  const MFSampler sampler(h);
  const std::uint64_t seed = g.resolved_seed();
  const int q = sampler.num_qubits();

  std::vector<std::uint8_t> verdicts(trials);
  parallel_for(trials, g.jobs, [&](std::size_t i, unsigned) {
    Rng rng(derive_seed(seed, i));
    const RandomnessTape tape = RandomnessTape::random(sampler.tape_length(), rng);
    if (wrapper) {
      BasisString b(q);
      for (auto& x : b) x = rng.bit() ? Basis::X : Basis::Z;
      verdicts[i] = vmf(sampler, tape, b, measure(b, state, rng).record);
    } else {
      const MFSampler::Sample smp = sampler.sample(tape);
      verdicts[i] = decide(sampler.hamiltonian(), smp.term, measure(smp.basis, state, rng).record);
    }
  });

  const std::size_t accepts = static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), 1));
  const double rate = static_cast<double>(accepts) / static_cast<double>(trials);
  const double energy = expectation(state, sampler.hamiltonian());
  const double norm = sampler.hamiltonian().one_norm();
  const double predicted = wrapper ? vmf_acceptance_law(energy, norm) : mf_acceptance_law(energy, norm);
  const double z = z_score(rate, predicted, trials);

  ordered_json j;
  j["kind"] = "mf-run";
  j["hamiltonian"] = fs::path(ham_file).filename().string();
  j["state"] = fs::path(state_file).filename().string();
  j["verifier"] = wrapper ? "vmf" : "decide";
  j["seed"] = seed;
  j["energy"] = energy;
  j["one_norm"] = norm;
  j["summary"] = {{"subject", j["hamiltonian"].get<std::string>() + " " + j["verifier"].get<std::string>()},
                  {"trials", trials},
                  {"rate", rate},
                  {"prediction", predicted},
                  {"z", z},
                  {"good_fraction", nullptr}};
  write_json(fs::path(g.out_dir) / "mf-run.json", j);
  out << (wrapper ? "vmf" : "decide") << ": " << accepts << "/" << trials << " accepted, rate " << fixed(rate)
      << ", law " << fixed(predicted) << ", z " << fixed(z, 3) << "\n";
  return kExitOk;
}

int cmd_flatten(const Globals& g, const std::string& instance_dir, std::ostream& out) {
  const Instance inst = load_instance(instance_dir);
  if (!inst.qip) throw UsageError(inst.dir.string() + " is not a QIP bundle");
  const FlattenedVerifier f = flatten(*inst.qip);
  const RealState witness = resolve_witness(inst);
  const double interactive = interactive_accept_prob(*inst.qip, witness);
  const double flat = acceptance(f.circuit, witness);
  std::ostringstream os;
  write_circuit(os, f.circuit);
  const fs::path dir = g.out_dir;
  write_file(dir / "flattened.circ", os.str());
  ordered_json j;
  j["kind"] = "flatten";
  j["instance"] = inst.dir.filename().string();
  j["witness_qubits"] = f.witness_qubits;
  j["ancilla_qubits"] = f.ancilla_qubits;
  j["output_qubit"] = f.output_qubit;
  j["gates"] = f.circuit.gate_count();
  j["interactive_acceptance"] = interactive;
  j["flattened_acceptance"] = flat;
  write_json(dir / "flatten.json", j);
  out << "flattened verifier: " << f.circuit.num_qubits << " qubits, " << f.circuit.gate_count() << " gates\n"
      << "  interactive acceptance " << fixed(interactive, 12) << "\n"
      << "  flattened acceptance   " << fixed(flat, 12) << "\n";
  return kExitOk;
}

int cmd_binding(const Globals& g, const std::string& strategy_name, std::size_t lambda, std::size_t runs,
                std::size_t delta_samples, const std::string& basis_text, const std::string& state_file,
                std::ostream& out) {
  if (runs == 0 || delta_samples == 0) throw UsageError("--runs and --delta-samples must be positive");
  const std::unique_ptr<CommitterStrategy> strategy = make_committer(strategy_name);
  if (!strategy) throw UsageError("unknown strategy '" + strategy_name + "' (honest, refuse, basis-flipper)");
  const BasisString b = parse_basis(basis_text);
  const std::uint64_t seed = g.resolved_seed();
  RealState sigma;
  if (state_file.empty()) {
    Rng rng(derive_seed(seed, 0));
    sigma = RealState::random(static_cast<int>(b.size()), rng);
  } else {
    sigma = read_state_file(state_file);
  }
  if (static_cast<std::size_t>(sigma.num_qubits()) != b.size())
    throw DimensionMismatch("basis has " + std::to_string(b.size()) + " positions, state has " +
                            std::to_string(sigma.num_qubits()) + " qubits");
  const BindingReport r =
      binding_experiment(*strategy, lambda, b, ProductState(sigma), runs, delta_samples, derive_seed(seed, 1));

  ordered_json delta = ordered_json::array();
  for (const auto& e : r.delta.per_basis)
    delta.push_back({{"basis", e.label}, {"rejections", e.rejections}, {"trials", e.trials}, {"rate", e.rate}});
  ordered_json j;
  j["kind"] = "binding-exp";
  j["strategy"] = r.strategy;
  j["lambda"] = lambda;
  j["basis"] = basis_text;
  j["seed"] = seed;
  j["delta"] = delta;
  j["delta_hat"] = r.delta.delta_hat;
  j["real"] = r.real;
  j["ideal"] = r.ideal;
  j["tv"] = r.tv;
  j["bound"] = r.bound;
  j["within_bound"] = r.within_bound();
  j["summary"] = {{"subject", "binding " + r.strategy},
                  {"trials", r.runs},
                  {"rate", r.delta.delta_hat},
                  {"prediction", nullptr},
                  {"z", nullptr},
                  {"good_fraction", nullptr},
                  {"tv", r.tv},
                  {"bound", r.bound}};
  write_json(fs::path(g.out_dir) / "binding.json", j);
  out << "binding " << r.strategy << ": delta_hat " << fixed(r.delta.delta_hat) << ", TV " << fixed(r.tv)
      << ", bound C*sqrt(delta_hat) " << fixed(r.bound) << (r.within_bound() ? "" : "  VIOLATED") << "\n";
  return kExitOk;
}

struct ProtocolArgs {
  std::string instance;
  std::string prover = "honest";
  std::size_t lambda = 8;
  std::size_t reps = 1;
  std::size_t sessions = 1;
  std::size_t max_copies = kDefaultMaxCopies;
  std::size_t good_set = 0;
};

int cmd_protocol(const Globals& g, const ProtocolArgs& a, std::ostream& out) {
  if (a.sessions == 0) throw UsageError("--sessions must be positive");
  const Instance inst = load_instance(a.instance);
  const RealState witness = resolve_witness(inst);
  const ProtocolContext ctx(inst.circuit, inst.c, inst.s, a.lambda, a.max_copies);
  const std::uint64_t seed = g.resolved_seed();
  const unsigned jobs = std::max(1u, g.jobs);

  // One prover per worker; strategies are not shared across threads.
  std::vector<ProverStrategy> provers;
  for (unsigned w = 0; w < jobs; ++w) provers.push_back(make_prover(a.prover, ctx, witness, derive_seed(seed, 0)));

  std::vector<RepeatedResult> results(a.sessions);
  parallel_for(a.sessions, jobs, [&](std::size_t i, unsigned w) {
    results[i] = run_repeated(ctx, provers[w], a.reps, derive_seed(seed, 2 * i + 2), derive_seed(seed, 2 * i + 3));
  });

  const fs::path dir = fs::path(g.out_dir) / "transcripts";
  std::size_t accepts = 0;
  for (std::size_t i = 0; i < a.sessions; ++i) {
    accepts += results[i].accept;
    for (std::size_t r = 0; r < results[i].transcripts.size(); ++r) {
      char name[64];
      std::snprintf(name, sizeof name, "session-%04zu-rep-%02zu.txt", i, r);
      write_file(dir / name, results[i].transcripts[r].serialize());
    }
  }
  const double rate = static_cast<double>(accepts) / static_cast<double>(a.sessions);

  std::optional<double> prediction;
  if (a.prover == "honest") {
    const RealState eta = history_state(ctx.circuit, circuit_input(ctx.circuit, witness)).state;
    prediction = std::pow(composed_prediction(ctx.config, copy_acceptance(ctx, eta)), static_cast<double>(a.reps));
  }
  std::optional<double> z;
  if (prediction) z = z_score(rate, *prediction, a.sessions);

  const SessionConfig& cfg = ctx.config;
  ordered_json j;
  j["kind"] = "protocol-run";
  j["instance"] = inst.dir.filename().string();
  j["label"] = inst.label;
  j["prover"] = a.prover;
  j["seed"] = seed;
  j["config"] = {{"lambda", cfg.lambda}, {"c", cfg.c},         {"s", cfg.s},         {"c_mf", cfg.c_mf},
                 {"s_mf", cfg.s_mf},     {"p", cfg.p},         {"copies", cfg.copies}, {"tau", cfg.tau},
                 {"threshold", cfg.threshold()}, {"copy_qubits", cfg.copy_qubits}, {"ell", cfg.ell}};
  j["reps"] = a.reps;
  j["sessions"] = a.sessions;
  j["accepts"] = accepts;

  std::optional<double> good_fraction;
  if (a.good_set > 0) {
    const GoodSetReport gs =
        good_set_experiment(ctx, provers[0], a.good_set, a.good_set, a.sessions, derive_seed(seed, 1));
    good_fraction = gs.good_fraction;
    j["good_set"] = {{"seeds", a.good_set},          {"delta_hat", gs.delta_hat},
                     {"threshold", gs.threshold},    {"good_fraction", gs.good_fraction},
                     {"markov_bound", gs.markov_bound}};
  }
  j["summary"] = {{"subject", j["instance"].get<std::string>() + " " + a.prover},
                  {"trials", a.sessions},
                  {"rate", rate},
                  {"prediction", nullable(prediction)},
                  {"z", nullable(z)},
                  {"good_fraction", nullable(good_fraction)}};
  write_json(fs::path(g.out_dir) / "protocol.json", j);

  out << inst.dir.filename().string() << " (" << inst.label << "), prover " << a.prover << ": " << accepts << "/"
      << a.sessions << " accepted";
  if (prediction) out << ", predicted " << fixed(*prediction) << ", z " << fixed(*z, 3);
  out << "\n  copies " << cfg.copies << ", threshold " << cfg.threshold() << ", c_mf " << fixed(cfg.c_mf, 9)
      << ", s_mf " << fixed(cfg.s_mf, 9) << "\n";
  if (good_fraction) out << "  good fraction " << fixed(*good_fraction, 4) << "\n";
  // A single run reports its verdict; a batch rejects when most sessions do.
  return 2 * accepts >= a.sessions ? kExitOk : kExitReject;
}

// ---------------------------------------------------------------- report

struct ReportRow {
  std::string kind;
  std::string subject;
  std::size_t trials = 0;
  double rate = 0.0;
  std::optional<double> prediction, z, good_fraction, tv, bound;
};

std::optional<double> opt_number(const ordered_json& s, const char* key, const std::string& where) {
  if (!s.contains(key) || s.at(key).is_null()) return std::nullopt;
  if (!s.at(key).is_number()) throw UsageError(where + ": summary field '" + key + "' is not a number");
  return s.at(key).get<double>();
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"mf-run", "protocol-run", "binding-exp"};
  return k;
}

const std::vector<std::string>& auxiliary_kinds() {
  static const std::vector<std::string> k{"compile", "witness", "history-state", "flatten", "report"};
  return k;
}

std::optional<ReportRow> read_row(const fs::path& p) {
  const ordered_json j = read_json(p);
  const std::string where = p.string();
  if (!j.is_object()) throw UsageError(where + ": not a JSON object");
  const auto kind = field<std::string>(j, "kind", where);
  const auto& aux = auxiliary_kinds();
  if (std::find(aux.begin(), aux.end(), kind) != aux.end()) return std::nullopt;
  const auto& exp = experiment_kinds();
  if (std::find(exp.begin(), exp.end(), kind) == exp.end()) throw UsageError(where + ": unknown kind '" + kind + "'");
  const auto s = field<ordered_json>(j, "summary", where);
  ReportRow r;
  r.kind = kind;
  r.subject = field<std::string>(s, "subject", where);
  r.trials = field<std::size_t>(s, "trials", where);
  r.rate = field<double>(s, "rate", where);
  r.prediction = opt_number(s, "prediction", where);
  r.z = opt_number(s, "z", where);
  r.good_fraction = opt_number(s, "good_fraction", where);
  r.tv = opt_number(s, "tv", where);
  r.bound = opt_number(s, "bound", where);
  return r;
}

std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw UsageError("no such input: " + in);
    }
  }
  return files;
}

std::string cell(std::optional<double> v, int digits) { return v ? fixed(*v, digits) : "-"; }

int cmd_report(const Globals& g, const std::vector<std::string>& inputs, std::ostream& out) {
  std::vector<ReportRow> rows;
  for (const auto& p : collect_inputs(inputs))
    if (auto r = read_row(p)) rows.push_back(std::move(*r));

  std::ostringstream table;
  const auto line = [&](const std::string& kind, const std::string& subject, const std::string& trials,
                        const std::string& rate, const std::string& pred, const std::string& z, const std::string& good,
                        const std::string& tv, const std::string& bound) {
    table << std::left << std::setw(13) << kind << std::setw(28) << subject << std::right << std::setw(8) << trials
          << std::setw(11) << rate << std::setw(11) << pred << std::setw(9) << z << std::setw(8) << good
          << std::setw(10) << tv << std::setw(10) << bound << "\n";
  };
  line("kind", "subject", "trials", "rate", "predicted", "z", "good", "tv", "bound");
  ordered_json jrows = ordered_json::array();
  for (const auto& r : rows) {
    line(r.kind, r.subject, std::to_string(r.trials), fixed(r.rate), cell(r.prediction, 6), cell(r.z, 3),
         cell(r.good_fraction, 3), cell(r.tv, 5), cell(r.bound, 5));
    jrows.push_back({{"kind", r.kind},
                     {"subject", r.subject},
                     {"trials", r.trials},
                     {"rate", r.rate},
                     {"prediction", nullable(r.prediction)},
                     {"z", nullable(r.z)},
                     {"good_fraction", nullable(r.good_fraction)},
                     {"tv", nullable(r.tv)},
                     {"bound", nullable(r.bound)}});
  }
  const fs::path dir = g.out_dir;
  write_file(dir / "report.txt", table.str());
  write_json(dir / "report.json", ordered_json{{"kind", "report"}, {"rows", jrows}});
  out << table.str();
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------- instances

Instance load_instance(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const ordered_json m = read_json(manifest_path);
  const std::string where = manifest_path.string();
  Instance inst;
  inst.dir = dir;
  inst.kind = field<std::string>(m, "kind", where);
  inst.label = field<std::string>(m, "label", where);
  inst.c = field<double>(m, "c", where);
  inst.s = field<double>(m, "s", where);
  inst.witness_source = field<std::string>(m, "witness", where);
  if (inst.label != "YES" && inst.label != "NO") throw UsageError(where + ": label must be YES or NO");
  if (inst.kind == "circuit") {
    inst.circuit = read_circuit_file(dir / "circuit.circ");
  } else if (inst.kind == "qip") {
    const auto regs = field<ordered_json>(m, "registers", where);
    PublicCoinQIP q;
    q.reg_a = field<int>(regs, "a", where);
    q.reg_b = field<int>(regs, "b", where);
    q.reg_c = field<int>(regs, "c", where);
    q.rand_len = field<int>(regs, "r", where);
    q.u1 = read_circuit_file(dir / "u1.circ");
    q.u2 = read_circuit_file(dir / "u2.circ");
    q.v2 = read_circuit_file(dir / "v2.circ");
    inst.circuit = flatten(q).circuit;
    inst.qip = std::move(q);
  } else {
    throw UsageError(where + ": kind must be circuit or qip");
  }
  return inst;
}

RealState resolve_witness(const Instance& inst) {
  if (inst.witness_source == "brute-force") {
    const int w = inst.circuit.witness_qubits();
    if (w > kMaxBruteForceQubits)
      throw TooLarge("brute-force witness needs at most " + std::to_string(kMaxBruteForceQubits) +
                     " witness qubits, instance has " + std::to_string(w));
    return best_witness(inst.circuit).state;
  }
  RealState w = read_state_file(inst.dir / inst.witness_source);
  if (w.num_qubits() != inst.circuit.witness_qubits())
    throw DimensionMismatch("witness has " + std::to_string(w.num_qubits()) + " qubits, circuit expects " +
                            std::to_string(inst.circuit.witness_qubits()));
  return w;
}

// ---------------------------------------------------------------- entry

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classical verification pipeline: clock Hamiltonians, MF sampling, commitments, protocol runs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed (default: $QARG_SEED, else 1)");
  app.add_option("--jobs", g.jobs, "Worker threads for per-trial loops")->check(CLI::Range(1u, 256u));
  app.add_option("--out-dir", g.out_dir, "Directory for output files");

  std::string instance;
  auto* compile_cmd = app.add_subcommand("compile-hamiltonian", "Write the clock Hamiltonian components");
  compile_cmd->add_option("--instance", instance, "Instance directory")->required();

  auto* witness_cmd = app.add_subcommand("witness", "Brute-force best witness (at most 4 witness qubits)");
  witness_cmd->add_option("--instance", instance, "Instance directory")->required();

  std::string witness_file;
  auto* history_cmd = app.add_subcommand("history-state", "Write the history state and its energy ledger");
  history_cmd->add_option("--instance", instance, "Instance directory")->required();
  history_cmd->add_option("--witness", witness_file, "Witness state file (default: the manifest's source)");

  std::string ham_file, state_file;
  std::size_t trials = 10000;
  bool wrapper = false;
  auto* mf_cmd = app.add_subcommand("mf-run", "Monte Carlo of the MF verifier against its analytic law");
  mf_cmd->add_option("--hamiltonian", ham_file, "Hamiltonian file")->required();
  mf_cmd->add_option("--state", state_file, "State dump")->required();
  mf_cmd->add_option("--trials", trials, "Number of trials");
  mf_cmd->add_flag("--wrapper", wrapper, "Run the basis-checking wrapper instead of decide");

  auto* flatten_cmd = app.add_subcommand("flatten", "Flatten a QIP bundle and compare acceptances");
  flatten_cmd->add_option("--instance", instance, "Instance directory")->required();

  std::string strategy = "honest", basis = "101";
  std::size_t lambda = kMinLambda, runs = 10000, delta_samples = 2000;
  auto* binding_cmd = app.add_subcommand("binding-exp", "Real vs Ideal binding experiment");
  binding_cmd->add_option("--strategy", strategy, "honest, refuse or basis-flipper");
  binding_cmd->add_option("--lambda", lambda, "Security parameter");
  binding_cmd->add_option("--runs", runs, "Paired Real/Ideal runs");
  binding_cmd->add_option("--delta-samples", delta_samples, "Openings per basis for delta_hat");
  binding_cmd->add_option("--basis", basis, "Basis string over {0, 1}");
  binding_cmd->add_option("--state", state_file, "State dump (default: random, from the seed)");

  ProtocolArgs pa;
  auto* protocol_cmd = app.add_subcommand("protocol-run", "Run protocol sessions and write transcripts");
  protocol_cmd->add_option("--instance", pa.instance, "Instance directory")->required();
  protocol_cmd->add_option("--prover", pa.prover, "honest, wrong-state, refuse or basis-flipper");
  protocol_cmd->add_option("--lambda", pa.lambda, "Seed length in bits");
  protocol_cmd->add_option("--reps", pa.reps, "Sequential repetitions per session")
      ->check(CLI::Range(std::size_t{1}, kMaxRepetitions));
  protocol_cmd->add_option("--sessions", pa.sessions, "Independent sessions");
  protocol_cmd->add_option("--max-copies", pa.max_copies, "Cap on history-state copies");
  protocol_cmd->add_option("--good-set", pa.good_set, "Seeds s1 (and s2 per seed) for the Good-set experiment");

  std::vector<std::string> inputs;
  auto* report_cmd = app.add_subcommand("report", "Aggregate result files into a table");
  report_cmd->add_option("inputs", inputs, "Result files or directories");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*compile_cmd) return cmd_compile(g, instance, out);
    if (*witness_cmd) return cmd_witness(g, instance, out);
    if (*history_cmd) return cmd_history(g, instance, witness_file, out);
    if (*mf_cmd) return cmd_mf_run(g, ham_file, state_file, trials, wrapper, out);
    if (*flatten_cmd) return cmd_flatten(g, instance, out);
    if (*binding_cmd) return cmd_binding(g, strategy, lambda, runs, delta_samples, basis, state_file, out);
    if (*protocol_cmd) return cmd_protocol(g, pa, out);
    if (*report_cmd) return cmd_report(g, inputs, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace qarg::cli
