#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qarg/flatten.hpp"
#include "qarg/sim.hpp"

namespace qarg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitReject = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

/// Seed used when neither --seed nor QARG_SEED is given.
inline constexpr std::uint64_t kDefaultSeed = 1;

/// Brute-force witnesses are limited to this many witness qubits.
inline constexpr int kMaxBruteForceQubits = 4;

/// Malformed manifest, result file or argument combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Instance directory:
///   manifest.json  {"kind": "circuit" | "qip", "label": "YES" | "NO",
///                   "c": .., "s": .., "witness": "brute-force" | <file>,
///                   "registers": {"a", "b", "c", "r"} for qip}
///   circuit.circ   for kind circuit
///   u1.circ, u2.circ, v2.circ for kind qip
struct Instance {
  std::filesystem::path dir;
  std::string kind;
  std::string label;
  double c = 0.0;
  double s = 0.0;
  std::string witness_source;
  std::optional<PublicCoinQIP> qip;
  /// The raw circuit, or the flattened verifier of a QIP bundle.
  QuantumCircuit circuit;
};

Instance load_instance(const std::filesystem::path& dir);

/// Witness from the manifest: a state file relative to the instance, or the
/// top eigenvector of the accept operator (at most 4 witness qubits).
RealState resolve_witness(const Instance& instance);

/// Runs one command line (without the program name). Output files go under
/// --out-dir; human-readable summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qarg::cli
