#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace arflow {

/// Deliberate defects the suite must catch; used to test the suite itself.
enum class Mutation { kNone, kX1FromV, kX0Hat, kInterpolate };

Mutation parse_mutation(const std::string& name);
const char* mutation_name(Mutation m);

struct PropertyResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;   // worst error observed
  double tolerance = 0.0;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20240607;
  Mutation mutation = Mutation::kNone;
};

/// Algebraic dualities, sampler reductions and finite-difference gradient
/// checks on seeded random instances.
std::vector<PropertyResult> run_verify(const VerifyOptions& options);

/// One line per property plus a summary line.
std::string format_verify_table(const std::vector<PropertyResult>& results);

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-6);

}  // namespace arflow
