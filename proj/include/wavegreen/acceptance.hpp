#pragma once

#include <string>
#include <vector>

// End-to-end verification suite: eleven numbered criteria covering the
// dispersion layer, the strip reference solver, the symbol quantization, the
// ray flows, and the assembled outgoing field.  Each criterion is a
// self-contained study with frozen thresholds; `run_all` executes them in
// order and reports PASS/FAIL with a one-line measurement summary.

namespace wgf::acceptance {

struct Criterion {
  int id;
  std::string name;
  bool pass;
  std::string detail;  // measured numbers vs thresholds
};

/// Runs criteria `first..last` (1-based, inclusive).  Exceptions inside a
/// criterion are caught and reported as FAIL with the message in `detail`.
std::vector<Criterion> run_range(int first, int last);

inline std::vector<Criterion> run_all() { return run_range(1, 11); }

}  // namespace wgf::acceptance
