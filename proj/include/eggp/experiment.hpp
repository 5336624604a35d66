#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eggp/adam.hpp"
#include "eggp/simulate.hpp"

namespace eggp {

// Grid of GI training sizes x test offsets x methods x targets.
struct GiPlan {
  bool enabled = false;
  std::vector<int> n_values{5, 10, 15, 20};
  std::vector<double> offsets{-0.1, -0.05, 0.0, 0.05, 0.1, 0.2, 0.3};
  double train_offset = 0.0;
  std::vector<std::string> methods{"eggp", "gpr"};
  std::vector<int> targets{0, 1};
  int min_gap = 20;
  ConnectivityConfig connectivity = gi_default_connectivity();
  AdamConfig adam{};
  GiConfig sim{};
};

// Fixed-vs-evolving adjacency comparison over the offset sweep.
struct GiAblationPlan {
  bool enabled = false;
  int n = 5;
  std::vector<double> offsets{-0.1, -0.05, 0.0, 0.05, 0.1, 0.2, 0.3};
  std::vector<int> targets{0, 1};
  int min_gap = 20;
};

// Node-count generalization: train on one block count, test across several.
struct EisPlan {
  bool enabled = false;
  std::uint64_t train_seed = 21;
  int train_blocks = 4;
  std::vector<int> test_blocks{4, 5, 6};
  std::vector<std::uint64_t> test_seeds{31, 32, 33};
  int n = 5;
  std::vector<std::string> methods{"eggp"};
  std::vector<int> targets{0, 1};
  int min_gap = 20;
  ConnectivityConfig connectivity = eis_default_connectivity();
  AdamConfig adam{};
  EisConfig sim{};
};

struct ExperimentMatrix {
  GiPlan gi;
  GiAblationPlan gi_ablation;
  EisPlan eis;

  static ExperimentMatrix from_file(const std::string& path);
  bool empty() const {
    return !gi.enabled && !gi_ablation.enabled && !eis.enabled;
  }
};

struct ExperimentSummary {
  int computed = 0;
  int reused = 0;
  int failed = 0;
  std::vector<std::string> failures;      // "<cell>: <error>"
  std::vector<std::string> table_paths;   // emitted CSVs, in emission order
};

// Simulates, trains, and evaluates every cell of the matrix under out_dir.
// Artifacts are cached under out_dir/cache keyed by a hash of their full
// config, so interrupted runs resume with only the missing work. Cell
// failures are recorded and the run continues.
ExperimentSummary run_experiment(const ExperimentMatrix& matrix,
                                 const std::string& out_dir, int jobs = 1,
                                 bool svg = false);

}  // namespace eggp
