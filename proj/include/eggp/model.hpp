#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "eggp/adam.hpp"
#include "eggp/gp.hpp"
#include "eggp/gram.hpp"
#include "eggp/graph.hpp"
#include "eggp/kernels.hpp"

namespace eggp {

enum class AdjacencyMode { evolving, fixed };
enum class Method { eggp, gpr };

std::string to_string(AdjacencyMode m);
std::string to_string(Method m);
AdjacencyMode adjacency_mode_from_string(const std::string& s);
Method method_from_string(const std::string& s);

// Training point selection: per node, the timepoints with the largest
// second difference on the target dimension, greedily thinned by a minimum
// temporal gap that is relaxed one step at a time until enough points exist.
struct SelectionConfig {
  int points_per_node = 10;
  int min_gap = 20;
  int target_dim = 0;

  void validate() const;
};

struct TransitionDataset {
  std::vector<SubTree> inputs;
  Eigen::MatrixXd targets;  // n x P, one-step displacements
  struct Provenance {
    int t = 0;
    int node = 0;
  };
  std::vector<Provenance> provenance;

  Eigen::Index size() const { return targets.rows(); }
};

TransitionDataset select_training_points(const GraphSeries& series,
                                         const SelectionConfig& cfg);

struct FitOptions {
  Method method = Method::eggp;
  AdjacencyMode mode = AdjacencyMode::evolving;
  ConnectivityConfig connectivity{};
  std::vector<bool> attr_mask;   // empty -> all attributes
  std::vector<int> target_dims;  // empty -> all position dims
  AdamConfig adam{};
  double init_log_noise = std::log(1e-2);
  bool optimize = true;  // false: keep the initial parameters
};

struct Prediction {
  Eigen::MatrixXd mean;      // M x F, de-standardized
  Eigen::MatrixXd variance;  // M x F
};

struct FittedModel {
  Method method = Method::eggp;
  AdjacencyMode mode = AdjacencyMode::evolving;
  ConnectivityConfig connectivity{};
  std::vector<bool> attr_mask;
  std::vector<int> target_dims;
  SubTreeKernelParams kernel;
  double log_noise = 0.0;
  Standardization input_std;   // mapped feature space
  Standardization target_std;  // fitted outputs
  std::vector<SubTree> train_inputs;
  Eigen::MatrixXd alpha;  // n x F, standardized target space
  std::vector<double> loss_trace;
  struct TrainingEcho {
    int n_points = 0;
    int min_gap = 0;
    int selection_target = 0;
  } training;

  // Rebuilt from the fields above; not serialized.
  SubtreeDesign design;
  CholeskyFactor chol;

  Eigen::Index output_dim() const {
    return static_cast<Eigen::Index>(target_dims.size());
  }
  Eigen::Index position_dim() const {
    return train_inputs.front().root.position_dim();
  }
  // Recompute the standardized design and the Cholesky factor. Must be called
  // after deserialization; fit() does it internally.
  void finalize();
};

FittedModel fit_dataset(const TransitionDataset& ds, const FitOptions& opts);
// Skip optimization entirely and freeze the given parameters.
FittedModel fit_dataset_with_params(const TransitionDataset& ds,
                                    const FitOptions& opts,
                                    const SubTreeKernelParams& kernel,
                                    double log_noise);
// Select points from the series (honoring the adjacency mode), then fit.
FittedModel fit(const GraphSeries& series, const SelectionConfig& sel,
                const FitOptions& opts);
// Same engine over the plain attribute vector: all-true mask, no leaves.
FittedModel fit_gpr_baseline(const GraphSeries& series,
                             const SelectionConfig& sel, FitOptions opts);

// One-step posterior over every node of the query snapshot. In evolving mode
// edges are rebuilt from positions; in fixed mode the snapshot's edge set is
// used as given (callers hold it at the trajectory's initial adjacency).
Prediction predict_step(const FittedModel& model, const GraphSnapshot& g);

// Replace every snapshot's edges with those of the first one. The adjacency
// companion of mode == fixed for training and evaluation.
GraphSeries freeze_adjacency(const GraphSeries& series);

struct Rollout {
  GraphSeries snapshots;  // [g0, g1, ..., g_steps]
  std::vector<Eigen::MatrixXd> variances;
};
Rollout rollout(const FittedModel& model, const GraphSnapshot& g0, int steps);

}  // namespace eggp
