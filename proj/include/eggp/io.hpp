#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eggp/graph.hpp"
#include "eggp/gram.hpp"
#include "eggp/kernels.hpp"
#include "eggp/model.hpp"

namespace eggp::io {

// Shortest decimal form that parses back to the same bits; nan/inf spelled out.
std::string format_double(double v);

std::string read_text(const std::string& path);
// Writes to a sibling temp file, then renames over the target.
void write_text_atomic(const std::string& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

// Graph series: one snapshot per line,
// {"t", "vertices": [{"pos","vel","attrs"}...], "edges", "mandatory_edges"}.
void write_series(const std::string& path, const GraphSeries& series);
GraphSeries read_series(const std::string& path);

struct SeriesMeta {
  std::string env;
  std::uint64_t seed = 0;
  double offset = 0.0;
  std::map<std::string, std::string> config;
};
// Sidecar lives at <series path>.meta.json.
void write_series_meta(const std::string& series_path, const SeriesMeta& meta);
std::optional<SeriesMeta> read_series_meta(const std::string& series_path);

void save_model(const std::string& path, const FittedModel& model);
FittedModel load_model(const std::string& path);

// Flat kernel parameter bundle with the feature standardization they assume.
void write_kernel_params(const std::string& path,
                         const SubTreeKernelParams& params,
                         const Standardization& input_std);
std::pair<SubTreeKernelParams, Standardization> read_kernel_params(
    const std::string& path);

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);
void write_loss_csv(const std::string& path, const std::vector<double>& trace);

// Provenance record for an artifact: command, parameters, and content hashes
// of every input and output. Deliberately carries no timestamps.
void write_manifest(const std::string& path, const std::string& command,
                    const std::map<std::string, std::string>& params,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths);

}  // namespace eggp::io
