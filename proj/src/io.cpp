#include "eggp/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eggp/errors.hpp"
#include "eggp/version.hpp"
#include "json.hpp"

namespace eggp::io {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const ordered_json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (const auto& x : a) v[i++] = x.get<double>();
  return v;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from(const ordered_json& rows, const char* what) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != c)
      throw IoError(std::string(what) + ": ragged matrix rows");
    m.row(i++) = vector_from(row).transpose();
  }
  return m;
}

ordered_json edges_json(const EdgeList& edges) {
  ordered_json a = ordered_json::array();
  for (const auto& [i, j] : edges) a.push_back(ordered_json::array({i, j}));
  return a;
}

EdgeList edges_from(const ordered_json& a) {
  EdgeList edges;
  edges.reserve(a.size());
  for (const auto& e : a) {
    if (!e.is_array() || e.size() != 2) throw IoError("edge must be a pair");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return edges;
}

ordered_json vertex_json(const VertexState& v) {
  ordered_json j;
  j["pos"] = vector_json(v.position);
  j["vel"] = vector_json(v.prev_velocity);
  j["attrs"] = vector_json(v.static_attrs);
  return j;
}

VertexState vertex_from(const ordered_json& j) {
  VertexState v;
  v.position = vector_from(j.at("pos"));
  v.prev_velocity = vector_from(j.at("vel"));
  v.static_attrs = vector_from(j.at("attrs"));
  return v;
}

ordered_json subtree_json(const SubTree& st) {
  ordered_json j;
  j["root"] = vertex_json(st.root);
  ordered_json leaves = ordered_json::array();
  for (const auto& l : st.leaves) leaves.push_back(vertex_json(l));
  j["leaves"] = std::move(leaves);
  return j;
}

SubTree subtree_from(const ordered_json& j) {
  SubTree st;
  st.root = vertex_from(j.at("root"));
  for (const auto& l : j.at("leaves")) st.leaves.push_back(vertex_from(l));
  return st;
}

ordered_json ard_json(const ArdRbfParams& p) {
  ordered_json j;
  j["log_ls"] = vector_json(p.log_lengthscales);
  j["log_var"] = p.log_variance;
  return j;
}

ArdRbfParams ard_from(const ordered_json& j) {
  ArdRbfParams p;
  p.log_lengthscales = vector_from(j.at("log_ls"));
  p.log_variance = j.at("log_var").get<double>();
  return p;
}

ordered_json mask_json(const std::vector<bool>& mask) {
  ordered_json a = ordered_json::array();
  for (bool b : mask) a.push_back(b);
  return a;
}

std::vector<bool> mask_from(const ordered_json& a) {
  std::vector<bool> mask;
  mask.reserve(a.size());
  for (const auto& b : a) mask.push_back(b.get<bool>());
  return mask;
}

ordered_json std_json(const Standardization& s) {
  ordered_json j;
  j["mean"] = vector_json(s.mean);
  j["std"] = vector_json(s.stddev);
  return j;
}

Standardization std_from(const ordered_json& j) {
  Standardization s;
  s.mean = vector_from(j.at("mean"));
  s.stddev = vector_from(j.at("std"));
  return s;
}

ordered_json parse_file(const std::string& path) {
  try {
    return ordered_json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void dump_atomic(const std::string& path, const ordered_json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return std::move(ss).str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory for " + path + ": " + ec.message());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  return sha256_hex(read_text(path));
}

void write_series(const std::string& path, const GraphSeries& series) {
  std::string out;
  for (const auto& g : series) {
    ordered_json j;
    j["t"] = g.time_index();
    ordered_json verts = ordered_json::array();
    for (const auto& v : g.vertices()) verts.push_back(vertex_json(v));
    j["vertices"] = std::move(verts);
    j["edges"] = edges_json(g.edges());
    j["mandatory_edges"] = edges_json(g.mandatory_edges());
    out += j.dump();
    out += '\n';
  }
  write_text_atomic(path, out);
}

GraphSeries read_series(const std::string& path) {
  std::istringstream in(read_text(path));
  GraphSeries series;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
      std::vector<VertexState> verts;
      for (const auto& v : j.at("vertices")) verts.push_back(vertex_from(v));
      series.emplace_back(j.at("t").get<int>(), std::move(verts),
                          edges_from(j.at("edges")),
                          edges_from(j.at("mandatory_edges")));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (series.empty()) throw IoError(path + ": no snapshots");
  return series;
}

void write_series_meta(const std::string& series_path, const SeriesMeta& meta) {
  ordered_json j;
  j["env"] = meta.env;
  j["seed"] = meta.seed;
  j["offset"] = meta.offset;
  ordered_json cfg;
  for (const auto& [k, v] : meta.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  dump_atomic(series_path + ".meta.json", j);
}

std::optional<SeriesMeta> read_series_meta(const std::string& series_path) {
  const std::string path = series_path + ".meta.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  const ordered_json j = parse_file(path);
  SeriesMeta meta;
  try {
    meta.env = j.at("env").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.offset = j.at("offset").get<double>();
    for (const auto& [k, v] : j.at("config").items())
      meta.config[k] = v.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return meta;
}

void save_model(const std::string& path, const FittedModel& model) {
  ordered_json j;
  j["format"] = "eggp-model";
  j["version"] = 1;
  j["method"] = to_string(model.method);
  j["mode"] = to_string(model.mode);
  ordered_json conn;
  conn["r_nn"] = model.connectivity.r_nn;
  conn["k_nn"] = model.connectivity.k_nn;
  j["connectivity"] = std::move(conn);
  ordered_json dims = ordered_json::array();
  for (int d : model.target_dims) dims.push_back(d);
  j["target_dims"] = std::move(dims);
  ordered_json kernel;
  kernel["root"] = ard_json(model.kernel.root);
  kernel["leaf"] = ard_json(model.kernel.leaf);
  kernel["mask"] = mask_json(model.kernel.attr_mask);
  j["kernel"] = std::move(kernel);
  j["log_noise"] = model.log_noise;
  j["input_standardization"] = std_json(model.input_std);
  j["target_standardization"] = std_json(model.target_std);
  ordered_json training;
  training["n_points"] = model.training.n_points;
  training["min_gap"] = model.training.min_gap;
  training["selection_target"] = model.training.selection_target;
  j["training"] = std::move(training);
  ordered_json subtrees = ordered_json::array();
  for (const auto& st : model.train_inputs) subtrees.push_back(subtree_json(st));
  j["train_subtrees"] = std::move(subtrees);
  j["alpha"] = matrix_json(model.alpha);
  dump_atomic(path, j);
}

FittedModel load_model(const std::string& path) {
  const ordered_json j = parse_file(path);
  FittedModel m;
  try {
    if (j.at("format").get<std::string>() != "eggp-model")
      throw IoError(path + ": not a model file");
    if (j.at("version").get<int>() != 1)
      throw IoError(path + ": unsupported model version");
    m.method = method_from_string(j.at("method").get<std::string>());
    m.mode = adjacency_mode_from_string(j.at("mode").get<std::string>());
    m.connectivity.r_nn = j.at("connectivity").at("r_nn").get<double>();
    m.connectivity.k_nn = j.at("connectivity").at("k_nn").get<int>();
    for (const auto& d : j.at("target_dims")) m.target_dims.push_back(d.get<int>());
    m.kernel.root = ard_from(j.at("kernel").at("root"));
    m.kernel.leaf = ard_from(j.at("kernel").at("leaf"));
    m.kernel.attr_mask = mask_from(j.at("kernel").at("mask"));
    m.attr_mask = m.kernel.attr_mask;
    m.log_noise = j.at("log_noise").get<double>();
    m.input_std = std_from(j.at("input_standardization"));
    m.target_std = std_from(j.at("target_standardization"));
    m.training.n_points = j.at("training").at("n_points").get<int>();
    m.training.min_gap = j.at("training").at("min_gap").get<int>();
    m.training.selection_target = j.at("training").at("selection_target").get<int>();
    for (const auto& st : j.at("train_subtrees"))
      m.train_inputs.push_back(subtree_from(st));
    m.alpha = matrix_from(j.at("alpha"), "alpha");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  m.finalize();
  return m;
}

void write_kernel_params(const std::string& path,
                         const SubTreeKernelParams& params,
                         const Standardization& input_std) {
  ordered_json j;
  j["root"] = ard_json(params.root);
  j["leaf"] = ard_json(params.leaf);
  j["mask"] = mask_json(params.attr_mask);
  j["standardization"] = std_json(input_std);
  dump_atomic(path, j);
}

std::pair<SubTreeKernelParams, Standardization> read_kernel_params(
    const std::string& path) {
  const ordered_json j = parse_file(path);
  try {
    SubTreeKernelParams p;
    p.root = ard_from(j.at("root"));
    p.leaf = ard_from(j.at("leaf"));
    p.attr_mask = mask_from(j.at("mask"));
    return {std::move(p), std_from(j.at("standardization"))};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out = header + "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_loss_csv(const std::string& path, const std::vector<double>& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i)
    rows.push_back({std::to_string(i), format_double(trace[i])});
  write_csv(path, "iteration,loss", rows);
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::map<std::string, std::string>& params,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths) {
  ordered_json j;
  j["format"] = "eggp-manifest";
  j["tool_version"] = kVersion;
  j["command"] = command;
  ordered_json p;
  for (const auto& [k, v] : params) p[k] = v;
  j["params"] = std::move(p);
  auto digests = [](const std::vector<std::string>& paths) {
    ordered_json a = ordered_json::array();
    for (const auto& f : paths) {
      ordered_json e;
      e["path"] = f;
      e["sha256"] = sha256_file(f);
      a.push_back(std::move(e));
    }
    return a;
  };
  j["inputs"] = digests(input_paths);
  j["outputs"] = digests(output_paths);
  dump_atomic(path, j);
}

}  // namespace eggp::io
