#include "eggp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "eggp/config.hpp"
#include "eggp/errors.hpp"
#include "eggp/io.hpp"
#include "eggp/metrics.hpp"
#include "eggp/model.hpp"
#include "json.hpp"

namespace eggp {
namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<int> to_int_vec(const std::vector<std::int64_t>& v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (auto x : v) out.push_back(static_cast<int>(x));
  return out;
}

int target_dim_from_name(const std::string& name) {
  if (name == "dx") return 0;
  if (name == "dy") return 1;
  if (name == "dz") return 2;
  throw ConfigError("unknown target '" + name + "' (expected dx, dy or dz)");
}

std::vector<int> targets_from(const config::Section& s,
                              const std::vector<int>& fallback) {
  if (!s.has("targets")) return fallback;
  const auto names = s.get_string_array("targets");
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(target_dim_from_name(n));
  if (out.empty()) throw ConfigError("targets must not be empty");
  return out;
}

double parse_stored_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("bad stored number '" + s + "'");
  return v;
}

std::string gi_sim_echo(const GiConfig& c) {
  std::ostringstream ss;
  ss << "gi|rope=" << c.n_rope_nodes << "|ball=" << c.n_ball_nodes
     << "|link=" << io::format_double(c.link_length)
     << "|k=" << io::format_double(c.stiffness)
     << "|c=" << io::format_double(c.damping)
     << "|g=" << io::format_double(c.gravity)
     << "|bc=" << io::format_double(c.ball_center[0]) << ","
     << io::format_double(c.ball_center[1])
     << "|br=" << io::format_double(c.ball_radius)
     << "|off=" << io::format_double(c.rope_offset)
     << "|h0=" << io::format_double(c.rope_start_height)
     << "|m=" << io::format_double(c.node_mass)
     << "|rest=" << io::format_double(c.contact_restitution)
     << "|steps=" << c.steps << "|dt=" << io::format_double(c.dt);
  return ss.str();
}

std::string eis_sim_echo(const EisConfig& c) {
  std::ostringstream ss;
  ss << "eis|blocks=" << c.n_blocks << "|ppb=" << c.particles_per_block
     << "|box=" << io::format_double(c.box_bounds[0]) << ","
     << io::format_double(c.box_bounds[1]) << ","
     << io::format_double(c.box_bounds[2]) << ","
     << io::format_double(c.box_bounds[3])
     << "|g=" << io::format_double(c.gravity)
     << "|rest=" << io::format_double(c.restitution)
     << "|krep=" << io::format_double(c.repulsion_stiffness)
     << "|range=" << io::format_double(c.repulsion_range)
     << "|c=" << io::format_double(c.damping)
     << "|sp=" << io::format_double(c.block_spacing)
     << "|v0=" << io::format_double(c.max_init_speed)
     << "|steps=" << c.steps << "|dt=" << io::format_double(c.dt)
     << "|seed=" << c.seed;
  return ss.str();
}

std::string conn_echo(const ConnectivityConfig& c) {
  return "r_nn=" + io::format_double(c.r_nn) + "|k_nn=" + std::to_string(c.k_nn);
}

std::string adam_echo(const AdamConfig& a) {
  return "it=" + std::to_string(a.iterations) +
         "|lr=" + io::format_double(a.learning_rate) +
         "|b1=" + io::format_double(a.beta1) +
         "|b2=" + io::format_double(a.beta2) +
         "|eps=" + io::format_double(a.eps);
}

enum class SlotState { pending, computed, reused, failed };

struct SeriesJob {
  std::string key;
  std::string path;
  io::SeriesMeta meta;
  std::function<GraphSeries()> generate;
  GraphSeries series;
  SlotState state = SlotState::pending;
  std::string error;
};

struct ModelJob {
  std::string key;
  std::string path;
  std::size_t series_index = 0;
  Method method = Method::eggp;
  AdjacencyMode mode = AdjacencyMode::evolving;
  int target = 0;
  int n = 0;
  int min_gap = 0;
  ConnectivityConfig connectivity{};
  AdamConfig adam{};
  std::optional<FittedModel> model;
  SlotState state = SlotState::pending;
  std::string error;
};

struct CellJob {
  std::string table;
  std::string key;
  std::string path;
  std::size_t model_index = 0;
  std::size_t series_index = 0;
  std::string env;
  int n = 0;
  double offset = 0.0;
  int m_nodes = 0;
  AdjacencyMode mode = AdjacencyMode::evolving;
  Method method = Method::eggp;
  int target = 0;
  std::uint64_t seed = 0;
  double rmse = 0, mape = 0, mape_unfl = 0, nll = 0;
  SlotState state = SlotState::pending;
  std::string error;

  std::string label() const {
    return table + " env=" + env + " N=" + std::to_string(n) +
           " offset=" + io::format_double(offset) +
           " M=" + std::to_string(m_nodes) + " mode=" + to_string(mode) +
           " method=" + to_string(method) + " target=" + target_name(target) +
           " seed=" + std::to_string(seed);
  }
};

std::string cache_path(const std::string& out_dir, const std::string& kind,
                       const std::string& key, const std::string& ext) {
  return out_dir + "/cache/" + kind + "-" + io::sha256_hex(key).substr(0, 16) +
         ext;
}

void run_pool(std::vector<std::function<void()>>& tasks, int jobs) {
  if (jobs <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) tasks[i]();
  };
  std::vector<std::thread> threads;
  const int count = std::min<int>(jobs, static_cast<int>(tasks.size()));
  threads.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

struct Palette {
  const char* color(std::size_t i) const {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
    return colors[i % 6];
  }
};

std::string svg_line_chart(
    const std::string& title, const std::string& x_label,
    const std::string& y_label,
    const std::vector<std::pair<std::string,
                                std::vector<std::pair<double, double>>>>&
        series) {
  const double width = 640, height = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& [name, pts] : series)
    for (const auto& [x, y] : pts) {
      if (first) {
        x_min = x_max = x;
        y_min = y_max = y;
        first = false;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const auto sx = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr);
  };
  const auto sy = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 "
      << height / 2 << ")\">" << y_label << "</text>\n";
  for (double frac : {0.0, 0.5, 1.0}) {
    const double xv = x_min + frac * (x_max - x_min);
    const double yv = y_min + frac * (y_max - y_min);
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << height - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << io::format_double(xv) << "</text>\n";
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << io::format_double(yv) << "</text>\n";
  }
  Palette palette;
  std::size_t idx = 0;
  for (const auto& [name, pts] : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << palette.color(idx)
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts)
      svg << io::format_double(sx(x)) << "," << io::format_double(sy(y)) << " ";
    svg << "\"/>\n";
    for (const auto& [x, y] : pts)
      svg << "<circle cx=\"" << io::format_double(sx(x)) << "\" cy=\""
          << io::format_double(sy(y)) << "\" r=\"3\" fill=\""
          << palette.color(idx) << "\"/>\n";
    svg << "<text x=\"" << width - mr - 6 << "\" y=\"" << mt + 16 * idx
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\""
        << palette.color(idx) << "\">" << name << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

class Runner {
 public:
  Runner(const ExperimentMatrix& matrix, std::string out_dir, int jobs)
      : matrix_(matrix), out_dir_(std::move(out_dir)), jobs_(jobs) {}

  ExperimentSummary run(bool svg);

 private:
  std::size_t add_gi_series(const GiConfig& base, double offset,
                            const ConnectivityConfig& conn);
  std::size_t add_eis_series(const EisConfig& base, int blocks,
                             std::uint64_t seed,
                             const ConnectivityConfig& conn);
  std::size_t add_model(std::size_t series_index, Method method,
                        AdjacencyMode mode, int target, int n, int min_gap,
                        const ConnectivityConfig& conn, const AdamConfig& adam);
  void add_cell(const std::string& table, std::size_t model_index,
                std::size_t series_index, const std::string& env, int n,
                double offset, AdjacencyMode mode, Method method, int target,
                std::uint64_t seed);
  void plan();
  void run_series();
  void run_models();
  void run_cells();
  void note(SlotState s);
  void emit_tables(ExperimentSummary& summary);
  void emit_summary(ExperimentSummary& summary);
  void emit_svg(ExperimentSummary& summary);

  const ExperimentMatrix& matrix_;
  std::string out_dir_;
  int jobs_;
  std::vector<SeriesJob> series_;
  std::vector<ModelJob> models_;
  std::vector<CellJob> cells_;
  std::map<std::string, std::size_t> series_index_;
  std::map<std::string, std::size_t> model_index_;
  ExperimentSummary summary_;
};

std::size_t Runner::add_gi_series(const GiConfig& base, double offset,
                                  const ConnectivityConfig& conn) {
  GiConfig cfg = base;
  cfg.rope_offset = offset;
  const std::string key = gi_sim_echo(cfg) + "|" + conn_echo(conn);
  auto it = series_index_.find(key);
  if (it != series_index_.end()) return it->second;
  SeriesJob job;
  job.key = key;
  job.path = cache_path(out_dir_, "series", key, ".jsonl");
  job.meta.env = "gi";
  job.meta.seed = 0;
  job.meta.offset = offset;
  job.meta.config["sim"] = gi_sim_echo(cfg);
  job.meta.config["connectivity"] = conn_echo(conn);
  job.generate = [cfg, conn] { return gi_graph_series(simulate_gi(cfg), conn); };
  series_.push_back(std::move(job));
  series_index_.emplace(key, series_.size() - 1);
  return series_.size() - 1;
}

std::size_t Runner::add_eis_series(const EisConfig& base, int blocks,
                                   std::uint64_t seed,
                                   const ConnectivityConfig& conn) {
  EisConfig cfg = base;
  cfg.n_blocks = blocks;
  cfg.seed = seed;
  const std::string key = eis_sim_echo(cfg) + "|" + conn_echo(conn);
  auto it = series_index_.find(key);
  if (it != series_index_.end()) return it->second;
  SeriesJob job;
  job.key = key;
  job.path = cache_path(out_dir_, "series", key, ".jsonl");
  job.meta.env = "eis";
  job.meta.seed = seed;
  job.meta.offset = 0.0;
  job.meta.config["sim"] = eis_sim_echo(cfg);
  job.meta.config["connectivity"] = conn_echo(conn);
  job.generate = [cfg, conn] { return eis_graph_series(simulate_eis(cfg), conn); };
  series_.push_back(std::move(job));
  series_index_.emplace(key, series_.size() - 1);
  return series_.size() - 1;
}

std::size_t Runner::add_model(std::size_t series_index, Method method,
                              AdjacencyMode mode, int target, int n,
                              int min_gap, const ConnectivityConfig& conn,
                              const AdamConfig& adam) {
  const std::string key = "model|" + series_[series_index].key +
                          "|method=" + to_string(method) +
                          "|mode=" + to_string(mode) +
                          "|target=" + std::to_string(target) +
                          "|n=" + std::to_string(n) +
                          "|gap=" + std::to_string(min_gap) + "|" +
                          conn_echo(conn) + "|" + adam_echo(adam);
  auto it = model_index_.find(key);
  if (it != model_index_.end()) return it->second;
  ModelJob job;
  job.key = key;
  job.path = cache_path(out_dir_, "model", key, ".json");
  job.series_index = series_index;
  job.method = method;
  job.mode = mode;
  job.target = target;
  job.n = n;
  job.min_gap = min_gap;
  job.connectivity = conn;
  job.adam = adam;
  models_.push_back(std::move(job));
  model_index_.emplace(key, models_.size() - 1);
  return models_.size() - 1;
}

void Runner::add_cell(const std::string& table, std::size_t model_index,
                      std::size_t series_index, const std::string& env, int n,
                      double offset, AdjacencyMode mode, Method method,
                      int target, std::uint64_t seed) {
  CellJob cell;
  cell.table = table;
  cell.key = "cell|" + models_[model_index].key + "|eval=" +
             series_[series_index].key;
  cell.path = cache_path(out_dir_, "cell", cell.key, ".json");
  cell.model_index = model_index;
  cell.series_index = series_index;
  cell.env = env;
  cell.n = n;
  cell.offset = offset;
  cell.mode = mode;
  cell.method = method;
  cell.target = target;
  cell.seed = seed;
  cells_.push_back(std::move(cell));
}

void Runner::plan() {
  if (matrix_.gi.enabled) {
    const auto& p = matrix_.gi;
    const std::size_t train =
        add_gi_series(p.sim, p.train_offset, p.connectivity);
    for (int n : p.n_values)
      for (const auto& method_name : p.methods) {
        const Method method = method_from_string(method_name);
        for (int target : p.targets) {
          const std::size_t model =
              add_model(train, method, AdjacencyMode::evolving, target, n,
                        p.min_gap, p.connectivity, p.adam);
          for (double offset : p.offsets) {
            const std::size_t eval_series =
                add_gi_series(p.sim, offset, p.connectivity);
            add_cell("table1", model, eval_series, "gi", n, offset,
                     AdjacencyMode::evolving, method, target, 0);
          }
        }
      }
  }
  if (matrix_.gi_ablation.enabled) {
    const auto& p = matrix_.gi_ablation;
    const auto& conn = matrix_.gi.connectivity;
    const auto& adam = matrix_.gi.adam;
    const std::size_t train =
        add_gi_series(matrix_.gi.sim, matrix_.gi.train_offset, conn);
    for (int target : p.targets)
      for (AdjacencyMode mode : {AdjacencyMode::evolving, AdjacencyMode::fixed}) {
        const std::size_t model = add_model(train, Method::eggp, mode, target,
                                            p.n, p.min_gap, conn, adam);
        for (double offset : p.offsets) {
          const std::size_t eval_series =
              add_gi_series(matrix_.gi.sim, offset, conn);
          add_cell("ablation_" + target_name(target), model, eval_series, "gi",
                   p.n, offset, mode, Method::eggp, target, 0);
        }
      }
  }
  if (matrix_.eis.enabled) {
    const auto& p = matrix_.eis;
    if (p.test_blocks.size() != p.test_seeds.size())
      throw ConfigError("eis: test_blocks and test_seeds must align");
    const std::size_t train =
        add_eis_series(p.sim, p.train_blocks, p.train_seed, p.connectivity);
    for (const auto& method_name : p.methods) {
      const Method method = method_from_string(method_name);
      for (int target : p.targets) {
        const std::size_t model =
            add_model(train, method, AdjacencyMode::evolving, target, p.n,
                      p.min_gap, p.connectivity, p.adam);
        for (std::size_t i = 0; i < p.test_blocks.size(); ++i) {
          const std::size_t eval_series = add_eis_series(
              p.sim, p.test_blocks[i], p.test_seeds[i], p.connectivity);
          add_cell("eis_node_counts", model, eval_series, "eis", p.n, 0.0,
                   AdjacencyMode::evolving, method, target, p.test_seeds[i]);
        }
      }
    }
  }
}

void Runner::run_series() {
  for (auto& job : series_) {
    try {
      if (std::filesystem::exists(job.path)) {
        job.series = io::read_series(job.path);
        job.state = SlotState::reused;
      } else {
        job.series = job.generate();
        io::write_series(job.path, job.series);
        io::write_series_meta(job.path, job.meta);
        job.state = SlotState::computed;
      }
    } catch (const std::exception& e) {
      job.state = SlotState::failed;
      job.error = e.what();
    }
  }
}

void Runner::run_models() {
  std::vector<std::function<void()>> tasks;
  tasks.reserve(models_.size());
  for (auto& job : models_) {
    tasks.push_back([this, &job] {
      const SeriesJob& src = series_[job.series_index];
      if (src.state == SlotState::failed) {
        job.state = SlotState::failed;
        job.error = "training series failed: " + src.error;
        return;
      }
      try {
        if (std::filesystem::exists(job.path)) {
          job.model = io::load_model(job.path);
          job.state = SlotState::reused;
          return;
        }
        SelectionConfig sel;
        sel.points_per_node = job.n;
        sel.min_gap = job.min_gap;
        sel.target_dim = job.target;
        FitOptions opts;
        opts.method = job.method;
        opts.mode = job.mode;
        opts.connectivity = job.connectivity;
        opts.target_dims = {job.target};
        opts.adam = job.adam;
        job.model = job.method == Method::gpr
                        ? fit_gpr_baseline(src.series, sel, opts)
                        : fit(src.series, sel, opts);
        io::save_model(job.path, *job.model);
        job.state = SlotState::computed;
      } catch (const std::exception& e) {
        job.state = SlotState::failed;
        job.error = e.what();
      }
    });
  }
  run_pool(tasks, jobs_);
}

void Runner::run_cells() {
  std::vector<std::function<void()>> tasks;
  tasks.reserve(cells_.size());
  for (auto& cell : cells_) {
    tasks.push_back([this, &cell] {
      const ModelJob& mj = models_[cell.model_index];
      const SeriesJob& sj = series_[cell.series_index];
      cell.m_nodes =
          sj.state == SlotState::failed ? 0 : sj.series.front().num_vertices();
      if (mj.state == SlotState::failed) {
        cell.state = SlotState::failed;
        cell.error = "model failed: " + mj.error;
        return;
      }
      if (sj.state == SlotState::failed) {
        cell.state = SlotState::failed;
        cell.error = "eval series failed: " + sj.error;
        return;
      }
      try {
        if (std::filesystem::exists(cell.path)) {
          const ordered_json j = ordered_json::parse(io::read_text(cell.path));
          cell.rmse = parse_stored_double(j.at("rmse").get<std::string>());
          cell.mape = parse_stored_double(j.at("mape").get<std::string>());
          cell.mape_unfl =
              parse_stored_double(j.at("mape_unfloored").get<std::string>());
          cell.nll = parse_stored_double(j.at("nll").get<std::string>());
          cell.state = SlotState::reused;
          return;
        }
        const MetricReport rep = evaluate_one_step(*mj.model, sj.series);
        cell.rmse = rep.rmse;
        cell.mape = rep.mape;
        cell.mape_unfl = rep.mape_unfloored;
        cell.nll = rep.nll;
        ordered_json j;
        j["rmse"] = io::format_double(cell.rmse);
        j["mape"] = io::format_double(cell.mape);
        j["mape_unfloored"] = io::format_double(cell.mape_unfl);
        j["nll"] = io::format_double(cell.nll);
        io::write_text_atomic(cell.path, j.dump(2) + "\n");
        cell.state = SlotState::computed;
      } catch (const std::exception& e) {
        cell.state = SlotState::failed;
        cell.error = e.what();
      }
    });
  }
  run_pool(tasks, jobs_);
}

void Runner::note(SlotState s) {
  if (s == SlotState::computed) ++summary_.computed;
  if (s == SlotState::reused) ++summary_.reused;
  if (s == SlotState::failed) ++summary_.failed;
}

void Runner::emit_tables(ExperimentSummary& summary) {
  std::vector<std::string> order;
  if (matrix_.gi.enabled) order.push_back("table1");
  if (matrix_.gi_ablation.enabled)
    for (int target : matrix_.gi_ablation.targets)
      order.push_back("ablation_" + target_name(target));
  if (matrix_.eis.enabled) order.push_back("eis_node_counts");
  for (const auto& table : order) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& cell : cells_) {
      if (cell.table != table || cell.state == SlotState::failed) continue;
      rows.push_back({cell.env, std::to_string(cell.n),
                      io::format_double(cell.offset),
                      std::to_string(cell.m_nodes), to_string(cell.mode),
                      to_string(cell.method), target_name(cell.target),
                      io::format_double(cell.rmse),
                      io::format_double(cell.mape),
                      io::format_double(cell.nll),
                      std::to_string(cell.seed)});
    }
    const std::string path = out_dir_ + "/" + table + ".csv";
    io::write_csv(path, "env,N,offset,M,mode,method,target,rmse,mape,nll,seed",
                  rows);
    summary.table_paths.push_back(path);
  }
}

void Runner::emit_summary(ExperimentSummary& summary) {
  ordered_json j;
  j["format"] = "eggp-experiment-summary";
  j["computed"] = summary.computed;
  j["reused"] = summary.reused;
  j["failed"] = summary.failed;
  ordered_json fails = ordered_json::array();
  for (const auto& f : summary.failures) fails.push_back(f);
  j["failures"] = std::move(fails);
  ordered_json tables = ordered_json::array();
  for (const auto& t : summary.table_paths) tables.push_back(t);
  j["tables"] = std::move(tables);
  ordered_json cells = ordered_json::array();
  for (const auto& cell : cells_) {
    ordered_json c;
    c["table"] = cell.table;
    c["env"] = cell.env;
    c["N"] = cell.n;
    c["offset"] = io::format_double(cell.offset);
    c["M"] = cell.m_nodes;
    c["mode"] = to_string(cell.mode);
    c["method"] = to_string(cell.method);
    c["target"] = target_name(cell.target);
    c["seed"] = cell.seed;
    if (cell.state == SlotState::failed) {
      c["status"] = "failed";
      c["error"] = cell.error;
    } else {
      c["status"] = cell.state == SlotState::reused ? "reused" : "computed";
      c["rmse"] = io::format_double(cell.rmse);
      c["mape"] = io::format_double(cell.mape);
      c["mape_unfloored"] = io::format_double(cell.mape_unfl);
      c["nll"] = io::format_double(cell.nll);
    }
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  io::write_text_atomic(out_dir_ + "/summary.json", j.dump(2) + "\n");
}

void Runner::emit_svg(ExperimentSummary& summary) {
  if (!matrix_.gi.enabled) return;
  const int n_max =
      *std::max_element(matrix_.gi.n_values.begin(), matrix_.gi.n_values.end());
  for (int target : matrix_.gi.targets) {
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>
        lines;
    for (const auto& method_name : matrix_.gi.methods) {
      const Method method = method_from_string(method_name);
      std::vector<std::pair<double, double>> pts;
      for (const auto& cell : cells_)
        if (cell.table == "table1" && cell.n == n_max &&
            cell.method == method && cell.target == target &&
            cell.state != SlotState::failed)
          pts.emplace_back(cell.offset, cell.rmse);
      if (!pts.empty()) lines.emplace_back(method_name, std::move(pts));
    }
    if (lines.empty()) continue;
    const std::string path =
        out_dir_ + "/plots/rmse_offset_" + target_name(target) + ".svg";
    io::write_text_atomic(
        path, svg_line_chart("one-step RMSE vs offset (" +
                                 target_name(target) + ", N=" +
                                 std::to_string(n_max) + ")",
                             "offset", "rmse", lines));
    summary.table_paths.push_back(path);
  }
}

ExperimentSummary Runner::run(bool svg) {
  if (matrix_.empty()) throw ConfigError("experiment matrix is empty");
  plan();
  run_series();
  run_models();
  run_cells();
  for (const auto& j : series_) note(j.state);
  for (const auto& j : models_) note(j.state);
  for (const auto& c : cells_) note(c.state);
  for (const auto& j : series_)
    if (j.state == SlotState::failed)
      summary_.failures.push_back("series " + j.meta.env + ": " + j.error);
  for (const auto& j : models_)
    if (j.state == SlotState::failed)
      summary_.failures.push_back("model " + j.key + ": " + j.error);
  for (const auto& c : cells_)
    if (c.state == SlotState::failed)
      summary_.failures.push_back(c.label() + ": " + c.error);
  emit_tables(summary_);
  if (svg) emit_svg(summary_);
  emit_summary(summary_);
  return summary_;
}

}  // namespace

ExperimentMatrix ExperimentMatrix::from_file(const std::string& path) {
  const config::Table tbl = config::Table::parse_file(path);
  ExperimentMatrix m;
  if (tbl.has_section("gi_sim"))
    m.gi.sim = config::gi_config_from(tbl.section("gi_sim"));
  if (tbl.has_section("eis_sim"))
    m.eis.sim = config::eis_config_from(tbl.section("eis_sim"));
  if (tbl.has_section("gi")) {
    const auto& s = tbl.section("gi");
    auto& p = m.gi;
    p.enabled = s.get_bool("enabled", true);
    const auto nv = s.get_int_array("n_values");
    if (!nv.empty()) p.n_values = to_int_vec(nv);
    const auto off = s.get_double_array("offsets");
    if (!off.empty()) p.offsets = off;
    p.train_offset = s.get_double("train_offset", p.train_offset);
    const auto methods = s.get_string_array("methods");
    if (!methods.empty()) p.methods = methods;
    p.targets = targets_from(s, p.targets);
    p.min_gap = static_cast<int>(s.get_int("min_gap", p.min_gap));
    p.connectivity.r_nn = s.get_double("r_nn", p.connectivity.r_nn);
    p.connectivity.k_nn =
        static_cast<int>(s.get_int("k_nn", p.connectivity.k_nn));
    p.adam.iterations =
        static_cast<int>(s.get_int("adam_iterations", p.adam.iterations));
    p.adam.learning_rate = s.get_double("learning_rate", p.adam.learning_rate);
  }
  if (tbl.has_section("gi_ablation")) {
    const auto& s = tbl.section("gi_ablation");
    auto& p = m.gi_ablation;
    p.enabled = s.get_bool("enabled", true);
    p.n = static_cast<int>(s.get_int("n", p.n));
    const auto off = s.get_double_array("offsets");
    if (!off.empty()) p.offsets = off;
    p.targets = targets_from(s, p.targets);
    p.min_gap = static_cast<int>(s.get_int("min_gap", p.min_gap));
  }
  if (tbl.has_section("eis")) {
    const auto& s = tbl.section("eis");
    auto& p = m.eis;
    p.enabled = s.get_bool("enabled", true);
    p.train_seed =
        static_cast<std::uint64_t>(s.get_int("train_seed", static_cast<std::int64_t>(p.train_seed)));
    p.train_blocks = static_cast<int>(s.get_int("train_blocks", p.train_blocks));
    const auto blocks = s.get_int_array("test_blocks");
    if (!blocks.empty()) p.test_blocks = to_int_vec(blocks);
    const auto seeds = s.get_int_array("test_seeds");
    if (!seeds.empty()) {
      p.test_seeds.clear();
      for (auto x : seeds) p.test_seeds.push_back(static_cast<std::uint64_t>(x));
    }
    p.n = static_cast<int>(s.get_int("n", p.n));
    const auto methods = s.get_string_array("methods");
    if (!methods.empty()) p.methods = methods;
    p.targets = targets_from(s, p.targets);
    p.min_gap = static_cast<int>(s.get_int("min_gap", p.min_gap));
    p.connectivity.r_nn = s.get_double("r_nn", p.connectivity.r_nn);
    p.connectivity.k_nn =
        static_cast<int>(s.get_int("k_nn", p.connectivity.k_nn));
    p.adam.iterations =
        static_cast<int>(s.get_int("adam_iterations", p.adam.iterations));
    p.adam.learning_rate = s.get_double("learning_rate", p.adam.learning_rate);
  }
  tbl.finish();
  return m;
}

ExperimentSummary run_experiment(const ExperimentMatrix& matrix,
                                 const std::string& out_dir, int jobs,
                                 bool svg) {
  Runner runner(matrix, out_dir, jobs);
  return runner.run(svg);
}

}  // namespace eggp
