// Command-line front end. Talks to the solver through the C API only.

#include <mhdg/mhdg.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "case",   "variant", "k",         "levels",  "alpha1",  "beta",        "beta1",
      "beta2",  "re",      "rm",        "kappa",   "p0",      "epsilon",     "max_iter",
      "damping", "rhat_bc", "out",      "dump_matrix", "threads", "mesh",    "timings"};
  return keys;
}

bool is_known(const std::string& key) {
  for (const auto& k : known_keys()) {
    if (k == key) return true;
  }
  return false;
}

using Settings = std::map<std::string, std::string>;

Settings read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (char& c : key) {
      if (c == '-') c = '_';
    }
    if (key.empty()) throw UsageError(where + ": empty key");
    if (!is_known(key)) throw UsageError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw UsageError(where + ": empty value for '" + key + "'");
    if (out.count(key)) throw UsageError(where + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw UsageError("bad number for " + key + ": '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(x)) throw UsageError("bad number for " + key + ": '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    throw UsageError("bad integer for " + key + ": '" + v + "'");
  }
  if (used != v.size() || x < -1000000 || x > 1000000) {
    throw UsageError("bad integer for " + key + ": '" + v + "'");
  }
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("bad boolean for " + key + ": '" + v + "'");
}

// "3", "0-4", "1,2,5" or combinations like "0-2,4".
std::vector<int> parse_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw UsageError("bad list for " + key + ": '" + v + "'");
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(parse_int(key, item));
    } else {
      const int a = parse_int(key, trim(item.substr(0, dash)));
      const int b = parse_int(key, trim(item.substr(dash + 1)));
      if (b < a) throw UsageError("bad range for " + key + ": '" + item + "'");
      for (int i = a; i <= b; ++i) out.push_back(i);
    }
  }
  if (out.empty()) throw UsageError("empty list for " + key);
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw UsageError(key + " must be strictly increasing");
  }
  return out;
}

struct RunConfig {
  mhdg_options opts{};
  std::vector<int> ks;
  std::vector<int> levels;
  std::string out = "out";
  std::string mesh_path;
  bool dump_matrix = false;
  bool timings = true;
  bool variant_set = false;
  Settings raw;
};

RunConfig build_config(const Settings& s, bool multi_k) {
  RunConfig c;
  c.raw = s;
  mhdg_options_default(&c.opts);
  auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = s.find(key);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
  if (auto v = get("case")) {
    if (mhdg_case_from_name(v->c_str(), &c.opts.case_kind) != MHDG_OK) {
      throw UsageError("unknown case '" + *v + "'");
    }
  }
  if (auto v = get("variant")) {
    c.variant_set = true;
    if (*v == "hdg") {
      c.opts.variant = MHDG_VARIANT_HDG;
    } else if (*v == "ehdg") {
      c.opts.variant = MHDG_VARIANT_EHDG;
    } else {
      throw UsageError("unknown variant '" + *v + "' (hdg | ehdg)");
    }
  }
  c.ks = {1};
  if (auto v = get("k")) c.ks = parse_list("k", *v);
  if (!multi_k && c.ks.size() != 1) throw UsageError("this command takes a single k");
  for (int k : c.ks) {
    if (k < 1 || k > 6) throw UsageError("k must lie in 1..6");
  }
  c.opts.k = c.ks.front();
  const bool hartmann = c.opts.case_kind == MHDG_CASE_HARTMANN;
  c.levels = hartmann ? std::vector<int>{1, 2, 3} : std::vector<int>{0, 1, 2, 3, 4};
  if (auto v = get("levels")) c.levels = parse_list("levels", *v);
  for (int l : c.levels) {
    if (l < (hartmann ? 1 : 0) || l > 10) throw UsageError("level " + std::to_string(l) + " out of range");
  }
  if (auto v = get("alpha1")) c.opts.alpha1 = parse_double("alpha1", *v);
  if (auto v = get("beta")) c.opts.beta1 = c.opts.beta2 = parse_double("beta", *v);
  if (auto v = get("beta1")) c.opts.beta1 = parse_double("beta1", *v);
  if (auto v = get("beta2")) c.opts.beta2 = parse_double("beta2", *v);
  if (auto v = get("re")) c.opts.re = parse_double("re", *v);
  if (auto v = get("rm")) c.opts.rm = parse_double("rm", *v);
  if (auto v = get("kappa")) c.opts.kappa = parse_double("kappa", *v);
  if (auto v = get("p0")) c.opts.p0 = parse_double("p0", *v);
  if (auto v = get("epsilon")) c.opts.epsilon = parse_double("epsilon", *v);
  if (auto v = get("max_iter")) c.opts.max_iter = parse_int("max_iter", *v);
  if (auto v = get("damping")) c.opts.damping = parse_double("damping", *v);
  if (auto v = get("threads")) c.opts.threads = parse_int("threads", *v);
  if (auto v = get("rhat_bc")) {
    if (*v == "strong-zero") {
      c.opts.rhat_bc = MHDG_RHAT_STRONG_ZERO;
    } else if (*v == "normal-constraint") {
      c.opts.rhat_bc = MHDG_RHAT_NORMAL_CONSTRAINT;
    } else {
      throw UsageError("unknown rhat_bc '" + *v + "' (strong-zero | normal-constraint)");
    }
  }
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("mesh")) c.mesh_path = *v;
  if (auto v = get("dump_matrix")) c.dump_matrix = parse_bool("dump_matrix", *v);
  if (auto v = get("timings")) c.timings = parse_bool("timings", *v);
  c.opts.keep_matrix = c.dump_matrix ? 1 : 0;
  if (mhdg_options_validate(&c.opts) != MHDG_OK) throw UsageError(mhdg_last_error());
  if (c.out.empty()) throw UsageError("empty output directory");
  return c;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string sci(double x) { return fmt("%.10e", x); }

const char* variant_name(mhdg_variant v) { return v == MHDG_VARIANT_HDG ? "hdg" : "ehdg"; }

struct MeshHandle {
  mhdg_mesh* m = nullptr;
  MeshHandle() = default;
  MeshHandle(const MeshHandle&) = delete;
  MeshHandle& operator=(const MeshHandle&) = delete;
  ~MeshHandle() { mhdg_mesh_free(m); }
};

struct ResultHandle {
  mhdg_result* r = nullptr;
  ResultHandle() = default;
  ResultHandle(const ResultHandle&) = delete;
  ResultHandle& operator=(const ResultHandle&) = delete;
  ~ResultHandle() { mhdg_result_free(r); }
};

void check(mhdg_status st, const std::string& what) {
  if (st != MHDG_OK) {
    throw SolveError(what + ": " + mhdg_status_string(st) + ": " + mhdg_last_error());
  }
}

struct LevelRow {
  mhdg_report rep{};
  std::vector<std::string> warnings;
  std::vector<std::pair<double, double>> picard;
};

LevelRow solve_level(const RunConfig& c, const mhdg_options& opts, int level,
                     const std::string& matrix_path) {
  ResultHandle res;
  if (!c.mesh_path.empty()) {
    MeshHandle mesh;
    check(mhdg_mesh_read(c.mesh_path.c_str(), &mesh.m), "reading mesh " + c.mesh_path);
    check(mhdg_solve_case_on_mesh(&opts, mesh.m, &res.r), "solve");
  } else {
    check(mhdg_solve_case(&opts, level, &res.r), "solve at level " + std::to_string(level));
  }
  LevelRow row;
  check(mhdg_result_report(res.r, &row.rep), "report");
  if (!c.mesh_path.empty()) row.rep.level = level;
  for (int i = 0; i < row.rep.num_warnings; ++i) row.warnings.push_back(mhdg_result_warning(res.r, i));
  for (int i = 0; i < row.rep.picard_iterations; ++i) {
    double du = 0.0, db = 0.0;
    if (mhdg_result_picard_change(res.r, i, &du, &db) == MHDG_OK) row.picard.emplace_back(du, db);
  }
  if (!matrix_path.empty()) check(mhdg_result_write_matrix(res.r, matrix_path.c_str()), "matrix dump");
  return row;
}

const char* kCsvHeader =
    "level,h,cells,dofs,err_L_scaled,err_u,err_p,err_J_scaled,err_b,err_r,divinf_u,divinf_b,"
    "t_assembly_s,t_solve_s,t_reconstruct_s";

std::string csv_line(const mhdg_report& r, bool timings) {
  std::ostringstream o;
  o << r.level << ',' << sci(r.h) << ',' << r.cells << ',' << r.dofs << ',' << sci(r.err_L_scaled)
    << ',' << sci(r.err_u) << ',' << sci(r.err_p) << ',' << sci(r.err_J_scaled) << ','
    << sci(r.err_b) << ',' << sci(r.err_r) << ',' << sci(r.divinf_u) << ',' << sci(r.divinf_b);
  for (double t : {r.t_assembly_s, r.t_solve_s, r.t_reconstruct_s}) {
    o << ',' << (timings ? fmt("%.6f", t) : std::string("0"));
  }
  return o.str();
}

// Writes through a temporary name so a crash never leaves a half-written file behind.
void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw SolveError("cannot write " + tmp.string());
    out << text;
    if (!out) throw SolveError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json rate_json(double r) { return std::isfinite(r) ? json(r) : json(nullptr); }

const char* kFieldNames[] = {"L", "u", "p", "J", "b", "r"};

double field_error(const mhdg_report& r, int f) {
  const double e[] = {r.err_L_scaled, r.err_u, r.err_p, r.err_J_scaled, r.err_b, r.err_r};
  return e[f];
}

json rates_json(const std::vector<LevelRow>& rows) {
  json hist = json::array();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    json pair;
    pair["from_level"] = rows[i - 1].rep.level;
    pair["to_level"] = rows[i].rep.level;
    for (int f = 0; f < 6; ++f) {
      pair[kFieldNames[f]] = rate_json(mhdg_observed_rate(field_error(rows[i - 1].rep, f),
                                                          field_error(rows[i].rep, f),
                                                          rows[i - 1].rep.h, rows[i].rep.h));
    }
    hist.push_back(pair);
  }
  return hist;
}

json row_json(const LevelRow& row, bool timings) {
  const mhdg_report& r = row.rep;
  json j;
  j["level"] = r.level;
  j["h"] = r.h;
  j["cells"] = r.cells;
  j["dofs"] = r.dofs;
  j["system_size"] = r.system_size;
  j["errors"] = {{"L_scaled", r.err_L_scaled}, {"u", r.err_u},   {"p", r.err_p},
                 {"J_scaled", r.err_J_scaled}, {"b", r.err_b},   {"r", r.err_r}};
  j["divergence"] = {{"u", r.divinf_u}, {"b", r.divinf_b}, {"max_u", r.max_u}, {"max_b", r.max_b}};
  j["normal_jump"] = {{"u", r.jump_u}, {"b", r.jump_b}};
  j["boundary_normal_mismatch"] = {{"u", r.boundary_u}, {"b", r.boundary_b}};
  j["pressure_mean"] = r.pressure_mean;
  if (timings) {
    j["timings"] = {{"assembly_s", r.t_assembly_s},
                    {"solve_s", r.t_solve_s},
                    {"reconstruct_s", r.t_reconstruct_s}};
  }
  j["picard_iterations"] = r.picard_iterations;
  j["converged"] = r.converged != 0;
  if (!row.picard.empty()) {
    json hist = json::array();
    for (const auto& [du, db] : row.picard) hist.push_back({{"change_u", du}, {"change_b", db}});
    j["picard_history"] = hist;
  }
  j["warnings"] = row.warnings;
  return j;
}

json config_json(const RunConfig& c, const std::string& command) {
  json j;
  j["command"] = command;
  j["case"] = mhdg_case_name(c.opts.case_kind);
  j["variant"] = variant_name(c.opts.variant);
  j["k"] = c.ks;
  j["levels"] = c.levels;
  j["re"] = c.opts.re;
  j["rm"] = c.opts.rm;
  j["kappa"] = c.opts.kappa;
  j["alpha1"] = c.opts.alpha1;
  j["beta1"] = c.opts.beta1;
  j["beta2"] = c.opts.beta2;
  j["p0"] = c.opts.p0;
  j["epsilon"] = c.opts.epsilon;
  j["max_iter"] = c.opts.max_iter;
  j["damping"] = c.opts.damping;
  j["rhat_bc"] = c.opts.rhat_bc == MHDG_RHAT_STRONG_ZERO ? "strong-zero" : "normal-constraint";
  j["threads"] = c.opts.threads;
  if (!c.mesh_path.empty()) j["mesh"] = c.mesh_path;
  j["library_version"] = mhdg_version();
  return j;
}

void prepare_out(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw SolveError("cannot create output directory " + c.out + ": " + ec.message());
}

struct Series {
  int k = 1;
  mhdg_variant variant = MHDG_VARIANT_EHDG;
  std::vector<LevelRow> rows;
  bool ok = true;
  std::string failure;
};

Series run_series(const RunConfig& c, int k, mhdg_variant variant, const std::string& tag) {
  Series s;
  s.k = k;
  s.variant = variant;
  mhdg_options opts = c.opts;
  opts.k = k;
  opts.variant = variant;
  const std::vector<int> levels = c.mesh_path.empty() ? c.levels : std::vector<int>{0};
  for (int level : levels) {
    std::string matrix_path;
    if (c.dump_matrix) {
      matrix_path = (fs::path(c.out) / ("matrix" + tag + "_l" + std::to_string(level) + ".coo")).string();
    }
    std::cerr << mhdg_case_name(opts.case_kind) << ' ' << variant_name(variant) << " k=" << k
              << " level " << level << " ..." << std::flush;
    try {
      s.rows.push_back(solve_level(c, opts, level, matrix_path));
    } catch (const SolveError& e) {
      std::cerr << " failed\n";
      s.ok = false;
      s.failure = e.what();
      break;
    }
    const mhdg_report& r = s.rows.back().rep;
    std::cerr << " cells=" << r.cells << " dofs=" << r.dofs << " err_u=" << sci(r.err_u);
    if (r.picard_iterations > 0) std::cerr << " picard=" << r.picard_iterations;
    std::cerr << '\n';
    for (const auto& w : s.rows.back().warnings) std::cerr << "  warning: " << w << '\n';
    if (!r.converged) {
      s.ok = false;
      s.failure = "Picard iteration did not converge at level " + std::to_string(level);
    }
  }
  return s;
}

std::string series_csv(const Series& s, bool timings) {
  std::string out = std::string(kCsvHeader) + '\n';
  for (const auto& row : s.rows) out += csv_line(row.rep, timings) + '\n';
  return out;
}

json series_json(const Series& s, bool timings) {
  json j;
  j["k"] = s.k;
  j["variant"] = variant_name(s.variant);
  j["levels"] = json::array();
  double div_u = 0.0, div_b = 0.0;
  double ta = 0.0, ts = 0.0, tr = 0.0;
  for (const auto& row : s.rows) {
    j["levels"].push_back(row_json(row, timings));
    div_u = std::max(div_u, row.rep.divinf_u);
    div_b = std::max(div_b, row.rep.divinf_b);
    ta += row.rep.t_assembly_s;
    ts += row.rep.t_solve_s;
    tr += row.rep.t_reconstruct_s;
  }
  const json hist = rates_json(s.rows);
  j["rates"] = hist.empty() ? json(nullptr) : hist.back();
  j["rate_history"] = hist;
  j["max_divergence"] = {{"u", div_u}, {"b", div_b}};
  if (timings) j["total_timings"] = {{"assembly_s", ta}, {"solve_s", ts}, {"reconstruct_s", tr}};
  j["ok"] = s.ok;
  if (!s.ok) j["failure"] = s.failure;
  return j;
}

void print_rates(const Series& s) {
  if (s.rows.size() < 2) return;
  const auto& a = s.rows[s.rows.size() - 2].rep;
  const auto& b = s.rows.back().rep;
  std::printf("k=%d %s rates (levels %d->%d):", s.k, variant_name(s.variant), a.level, b.level);
  for (int f = 0; f < 6; ++f) {
    const double r = mhdg_observed_rate(field_error(a, f), field_error(b, f), a.h, b.h);
    std::printf(" %s %s", kFieldNames[f], std::isfinite(r) ? fmt("%.2f", r).c_str() : "n/a");
  }
  std::printf("\n");
}

int cmd_run(const RunConfig& c, const std::string& command) {
  prepare_out(c);
  json summary;
  summary["config"] = config_json(c, command);
  json runs = json::array();
  bool ok = true;
  std::string rates_csv = "k,from_level,to_level,rate_L,rate_u,rate_p,rate_J,rate_b,rate_r\n";
  for (int k : c.ks) {
    const std::string tag = command == "study" ? "_k" + std::to_string(k) : "";
    const Series s = run_series(c, k, c.opts.variant, tag);
    const std::string csv_name = command == "study" ? "study_k" + std::to_string(k) + ".csv" : "results.csv";
    write_file(fs::path(c.out) / csv_name, series_csv(s, c.timings));
    runs.push_back(series_json(s, c.timings));
    runs.back()["csv"] = csv_name;
    print_rates(s);
    if (s.rows.size() >= 2) {
      const auto& a = s.rows[s.rows.size() - 2].rep;
      const auto& b = s.rows.back().rep;
      rates_csv += std::to_string(k) + ',' + std::to_string(a.level) + ',' + std::to_string(b.level);
      for (int f = 0; f < 6; ++f) {
        const double r = mhdg_observed_rate(field_error(a, f), field_error(b, f), a.h, b.h);
        rates_csv += ',' + (std::isfinite(r) ? fmt("%.6f", r) : std::string("nan"));
      }
      rates_csv += '\n';
    }
    if (!s.ok) {
      std::cerr << "error: " << s.failure << '\n';
      ok = false;
    }
  }
  if (command == "study") write_file(fs::path(c.out) / "rates.csv", rates_csv);
  summary["runs"] = runs;
  summary["ok"] = ok;
  write_file(fs::path(c.out) / "summary.json", summary.dump(2) + '\n');
  return ok ? kExitOk : kExitFailure;
}

// Integers below 1000 verbatim, larger ones with three significant figures ("1.01E+03").
std::string table_count(int n) {
  if (n < 1000) return std::to_string(n);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", static_cast<double>(n));
  return buf;
}

struct DofEntry {
  int level, cells, k, hdg, ehdg;
  double reduction;
};

std::vector<DofEntry> dof_entries(const RunConfig& c) {
  std::vector<DofEntry> out;
  for (int level : c.levels) {
    MeshHandle mesh;
    if (!c.mesh_path.empty()) {
      check(mhdg_mesh_read(c.mesh_path.c_str(), &mesh.m), "reading mesh " + c.mesh_path);
    } else {
      check(mhdg_case_mesh(c.opts.case_kind, level, &mesh.m), "mesh");
    }
    mhdg_mesh_info info{};
    check(mhdg_mesh_get_info(mesh.m, &info), "mesh info");
    for (int k : c.ks) {
      mhdg_dof_counts h{}, e{};
      check(mhdg_dof_counts_for(mesh.m, k, MHDG_VARIANT_HDG, &h), "dof count");
      check(mhdg_dof_counts_for(mesh.m, k, MHDG_VARIANT_EHDG, &e), "dof count");
      const double red = 100.0 * (static_cast<double>(e.total) - h.total) / h.total;
      out.push_back({level, info.cells, k, h.total, e.total, red});
    }
    if (!c.mesh_path.empty()) break;
  }
  return out;
}

int cmd_dof_table(const RunConfig& c) {
  const std::vector<DofEntry> entries = dof_entries(c);
  prepare_out(c);
  std::string csv = "level,cells,k,dofs_hdg,dofs_ehdg,reduction_pct\n";
  json rows = json::array();
  for (const auto& e : entries) {
    csv += std::to_string(e.level) + ',' + std::to_string(e.cells) + ',' + std::to_string(e.k) + ',' +
           std::to_string(e.hdg) + ',' + std::to_string(e.ehdg) + ',' + fmt("%.2f", e.reduction) + '\n';
    rows.push_back({{"level", e.level},
                    {"cells", e.cells},
                    {"k", e.k},
                    {"dofs_hdg", e.hdg},
                    {"dofs_ehdg", e.ehdg},
                    {"reduction_pct", e.reduction}});
  }
  write_file(fs::path(c.out) / "dof_table.csv", csv);
  json summary;
  summary["config"] = config_json(c, "dof-table");
  summary["rows"] = rows;
  write_file(fs::path(c.out) / "summary.json", summary.dump(2) + '\n');

  std::printf("%-10s %-4s %10s %10s %10s\n", "elements", "k", "HDG", "E-HDG", "reduction");
  for (const auto& e : entries) {
    std::printf("%-10d %-4d %10s %10s %9s%%\n", e.cells, e.k, table_count(e.hdg).c_str(),
                table_count(e.ehdg).c_str(), fmt("%.2f", e.reduction).c_str());
  }
  return kExitOk;
}

int cmd_compare(const RunConfig& c) {
  prepare_out(c);
  const int k = c.ks.front();
  const Series hdg = run_series(c, k, MHDG_VARIANT_HDG, "_hdg");
  const Series ehdg = run_series(c, k, MHDG_VARIANT_EHDG, "_ehdg");
  write_file(fs::path(c.out) / "results_hdg.csv", series_csv(hdg, c.timings));
  write_file(fs::path(c.out) / "results_ehdg.csv", series_csv(ehdg, c.timings));

  std::string csv =
      "level,cells,dofs_hdg,dofs_ehdg,reduction_pct,t_assembly_hdg_s,t_solve_hdg_s,"
      "t_reconstruct_hdg_s,t_assembly_ehdg_s,t_solve_ehdg_s,t_reconstruct_ehdg_s\n";
  json side = json::array();
  const std::size_t n = std::min(hdg.rows.size(), ehdg.rows.size());
  std::printf("%-6s %-8s %10s %10s %10s %12s %12s\n", "level", "cells", "HDG", "E-HDG", "reduction",
              "t_hdg_s", "t_ehdg_s");
  for (std::size_t i = 0; i < n; ++i) {
    const mhdg_report& a = hdg.rows[i].rep;
    const mhdg_report& b = ehdg.rows[i].rep;
    const double red = 100.0 * (static_cast<double>(b.dofs) - a.dofs) / a.dofs;
    auto t = [&](double x) { return c.timings ? fmt("%.6f", x) : std::string("0"); };
    csv += std::to_string(a.level) + ',' + std::to_string(a.cells) + ',' + std::to_string(a.dofs) + ',' +
           std::to_string(b.dofs) + ',' + fmt("%.2f", red) + ',' + t(a.t_assembly_s) + ',' +
           t(a.t_solve_s) + ',' + t(a.t_reconstruct_s) + ',' + t(b.t_assembly_s) + ',' +
           t(b.t_solve_s) + ',' + t(b.t_reconstruct_s) + '\n';
    json row = {{"level", a.level}, {"cells", a.cells}, {"dofs_hdg", a.dofs},
                {"dofs_ehdg", b.dofs}, {"reduction_pct", red}};
    if (c.timings) {
      row["timings"] = {
          {"hdg", {{"assembly_s", a.t_assembly_s}, {"solve_s", a.t_solve_s}, {"reconstruct_s", a.t_reconstruct_s}}},
          {"ehdg", {{"assembly_s", b.t_assembly_s}, {"solve_s", b.t_solve_s}, {"reconstruct_s", b.t_reconstruct_s}}}};
    }
    side.push_back(row);
    std::printf("%-6d %-8d %10d %10d %9s%% %12.3f %12.3f\n", a.level, a.cells, a.dofs, b.dofs,
                fmt("%.2f", red).c_str(), a.t_assembly_s + a.t_solve_s + a.t_reconstruct_s,
                b.t_assembly_s + b.t_solve_s + b.t_reconstruct_s);
  }
  write_file(fs::path(c.out) / "compare.csv", csv);
  json summary;
  summary["config"] = config_json(c, "compare-variants");
  summary["comparison"] = side;
  summary["hdg"] = series_json(hdg, c.timings);
  summary["ehdg"] = series_json(ehdg, c.timings);
  const bool ok = hdg.ok && ehdg.ok;
  summary["ok"] = ok;
  write_file(fs::path(c.out) / "summary.json", summary.dump(2) + '\n');
  for (const Series* s : {&hdg, &ehdg}) {
    if (!s->ok) std::cerr << "error: " << s->failure << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

struct FlagValues {
  std::string config;
  std::map<std::string, std::string> values;
  bool dump_matrix = false;
  bool no_timings = false;
};

void add_common(CLI::App* sub, FlagValues& f) {
  sub->add_option("--config", f.config, "key = value configuration file");
  struct Spec {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Spec specs[] = {
      {"--case", "case", "smooth2d | singular2d | hartmann | nonlinear-smooth2d"},
      {"--variant", "variant", "hdg | ehdg"},
      {"--k", "k", "polynomial degree (list or range for study and dof-table)"},
      {"--levels", "levels", "mesh levels, e.g. 0-4 or 1,2,3"},
      {"--alpha1", "alpha1", "velocity stabilization"},
      {"--beta", "beta", "magnetic stabilization (sets beta1 and beta2)"},
      {"--beta1", "beta1", "tangential magnetic stabilization"},
      {"--beta2", "beta2", "normal magnetic stabilization"},
      {"--re", "re", "fluid Reynolds number"},
      {"--rm", "rm", "magnetic Reynolds number"},
      {"--kappa", "kappa", "coupling parameter"},
      {"--p0", "p0", "pressure amplitude (smooth2d)"},
      {"--epsilon", "epsilon", "Picard tolerance"},
      {"--max-iter", "max_iter", "Picard iteration cap"},
      {"--damping", "damping", "Picard relaxation in (0, 1]"},
      {"--rhat-bc", "rhat_bc", "strong-zero | normal-constraint"},
      {"--out", "out", "output directory"},
      {"--threads", "threads", "worker threads for element loops"},
      {"--mesh", "mesh", "solve on a mesh file instead of the case's mesh sequence"},
  };
  for (const auto& s : specs) {
    const std::string key = s.key;
    sub->add_option_function<std::string>(
        s.flag, [&f, key](const std::string& v) { f.values[key] = v; }, s.help);
  }
  sub->add_flag("--dump-matrix", f.dump_matrix, "write each condensed matrix as row col value");
  sub->add_flag("--no-timings", f.no_timings, "write zero timings so repeated runs compare byte for byte");
}

Settings merge(const FlagValues& f) {
  Settings s;
  if (!f.config.empty()) s = read_config(f.config);
  for (const auto& [k, v] : f.values) {
    if (k == "beta") {
      s.erase("beta1");
      s.erase("beta2");
    }
    s[k] = v;
  }
  if (f.dump_matrix) s["dump_matrix"] = "true";
  if (f.no_timings) s["timings"] = "false";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDG and E-HDG solver for stationary incompressible visco-resistive MHD"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mhdg_version()));
  FlagValues run_f, study_f, dof_f, cmp_f;
  CLI::App* run = app.add_subcommand("run", "solve one case at the given k over the mesh levels");
  CLI::App* study = app.add_subcommand("study", "convergence study over several k");
  CLI::App* dof = app.add_subcommand("dof-table", "global DOF counts of both variants");
  CLI::App* cmp = app.add_subcommand("compare-variants", "solve with HDG and E-HDG side by side");
  add_common(run, run_f);
  add_common(study, study_f);
  add_common(dof, dof_f);
  add_common(cmp, cmp_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(build_config(merge(run_f), false), "run");
    if (study->parsed()) {
      Settings s = merge(study_f);
      if (!s.count("k")) s["k"] = "1-4";
      return cmd_run(build_config(s, true), "study");
    }
    if (dof->parsed()) {
      Settings s = merge(dof_f);
      if (!s.count("k")) s["k"] = "1-4";
      return cmd_dof_table(build_config(s, true));
    }
    if (cmp->parsed()) return cmd_compare(build_config(merge(cmp_f), false));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
