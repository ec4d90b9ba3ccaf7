#include "qkm/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "qkm/cauchy.hpp"
#include "qkm/combinatorics.hpp"
#include "qkm/correlators.hpp"
#include "qkm/verify.hpp"

namespace qkm {

namespace {

using json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view s) {
  const std::string t = trim(s);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) throw Error(ErrorKind::InvalidInput, "not a number: '" + t + "'");
  return v;
}

std::vector<double> parse_list(std::string_view s) {
  const std::string t = trim(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw Error(ErrorKind::InvalidInput, "expected a list [a, b, ...], got '" + t + "'");
  std::vector<double> out;
  const std::string inner = trim(std::string_view(t).substr(1, t.size() - 2));
  if (inner.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = inner.find(',', pos);
    out.push_back(parse_number(std::string_view(inner).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string parse_string(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

int parse_int(std::string_view s) {
  const double v = parse_number(s);
  if (v != static_cast<double>(static_cast<long long>(v))) throw Error(ErrorKind::InvalidInput, "expected an integer, got '" + trim(s) + "'");
  return static_cast<int>(v);
}

// ---- output helpers ---------------------------------------------------------

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json real_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json input_json(const ModelInput& in) {
  return json{{"E", real_array(in.E)}, {"r", real_array(in.r)}, {"N", in.N}, {"lambda", in.lambda}};
}

// RFC 4180 quoting for text fields.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::string csv() const {
    std::string s = join(header_);
    for (const auto& r : rows_) s += join(r);
    return s;
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + csv_field(cells[i]);
    return s + "\r\n";
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double x) { return format_double(x); }

// ---- shared pieces ----------------------------------------------------------

struct Options {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::string points_path;
  std::string mode = "pair";
  std::string formula = "all";
  std::string lambda_grid;
};

RunConfig load_config(const Options& o) {
  if (o.config_path.empty()) throw Error(ErrorKind::InvalidInput, "--config is required");
  std::ifstream in(o.config_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read config file '" + o.config_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config(buf.str());
  if (!o.format.empty()) cfg.format = o.format;
  if (!o.out_path.empty()) cfg.out_path = o.out_path;
  if (cfg.format != "json" && cfg.format != "csv") throw Error(ErrorKind::InvalidInput, "format must be json or csv");
  return cfg;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot write output file '" + cfg.out_path + "'");
  f << text;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json alpha_json(const SpectralCurve& C) { return real_array(C.alpha()); }

int thread_count(std::size_t jobs) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QKM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) hw = static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(hw, jobs)));
}

// Runs job(i) for i < n on a small pool; results are placed by index.
template <class Job>
void parallel_for(std::size_t n, Job job) {
  const int threads = thread_count(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// ---- commands ---------------------------------------------------------------

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const SpectralData S = solve_spectral(cfg.model, cfg.solver);
  const SpectralCurve C(S);
  if (cfg.format == "csv") {
    Table t({"k", "E", "r", "eps", "rho", "alpha"});
    for (int k = 0; k < C.size(); ++k) {
      const auto u = static_cast<std::size_t>(k);
      t.add({std::to_string(k + 1), num(S.input.E[u]), num(S.input.r[u]), num(S.eps[u]), num(S.rho[u]), num(C.alpha()[u])});
    }
    emit(cfg, t.csv(), out);
    return kExitOk;
  }
  json doc{{"schema", 1},
           {"command", "solve"},
           {"input", input_json(S.input)},
           {"eps", real_array(S.eps)},
           {"rho", real_array(S.rho)},
           {"alpha", alpha_json(C)},
           {"residual_max", S.residual_max},
           {"newton_iterations", S.newton_iterations},
           {"homotopy_steps", S.homotopy_steps}};
  emit(cfg, dump(doc), out);
  return kExitOk;
}

std::vector<std::array<double, 4>> read_points(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::InvalidInput, "--points is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read points file '" + path + "'");
  std::vector<std::array<double, 4>> pts;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    std::array<double, 4> p{0, 0, 0, 0};
    try {
      if (cells.size() != 2 && cells.size() != 4) throw Error(ErrorKind::InvalidInput, "expected re,im,re,im");
      for (std::size_t i = 0; i < cells.size(); ++i) p[i] = parse_number(cells[i]);
    } catch (const Error&) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw Error(ErrorKind::InvalidInput, "malformed points row '" + t + "'");
    }
    first = false;
    pts.push_back(p);
  }
  if (pts.empty()) throw Error(ErrorKind::InvalidInput, "points file has no rows");
  return pts;
}

int cmd_correlator(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  if (o.mode != "pair" && o.mode != "diag" && o.mode != "oneone") throw Error(ErrorKind::InvalidInput, "mode must be pair, diag or oneone");
  const auto points = read_points(o.points_path);
  std::optional<PairFormula> pf;
  std::optional<OneOneFormula> of;
  if (o.mode == "pair") pf = parse_pair_formula(o.formula);
  if (o.mode == "oneone") of = parse_oneone_formula(o.formula == "all" ? "all" : o.formula);
  const SpectralCurve C(solve_spectral(cfg.model, cfg.solver));

  struct Row {
    CorrelatorValue v;
    std::string status = "ok";
  };
  std::vector<Row> rows(points.size());
  int good = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const cplx z(points[i][0], points[i][1]);
    const cplx w(points[i][2], points[i][3]);
    try {
      if (o.mode == "pair") rows[i].v = G0_pair(C, z, w, *pf);
      else if (o.mode == "diag") rows[i].v = G0_diag(C, z);
      else rows[i].v = G0_oneone(C, z, w, *of);
      ++good;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidInput) throw;
      rows[i].status = to_string(e.kind());
      err << "point " << i + 1 << ": " << e.what() << "\n";
    }
  }

  if (cfg.format == "csv") {
    Table t({"index", "z_re", "z_im", "w_re", "w_im", "value_re", "value_im", "formula", "spread", "status"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      const bool ok = r.status == "ok";
      t.add({std::to_string(i + 1), num(points[i][0]), num(points[i][1]), num(points[i][2]), num(points[i][3]),
             ok ? num(r.v.value.real()) : "", ok ? num(r.v.value.imag()) : "", ok ? r.v.formula : "",
             ok ? num(r.v.cross_check_spread) : "", r.status});
    }
    emit(cfg, t.csv(), out);
  } else {
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      json j{{"index", i + 1},
             {"z", complex_json({points[i][0], points[i][1]})},
             {"w", complex_json({points[i][2], points[i][3]})},
             {"status", r.status}};
      if (r.status == "ok") {
        j["value"] = complex_json(r.v.value);
        j["formula"] = r.v.formula;
        j["spread"] = r.v.cross_check_spread;
        json ev = json::object();
        for (const auto& f : r.v.evaluations) ev[f.formula] = complex_json(f.value);
        j["evaluations"] = ev;
      }
      arr.push_back(j);
    }
    json doc{{"schema", 1}, {"command", "correlator"}, {"mode", o.mode}, {"input", input_json(cfg.model)}, {"points", arr}};
    emit(cfg, dump(doc), out);
  }
  if (good == 0) {
    err << "no point could be evaluated\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}

std::vector<ResidualReport> verification_reports(const RunConfig& cfg) {
  SpectralData S = solve_spectral(cfg.model, cfg.solver);
  if (cfg.eps_override) {
    if (cfg.eps_override->size() != S.eps.size()) throw Error(ErrorKind::InvalidInput, "override.eps must have one entry per E");
    S.eps = *cfg.eps_override;
  }
  const SpectralCurve C(S);
  std::vector<ResidualReport> reps = residual_suite(C, {cfg.verify_samples, cfg.verify_seed});

  ResidualReport sch{"schechter", 0.0, 0, {}};
  if (!C.is_free()) {
    CauchyNodes nodes;
    for (double a : C.alpha()) nodes.a.push_back(C.R()(a));
    for (double e : C.R().eps()) nodes.b.push_back(C.R()(e));
    Sampler rng(cfg.verify_seed);
    for (int i = 0; i < cfg.verify_samples; ++i) {
      const cplx x = rng.regular(C);
      try {
        sch.add(verify_schechter(nodes, x).max_residual(), {x});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NodeCollision) throw;
      }
    }
  }
  reps.push_back(sch);

  reps.push_back(compare_series(cfg.model, std::min(cfg.series_order, 8)));

  // Exact Wick check on at most three distinct eigenvalues.
  std::vector<double> E(cfg.model.E.begin(), cfg.model.E.begin() + std::min<std::ptrdiff_t>(3, cfg.model.size()));
  ResidualReport mc{"moment_cumulant", 0.0, 0, {}};
  for (int n : {2, 4, 6}) {
    const ResidualReport r = check_moment_cumulant(E, cfg.model.N, n, 100, cfg.verify_seed);
    if (mc.sample_count == 0 || r.max_residual > mc.max_residual) {
      mc.max_residual = r.max_residual;
      mc.worst_point = r.worst_point;
    }
    mc.sample_count += r.sample_count;
  }
  reps.push_back(mc);
  return reps;
}

bool passes(const ResidualReport& r, double threshold) { return r.max_residual <= threshold; }

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<ResidualReport> reps;
  try {
    reps = verification_reports(cfg);
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    if (code == kExitInvalidInput || e.kind() == ErrorKind::Divergence || e.kind() == ErrorKind::ChamberExit) throw;
    err << "verification aborted: " << e.what() << "\n";
    return kExitVerification;
  }
  bool ok = true;
  for (const auto& r : reps)
    if (!passes(r, cfg.verify_threshold)) {
      ok = false;
      err << "FAIL " << r.name << ": residual " << r.max_residual << " at";
      for (cplx p : r.worst_point) err << " (" << p.real() << "," << p.imag() << ")";
      err << "\n";
    }

  if (cfg.format == "csv") {
    Table t({"name", "max_residual", "sample_count", "pass"});
    for (const auto& r : reps)
      t.add({r.name, num(r.max_residual), std::to_string(r.sample_count), passes(r, cfg.verify_threshold) ? "true" : "false"});
    emit(cfg, t.csv(), out);
  } else {
    json arr = json::array();
    for (const auto& r : reps) {
      json wp = json::array();
      for (cplx p : r.worst_point) wp.push_back(complex_json(p));
      arr.push_back({{"name", r.name},
                     {"max_residual", r.max_residual},
                     {"sample_count", r.sample_count},
                     {"worst_point", wp},
                     {"pass", passes(r, cfg.verify_threshold)}});
    }
    json doc{{"schema", 1}, {"command", "verify"}, {"input", input_json(cfg.model)}, {"threshold", cfg.verify_threshold},
             {"reports", arr}, {"pass", ok}};
    emit(cfg, dump(doc), out);
  }
  return ok ? kExitOk : kExitVerification;
}

int cmd_series(const RunConfig& cfg, std::ostream& out) {
  const int K = cfg.series_order;
  if (K < 0 || K > 8) throw Error(ErrorKind::InvalidInput, "series.order must lie in [0, 8]");
  cfg.model.validate();
  const SpectralJets sj = series_spectral(cfg.model, K);
  const JetMatrix closed = series_2pt_closed(cfg.model, K);
  const JetMatrix oracle = series_2pt_iterative(cfg.model, K);
  const int d = cfg.model.size();
  if (cfg.format == "csv") {
    Table t({"k", "l", "order", "closed", "oracle"});
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        for (int m = 0; m <= K; ++m)
          t.add({std::to_string(k + 1), std::to_string(l + 1), std::to_string(m),
                 num(closed[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)][m].real()),
                 num(oracle[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)][m].real())});
    emit(cfg, t.csv(), out);
    return kExitOk;
  }
  const auto coeffs = [&](const SeriesJet& j) {
    json a = json::array();
    for (int m = 0; m <= K; ++m) a.push_back(j[m].real());
    return a;
  };
  json eps = json::array(), rho = json::array(), gc = json::array(), go = json::array();
  for (int k = 0; k < d; ++k) {
    eps.push_back(coeffs(sj.eps[static_cast<std::size_t>(k)]));
    rho.push_back(coeffs(sj.rho[static_cast<std::size_t>(k)]));
    json rc = json::array(), ro = json::array();
    for (int l = 0; l < d; ++l) {
      rc.push_back(coeffs(closed[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]));
      ro.push_back(coeffs(oracle[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]));
    }
    gc.push_back(rc);
    go.push_back(ro);
  }
  json doc{{"schema", 1},    {"command", "series"}, {"input", input_json(cfg.model)}, {"order", K},
           {"eps", eps},     {"rho", rho},          {"G_closed", gc},                {"G_oracle", go},
           {"max_deviation", compare_series(cfg.model, K).max_residual}};
  emit(cfg, dump(doc), out);
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  if (parts.size() != 3) throw Error(ErrorKind::InvalidInput, "--lambda-grid must be a:b:step");
  const double a = parse_number(parts[0]), b = parse_number(parts[1]), step = parse_number(parts[2]);
  if (!(step > 0.0) || b < a) throw Error(ErrorKind::InvalidInput, "--lambda-grid needs step > 0 and b >= a");
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
  if (count > 100000) throw Error(ErrorKind::InvalidInput, "--lambda-grid has too many points");
  std::vector<double> grid;
  for (long i = 0; i < count; ++i) grid.push_back(a + static_cast<double>(i) * step);
  return grid;
}

int cmd_sweep(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  cfg.model.validate();
  const std::vector<double> grid = o.lambda_grid.empty() ? std::vector<double>{cfg.model.lambda} : parse_grid(o.lambda_grid);
  for (double l : grid)
    if (!(l >= 0.0)) throw Error(ErrorKind::InvalidInput, "lambda grid values must be >= 0");
  struct Row {
    std::vector<double> eps, rho, alpha, G;
    double residual = 0.0;
    std::string status = "ok";
  };
  std::vector<Row> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    ModelInput in = cfg.model;
    in.lambda = grid[i];
    try {
      const SpectralCurve C(solve_spectral(in, cfg.solver));
      Row& r = rows[i];
      r.eps = C.data().eps;
      r.rho = C.data().rho;
      r.alpha = C.alpha();
      for (int k = 0; k < C.size(); ++k)
        for (int l = 0; l < C.size(); ++l) r.G.push_back(C.G_matrix()(k, l));
      r.residual = C.data().residual_max;
    } catch (const Error& e) {
      rows[i].status = std::string("FAILED:") + to_string(e.kind());
    }
  });

  int good = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].status == "ok") ++good;
    else err << "lambda = " << num(grid[i]) << ": " << rows[i].status << "\n";
  }
  const int d = cfg.model.size();
  if (cfg.format == "csv") {
    std::vector<std::string> header{"lambda"};
    for (const char* name : {"eps", "rho", "alpha"})
      for (int k = 1; k <= d; ++k) header.push_back(std::string(name) + "_" + std::to_string(k));
    for (int k = 1; k <= d; ++k)
      for (int l = 1; l <= d; ++l) header.push_back("G_" + std::to_string(k) + "_" + std::to_string(l));
    header.push_back("residual_max");
    header.push_back("status");
    Table t(header);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      std::vector<std::string> cells{num(grid[i])};
      const bool ok = r.status == "ok";
      for (const auto* v : {&r.eps, &r.rho, &r.alpha})
        for (int k = 0; k < d; ++k) cells.push_back(ok ? num((*v)[static_cast<std::size_t>(k)]) : "");
      for (int k = 0; k < d * d; ++k) cells.push_back(ok ? num(r.G[static_cast<std::size_t>(k)]) : "");
      cells.push_back(ok ? num(r.residual) : "");
      cells.push_back(r.status);
      t.add(cells);
    }
    emit(cfg, t.csv(), out);
  } else {
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      json j{{"lambda", grid[i]}, {"status", r.status}};
      if (r.status == "ok") {
        j["eps"] = real_array(r.eps);
        j["rho"] = real_array(r.rho);
        j["alpha"] = real_array(r.alpha);
        j["G"] = real_array(r.G);
        j["residual_max"] = r.residual;
      }
      arr.push_back(j);
    }
    json doc{{"schema", 1}, {"command", "sweep"}, {"input", input_json(cfg.model)}, {"rows", arr}};
    emit(cfg, dump(doc), out);
  }
  return good > 0 ? kExitOk : kExitConvergence;
}

int cmd_selftest(std::ostream& out) {
  bool ok = true;
  const auto line = [&](const std::string& name, double value, double tol) {
    const bool pass = value < tol;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << name << " " << num(value) << " < " << num(tol) << "\n";
  };
  const ModelInput in = ModelInput::make({1.0, 2.0}, {1.0, 1.0}, 0.05);
  const SpectralCurve C(solve_spectral(in));
  line("spectral_residual", C.data().residual_max, 1e-12);
  for (const auto& r : residual_suite(C, {5, 1})) line(r.name, r.max_residual, 1e-8);
  line("series_compare", compare_series(in, 5).max_residual, 1e-8);
  line("pair_spread", G0_pair(C, {0.7, 0.3}, {1.3, -0.2}).cross_check_spread, 1e-8);
  line("oneone_spread", G0_oneone(C, {0.7, 0.3}, {1.3, -0.2}).cross_check_spread, 1e-8);
  line("moment_cumulant", check_moment_cumulant(in.E, in.N, 4).max_residual, 1e-300);
  return ok ? kExitOk : kExitVerification;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::optional<double> N;
  bool have_E = false, have_r = false;
  std::stringstream ss{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string_view value = std::string_view(line).substr(eq + 1);
    try {
      if (key == "model.E") { cfg.model.E = parse_list(value); have_E = true; }
      else if (key == "model.r") { cfg.model.r = parse_list(value); have_r = true; }
      else if (key == "model.N") N = parse_number(value);
      else if (key == "model.lambda") cfg.model.lambda = parse_number(value);
      else if (key == "solver.tol") cfg.solver.tol = parse_number(value);
      else if (key == "solver.max_newton") cfg.solver.max_newton = parse_int(value);
      else if (key == "solver.min_homotopy_step") cfg.solver.min_homotopy_step = parse_number(value);
      else if (key == "series.order") cfg.series_order = parse_int(value);
      else if (key == "output.format") cfg.format = parse_string(value);
      else if (key == "output.path") cfg.out_path = parse_string(value);
      else if (key == "verify.threshold") cfg.verify_threshold = parse_number(value);
      else if (key == "verify.samples") cfg.verify_samples = parse_int(value);
      else if (key == "verify.seed") cfg.verify_seed = static_cast<std::uint64_t>(parse_int(value));
      else if (key == "override.eps") cfg.eps_override = parse_list(value);
      else throw Error(ErrorKind::InvalidInput, "unknown key '" + key + "'");
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_E) throw Error(ErrorKind::InvalidInput, "model.E is required");
  if (!have_r) cfg.model.r.assign(cfg.model.E.size(), 1.0);
  cfg.model = ModelInput::make(cfg.model.E, cfg.model.r, cfg.model.lambda, N);
  cfg.model.validate();
  if (!(cfg.solver.tol > 0.0) || cfg.solver.max_newton < 1 || !(cfg.solver.min_homotopy_step > 0.0))
    throw Error(ErrorKind::InvalidInput, "solver settings must be positive");
  if (cfg.verify_samples < 1) throw Error(ErrorKind::InvalidInput, "verify.samples must be positive");
  return cfg;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::DomainViolation:
    case ErrorKind::OddN:
    case ErrorKind::InvalidType:
      return kExitInvalidInput;
    default:
      return kExitConvergence;
  }
}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral curve and planar correlators of a quartic matrix model with external field", "qkm"};
  app.require_subcommand(1);
  Options o;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "config file (key = value lines)")->required();
    sub->add_option("--out", o.out_path, "write output here instead of stdout");
    sub->add_option("--format", o.format, "json or csv");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve for eps, rho");
  CLI::App* corr = app.add_subcommand("correlator", "evaluate correlators at points");
  CLI::App* ver = app.add_subcommand("verify", "residuals of all identities");
  CLI::App* ser = app.add_subcommand("series", "lambda-series of G_kl, closed form and oracle");
  CLI::App* sweep = app.add_subcommand("sweep", "solve over a lambda grid");
  CLI::App* self = app.add_subcommand("selftest", "built-in checks");
  for (CLI::App* s : {solve, corr, ver, ser, sweep}) common(s);
  corr->add_option("--points", o.points_path, "CSV of re,im,re,im rows")->required();
  corr->add_option("--mode", o.mode, "pair, diag or oneone");
  corr->add_option("--formula", o.formula, "formula tag or all");
  sweep->add_option("--lambda-grid", o.lambda_grid, "a:b:step");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (self->parsed()) return cmd_selftest(out);
    const RunConfig cfg = load_config(o);
    if (solve->parsed()) return cmd_solve(cfg, out);
    if (corr->parsed()) return cmd_correlator(cfg, o, out, err);
    if (ver->parsed()) return cmd_verify(cfg, out, err);
    if (ser->parsed()) return cmd_series(cfg, out);
    return cmd_sweep(cfg, o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConvergence;
  }
}

}  // namespace qkm
