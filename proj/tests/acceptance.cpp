// Prints one PASS/FAIL line per acceptance criterion; exit status is nonzero on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "corpus.hpp"
#include "qkm/cauchy.hpp"
#include "qkm/cli.hpp"
#include "qkm/combinatorics.hpp"
#include "qkm/correlators.hpp"
#include "qkm/verify.hpp"

using namespace qkm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool ok, double seconds, const std::string& detail) {
  std::printf("criterion %d: %s  (%.2f s)  %s\n", id, ok ? "PASS" : "FAIL", seconds, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void criterion(int id, const std::function<bool(std::string&)>& body) {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(id, ok, std::chrono::duration<double>(Clock::now() - t0).count(), detail);
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

const std::vector<ModelInput>& the_corpus() {
  static const std::vector<ModelInput> c = testing::corpus(100, 6, 2024);
  return c;
}

const std::vector<SpectralCurve>& the_curves() {
  static const std::vector<SpectralCurve> curves = [] {
    std::vector<SpectralCurve> out;
    for (const ModelInput& in : the_corpus()) out.emplace_back(solve_spectral(in));
    return out;
  }();
  return curves;
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qkm");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  criterion(1, [](std::string& detail) {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst = 0.0;
    for (const ModelInput& in : the_corpus()) {
      const SpectralData S = solve_spectral(in);
      worst = std::max(worst, S.residual_max / in.scale());
      ok = ok && S.residual_max < 1e-12 * in.scale();
      for (int k = 0; k < in.size(); ++k) ok = ok && S.eps[k] > 0.0 && S.rho[k] > 0.0;
    }
    const double t = elapsed(t0);
    detail = "100 instances, max residual/scale " + fmt("%.2e", worst);
    return ok && t < 5.0;
  });

  criterion(2, [](std::string& detail) {
    const auto t0 = Clock::now();
    const std::set<std::string> required{"GZW", "2pt", "ansatz_vii", "fractions", "G11_functional", "factorization"};
    double worst = 0.0;
    std::string worst_name;
    std::set<std::string> seen;
    bool ok = true;
    for (const SpectralCurve& C : the_curves())
      for (const ResidualReport& r : residual_suite(C, {20, 1})) {
        seen.insert(r.name);
        const bool bad = !(r.max_residual < 1e-8) || r.sample_count == 0;
        ok = ok && !bad;
        if (bad || r.max_residual > worst) {
          worst = r.max_residual;
          worst_name = r.name;
        }
      }
    for (const auto& n : required) ok = ok && seen.count(n);
    const double t = elapsed(t0);
    detail = "worst " + worst_name + " " + fmt("%.2e", worst) + ", " + fmt("%.1f s", t);
    return ok && t < 30.0;
  });

  criterion(3, [](std::string& detail) {
    double spread = 0.0, asym = 0.0;
    Sampler sampler(3);
    for (const SpectralCurve& C : the_curves())
      for (int i = 0; i < 100; ++i) {
        const cplx z = sampler.regular(C), w = sampler.regular(C);
        const CorrelatorValue v = G0_pair(C, z, w);
        if (v.evaluations.size() != 4) return detail = "a closed form failed at a regular point", false;
        spread = std::max(spread, v.cross_check_spread);
        asym = std::max(asym, rel(v.value, G0_pair(C, w, z).value));
      }
    detail = "max spread " + fmt("%.2e", spread) + ", max asymmetry " + fmt("%.2e", asym);
    return spread < 1e-8 && asym < 1e-10;
  });

  criterion(4, [](std::string& detail) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const ModelInput& in : the_corpus())
      if (in.size() <= 3) worst = std::max(worst, compare_series(in, 5).max_residual);
    const double t = elapsed(t0);
    detail = "max deviation " + fmt("%.2e", worst) + ", " + fmt("%.1f s", t);
    return worst < 1e-8 && t < 10.0;
  });

  criterion(5, [](std::string& detail) {
    double worst = 0.0;
    Sampler sampler(5);
    for (const SpectralCurve& C : the_curves())
      for (int i = 0; i < 50; ++i) {
        const cplx z = sampler.regular(C);
        worst = std::max(worst, rel(G0_diag(C, z).value, G0_pair(C, z, z).value));
      }
    const SpectralCurve free(solve_spectral(ModelInput::make({1.0, 2.5}, {1.0, 2.0}, 0.0)));
    bool exact = true;
    volatile double parts[8] = {0.3, 0.7, 2.0, -1.0, 4.5, 0.0, 1.1, 0.2};
    for (int i = 0; i < 3; ++i) {
      const cplx z(parts[2 * i], parts[2 * i + 1]), w(parts[6], parts[7]);
      exact = exact && G0_diag(free, z).value == 1.0 / (2.0 * z) && G0_pair(free, z, w).value == 1.0 / (z + w);
    }
    detail = "max diag deviation " + fmt("%.2e", worst) + (exact ? ", free values exact" : ", free values NOT exact");
    return worst < 1e-9 && exact;
  });

  criterion(6, [](std::string& detail) {
    testing::Rng rng(606);
    double mult = 0.0, schechter = 0.0;
    for (int inst = 0; inst < 500; ++inst) {
      const int d = 1 + inst % 8;
      std::vector<cplx> all;
      while (static_cast<int>(all.size()) < 2 * d) {
        const cplx z(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
        bool ok = true;
        for (cplx w : all) ok = ok && std::abs(z - w) >= 0.1;
        if (ok) all.push_back(z);
      }
      const CauchyNodes n{{all.begin(), all.begin() + d}, {all.begin() + d, all.end()}};
      const Eigen::MatrixXcd I = cauchy_matrix(n) * cauchy_inverse(n).entries - Eigen::MatrixXcd::Identity(d, d);
      double norm = 0.0;
      for (int i = 0; i < d; ++i) norm = std::max(norm, I.row(i).cwiseAbs().sum());
      mult = std::max(mult, norm);
      cplx x;
      do x = cplx(rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0));
      while (std::any_of(all.begin(), all.end(), [&](cplx v) { return std::abs(x - v) < 0.1; }));
      schechter = std::max(schechter, verify_schechter(n, x).max_residual());
    }
    const CauchyInverse two = cauchy_inverse({{3.0, 4.0}, {1.0, 2.0}});
    const double expect[2][2] = {{-6.0, 12.0}, {4.0, -6.0}};
    double example = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) example = std::max(example, std::abs(two.entries(k, l) - expect[k][l]));
    detail = "multiply-back " + fmt("%.2e", mult) + ", identities " + fmt("%.2e", schechter) + ", d=2 example " +
             fmt("%.1e", example);
    return mult < 1e-8 && schechter < 1e-9 && example < 1e-14;
  });

  criterion(7, [](std::string& detail) {
    const std::set<std::vector<std::vector<int>>> four{
        {{1, 2, 3, 4}}, {{1, 2}, {3, 4}}, {{1, 3}, {2, 4}}, {{1, 4}, {2, 3}}};
    std::set<std::vector<std::vector<int>>> got;
    const auto p4 = even_partitions(4);
    for (const auto& p : p4) got.insert(p.blocks);
    bool ok = p4.size() == 4 && got == four;
    BigInt fact = 1;
    for (int n = 1; n <= 8; ++n) {
      fact *= n;
      BigInt total = 0;
      for (const CycleType& t : cycle_types(n)) total += cycle_type_count(t);
      ok = ok && total == fact;
    }
    const std::vector<Rational> E{Rational(1, 2), Rational(3, 2), Rational(11, 4)};
    for (int n : {2, 4, 6}) ok = ok && check_moment_cumulant(E, Rational(5), n).max_residual == 0.0;
    detail = "partitions, n! sums and rational moment-cumulant checks";
    return ok;
  });

  criterion(8, [](std::string& detail) {
    double spread = 0.0;
    Sampler sampler(8);
    for (const SpectralCurve& C : the_curves())
      for (int i = 0; i < 10; ++i) {
        const cplx z = sampler.regular(C), w = sampler.regular(C);
        spread = std::max(spread, G0_oneone(C, z, w).cross_check_spread);
      }
    const SpectralCurve free(solve_spectral(ModelInput::make({1.0, 2.5}, {1.0, 2.0}, 0.0)));
    const bool zero = G0_oneone(free, cplx(0.4, 0.3), cplx(1.7, -0.2)).value == cplx(0.0);
    // drift: values at |z - w| = 1e-3 and 1e-4. It is the slope of G itself, so it is reported but the
    // pass condition is the limit: 1e-4 within 1e-3 of the coincidence value, approach linear in |z - w|.
    double drift = 0.0, to_limit = 0.0, nonlinear = 0.0;
    for (std::size_t i = 0; i < the_curves().size(); i += 10) {
      const SpectralCurve& C = the_curves()[i];
      const cplx w = sampler.regular(C);
      const cplx a = G0_oneone(C, w + 1e-3, w, OneOneFormula::symm).value;
      const cplx b = G0_oneone(C, w + 1e-4, w, OneOneFormula::symm).value;
      const cplx c = G0_oneone(C, w, w, OneOneFormula::symm).value;
      drift = std::max(drift, rel(a, b));
      to_limit = std::max(to_limit, rel(b, c));
      nonlinear = std::max(nonlinear, std::abs((a - c) - 10.0 * (b - c)) / std::abs(a - c));
    }
    detail = "SW31 vs symm " + fmt("%.2e", spread) + ", drift 1e-3/1e-4 " + fmt("%.2e", drift) + ", 1e-4 to limit " +
             fmt("%.2e", to_limit) + ", nonlinearity " + fmt("%.2e", nonlinear) +
             (zero ? ", free value 0" : ", free value NOT 0");
    return spread < 1e-8 && zero && to_limit < 1e-3 && nonlinear < 0.05;
  });

  criterion(9, [](std::string& detail) {
    const fs::path golden = fs::path(QKM_SOURCE_DIR) / "tests" / "golden";
    const std::string cfg = (golden / "d2.cfg").string();
    const std::vector<std::pair<std::vector<std::string>, std::string>> cases{
        {{"solve", "--config", cfg}, "solve.json"},
        {{"verify", "--config", cfg, "--format", "csv"}, "verify.csv"},
        {{"sweep", "--config", cfg, "--lambda-grid", "0:0.1:0.025", "--format", "csv"}, "sweep.csv"},
    };
    bool ok = true;
    for (const auto& [args, file] : cases) {
      const CliRun a = cli(args), b = cli(args);
      ok = ok && a.code == 0 && a.out == b.out && a.out == slurp(golden / file);
    }
    const fs::path tmp = fs::temp_directory_path();
    auto write = [&](const std::string& name, const std::string& text) {
      const fs::path p = tmp / ("qkm_accept_" + name + ".cfg");
      std::ofstream(p, std::ios::binary) << text;
      return p.string();
    };
    const int c0 = cli({"solve", "--config", cfg}).code;
    const int c2 = cli({"solve", "--config",
                        write("tight", "model.E = [1.0, 2.0]\nmodel.lambda = 100\nsolver.max_newton = 2\n"
                                       "solver.min_homotopy_step = 0.1\n")})
                       .code;
    const int c3 = cli({"solve", "--config", write("dup", "model.E = [1.0, 1.0]\nmodel.lambda = 0.1\n")}).code;
    const int c4 = cli({"verify", "--config",
                        write("corrupt", "model.E = [1.0, 2.0]\nmodel.lambda = 0.05\nverify.samples = 5\n"
                                         "override.eps = [1.001, 2.0]\n")})
                       .code;
    ok = ok && c0 == 0 && c2 == 2 && c3 == 3 && c4 == 4;
    detail = "golden solve/verify/sweep, exit codes " + std::to_string(c0) + "/" + std::to_string(c2) + "/" +
             std::to_string(c3) + "/" + std::to_string(c4);
    return ok;
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
