// Batch experiment runner: verify / dominate / weights / sweep / multiplier.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "convexdom/domination.hpp"
#include "convexdom/report.hpp"

using json = nlohmann::json;
using namespace convexdom;

namespace {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int d = 1;
  int root_level = 0;
  int cell_level = -6;
  double gamma = 0.5;
  double p = 2, q = 2, r = 2;
  double kappa = 1.0;
  double tol_body = 0.05;
  int n = 2;  // components / weight dimension
  // weight fixture
  WeightKind weight_kind = WeightKind::ScalarPower;
  WeightParams weight_params{};
  // kernel fixture
  std::string kernel_type = "smooth_bump";
  int kernel_level = -2;
  int kernel_m1 = 1, kernel_m2 = 1;
  std::vector<double> kernel_values;
  std::array<std::int64_t, 2> kernel_lo{0, 0}, kernel_hi{0, 0};
  int n1 = -4, n2 = -2;
  // battery sizes
  int battery_verify = 4;
  int battery_dominate = 4;
  int sweep_points = 8;
  // multiplier
  int mult_levels = 7, mult_kmin = 2, mult_kmax = 4, mult_ellmax = 6;
  std::string out_dir;
  std::string echo = "defaults";
};

WeightKind parse_weight_kind(const std::string& s) {
  if (s == "identity") return WeightKind::Identity;
  if (s == "scalar_power") return WeightKind::ScalarPower;
  if (s == "rotated_diagonal") return WeightKind::RotatedDiagonal;
  if (s == "random_log_spd") return WeightKind::RandomLogSpd;
  throw std::runtime_error("unknown weight kind: " + s);
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  cfg.echo = path;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.d = j.value("d", cfg.d);
  cfg.root_level = j.value("root_level", cfg.root_level);
  cfg.cell_level = j.value("cell_level", cfg.cell_level);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.p = j.value("p", cfg.p);
  cfg.q = j.value("q", cfg.q);
  cfg.r = j.value("r", cfg.r);
  cfg.kappa = j.value("kappa", cfg.kappa);
  cfg.tol_body = j.value("tol_body", cfg.tol_body);
  cfg.n = j.value("n", cfg.n);
  cfg.n1 = j.value("n1", cfg.n1);
  cfg.n2 = j.value("n2", cfg.n2);
  cfg.out_dir = j.value("out", cfg.out_dir);
  if (j.contains("weight")) {
    const auto& w = j["weight"];
    cfg.weight_kind = parse_weight_kind(w.value("kind", std::string("scalar_power")));
    cfg.weight_params.alpha = w.value("alpha", cfg.weight_params.alpha);
    cfg.weight_params.beta = w.value("beta", cfg.weight_params.beta);
    cfg.weight_params.r = w.value("r", cfg.r);
    cfg.weight_params.amplitude = w.value("amplitude", cfg.weight_params.amplitude);
    cfg.weight_params.smoothness = w.value("smoothness", cfg.weight_params.smoothness);
    cfg.weight_params.rotation = w.value("rotation", cfg.weight_params.rotation);
  }
  if (j.contains("kernel")) {
    const auto& k = j["kernel"];
    cfg.kernel_type = k.value("type", cfg.kernel_type);
    cfg.kernel_level = k.value("level", cfg.kernel_level);
    cfg.kernel_m1 = k.value("m1", cfg.kernel_m1);
    cfg.kernel_m2 = k.value("m2", cfg.kernel_m2);
    if (k.contains("values")) cfg.kernel_values = k["values"].get<std::vector<double>>();
    cfg.kernel_lo[0] = k.value("lo", 0);
    cfg.kernel_hi[0] = k.value("hi", 0);
  }
  if (j.contains("battery")) {
    const auto& b = j["battery"];
    cfg.battery_verify = b.value("verify", cfg.battery_verify);
    cfg.battery_dominate = b.value("dominate", cfg.battery_dominate);
    cfg.sweep_points = b.value("sweep_points", cfg.sweep_points);
  }
  if (j.contains("multiplier")) {
    const auto& m = j["multiplier"];
    cfg.mult_levels = m.value("levels", cfg.mult_levels);
    cfg.mult_kmin = m.value("k_min", cfg.mult_kmin);
    cfg.mult_kmax = m.value("k_max", cfg.mult_kmax);
    cfg.mult_ellmax = m.value("ell_max", cfg.mult_ellmax);
  }
  if (!(cfg.gamma > 0 && cfg.gamma < 1)) throw std::runtime_error("config: gamma must be in (0,1)");
  return cfg;
}

GridSpec make_grid(const ExperimentConfig& cfg) {
  return GridSpec{cfg.d, cfg.cell_level, DyadicCube{cfg.d, cfg.root_level, {0, 0}}};
}

Kernel make_kernel(const ExperimentConfig& cfg) {
  if (cfg.kernel_type == "delta") return delta_kernel(cfg.d, cfg.kernel_level);
  if (cfg.kernel_type == "smooth_bump") return smooth_bump_kernel(cfg.d, cfg.kernel_level);
  if (cfg.kernel_type == "random")
    return random_kernel(cfg.d, cfg.kernel_level, cfg.kernel_m1, cfg.kernel_m2, cfg.seed);
  if (cfg.kernel_type == "values") {
    Kernel k;
    k.d = cfg.d;
    k.level = cfg.kernel_level;
    k.m1 = cfg.kernel_m1;
    k.m2 = cfg.kernel_m2;
    k.box.lo = cfg.kernel_lo;
    k.box.hi = cfg.kernel_hi;
    if (cfg.d == 1) {
      k.box.lo[1] = 0;
      k.box.hi[1] = 0;
    }
    k.values = cfg.kernel_values;
    k.validate();
    return k;
  }
  throw std::runtime_error("unknown kernel type: " + cfg.kernel_type);
}

// minimal glob: * and ? wildcards
bool glob_match(const std::string& pat, const std::string& s, size_t pi = 0, size_t si = 0) {
  while (pi < pat.size()) {
    if (pat[pi] == '*') {
      for (size_t k = si; k <= s.size(); ++k)
        if (glob_match(pat, s, pi + 1, k)) return true;
      return false;
    }
    if (si >= s.size()) return false;
    if (pat[pi] != '?' && pat[pi] != s[si]) return false;
    ++pi;
    ++si;
  }
  return si == s.size();
}

struct Runner {
  ExperimentConfig cfg;
  std::string filter;
  Report report;

  bool wanted(const std::string& name) const {
    return filter.empty() || glob_match(filter, name);
  }
  void record(const std::string& name, const std::string& anchor, bool ok, double tol,
              std::map<std::string, double> values) {
    if (!wanted(name)) return;
    CheckRecord rec;
    rec.name = name;
    rec.anchor = anchor;
    rec.tolerance = tol;
    rec.status = ok ? (tol == 0 ? CheckStatus::ExactPass : CheckStatus::BandPass)
                    : CheckStatus::Fail;
    rec.values = std::move(values);
    report.add(std::move(rec));
  }
};

GridFunction random_function(const GridSpec& grid, int n, Rng& rng, const CellMask* mask = nullptr) {
  GridFunction f(grid, n, 1);
  for (auto& v : f.values) v = rng.normal();
  if (mask) f = f.restricted(*mask);
  return f;
}

SparseFamily chain_family(const GridSpec& grid) {
  // nested dyadic chain toward the origin; witness = left-out half, gamma = 1/2
  SparseFamily fam;
  fam.gamma = 0.5;
  DyadicCube Q = grid.root;
  while (Q.level > grid.cell_level) {
    DyadicCube child = Q.children()[0];  // hugs the power-weight singularity
    SparseEntry e;
    e.cube = Q;
    e.witness = CellMask::from_cube(grid, Q).setminus(CellMask::from_cube(grid, child));
    fam.entries.push_back(std::move(e));
    Q = child;
  }
  SparseEntry last;
  last.cube = Q;
  last.witness = CellMask::from_cube(grid, Q);
  fam.entries.push_back(std::move(last));
  return fam;
}

void cmd_verify(Runner& R) {
  const auto& cfg = R.cfg;
  if (cfg.battery_verify <= 0) return;  // empty battery: zero checks, success
  Rng rng(cfg.seed);
  GridSpec grid = make_grid(cfg);

  // operator-ordering inequality for fractional matrix powers
  {
    double worst = -kInf;
    bool ok = true;
    for (int t = 0; t < 50 * cfg.battery_verify; ++t) {
      int n = 2 + int(rng.next() % 4);
      double alpha = 0.25 * double(1 + int(rng.next() % 3));
      auto rep = cordes_check(rng.spd(n), rng.spd(n), alpha);
      worst = std::max(worst, rep.lhs - rep.rhs);
      ok = ok && rep.lhs <= rep.rhs + 1e-9;
    }
    R.record("cordes.batch", "matrix power inequality", ok, 0, {{"worst_excess", worst}});
  }
  // inscribed-ellipsoid sandwich on random norms
  {
    bool ok = true;
    double worst = 0;
    for (int t = 0; t < cfg.battery_verify; ++t) {
      int n = 2 + int(rng.next() % 2);
      Eigen::MatrixXd A(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
      double pe = 1.0 + rng.uniform(0.2, 2.0);
      auto h = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd v = A.transpose() * u;
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += std::pow(std::abs(v(i)), conjugate(pe));
        return std::pow(acc, 1.0 / conjugate(pe));
      };
      auto [E, certJ] = john_ellipsoid(h, n, JohnOptions{0.02, 1024, cfg.seed + t, 60});
      ok = ok && certJ.passed;
      worst = std::max(worst, certJ.max_inner_ratio);
    }
    R.record("john.sandwich", "inscribed ellipsoid certificate", ok, 0.02,
             {{"worst_inner_ratio", worst}});
  }
  // adjoint identity for the configured kernel family
  Kernel ker = make_kernel(cfg);
  BRSFamily fam = make_family(ker, cfg.n1, cfg.n2);
  {
    double worst = 0;
    for (int t = 0; t < cfg.battery_verify; ++t) {
      GridFunction f = random_function(grid, 1, rng), g = random_function(grid, 1, rng);
      double a = pairing(apply(fam, f), g), b = pairing(f, adjoint_apply(fam, g));
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    R.record("operator.adjoint", "single-scale adjoint pairing", worst <= 1e-10, 0,
             {{"worst_drift", worst}});
  }
  // domination run: sparse validity plus the good/bad splitting invariants
  {
    certify(fam, grid, cfg.p, cfg.q, cfg.kappa, cfg.seed);
    bool sparse_ok = true, cz_ok = true, omega_ok = true;
    double worst_recon = 0, worst_ratio = 0;
    for (int t = 0; t < cfg.battery_dominate; ++t) {
      GridFunction f = random_function(grid, cfg.n, rng);
      GridFunction g = random_function(grid, cfg.n, rng);
      try {
        DominationOptions opts;
        opts.gamma = cfg.gamma;
        opts.tol_body = cfg.tol_body;
        opts.seed = cfg.seed + t;
        auto cert = multiscale_dominate(fam, f, g, grid.root, cfg.p, cfg.q, opts);
        sparse_ok = sparse_ok && verify_sparse(cert.family).valid();
        worst_ratio = std::max(worst_ratio, cert.ratio);
        auto om = build_omega(f, g, grid.root, cfg.p, cfg.q, cfg.gamma);
        omega_ok = omega_ok && om.ok;
        if (om.ok && !om.omega.empty()) {
          auto wd = whitney_decompose(om.omega);
          std::vector<double> thr;
          CellMask rootmask = CellMask::from_cube(grid, grid.root);
          for (int i = 0; i < cfg.n; ++i)
            thr.push_back(om.tau_f * lp_average(f.component(i), rootmask, cfg.p));
          auto cz = cz_decompose(f, om.omega, wd, grid.root, cfg.p, thr);
          cz_ok = cz_ok && cz.reconstruction_error <= 1e-12 && cz.mean_zero_error <= 1e-12 &&
                  cz.sup_ok;
          worst_recon = std::max(worst_recon, cz.reconstruction_error);
        }
      } catch (const std::exception& e) {
        omega_ok = false;
      }
    }
    R.record("domination.sparse", "recursive sparse family validity", sparse_ok && omega_ok, 0,
             {{"worst_ratio", worst_ratio}});
    R.record("domination.cz", "good/bad splitting invariants", cz_ok, 0,
             {{"worst_reconstruction", worst_recon}});
  }
  // multiplier telescoping (exact) and reconstruction (band)
  {
    MultiplierSpec ms;
    ms.levels = cfg.mult_levels;
    ms.k_min = cfg.mult_kmin;
    ms.k_max = cfg.mult_kmax;
    ms.ell_max = cfg.mult_ellmax;
    auto mr = decompose_multiplier(ms, cfg.seed);
    R.record("multiplier.telescoping", "radial cutoff telescoping", mr.telescoping_error <= 1e-12,
             0, {{"error", mr.telescoping_error}});
    R.record("multiplier.reconstruction", "frequency decomposition round trip",
             mr.reconstruction_error <= 1e-2, 1e-2, {{"error", mr.reconstruction_error}});
  }
}

void cmd_dominate(Runner& R, const std::string& outdir) {
  const auto& cfg = R.cfg;
  GridSpec grid = make_grid(cfg);
  Kernel ker;
  try {
    ker = make_kernel(cfg);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("kernel fails the support condition T1: ") + e.what());
  }
  BRSFamily fam = make_family(ker, cfg.n1, cfg.n2);
  auto rec = certify(fam, grid, cfg.p, cfg.q, cfg.kappa, cfg.seed);
  Rng rng(cfg.seed);
  bool all_sparse = true;
  double worst_ratio = 0, budget = 0;
  json certs = json::array();
  for (int t = 0; t < cfg.battery_dominate; ++t) {
    GridFunction f = random_function(grid, cfg.n, rng);
    GridFunction g = random_function(grid, cfg.n, rng);
    DominationOptions opts;
    opts.gamma = cfg.gamma;
    opts.tol_body = cfg.tol_body;
    opts.seed = cfg.seed + t;
    auto cert = multiscale_dominate(fam, f, g, grid.root, cfg.p, cfg.q, opts);
    all_sparse = all_sparse && cert.passed;
    worst_ratio = std::max(worst_ratio, cert.ratio);
    budget = cert.constant_budget;
    json jc;
    jc["lhs"] = cert.lhs;
    jc["rhs"] = cert.rhs;
    jc["rhs_plain"] = cert.rhs_plain;
    jc["ratio"] = cert.ratio;
    jc["budget"] = cert.constant_budget;
    jc["cubes"] = cert.family.entries.size();
    jc["min_witness_ratio"] = cert.min_witness_ratio;
    jc["pairing_drift"] = cert.pairing_drift;
    jc["trace"] = cert.trace;
    certs.push_back(jc);
  }
  if (!outdir.empty()) {
    json out;
    out["a_circ"] = rec.a_circ;
    out["a_circ_tag"] = const_tag_name(rec.a_circ_tag);
    out["b"] = rec.b;
    out["cost"] = rec.cost();
    out["certificates"] = certs;
    write_file(outdir + "/certificate.json", out.dump(2) + "\n");
  }
  R.record("dominate.sparse", "recursive domination certificates", all_sparse, 0,
           {{"worst_ratio", worst_ratio}, {"budget", budget}});
  R.record("dominate.ratio", "ratio against the constant budget",
           std::isfinite(worst_ratio), cfg.tol_body,
           {{"worst_ratio", worst_ratio}, {"budget", budget}});
}

void cmd_weights(Runner& R, const std::string& outdir) {
  const auto& cfg = R.cfg;
  GridSpec grid = make_grid(cfg);
  MatrixWeight W = weight_generator(grid, cfg.n, cfg.weight_kind, cfg.weight_params, cfg.seed);
  double ar = a_r_constant(W, cfg.r);
  auto sc = scalar_sup_a_r(W, cfg.r);
  auto ds = delta_sigma(W, cfg.r);
  auto dual = duality_report(W, cfg.r);
  CsvTable tbl;
  tbl.columns = {"a_r", "scalar_sup_a_r", "delta", "sigma", "dual_lhs", "dual_rhs"};
  tbl.rows.push_back({ar, sc.value, ds.delta, ds.sigma, dual.lhs, dual.rhs});
  if (!outdir.empty()) write_file(outdir + "/weights.csv", tbl.to_csv());
  bool identity_one = true;
  {
    MatrixWeight I(grid, cfg.n);
    identity_one = std::abs(a_r_constant(I, cfg.r) - 1.0) <= 1e-12;
  }
  R.record("weights.identity", "identity weight has unit constant", identity_one, 0,
           {{"a_r", ar}});
  R.record("weights.duality", "dual-weight constant relation",
           std::isfinite(dual.ratio) && dual.ratio > 0, 0.05, {{"ratio", dual.ratio}});
}

void cmd_sweep(Runner& R, const std::string& outdir) {
  const auto& cfg = R.cfg;
  GridSpec grid = make_grid(cfg);
  SparseFamily fam = chain_family(grid);
  CsvTable tbl;
  tbl.columns = {"parameter", "a_t", "rh_ts", "operator_ratio", "budget", "ratio_over_budget"};
  std::vector<double> xs, ys;
  int points = std::max(2, cfg.sweep_points);
  for (int i = 0; i < points; ++i) {
    WeightParams wp = cfg.weight_params;
    wp.alpha = 0.08 + 0.75 * double(i) / double(points - 1);
    wp.r = cfg.r;
    MatrixWeight W = weight_generator(grid, cfg.n, WeightKind::ScalarPower, wp, cfg.seed);
    double at = a_r_constant(W, cfg.r);
    double rh = rh_ts_constant(W, cfg.r, 2.0);
    double nrm = sparse_operator_norm(fam, W, cfg.r, cfg.seed);
    double budget = std::pow(at, 1.5);
    tbl.rows.push_back({wp.alpha, at, rh, nrm, budget, nrm / budget});
    if (at > 1.0 + 1e-9 && nrm > 0) {
      xs.push_back(std::log(at));
      ys.push_back(std::log(nrm));
    }
  }
  if (!outdir.empty()) write_file(outdir + "/sweep.csv", tbl.to_csv());
  double slope = xs.size() >= 2 ? fit_slope(xs, ys) : 0.0;
  R.record("sweep.exponent", "sparse operator growth in the weight constant",
           slope <= 1.5 + 0.1, 0.1, {{"slope", slope}});
}

void cmd_multiplier(Runner& R, const std::string& outdir) {
  const auto& cfg = R.cfg;
  MultiplierSpec ms;
  ms.levels = cfg.mult_levels;
  ms.k_min = cfg.mult_kmin;
  ms.k_max = cfg.mult_kmax;
  ms.ell_max = cfg.mult_ellmax;
  auto flat = decompose_multiplier(ms, cfg.seed);
  ms.symbol = smooth_symbol(ms.levels, ms.k_min, ms.k_max, cfg.seed);
  auto smooth = decompose_multiplier(ms, cfg.seed);
  CsvTable tbl;
  tbl.columns = {"ell", "a_circ_ell", "a_ell"};
  for (size_t ell = 0; ell < smooth.a_circ_ell.size(); ++ell)
    tbl.rows.push_back({double(ell), smooth.a_circ_ell[ell], smooth.a_ell[ell]});
  if (!outdir.empty()) write_file(outdir + "/multiplier.csv", tbl.to_csv());
  R.record("multiplier.telescoping", "radial cutoff telescoping",
           flat.telescoping_error <= 1e-12, 0, {{"error", flat.telescoping_error}});
  R.record("multiplier.partition", "frequency partition of unity",
           flat.partition_residual <= 1e-3, 1e-3, {{"residual", flat.partition_residual}});
  R.record("multiplier.identity", "flat symbol reconstructs the identity",
           flat.reconstruction_error <= 1e-2, 1e-2, {{"error", flat.reconstruction_error}});
  R.record("multiplier.smooth", "smooth symbol tail sums", std::isfinite(smooth.b_sum), 1e-3,
           {{"b_circ_sum", smooth.b_circ_sum}, {"b_sum", smooth.b_sum}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex-body sparse domination laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir, filter;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int jobs = 1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t v) { seed_override = v; seed_given = true; },
         "override the config seed");
  app.add_option("--out", out_dir, "output directory (default: CONVEXDOM_OUT)");
  app.add_option("--jobs", jobs, "worker count (runs are deterministic regardless)");
  app.add_option("--filter", filter, "only run checks whose name matches this glob");
  auto* cverify = app.add_subcommand("verify", "run the property suite");
  auto* cdominate = app.add_subcommand("dominate", "end-to-end domination run");
  auto* cweights = app.add_subcommand("weights", "weight constants table");
  auto* csweep = app.add_subcommand("sweep", "power-weight sweep");
  auto* cmultiplier = app.add_subcommand("multiplier", "frequency decomposition demo");
  CLI11_PARSE(app, argc, argv);

  if (out_dir.empty())
    if (const char* env = std::getenv("CONVEXDOM_OUT")) out_dir = env;

  Runner R;
  try {
    R.cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  }
  if (seed_given) R.cfg.seed = seed_override;
  if (!R.cfg.out_dir.empty() && out_dir.empty()) out_dir = R.cfg.out_dir;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  R.filter = filter;
  R.report.seed = R.cfg.seed;
  R.report.config_echo = R.cfg.echo;
  (void)jobs;

  auto t0 = std::chrono::steady_clock::now();
  try {
    if (cverify->parsed()) {
      R.report.command = "verify";
      cmd_verify(R);
    } else if (cdominate->parsed()) {
      R.report.command = "dominate";
      cmd_dominate(R, out_dir);
    } else if (cweights->parsed()) {
      R.report.command = "weights";
      cmd_weights(R, out_dir);
    } else if (csweep->parsed()) {
      R.report.command = "sweep";
      cmd_sweep(R, out_dir);
    } else if (cmultiplier->parsed()) {
      R.report.command = "multiplier";
      cmd_multiplier(R, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  R.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << R.report.to_json();
  if (!out_dir.empty()) write_file(out_dir + "/report.json", R.report.to_json());
  return R.report.exit_code();
}
