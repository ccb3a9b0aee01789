// Batch front-end: generate soliton grids, run verification suites, run
// scattering sweeps, and recover the discrete spectrum from generated data.
//
// Exit codes: 0 success, 2 spec error, 3 I/O error, 4 verification failure,
// 5 scattering precondition failure, 6 round-trip failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hirota/dressing.hpp"
#include "hirota/io.hpp"
#include "hirota/laxpair.hpp"
#include "hirota/parallel.hpp"
#include "hirota/scattering.hpp"

namespace {

using namespace hirota;

constexpr int kExitSpec = 2;
constexpr int kExitIo = 3;
constexpr int kExitVerify = 4;
constexpr int kExitScatter = 5;
constexpr int kExitRoundtrip = 6;

struct RunConfig {
  std::string spec_path;
  std::string output_path;
  std::string format = "csv";
  GridSpec grid{-10.0, 10.0, 401, 0.0, 1.0, 11};
  bool grid_set = false;
  double sweep_min = -3.0, sweep_max = 3.0;
  int sweep_count = 61;
  int levels = 3;
  double perturb = 0.0;
  bool force = false;
};

struct CliError {
  int code;
  std::string message;
};

GridSpec parse_grid_string(const std::string& s) {
  GridSpec g;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d,%lf:%lf:%d", &g.x0, &g.x1, &g.nx, &g.t0,
                  &g.t1, &g.nt) != 6 ||
      g.nx < 2 || g.nt < 1 || g.x1 <= g.x0)
    throw CliError{kExitSpec, "bad --grid, expected x0:x1:nx,t0:t1:nt"};
  return g;
}

void parse_sweep_string(const std::string& s, RunConfig& cfg) {
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &cfg.sweep_min, &cfg.sweep_max,
                  &cfg.sweep_count) != 3 ||
      cfg.sweep_count < 2 || cfg.sweep_max <= cfg.sweep_min)
    throw CliError{kExitSpec, "bad --sweep, expected lmin:lmax:count"};
}

// Spec document may carry a "run" object with defaults; explicit flags win.
void apply_run_block(const json& doc, RunConfig& cfg) {
  if (!doc.contains("run")) return;
  const json& run = doc["run"];
  if (!run.is_object()) throw CliError{kExitSpec, "spec field 'run' must be an object"};
  if (run.contains("grid") && !cfg.grid_set)
    cfg.grid = parse_grid_string(run["grid"].get<std::string>());
  if (run.contains("grid")) cfg.grid_set = true;
  if (run.contains("sweep")) parse_sweep_string(run["sweep"].get<std::string>(), cfg);
  if (run.contains("levels")) cfg.levels = run["levels"].get<int>();
  if (run.contains("format")) cfg.format = run["format"].get<std::string>();
  if (run.contains("out") && cfg.output_path.empty())
    cfg.output_path = run["out"].get<std::string>();
  if (run.contains("perturb")) cfg.perturb = run["perturb"].get<double>();
}

json load_spec_doc(const RunConfig& cfg) {
  std::string text;
  try {
    text = read_text(cfg.spec_path);
  } catch (const std::ios_base::failure& e) {
    throw CliError{kExitIo, e.what()};
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded())
    throw CliError{kExitSpec, "spec file is not valid JSON: " + cfg.spec_path};
  return doc;
}

SolitonSpec load_and_validate(const json& doc, bool allow_empty = false) {
  SolitonSpec spec;
  try {
    spec = spec_from_json(doc);
  } catch (const SpecError& e) {
    throw CliError{kExitSpec, e.what()};
  }
  if (allow_empty && spec.points.empty()) return spec;
  const ValidationReport rep = validate_spec(spec);
  if (!rep.ok()) throw CliError{kExitSpec, "spec invalid: " + rep.errors.front()};
  return spec;
}

void check_overwrite(const RunConfig& cfg) {
  if (!cfg.force && std::filesystem::exists(cfg.output_path))
    throw CliError{kExitIo, "refusing to overwrite " + cfg.output_path +
                               " (pass --force to allow)"};
}

void write_or_io_error(const std::string& path, const std::string& content) {
  try {
    write_text(path, content);
  } catch (const std::ios_base::failure& e) {
    throw CliError{kExitIo, e.what()};
  }
}

void apply_perturbation(FieldGrid& f, double eps) {
  if (eps == 0.0) return;
  double peak = 0.0;
  for (const auto& v : f.values) peak = std::max(peak, std::abs(v));
  std::mt19937 rng(0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : f.values) v += eps * peak * cplx{u(rng), u(rng)};
}

int cmd_generate(RunConfig& cfg) {
  const json doc = load_spec_doc(cfg);
  apply_run_block(doc, cfg);
  const SolitonSpec spec = load_and_validate(doc);
  check_overwrite(cfg);
  EvalStats stats;
  const FieldGrid f = nsoliton_eval(spec, cfg.grid, kPoleGuard, &stats);
  if (cfg.format == "json")
    write_or_io_error(cfg.output_path, field_grid_json(f).dump(2) + "\n");
  else
    write_or_io_error(cfg.output_path, field_grid_csv(f));
  std::vector<double> peaks(f.components, 0.0);
  for (int j = 0; j < f.grid.nt; ++j)
    for (int i = 0; i < f.grid.nx; ++i)
      for (int l = 0; l < f.components; ++l)
        if (!f.masked(i, j))
          peaks[l] = std::max(peaks[l], std::abs(f.at(i, j, l)));
  json side;
  side["spec"] = spec_to_json(spec);
  side["masked"] = stats.masked;
  side["peak"] = peaks;
  side["meta"] = {{"threads", worker_count()}};
  write_or_io_error(cfg.output_path + ".meta.json", side.dump(2) + "\n");
  return 0;
}

int cmd_verify(RunConfig& cfg) {
  const json doc = load_spec_doc(cfg);
  apply_run_block(doc, cfg);
  if (cfg.levels < 1) throw CliError{kExitSpec, "--levels must be >= 1"};
  const SolitonSpec spec = load_and_validate(doc);
  check_overwrite(cfg);
  const std::vector<cplx> lambdas = {cplx{0.3, 0.45}, cplx{-0.6, 0.5}};

  GridSpec g = cfg.grid_set ? cfg.grid : GridSpec{-8.0, 8.0, 161, 0.0, 0.2, 11};

  json report;
  report["pde"] = json::array();
  report["zc"] = json::array();
  std::vector<ResidualReport> pde_levels, zc_levels;
  for (int lev = 0; lev < cfg.levels; ++lev) {
    FieldGrid f = nsoliton_eval(spec, g);
    apply_perturbation(f, cfg.perturb);
    const ResidualReport rp = pde_residual(f, spec.params);
    const ResidualReport rz = zero_curvature_residual(f, spec.params, lambdas);
    pde_levels.push_back(rp);
    zc_levels.push_back(rz);
    report["pde"].push_back(residual_report_json(rp));
    report["zc"].push_back(residual_report_json(rz));
    g = refine(g);
  }
  bool pass = true;
  double min_order = 1e30;
  for (std::size_t i = 1; i < pde_levels.size(); ++i) {
    const double op = convergence_order(pde_levels[i - 1], pde_levels[i]);
    const double oz = convergence_order(zc_levels[i - 1], zc_levels[i]);
    min_order = std::min({min_order, op, oz});
  }
  if (pde_levels.size() > 1 && min_order < 1.7) pass = false;
  const double tol = 1e-4;
  if (pde_levels.back().max_norm > tol || zc_levels.back().max_norm > tol) pass = false;
  report["min_order"] = pde_levels.size() > 1 ? json(min_order) : json(nullptr);
  report["tolerance"] = tol;
  report["pass"] = pass;
  write_or_io_error(cfg.output_path, report.dump(2) + "\n");
  return pass ? 0 : kExitVerify;
}

PotentialSlice slice_for_spec(const SolitonSpec& spec, double t, double L, double h) {
  if (spec.points.empty()) {
    const int nx = static_cast<int>(std::lround(2.0 * L / h)) + 1;
    std::vector<double> xs(nx);
    for (int i = 0; i < nx; ++i) xs[i] = -L + i * h;
    std::vector<std::vector<cplx>> q(2, std::vector<cplx>(nx, cplx{0.0, 0.0}));
    return make_slice(std::move(xs), std::move(q), spec.convention);
  }
  const int nx = static_cast<int>(std::lround(2.0 * L / h)) + 1;
  const GridSpec g{-L, L, nx, t, t, 1};
  const FieldGrid f = nsoliton_eval(spec, g);
  return make_slice(f, 0);
}

double slice_halfwidth(const SolitonSpec& spec) {
  double min_im = 1.0;
  for (const auto& p : spec.points) min_im = std::min(min_im, p.lambda.imag());
  return std::clamp(27.0 / std::max(min_im, 0.05), 26.0, 90.0);
}

int cmd_scatter(RunConfig& cfg) {
  const json doc = load_spec_doc(cfg);
  apply_run_block(doc, cfg);
  const SolitonSpec spec = load_and_validate(doc, /*allow_empty=*/true);
  if (spec.convention == SignConvention::AsPrinted && !spec.points.empty())
    throw CliError{kExitScatter,
                   "as-printed potentials are singular: decay/mask precondition fails"};
  check_overwrite(cfg);
  PotentialSlice slice;
  try {
    slice = slice_for_spec(spec, cfg.grid.t0, slice_halfwidth(spec), 0.02);
  } catch (const DecayViolation& e) {
    throw CliError{kExitScatter, e.what()};
  }

  std::vector<ScatteringRecord> records(cfg.sweep_count);
  std::vector<std::string> errors(cfg.sweep_count);
  parallel_for(records.size(), [&](std::size_t i) {
    const double l = cfg.sweep_min + (cfg.sweep_max - cfg.sweep_min) * double(i) /
                                         (cfg.sweep_count - 1);
    try {
      records[i] = scattering_matrix(slice, l);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw CliError{kExitScatter, e};

  double max_det = 0.0, max_sym = 0.0, max_jump = 0.0;
  for (const auto& rec : records) max_det = std::max(max_det, rec.det_err);
  const int stride = std::max(1, cfg.sweep_count / 6);
  for (int i = 0; i < cfg.sweep_count; i += stride) {
    const double l = records[i].lambda;
    try {
      max_sym = std::max(max_sym, symmetry_check(slice, cplx{l, 0.0}).max_norm);
      const JostSolution jp = jost_solve(slice, cplx{l, 0.0}, Side::PosInf);
      const JostSolution jm = jost_solve(slice, cplx{l, 0.0}, Side::NegInf);
      const SectionalField sf = assemble_sectional(jp, jm, records[i]);
      max_jump = std::max(max_jump, jump_check(sf, records[i], 0.0).max_norm);
    } catch (const std::exception& e) {
      throw CliError{kExitScatter, e.what()};
    }
  }
  write_or_io_error(cfg.output_path, sweep_csv(records));
  json summary;
  summary["max_det_err"] = max_det;
  summary["max_symmetry_residual"] = max_sym;
  summary["max_jump_residual"] = max_jump;
  summary["meta"] = {{"threads", worker_count()}};
  write_or_io_error(cfg.output_path + ".summary.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_roundtrip(RunConfig& cfg) {
  const json doc = load_spec_doc(cfg);
  apply_run_block(doc, cfg);
  const SolitonSpec spec = load_and_validate(doc);
  if (spec.convention != SignConvention::Regularized)
    throw CliError{kExitSpec, "roundtrip requires a regularized spec"};
  for (std::size_t a = 0; a < spec.points.size(); ++a)
    for (std::size_t b = a + 1; b < spec.points.size(); ++b)
      if (std::abs(spec.points[a].lambda - spec.points[b].lambda) < 1e-4)
        throw CliError{kExitRoundtrip,
                       "spectral points nearly coincident; zeros would merge"};
  check_overwrite(cfg);
  PotentialSlice slice;
  try {
    slice = slice_for_spec(spec, cfg.grid.t0, slice_halfwidth(spec), 0.02);
  } catch (const DecayViolation& e) {
    throw CliError{kExitScatter, e.what()};
  }
  double re0 = 1e30, re1 = -1e30, im1 = 0.0, im_min = 1e30;
  for (const auto& p : spec.points) {
    re0 = std::min(re0, p.lambda.real());
    re1 = std::max(re1, p.lambda.real());
    im1 = std::max(im1, p.lambda.imag());
    im_min = std::min(im_min, p.lambda.imag());
  }
  ZeroSearchResult zr;
  try {
    zr = s11_zeros(slice, re0 - 0.4, re1 + 0.4, std::max(0.02, 0.45 * im_min),
                   im1 + 0.4);
  } catch (const ContourThroughZero& e) {
    throw CliError{kExitRoundtrip, e.what()};
  }
  json report;
  report["zeros"] = zeros_json(zr)["zeros"];
  report["winding"] = zr.winding;
  report["spec_lambdas"] = json::array();
  for (const auto& p : spec.points)
    report["spec_lambdas"].push_back(cplx_to_json(p.lambda));
  if (zr.zeros.size() != spec.points.size()) {
    report["error"] = "zero count mismatch";
    write_or_io_error(cfg.output_path, report.dump(2) + "\n");
    return kExitRoundtrip;
  }
  double max_err = 0.0;
  for (const auto& p : spec.points) {
    double best = 1e30;
    for (const auto& z : zr.zeros) best = std::min(best, std::abs(z - p.lambda));
    max_err = std::max(max_err, best);
  }
  report["max_err"] = max_err;
  const bool pass = max_err <= 1e-3;
  report["pass"] = pass;
  write_or_io_error(cfg.output_path, report.dump(2) + "\n");
  return pass ? 0 : kExitRoundtrip;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-soliton dressing and direct-scattering toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string grid_str, sweep_str;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", cfg.spec_path, "spec JSON path")->required();
    sub->add_option("--out", cfg.output_path, "output path")->required();
    sub->add_option("--format", cfg.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--grid", grid_str, "x0:x1:nx,t0:t1:nt");
    sub->add_option("--sweep", sweep_str, "lmin:lmax:count");
    sub->add_option("--levels", cfg.levels, "refinement levels");
    sub->add_option("--perturb", cfg.perturb, "relative noise amplitude");
    sub->add_flag("--force", cfg.force, "allow overwriting outputs");
  };
  CLI::App* gen = app.add_subcommand("generate", "evaluate a soliton grid");
  CLI::App* ver = app.add_subcommand("verify", "residual convergence study");
  CLI::App* sca = app.add_subcommand("scatter", "real-axis scattering sweep");
  CLI::App* rtr = app.add_subcommand("roundtrip", "recover spectrum from s11 zeros");
  for (CLI::App* sub : {gen, ver, sca, rtr}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitSpec;
  }

  try {
    if (!grid_str.empty()) {
      cfg.grid = parse_grid_string(grid_str);
      cfg.grid_set = true;
    }
    if (!sweep_str.empty()) parse_sweep_string(sweep_str, cfg);
    if (gen->parsed()) return cmd_generate(cfg);
    if (ver->parsed()) return cmd_verify(cfg);
    if (sca->parsed()) return cmd_scatter(cfg);
    return cmd_roundtrip(cfg);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const SpecError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSpec;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
