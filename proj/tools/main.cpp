// Experiment driver: reads JSON experiment configs, dispatches samplers and
// kernel builders through the shared C API, and writes CSV/JSON artifacts.
#include <atomic>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "chainlab.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct BodyDel {
  void operator()(chainlab_body* p) const { chainlab_body_free(p); }
};
struct DensityDel {
  void operator()(chainlab_density* p) const { chainlab_density_free(p); }
};
struct ChainDel {
  void operator()(chainlab_chain* p) const { chainlab_chain_free(p); }
};
struct SpaceDel {
  void operator()(chainlab_space* p) const { chainlab_space_free(p); }
};
struct MatrixDel {
  void operator()(chainlab_matrix* p) const { chainlab_matrix_free(p); }
};
struct FactDel {
  void operator()(chainlab_factorization* p) const { chainlab_factorization_free(p); }
};
using BodyPtr = std::unique_ptr<chainlab_body, BodyDel>;
using DensityPtr = std::unique_ptr<chainlab_density, DensityDel>;
using ChainPtr = std::unique_ptr<chainlab_chain, ChainDel>;
using SpacePtr = std::unique_ptr<chainlab_space, SpaceDel>;
using MatrixPtr = std::unique_ptr<chainlab_matrix, MatrixDel>;
using FactPtr = std::unique_ptr<chainlab_factorization, FactDel>;

void check(chainlab_status status, const std::string& where) {
  if (status != CHAINLAB_OK)
    throw std::runtime_error(where + ": " + chainlab_last_error());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Scenario {
  fs::path config_path;
  fs::path out_dir;
  json cfg;
  std::string hash;
  std::uint64_t seed = 0;
};

[[noreturn]] void cfg_error(const Scenario& s, const std::string& msg) {
  throw std::runtime_error(s.config_path.string() + ": " + msg);
}

const json& need(const Scenario& s, const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) cfg_error(s, std::string("missing required field '") + key + "'");
  return *it;
}

std::vector<double> as_doubles(const Scenario& s, const json& arr, const char* what) {
  if (!arr.is_array() || arr.empty()) cfg_error(s, std::string(what) + " must be a non-empty array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) cfg_error(s, std::string(what) + " must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

Scenario load_scenario(const fs::path& config_path, const fs::path& out_root) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + config_path.string());
  std::ostringstream raw;
  raw << in.rdbuf();

  Scenario s;
  s.config_path = config_path;
  s.hash = fnv1a_hex(raw.str());
  try {
    s.cfg = json::parse(raw.str());
  } catch (const json::parse_error& e) {
    throw std::runtime_error(config_path.string() + ": " + e.what());
  }
  if (!s.cfg.is_object()) throw std::runtime_error(config_path.string() + ": config must be a JSON object");
  const json& seed = need(s, s.cfg, "seed");
  if (!seed.is_number_integer()) cfg_error(s, "seed must be an integer");
  s.seed = seed.get<std::uint64_t>();
  s.out_dir = out_root / config_path.stem();
  return s;
}

BodyPtr build_body(const Scenario& s, int& dim_out) {
  const json& body = need(s, s.cfg, "body");
  const std::string type = need(s, body, "type").get<std::string>();
  chainlab_body* raw = nullptr;
  if (type == "box") {
    const auto lower = as_doubles(s, need(s, body, "lower"), "body.lower");
    const auto upper = as_doubles(s, need(s, body, "upper"), "body.upper");
    if (lower.size() != upper.size()) cfg_error(s, "body.lower and body.upper differ in length");
    check(chainlab_body_box(static_cast<int>(lower.size()), lower.data(), upper.data(), &raw),
          "body");
  } else if (type == "ball") {
    const auto center = as_doubles(s, need(s, body, "center"), "body.center");
    const double radius = need(s, body, "radius").get<double>();
    check(chainlab_body_ball(static_cast<int>(center.size()), center.data(), radius, &raw),
          "body");
  } else if (type == "polytope") {
    const json& A = need(s, body, "A");
    if (!A.is_array() || A.empty()) cfg_error(s, "body.A must be a non-empty array of rows");
    const int m = static_cast<int>(A.size());
    const auto first = as_doubles(s, A[0], "body.A row");
    const int d = static_cast<int>(first.size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m) * d);
    for (const auto& row : A) {
      const auto r = as_doubles(s, row, "body.A row");
      if (static_cast<int>(r.size()) != d) cfg_error(s, "body.A rows differ in length");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    const auto b = as_doubles(s, need(s, body, "b"), "body.b");
    if (static_cast<int>(b.size()) != m) cfg_error(s, "body.b length must match body.A rows");
    const auto witness = as_doubles(s, need(s, body, "witness"), "body.witness");
    if (static_cast<int>(witness.size()) != d) cfg_error(s, "body.witness has the wrong length");
    check(chainlab_body_polytope(m, d, flat.data(), b.data(), witness.data(), &raw), "body");
  } else {
    cfg_error(s, "unknown body.type: " + type);
  }
  check(chainlab_body_dim(raw, &dim_out), "body");
  return BodyPtr(raw);
}

DensityPtr build_density(const Scenario& s, int dim) {
  const json& density = need(s, s.cfg, "density");
  const std::string type = need(s, density, "type").get<std::string>();
  chainlab_density* raw = nullptr;
  if (type == "uniform") {
    check(chainlab_density_uniform(&raw), "density");
  } else if (type == "gaussian") {
    check(chainlab_density_gaussian(need(s, density, "sigma").get<double>(), &raw), "density");
  } else if (type == "exponential") {
    const auto rates = as_doubles(s, need(s, density, "rate"), "density.rate");
    if (static_cast<int>(rates.size()) != dim)
      cfg_error(s, "density.rate length must match the body dimension");
    check(chainlab_density_exponential(dim, rates.data(), &raw), "density");
  } else {
    cfg_error(s, "unknown density.type: " + type);
  }
  return DensityPtr(raw);
}

struct SamplerChoice {
  std::string full;   // as configured
  std::string base;   // without the lazy: prefix
  bool lazy = false;
};

SamplerChoice parse_sampler(const Scenario& s) {
  SamplerChoice choice;
  choice.full = need(s, s.cfg, "sampler").get<std::string>();
  choice.base = choice.full;
  if (choice.base.rfind("lazy:", 0) == 0) {
    choice.lazy = true;
    choice.base = choice.base.substr(5);
  }
  if (choice.base != "hit-and-run" && choice.base != "gibbs" && choice.base != "slice" &&
      choice.base != "metropolis")
    cfg_error(s, "unknown sampler: " + choice.full);
  if (s.cfg.contains("proposal") && choice.base != "metropolis")
    cfg_error(s, "proposal configured for a sampler that takes none");
  return choice;
}

// Lattice steps for the named direction family: coordinate axes, optionally
// joined by the diagonals (all sign patterns, first component positive).
std::vector<std::vector<int>> named_directions(const Scenario& s, int d) {
  std::vector<std::vector<int>> dirs;
  for (int a = 0; a < d; ++a) {
    std::vector<int> e(d, 0);
    e[a] = 1;
    dirs.push_back(std::move(e));
  }
  std::string name = "axes";
  if (s.cfg.contains("direction_set")) name = s.cfg["direction_set"].get<std::string>();
  if (name == "axes") return dirs;
  if (name != "axes-diagonals") cfg_error(s, "unknown direction_set: " + name);
  if (d == 1) return dirs;  // the only diagonal is the axis itself
  for (int pattern = 0; pattern < (1 << (d - 1)); ++pattern) {
    std::vector<int> v(d, 1);
    for (int t = 1; t < d; ++t)
      if (pattern & (1 << (t - 1))) v[t] = -1;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

SpacePtr build_space(const Scenario& s, int& n_out) {
  chainlab_space* raw = nullptr;
  if (s.cfg.contains("space")) {
    const json& sp = s.cfg["space"];
    const auto volume = as_doubles(s, need(s, sp, "volume"), "space.volume");
    const auto rho = as_doubles(s, need(s, sp, "rho"), "space.rho");
    if (volume.size() != rho.size()) cfg_error(s, "space.volume and space.rho differ in length");
    check(chainlab_space_make(static_cast<int>(volume.size()), volume.data(), rho.data(), &raw),
          "space");
  } else {
    int dim = 0;
    BodyPtr body = build_body(s, dim);
    DensityPtr density = build_density(s, dim);
    const json& res = need(s, s.cfg, "grid_resolution");
    if (!res.is_array() || static_cast<int>(res.size()) != dim)
      cfg_error(s, "grid_resolution must list one cell count per axis");
    std::vector<int> resolution;
    for (const auto& v : res) resolution.push_back(v.get<int>());
    check(chainlab_space_grid(body.get(), density.get(), resolution.data(), &raw), "grid");
  }
  check(chainlab_space_n(raw, &n_out), "space");
  return SpacePtr(raw);
}

MatrixPtr build_proposal(const Scenario& s, const SpacePtr& space, int n,
                         std::string& label_out) {
  chainlab_matrix* raw = nullptr;
  std::string type = "independent-uniform";
  json prop;
  if (s.cfg.contains("proposal")) {
    prop = s.cfg["proposal"];
    type = need(s, prop, "type").get<std::string>();
  }
  label_out = type;
  if (type == "independent-uniform") {
    check(chainlab_proposal_independent_uniform(space.get(), &raw), "proposal");
  } else if (type == "ball-walk") {
    const int radius = prop.contains("radius") ? prop["radius"].get<int>() : 1;
    check(chainlab_proposal_ball_walk(space.get(), radius, &raw), "proposal");
  } else if (type == "swap") {
    check(chainlab_proposal_swap(space.get(), &raw), "proposal");
  } else if (type == "custom-matrix") {
    const json& entries = need(s, prop, "entries");
    if (!entries.is_array() || static_cast<int>(entries.size()) != n)
      cfg_error(s, "proposal.entries must be an n-by-n array");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& row : entries) {
      const auto r = as_doubles(s, row, "proposal.entries row");
      if (static_cast<int>(r.size()) != n) cfg_error(s, "proposal.entries rows must have length n");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    check(chainlab_proposal_from_entries(space.get(), flat.data(), &raw), "proposal");
  } else {
    cfg_error(s, "unknown proposal.type: " + type);
  }
  return MatrixPtr(raw);
}

// Builds the configured sampler's kernel; fact_out (optional) receives the
// factorization for samplers that have one.
MatrixPtr build_kernel(const Scenario& s, const SamplerChoice& sampler, const SpacePtr& space,
                       int n, FactPtr* fact_out, std::string& label_out) {
  chainlab_matrix* raw = nullptr;
  chainlab_factorization* fact = nullptr;
  label_out = sampler.base;
  if (sampler.base == "gibbs") {
    check(chainlab_matrix_gibbs(space.get(), &raw, fact_out ? &fact : nullptr), "kernel");
  } else if (sampler.base == "hit-and-run") {
    int dim_raw = 0;
    {
      // direction sets are grid-dimensional; infer d from config geometry
      const json& res = need(s, s.cfg, "grid_resolution");
      dim_raw = static_cast<int>(res.size());
    }
    const auto dirs = named_directions(s, dim_raw);
    std::vector<int> flat;
    for (const auto& v : dirs) flat.insert(flat.end(), v.begin(), v.end());
    check(chainlab_matrix_hit_and_run(space.get(), flat.data(), static_cast<int>(dirs.size()),
                                      &raw, fact_out ? &fact : nullptr),
          "kernel");
    label_out += "[" + std::to_string(dirs.size()) + " directions]";
  } else if (sampler.base == "slice") {
    check(chainlab_matrix_slice(space.get(), &raw), "kernel");
  } else {  // metropolis
    std::string prop_label;
    MatrixPtr proposal = build_proposal(s, space, n, prop_label);
    check(chainlab_matrix_metropolis(space.get(), proposal.get(), &raw), "kernel");
    label_out += "[" + prop_label + "]";
  }
  MatrixPtr P(raw);
  if (fact_out) fact_out->reset(fact);
  if (sampler.lazy) {
    chainlab_matrix* lazy = nullptr;
    check(chainlab_matrix_lazy(P.get(), &lazy), "kernel");
    P.reset(lazy);
    label_out = "lazy:" + label_out;
    if (fact_out) fact_out->reset();  // the factorization describes the non-lazy kernel
  }
  return P;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void emit_matrix_files(const Scenario& s, const MatrixPtr& P, int n) {
  std::vector<double> entries(static_cast<std::size_t>(n) * n);
  std::vector<double> weights(n);
  check(chainlab_matrix_entries(P.get(), entries.data()), "matrix export");
  check(chainlab_matrix_weights(P.get(), weights.data()), "matrix export");

  std::ostringstream csv;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) csv << ',';
      csv << fmt17(entries[static_cast<std::size_t>(i) * n + j]);
    }
    csv << '\n';
  }
  write_text(s.out_dir / "matrix.csv", csv.str());

  json bundle;
  bundle["pi"] = weights;
  json rows = json::array();
  for (int i = 0; i < n; ++i)
    rows.push_back(std::vector<double>(entries.begin() + static_cast<std::size_t>(i) * n,
                                       entries.begin() + static_cast<std::size_t>(i + 1) * n));
  bundle["P"] = rows;
  write_json(s.out_dir / "matrix.json", bundle);
}

int cmd_sample(const Scenario& s) {
  const SamplerChoice sampler = parse_sampler(s);
  int dim = 0;
  BodyPtr body = build_body(s, dim);
  DensityPtr density = build_density(s, dim);

  const json& steps_field = need(s, s.cfg, "steps");
  if (!steps_field.is_number_integer() || steps_field.get<std::int64_t>() < 0)
    cfg_error(s, "steps must be a non-negative integer");
  const std::int64_t steps = steps_field.get<std::int64_t>();

  std::string proposal_name;
  double proposal_radius = 0.0;
  const char* proposal_arg = nullptr;
  if (sampler.base == "metropolis") {
    proposal_name = "independent-uniform";
    if (s.cfg.contains("proposal")) {
      const json& prop = s.cfg["proposal"];
      proposal_name = need(s, prop, "type").get<std::string>();
      if (proposal_name == "ball-walk")
        proposal_radius = need(s, prop, "radius").get<double>();
      else if (proposal_name != "independent-uniform")
        cfg_error(s, "continuous sampling supports independent-uniform and ball-walk proposals");
    }
    proposal_arg = proposal_name.c_str();
  }

  std::vector<double> initial;
  if (s.cfg.contains("initial")) {
    initial = as_doubles(s, s.cfg["initial"], "initial");
    if (static_cast<int>(initial.size()) != dim) cfg_error(s, "initial has the wrong length");
  }

  chainlab_chain* raw = nullptr;
  check(chainlab_chain_new(body.get(), density.get(), sampler.full.c_str(), proposal_arg,
                           proposal_radius, s.seed, initial.empty() ? nullptr : initial.data(),
                           &raw),
        "chain");
  ChainPtr chain(raw);

  std::vector<double> start(dim);
  check(chainlab_chain_position(chain.get(), start.data()), "chain");
  std::vector<double> traj(static_cast<std::size_t>(steps) * dim);
  check(chainlab_chain_run(chain.get(), steps, traj.data()), "chain");

  std::ostringstream csv;
  csv << "step";
  for (int t = 0; t < dim; ++t) csv << ",x" << (t + 1);
  csv << '\n';
  csv << 0;
  for (int t = 0; t < dim; ++t) csv << ',' << fmt17(start[t]);
  csv << '\n';
  for (std::int64_t i = 0; i < steps; ++i) {
    csv << (i + 1);
    for (int t = 0; t < dim; ++t) csv << ',' << fmt17(traj[i * dim + t]);
    csv << '\n';
  }
  write_text(s.out_dir / "trajectory.csv", csv.str());

  // summary statistics over the whole trajectory
  std::vector<double> mean(dim, 0.0);
  std::int64_t moves = 0;
  const double* prev = start.data();
  for (std::int64_t i = 0; i < steps; ++i) {
    const double* row = traj.data() + i * dim;
    bool moved = false;
    for (int t = 0; t < dim; ++t) {
      mean[t] += row[t];
      if (row[t] != prev[t]) moved = true;
    }
    if (moved) ++moves;
    prev = row;
  }
  for (int t = 0; t < dim; ++t) mean[t] = steps > 0 ? mean[t] / double(steps) : start[t];

  json summary;
  summary["config_hash"] = s.hash;
  summary["seed"] = s.seed;
  summary["sampler"] = sampler.full;
  summary["steps"] = steps;
  summary["dim"] = dim;
  summary["means"] = mean;
  if (steps > 0) {
    const double move_rate = double(moves) / double(steps);
    summary["move_rate"] = move_rate;
    // continuous kernels revisit a point with probability zero, so position
    // repeats identify rejections (metropolis) and holds (lazy)
    if (sampler.base == "metropolis" && !sampler.lazy) summary["acceptance_rate"] = move_rate;
    if (sampler.lazy) summary["hold_rate"] = 1.0 - move_rate;
    if (steps >= 16) {
      std::vector<double> first(static_cast<std::size_t>(steps));
      for (std::int64_t i = 0; i < steps; ++i) first[i] = traj[i * dim];
      double ess = 0.0;
      if (chainlab_effective_sample_size(first.data(), steps, &ess) == CHAINLAB_OK)
        summary["ess_x1"] = ess;
    }
  }
  write_json(s.out_dir / "summary.json", summary);
  std::printf("sample: wrote %s (%lld steps, dim %d)\n",
              (s.out_dir / "trajectory.csv").string().c_str(),
              static_cast<long long>(steps), dim);
  return 0;
}

int cmd_spectrum(const Scenario& s, bool emit_matrix) {
  const SamplerChoice sampler = parse_sampler(s);
  int n = 0;
  SpacePtr space = build_space(s, n);
  std::string label;
  MatrixPtr P = build_kernel(s, sampler, space, n, nullptr, label);

  double tol = 1e-10;
  if (s.cfg.contains("spectral_tolerance")) tol = s.cfg["spectral_tolerance"].get<double>();

  std::vector<double> eigenvalues(n);
  double lambda_min = 0.0, beta = 0.0, gap = 0.0;
  int positive = 0;
  check(chainlab_spectral_report(P.get(), tol, eigenvalues.data(), &lambda_min, &beta, &gap,
                                 &positive),
        "spectrum");

  json report;
  report["matrix_id"] = label + "-n" + std::to_string(n) + "-" + s.hash.substr(0, 8);
  report["config_hash"] = s.hash;
  report["seed"] = s.seed;
  report["sampler"] = sampler.full;
  report["n"] = n;
  report["eigenvalues"] = eigenvalues;
  report["lambda_min"] = lambda_min;
  report["beta"] = beta;
  report["gap"] = gap;
  report["positive"] = positive != 0;
  report["tolerance"] = tol;
  if (sampler.base == "hit-and-run")
    report["note"] =
        "chord directions restricted to a finite lattice set rather than the whole sphere";
  write_json(s.out_dir / "report.json", report);
  if (emit_matrix) emit_matrix_files(s, P, n);

  std::printf("spectrum: %s lambda_min=%.3e beta=%.6f gap=%.6f positive=%s\n", label.c_str(),
              lambda_min, beta, gap, positive ? "true" : "false");
  return 0;
}

int cmd_verify(const Scenario& s, bool perturb) {
  const SamplerChoice sampler = parse_sampler(s);
  int n = 0;
  SpacePtr space = build_space(s, n);

  double tol = 1e-12;
  if (s.cfg.contains("tolerance")) tol = s.cfg["tolerance"].get<double>();

  FactPtr fact;
  std::string label;
  MatrixPtr P = build_kernel(s, sampler, space, n, &fact, label);

  if (perturb && n >= 2) {
    // detector sanity: damage one entry and let the checks expose it
    std::vector<double> entries(static_cast<std::size_t>(n) * n);
    std::vector<double> weights(n);
    check(chainlab_matrix_entries(P.get(), entries.data()), "perturb");
    check(chainlab_matrix_weights(P.get(), weights.data()), "perturb");
    entries[1] += 1e-3;
    chainlab_matrix* raw = nullptr;
    check(chainlab_matrix_wrap(n, entries.data(), weights.data(), &raw), "perturb");
    P.reset(raw);
  }

  json checks = json::array();
  bool all_pass = true;
  auto add_check = [&](const std::string& name, double residual, double tolerance) {
    const bool pass = residual <= tolerance;
    all_pass = all_pass && pass;
    json c;
    c["name"] = name;
    c["residual"] = residual;
    c["tolerance"] = tolerance;
    c["pass"] = pass;
    checks.push_back(c);
    std::printf("  [%s] %-28s residual=%.3e tol=%.1e\n", pass ? "PASS" : "FAIL", name.c_str(),
                residual, tolerance);
  };

  double residual = 0.0;
  check(chainlab_matrix_row_sum_error(P.get(), &residual), "verify");
  add_check("row_stochastic", residual, tol);
  check(chainlab_matrix_detailed_balance(P.get(), &residual), "verify");
  add_check("detailed_balance", residual, tol);
  check(chainlab_matrix_stationarity_error(P.get(), &residual), "verify");
  add_check("stationarity", residual, tol);

  if (fact) {
    double residuals[4] = {0, 0, 0, 0};
    check(chainlab_verify_factorization(P.get(), fact.get(), 100, residuals), "verify");
    add_check("factorization_reconstruction", residuals[0], tol);
    add_check("factorization_idempotency", residuals[1], tol);
    add_check("factorization_self_adjoint", residuals[2], tol);
    add_check("factorization_adjoint_identity", residuals[3], tol);
  }

  if (sampler.base == "slice") {
    check(chainlab_level_check(space.get(), nullptr, 100, s.seed, &residual), "verify");
    add_check("level_decomposition", residual, tol);
  }

  if (sampler.base == "metropolis") {
    std::string prop_label;
    MatrixPtr proposal = build_proposal(s, space, n, prop_label);
    chainlab_matrix* raw = nullptr;
    check(chainlab_matrix_metropolis_via_slice(space.get(), proposal.get(), &raw), "verify");
    MatrixPtr via_slice(raw);
    std::vector<double> a(static_cast<std::size_t>(n) * n), b(a.size());
    check(chainlab_matrix_entries(P.get(), a.data()), "verify");
    check(chainlab_matrix_entries(via_slice.get(), b.data()), "verify");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      worst = std::max(worst, std::abs(a[k] - b[k]));
    add_check("slice_metropolis_agreement", worst, tol);
    check(chainlab_level_check(space.get(), proposal.get(), 100, s.seed, &residual), "verify");
    add_check("level_decomposition_proposal", residual, tol);
  }

  json doc;
  doc["config_hash"] = s.hash;
  doc["seed"] = s.seed;
  doc["sampler"] = sampler.full;
  doc["n"] = n;
  doc["perturbed"] = perturb;
  doc["checks"] = checks;
  doc["pass"] = all_pass;
  write_json(s.out_dir / "verify.json", doc);
  std::printf("verify: %s -> %s\n", label.c_str(), all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

struct Options {
  std::vector<std::string> configs;
  std::string out_dir = ".";
  int jobs = 1;
  bool emit_matrix = false;
  bool perturb = false;
};

int run_all(const Options& opts, const std::string& command) {
  std::atomic<int> next{0};
  std::atomic<int> failures{0};
  const int workers =
      std::max(1, std::min<int>(opts.jobs, static_cast<int>(opts.configs.size())));

  auto worker = [&] {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= static_cast<int>(opts.configs.size())) return;
      try {
        Scenario s = load_scenario(opts.configs[idx], opts.out_dir);
        fs::create_directories(s.out_dir);
        int rc = 0;
        if (command == "sample")
          rc = cmd_sample(s);
        else if (command == "spectrum")
          rc = cmd_spectrum(s, opts.emit_matrix);
        else
          rc = cmd_verify(s, opts.perturb);
        if (rc != 0) failures.fetch_add(1);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        failures.fetch_add(1);
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return failures.load() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-chain samplers over convex bodies with exact kernel verification"};
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.configs, "experiment config JSON (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output root directory");
    sub->add_option("--jobs", opts.jobs, "scenario files processed in parallel")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* sample = app.add_subcommand("sample", "run a sampler and write its trajectory");
  add_common(sample);
  CLI::App* spectrum =
      app.add_subcommand("spectrum", "build a kernel and report its spectrum");
  add_common(spectrum);
  spectrum->add_flag("--emit-matrix", opts.emit_matrix, "also write matrix.csv/matrix.json");
  CLI::App* verify = app.add_subcommand("verify", "run structural checks on a kernel");
  add_common(verify);
  verify->add_flag("--perturb", opts.perturb, "damage one matrix entry first (detector sanity)");

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  return run_all(opts, command);
}
