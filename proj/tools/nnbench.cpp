// nnbench: generate test matrices, run the iterative inversion family on
// Matrix Market inputs, sweep method grids into CSV, and print cost tables.
//
// Exit codes: 0 success / tolerance reached, 2 nest budget exhausted,
// 1 input or validation failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "nn/cost_model.hpp"
#include "nn/errors.hpp"
#include "nn/factorized.hpp"
#include "nn/kernels.hpp"
#include "nn/matrix_market.hpp"
#include "nn/normalization.hpp"
#include "nn/solver.hpp"

namespace {

using namespace nn;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ThetaSpec {
  ThetaKind kind = ThetaKind::TraceTheta1;
  std::size_t k = 2;
};

ThetaSpec parse_theta(const std::string& s) {
  if (s == "trace") return {ThetaKind::TraceTheta1, 0};
  if (s.rfind("power:", 0) == 0) {
    const long k = std::strtol(s.c_str() + 6, nullptr, 10);
    if (k < 1) throw DomainError("--theta power:k requires k >= 1");
    return {ThetaKind::PowerTheta2, static_cast<std::size_t>(k)};
  }
  throw DomainError("--theta must be 'trace' or 'power:k'");
}

Normalization build_normalization(const DenseMatrix& w, const ThetaSpec& spec,
                                  std::uint64_t seed) {
  if (spec.kind == ThetaKind::TraceTheta1) return theta_trace(w);
  const Normalization power = theta_power(w, spec.k, seed);
  if (power.valid) return power;
  std::cerr << "note: power normalization not contractive (measured "
            << power.contraction_norm << "), falling back to trace\n";
  return theta_trace(w);
}

double inverse_quality(const DenseMatrix& w, const DenseMatrix& inverse) {
  const DenseMatrix residual = identity_minus(matmul(inverse, w));
  return frobenius_norm(residual) / std::sqrt(static_cast<double>(w.rows()));
}

BigInt next_factorized_order(const BigInt& at_least) {
  BigInt g1(2);
  while (g1 - 1 < at_least) g1 <<= 1;
  return g1 - 1;
}

// ---------------------------------------------------------------------------
// gen-matrix

struct GenArgs {
  std::size_t n = 16;
  double cond = 1e2;
  std::uint64_t seed = 1;
  std::string out;
  std::string kind = "spd";
  double density = 0.05;
};

int run_gen(const GenArgs& a) {
  if (a.kind == "spd") {
    mm::write_dense_file(a.out, random_spd(a.n, a.cond, a.seed));
  } else if (a.kind == "complex") {
    mm::write_dense_file(a.out, random_conditioned_complex(a.n, a.cond, a.seed));
  } else if (a.kind == "sparse-spd") {
    mm::write_sparse_file(a.out, random_sparse_spd(a.n, a.density, a.seed));
  } else {
    throw DomainError("--kind must be spd, complex or sparse-spd");
  }
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// invert

struct InvertArgs {
  std::string input;
  std::string method = "nn";
  std::size_t depth = 2;
  std::size_t nests = 0;  // 0: from kappa when known, else 64
  long long order = -1;
  double tol = 1e-10;
  std::string theta = "trace";
  std::uint64_t seed = 1;
  std::string out;
  std::string report;
  bool estimate_kappa = false;
};

int run_invert(const InvertArgs& a) {
  const DenseMatrix w = mm::read_dense_file(a.input);
  if (!w.square()) throw ShapeError("invert: input matrix must be square");

  const ThetaSpec theta_spec = parse_theta(a.theta);
  const Normalization norm = build_normalization(w, theta_spec, a.seed);

  std::optional<double> kappa;
  if (a.estimate_kappa) {
    if (w.rows() > 128)
      throw DomainError("--estimate-kappa is limited to N <= 128");
    const double wnorm = spectral_norm_estimate(w).value;
    const double winvnorm = spectral_norm_estimate(direct_inverse_oracle(w)).value;
    kappa = wnorm * winvnorm;
  }

  SolverConfig config;
  config.depth_L = a.depth;
  config.tol = a.tol;
  config.max_nests = a.nests > 0 ? a.nests
                     : kappa     ? estimate_nests(*kappa, std::max<std::size_t>(a.depth, 1))
                                 : 64;

  OpCounter counter;
  DenseMatrix inverse;
  ConvergenceReport report;
  report.config = config;

  if (a.method == "nn" || a.method == "newton" || a.method == "chebyshev") {
    if (a.method == "newton") config.depth_L = 1;
    if (a.method == "chebyshev") config.depth_L = 2;
    std::tie(inverse, report) = nn_invert(w, norm, config, &counter);
  } else {
    const DenseMatrix w_tilde = normalize(w, norm);
    const DenseMatrix id = DenseMatrix::identity(w.rows());
    DenseMatrix phi;
    if (a.method == "ns") {
      if (a.order < 0) throw DomainError("--order is required for --method ns");
      phi = ns_sum(id, w_tilde, static_cast<std::size_t>(a.order), &counter);
    } else if (a.method == "nn-explicit") {
      const std::size_t nests = a.nests > 0 ? a.nests : config.max_nests;
      phi = nn_explicit(id, w_tilde, nests, config.depth_L, &counter);
    } else if (a.method == "factorized-ns") {
      if (a.order < 0)
        throw DomainError("--order is required for --method factorized-ns");
      const auto plan =
          FactorizedPlan::for_order(BigInt(a.order), FactorizedMode::DenseStored);
      phi = ns_factorized(id, w_tilde, plan, &counter);
    } else if (a.method == "cns") {
      CnsConfig cns;
      cns.ci_steps = a.nests > 0 ? a.nests : 1;
      cns.ns_terms = a.order >= 1 ? static_cast<std::size_t>(a.order) : 1;
      phi = cns_invert(w_tilde, cns, &counter);
    } else {
      throw DomainError("unknown --method '" + a.method + "'");
    }
    const double eps = residual_epsilon(phi, w_tilde);
    inverse = scale(phi, Scalar{norm.theta, 0.0}, &counter);
    report.history.emplace_back(0, eps);
    report.stopped_reason =
        eps < a.tol ? StopReason::Tolerance : StopReason::MaxNests;
    report.n3_multiplies = counter.n3_multiplies();
    report.n2_ops = counter.n2_ops();
  }
  report.kappa_used = kappa;

  if (!a.out.empty()) mm::write_dense_file(a.out, inverse);
  if (!a.report.empty()) mm::write_file_atomic(a.report, report_to_json(report));

  const double final_eps =
      report.history.empty() ? inverse_quality(w, inverse) : report.history.back().second;
  std::cout << "method=" << a.method << " N=" << w.rows()
            << " eps=" << fmt_double(final_eps)
            << " n3=" << fmt_double(counter.n3_multiplies())
            << " stopped=" << stop_reason_name(report.stopped_reason) << "\n";
  return report.stopped_reason == StopReason::Tolerance ? 0 : 2;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string method = "nn";
  std::size_t depth = 2;
  std::size_t nests = 0;
  long long order = 15;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::string out;
  std::string report;
};

int run_solve(const SolveArgs& a) {
  const DenseMatrix b = mm::read_dense_file(a.rhs);

  if (a.method == "sparse-factorized") {
    const SparseMatrixCsr w = mm::read_sparse_file(a.matrix);
    const Normalization norm = theta_trace(w);
    OpCounter counter;
    const DenseMatrix x =
        solve_sparse_factorized({w, b, false}, BigInt(a.order), norm, &counter);

    const DenseMatrix wx = spmv_block(w, x);
    const double backward = frobenius_norm(sub(wx, b)) /
                            std::max(frobenius_norm(b), 1e-300);
    if (!a.out.empty()) mm::write_dense_file(a.out, x);
    if (!a.report.empty()) {
      nlohmann::json j;
      j["method"] = "sparse-factorized";
      j["gamma"] = a.order;
      j["backward_error"] = backward;
      j["counts"] = {{"spmv_count", counter.spmv_count()},
                     {"n2_ops", counter.n2_ops()}};
      mm::write_file_atomic(a.report, j.dump(2));
    }
    std::cout << "method=sparse-factorized backward=" << fmt_double(backward)
              << " spmv=" << counter.spmv_count() << "\n";
    return backward <= a.tol ? 0 : 2;
  }

  if (a.method != "nn") throw DomainError("solve supports --method nn or sparse-factorized");

  const DenseMatrix mat = mm::read_dense_file(a.matrix);
  SolverConfig config;
  config.depth_L = a.depth;
  config.tol = a.tol;
  config.max_nests = a.nests > 0 ? a.nests : 64;

  OpCounter counter;
  try {
    const auto result = solve_normal_equations({mat, b, false}, config, &counter);
    if (!a.out.empty()) mm::write_dense_file(a.out, result.x);
    if (!a.report.empty())
      mm::write_file_atomic(a.report, report_to_json(result.report));
    std::cout << "method=nn backward=" << fmt_double(result.backward_error)
              << " nests=" << result.report.history.back().first << "\n";
    return 0;
  } catch (const NonConvergenceError& e) {
    if (!a.report.empty())
      mm::write_file_atomic(a.report, report_to_json(e.report));
    std::cerr << "solve: " << e.what() << "\n";
    return 2;
  }
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::vector<std::string> methods;
  std::vector<std::size_t> sizes{16};
  std::vector<double> conds{1e2};
  std::vector<std::size_t> depths{2};
  std::size_t nests = 0;  // 0: estimate_nests(cond, L)
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::string out;
};

struct BenchRow {
  std::string text;
  bool failed = false;
};

BenchRow bench_one(const std::string& method, std::size_t n, double cond,
                   std::size_t depth, std::size_t nests_opt, double tol,
                   std::uint64_t seed) {
  std::ostringstream row;
  row << method << "," << n << "," << fmt_double(cond) << ",";
  try {
    const DenseMatrix w = random_spd(n, cond, seed);
    const Normalization norm = theta_trace(w);
    const DenseMatrix w_tilde = normalize(w, norm);
    const DenseMatrix id = DenseMatrix::identity(n);

    std::size_t depth_eff = depth;
    if (method == "newton") depth_eff = 1;
    if (method == "chebyshev") depth_eff = 2;
    const std::size_t nests = nests_opt > 0 ? nests_opt : estimate_nests(cond, depth_eff);

    OpCounter counter;
    DenseMatrix inverse;
    std::optional<double> alpha;
    std::size_t nests_reported = nests;
    BigInt gamma_effective = equivalent_ns_order(nests - 1, depth_eff);
    Rational predicted_n3;

    const auto t0 = std::chrono::steady_clock::now();
    if (method == "nn" || method == "newton" || method == "chebyshev") {
      SolverConfig config;
      config.depth_L = depth_eff;
      config.max_nests = nests;
      config.tol = tol;
      auto [inv, report] = nn_invert(w, norm, config, &counter);
      inverse = std::move(inv);
      alpha = report.alpha_estimate;
      const std::size_t nests_used = report.history.back().first;
      nests_reported = nests_used;
      gamma_effective =
          nests_used > 0 ? equivalent_ns_order(nests_used - 1, depth_eff) : BigInt(0);
      predicted_n3 = cost_nn(nests_used, depth_eff, n).n3_coefficient;
    } else if (method == "ns") {
      // same effective order as the nested run it is compared against
      const BigInt order_big = equivalent_ns_order(nests - 1, depth_eff);
      if (order_big > 100000) throw BudgetError("bench: ns order too large");
      const auto order = static_cast<std::size_t>(order_big);
      const DenseMatrix phi = ns_sum(id, w_tilde, order, &counter);
      inverse = scale(phi, Scalar{norm.theta, 0.0}, &counter);
      gamma_effective = order_big;
      predicted_n3 = Rational(order_big - 1);  // identity start: chain products only
    } else if (method == "factorized-ns") {
      const BigInt order = next_factorized_order(equivalent_ns_order(nests - 1, depth_eff));
      const auto plan = FactorizedPlan::for_order(order, FactorizedMode::DenseStored);
      const DenseMatrix phi = ns_factorized(id, w_tilde, plan, &counter);
      inverse = scale(phi, Scalar{norm.theta, 0.0}, &counter);
      gamma_effective = order;
      predicted_n3 = Rational(2 * BigInt(plan.num_factors) - 1);  // identity start
    } else if (method == "cns") {
      CnsConfig cns;
      cns.ci_steps = 2;
      cns.ns_terms = std::max<std::size_t>(nests, 1);
      const DenseMatrix phi = cns_invert(w_tilde, cns, &counter);
      inverse = scale(phi, Scalar{norm.theta, 0.0}, &counter);
      gamma_effective = BigInt(9) * (cns.ns_terms + 1) - 1;
      predicted_n3 = Rational(0);
    } else if (method == "nn-explicit") {
      const DenseMatrix phi = nn_explicit(id, w_tilde, nests - 1, depth_eff, &counter);
      inverse = scale(phi, Scalar{norm.theta, 0.0}, &counter);
      predicted_n3 = cost_nn_explicit_sparse(nests - 1, depth_eff, n).n3_coefficient;
    } else {
      throw DomainError("unknown bench method '" + method + "'");
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(t1 - t0).count();

    const double eps = inverse_quality(w, inverse);
    row << depth_eff << "," << nests_reported << "," << gamma_effective.str() << ","
        << fmt_double(eps) << "," << fmt_double(counter.n3_multiplies()) << ","
        << counter.n2_ops() << "," << counter.spmv_count() << ","
        << (alpha ? fmt_double(*alpha) : "") << ","
        << predicted_n3.str() << "," << fmt_double(wall) << ",ok";
    return {row.str(), false};
  } catch (const Error& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == ',' || c == '\n') c = ';';
    row << ",,,,,,,,,," << msg;
    return {row.str(), true};
  }
}

int run_bench(const BenchArgs& a) {
  if (a.methods.empty()) throw DomainError("bench: --methods must not be empty");

  struct Point {
    std::string method;
    std::size_t n;
    double cond;
    std::size_t depth;
    std::uint64_t seed;
  };
  std::vector<Point> grid;
  for (const auto& method : a.methods)
    for (std::size_t in = 0; in < a.sizes.size(); ++in)
      for (std::size_t ic = 0; ic < a.conds.size(); ++ic)
        for (const std::size_t depth : a.depths)
          grid.push_back({method, a.sizes[in], a.conds[ic], depth,
                          a.seed + 1000 * in + ic});

  std::vector<BenchRow> rows(grid.size());
  const unsigned workers =
      std::min<unsigned>(worker_count(), static_cast<unsigned>(grid.size()));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> cursor{0};
  for (unsigned t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t k = cursor.fetch_add(1);
        if (k >= grid.size()) break;
        const auto& p = grid[k];
        rows[k] = bench_one(p.method, p.n, p.cond, p.depth, a.nests, a.tol, p.seed);
      }
    });
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "method,N,cond,L,i,gamma_effective,eps_final,n3_multiplies,n2_ops,"
         "spmv_count,alpha_estimate,predicted_n3,wall_seconds,status\n";
  std::size_t failures = 0;
  for (const auto& r : rows) {
    csv << r.text << "\n";
    if (r.failed) ++failures;
  }
  if (a.out.empty())
    std::cout << csv.str();
  else
    mm::write_file_atomic(a.out, csv.str());

  if (failures == rows.size()) {
    std::cerr << "bench: all " << failures << " runs failed\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// analyze-cost

struct CostArgs {
  std::string formula = "nn";
  std::size_t nests = 2;
  std::size_t depth = 2;
  long long gamma = 15;
  std::size_t n = 16;
  bool appendix_variant = false;
  bool json = false;
  std::string out;
};

int run_cost(const CostArgs& a) {
  std::vector<CostEstimate> estimates;
  const auto want = [&](const std::string& f) {
    return a.formula == "all" || a.formula == f;
  };
  if (want("nn"))
    estimates.push_back(cost_nn(a.nests, a.depth, a.n,
                                a.appendix_variant ? NnCostVariant::AppendixRestatement
                                                   : NnCostVariant::MainText));
  if (want("nn-explicit-sparse"))
    estimates.push_back(cost_nn_explicit_sparse(a.nests, a.depth, a.n));
  if (want("factorized")) estimates.push_back(cost_factorized(BigInt(a.gamma), a.n));
  if (want("factorized-sparse-stored"))
    estimates.push_back(cost_factorized_sparse_stored(BigInt(a.gamma), a.n));
  if (estimates.empty())
    throw DomainError("--formula must be nn, nn-explicit-sparse, factorized, "
                      "factorized-sparse-stored or all");

  std::ostringstream body;
  if (a.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : estimates) {
      nlohmann::json j;
      j["formula"] = cost_formula_name(e.formula);
      j["params"] = {{"i", e.params.nests_i},
                     {"L", e.params.depth_L},
                     {"N", e.params.n},
                     {"gamma", e.params.gamma.str()}};
      j["n3_coefficient"] = e.n3_coefficient.str();
      j["n2_coefficient"] = e.n2_coefficient.str();
      j["n3_term"] = e.n3_term.str();
      j["n2_term"] = e.n2_term.str();
      if (!e.note.empty()) j["note"] = e.note;
      arr.push_back(std::move(j));
    }
    body << arr.dump(2) << "\n";
  } else {
    body << "formula,i,L,N,gamma,n3_coefficient,n2_coefficient,n3_term,n2_term\n";
    for (const auto& e : estimates)
      body << cost_formula_name(e.formula) << "," << e.params.nests_i << ","
           << e.params.depth_L << "," << e.params.n << "," << e.params.gamma.str()
           << "," << e.n3_coefficient.str() << "," << e.n2_coefficient.str() << ","
           << e.n3_term.str() << "," << e.n2_term.str() << "\n";
  }
  if (a.out.empty())
    std::cout << body.str();
  else
    mm::write_file_atomic(a.out, body.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative matrix inversion workbench (nested Neumann family)"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-matrix", "Generate a seeded test matrix");
  gen_cmd->add_option("--N", gen.n, "dimension")->required();
  gen_cmd->add_option("--cond", gen.cond, "condition number");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--out", gen.out, "output .mtx path")->required();
  gen_cmd->add_option("--kind", gen.kind, "spd | complex | sparse-spd");
  gen_cmd->add_option("--density", gen.density, "off-diagonal density (sparse-spd)");

  InvertArgs inv;
  auto* inv_cmd = app.add_subcommand("invert", "Invert a Matrix Market matrix");
  inv_cmd->add_option("input", inv.input, "square matrix (.mtx)")->required();
  inv_cmd->add_option("--method", inv.method,
                      "ns | newton | chebyshev | nn | nn-explicit | factorized-ns | cns");
  inv_cmd->add_option("--depth,-L", inv.depth, "inception depth");
  inv_cmd->add_option("--nests,-i", inv.nests, "nest budget (0 = auto)");
  inv_cmd->add_option("--order,--gamma", inv.order, "series order");
  inv_cmd->add_option("--tol", inv.tol, "residual tolerance");
  inv_cmd->add_option("--theta", inv.theta, "trace | power:k");
  inv_cmd->add_option("--seed", inv.seed, "probe seed for power normalization");
  inv_cmd->add_option("--out", inv.out, "inverse output (.mtx)");
  inv_cmd->add_option("--report", inv.report, "convergence report (JSON)");
  inv_cmd->add_flag("--estimate-kappa", inv.estimate_kappa,
                    "measure the condition number (N <= 128)");

  SolveArgs sol;
  auto* sol_cmd = app.add_subcommand("solve", "Solve Ax = B");
  sol_cmd->add_option("--matrix,-A", sol.matrix, "system matrix (.mtx)")->required();
  sol_cmd->add_option("--rhs,-b", sol.rhs, "right-hand side (.mtx)")->required();
  sol_cmd->add_option("--method", sol.method, "nn | sparse-factorized");
  sol_cmd->add_option("--depth,-L", sol.depth, "inception depth");
  sol_cmd->add_option("--nests,-i", sol.nests, "nest budget (0 = auto)");
  sol_cmd->add_option("--order,--gamma", sol.order, "factorized series order");
  sol_cmd->add_option("--tol", sol.tol, "tolerance");
  sol_cmd->add_option("--seed", sol.seed, "seed");
  sol_cmd->add_option("--out", sol.out, "solution output (.mtx)");
  sol_cmd->add_option("--report", sol.report, "report (JSON)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Sweep a method grid into CSV");
  bench_cmd->add_option("--methods", bench.methods, "methods to run")
      ->delimiter(',')
      ->required();
  bench_cmd->add_option("--N", bench.sizes, "matrix sizes")->delimiter(',');
  bench_cmd->add_option("--cond", bench.conds, "condition numbers")->delimiter(',');
  bench_cmd->add_option("--depths", bench.depths, "inception depths")->delimiter(',');
  bench_cmd->add_option("--nests,-i", bench.nests, "nest budget (0 = from cond)");
  bench_cmd->add_option("--tol", bench.tol, "tolerance");
  bench_cmd->add_option("--seed", bench.seed, "base seed");
  bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");

  CostArgs cost;
  auto* cost_cmd = app.add_subcommand("analyze-cost", "Print cost-model tables");
  cost_cmd->add_option("--formula", cost.formula,
                       "nn | nn-explicit-sparse | factorized | "
                       "factorized-sparse-stored | all");
  cost_cmd->add_option("--nests,-i", cost.nests, "nest count");
  cost_cmd->add_option("--depth,-L", cost.depth, "inception depth");
  cost_cmd->add_option("--gamma", cost.gamma, "series order");
  cost_cmd->add_option("--N", cost.n, "dimension");
  cost_cmd->add_flag("--appendix-variant", cost.appendix_variant,
                     "use the restated N^2 coefficient");
  cost_cmd->add_flag("--json", cost.json, "JSON output");
  cost_cmd->add_option("--out", cost.out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (inv_cmd->parsed()) return run_invert(inv);
    if (sol_cmd->parsed()) return run_solve(sol);
    if (bench_cmd->parsed()) return run_bench(bench);
    if (cost_cmd->parsed()) return run_cost(cost);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
