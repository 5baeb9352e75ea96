#pragma once

// Command-line front end: verify, bench, gen.

#include "itpa/approx.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace itpa {

// ---------------------------------------------------------------------------
// Benchmark families.

struct Benchmark {
  std::string name;
  std::string program;
  std::string preds;
};

namespace detail {

inline std::string loc(int i) { return "L" + std::to_string(i); }

}  // namespace detail

/// n rounds of a[x] := y; y := y + 1, then the guarded read. Size 1 is the
/// store/read example.
inline Benchmark gen_array_copy(int n, bool reachable) {
  std::ostringstream p;
  p << "# array-copy, size " << n << (reachable ? ", reachable" : "") << "\n";
  p << "var x y z;\narray a;\ninit L0;\nerror LF;\n";
  int l = 0;
  for (int k = 0; k < n; ++k) {
    p << detail::loc(l) << " -> " << detail::loc(l + 1) << " : a[x] := y;\n";
    p << detail::loc(l + 1) << " -> " << detail::loc(l + 2) << " : y := y + 1;\n";
    l += 2;
  }
  p << detail::loc(l) << " -> " << detail::loc(l + 1) << " : assume z == x;\n";
  p << detail::loc(l + 1) << " -> " << detail::loc(l + 2) << " : assert a[z] == " << (reachable ? "y" : "y - 1")
    << ";\n";
  return {"array-copy-" + std::to_string(n) + (reachable ? "-reach" : ""), p.str(),
          "x == z\na[z] == y\na[z] == y - 1\n"};
}

/// Zero stores at i1..in, then a read at some j known to be one of them.
/// The reachable variant also admits an index w that was never stored.
inline Benchmark gen_array_init(int n, bool reachable) {
  std::ostringstream p, q;
  p << "# array-init, size " << n << (reachable ? ", reachable" : "") << "\n";
  p << "var j";
  for (int k = 1; k <= n; ++k) p << " i" << k;
  if (reachable) p << " w";
  p << ";\narray a;\ninit L0;\nerror LF;\n";
  for (int k = 1; k <= n; ++k) p << detail::loc(k - 1) << " -> " << detail::loc(k) << " : a[i" << k << "] := 0;\n";
  p << detail::loc(n) << " -> " << detail::loc(n + 1) << " : assume ";
  for (int k = 1; k <= n; ++k) p << (k > 1 ? " || " : "") << "j == i" << k;
  if (reachable) p << " || j == w";
  p << ";\n" << detail::loc(n + 1) << " -> " << detail::loc(n + 2) << " : assert a[j] == 0;\n";
  q << "a[j] == 0\n";
  for (int k = 1; k <= n; ++k) q << "j == i" << k << "\n";
  return {"array-init-" + std::to_string(n) + (reachable ? "-reach" : ""), p.str(), q.str()};
}

/// x_k := x_{k-1} + 1 for k = 1..n, then assert x_n == x_0 + n.
inline Benchmark gen_counter_chain(int n, bool reachable) {
  std::ostringstream p, q;
  p << "# counter-chain, size " << n << (reachable ? ", reachable" : "") << "\n";
  p << "var";
  for (int k = 0; k <= n; ++k) p << " x" << k;
  p << ";\ninit L0;\nerror LF;\n";
  for (int k = 1; k <= n; ++k) {
    p << detail::loc(k - 1) << " -> " << detail::loc(k) << " : x" << k << " := x" << k - 1 << " + 1;\n";
    q << "x" << k << " == x0 + " << k << "\n";
  }
  p << detail::loc(n) << " -> " << detail::loc(n + 1) << " : assert x" << n << " == x0 + " << (reachable ? n - 1 : n)
    << ";\n";
  return {"counter-chain-" + std::to_string(n) + (reachable ? "-reach" : ""), p.str(), q.str()};
}

inline const std::vector<std::string>& benchmark_families() {
  static const std::vector<std::string> names{"array-init", "array-copy", "counter-chain"};
  return names;
}

inline Benchmark gen_benchmark(const std::string& family, int n, bool reachable) {
  if (family == "array-copy") return gen_array_copy(n, reachable);
  if (family == "array-init") return gen_array_init(n, reachable);
  if (family == "counter-chain") return gen_counter_chain(n, reachable);
  throw std::invalid_argument("unknown family: " + family);
}

/// Writes <name>.prog and <name>.preds for sizes lo..hi, both variants.
inline std::vector<std::string> write_benchmarks(const std::filesystem::path& dir, const std::string& family, int lo,
                                                 int hi) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (int n = lo; n <= hi; ++n) {
    for (bool reach : {false, true}) {
      Benchmark b = gen_benchmark(family, n, reach);
      std::ofstream(dir / (b.name + ".prog")) << b.program;
      std::ofstream(dir / (b.name + ".preds")) << b.preds;
      names.push_back(b.name);
    }
  }
  return names;
}

// ---------------------------------------------------------------------------
// Runs and records.

struct RunRecord {
  std::string benchmark;
  Engine engine = Engine::Interp;
  bool hybrid = false;
  std::string verdict;
  std::size_t iterations = 0;
  std::size_t pred_additions = 0;
  std::uint64_t refute_calls = 0;
  double wall_time_ms = 0;
  std::size_t progress_failures = 0;  // not part of the CSV
};

inline const char* kCsvHeader = "benchmark,engine,hybrid,verdict,iterations,pred_additions,refute_calls,wall_time_ms";

inline std::string csv_row(const RunRecord& r) {
  std::ostringstream o;
  o << r.benchmark << ',' << to_string(r.engine) << ',' << (r.hybrid ? 1 : 0) << ',' << r.verdict << ','
    << r.iterations << ',' << r.pred_additions << ',' << r.refute_calls << ',' << std::fixed << std::setprecision(3)
    << r.wall_time_ms;
  return o.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json stats_json(const RunRecord& r, const VerifyStats& s) {
  return {{"benchmark", r.benchmark},
          {"engine", to_string(r.engine)},
          {"hybrid", r.hybrid},
          {"verdict", r.verdict},
          {"refinement_iterations", s.refinement_iterations},
          {"pred_additions", s.pred_additions},
          {"refute_calls", s.refute_calls},
          {"wall_time_ms", s.wall_time_ms},
          {"progress_failures", s.progress_failures},
          {"stalls", s.stalls},
          {"exchanges", s.exchanges},
          {"warnings", s.warnings}};
}

inline RunRecord record_of(const std::string& name, const VerifyOptions& opt, const std::string& verdict,
                           const VerifyStats& s) {
  return {name, opt.engine, opt.hybrid, verdict, s.refinement_iterations, s.pred_additions, s.refute_calls,
          s.wall_time_ms, s.progress_failures};
}

/// One in-process run. Failures become records rather than exceptions.
inline RunRecord run_benchmark(const std::string& name, const std::string& program, const std::string& preds,
                               const VerifyOptions& opt) {
  try {
    Program prog = parse_program(program);
    Verdict v = verify(prog, parse_predicates(preds, prog), opt);
    return record_of(name, opt, v.tag(), v.stats);
  } catch (const IterationBudgetExceeded& e) {
    return record_of(name, opt, "budget_exceeded", e.stats);
  } catch (const std::exception&) {
    return record_of(name, opt, "error", VerifyStats{});
  }
}

namespace detail {

inline std::optional<RunRecord> parse_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
  if (f.size() != 9) return std::nullopt;
  RunRecord r;
  r.benchmark = f[0];
  r.engine = f[1] == "interp" ? Engine::Interp : Engine::DasDill;
  r.hybrid = f[2] == "1";
  r.verdict = f[3];
  r.iterations = std::stoul(f[4]);
  r.pred_additions = std::stoul(f[5]);
  r.refute_calls = std::stoull(f[6]);
  r.wall_time_ms = std::stod(f[7]);
  r.progress_failures = std::stoul(f[8]);
  return r;
}

}  // namespace detail

/// Runs in a child process, killed after timeout_s seconds.
inline RunRecord run_isolated(const std::string& name, const std::string& program, const std::string& preds,
                              const VerifyOptions& opt, double timeout_s) {
  RunRecord fallback = record_of(name, opt, "error", VerifyStats{});
  int fd[2];
  if (pipe(fd) != 0) return fallback;
  pid_t pid = fork();
  if (pid < 0) {
    close(fd[0]);
    close(fd[1]);
    return fallback;
  }
  if (pid == 0) {
    close(fd[0]);
    RunRecord r = run_benchmark(name, program, preds, opt);
    std::string line = csv_row(r) + "," + std::to_string(r.progress_failures) + "\n";
    ssize_t ignored = write(fd[1], line.data(), line.size());
    (void)ignored;
    close(fd[1]);
    _exit(0);
  }
  close(fd[1]);
  auto start = std::chrono::steady_clock::now();
  std::string buf;
  bool timed_out = false;
  while (true) {
    double left = timeout_s * 1000 - std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (left <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{fd[0], POLLIN, 0};
    int rc = poll(&p, 1, static_cast<int>(std::min(left, 1000.0)) + 1);
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) continue;
    char chunk[512];
    ssize_t n = read(fd[0], chunk, sizeof chunk);
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
  }
  close(fd[0]);
  if (timed_out) kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  if (timed_out) {
    RunRecord r = fallback;
    r.verdict = "timeout";
    r.wall_time_ms = timeout_s * 1000;
    return r;
  }
  if (!buf.empty() && buf.back() == '\n') buf.pop_back();
  auto r = detail::parse_row(buf);
  return r ? *r : fallback;
}

/// Every *.prog in dir with a matching .preds, in name order, under both
/// engines with and without the hybrid image.
inline std::vector<RunRecord> bench_directory(const std::filesystem::path& dir, double timeout_s = 60,
                                              std::size_t max_iter = 200) {
  std::vector<std::filesystem::path> progs;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".prog") progs.push_back(e.path());
  }
  std::sort(progs.begin(), progs.end());
  std::vector<RunRecord> out;
  for (const auto& p : progs) {
    std::string name = p.stem().string();
    std::string prog, preds;
    bool readable = true;
    try {
      prog = read_file(p);
      auto pp = p;
      preds = read_file(pp.replace_extension(".preds"));
    } catch (const std::exception&) {
      readable = false;
    }
    for (Engine e : {Engine::Interp, Engine::DasDill}) {
      for (bool h : {false, true}) {
        VerifyOptions opt;
        opt.engine = e;
        opt.hybrid = h;
        opt.max_iter = max_iter;
        out.push_back(readable ? run_isolated(name, prog, preds, opt, timeout_s)
                               : record_of(name, opt, "error", VerifyStats{}));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

namespace detail {

/// Values of every symbol of the concrete path formula; the solver leaves
/// unconstrained ones at 0.
inline void print_witness(std::ostream& out, const Program& prog, const Path& path, const std::vector<Formula>& preds,
                          const Model& m) {
  for (const auto& v : symbols(mk_and(concrete_path_formula(prog, path, preds)))) {
    if (v.sym.kind != SymbolKind::Propositional) out << "  " << v.str() << " = " << to_string(m.value(v)) << "\n";
  }
  for (const auto& [s, b] : m.props) {
    if (!PredicateSet::decode(s)) out << "  " << s.str() << " = " << (b ? "true" : "false") << "\n";
  }
}

inline void print_path(std::ostream& out, const Program& prog, const Path& path) {
  for (std::size_t r : path) {
    const Operation& o = prog.ops[r];
    out << "  " << prog.locations[static_cast<std::size_t>(o.entry)] << " -> "
        << prog.locations[static_cast<std::size_t>(o.exit)] << " : " << to_string(o.stmt) << "\n";
  }
}

}  // namespace detail

struct VerifyArgs {
  std::string program;
  std::string preds;
  std::string engine = "interp";
  bool hybrid = false;
  std::size_t max_iter = 200;
  std::string stats;
  std::string dump_proofs;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  VerifyOptions opt;
  opt.engine = a.engine == "dasdill" ? Engine::DasDill : Engine::Interp;
  opt.hybrid = a.hybrid;
  opt.max_iter = a.max_iter;
  if (!a.dump_proofs.empty()) opt.dump_proofs = a.dump_proofs;
  Program prog;
  std::vector<Formula> preds;
  try {
    prog = parse_program(read_file(a.program));
    if (!a.preds.empty()) preds = parse_predicates(read_file(a.preds), prog);
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  std::string name = std::filesystem::path(a.program).stem().string();
  auto write_stats = [&](const std::string& verdict, const VerifyStats& s) {
    if (a.stats.empty()) return;
    std::ofstream(a.stats) << stats_json(record_of(name, opt, verdict, s), s).dump(2) << "\n";
  };
  Verdict v;
  try {
    v = verify(prog, preds, opt);
  } catch (const IterationBudgetExceeded& e) {
    write_stats("budget_exceeded", e.stats);
    err << "error: iteration budget of " << a.max_iter << " exceeded\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  write_stats(v.tag(), v.stats);
  out << "verdict: " << v.tag() << "\n";
  out << "iterations: " << v.stats.refinement_iterations << ", predicate additions: " << v.stats.pred_additions
      << ", refute calls: " << v.stats.refute_calls << "\n";
  for (const auto& w : v.stats.warnings) out << "warning: " << w << "\n";
  if (const auto* u = std::get_if<Unreachable>(&v.result)) {
    out << "invariants:\n";
    for (std::size_t l = 0; l < u->invariants.size(); ++l) {
      out << "  " << prog.locations[l] << ": " << v.preds.describe(u->invariants[l]) << "\n";
    }
    return 0;
  }
  if (const auto* c = std::get_if<ConcretePathFeasible>(&v.result)) {
    out << "path:\n";
    detail::print_path(out, prog, c->path);
    out << "witness:\n";
    detail::print_witness(out, prog, c->path, v.preds.preds(), c->witness);
    return 1;
  }
  Path path = std::holds_alternative<AbstractPathFeasible>(v.result) ? std::get<AbstractPathFeasible>(v.result).path
                                                                     : std::get<InsufficientPredicates>(v.result).path;
  out << "path:\n";
  detail::print_path(out, prog, path);
  return 2;
}

inline int cmd_bench(const std::string& dir, const std::string& csv, double timeout_s, std::size_t max_iter,
                     std::ostream& out, std::ostream& err) {
  if (!std::filesystem::is_directory(dir)) {
    err << "error: not a directory: " << dir << "\n";
    return 3;
  }
  auto rows = bench_directory(dir, timeout_s, max_iter);
  std::ofstream file;
  if (!csv.empty()) file.open(csv);
  std::ostream& dst = csv.empty() ? out : file;
  dst << kCsvHeader << "\n";
  for (const auto& r : rows) dst << csv_row(r) << "\n";
  return 0;
}

/// Parses argv and dispatches; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predicate abstraction verifier with interpolant-based refinement"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Prove the error location unreachable");
  verify_cmd->add_option("--program", va.program, "Program file")->required();
  verify_cmd->add_option("--preds", va.preds, "Predicate file, one condition per line")->required();
  verify_cmd->add_option("--engine", va.engine, "Refinement engine")->check(CLI::IsMember({"interp", "dasdill"}));
  verify_cmd->add_flag("--hybrid", va.hybrid, "Conjoin the Cartesian postcondition into each image");
  verify_cmd->add_option("--max-iter", va.max_iter, "Refinement budget");
  verify_cmd->add_option("--stats", va.stats, "Write run statistics as JSON");
  verify_cmd->add_option("--dump-proofs", va.dump_proofs, "Write each path refutation here");

  std::string bench_dir, bench_csv;
  double timeout_s = 60;
  std::size_t bench_iter = 200;
  auto* bench_cmd = app.add_subcommand("bench", "Run every benchmark in a directory");
  bench_cmd->add_option("dir", bench_dir, "Benchmark directory")->required();
  bench_cmd->add_option("--csv", bench_csv, "Output file (default stdout)");
  bench_cmd->add_option("--timeout", timeout_s, "Seconds per run");
  bench_cmd->add_option("--max-iter", bench_iter, "Refinement budget");

  std::string family, gen_dir = ".";
  int lo = 2, hi = 6;
  auto* gen_cmd = app.add_subcommand("gen", "Write a benchmark family");
  gen_cmd->add_option("family", family, "Family name")->required()->check(CLI::IsMember(benchmark_families()));
  gen_cmd->add_option("--out", gen_dir, "Output directory");
  gen_cmd->add_option("--min", lo, "Smallest size")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--max", hi, "Largest size")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 3;
  }
  if (*verify_cmd) return cmd_verify(va, out, err);
  if (*bench_cmd) return cmd_bench(bench_dir, bench_csv, timeout_s, bench_iter, out, err);
  for (const auto& n : write_benchmarks(gen_dir, family, lo, hi)) out << n << "\n";
  return 0;
}

}  // namespace itpa
