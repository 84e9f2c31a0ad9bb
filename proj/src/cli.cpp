#include "vexlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "vexlab/decomposition.hpp"
#include "vexlab/inequality_lab.hpp"
#include "vexlab/operators.hpp"

namespace vexlab {

namespace {

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kModules = {"geometry",   "exponent",       "norm",           "operators",
                                           "decomposition", "inequality_lab", "counterexample", "cli"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("bad number '" + s + "' for " + what);
  }
}

// Max over consecutive pairs of max(a/b, b/a). Two zeros count as 1, one zero as inf.
double stability(const std::vector<std::pair<int, double>>& rows) {
  double worst = 1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double a = rows[i - 1].second, b = rows[i].second;
    if (a == 0.0 && b == 0.0) continue;
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return kInfinity;
    worst = std::max(worst, std::max(a / b, b / a));
  }
  return worst;
}

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Hash over everything that affects results (out and timestamp excluded).
std::string config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.values.erase("out");
  c.values.erase("timestamp");
  return c.hash();
}

class Output {
 public:
  Output(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {
    dir_ = cfg.get("out", "vexlab-" + cfg.get("subcommand", "run"));
    std::filesystem::create_directories(dir_);
    hash_ = config_hash(cfg);
    stamp_ = cfg.get("timestamp", "true") != "false";
  }

  void csv(const std::string& name, const std::string& body, const std::vector<std::string>& extra = {}) {
    std::string head = "# config_hash=" + hash_ + "\n";
    if (stamp_) head += "# timestamp=" + utc_timestamp() + "\n";
    for (const auto& c : extra) head += "# " + c + "\n";
    file(name, head + body);
  }

  void file(const std::string& name, const std::string& body) {
    write_text((std::filesystem::path(dir_) / name).string(), body);
    files_.push_back(name);
  }

  void manifest(int code) {
    std::ostringstream m;
    m << "vexlab run manifest\n";
    m << "version=" << kVersion << "\n";
    m << "config_hash=" << hash_ << "\n";
    if (stamp_) m << "timestamp=" << utc_timestamp() << "\n";
    m << "exit_code=" << code << "\n";
    m << "[config]\n" << cfg_.serialize();
    m << "[modules]\n";
    for (const auto& mod : kModules) m << mod << "=" << kVersion << "\n";
    m << "[files]\n";
    for (const auto& f : files_) m << f << "\n";
    write_text((std::filesystem::path(dir_) / "manifest.txt").string(), m.str());
    out_ << "reports written to " << dir_ << "\n";
  }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
  std::string dir_, hash_;
  bool stamp_ = true;
  std::vector<std::string> files_;
};

struct Prepared {
  ExperimentSetup s;
  TreeCovering tree;
  JohnReport john;
};

Prepared prepare(const RunConfig& cfg, int L) {
  Prepared pr{make_setup(cfg, L), {}, {}};
  WhitneyResult w = whitney_decompose(pr.s.dom);
  pr.tree = build_tree_covering(w.cubes, pr.s.dom);
  pr.john = estimate_john_constants(pr.tree, pr.s.dom);
  return pr;
}

int default_L(const std::string& sub) { return sub == "counterexample" ? 10 : 5; }

std::vector<int> levels(const RunConfig& cfg) {
  if (!cfg.has("L")) return {default_L(cfg.get("subcommand"))};
  return parse_levels(cfg.get("L"));
}

uint64_t seed_of(const RunConfig& cfg) {
  double s = cfg.get_double("seed", 1.0);
  if (!(s >= 0.0) || s != std::floor(s)) throw InvalidInput("seed must be a non-negative integer");
  return static_cast<uint64_t>(s);
}

std::vector<TestFunction> corpus_for(const RunConfig& cfg, const ExperimentSetup& s, const std::string& fallback) {
  const std::string id = cfg.get("corpus", fallback);
  const uint64_t seed = seed_of(cfg);
  std::vector<TestFunction> fam;
  for (const auto& part : split(id, '+')) {
    std::vector<TestFunction> add;
    if (part == "standard") {
      add = standard_corpus(s.dom, seed);
    } else if (part == "compact") {
      add = compact_corpus(s.dom, seed);
    } else if (part == "counterexample") {
      if (!s.ce) throw InvalidInput("corpus 'counterexample' needs a counterexample-* exponent");
      add = build_test_functions(*s.ce);
    } else {
      throw InvalidInput("unknown corpus '" + part + "' (standard, compact, counterexample, joined with '+')");
    }
    fam.insert(fam.end(), add.begin(), add.end());
  }
  return fam;
}

void print_warnings(const ExperimentSetup& s, std::ostream& err) {
  if (s.ce)
    for (const auto& w : s.ce->warnings) err << "warning: " << w << "\n";
}

int cmd_whitney(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Output o(cfg, out);
  CsvWriter summary({"L", "cells", "cubes", "uncovered", "exact", "nodes", "C1", "C2", "K", "tau_K"});
  bool ok = true;
  std::vector<std::pair<int, double>> c2;
  for (int L : levels(cfg)) {
    ExperimentSetup s = make_setup(cfg, L);
    print_warnings(s, err);
    WhitneyResult w = whitney_decompose(s.dom);
    bool exact = true;
    for (const auto& q : w.cubes) {
      int64_t side = cube_side_cells(s.dom, q), d2 = cube_dist2(s.dom, q);
      // diam <= dist <= 4 diam with diam^2 = 2 side^2, all in cell units.
      if (d2 < 2 * side * side || d2 > 32 * side * side) exact = false;
    }
    TreeCovering tree = build_tree_covering(w.cubes, s.dom);
    JohnReport j = estimate_john_constants(tree, s.dom);
    ok = ok && exact && tree.C1 <= 4;
    c2.emplace_back(L, tree.C2);
    summary.row({std::to_string(L), std::to_string(s.dom.size()), std::to_string(w.cubes.size()),
                 std::to_string(w.uncovered.size()), exact ? "1" : "0", std::to_string(tree.size()),
                 std::to_string(tree.C1), fmt(tree.C2), fmt(j.K), fmt(j.tau_K)});
    o.csv("tree_L" + std::to_string(L) + ".csv", tree_csv(tree, s.dom));
    out << "L=" << L << " cubes=" << w.cubes.size() << " exact=" << (exact ? "yes" : "no") << " C1=" << tree.C1
        << " C2=" << fmt(tree.C2) << " K=" << fmt(j.K) << " tau_K=" << fmt(j.tau_K) << "\n";
  }
  double st = stability(c2);
  if (st >= 2.0) ok = false;
  o.csv("whitney.csv", summary.str(), {"C2_stability=" + fmt(st)});
  int code = ok ? kExitOk : kExitCheckFailed;
  o.manifest(code);
  return code;
}

ConditionReport guarded(const std::string& name, const std::function<ConditionReport()>& fn) {
  try {
    ConditionReport r = fn();
    if (r.name.empty()) r.name = name;
    return r;
  } catch (const ExponentError& e) {
    ConditionReport r;
    r.name = name;
    r.status = "undefined";
    r.pass = true;
    r.constant = std::nan("");
    r.warnings.push_back(e.what());
    return r;
  }
}

int cmd_check_exponent(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Output o(cfg, out);
  const double tau = cfg.get_double("tau", 1.0);
  const double eps = cfg.get_double("eps", 0.1);
  const double alpha = cfg.get_double("alpha", 0.0);
  CsvWriter csv({"L", "condition", "status", "constant", "threshold", "witness", "witness2", "note"});
  bool ok = true;
  for (int L : levels(cfg)) {
    Prepared pr = prepare(cfg, L);
    const auto& dom = pr.s.dom;
    const auto& p = pr.s.p;
    print_warnings(pr.s, err);
    std::vector<ConditionReport> reps;
    reps.push_back(guarded("boundary_LH", [&] { return check_boundary_LH(p, dom, tau); }));
    reps.push_back(guarded("LH_equiv", [&] { return check_LH_equiv(p, dom, pr.tree, tau); }));
    reps.push_back(guarded("eps_continuity", [&] { return check_eps_continuity(p, dom, eps); }));
    reps.push_back(guarded("K0", [&] { return check_K0(p, dom, pr.tree, tau, alpha, dom.size() <= 20000); }));
    reps.push_back(guarded("harmonic_mean", [&] { return harmonic_mean_norm_check(p, dom, pr.tree); }));
    if (dom.size() <= 4096) {
      reps.push_back(guarded("LH0", [&] { return check_LH0(p, dom); }));
    } else {
      ConditionReport r;
      r.name = "LH0";
      r.status = "skipped";
      r.constant = std::nan("");
      r.warnings.push_back("all-pairs check skipped above 4096 cells");
      reps.push_back(r);
    }
    reps.push_back(guarded("boundary_trace", [&] { return boundary_trace(p, dom, tau).report; }));
    for (const auto& r : reps) {
      if (r.status == "fail") ok = false;
      std::string note;
      for (const auto& w : r.warnings) note += (note.empty() ? "" : "; ") + w;
      std::replace(note.begin(), note.end(), ',', ';');
      csv.row({std::to_string(L), r.name, r.status, fmt(r.constant), fmt(r.threshold), std::to_string(r.witness),
               std::to_string(r.witness2), note});
      out << "L=" << L << " " << r.name << ": " << r.status << " constant=" << fmt(r.constant) << "\n";
    }
  }
  o.csv("check-exponent.csv", csv.str(), {"tau=" + fmt(tau), "eps=" + fmt(eps)});
  int code = ok ? kExitOk : kExitCheckFailed;
  o.manifest(code);
  return code;
}

// Shared driver for the refinement sweeps of verify-sp and verify-sobolev.
int sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err, const std::string& name,
          const std::function<VerificationReport(const Prepared&)>& verify) {
  Output o(cfg, out);
  bool ok = true;
  std::vector<std::pair<int, double>> refinement;
  VerificationReport last;
  for (int L : levels(cfg)) {
    Prepared pr = prepare(cfg, L);
    print_warnings(pr.s, err);
    VerificationReport r = verify(pr);
    if (r.status != "pass") ok = false;
    refinement.emplace_back(L, r.max_ratio);
    out << "L=" << L << " " << r.inequality << " status=" << r.status << " rows=" << r.rows.size()
        << " max_ratio=" << fmt(r.max_ratio) << " argmax=" << r.argmax << "\n";
    o.csv(name + "_L" + std::to_string(L) + ".csv", r.csv());
    last = std::move(r);
  }
  double st = stability(refinement);
  if (st >= 1.5) ok = false;
  std::vector<std::string> extra;
  for (const auto& [L, m] : refinement) extra.push_back("refinement L=" + std::to_string(L) + " max_ratio=" + fmt(m));
  extra.push_back("stability=" + fmt(st));
  o.csv(name + ".csv", last.csv(), extra);
  o.file(name + ".svg", refinement_svg(name + ": max ratio vs L", refinement));
  out << "stability=" << fmt(st) << " result=" << (ok ? "pass" : "fail") << "\n";
  int code = ok ? kExitOk : kExitCheckFailed;
  o.manifest(code);
  return code;
}

int cmd_verify_sp(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  GlobalSpOptions opt;
  opt.variant = cfg.get("variant", "weighted");
  opt.alpha = cfg.get_double("alpha", 0.0);
  opt.sigma = cfg.get_double("sigma", -1.0);
  opt.tau = cfg.get_double("tau", -1.0);
  return sweep(cfg, out, err, "verify-sp", [&](const Prepared& pr) {
    return global_sp_verify(pr.s.dom, pr.tree, pr.s.p, opt, corpus_for(cfg, pr.s, "standard"));
  });
}

int cmd_verify_sobolev(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const double alpha = cfg.get_double("alpha", 0.0);
  const double sigma = cfg.get_double("sigma", -1.0);
  return sweep(cfg, out, err, "verify-sobolev", [&](const Prepared& pr) {
    return sobolev_verify(pr.s.dom, pr.s.p, alpha, corpus_for(cfg, pr.s, "compact"), sigma);
  });
}

int cmd_decompose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Output o(cfg, out);
  const int count = cfg.get_int("trials", 50);
  const double tau = cfg.get_double("tau", 1.0);
  if (count < 1) throw InvalidInput("trials must be positive");
  CsvWriter csv({"L", "field", "sum_residual", "max_abs_g", "mean_ratio", "support_ok", "constant", "status"});
  bool ok = true;
  std::vector<std::pair<int, double>> constants;
  std::string nodes_csv;
  int nodes_L = 0;
  for (int L : levels(cfg)) {
    Prepared pr = prepare(cfg, L);
    print_warnings(pr.s, err);
    PartitionOfUnity pou = partition_of_unity(pr.tree, pr.s.dom);
    auto fields = mean_zero_fields(pr.tree, pr.s.dom, count, seed_of(cfg));
    double worst = 0.0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      Decomposition dec = decompose(fields[i], pr.tree, pr.s.dom, pou);
      DecompositionReport r = verify_decomposition(dec, fields[i], pr.tree, pr.s.dom, pr.s.p, tau);
      if (!(r.sum_residual <= 1e-10 * r.max_abs_g) || !r.mean_ok || !r.support_ok) ok = false;
      if (std::isfinite(r.constant)) worst = std::max(worst, r.constant);
      csv.row({std::to_string(L), std::to_string(i), fmt(r.sum_residual), fmt(r.max_abs_g), fmt(r.mean_ratio),
               r.support_ok ? "1" : "0", fmt(r.constant), r.status});
      if (i == 0) {
        nodes_csv = r.csv();
        nodes_L = L;
        for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      }
    }
    constants.emplace_back(L, worst);
    out << "L=" << L << " fields=" << fields.size() << " nodes=" << pr.tree.size() << " pou_error="
        << fmt(pou.max_sum_error) << " constant=" << fmt(worst) << "\n";
  }
  double st = stability(constants);
  if (st >= 1.5) ok = false;
  std::vector<std::string> extra;
  for (const auto& [L, c] : constants) extra.push_back("constant L=" + std::to_string(L) + " value=" + fmt(c));
  extra.push_back("stability=" + fmt(st));
  o.csv("decompose.csv", csv.str(), extra);
  o.csv("decompose_nodes.csv", nodes_csv, {"field 0 at L=" + std::to_string(nodes_L)});
  out << "stability=" << fmt(st) << " result=" << (ok ? "pass" : "fail") << "\n";
  int code = ok ? kExitOk : kExitCheckFailed;
  o.manifest(code);
  return code;
}

int cmd_operators(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Output o(cfg, out);
  const int trials = cfg.get_int("trials", 20);
  if (trials < 1) throw InvalidInput("trials must be positive");
  const uint64_t seed = seed_of(cfg);
  std::vector<std::pair<int, double>> a_rows, t_rows;
  std::string a_csv, t_csv;
  for (int L : levels(cfg)) {
    Prepared pr = prepare(cfg, L);
    print_warnings(pr.s, err);
    std::vector<TestFunction> extra;
    if (pr.s.ce) {
      extra = build_test_functions(*pr.s.ce);
      auto shells = build_shell_functions(*pr.s.ce);
      extra.insert(extra.end(), shells.begin(), shells.end());
    }
    auto corpus = operator_corpus(pr.s.dom, trials, seed, extra);
    const auto& tree = pr.tree;
    const auto& dom = pr.s.dom;
    const auto& p = pr.s.p;
    auto a = estimate_operator_norm("A_Gamma", [&](const CellField& f) { return hardy_shadow(f, tree); }, corpus, p,
                                    p, dom.h, seed);
    auto t = estimate_operator_norm("T_p", [&](const CellField& f) { return tree_average_Tp(f, tree, dom, p); },
                                    corpus, p, p, dom.h, seed);
    a_rows.emplace_back(L, a.estimate);
    t_rows.emplace_back(L, t.estimate);
    a_csv = a.csv();
    t_csv = t.csv();
    out << "L=" << L << " A_Gamma=" << fmt(a.estimate) << " (" << a.argmax << ") T_p=" << fmt(t.estimate) << " ("
        << t.argmax << ")\n";
  }
  double sa = stability(a_rows), stp = stability(t_rows);
  bool ok = sa < 1.5 && stp < 1.5;
  CsvWriter summary({"L", "A_Gamma", "T_p"});
  for (std::size_t i = 0; i < a_rows.size(); ++i)
    summary.row({std::to_string(a_rows[i].first), fmt(a_rows[i].second), fmt(t_rows[i].second)});
  o.csv("operators.csv", summary.str(), {"A_Gamma_stability=" + fmt(sa), "T_p_stability=" + fmt(stp)});
  o.csv("operators_A_Gamma.csv", a_csv);
  o.csv("operators_T_p.csv", t_csv);
  std::vector<SvgSeries> series(2);
  series[0].label = "A_Gamma";
  series[1].label = "T_p";
  for (std::size_t i = 0; i < a_rows.size(); ++i) {
    series[0].x.push_back(a_rows[i].first);
    series[0].y.push_back(a_rows[i].second);
    series[1].x.push_back(t_rows[i].first);
    series[1].y.push_back(t_rows[i].second);
  }
  o.file("operators.svg", svg_plot("operator norm estimates vs L", "L", "estimate", series, false, false));
  out << "stability A_Gamma=" << fmt(sa) << " T_p=" << fmt(stp) << " result=" << (ok ? "pass" : "fail") << "\n";
  int code = ok ? kExitOk : kExitCheckFailed;
  o.manifest(code);
  return code;
}

CounterexampleConfig counterexample_config(const RunConfig& cfg, const std::string& mode, int L) {
  CounterexampleConfig c = CounterexampleConfig::defaults(mode, L);
  if (cfg.has("p0")) c.p0 = cfg.get_double("p0", c.p0);
  if (cfg.has("kmax")) c.kmax = cfg.get_int("kmax", c.kmax);
  if (cfg.has("domain")) c.domain = parse_domain_spec(cfg.get("domain"), L);
  return c;
}

int cmd_counterexample(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Output o(cfg, out);
  const std::string mode = cfg.get("mode", "boundary");
  const double alpha = cfg.get_double("alpha", 0.0);
  auto Ls = levels(cfg);
  if (Ls.size() != 1) throw InvalidInput("counterexample takes a single resolution");
  const int L = Ls[0];
  CounterexampleConfig c = counterexample_config(cfg, mode, L);
  CounterexampleGeometry g = build_counterexample(c);
  for (const auto& w : g.warnings) err << "warning: " << w << "\n";
  CounterexampleConfig cc = c;
  cc.constant = true;
  CounterexampleGeometry gc = build_counterexample(cc);
  BlowupReport rep = mode == "korn" ? korn_blowup(g) : blowup_sp(g, alpha);
  BlowupReport con = mode == "korn" ? korn_blowup(gc) : blowup_sp(gc, alpha);
  for (const auto& row : rep.rows)
    out << "k=" << row.k << " r=" << fmt(row.r) << " p_k=" << fmt(row.p) << " ratio=" << fmt(row.ratio)
        << " predicted=" << fmt(row.predicted) << " quotient=" << fmt(row.quotient) << "\n";
  o.csv("counterexample.csv", rep.csv(), {"p0=" + fmt(c.p0), "contrast_flatness=" + fmt(con.flatness)});
  o.csv("counterexample_contrast.csv", con.csv(), {"constant exponent p = p0"});
  o.file("counterexample.svg", rep.svg());
  bool ok = rep.monotone && rep.band_ok;
  out << "monotone=" << (rep.monotone ? "yes" : "no") << " band=" << (rep.band_ok ? "yes" : "no")
      << " contrast_flatness=" << fmt(con.flatness) << " result=" << (ok ? "pass" : "fail") << "\n";
  int code = ok ? kExitOk : kExitCheckFailed;
  o.manifest(code);
  return code;
}

}  // namespace

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    auto dash = part.find('-', 1);
    int lo, hi;
    try {
      if (dash == std::string::npos) {
        lo = hi = std::stoi(part);
      } else {
        lo = std::stoi(part.substr(0, dash));
        hi = std::stoi(part.substr(dash + 1));
      }
    } catch (const std::exception&) {
      throw InvalidInput("bad resolution list '" + text + "'");
    }
    if (lo > hi) throw InvalidInput("bad resolution range '" + part + "'");
    for (int L = lo; L <= hi; ++L) out.push_back(L);
  }
  if (out.empty()) throw InvalidInput("empty resolution list");
  for (int L : out)
    if (L < 0 || L > 14) throw InvalidInput("resolution L must lie in [0, 14]");
  return out;
}

ExponentField make_exponent(const std::string& spec, const GridDomain& dom) {
  auto parts = split(spec, ':');
  if (parts.empty()) throw InvalidInput("empty exponent spec");
  const std::string& kind = parts[0];
  if (kind == "csv") {
    if (parts.size() < 2) throw InvalidInput("csv exponent needs a path");
    std::string path = spec.substr(4);
    ExponentField p = read_cell_csv(path, dom, true);
    if (p.size() > 0 && p.minCoeff() < 1.0) throw InvalidInput("exponent values must be >= 1");
    return p;
  }
  auto arg = [&](std::size_t i, double fallback) {
    return parts.size() > i ? to_double(parts[i], "exponent " + kind) : fallback;
  };
  if (kind == "constant") {
    if (parts.size() > 2) throw InvalidInput("constant exponent takes one value");
    return constant_exponent(dom, arg(1, 2.0));
  }
  if (kind == "step") {
    if (parts.size() > 3) throw InvalidInput("step exponent takes value and jump");
    return step_exponent(dom, arg(1, 2.0), arg(2, 0.05));
  }
  if (kind == "radial-LH") {
    if (parts.size() > 3) throw InvalidInput("radial-LH exponent takes p_- and p_+");
    return radial_lh_exponent(dom, arg(1, 1.5), arg(2, 2.5));
  }
  throw InvalidInput("unknown exponent generator '" + kind +
                     "' (constant, step, radial-LH, counterexample-boundary, counterexample-interior, csv:path)");
}

ExperimentSetup make_setup(const RunConfig& cfg, int L) {
  const std::string spec = cfg.get("exponent", "constant:2");
  if (spec.rfind("counterexample-", 0) == 0) {
    const std::string mode = spec.substr(15);
    if (mode != "boundary" && mode != "interior") throw InvalidInput("unknown exponent generator '" + spec + "'");
    CounterexampleGeometry g = build_counterexample(counterexample_config(cfg, mode, L));
    ExperimentSetup s{g.dom, g.p, std::nullopt};
    s.ce = std::move(g);
    return s;
  }
  GridDomain dom = build_domain(parse_domain_spec(cfg.get("domain", "unit-square"), L));
  ExponentField p = make_exponent(spec, dom);
  return ExperimentSetup{std::move(dom), std::move(p), std::nullopt};
}

int run(const std::string& subcommand, const RunConfig& cfg_in, std::ostream& out, std::ostream& err) {
  RunConfig cfg = cfg_in;
  cfg.set("subcommand", subcommand);
  try {
    if (subcommand == "whitney") return cmd_whitney(cfg, out, err);
    if (subcommand == "check-exponent") return cmd_check_exponent(cfg, out, err);
    if (subcommand == "verify-sp") return cmd_verify_sp(cfg, out, err);
    if (subcommand == "verify-sobolev") return cmd_verify_sobolev(cfg, out, err);
    if (subcommand == "decompose") return cmd_decompose(cfg, out, err);
    if (subcommand == "operators") return cmd_operators(cfg, out, err);
    if (subcommand == "counterexample") return cmd_counterexample(cfg, out, err);
    err << "error: unknown subcommand '" << subcommand << "'\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"vexlab: variable-exponent inequality laboratory", "vexlab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  struct Flag {
    std::string key, name, help;
    std::string value;
    CLI::Option* opt = nullptr;
  };
  std::vector<Flag> flags = {
      {"domain", "--domain", "unit-square | L-shape | rectangle:WxH | disc | mask:path.pgm", {}},
      {"L", "--L", "resolution list, e.g. 5 or 4,5,6 or 4-6", {}},
      {"exponent", "--exponent",
       "constant[:v] | step[:v:jump] | radial-LH[:lo:hi] | counterexample-boundary | counterexample-interior | csv:path",
       {}},
      {"alpha", "--alpha", "fractional order alpha", {}},
      {"tau", "--tau", "ball dilation tau (default: measured tau_K where relevant)", {}},
      {"seed", "--seed", "corpus seed", {}},
      {"corpus", "--corpus", "standard | compact | counterexample, joined with '+'", {}},
      {"kmax", "--kmax", "largest counterexample index", {}},
      {"mode", "--mode", "counterexample mode: boundary | interior | korn", {}},
      {"out", "--out", "output directory", {}},
      {"variant", "--variant", "weighted | small-exponent | large-exponent | improved-poincare", {}},
      {"p0", "--p0", "counterexample base exponent", {}},
      {"trials", "--trials", "random trials (operators) or field count (decompose)", {}},
      {"sigma", "--sigma", "continuity level sigma", {}},
      {"eps", "--eps", "uniform continuity level (check-exponent)", {}},
  };
  std::string config_path;
  bool no_timestamp = false;
  auto add_common = [&](CLI::App* a) {
    for (auto& f : flags) f.opt = a->add_option(f.name, f.value, f.help);
    a->add_option("--config", config_path, "key=value configuration file (flags override it)");
    a->add_flag("--no-timestamp", no_timestamp, "omit timestamp lines from reports");
  };
  add_common(&app);
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"whitney", "Whitney cubes, tree covering and John constants"},
      {"check-exponent", "every condition report for one exponent"},
      {"verify-sp", "global weighted Sobolev-Poincare inequality on a corpus"},
      {"verify-sobolev", "Sobolev inequality via exponent extension"},
      {"decompose", "decomposition identities and the decomposition constant"},
      {"operators", "empirical norms of A_Gamma and T_p"},
      {"counterexample", "blow-up reports for the counterexample families"},
  };
  for (const auto& [name, desc] : subs) app.add_subcommand(name, desc)->fallthrough();
  const std::string usage = app.help();

  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.empty() || a[0] == '-') continue;
    bool known = false;
    for (const auto& sc : subs) known = known || sc.first == a;
    if (!known && (i == 1 || std::string(argv[i - 1]).rfind("--", 0) != 0)) {
      err << "error: unknown subcommand '" << a << "'\n" << usage;
      return kExitInvalid;
    }
    break;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << usage;
    return kExitInvalid;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = RunConfig::load(config_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  for (const auto& [key, value] : cfg.values) {
    bool known = key == "timestamp" || key == "subcommand";
    for (const auto& f : flags) known = known || f.key == key;
    if (!known) {
      err << "error: unknown config key '" << key << "'\n" << usage;
      return kExitInvalid;
    }
  }
  for (const auto& f : flags)
    if (f.opt->count() > 0) cfg.set(f.key, f.value);
  if (no_timestamp) cfg.set("timestamp", "false");

  std::string sub = app.get_subcommands().front()->get_name();
  if (cfg.has("subcommand") && cfg.get("subcommand") != sub) {
    err << "error: config file names subcommand '" << cfg.get("subcommand") << "'\n";
    return kExitInvalid;
  }
  return run(sub, cfg, out, err);
}

}  // namespace vexlab
