// Command-line driver: analyze a version pair, emit a diff map, run a
// program, or compute ground-truth verdicts by enumeration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cia/anytime.hpp"
#include "cia/depends.hpp"
#include "cia/diffmap.hpp"
#include "cia/impact.hpp"
#include "cia/lower.hpp"
#include "cia/oracles.hpp"
#include "cia/parser.hpp"
#include "cia/printer.hpp"
#include "cia/report.hpp"
#include "cia/semantics.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_input = 2;

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long env_long(const char* name, long fallback) {
  const char* v = std::getenv(name);
  if (!v) return fallback;
  try {
    return std::stol(v);
  } catch (...) {
    return fallback;
  }
}

cia::program load_lowered(const std::string& path) {
  cia::program p = cia::parse_program_file(path);
  auto pre = cia::validate_pre_lowering(p);
  if (!pre.empty()) {
    std::ostringstream os;
    os << path << ": validation failed:";
    for (const auto& v : pre)
      os << "\n  " << v.proc << (v.label.empty() ? "" : "/" + v.label) << ": "
         << v.message;
    throw input_error(os.str());
  }
  cia::program low = cia::lower(p);
  auto post = cia::validate(low);
  if (!post.empty())
    throw input_error(path + ": lowering produced an invalid program: " +
                      post.front().message);
  return low;
}

struct pair_setup {
  cia::program p1, p2;
  cia::node_map map;
  cia::dependency_relation dep1, dep2;
};

pair_setup load_pair(const std::string& v1, const std::string& v2,
                     const std::string& map_file) {
  cia::program a = load_lowered(v1);
  cia::program b = load_lowered(v2);
  auto [n1, n2] = cia::normalize_pair(a, b);
  pair_setup s;
  s.p1 = std::move(n1);
  s.p2 = std::move(n2);
  if (map_file.empty()) {
    s.map = cia::structural_diff(s.p1, s.p2);
  } else {
    std::ifstream in(map_file);
    if (!in) throw input_error("cannot open map file '" + map_file + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    s.map = cia::load_map_json(ss.str(), s.p1, s.p2);
  }
  s.dep1 = cia::compute_depends(s.p1);
  s.dep2 = cia::compute_depends(s.p2);
  return s;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << content;
}

cia::store parse_inputs(const cia::program& p, const std::vector<std::string>& kvs) {
  cia::store s;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw input_error("bad --input '" + kv + "', expected name=value");
    std::string name = kv.substr(0, eq);
    std::int64_t val = std::stoll(kv.substr(eq + 1));
    s.bind(name, val);
  }
  for (const auto& x : p.main().ins)
    if (!s.bound(x)) throw input_error("missing --input for formal '" + x + "'");
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"change-impact analysis for a small imperative IR"};
  app.require_subcommand(1);

  long fuel = env_long("CIA_FUEL", 100000);
  long enum_budget = env_long("CIA_ENUM_BUDGET", 200000);

  // analyze
  std::string a_v1, a_v2, a_map, a_mode = "sem", a_k = "inf", a_report = "json";
  std::string a_out, a_emit_dir, a_checker = "enum";
  bool a_dump_depends = false, a_dump_equivs = false;
  auto* analyze = app.add_subcommand("analyze", "impact analysis over a version pair");
  analyze->add_option("--v1", a_v1, "version 1 file")->required();
  analyze->add_option("--v2", a_v2, "version 2 file")->required();
  analyze->add_option("--mode", a_mode, "dcia | sem")->check(CLI::IsMember({"dcia", "sem"}));
  analyze->add_option("--k", a_k, "widening bound: integer or 'inf'");
  analyze->add_option("--map", a_map, "external map file (json)");
  analyze->add_option("--report", a_report, "json | text")->check(CLI::IsMember({"json", "text"}));
  analyze->add_option("--fuel", fuel, "interpreter step budget");
  analyze->add_option("--enum-budget", enum_budget, "checker execution budget");
  analyze->add_option("--checker", a_checker, "enum | smt-stub")
      ->check(CLI::IsMember({"enum", "smt-stub"}));
  analyze->add_option("-o,--out", a_out, "output file (default stdout)");
  analyze->add_option("--emit-iterations", a_emit_dir, "directory for per-iteration reports");
  analyze->add_flag("--dump-depends", a_dump_depends, "emit dependency relations");
  analyze->add_flag("--dump-equivs", a_dump_equivs, "emit inferred equivalences");

  // diff
  std::string d_v1, d_v2, d_out;
  bool d_check = false;
  auto* diff = app.add_subcommand("diff", "structural diff map between versions");
  diff->add_option("--v1", d_v1)->required();
  diff->add_option("--v2", d_v2)->required();
  diff->add_option("-o,--out", d_out, "map output file");
  diff->add_flag("--check-soundness", d_check, "bounded soundness check of the map");

  // run
  std::string r_file;
  std::vector<std::string> r_inputs;
  bool r_lower = false;
  auto* runc = app.add_subcommand("run", "interpret a program and dump the trace");
  runc->add_option("file", r_file, "program file")->required();
  runc->add_option("--input", r_inputs, "input binding name=value (repeatable)");
  runc->add_option("--fuel", fuel, "interpreter step budget");
  runc->add_flag("--lower", r_lower, "lower before running");

  // oracle
  std::string o_v1, o_v2, o_report = "text", o_out;
  bool o_havoc = false;
  auto* oracle = app.add_subcommand("oracle", "ground-truth verdicts by enumeration");
  oracle->add_option("--v1", o_v1)->required();
  oracle->add_option("--v2", o_v2)->required();
  oracle->add_option("--fuel", fuel);
  oracle->add_option("--report", o_report, "json | text")->check(CLI::IsMember({"json", "text"}));
  oracle->add_option("-o,--out", o_out);
  oracle->add_flag("--havoc-uninit", o_havoc, "enumerate uninitialized reads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      pair_setup s = load_pair(a_v1, a_v2, a_map);
      cia::impact_result base = cia::dcia(s.p1, s.p2, s.map, s.dep1, s.dep2);

      cia::report_input rin;
      rin.dcia_result = &base;
      rin.map = &s.map;
      rin.mode = a_mode;

      cia::anytime_result any;
      cia::impact_result sem;
      if (a_mode == "sem") {
        cia::anytime_options opts;
        opts.k_max = (a_k == "inf") ? -1 : std::stoi(a_k);
        opts.checker.enum_budget = enum_budget;
        opts.checker.sem.fuel = fuel;
        opts.checker.backend = a_checker == "enum"
                                   ? cia::checker_config::backend_kind::enumerative
                                   : cia::checker_config::backend_kind::smt_stub;
        any = cia::sem_dcia_anytime(s.p1, s.p2, s.map, s.dep1, s.dep2, opts);
        sem = any.final_impact();
        rin.sem_result = &sem;
        rin.anytime = &any;
        if (!a_emit_dir.empty()) {
          std::filesystem::create_directories(a_emit_dir);
          for (const auto& it : any.iterations) {
            cia::report_input iter_in;
            iter_in.dcia_result = &base;
            iter_in.sem_result = &it.impact;
            iter_in.map = &s.map;
            iter_in.mode = "sem";
            write_output(a_emit_dir + "/iteration_" + std::to_string(it.k) + ".json",
                         cia::report_json(iter_in));
          }
        }
        if (a_dump_equivs) std::cerr << cia::equivs_json(any.eq);
      } else {
        rin.sem_result = &base;
      }
      if (a_dump_depends)
        std::cerr << cia::depends_json(s.p1, s.dep1, s.p2, s.dep2);
      write_output(a_out, a_report == "json" ? cia::report_json(rin)
                                             : cia::report_text(rin));
      return exit_ok;
    }

    if (*diff) {
      pair_setup s = load_pair(d_v1, d_v2, "");
      if (d_check) {
        cia::semantics_config sc;
        sc.fuel = fuel;
        auto rep = cia::check_map_soundness(s.p1, s.p2, s.map, sc);
        if (!rep.violations.empty()) {
          std::cerr << "map soundness violations found:\n";
          for (const auto& v : rep.violations)
            std::cerr << "  " << v.reason << "\n";
          return exit_internal;
        }
        std::cerr << "no violation found (" << rep.note << ")\n";
      }
      write_output(d_out, cia::save_map_json(s.map));
      return exit_ok;
    }

    if (*runc) {
      cia::program p = cia::parse_program_file(r_file);
      auto pre = cia::validate_pre_lowering(p);
      if (!pre.empty())
        throw input_error(r_file + ": validation failed: " + pre.front().message);
      if (r_lower) p = cia::lower(p);
      cia::semantics_config sc;
      sc.fuel = fuel;
      cia::trace t = cia::run(p, parse_inputs(p, r_inputs), sc);
      std::cout << cia::format_trace(t);
      return exit_ok;
    }

    if (*oracle) {
      pair_setup s = load_pair(o_v1, o_v2, "");
      cia::oracle_config cfg;
      cfg.sem.fuel = fuel;
      cfg.havoc_uninit = o_havoc;
      auto nodes = cia::oracle_impacted(s.p1, s.p2, s.map, cfg);
      auto depof = cia::dep_of(s.p1, s.dep1, s.p2, s.dep2);

      nlohmann::json j;
      j["schema"] = "cia-oracle/1";
      nlohmann::json narr = nlohmann::json::array();
      for (const auto& nv : nodes)
        narr.push_back({{"version", nv.version},
                        {"proc", nv.proc},
                        {"label", nv.label},
                        {"verdict", cia::to_string(nv.v)}});
      j["impacted_nodes"] = narr;

      nlohmann::json pre_arr = nlohmann::json::array();
      nlohmann::json summ_arr = nlohmann::json::array();
      for (const auto& f : s.p1.procs) {
        for (const auto& x : f.ins) {
          auto v = cia::oracle_preequiv(s.p1, s.p2, s.map, f.name, x, cfg);
          pre_arr.push_back({{"proc", f.name}, {"formal", x},
                             {"verdict", cia::to_string(v)}});
        }
        for (const auto& y : f.outs) {
          auto v = cia::oracle_summaryequiv(s.p1, s.p2, f.name, y,
                                            depof[{f.name, y}], cfg);
          summ_arr.push_back({{"proc", f.name}, {"out", y},
                              {"verdict", cia::to_string(v)}});
        }
      }
      j["pre_equiv"] = pre_arr;
      j["summary_equiv"] = summ_arr;

      if (o_report == "json") {
        write_output(o_out, j.dump(2) + "\n");
      } else {
        std::ostringstream os;
        os << "node verdicts:\n";
        for (const auto& nv : nodes)
          os << "  v" << nv.version << " " << nv.proc << ":" << nv.label << " "
             << cia::to_string(nv.v) << "\n";
        os << "pre-equivalence:\n";
        for (const auto& e : pre_arr)
          os << "  " << e["proc"].get<std::string>() << "."
             << e["formal"].get<std::string>() << " "
             << e["verdict"].get<std::string>() << "\n";
        os << "summary-equivalence:\n";
        for (const auto& e : summ_arr)
          os << "  " << e["proc"].get<std::string>() << "."
             << e["out"].get<std::string>() << " "
             << e["verdict"].get<std::string>() << "\n";
        write_output(o_out, os.str());
      }
      return exit_ok;
    }
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const cia::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const cia::ir_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_internal;
}
