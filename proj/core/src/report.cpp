#include "cia/report.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace cia {

using nlohmann::json;

namespace {

const char* provenance_name(fact_provenance p) {
  switch (p) {
    case fact_provenance::dataflow: return "dataflow";
    case fact_provenance::inferred: return "inferred";
    case fact_provenance::assumed: return "assumed";
  }
  return "?";
}

json nodes_json(const impact_result& r, const node_map& m) {
  json arr = json::array();
  for (int v = 0; v < 2; ++v)
    for (const auto& [proc, label] : r.nodes[v])
      arr.push_back({{"version", v + 1},
                     {"proc", proc},
                     {"label", label},
                     {"mapped", m.mapped_in(v + 1, proc, label)}});
  return arr;
}

double reduction_pct(std::size_t base, std::size_t refined) {
  if (base == 0) return 0.0;
  return 100.0 * static_cast<double>(base - refined) / static_cast<double>(base);
}

}  // namespace

std::string report_json(const report_input& in) {
  const impact_result& base = *in.dcia_result;
  const impact_result& sem = in.sem_result ? *in.sem_result : base;
  const node_map& m = *in.map;

  json j;
  j["schema"] = "cia-report/1";
  j["mode"] = in.mode;
  j["impacted_nodes"] = nodes_json(sem, m);
  {
    json arr = json::array();
    for (int v = 0; v < 2; ++v)
      for (const auto& [proc, var] : sem.vars[v])
        arr.push_back({{"version", v + 1}, {"proc", proc}, {"var", var}});
    j["impacted_vars"] = arr;
  }
  {
    json arr = json::array();
    for (const auto& [proc, out] : sem.summs_union())
      arr.push_back({{"proc", proc}, {"out", out}});
    j["impacted_summaries"] = arr;
  }

  std::size_t ndcia = base.nodes_union().size();
  std::size_t nsem = sem.nodes_union().size();
  j["counts"] = {
      {"dcia", ndcia},
      {"sem", nsem},
      {"dcia_mapped", base.mapped_nodes(m).size()},
      {"sem_mapped", sem.mapped_nodes(m).size()},
      {"reduction_pct", reduction_pct(ndcia, nsem)},
  };

  if (in.anytime) {
    json iters = json::array();
    for (const auto& it : in.anytime->iterations)
      iters.push_back({{"k", it.k},
                       {"scope", it.scope},
                       {"eq_facts", it.eq.size()},
                       {"impacted_nodes", it.impact.nodes_union().size()},
                       {"impacted_mapped", it.impact.mapped_nodes(m).size()}});
    j["iterations"] = iters;
  }
  return j.dump(2) + "\n";
}

std::string report_text(const report_input& in) {
  const impact_result& base = *in.dcia_result;
  const impact_result& sem = in.sem_result ? *in.sem_result : base;
  const node_map& m = *in.map;

  std::ostringstream os;
  os << "impacted nodes (" << in.mode << "):\n";
  std::map<std::string, std::set<std::string>> grouped[2];
  for (int v = 0; v < 2; ++v)
    for (const auto& [proc, label] : sem.nodes[v]) grouped[v][proc].insert(label);
  for (int v = 0; v < 2; ++v) {
    if (grouped[v].empty()) continue;
    os << "  version " << (v + 1) << ":\n";
    for (const auto& [proc, labels] : grouped[v]) {
      os << "    " << proc << ":";
      for (const auto& l : labels)
        os << " " << l << (m.mapped_in(v + 1, proc, l) ? "" : "*");
      os << "\n";
    }
  }
  os << "  (* marks changed, unmapped nodes)\n";
  std::size_t ndcia = base.nodes_union().size();
  std::size_t nsem = sem.nodes_union().size();
  os << "counts: dcia=" << ndcia << " sem=" << nsem
     << " dcia_mapped=" << base.mapped_nodes(m).size()
     << " sem_mapped=" << sem.mapped_nodes(m).size() << " reduction="
     << reduction_pct(ndcia, nsem) << "%\n";
  return os.str();
}

std::string depends_json(const program& p1, const dependency_relation& d1,
                         const program& p2, const dependency_relation& d2) {
  json j;
  auto dump = [](const program& p, const dependency_relation& d) {
    json out;
    json dv = json::array();
    for (const auto& [proc, pairs] : d.depends_on_var)
      for (const auto& [y, x] : pairs)
        dv.push_back({{"proc", proc}, {"var", y}, {"on", x}});
    json dn = json::array();
    for (const auto& [proc, pairs] : d.depends_on_node)
      for (const auto& [y, lbl] : pairs)
        dn.push_back({{"proc", proc}, {"var", y}, {"node", lbl}});
    out["depends_on_var"] = dv;
    out["depends_on_node"] = dn;
    (void)p;
    return out;
  };
  j["version1"] = dump(p1, d1);
  j["version2"] = dump(p2, d2);
  return j.dump(2) + "\n";
}

std::string equivs_json(const equivalence_set& eq) {
  json j;
  json pre = json::array();
  for (const auto& [k, pv] : eq.pre)
    pre.push_back({{"proc", k.first}, {"formal", k.second},
                   {"provenance", provenance_name(pv)}});
  json summ = json::array();
  for (const auto& [k, pv] : eq.summ)
    summ.push_back({{"proc", k.first}, {"out", k.second},
                    {"provenance", provenance_name(pv)}});
  j["pre_equiv"] = pre;
  j["summary_equiv"] = summ;
  return j.dump(2) + "\n";
}

}  // namespace cia
