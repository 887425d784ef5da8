#pragma once

// Analysis reports. The JSON layout is versioned ("cia-report/1"); the text
// form lists impacted labels grouped by procedure and carries the same counts.

#include <string>

#include "cia/anytime.hpp"
#include "cia/impact.hpp"

namespace cia {

struct report_input {
  const impact_result* dcia_result = nullptr;  // baseline
  const impact_result* sem_result = nullptr;   // refined (may equal baseline)
  const node_map* map = nullptr;
  const anytime_result* anytime = nullptr;     // optional, for per-iteration data
  std::string mode = "dcia";                   // "dcia" or "sem"
};

std::string report_json(const report_input& in);
std::string report_text(const report_input& in);

// Relations as JSON tuples (for --dump-depends).
std::string depends_json(const program& p1, const dependency_relation& d1,
                         const program& p2, const dependency_relation& d2);

// Inferred facts with provenance (for --dump-equivs).
std::string equivs_json(const equivalence_set& eq);

}  // namespace cia
