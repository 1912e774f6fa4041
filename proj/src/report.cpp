#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "stmcheck/driver.hpp"

namespace stmcheck {

VerdictKind overall_status(const Report& r) {
  bool unknown = false;
  for (const auto* list : {&r.transactions, &r.functions}) {
    for (const auto& e : *list) {
      if (e.verdict == VerdictKind::Unsafe) return VerdictKind::Unsafe;
      if (e.verdict == VerdictKind::Unknown) unknown = true;
    }
  }
  return unknown ? VerdictKind::Unknown : VerdictKind::Safe;
}

int exit_code_for(VerdictKind k) {
  switch (k) {
    case VerdictKind::Safe: return 0;
    case VerdictKind::Unsafe: return 1;
    case VerdictKind::Unknown: return 2;
  }
  return 2;
}

namespace {

std::string ms_string(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", ms);
  return buf;
}

void entry_text(std::ostringstream& out, const char* kind, const ReportEntry& e,
                bool timings) {
  out << kind << ' ' << e.name << ": " << verdict_name(e.verdict);
  if (e.variants != 1) out << " [" << e.variants << " variants]";
  if (timings) out << " (" << ms_string(e.ms) << " ms)";
  out << '\n';
  if (e.witness) out << "  witness: " << *e.witness << '\n';
  if (e.residual) out << "  residual: " << *e.residual << '\n';
}

nlohmann::ordered_json entry_json(const ReportEntry& e, bool timings) {
  nlohmann::ordered_json j;
  j["name"] = e.name;
  j["verdict"] = verdict_name(e.verdict);
  j["variants"] = e.variants;
  if (e.witness) j["witness"] = *e.witness;
  if (e.residual) j["residual"] = *e.residual;
  if (timings) j["ms"] = e.ms;
  return j;
}

}  // namespace

std::string render_text(const Report& r) {
  std::ostringstream out;
  out << r.file << '\n';
  for (const auto& e : r.transactions) entry_text(out, "transaction", e, r.timings);
  for (const auto& e : r.functions) entry_text(out, "function", e, r.timings);
  out << "overall: " << verdict_name(r.status) << '\n';
  return out.str();
}

std::string render_json(const Report& r) {
  nlohmann::ordered_json j;
  j["file"] = r.file;
  j["status"] = verdict_name(r.status);
  j["transactions"] = nlohmann::ordered_json::array();
  for (const auto& e : r.transactions) j["transactions"].push_back(entry_json(e, r.timings));
  j["functions"] = nlohmann::ordered_json::array();
  for (const auto& e : r.functions) j["functions"].push_back(entry_json(e, r.timings));
  j["config"] = {{"fuel", r.config.fuel},
                 {"inlineDepth", r.config.inline_depth},
                 {"samples", r.config.samples},
                 {"seed", r.config.seed}};
  return j.dump(2) + "\n";
}

}  // namespace stmcheck
