#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stmcheck/checker.hpp"
#include "stmcheck/parser.hpp"

namespace stmcheck {

struct ReportEntry {
  std::string name;
  VerdictKind verdict = VerdictKind::Unknown;
  int variants = 1;
  std::optional<std::string> witness;
  std::optional<std::string> residual;
  double ms = 0.0;
};

struct Report {
  std::string file;
  VerdictKind status = VerdictKind::Safe;
  std::vector<ReportEntry> transactions;
  std::vector<ReportEntry> functions;
  CheckConfig config;
  bool timings = false;  // include per-entry milliseconds in the rendering
};

struct DriverOptions {
  std::optional<std::string> transaction;  // restrict to this transaction
  CheckConfig check;
  bool dump_pure = false;
  bool timings = false;
};

// Specializes TVar-parameterized functions, typechecks, then checks every
// transaction and every contract-carrying function, in declaration order.
// `dump` receives the purified transactions when dump_pure is set.
Report run_checks(const SourceUnit& unit, const DriverOptions& opts,
                  std::ostream* dump = nullptr);

// Safe iff every entry is Safe; Unsafe dominates Unknown.
VerdictKind overall_status(const Report& r);

std::string render_text(const Report& r);
std::string render_json(const Report& r);

// 0 all Safe, 1 some Unsafe, 2 some Unknown and none Unsafe.
int exit_code_for(VerdictKind k);

// The command line: `check <file>` plus flags. Returns the exit code; usage,
// parse, type, and transform errors map to 3 with a diagnostic on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace stmcheck
