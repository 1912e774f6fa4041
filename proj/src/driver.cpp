#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "stmcheck/driver.hpp"
#include "stmcheck/pretty.hpp"
#include "stmcheck/transform.hpp"

namespace stmcheck {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ReportEntry make_entry(const std::string& name, const Verdict& v, double ms) {
  ReportEntry e;
  e.name = name;
  e.verdict = v.kind;
  e.variants = v.variants;
  e.witness = v.witness;
  if (v.kind != VerdictKind::Safe && v.residual)
    e.residual = pretty_expr(v.residual);
  e.ms = ms;
  return e;
}

}  // namespace

Report run_checks(const SourceUnit& unit, const DriverOptions& opts,
                  std::ostream* dump) {
  Report rep;
  rep.file = unit.path;
  rep.config = opts.check;
  rep.timings = opts.timings;

  Program specialized = specialize_tvar_params(unit.program);
  CheckedProgram prog = check_program(specialized);

  bool found = false;
  for (const auto& tx : prog.program.transactions) {
    if (opts.transaction && tx.name != *opts.transaction) continue;
    found = true;
    Clock::time_point t0 = Clock::now();
    Verdict v = check_transaction(tx, prog, opts.check);
    rep.transactions.push_back(make_entry(tx.name, v, ms_since(t0)));
    if (opts.dump_pure && dump) {
      std::vector<PureVariant> pvs = purify_transaction(tx, prog, opts.check);
      for (size_t i = 0; i < pvs.size(); ++i) {
        *dump << tx.name;
        if (pvs.size() > 1) *dump << " [variant " << i + 1 << "/" << pvs.size() << "]";
        *dump << ":\n  " << pretty_expr(pvs[i].expr) << "\n  "
              << pretty_contract(pvs[i].contract) << "\n";
      }
    }
  }
  if (opts.transaction && !found)
    throw CheckError("unknown transaction: " + *opts.transaction);

  if (!opts.transaction) {
    for (const auto& f : prog.program.functions) {
      if (!f.contract) continue;
      Clock::time_point t0 = Clock::now();
      Verdict v = modular_check_function(f.name, prog, opts.check);
      rep.functions.push_back(make_entry(f.name, v, ms_since(t0)));
    }
  }

  rep.status = overall_status(rep);
  return rep;
}

int run_cli(const std::vector<std::string>& args_in, std::ostream& out,
            std::ostream& err) {
  std::vector<std::string> args = args_in;
  if (!args.empty() && args[0] == "check") args.erase(args.begin());

  CLI::App app{"static contract checking of STM transactions"};
  app.name("stmcheck");
  std::string file;
  std::string format = "text";
  std::string transaction;
  bool no_witness = false;
  DriverOptions opts;
  app.add_option("file", file, "program to check (.stm)")->required();
  app.add_option("--transaction", transaction, "check only this transaction");
  app.add_option("--fuel", opts.check.fuel, "simplifier rewrite budget");
  app.add_option("--inline-depth", opts.check.inline_depth,
                 "inlinings of one function per call chain");
  app.add_option("--samples", opts.check.samples, "witness search budget");
  app.add_option("--seed", opts.check.seed, "witness search seed");
  app.add_option("--gamma-cap", opts.check.gamma_cap,
                 "orElse variant explosion limit");
  app.add_flag("--dump-pure", opts.dump_pure,
               "print the purified transactions before the report");
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--no-witness-search", no_witness,
               "report Unknown without hunting counterexamples");
  app.add_flag("--timings", opts.timings, "include per-check milliseconds");

  // CLI11 writes its own usage text; route it through our streams. Its
  // vector overload consumes arguments back to front.
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  opts.check.witness_search = !no_witness;
  if (!transaction.empty()) opts.transaction = transaction;

  try {
    reset_fresh_names();
    std::ifstream in(file, std::ios::binary);
    if (!in) {
      err << "error: cannot open " << file << "\n";
      return 3;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    SourceUnit unit = parse(buf.str(), file);
    std::ostringstream dumped;
    Report rep = run_checks(unit, opts, opts.dump_pure ? &dumped : nullptr);
    if (opts.dump_pure) out << dumped.str();
    out << (format == "json" ? render_json(rep) : render_text(rep));
    return exit_code_for(rep.status);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace stmcheck
