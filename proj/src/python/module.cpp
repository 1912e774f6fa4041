#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>

#include "stmcheck/driver.hpp"
#include "stmcheck/pretty.hpp"
#include "stmcheck/transform.hpp"

namespace py = pybind11;
using namespace stmcheck;

namespace {

DriverOptions make_options(const std::optional<std::string>& transaction, int fuel,
                           int inline_depth, int samples, std::uint64_t seed,
                           std::size_t gamma_cap, bool witness_search) {
  DriverOptions opts;
  opts.transaction = transaction;
  opts.check.fuel = fuel;
  opts.check.inline_depth = inline_depth;
  opts.check.samples = samples;
  opts.check.seed = seed;
  opts.check.gamma_cap = gamma_cap;
  opts.check.witness_search = witness_search;
  return opts;
}

std::string check_source_json(const std::string& text, const std::string& file,
                              const std::optional<std::string>& transaction,
                              int fuel, int inline_depth, int samples,
                              std::uint64_t seed, std::size_t gamma_cap,
                              bool witness_search) {
  reset_fresh_names();
  SourceUnit unit = parse(text, file);
  Report rep = run_checks(unit, make_options(transaction, fuel, inline_depth,
                                             samples, seed, gamma_cap,
                                             witness_search));
  return render_json(rep);
}

// name, variant index, purified term, transformed contract; one tuple per
// orElse variant of each transaction.
std::vector<std::tuple<std::string, int, std::string, std::string>> purify(
    const std::string& text, const std::optional<std::string>& transaction) {
  reset_fresh_names();
  SourceUnit unit = parse(text, "<memory>");
  Program specialized = specialize_tvar_params(unit.program);
  CheckedProgram prog = check_program(specialized);
  std::vector<std::tuple<std::string, int, std::string, std::string>> out;
  for (const auto& tx : prog.program.transactions) {
    if (transaction && tx.name != *transaction) continue;
    std::vector<PureVariant> pvs = purify_transaction(tx, prog);
    for (size_t i = 0; i < pvs.size(); ++i)
      out.emplace_back(tx.name, static_cast<int>(i), pretty_expr(pvs[i].expr),
                       pretty_contract(pvs[i].contract));
  }
  return out;
}

py::dict info(const std::string& text) {
  reset_fresh_names();
  SourceUnit unit = parse(text, "<memory>");
  const Program& p = unit.program;
  py::dict d;
  py::list tvars, functions, transactions;
  for (const auto& tv : p.tvars) tvars.append(tv.name);
  for (const auto& f : p.functions) functions.append(f.name);
  for (const auto& tx : p.transactions) transactions.append(tx.name);
  d["tvars"] = tvars;
  d["functions"] = functions;
  d["transactions"] = transactions;
  d["invariant"] = p.invariant ? py::object(py::str(*p.invariant)) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_stmcheck, m) {
  m.doc() = "static contract checking of STM transactions";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const SyntaxError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const TypeError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const TransformError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const CheckError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("check_source_json", &check_source_json, py::arg("text"),
        py::arg("file") = "<memory>", py::arg("transaction") = std::nullopt,
        py::arg("fuel") = 1000, py::arg("inline_depth") = 3,
        py::arg("samples") = 200, py::arg("seed") = 0,
        py::arg("gamma_cap") = 64, py::arg("witness_search") = true,
        "Check a program and return the JSON report as a string.");
  m.def("purify", &purify, py::arg("text"), py::arg("transaction") = std::nullopt,
        "Purified (transaction, variant, term, contract) rows.");
  m.def("info", &info, py::arg("text"),
        "Declaration names of a parsed program.");
}
