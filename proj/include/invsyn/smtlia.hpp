#pragma once

#include <iosfwd>

namespace invsyn::smtlia {

// SMT-LIB 2 read-eval loop for QF_LIA: declare-const/declare-fun, assert,
// check-sat, get-value, reset, exit.  Decision procedure is lazy DPLL over the
// Boolean skeleton with exact-rational feasibility pruning and branch-and-bound
// for integrality.  Returns the process exit code.
int run_repl(std::istream& in, std::ostream& out);

}  // namespace invsyn::smtlia
