#ifndef BLOCKSPEC_FAMILY_JSON_HPP
#define BLOCKSPEC_FAMILY_JSON_HPP

#include <iosfwd>
#include <string>

#include "blockspec/family.hpp"

namespace blockspec {

/// Family description files.
///
/// Explicit:
///   {"kind":"explicit",
///    "blocks":[[[[2,0]]],[[[3,0]]]],
///    "measure":"counting"}
/// where a block is an array of rows, a row an array of entries, and an
/// entry either [re,im] or a plain (real) number. A block may also be an
/// object {"entries":[...],"normal":true,"nilpotency_order":2}.
///
/// Generator (fixture-backed):
///   {"kind":"generator","name":"harmonic_diag","params":{},
///    "tail":{"N0":1,"upper":"1/n"}}
/// params: "alpha" (array of numbers or [re,im] pairs), "alpha_expr"
/// (expression in n), "nq" (volterra grid). "tail" overrides the fixture's
/// declared envelopes: N0, upper, lower, singular (array of expressions),
/// dim_bound. "measure" is "counting" or an array of positive weights.
BlockFamily load_family_text(const std::string& text);

/// Reads from a path, or standard input when the path is "-".
BlockFamily load_family_file(const std::string& path, std::istream& stdin_stream);

}  // namespace blockspec

#endif
