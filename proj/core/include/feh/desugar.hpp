#pragma once

#include <string>

#include "feh/ast.hpp"
#include "feh/parser.hpp"
#include "feh/surface.hpp"

namespace feh {

// Expands all syntactic sugar in a surface expression to core constructors:
// computations in value positions become fresh lets, values in computation
// positions become returns, `c1; c2` becomes a let on an unused binder, and
// mrec unfolds to its inductive rec/let form. Definitions, when provided, are
// inlined at use sites. With allow_free the result may contain free variables
// (tag 0); otherwise they are an error.
CompPtr expand_sugar(const surface::ExprPtr& e, NameSupply& supply,
                     const Signature* sig = nullptr,
                     const std::vector<surface::Def>* defs = nullptr,
                     bool allow_free = false);

// Elaborates the effect declarations of a module into a signature. Entries of
// shape `op : S -> S'` go to the simple block, `op : T -> T' / R1 => R2` to
// the ATM block.
SignaturePtr elaborate_signature(const surface::Module& m);

// Full pipeline: parse, elaborate signature, inline definitions, expand
// sugar, check closedness, alpha-normalize.
Program load_program(const std::string& text);

// Convenience: load_program over a file on disk.
Program load_program_file(const std::string& path);

}  // namespace feh
