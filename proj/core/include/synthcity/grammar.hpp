#ifndef SYNTHCITY_GRAMMAR_HPP
#define SYNTHCITY_GRAMMAR_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthcity/geometry.hpp"
#include "synthcity/mesh.hpp"

namespace synthcity {

// A small CGA-inspired shape grammar. Source files (.sg) hold attribute
// declarations, terminal declarations, and rewrite rules:
//
//   # comment
//   attr height = rand(9, 24)
//   terminal Lawn : Vegetation
//   Lot  --> setback(2) Parcel
//   Parcel --> extrude(height) Mass
//   Mass --> comp(faces) { top: Top side: Wall }
//   Top  --> 40%: roof(gable, 30) 60%: roof(flat)
//
// Derivation starts at the "Lot" symbol. The reserved symbol NIL discards
// its shape.

enum class SplitAxis : uint8_t { x = 0, y = 1, z = 2 };
enum class RoofKind : uint8_t { flat = 0, gable = 1, hip = 2 };
enum class CompFace : uint8_t { top = 0, side = 1, bottom = 2 };

/// Numeric expression in rule arguments and attribute declarations:
/// a literal, a reference to a declared attribute, or rand(lo, hi) drawn
/// uniformly per evaluation.
struct Expr {
  enum class Kind : uint8_t { literal, attr_ref, random_range };
  Kind kind = Kind::literal;
  double value = 0.0;  // literal
  std::string name;    // attr_ref
  double lo = 0.0;     // random_range
  double hi = 0.0;

  static Expr lit(double v) { return {Kind::literal, v, {}, 0.0, 0.0}; }
};

struct SplitPart {
  bool relative = false;  // ~w entries share the residual length
  Expr size;
  std::string symbol;
};

struct Op {
  enum class Kind : uint8_t {
    extrude,
    split,
    comp,
    setback,
    roof,
    color,
    texture
  };
  Kind kind = Kind::extrude;
  std::vector<Expr> args;                 // extrude/setback/color/roof pitch
  SplitAxis axis = SplitAxis::x;          // split
  std::vector<SplitPart> parts;           // split
  std::map<CompFace, std::string> faces;  // comp
  RoofKind roof_kind = RoofKind::flat;    // roof
  std::string texture_name;               // texture
};

/// One element of a successor: either an operation or a symbol emission.
struct Item {
  bool is_op = false;
  Op op;
  std::string symbol;
};

struct Successor {
  double weight = 1.0;       // normalized; weights of a rule sum to 1
  double raw_percent = 0.0;  // as written, 0 when the rule has one successor
  std::vector<Item> items;
};

struct Rule {
  std::string predecessor;
  std::vector<Successor> successors;
};

struct AttrDecl {
  std::string name;
  Expr value;
};

struct GrammarProgram {
  std::vector<AttrDecl> attrs;                    // in declaration order
  std::map<std::string, Rule> rules;              // by predecessor
  std::map<std::string, SemanticClass> terminals; // declared leaf symbols
  int recursion_limit = 64;

  /// Every symbol emitted by a rule must have a rule of its own, be a
  /// declared terminal, or be the reserved discard symbol NIL. Throws
  /// Error(undefined_symbol) otherwise.
  void link_check() const;
};

/// Parse grammar source. Throws Error(syntax_error) with line/column,
/// Error(unknown_operation) for an unrecognized op name, and
/// Error(non_positive_weight) for a non-positive stochastic weight.
/// Referenced-but-undefined symbols are reported later by link_check.
GrammarProgram parse_grammar(std::string_view text);

/// Canonical source form; parse(pretty_print(parse(text))) reproduces the
/// same program.
std::string pretty_print(const GrammarProgram& program);

/// Split size entry after expression evaluation.
struct SizeSpec {
  bool relative = false;
  double value = 0.0;
};

/// Partition scope_len: absolute entries keep their size, relative entries
/// share the residual proportionally to their weights. The final entry
/// absorbs float rounding so the result sums to scope_len exactly.
/// Throws Error(split_overflow) when the absolute sizes exceed scope_len and
/// Error(split_underflow) when a positive residual has no relative entry.
std::vector<double> apply_split(double scope_len,
                                std::span<const SizeSpec> spec);

/// Derive a labeled building mesh for a lot polygon. Deterministic in
/// (lot, program, seed); every produced triangle carries a semantic class
/// and a material from the mesh's own palette. `palette` (optional) resolves
/// texture(name) references; unresolved names fall back to a neutral gray.
/// `instance` tags all produced triangles (one building = one instance).
/// Throws Error(empty_derivation) when the program has no Lot rule and
/// Error(recursion_limit) past program.recursion_limit rewrites deep.
LabeledMesh derive(const Polygon& lot, const GrammarProgram& program,
                   uint64_t seed, const Palette* palette = nullptr,
                   uint32_t instance = 0);

}  // namespace synthcity

#endif  // SYNTHCITY_GRAMMAR_HPP
